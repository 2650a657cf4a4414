//! Euler-Maruyama paths of the Verhulst Langevin equation.
//!
//! With the paper convention B = sigma+ - sigma- turns negative above
//! n = 30; the strict policy stops there, the clamp policy drops the noise.

use onestep::ensemble::ensemble_stats;
use onestep::langevin::{euler_maruyama, langevin_ensemble, DiffusionPolicy, SdeModel};
use onestep::{parse_scheme, Convention};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scheme = parse_scheme("X -> 2X @ 2 ~ 0.1\nX -> 0 @ 1")?;

    let flow = SdeModel::new(&scheme, Convention::Paper).without_noise();
    let path = euler_maruyama(&flow, &[1.0], 0.01, 1000, 0)?;
    println!(
        "deterministic x(10) = {:.4}",
        path.series.values.last().unwrap()[0]
    );

    let strict = SdeModel::new(&scheme, Convention::Paper);
    match euler_maruyama(&strict, &[35.0], 0.01, 10, 0) {
        Err(e) => println!("strict from 35: {e}"),
        Ok(_) => println!("strict from 35: no abort"),
    }

    for (label, convention, policy) in [
        ("paper/clamp", Convention::Paper, DiffusionPolicy::Clamp),
        (
            "km/strict",
            Convention::KramersMoyal,
            DiffusionPolicy::Strict,
        ),
    ] {
        let model = SdeModel::new(&scheme, convention).with_policy(policy);
        let runs = langevin_ensemble(&model, &[10.0], 0.001, 5000, 11, 2000, None, 1000)?;
        let events: usize = runs.iter().map(|r| r.events.len()).sum();
        let series: Vec<_> = runs.into_iter().map(|r| r.series).collect();
        let stats = ensemble_stats(&series)?;
        print!("{label:<12}");
        for (t, m) in stats.times.iter().zip(&stats.mean) {
            print!(" t={t}:{:.3}", m[0]);
        }
        println!("  ({events} events)");
    }
    Ok(())
}
