//! Propensities, jump moments and Fokker-Planck coefficients for the Verhulst
//! model, in both diffusion conventions.

use onestep::stochastization::{
    drift_diffusion, exact_propensities, jump_moment, polynomial_propensities, JumpMoment,
};
use onestep::{parse_scheme, Convention, StateVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scheme = parse_scheme(
        "param lambda = 2\nparam gamma = 0.1\nparam beta = 1\nX -> 2X @ lambda ~ gamma\nX -> 0 @ beta",
    )?;
    println!(
        "{:>3} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "n", "exact s-", "poly s-", "A", "B paper", "B km"
    );
    for n in [0u64, 1, 2, 5, 10, 20, 25, 40] {
        let at = StateVector(vec![n]);
        let exact = exact_propensities(&scheme, &at)?;
        let poly = polynomial_propensities(&scheme, &at)?;
        let x = at.to_real();
        let paper = drift_diffusion(&scheme, &x, Convention::Paper)?;
        let km = drift_diffusion(&scheme, &x, Convention::KramersMoyal)?;
        println!(
            "{n:>3} {:>10.3} {:>10.3} {:>10.3} {:>10.3} {:>10.3}",
            exact[0].backward,
            poly[0].backward,
            paper.drift[0],
            paper.diffusion[(0, 0)],
            km.diffusion[(0, 0)],
        );
    }

    // Higher moments are diagonal: sum over interactions of (sigma+ + (-1)^k sigma-) r^k.
    for order in 1..=4 {
        match jump_moment(&scheme, &[5.0], order)? {
            JumpMoment::First(v) => println!("xi^1(5) = {:?}", v),
            JumpMoment::Second(m) => println!("xi^2(5) = {}", m[(0, 0)]),
            JumpMoment::Diagonal { order, values } => println!("xi^{order}(5) = {:?}", values),
        }
    }
    Ok(())
}
