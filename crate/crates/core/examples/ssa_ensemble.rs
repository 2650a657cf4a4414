//! Gillespie ensemble for the Verhulst model compared with the master equation.

use onestep::ensemble::{ensemble_stats, uniform_grid};
use onestep::master_equation::{
    build_generator, evolve_through, max_stable_dt, ssa_ensemble, ssa_sample,
    ProbabilityDistribution,
};
use onestep::{parse_scheme, StateVector, TruncatedLattice};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scheme = parse_scheme("X -> 2X @ 2 ~ 0.1\nX -> 0 @ 1")?;
    let x0 = StateVector(vec![10]);

    let one = ssa_sample(&scheme, &x0, 1.0, 7)?;
    println!(
        "single path: {} jumps, X(1) = {}",
        one.points.len() - 1,
        one.state_at(1.0)
    );

    let grid = uniform_grid(5.0, 10);
    let runs = ssa_ensemble(&scheme, &x0, &grid, 2024, 4000, None)?;
    let stats = ensemble_stats(&runs)?;

    let lattice = TruncatedLattice::uniform(1, 128)?;
    let g = build_generator::<f64>(&scheme, &lattice)?;
    let p0 = ProbabilityDistribution::point_mass(&lattice, &[10])?;
    let cme = evolve_through(&p0, &g, &grid, max_stable_dt(&g))?;

    println!(
        "{:>5} {:>9} {:>7} {:>9} {:>6}",
        "t", "ssa", "se", "cme", "z"
    );
    for (i, e) in cme.iter().enumerate().skip(1) {
        let exact = e.distribution.mean(&lattice)[0];
        let (m, se) = (stats.mean[i][0], stats.std_error[i][0]);
        println!(
            "{:>5} {m:>9.4} {se:>7.4} {exact:>9.4} {:>6.2}",
            grid[i],
            (m - exact) / se
        );
    }
    Ok(())
}
