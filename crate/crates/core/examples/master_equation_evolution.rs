//! Truncated master equation for Verhulst growth from a point mass at 10.

use onestep::master_equation::{
    build_generator, evolve_through, max_stable_dt, ProbabilityDistribution,
};
use onestep::{parse_scheme, TruncatedLattice};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scheme = parse_scheme("X -> 2X @ 2 ~ 0.1\nX -> 0 @ 1")?;
    let lattice = TruncatedLattice::uniform(1, 128)?;
    let g = build_generator::<f64>(&scheme, &lattice)?;
    let dt = max_stable_dt(&g);
    println!("dimension {}, nonzeros {}, dt {dt:.3e}", g.dim(), g.nnz());

    let p0 = ProbabilityDistribution::point_mass(&lattice, &[10])?;
    let checkpoints = [0.5, 1.0, 2.0, 5.0, 10.0];
    for e in evolve_through(&p0, &g, &checkpoints, dt)? {
        let d = &e.distribution;
        println!(
            "t={:<5} mean={:8.4} var={:8.4} P(0)={:.3e} leakage={:.1e}",
            d.t,
            d.mean(&lattice)[0],
            d.variance(&lattice)[0],
            d.p[0],
            e.leakage
        );
    }
    Ok(())
}
