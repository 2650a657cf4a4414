//! CSV renderings of trajectories, ensemble statistics and distributions.
//!
//! Numbers use Rust's shortest round-trip formatting, so output is
//! byte-stable across runs and platforms.

use std::fmt::Write as _;

use crate::ensemble::{EnsembleStats, TimeSeries};
use crate::lattice::TruncatedLattice;
use crate::master_equation::{ProbabilityDistribution, Trajectory};

/// `t,<species...>`, one row per jump.
pub fn trajectory_csv(species: &[String], trajectory: &Trajectory) -> String {
    let mut out = format!("t,{}\n", species.join(","));
    for (t, s) in &trajectory.points {
        write!(out, "{t}").unwrap();
        for c in s.counts() {
            write!(out, ",{c}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// `t,<species...>`, one row per grid time.
pub fn series_csv(species: &[String], series: &TimeSeries) -> String {
    let mut out = format!("t,{}\n", species.join(","));
    for (t, v) in series.times.iter().zip(&series.values) {
        write!(out, "{t}").unwrap();
        for x in v {
            write!(out, ",{x}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// `t,<s>_mean,<s>_variance,<s>_std_error` for every species `s`.
pub fn stats_csv(species: &[String], stats: &EnsembleStats) -> String {
    let mut out = String::from("t");
    for s in species {
        write!(out, ",{s}_mean,{s}_variance,{s}_std_error").unwrap();
    }
    out.push('\n');
    for k in 0..stats.times.len() {
        write!(out, "{}", stats.times[k]).unwrap();
        for i in 0..species.len() {
            write!(
                out,
                ",{},{},{}",
                stats.mean[k][i], stats.variance[k][i], stats.std_error[k][i]
            )
            .unwrap();
        }
        out.push('\n');
    }
    out
}

/// `state_index,<species...>,p`, every lattice state.
pub fn distribution_csv(
    species: &[String],
    lattice: &TruncatedLattice,
    dist: &ProbabilityDistribution,
) -> String {
    let mut out = format!("state_index,{},p\n", species.join(","));
    for (i, p) in dist.p.iter().enumerate() {
        write!(out, "{i}").unwrap();
        for c in lattice.state(i).counts() {
            write!(out, ",{c}").unwrap();
        }
        writeln!(out, ",{p}").unwrap();
    }
    out
}
