use rand::Rng;
use serde::Serialize;

use super::MasterError;
use crate::ensemble::TimeSeries;
use crate::rng::{replicate_rng, run_replicas, StreamRng};
use crate::scheme::{step_operator, InteractionScheme};
use crate::stochastization::{exact_propensities_in, StateVector};

/// Jump times and the state entered at each of them; starts at `(0, x0)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub points: Vec<(f64, StateVector)>,
    pub t_end: f64,
}

impl Trajectory {
    /// State occupied at time `t` (right-continuous).
    pub fn state_at(&self, t: f64) -> &StateVector {
        let k = self.points.partition_point(|(s, _)| *s <= t);
        &self.points[k.saturating_sub(1)].1
    }

    pub fn sample_on(&self, grid: &[f64]) -> TimeSeries {
        TimeSeries {
            times: grid.to_vec(),
            values: grid.iter().map(|&t| self.state_at(t).to_real()).collect(),
        }
    }
}

/// Gillespie direct method. `visit` sees every state entered, starting with `x0`
/// at time 0. Stops at `t_end` or when the total rate vanishes.
fn simulate(
    scheme: &InteractionScheme,
    x0: &StateVector,
    t_end: f64,
    rng: &mut StreamRng,
    mut visit: impl FnMut(f64, &StateVector),
) {
    let steps = step_operator(scheme);
    let mut state = x0.clone();
    let mut t = 0.0;
    visit(t, &state);
    let mut rates = vec![0.0f64; 2 * steps.len()];
    loop {
        let props = exact_propensities_in::<f64>(scheme, state.counts());
        for (k, p) in props.iter().enumerate() {
            rates[2 * k] = p.forward;
            rates[2 * k + 1] = p.backward;
        }
        let total: f64 = rates.iter().sum();
        if total <= 0.0 {
            break;
        }
        let u: f64 = rng.random();
        t += -(1.0 - u).ln() / total;
        if t > t_end {
            break;
        }
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = None;
        for (k, &r) in rates.iter().enumerate() {
            if r > 0.0 {
                chosen = Some(k);
                acc += r;
                if target < acc {
                    break;
                }
            }
        }
        let k = chosen.expect("positive total rate");
        let sign = if k % 2 == 0 { 1 } else { -1 };
        state = state
            .shifted(&steps[k / 2], sign)
            .expect("a jump with positive propensity keeps counts non-negative");
        visit(t, &state);
    }
}

fn check(scheme: &InteractionScheme, x0: &StateVector, t_end: f64) -> Result<(), MasterError> {
    if x0.len() != scheme.order() {
        return Err(MasterError::Arity {
            expected: scheme.order(),
            got: x0.len(),
        });
    }
    if !t_end.is_finite() || t_end < 0.0 {
        return Err(MasterError::InvalidTime(t_end));
    }
    Ok(())
}

/// One exact trajectory for stream `replicate` under `seed`.
pub fn ssa_replicate(
    scheme: &InteractionScheme,
    x0: &StateVector,
    t_end: f64,
    seed: u64,
    replicate: u64,
) -> Result<Trajectory, MasterError> {
    check(scheme, x0, t_end)?;
    let mut rng = replicate_rng(seed, replicate);
    let mut points = Vec::new();
    simulate(scheme, x0, t_end, &mut rng, |t, s| {
        points.push((t, s.clone()))
    });
    Ok(Trajectory { points, t_end })
}

/// One exact trajectory; replicate 0 of `seed`.
pub fn ssa_sample(
    scheme: &InteractionScheme,
    x0: &StateVector,
    t_end: f64,
    seed: u64,
) -> Result<Trajectory, MasterError> {
    ssa_replicate(scheme, x0, t_end, seed, 0)
}

/// Trajectory of stream `replicate` recorded only at the grid times, without
/// storing the jump history.
pub fn ssa_on_grid(
    scheme: &InteractionScheme,
    x0: &StateVector,
    grid: &[f64],
    seed: u64,
    replicate: u64,
) -> Result<TimeSeries, MasterError> {
    let t_end = grid.last().copied().unwrap_or(0.0);
    check(scheme, x0, t_end)?;
    if grid.windows(2).any(|w| w[1] < w[0]) || grid.first().is_some_and(|&t| t < 0.0) {
        return Err(MasterError::InvalidTime(t_end));
    }
    let mut rng = replicate_rng(seed, replicate);
    let mut values: Vec<Vec<f64>> = Vec::with_capacity(grid.len());
    let mut current = x0.to_real();
    simulate(scheme, x0, t_end, &mut rng, |t, s| {
        while values.len() < grid.len() && grid[values.len()] < t {
            values.push(current.clone());
        }
        current = s.to_real();
    });
    while values.len() < grid.len() {
        values.push(current.clone());
    }
    Ok(TimeSeries {
        times: grid.to_vec(),
        values,
    })
}

/// `replicas` independent grid-sampled trajectories, identical for any
/// thread count.
pub fn ssa_ensemble(
    scheme: &InteractionScheme,
    x0: &StateVector,
    grid: &[f64],
    seed: u64,
    replicas: usize,
    threads: Option<usize>,
) -> Result<Vec<TimeSeries>, MasterError> {
    check(scheme, x0, grid.last().copied().unwrap_or(0.0))?;
    run_replicas(replicas, threads, |i| {
        ssa_on_grid(scheme, x0, grid, seed, i)
    })
    .into_iter()
    .collect()
}
