//! Langevin equation `dφ = a dt + b dW` with `a = A`, `b bᵀ = B`, integrated
//! by Euler–Maruyama with `dW = ε √dt`, `ε ~ N(0, 1)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ensemble::TimeSeries;
use crate::rng::{replicate_rng, run_replicas};
use crate::scheme::InteractionScheme;
use crate::stochastization::{drift, drift_diffusion, Convention, StochasticError};

pub use crate::ensemble::{ensemble_stats, EnsembleError, EnsembleStats};

/// Eigenvalues at or below this are treated as zero and dropped.
pub const RANK_TOLERANCE: f64 = 1e-12;
/// Eigenvalues below `-PSD_TOLERANCE` make `B` unfactorizable.
pub const PSD_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LangevinError {
    #[error(
        "diffusion matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue})"
    )]
    NotPositiveSemidefinite { min_eigenvalue: f64 },
    #[error("diffusion matrix is not symmetric")]
    NotSymmetric,
    #[error("diffusion is not positive semidefinite at t = {time}, state {state:?} (smallest eigenvalue {min_eigenvalue})")]
    StrictAbort {
        time: f64,
        step: usize,
        state: Vec<f64>,
        min_eigenvalue: f64,
    },
    #[error("time step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error(transparent)]
    Stochastic(#[from] StochasticError),
}

/// `b` with `b bᵀ = B`, one column per retained eigenvalue.
///
/// Columns are `v_k √λ_k` in order of decreasing eigenvalue; a 1×1 matrix is
/// factored as `√B` directly.
pub fn diffusion_factor(b: &DMatrix<f64>) -> Result<DMatrix<f64>, LangevinError> {
    let n = b.nrows();
    assert_eq!(n, b.ncols(), "diffusion matrix must be square");
    let scale = 1.0 + b.amax();
    for i in 0..n {
        for j in 0..i {
            if (b[(i, j)] - b[(j, i)]).abs() > 1e-12 * scale {
                return Err(LangevinError::NotSymmetric);
            }
        }
    }
    if n == 1 {
        let v = b[(0, 0)];
        if v < -PSD_TOLERANCE || v.is_nan() {
            return Err(LangevinError::NotPositiveSemidefinite { min_eigenvalue: v });
        }
        return Ok(if v <= RANK_TOLERANCE {
            DMatrix::zeros(1, 0)
        } else {
            DMatrix::from_element(1, 1, v.sqrt())
        });
    }
    let eig = SymmetricEigen::new(b.clone());
    let min = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min < -PSD_TOLERANCE || min.is_nan() {
        return Err(LangevinError::NotPositiveSemidefinite {
            min_eigenvalue: min,
        });
    }
    let mut order: Vec<usize> = (0..n)
        .filter(|&k| eig.eigenvalues[k] > RANK_TOLERANCE)
        .collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut out = DMatrix::zeros(n, order.len());
    for (col, &k) in order.iter().enumerate() {
        let s = eig.eigenvalues[k].sqrt();
        for i in 0..n {
            out[(i, col)] = eig.eigenvectors[(i, k)] * s;
        }
    }
    Ok(out)
}

/// What to do when `B` cannot be factored at a visited state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffusionPolicy {
    /// Abort with the offending state and time.
    #[default]
    Strict,
    /// Record an event and take a noise-free step.
    Clamp,
}

impl FromStr for DiffusionPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(Self::Strict),
            "clamp" => Ok(Self::Clamp),
            other => Err(format!("unknown policy `{other}` (expected strict|clamp)")),
        }
    }
}

impl fmt::Display for DiffusionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Strict => "strict",
            Self::Clamp => "clamp",
        })
    }
}

/// Langevin model of a scheme; drift and diffusion are evaluated from the
/// scheme at every visited state.
#[derive(Debug, Clone)]
pub struct SdeModel<'a> {
    pub scheme: &'a InteractionScheme,
    pub convention: Convention,
    pub policy: DiffusionPolicy,
    /// With noise off the integrator is plain explicit Euler on the drift.
    pub noise: bool,
}

impl<'a> SdeModel<'a> {
    pub fn new(scheme: &'a InteractionScheme, convention: Convention) -> Self {
        Self {
            scheme,
            convention,
            policy: DiffusionPolicy::Strict,
            noise: true,
        }
    }

    pub fn with_policy(mut self, policy: DiffusionPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn without_noise(mut self) -> Self {
        self.noise = false;
        self
    }

    pub fn dimension(&self) -> usize {
        self.scheme.order()
    }

    /// Normals drawn per step. Only the first `rank(B)` are used at a given
    /// state, so streams stay aligned when the rank changes.
    pub fn wiener_dimension(&self) -> usize {
        self.dimension()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LangevinEvent {
    /// `B` failed to factor; the step was taken without noise.
    InvalidDiffusion {
        step: usize,
        time: f64,
        state: Vec<f64>,
        min_eigenvalue: f64,
    },
    /// A component went negative and was reset to 0.
    FloorClamp {
        step: usize,
        time: f64,
        species: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LangevinPath {
    pub series: TimeSeries,
    pub events: Vec<LangevinEvent>,
}

fn check_inputs(model: &SdeModel<'_>, x0: &[f64], dt: f64) -> Result<(), LangevinError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(LangevinError::InvalidStep(dt));
    }
    if x0.len() != model.dimension() {
        return Err(StochasticError::Arity {
            expected: model.dimension(),
            got: x0.len(),
        }
        .into());
    }
    Ok(())
}

/// Integrates `steps` steps for stream `replicate`, recording every
/// `record_every`-th state (plus the initial one).
pub fn euler_maruyama_replicate(
    model: &SdeModel<'_>,
    x0: &[f64],
    dt: f64,
    steps: usize,
    seed: u64,
    replicate: u64,
    record_every: usize,
) -> Result<LangevinPath, LangevinError> {
    check_inputs(model, x0, dt)?;
    let record_every = record_every.max(1);
    let n = model.dimension();
    let sqrt_dt = dt.sqrt();
    let mut rng = replicate_rng(seed, replicate);
    let mut noise = vec![0.0; model.wiener_dimension()];
    let mut x = x0.to_vec();
    let mut events = Vec::new();
    let mut series = TimeSeries {
        times: vec![0.0],
        values: vec![x.clone()],
    };

    for k in 0..steps {
        let time = k as f64 * dt;
        let next: Vec<f64> = if model.noise {
            let dd = drift_diffusion(model.scheme, &x, model.convention)?;
            let b = match diffusion_factor(&dd.diffusion) {
                Ok(b) => b,
                Err(LangevinError::NotPositiveSemidefinite { min_eigenvalue }) => {
                    match model.policy {
                        DiffusionPolicy::Strict => {
                            return Err(LangevinError::StrictAbort {
                                time,
                                step: k,
                                state: x,
                                min_eigenvalue,
                            })
                        }
                        DiffusionPolicy::Clamp => {
                            events.push(LangevinEvent::InvalidDiffusion {
                                step: k,
                                time,
                                state: x.clone(),
                                min_eigenvalue,
                            });
                            DMatrix::zeros(n, 0)
                        }
                    }
                }
                Err(e) => return Err(e),
            };
            for e in noise.iter_mut() {
                *e = StandardNormal.sample(&mut rng);
            }
            (0..n)
                .map(|i| {
                    let mut v = x[i] + dd.drift[i] * dt;
                    for a in 0..b.ncols() {
                        v += b[(i, a)] * noise[a] * sqrt_dt;
                    }
                    v
                })
                .collect()
        } else {
            let a = drift(model.scheme, &x)?;
            x.iter().zip(&a).map(|(xi, ai)| xi + ai * dt).collect()
        };
        x = next;
        for (species, xi) in x.iter_mut().enumerate() {
            if *xi < 0.0 {
                *xi = 0.0;
                events.push(LangevinEvent::FloorClamp {
                    step: k + 1,
                    time: (k + 1) as f64 * dt,
                    species,
                });
            }
        }
        if (k + 1) % record_every == 0 || k + 1 == steps {
            series.times.push((k + 1) as f64 * dt);
            series.values.push(x.clone());
        }
    }
    Ok(LangevinPath { series, events })
}

/// Full-resolution path for replicate 0 of `seed`.
pub fn euler_maruyama(
    model: &SdeModel<'_>,
    x0: &[f64],
    dt: f64,
    steps: usize,
    seed: u64,
) -> Result<LangevinPath, LangevinError> {
    euler_maruyama_replicate(model, x0, dt, steps, seed, 0, 1)
}

/// Independent replicas, identical for any thread count.
#[allow(clippy::too_many_arguments)]
pub fn langevin_ensemble(
    model: &SdeModel<'_>,
    x0: &[f64],
    dt: f64,
    steps: usize,
    seed: u64,
    replicas: usize,
    threads: Option<usize>,
    record_every: usize,
) -> Result<Vec<LangevinPath>, LangevinError> {
    check_inputs(model, x0, dt)?;
    run_replicas(replicas, threads, |i| {
        euler_maruyama_replicate(model, x0, dt, steps, seed, i, record_every)
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::parse_scheme;

    fn verhulst() -> InteractionScheme {
        parse_scheme("X -> 2X @ 2 ~ 0.1\nX -> 0 @ 1").unwrap()
    }

    fn max_residual(b: &DMatrix<f64>, f: &DMatrix<f64>) -> f64 {
        (f * f.transpose() - b).amax()
    }

    #[test]
    fn zero_matrix_has_empty_factor() {
        let f = diffusion_factor(&DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(f.shape(), (3, 0));
        assert_eq!(
            diffusion_factor(&DMatrix::zeros(1, 1)).unwrap().shape(),
            (1, 0)
        );
    }

    #[test]
    fn scalar_factor_at_five() {
        let dd = drift_diffusion(&verhulst(), &[5.0], Convention::Paper).unwrap();
        let b = diffusion_factor(&dd.diffusion).unwrap();
        assert!((b[(0, 0)] - 12.5f64.sqrt()).abs() < 1e-12);
        assert!((b[(0, 0)] - 3.5355339).abs() < 1e-7);
    }

    #[test]
    fn negative_scalar_rejected_at_forty() {
        let dd = drift_diffusion(&verhulst(), &[40.0], Convention::Paper).unwrap();
        assert!((dd.diffusion[(0, 0)] + 40.0).abs() < 1e-9);
        assert!(matches!(
            diffusion_factor(&dd.diffusion),
            Err(LangevinError::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn rank_deficient_matrix() {
        // r = (-1, 1) only: B is a multiple of [[1,-1],[-1,1]]
        let b = DMatrix::from_row_slice(2, 2, &[3.0, -3.0, -3.0, 3.0]);
        let f = diffusion_factor(&b).unwrap();
        assert_eq!(f.ncols(), 1);
        assert!(max_residual(&b, &f) <= 1e-9 * (1.0 + b.amax()));
    }

    #[test]
    fn indefinite_and_asymmetric_rejected() {
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            diffusion_factor(&b),
            Err(LangevinError::NotPositiveSemidefinite { .. })
        ));
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert_eq!(diffusion_factor(&b), Err(LangevinError::NotSymmetric));
    }

    #[test]
    fn noise_free_path_is_explicit_euler() {
        let s = verhulst();
        let model = SdeModel::new(&s, Convention::Paper).without_noise();
        let path = euler_maruyama(&model, &[5.0], 0.01, 200, 1).unwrap();
        let mut x = 5.0f64;
        for (k, v) in path.series.values.iter().enumerate().skip(1) {
            x += (2.0 * x - 1.0 * x - 0.1 * x.powi(2)) * 0.01;
            assert_eq!(v[0].to_bits(), x.to_bits(), "step {k}");
        }
    }

    #[test]
    fn same_seed_same_path() {
        let s = verhulst();
        let model = SdeModel::new(&s, Convention::KramersMoyal);
        let a = euler_maruyama(&model, &[5.0], 0.01, 300, 3).unwrap();
        let b = euler_maruyama(&model, &[5.0], 0.01, 300, 3).unwrap();
        assert_eq!(a, b);
        let c = euler_maruyama(&model, &[5.0], 0.01, 300, 4).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn strict_aborts_where_clamp_logs() {
        let s = verhulst();
        let strict = SdeModel::new(&s, Convention::Paper);
        let err = euler_maruyama(&strict, &[35.0], 0.01, 10, 1).unwrap_err();
        assert!(
            matches!(err, LangevinError::StrictAbort { step: 0, time, ref state, .. } if time == 0.0 && state == &vec![35.0])
        );
        let clamp = strict.clone().with_policy(DiffusionPolicy::Clamp);
        let path = euler_maruyama(&clamp, &[35.0], 0.01, 10, 1).unwrap();
        assert!(matches!(
            path.events[0],
            LangevinEvent::InvalidDiffusion { step: 0, .. }
        ));
    }

    #[test]
    fn floor_clamp_keeps_counts_non_negative() {
        let s = parse_scheme("X -> 0 @ 50").unwrap();
        let model = SdeModel::new(&s, Convention::KramersMoyal);
        let path = euler_maruyama(&model, &[1.0], 0.05, 40, 2).unwrap();
        assert!(path.series.values.iter().all(|v| v[0] >= 0.0));
        assert!(path
            .events
            .iter()
            .any(|e| matches!(e, LangevinEvent::FloorClamp { .. })));
    }

    #[test]
    fn replicas_are_independent_of_siblings() {
        let s = verhulst();
        let model = SdeModel::new(&s, Convention::KramersMoyal);
        let all = langevin_ensemble(&model, &[10.0], 0.01, 50, 9, 8, Some(2), 10).unwrap();
        let alone = euler_maruyama_replicate(&model, &[10.0], 0.01, 50, 9, 6, 10).unwrap();
        assert_eq!(all[6], alone);
        assert_eq!(alone.series.len(), 6);
    }
}
