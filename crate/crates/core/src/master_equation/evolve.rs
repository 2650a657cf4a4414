use serde::Serialize;

use super::{GeneratorMatrix, MasterError};
use crate::lattice::TruncatedLattice;

/// Tolerance on `Σp = 1` accepted for an initial condition.
const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Largest accepted `dt · max|G_nn|`.
pub const STABILITY_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbabilityDistribution {
    pub p: Vec<f64>,
    pub t: f64,
}

impl ProbabilityDistribution {
    pub fn new(p: Vec<f64>, t: f64) -> Result<Self, MasterError> {
        if p.iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(MasterError::NotADistribution(
                "negative or non-finite entry".into(),
            ));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(MasterError::NotADistribution(format!(
                "entries sum to {total}"
            )));
        }
        Ok(Self { p, t })
    }

    /// All mass on one lattice state.
    pub fn point_mass(lattice: &TruncatedLattice, counts: &[u64]) -> Result<Self, MasterError> {
        let idx = lattice
            .index_of(counts)
            .ok_or_else(|| MasterError::OutsideLattice(counts.to_vec()))?;
        let mut p = vec![0.0; lattice.size()];
        p[idx] = 1.0;
        Ok(Self { p, t: 0.0 })
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn mean(&self, lattice: &TruncatedLattice) -> Vec<f64> {
        let mut m = vec![0.0; lattice.arity()];
        for (i, &pi) in self.p.iter().enumerate() {
            if pi == 0.0 {
                continue;
            }
            for (mk, &c) in m.iter_mut().zip(lattice.state(i).counts()) {
                *mk += pi * c as f64;
            }
        }
        m
    }

    pub fn variance(&self, lattice: &TruncatedLattice) -> Vec<f64> {
        let mean = self.mean(lattice);
        let mut v = vec![0.0; lattice.arity()];
        for (i, &pi) in self.p.iter().enumerate() {
            for ((vk, &c), mk) in v.iter_mut().zip(lattice.state(i).counts()).zip(&mean) {
                let d = c as f64 - mk;
                *vk += pi * d * d;
            }
        }
        v
    }
}

/// Outcome of integrating `dp/dt = G p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evolution {
    /// Renormalized distribution at the end time.
    pub distribution: ProbabilityDistribution,
    /// Probability mass absorbed at the truncation boundary, `1 − Σp` before
    /// renormalization.
    pub leakage: f64,
    /// Most negative entry seen before clamping (0 if none).
    pub min_entry: f64,
    pub steps: usize,
    pub dt: f64,
}

/// Largest step the stability guard admits for `g`.
pub fn max_stable_dt(g: &GeneratorMatrix<f64>) -> f64 {
    let d = g.max_abs_diagonal();
    if d == 0.0 {
        f64::INFINITY
    } else {
        STABILITY_LIMIT / d
    }
}

fn rk4_step(g: &GeneratorMatrix<f64>, p: &mut [f64], h: f64, scratch: &mut [Vec<f64>; 5]) {
    let [k1, k2, k3, k4, tmp] = scratch;
    g.apply(p, k1);
    for i in 0..p.len() {
        tmp[i] = p[i] + 0.5 * h * k1[i];
    }
    g.apply(tmp, k2);
    for i in 0..p.len() {
        tmp[i] = p[i] + 0.5 * h * k2[i];
    }
    g.apply(tmp, k3);
    for i in 0..p.len() {
        tmp[i] = p[i] + h * k3[i];
    }
    g.apply(tmp, k4);
    for i in 0..p.len() {
        p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

/// Integrates with classical RK4 and reports the distribution at each of the
/// increasing `checkpoints` (absolute times ≥ `p0.t`).
///
/// The step size is `dt` shrunk so that every leg between checkpoints is an
/// integer number of steps. Integration carries the unnormalized vector, so
/// the leakage reported at a checkpoint is the total since `p0`.
pub fn evolve_through(
    p0: &ProbabilityDistribution,
    g: &GeneratorMatrix<f64>,
    checkpoints: &[f64],
    dt: f64,
) -> Result<Vec<Evolution>, MasterError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(MasterError::InvalidStep(dt));
    }
    let stiffness = dt * g.max_abs_diagonal();
    if stiffness > STABILITY_LIMIT {
        return Err(MasterError::Unstable {
            dt,
            max_dt: max_stable_dt(g),
        });
    }
    if p0.p.len() != g.dim() {
        return Err(MasterError::NotADistribution(format!(
            "length {} does not match generator dimension {}",
            p0.p.len(),
            g.dim()
        )));
    }
    ProbabilityDistribution::new(p0.p.clone(), p0.t)?;

    let mut p = p0.p.clone();
    let mut t = p0.t;
    let mut min_entry: f64 = 0.0;
    let mut steps = 0;
    let mut scratch: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; p.len()]);
    let mut out = Vec::with_capacity(checkpoints.len());
    for &target in checkpoints {
        if !target.is_finite() || target < t {
            return Err(MasterError::InvalidTime(target));
        }
        let span = target - t;
        let n = if span == 0.0 {
            0
        } else {
            (span / dt).ceil() as usize
        };
        let h = if n == 0 { 0.0 } else { span / n as f64 };
        for _ in 0..n {
            rk4_step(g, &mut p, h, &mut scratch);
            min_entry = p.iter().copied().fold(min_entry, f64::min);
        }
        steps += n;
        t = target;

        let clamped: Vec<f64> = p.iter().map(|&v| v.max(0.0)).collect();
        let total: f64 = clamped.iter().sum();
        let leakage = (1.0 - total).max(0.0);
        let normalized = if total > 0.0 {
            clamped.iter().map(|v| v / total).collect()
        } else {
            clamped
        };
        out.push(Evolution {
            distribution: ProbabilityDistribution { p: normalized, t },
            leakage,
            min_entry,
            steps,
            dt: h,
        });
    }
    Ok(out)
}

/// Integrates `dp/dt = G p` from `p0.t` for a duration `t_end`.
pub fn evolve(
    p0: &ProbabilityDistribution,
    g: &GeneratorMatrix<f64>,
    t_end: f64,
    dt: f64,
) -> Result<Evolution, MasterError> {
    if t_end.is_nan() || t_end < 0.0 {
        return Err(MasterError::InvalidTime(t_end));
    }
    let mut v = evolve_through(p0, g, &[p0.t + t_end], dt)?;
    Ok(v.pop().expect("one checkpoint"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::master_equation::build_generator;
    use crate::scheme::parse_scheme;

    fn verhulst_setup(cap: u64) -> (TruncatedLattice, GeneratorMatrix<f64>) {
        let s = parse_scheme("X -> 2X @ 2 ~ 0.1\nX -> 0 @ 1").unwrap();
        let lat = TruncatedLattice::uniform(1, cap).unwrap();
        let g = build_generator(&s, &lat).unwrap();
        (lat, g)
    }

    #[test]
    fn zero_duration_is_identity() {
        let (lat, g) = verhulst_setup(32);
        let p0 = ProbabilityDistribution::point_mass(&lat, &[10]).unwrap();
        let e = evolve(&p0, &g, 0.0, 1e-3).unwrap();
        assert_eq!(e.distribution.p, p0.p);
        assert_eq!(e.leakage, 0.0);
        assert_eq!(e.steps, 0);
    }

    #[test]
    fn zero_generator_is_identity() {
        let g = GeneratorMatrix::<f64>::zeros(3);
        let p0 = ProbabilityDistribution::new(vec![0.25, 0.5, 0.25], 0.0).unwrap();
        let e = evolve(&p0, &g, 3.0, 0.1).unwrap();
        assert_eq!(e.distribution.p, p0.p);
        assert_eq!(e.distribution.t, 3.0);
    }

    #[test]
    fn stability_guard() {
        let (lat, g) = verhulst_setup(64);
        let p0 = ProbabilityDistribution::point_mass(&lat, &[10]).unwrap();
        let limit = max_stable_dt(&g);
        assert!(matches!(
            evolve(&p0, &g, 1.0, limit * 1.01),
            Err(MasterError::Unstable { .. })
        ));
        assert!(evolve(&p0, &g, 0.01, limit).is_ok());
    }

    #[test]
    fn rejects_bad_initial_conditions() {
        let (_, g) = verhulst_setup(2);
        let bad = ProbabilityDistribution {
            p: vec![0.5, 0.6, -0.1],
            t: 0.0,
        };
        assert!(matches!(
            evolve(&bad, &g, 1.0, 1e-3),
            Err(MasterError::NotADistribution(_))
        ));
        assert!(ProbabilityDistribution::new(vec![0.5, 0.4], 0.0).is_err());
    }

    #[test]
    fn two_state_decay_matches_exponential() {
        // 1 -> 0 at rate 1: p1(t) = e^{-t}
        let s = parse_scheme("X -> 0 @ 1").unwrap();
        let lat = TruncatedLattice::uniform(1, 1).unwrap();
        let g = build_generator(&s, &lat).unwrap();
        let p0 = ProbabilityDistribution::point_mass(&lat, &[1]).unwrap();
        let e = evolve(&p0, &g, 1.0, 1e-3).unwrap();
        assert!((e.distribution.p[1] - (-1.0f64).exp()).abs() < 1e-12);
        assert!(e.leakage < 1e-14);
    }

    #[test]
    fn leakage_accounts_for_lost_mass() {
        // pure birth on a small lattice leaks through the cap
        let s = parse_scheme("0 -> X @ 1").unwrap();
        let lat = TruncatedLattice::uniform(1, 3).unwrap();
        let g = build_generator(&s, &lat).unwrap();
        let p0 = ProbabilityDistribution::point_mass(&lat, &[0]).unwrap();
        let e = evolve(&p0, &g, 2.0, 1e-3).unwrap();
        // P(N(2) > 3) for a Poisson(2) count
        let poisson_tail = 1.0 - (-2.0f64).exp() * (1.0 + 2.0 + 2.0 + 4.0 / 3.0);
        assert!(
            (e.leakage - poisson_tail).abs() < 1e-9,
            "{} vs {}",
            e.leakage,
            poisson_tail
        );
        assert!((e.distribution.total() - 1.0).abs() < 1e-12);
    }
}
