//! Sampled trajectories on a common time grid and their ensemble statistics.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnsembleError {
    #[error("need at least 2 trajectories, got {0}")]
    TooFew(usize),
    #[error("trajectory {index} does not share the time grid of trajectory 0")]
    MismatchedGrid { index: usize },
}

/// State values (one vector per time point) on an explicit time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }
}

/// Per-time mean, unbiased variance and standard error of the mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub replicas: usize,
    pub times: Vec<f64>,
    pub mean: Vec<Vec<f64>>,
    pub variance: Vec<Vec<f64>>,
    pub std_error: Vec<Vec<f64>>,
}

pub fn ensemble_stats(trajectories: &[TimeSeries]) -> Result<EnsembleStats, EnsembleError> {
    let n = trajectories.len();
    if n < 2 {
        return Err(EnsembleError::TooFew(n));
    }
    let first = &trajectories[0];
    let dim = first.dimension();
    for (index, t) in trajectories.iter().enumerate().skip(1) {
        if t.times != first.times || t.values.iter().any(|v| v.len() != dim) {
            return Err(EnsembleError::MismatchedGrid { index });
        }
    }
    let nf = n as f64;
    let mut mean = vec![vec![0.0; dim]; first.len()];
    let mut variance = vec![vec![0.0; dim]; first.len()];
    for (k, (m, var)) in mean.iter_mut().zip(variance.iter_mut()).enumerate() {
        for i in 0..dim {
            let mu = trajectories.iter().map(|t| t.values[k][i]).sum::<f64>() / nf;
            let ss: f64 = trajectories
                .iter()
                .map(|t| {
                    let d = t.values[k][i] - mu;
                    d * d
                })
                .sum();
            m[i] = mu;
            var[i] = ss / (nf - 1.0);
        }
    }
    let std_error = variance
        .iter()
        .map(|row| row.iter().map(|v| (v / nf).sqrt()).collect())
        .collect();
    Ok(EnsembleStats {
        replicas: n,
        times: first.times.clone(),
        mean,
        variance,
        std_error,
    })
}

/// `n + 1` evenly spaced points from 0 to `t_end`.
pub fn uniform_grid(t_end: f64, intervals: usize) -> Vec<f64> {
    let intervals = intervals.max(1);
    (0..=intervals)
        .map(|k| t_end * k as f64 / intervals as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(v: &[f64]) -> TimeSeries {
        TimeSeries {
            times: (0..v.len()).map(|k| k as f64).collect(),
            values: v.iter().map(|&x| vec![x]).collect(),
        }
    }

    #[test]
    fn hand_arithmetic() {
        let s = ensemble_stats(&[series(&[0.0]), series(&[2.0])]).unwrap();
        assert_eq!(s.mean, vec![vec![1.0]]);
        assert_eq!(s.variance, vec![vec![2.0]]);
        assert_eq!(s.std_error, vec![vec![1.0]]);
    }

    #[test]
    fn identical_trajectories_have_no_spread() {
        let s = ensemble_stats(&[
            series(&[1.0, 3.5]),
            series(&[1.0, 3.5]),
            series(&[1.0, 3.5]),
        ])
        .unwrap();
        assert!(s.variance.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn grid_and_count_errors() {
        assert_eq!(
            ensemble_stats(&[series(&[1.0])]),
            Err(EnsembleError::TooFew(1))
        );
        assert_eq!(
            ensemble_stats(&[series(&[1.0, 2.0]), series(&[1.0])]),
            Err(EnsembleError::MismatchedGrid { index: 1 })
        );
    }

    #[test]
    fn grid_endpoints() {
        let g = uniform_grid(2.0, 4);
        assert_eq!(g, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }
}
