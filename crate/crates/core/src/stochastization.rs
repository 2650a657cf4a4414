//! Transition propensities, jump moments and Fokker–Planck coefficients.
//!
//! Exact propensities count ordered selections of reacting particles
//! (falling factorials); polynomial propensities replace each falling
//! factorial `φ(φ−1)…(φ−I+1)` by `φ^I` and feed the Fokker–Planck drift and
//! diffusion.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::scheme::InteractionScheme;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StochasticError {
    #[error("jump moment order must be at least 1")]
    ZeroOrder,
    #[error("state has {got} components, scheme has {expected} species")]
    Arity { expected: usize, got: usize },
}

/// Particle counts per species.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateVector(pub Vec<u64>);

impl StateVector {
    pub fn new(counts: Vec<u64>) -> Self {
        Self(counts)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn counts(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_real(&self) -> Vec<f64> {
        self.0.iter().map(|&c| c as f64).collect()
    }

    /// `self + sign·step`, or `None` if a component would go negative.
    pub fn shifted(&self, step: &[i64], sign: i64) -> Option<StateVector> {
        self.0
            .iter()
            .zip(step)
            .map(|(&c, &r)| {
                let v = c as i128 + i128::from(sign * r);
                u64::try_from(v).ok()
            })
            .collect::<Option<Vec<_>>>()
            .map(StateVector)
    }
}

impl From<Vec<u64>> for StateVector {
    fn from(v: Vec<u64>) -> Self {
        Self(v)
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for StateVector {
    type Err = String;

    /// Comma-separated counts, e.g. `5` or `3,7`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(|p| {
                p.trim()
                    .parse::<u64>()
                    .map_err(|_| format!("`{}` is not a non-negative integer", p.trim()))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(StateVector)
    }
}

/// Forward and backward propensities of one interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropensityPair<T = f64> {
    pub forward: T,
    pub backward: T,
}

/// Which sign the diffusion matrix uses for backward propensities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `B = Σ r rᵀ (s⁺ − s⁻)`; can turn indefinite at large counts.
    #[default]
    Paper,
    /// `B = Σ r rᵀ (s⁺ + s⁻)`, the second jump moment.
    KramersMoyal,
}

impl FromStr for Convention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(Self::Paper),
            "km" | "kramers_moyal" | "kramers-moyal" => Ok(Self::KramersMoyal),
            other => Err(format!("unknown convention `{other}` (expected paper|km)")),
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Paper => "paper",
            Self::KramersMoyal => "km",
        })
    }
}

fn check_arity(scheme: &InteractionScheme, got: usize) -> Result<(), StochasticError> {
    if scheme.order() == got {
        Ok(())
    } else {
        Err(StochasticError::Arity {
            expected: scheme.order(),
            got,
        })
    }
}

/// `k · Π_i φ_i!/(φ_i − c_i)!`, integer product scaled by the rate last.
fn arrangement_propensity<T: Scalar>(rate: T, counts: &[u64], stoich: &[u32]) -> T {
    let product = counts
        .iter()
        .zip(stoich)
        .fold(T::one(), |acc, (&n, &c)| acc * T::arrangements(n, c));
    rate * product
}

/// Exact propensities in any scalar back end.
pub fn exact_propensities_in<T: Scalar>(
    scheme: &InteractionScheme,
    counts: &[u64],
) -> Vec<PropensityPair<T>> {
    scheme
        .interactions()
        .iter()
        .map(|inter| PropensityPair {
            forward: arrangement_propensity(T::from_rate(&inter.k_plus), counts, &inter.reactants),
            backward: arrangement_propensity(T::from_rate(&inter.k_minus), counts, &inter.products),
        })
        .collect()
}

/// `s⁺_α = k⁺_α Π φ!/(φ−I)!`, `s⁻_α = k⁻_α Π φ!/(φ−F)!`.
pub fn exact_propensities(
    scheme: &InteractionScheme,
    state: &StateVector,
) -> Result<Vec<PropensityPair>, StochasticError> {
    check_arity(scheme, state.len())?;
    Ok(exact_propensities_in(scheme, state.counts()))
}

fn power_propensity(rate: f64, x: &[f64], stoich: &[u32]) -> f64 {
    let product = x
        .iter()
        .zip(stoich)
        .fold(1.0, |acc, (&v, &c)| acc * v.powi(c as i32));
    rate * product
}

/// Polynomial propensities at a real-valued state.
pub fn polynomial_propensities_at(
    scheme: &InteractionScheme,
    x: &[f64],
) -> Result<Vec<PropensityPair>, StochasticError> {
    check_arity(scheme, x.len())?;
    Ok(scheme
        .interactions()
        .iter()
        .map(|inter| PropensityPair {
            forward: power_propensity(inter.k_plus.to_f64(), x, &inter.reactants),
            backward: power_propensity(inter.k_minus.to_f64(), x, &inter.products),
        })
        .collect())
}

/// `s⁺_α = k⁺_α Π φ^I`, `s⁻_α = k⁻_α Π φ^F`.
pub fn polynomial_propensities(
    scheme: &InteractionScheme,
    state: &StateVector,
) -> Result<Vec<PropensityPair>, StochasticError> {
    polynomial_propensities_at(scheme, &state.to_real())
}

/// Jump moment of the transition kernel built from polynomial propensities.
///
/// Orders 1 and 2 are returned in full. For order ≥ 3 only the diagonal
/// `ξ_{i…i} = Σ_α (r_iα)^m (s⁺_α + (−1)^m s⁻_α)` is returned.
#[derive(Debug, Clone, PartialEq)]
pub enum JumpMoment {
    First(Vec<f64>),
    Second(DMatrix<f64>),
    Diagonal { order: u32, values: Vec<f64> },
}

impl JumpMoment {
    pub fn order(&self) -> u32 {
        match self {
            Self::First(_) => 1,
            Self::Second(_) => 2,
            Self::Diagonal { order, .. } => *order,
        }
    }
}

// Forward contributions are accumulated first, then backward ones, so that
// drift and the first jump moment come out bitwise identical.
fn first_moment(steps: &[Vec<i64>], props: &[PropensityPair], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (r, p) in steps.iter().zip(props) {
        for i in 0..n {
            out[i] += r[i] as f64 * p.forward;
        }
    }
    for (r, p) in steps.iter().zip(props) {
        for i in 0..n {
            out[i] -= r[i] as f64 * p.backward;
        }
    }
    out
}

fn second_moment(
    steps: &[Vec<i64>],
    props: &[PropensityPair],
    n: usize,
    backward_sign: f64,
) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(n, n);
    for (r, p) in steps.iter().zip(props) {
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += (r[i] * r[j]) as f64 * p.forward;
            }
        }
    }
    for (r, p) in steps.iter().zip(props) {
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += backward_sign * ((r[i] * r[j]) as f64 * p.backward);
            }
        }
    }
    out
}

pub fn jump_moment(
    scheme: &InteractionScheme,
    x: &[f64],
    order: u32,
) -> Result<JumpMoment, StochasticError> {
    if order == 0 {
        return Err(StochasticError::ZeroOrder);
    }
    let props = polynomial_propensities_at(scheme, x)?;
    let steps = crate::scheme::step_operator(scheme);
    let n = scheme.order();
    Ok(match order {
        1 => JumpMoment::First(first_moment(&steps, &props, n)),
        2 => JumpMoment::Second(second_moment(&steps, &props, n, 1.0)),
        m => {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let mut values = vec![0.0; n];
            for (r, p) in steps.iter().zip(&props) {
                for i in 0..n {
                    let rm = (r[i] as f64).powi(m as i32);
                    values[i] += rm * p.forward + sign * rm * p.backward;
                }
            }
            JumpMoment::Diagonal { order: m, values }
        }
    })
}

/// Fokker–Planck drift `A` and diffusion `B` at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftDiffusion {
    pub drift: Vec<f64>,
    pub diffusion: DMatrix<f64>,
    pub convention: Convention,
}

pub fn drift_diffusion(
    scheme: &InteractionScheme,
    x: &[f64],
    convention: Convention,
) -> Result<DriftDiffusion, StochasticError> {
    let props = polynomial_propensities_at(scheme, x)?;
    let steps = crate::scheme::step_operator(scheme);
    let n = scheme.order();
    let sign = match convention {
        Convention::Paper => -1.0,
        Convention::KramersMoyal => 1.0,
    };
    Ok(DriftDiffusion {
        drift: first_moment(&steps, &props, n),
        diffusion: second_moment(&steps, &props, n, sign),
        convention,
    })
}

/// Drift only; cheaper than [`drift_diffusion`] when noise is off.
pub fn drift(scheme: &InteractionScheme, x: &[f64]) -> Result<Vec<f64>, StochasticError> {
    let props = polynomial_propensities_at(scheme, x)?;
    Ok(first_moment(
        &crate::scheme::step_operator(scheme),
        &props,
        scheme.order(),
    ))
}
