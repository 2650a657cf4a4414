//! Finite box of particle-count states with a mixed-radix flat index.

use serde::Serialize;
use thiserror::Error;

use crate::scheme::InteractionScheme;
use crate::stochastization::StateVector;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("lattice needs at least one species")]
    Empty,
    #[error("cap for species {species} must be at least 1")]
    ZeroCap { species: usize },
    #[error("lattice with {0} states is too large")]
    TooLarge(u128),
}

/// States `0 ≤ φ_i ≤ caps[i]`; the first species varies fastest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TruncatedLattice {
    caps: Vec<u64>,
    #[serde(skip)]
    strides: Vec<usize>,
    #[serde(skip)]
    size: usize,
}

impl TruncatedLattice {
    pub fn new(caps: Vec<u64>) -> Result<Self, LatticeError> {
        if caps.is_empty() {
            return Err(LatticeError::Empty);
        }
        if let Some(species) = caps.iter().position(|&c| c == 0) {
            return Err(LatticeError::ZeroCap { species });
        }
        let mut strides = Vec::with_capacity(caps.len());
        let mut size: u128 = 1;
        for &c in &caps {
            strides.push(size as usize);
            size *= u128::from(c) + 1;
            if size > 1 << 32 {
                return Err(LatticeError::TooLarge(size));
            }
        }
        Ok(Self {
            caps,
            strides,
            size: size as usize,
        })
    }

    /// Same cap for every species.
    pub fn uniform(species: usize, cap: u64) -> Result<Self, LatticeError> {
        Self::new(vec![cap; species])
    }

    pub fn caps(&self) -> &[u64] {
        &self.caps
    }

    pub fn arity(&self) -> usize {
        self.caps.len()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn contains(&self, counts: &[u64]) -> bool {
        counts.len() == self.caps.len() && counts.iter().zip(&self.caps).all(|(c, cap)| c <= cap)
    }

    pub fn index_of(&self, counts: &[u64]) -> Option<usize> {
        if !self.contains(counts) {
            return None;
        }
        Some(
            counts
                .iter()
                .zip(&self.strides)
                .map(|(&c, &s)| c as usize * s)
                .sum(),
        )
    }

    pub fn state(&self, index: usize) -> StateVector {
        assert!(
            index < self.size,
            "index {index} outside lattice of {}",
            self.size
        );
        let mut rest = index;
        let counts = self
            .caps
            .iter()
            .map(|&cap| {
                let radix = cap as usize + 1;
                let c = rest % radix;
                rest /= radix;
                c as u64
            })
            .collect();
        StateVector(counts)
    }

    pub fn states(&self) -> impl Iterator<Item = StateVector> + '_ {
        (0..self.size).map(|i| self.state(i))
    }

    /// Whether `counts ± r_α` stays inside the box for every interaction.
    pub fn is_interior(&self, scheme: &InteractionScheme, counts: &[u64]) -> bool {
        scheme.interactions().iter().all(|inter| {
            let r = inter.step();
            [1i64, -1].iter().all(|&sign| {
                counts
                    .iter()
                    .zip(&r)
                    .zip(&self.caps)
                    .all(|((&c, &ri), &cap)| {
                        let v = c as i128 + i128::from(sign * ri);
                        v >= 0 && v <= i128::from(cap)
                    })
            })
        })
    }

    /// Flat indices of interior states, ascending.
    pub fn interior(&self, scheme: &InteractionScheme) -> Vec<usize> {
        (0..self.size)
            .filter(|&i| self.is_interior(scheme, self.state(i).counts()))
            .collect()
    }
}
