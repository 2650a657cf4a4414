use std::fmt;

use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::MasterError;
use crate::lattice::TruncatedLattice;
use crate::scalar::Scalar;
use crate::scheme::InteractionScheme;
use crate::stochastization::exact_propensities_in;

/// Sparse transition-rate matrix `G` of `dp/dt = G p`.
///
/// Entry `(n, m)` is the rate of jumping from state `m` into state `n`; the
/// diagonal holds minus the total out-rate of each state, including jumps that
/// leave the truncated lattice.
#[derive(Clone, PartialEq)]
pub struct GeneratorMatrix<T> {
    dim: usize,
    /// Column-major, rows sorted, no explicit zeros.
    columns: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> GeneratorMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            columns: vec![Vec::new(); dim],
        }
    }

    /// Builds a column from unsorted, possibly repeated `(row, value)` pairs.
    pub fn set_column(&mut self, col: usize, mut entries: Vec<(usize, T)>) {
        assert!(col < self.dim && entries.iter().all(|(r, _)| *r < self.dim));
        entries.sort_by_key(|(r, _)| *r);
        let mut merged: Vec<(usize, T)> = Vec::with_capacity(entries.len());
        for (r, v) in entries {
            match merged.last_mut() {
                Some((lr, lv)) if *lr == r => *lv = lv.clone() + v,
                _ => merged.push((r, v)),
            }
        }
        merged.retain(|(_, v)| !v.is_zero());
        self.columns[col] = merged;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        let column = &self.columns[col];
        column
            .binary_search_by_key(&row, |(r, _)| *r)
            .map_or_else(|_| T::zero(), |k| column[k].1.clone())
    }

    pub fn column(&self, col: usize) -> &[(usize, T)] {
        &self.columns[col]
    }

    pub fn column_sum(&self, col: usize) -> T {
        self.columns[col]
            .iter()
            .fold(T::zero(), |acc, (_, v)| acc + v.clone())
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    /// Non-zero entries as `(row, col, value)`, column-major.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &T)> + '_ {
        self.columns
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().map(move |(r, v)| (*r, c, v)))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> GeneratorMatrix<U> {
        let mut out = GeneratorMatrix::zeros(self.dim);
        for (c, col) in self.columns.iter().enumerate() {
            out.set_column(c, col.iter().map(|(r, v)| (*r, f(v))).collect());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(Vec::is_empty)
    }
}

impl GeneratorMatrix<f64> {
    /// `out = G p`.
    pub fn apply(&self, p: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (c, col) in self.columns.iter().enumerate() {
            let pc = p[c];
            if pc == 0.0 {
                continue;
            }
            for (r, v) in col {
                out[*r] += v * pc;
            }
        }
    }

    pub fn max_abs_diagonal(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.get(i, i).abs())
            .fold(0.0, f64::max)
    }
}

impl GeneratorMatrix<BigRational> {
    pub fn to_f64(&self) -> GeneratorMatrix<f64> {
        self.map(|v| v.to_f64().unwrap_or(f64::NAN))
    }
}

impl<T: Scalar> fmt::Debug for GeneratorMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratorMatrix")
            .field("dim", &self.dim)
            .field("nnz", &self.nnz())
            .finish()
    }
}

/// Assembles the master-equation generator from exact propensities.
///
/// For every lattice state `m` and interaction `α`, `s⁺_α(m)` flows to
/// `m + r_α` and `s⁻_α(m)` to `m − r_α`. Targets outside the lattice are
/// dropped from the off-diagonal but still count in the diagonal out-rate, so
/// probability leaks through the boundary instead of piling up there.
pub fn build_generator<T: Scalar>(
    scheme: &InteractionScheme,
    lattice: &TruncatedLattice,
) -> Result<GeneratorMatrix<T>, MasterError> {
    if lattice.arity() != scheme.order() {
        return Err(MasterError::Arity {
            expected: scheme.order(),
            got: lattice.arity(),
        });
    }
    let steps = crate::scheme::step_operator(scheme);
    let fits = steps.iter().any(|r| {
        r.iter()
            .zip(lattice.caps())
            .all(|(&ri, &cap)| ri.unsigned_abs() <= cap)
    });
    if !fits {
        return Err(MasterError::LatticeTooSmall);
    }

    let mut g = GeneratorMatrix::zeros(lattice.size());
    for m in 0..lattice.size() {
        let state = lattice.state(m);
        let props = exact_propensities_in::<T>(scheme, state.counts());
        let mut column = Vec::new();
        let mut out_rate = T::zero();
        for (r, p) in steps.iter().zip(props) {
            for (rate, sign) in [(p.forward, 1), (p.backward, -1)] {
                if rate.is_zero() {
                    continue;
                }
                if let Some(target) = state.shifted(r, sign) {
                    if let Some(n) = lattice.index_of(target.counts()) {
                        column.push((n, rate.clone()));
                    }
                }
                out_rate = out_rate + rate;
            }
        }
        column.push((m, -out_rate));
        g.set_column(m, column);
    }
    Ok(g)
}
