//! Liouville operator of a scheme and its equivalence with the combinatorial
//! master-equation generator.
//!
//! For each interaction `α`,
//!
//! ```text
//! L_α = k⁺_α (π^F − π^I) a^I + k⁻_α (π^I − π^F) a^F
//! ```
//!
//! with multi-index powers over species. The generator is read off as
//! `G_nm = ⟨n|L|m⟩ / Π n_i!`.

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::fock::{apply_to_basis, inner_product, BasisState, NormalOrderedPoly, TermMap};
use crate::lattice::TruncatedLattice;
use crate::master_equation::{build_generator, GeneratorMatrix, MasterError};
use crate::scheme::{InteractionScheme, Rate};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LiouvilleError {
    #[error("operator acts on {operator} species, lattice has {lattice}")]
    Arity { operator: usize, lattice: usize },
    #[error("no interior states: every state of the lattice has a jump leaving it")]
    NoInteriorStates,
    #[error(transparent)]
    Master(#[from] MasterError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

/// One rate-weighted piece of `L`: `rate · operator`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiouvilleTerm {
    pub interaction: usize,
    pub direction: Direction,
    pub rate: Rate,
    /// Unit-rate operator, e.g. `(π^F − π^I) a^I`.
    pub operator: NormalOrderedPoly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiouvilleOperator {
    poly: NormalOrderedPoly,
    parts: Vec<LiouvilleTerm>,
    species: Vec<String>,
}

impl LiouvilleOperator {
    /// Expanded, normal-ordered `L`.
    pub fn poly(&self) -> &NormalOrderedPoly {
        &self.poly
    }

    pub fn parts(&self) -> &[LiouvilleTerm] {
        &self.parts
    }

    pub fn species(&self) -> &[String] {
        &self.species
    }

    pub fn arity(&self) -> usize {
        self.poly.arity()
    }

    /// Expanded form, e.g. `a − 3·π·a + …`.
    pub fn pretty(&self) -> String {
        self.poly.render(Some(&self.species))
    }

    /// Grouped by rate, e.g. `lambda·(−π·a + π^2·a) + gamma·(π·a^2 − π^2·a^2) + …`.
    /// Zero-rate pieces are omitted.
    pub fn pretty_symbolic(&self) -> String {
        let pieces: Vec<String> = self
            .parts
            .iter()
            .filter(|t| !t.rate.is_zero() && !t.operator.is_zero())
            .map(|t| {
                format!(
                    "{}·({})",
                    t.rate.label(),
                    t.operator.render(Some(&self.species))
                )
            })
            .collect();
        if pieces.is_empty() {
            "0".into()
        } else {
            pieces.join(" + ")
        }
    }

    pub fn term_map(&self) -> TermMap {
        self.poly.to_term_map()
    }
}

fn creation_power(powers: &[u32]) -> NormalOrderedPoly {
    NormalOrderedPoly::product_monomial(powers.to_vec(), vec![0; powers.len()]).expect("arity ≥ 1")
}

fn annihilation_power(powers: &[u32]) -> NormalOrderedPoly {
    NormalOrderedPoly::product_monomial(vec![0; powers.len()], powers.to_vec()).expect("arity ≥ 1")
}

pub fn build_liouville(scheme: &InteractionScheme) -> LiouvilleOperator {
    let n = scheme.order();
    let mut poly = NormalOrderedPoly::zero(n);
    let mut parts = Vec::new();
    for (alpha, inter) in scheme.interactions().iter().enumerate() {
        let (pi_i, pi_f) = (
            creation_power(&inter.reactants),
            creation_power(&inter.products),
        );
        let forward = &(&pi_f - &pi_i) * &annihilation_power(&inter.reactants);
        let backward = &(&pi_i - &pi_f) * &annihilation_power(&inter.products);
        for (direction, rate, operator) in [
            (Direction::Forward, &inter.k_plus, forward),
            (Direction::Backward, &inter.k_minus, backward),
        ] {
            poly = &poly + &operator.scale(rate.value());
            if direction == Direction::Forward || !rate.is_zero() || rate.name().is_some() {
                parts.push(LiouvilleTerm {
                    interaction: alpha,
                    direction,
                    rate: rate.clone(),
                    operator,
                });
            }
        }
    }
    LiouvilleOperator {
        poly,
        parts,
        species: scheme.species().names().to_vec(),
    }
}

/// Generator `G_nm = ⟨n|L|m⟩ / Π n_i!` on the lattice; images outside the
/// lattice are dropped.
pub fn generator_from_liouville(
    op: &LiouvilleOperator,
    lattice: &TruncatedLattice,
) -> Result<GeneratorMatrix<BigRational>, LiouvilleError> {
    if lattice.arity() != op.arity() {
        return Err(LiouvilleError::Arity {
            operator: op.arity(),
            lattice: lattice.arity(),
        });
    }
    let mut g = GeneratorMatrix::zeros(lattice.size());
    for m in 0..lattice.size() {
        let image = apply_to_basis(op.poly(), &BasisState(lattice.state(m).0));
        let mut column = Vec::new();
        for (occ, _) in image.iter() {
            if let Some(row) = lattice.index_of(occ) {
                let bra = BasisState(occ.clone());
                let value = inner_product(&bra, &image).expect("same arity")
                    / BigRational::from_integer(bra.norm());
                column.push((row, value));
            }
        }
        g.set_column(m, column);
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub row: Vec<u64>,
    pub column: Vec<u64>,
    pub operator: String,
    pub combinatorial: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub equal: bool,
    pub cap: Vec<u64>,
    /// Per-species `[min, max]` over interior states.
    pub interior_range: Vec<[u64; 2]>,
    pub interior_states: usize,
    pub compared_entries: usize,
    /// Largest `|G_op − G_comb|`, exact.
    pub max_discrepancy: String,
    pub max_discrepancy_f64: f64,
    pub first_mismatch: Option<Mismatch>,
    pub mismatches: Vec<Mismatch>,
}

/// Compares two generators on the columns of interior states.
///
/// Transition rates (off-diagonal entries) are compared before the diagonal
/// out-rates derived from them, so `first_mismatch` names a transition rate
/// whenever one differs.
pub fn compare_generators(
    operator: &GeneratorMatrix<BigRational>,
    combinatorial: &GeneratorMatrix<BigRational>,
    lattice: &TruncatedLattice,
    interior: &[usize],
) -> EquivalenceReport {
    let mut mismatches = Vec::new();
    let mut max = BigRational::zero();
    let mut compared = 0;
    let mut check = |row: usize, col: usize, mismatches: &mut Vec<Mismatch>| {
        compared += 1;
        let (x, y) = (operator.get(row, col), combinatorial.get(row, col));
        if x != y {
            let d = (&x - &y).abs();
            if d > max {
                max = d;
            }
            mismatches.push(Mismatch {
                row: lattice.state(row).0,
                column: lattice.state(col).0,
                operator: x.to_string(),
                combinatorial: y.to_string(),
            });
        }
    };
    for &col in interior {
        let mut rows: Vec<usize> = operator
            .column(col)
            .iter()
            .chain(combinatorial.column(col))
            .map(|(r, _)| *r)
            .filter(|&r| r != col)
            .collect();
        rows.sort_unstable();
        rows.dedup();
        for row in rows {
            check(row, col, &mut mismatches);
        }
    }
    for &col in interior {
        check(col, col, &mut mismatches);
    }

    let arity = lattice.arity();
    let mut range: Vec<[u64; 2]> = vec![[u64::MAX, 0]; arity];
    for &i in interior {
        for (r, &c) in range.iter_mut().zip(lattice.state(i).counts()) {
            r[0] = r[0].min(c);
            r[1] = r[1].max(c);
        }
    }
    if interior.is_empty() {
        range = vec![[0, 0]; arity];
    }
    EquivalenceReport {
        equal: mismatches.is_empty(),
        cap: lattice.caps().to_vec(),
        interior_range: range,
        interior_states: interior.len(),
        compared_entries: compared,
        max_discrepancy: max.to_string(),
        max_discrepancy_f64: max.to_f64().unwrap_or(f64::NAN),
        first_mismatch: mismatches.first().cloned(),
        mismatches,
    }
}

/// Checks the operator built from `operator_scheme` against the combinatorial
/// generator of `combinatorial_scheme`; both must share species.
pub fn verify_operator(
    op: &LiouvilleOperator,
    combinatorial_scheme: &InteractionScheme,
    lattice: &TruncatedLattice,
) -> Result<EquivalenceReport, LiouvilleError> {
    let interior = lattice.interior(combinatorial_scheme);
    if interior.is_empty() {
        return Err(LiouvilleError::NoInteriorStates);
    }
    let from_operator = generator_from_liouville(op, lattice)?;
    let combinatorial = build_generator::<BigRational>(combinatorial_scheme, lattice)?;
    Ok(compare_generators(
        &from_operator,
        &combinatorial,
        lattice,
        &interior,
    ))
}

/// Exact comparison of the operator route and the combinatorial route on
/// interior states.
pub fn verify_equivalence(
    scheme: &InteractionScheme,
    lattice: &TruncatedLattice,
) -> Result<EquivalenceReport, LiouvilleError> {
    verify_operator(&build_liouville(scheme), scheme, lattice)
}
