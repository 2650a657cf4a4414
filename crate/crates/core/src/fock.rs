//! Occupation-number representation: normal-ordered polynomials in creation
//! (`π`) and annihilation (`a`) operators with exact rational coefficients.
//!
//! `π|n⟩ = |n+1⟩`, `a|n⟩ = n|n−1⟩`, `[a, π] = 1`, operators of different
//! species commute, and `⟨n|m⟩ = n! δ_nm`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::TruncatedLattice;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FockError {
    #[error("operands act on {left} and {right} species")]
    ArityMismatch { left: usize, right: usize },
    #[error("an operator needs at least one species")]
    ZeroArity,
    #[error("species index {index} out of range for {arity} species")]
    SpeciesOutOfRange { index: usize, arity: usize },
    #[error("matrix representation needs cap ≥ 1")]
    ZeroCap,
    #[error("malformed term map: {0}")]
    Json(String),
}

/// `Π_i π_i^{creation_i} · Π_i a_i^{annihilation_i}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub creation: Vec<u32>,
    pub annihilation: Vec<u32>,
}

impl Monomial {
    pub fn identity(arity: usize) -> Self {
        Self {
            creation: vec![0; arity],
            annihilation: vec![0; arity],
        }
    }

    pub fn arity(&self) -> usize {
        self.creation.len()
    }

    /// `x · y` rewritten in normal order. Per species,
    /// `a^d π^c = Σ_k C(d,k) C(c,k) k! π^{c−k} a^{d−k}`.
    fn product(x: &Monomial, y: &Monomial) -> Vec<(Monomial, BigInt)> {
        let mut acc = vec![(Monomial::identity(0), BigInt::one())];
        for i in 0..x.arity() {
            let (c1, d1) = (x.creation[i], x.annihilation[i]);
            let (c2, d2) = (y.creation[i], y.annihilation[i]);
            let mut next = Vec::with_capacity(acc.len() * (d1.min(c2) as usize + 1));
            for k in 0..=d1.min(c2) {
                let weight = binomial(BigInt::from(d1), BigInt::from(k))
                    * binomial(BigInt::from(c2), BigInt::from(k))
                    * factorial(u64::from(k));
                for (m, w) in &acc {
                    let mut m = m.clone();
                    m.creation.push(c1 + c2 - k);
                    m.annihilation.push(d1 + d2 - k);
                    next.push((m, w * &weight));
                }
            }
            acc = next;
        }
        acc
    }
}

pub(crate) fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Normal-ordered operator polynomial. Zero coefficients are never stored, so
/// equal operators have identical term maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalOrderedPoly {
    arity: usize,
    terms: BTreeMap<Monomial, BigRational>,
}

impl NormalOrderedPoly {
    pub fn zero(arity: usize) -> Self {
        assert!(arity > 0, "an operator needs at least one species");
        Self {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(arity: usize, value: BigRational) -> Self {
        let mut p = Self::zero(arity);
        p.add_term(Monomial::identity(arity), value);
        p
    }

    pub fn one(arity: usize) -> Self {
        Self::constant(arity, BigRational::one())
    }

    /// `π_species`.
    pub fn creation(arity: usize, species: usize) -> Self {
        Self::monomial(arity, species, 1, 0)
    }

    /// `a_species`.
    pub fn annihilation(arity: usize, species: usize) -> Self {
        Self::monomial(arity, species, 0, 1)
    }

    /// `π_species^c a_species^d`.
    pub fn monomial(arity: usize, species: usize, c: u32, d: u32) -> Self {
        assert!(species < arity, "species {species} out of range");
        let mut m = Monomial::identity(arity);
        m.creation[species] = c;
        m.annihilation[species] = d;
        Self::from_terms(arity, [(m, BigRational::one())]).expect("valid monomial")
    }

    /// `Π_i π_i^{creation_i} a_i^{annihilation_i}`, coefficient 1.
    pub fn product_monomial(creation: Vec<u32>, annihilation: Vec<u32>) -> Result<Self, FockError> {
        let arity = creation.len();
        Self::from_terms(
            arity,
            [(
                Monomial {
                    creation,
                    annihilation,
                },
                BigRational::one(),
            )],
        )
    }

    pub fn from_terms(
        arity: usize,
        terms: impl IntoIterator<Item = (Monomial, BigRational)>,
    ) -> Result<Self, FockError> {
        if arity == 0 {
            return Err(FockError::ZeroArity);
        }
        let mut p = Self::zero(arity);
        for (m, c) in terms {
            if m.creation.len() != arity || m.annihilation.len() != arity {
                return Err(FockError::ArityMismatch {
                    left: arity,
                    right: m.creation.len().max(m.annihilation.len()),
                });
            }
            p.add_term(m, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical (lexicographic) order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    fn check(&self, other: &Self) -> Result<(), FockError> {
        if self.arity == other.arity {
            Ok(())
        } else {
            Err(FockError::ArityMismatch {
                left: self.arity,
                right: other.arity,
            })
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, FockError> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, FockError> {
        self.try_add(&-other)
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        let mut out = Self::zero(self.arity);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * factor);
        }
        out
    }

    /// Product `self · other`, re-expressed in normal order.
    pub fn multiply(&self, other: &Self) -> Result<Self, FockError> {
        self.check(other)?;
        let mut out = Self::zero(self.arity);
        for (mx, cx) in &self.terms {
            for (my, cy) in &other.terms {
                let c = cx * cy;
                for (m, w) in Monomial::product(mx, my) {
                    out.add_term(m, &c * BigRational::from_integer(w));
                }
            }
        }
        Ok(out)
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Result<Self, FockError> {
        self.multiply(other)?.try_sub(&other.multiply(self)?)
    }

    /// Renders with `π`/`a`; species are labelled by `names` when the operator
    /// acts on more than one species (1-based indices otherwise).
    pub fn render(&self, names: Option<&[String]>) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            if k == 0 {
                if negative {
                    out.push('−');
                }
            } else {
                out.push_str(if negative { " − " } else { " + " });
            }
            let factors = self.render_factors(m, names);
            let mag = c.abs();
            match (mag.is_one(), factors.is_empty()) {
                (true, true) => out.push('1'),
                (true, false) => out.push_str(&factors),
                (false, true) => out.push_str(&mag.to_string()),
                (false, false) => {
                    out.push_str(&mag.to_string());
                    out.push('·');
                    out.push_str(&factors);
                }
            }
        }
        out
    }

    fn render_factors(&self, m: &Monomial, names: Option<&[String]>) -> String {
        let label = |i: usize| -> String {
            if self.arity == 1 {
                String::new()
            } else {
                match names.and_then(|n| n.get(i)) {
                    Some(n) => format!("_{n}"),
                    None => format!("_{}", i + 1),
                }
            }
        };
        let mut parts = Vec::new();
        for (sym, powers) in [("π", &m.creation), ("a", &m.annihilation)] {
            for (i, &p) in powers.iter().enumerate() {
                match p {
                    0 => {}
                    1 => parts.push(format!("{sym}{}", label(i))),
                    p => parts.push(format!("{sym}{}^{p}", label(i))),
                }
            }
        }
        parts.join("·")
    }

    pub fn to_term_map(&self) -> TermMap {
        TermMap {
            arity: self.arity,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| TermEntry {
                    creation: m.creation.clone(),
                    annihilation: m.annihilation.clone(),
                    coefficient: c.to_string(),
                })
                .collect(),
        }
    }

    pub fn from_term_map(map: &TermMap) -> Result<Self, FockError> {
        let terms =
            map.terms
                .iter()
                .map(|t| {
                    let c: BigRational = t.coefficient.parse().map_err(|_| {
                        FockError::Json(format!("bad coefficient `{}`", t.coefficient))
                    })?;
                    Ok((
                        Monomial {
                            creation: t.creation.clone(),
                            annihilation: t.annihilation.clone(),
                        },
                        c,
                    ))
                })
                .collect::<Result<Vec<_>, FockError>>()?;
        Self::from_terms(map.arity, terms)
    }
}

impl fmt::Display for NormalOrderedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(None))
    }
}

// Operator sugar; panics on arity mismatch, use the `try_*`/`multiply`
// methods to get an error instead.
impl Add for &NormalOrderedPoly {
    type Output = NormalOrderedPoly;
    fn add(self, rhs: Self) -> NormalOrderedPoly {
        self.try_add(rhs).expect("arity mismatch")
    }
}

impl Sub for &NormalOrderedPoly {
    type Output = NormalOrderedPoly;
    fn sub(self, rhs: Self) -> NormalOrderedPoly {
        self.try_sub(rhs).expect("arity mismatch")
    }
}

impl Mul for &NormalOrderedPoly {
    type Output = NormalOrderedPoly;
    fn mul(self, rhs: Self) -> NormalOrderedPoly {
        self.multiply(rhs).expect("arity mismatch")
    }
}

impl Neg for &NormalOrderedPoly {
    type Output = NormalOrderedPoly;
    fn neg(self) -> NormalOrderedPoly {
        self.scale(&-BigRational::one())
    }
}

/// JSON form of a [`NormalOrderedPoly`]; coefficients are exact `p/q` strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermMap {
    pub arity: usize,
    pub terms: Vec<TermEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermEntry {
    pub creation: Vec<u32>,
    pub annihilation: Vec<u32>,
    pub coefficient: String,
}

/// Occupation numbers `|n_1, …, n_k⟩`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisState(pub Vec<u64>);

impl BasisState {
    /// `⟨n|n⟩ = Π n_i!`.
    pub fn norm(&self) -> BigInt {
        self.0.iter().map(|&n| factorial(n)).product()
    }
}

/// Finite superposition `Σ φ_n |n⟩`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateExpansion {
    arity: usize,
    amplitudes: BTreeMap<Vec<u64>, BigRational>,
}

impl StateExpansion {
    pub fn zero(arity: usize) -> Self {
        Self {
            arity,
            amplitudes: BTreeMap::new(),
        }
    }

    pub fn basis(state: &BasisState) -> Self {
        let mut e = Self::zero(state.0.len());
        e.add(state.0.clone(), BigRational::one());
        e
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn add(&mut self, occupation: Vec<u64>, amplitude: BigRational) {
        assert_eq!(occupation.len(), self.arity, "occupation arity");
        if amplitude.is_zero() {
            return;
        }
        let slot = self
            .amplitudes
            .entry(occupation.clone())
            .or_insert_with(BigRational::zero);
        *slot += amplitude;
        if slot.is_zero() {
            self.amplitudes.remove(&occupation);
        }
    }

    pub fn amplitude(&self, occupation: &[u64]) -> BigRational {
        self.amplitudes
            .get(occupation)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<u64>, &BigRational)> {
        self.amplitudes.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        let mut out = Self::zero(self.arity);
        for (n, a) in &self.amplitudes {
            out.add(n.clone(), a * factor);
        }
        out
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (n, a) in &other.amplitudes {
            out.add(n.clone(), a.clone());
        }
        out
    }
}

/// Applies `p` to `|n⟩`: each term acts right to left, `a|n⟩ = n|n−1⟩`
/// (zero at `n = 0`) then `π|n⟩ = |n+1⟩`.
pub fn apply_to_basis(p: &NormalOrderedPoly, state: &BasisState) -> StateExpansion {
    assert_eq!(p.arity(), state.0.len(), "operator and state arity differ");
    let mut out = StateExpansion::zero(p.arity());
    'terms: for (m, c) in p.terms() {
        let mut weight = BigInt::one();
        let mut target = Vec::with_capacity(p.arity());
        for i in 0..p.arity() {
            let n = state.0[i];
            let d = u64::from(m.annihilation[i]);
            if d > n {
                continue 'terms;
            }
            for j in 0..d {
                weight *= n - j;
            }
            target.push(n - d + u64::from(m.creation[i]));
        }
        out.add(target, c * BigRational::from_integer(weight));
    }
    out
}

/// Linear extension of [`apply_to_basis`].
pub fn apply(p: &NormalOrderedPoly, ket: &StateExpansion) -> StateExpansion {
    let mut out = StateExpansion::zero(p.arity());
    for (n, amp) in ket.iter() {
        out = out.plus(&apply_to_basis(p, &BasisState(n.clone())).scale(amp));
    }
    out
}

/// `⟨n|ket⟩ = Π n_i! · ket_n`.
pub fn inner_product(bra: &BasisState, ket: &StateExpansion) -> Result<BigRational, FockError> {
    if bra.0.len() != ket.arity() {
        return Err(FockError::ArityMismatch {
            left: bra.0.len(),
            right: ket.arity(),
        });
    }
    Ok(BigRational::from_integer(bra.norm()) * ket.amplitude(&bra.0))
}

/// Dense exact matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    dim: usize,
    data: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![BigRational::zero(); dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> &BigRational {
        &self.data[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: BigRational) {
        self.data[row * self.dim + col] = v;
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * n + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn to_rows(&self) -> Vec<Vec<BigRational>> {
        self.data.chunks(self.dim).map(<[_]>::to_vec).collect()
    }
}

/// Matrix of `p` on the basis `|0⟩…|cap⟩` of each species (mixed radix, first
/// species fastest). Entry `(m, n)` is the coefficient of `|m⟩` in `p|n⟩`;
/// components pushed past `cap` are dropped.
pub fn matrix_representation(p: &NormalOrderedPoly, cap: u64) -> Result<RationalMatrix, FockError> {
    if cap == 0 {
        return Err(FockError::ZeroCap);
    }
    let lattice = TruncatedLattice::uniform(p.arity(), cap).map_err(|_| FockError::ZeroCap)?;
    let mut out = RationalMatrix::zeros(lattice.size());
    for n in 0..lattice.size() {
        let image = apply_to_basis(p, &BasisState(lattice.state(n).0));
        for (m, amp) in image.iter() {
            if let Some(row) = lattice.index_of(m) {
                out.set(row, n, amp.clone());
            }
        }
    }
    Ok(out)
}
