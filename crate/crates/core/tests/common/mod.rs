#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use onestep::scheme::{Interaction, InteractionScheme, Rate, SpeciesTable};
use proptest::prelude::*;
use rand::Rng;

pub const NAMES: [&str; 3] = ["X", "Y", "Z"];

/// Raw ingredients of one interaction: coefficients and rates in tenths.
#[derive(Debug, Clone)]
pub struct RawInteraction {
    pub reactants: Vec<u32>,
    pub products: Vec<u32>,
    pub k_plus_tenths: i64,
    pub k_minus_tenths: i64,
}

pub fn tenths(n: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(10))
}

pub fn build(species: usize, raw: &[RawInteraction]) -> InteractionScheme {
    let table = SpeciesTable::new(NAMES[..species].iter().copied()).unwrap();
    let interactions = raw
        .iter()
        .map(|r| {
            Interaction::new(
                r.reactants.clone(),
                r.products.clone(),
                Rate::new(tenths(r.k_plus_tenths)).unwrap(),
                Rate::new(tenths(r.k_minus_tenths)).unwrap(),
            )
            .unwrap()
        })
        .collect();
    InteractionScheme::new(table, interactions).unwrap()
}

fn raw_interaction(species: usize, max_coeff: u32) -> impl Strategy<Value = RawInteraction> {
    (
        prop::collection::vec(0..=max_coeff, species),
        prop::collection::vec(0..=max_coeff, species),
        1i64..=40,
        0i64..=20,
    )
        .prop_filter("no-op", |(i, f, _, _)| i != f)
        .prop_map(|(reactants, products, kp, km)| RawInteraction {
            reactants,
            products,
            k_plus_tenths: kp,
            k_minus_tenths: km,
        })
}

/// Schemes with 1..=`max_species` species, 1..=4 interactions and
/// coefficients up to `max_coeff`.
pub fn arb_scheme(max_species: usize, max_coeff: u32) -> impl Strategy<Value = InteractionScheme> {
    (1..=max_species).prop_flat_map(move |n| {
        prop::collection::vec(raw_interaction(n, max_coeff), 1..=4)
            .prop_map(move |raw| build(n, &raw))
    })
}

/// Like [`arb_scheme`], drawn from a plain RNG.
pub fn random_scheme(
    rng: &mut impl Rng,
    max_species: usize,
    max_interactions: usize,
    max_coeff: u32,
) -> InteractionScheme {
    let n = rng.random_range(1..=max_species);
    let count = rng.random_range(1..=max_interactions);
    let raw: Vec<RawInteraction> = (0..count)
        .map(|_| loop {
            let reactants: Vec<u32> = (0..n).map(|_| rng.random_range(0..=max_coeff)).collect();
            let products: Vec<u32> = (0..n).map(|_| rng.random_range(0..=max_coeff)).collect();
            if reactants != products {
                break RawInteraction {
                    reactants,
                    products,
                    k_plus_tenths: rng.random_range(1..=40),
                    k_minus_tenths: rng.random_range(0..=20),
                };
            }
        })
        .collect();
    build(n, &raw)
}

pub fn verhulst() -> InteractionScheme {
    onestep::parse_scheme(
        "param lambda = 2\nparam gamma = 0.1\nparam beta = 1\nX -> 2X @ lambda ~ gamma\nX -> 0 @ beta",
    )
    .unwrap()
}

pub fn scheme_path(name: &str) -> String {
    format!("{}/schemes/{name}", env!("CARGO_MANIFEST_DIR"))
}
