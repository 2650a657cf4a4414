//! Builds the Liouville operator for a scheme and checks, in exact
//! arithmetic, that it reproduces the combinatorial master-equation generator.

use num_bigint::BigInt;
use num_rational::BigRational;
use onestep::liouville::{build_liouville, verify_equivalence, verify_operator};
use onestep::{parse_scheme, TruncatedLattice};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let verhulst = parse_scheme(
        "param lambda = 2\nparam gamma = 0.1\nparam beta = 1\nX -> 2X @ lambda ~ gamma\nX -> 0 @ beta",
    )?;
    let op = build_liouville(&verhulst);
    println!("L = {}", op.pretty_symbolic());
    println!("  = {}", op.pretty());

    let report = verify_equivalence(&verhulst, &TruncatedLattice::uniform(1, 256)?)?;
    println!(
        "cap 256: equal={} over {} entries, max |diff| = {}",
        report.equal, report.compared_entries, report.max_discrepancy
    );

    // Operator built with lambda = 3 checked against lambda = 2.
    let wrong = verhulst.with_param("lambda", BigRational::from_integer(BigInt::from(3)))?;
    let report = verify_operator(
        &build_liouville(&wrong),
        &verhulst,
        &TruncatedLattice::uniform(1, 8)?,
    )?;
    let first = report.first_mismatch.expect("a mismatch");
    println!(
        "faulty operator: {} mismatches, first at row {:?} column {:?}: {} vs {}",
        report.mismatches.len(),
        first.row,
        first.column,
        first.operator,
        first.combinatorial
    );

    let predation = parse_scheme("species X, Y\nX -> 2X @ 1\nX + Y -> 2Y @ 0.5\nY -> 0 @ 0.3")?;
    let report = verify_equivalence(&predation, &TruncatedLattice::uniform(2, 24)?)?;
    println!(
        "predation, cap 24x24: equal={} ({} interior states)",
        report.equal, report.interior_states
    );
    println!("  L = {}", build_liouville(&predation).pretty());
    Ok(())
}
