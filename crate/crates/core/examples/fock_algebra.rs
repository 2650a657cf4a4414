//! Normal-ordered creation/annihilation algebra on occupation states.

use num_bigint::BigInt;
use num_rational::BigRational;
use onestep::fock::{
    apply_to_basis, inner_product, matrix_representation, BasisState, NormalOrderedPoly,
    StateExpansion,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pi = NormalOrderedPoly::creation(1, 0);
    let a = NormalOrderedPoly::annihilation(1, 0);

    // a pi = 1 + pi a
    println!("a·π = {}", a.multiply(&pi)?);
    println!("[a, π] = {}", a.commutator(&pi)?);
    println!(
        "a^2·π^3 = {}",
        NormalOrderedPoly::monomial(1, 0, 0, 2)
            .multiply(&NormalOrderedPoly::monomial(1, 0, 3, 0))?
    );

    let ket = apply_to_basis(&a, &BasisState(vec![3]));
    println!("a|3> = {}·|2>", ket.amplitude(&[2]));
    let ket = apply_to_basis(&pi.multiply(&a)?, &BasisState(vec![3]));
    println!("π·a|3> = {}·|3>", ket.amplitude(&[3]));

    // <n|m> = delta_nm n!
    let five = StateExpansion::basis(&BasisState(vec![5]));
    println!("<5|5> = {}", inner_product(&BasisState(vec![5]), &five)?);

    let number = pi
        .multiply(&a)?
        .scale(&BigRational::from_integer(BigInt::from(2)));
    let m = matrix_representation(&number, 3)?;
    println!("2·π·a on n <= 3:");
    for row in m.to_rows() {
        println!(
            "  {}",
            row.iter()
                .map(|v| format!("{v:>2}"))
                .collect::<Vec<_>>()
                .join(" ")
        );
    }

    let two = NormalOrderedPoly::creation(2, 0).multiply(&NormalOrderedPoly::annihilation(2, 1))?;
    println!(
        "two species: {}",
        two.render(Some(&["X".into(), "Y".into()]))
    );
    Ok(())
}
