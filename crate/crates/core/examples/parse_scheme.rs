//! Parse an interaction scheme and print its stoichiometry.
//!
//! cargo run --example parse_scheme [path/to/file.scheme]

use onestep::parse_scheme;
use onestep::scheme::step_operator;

const DEFAULT: &str = "species X, Y
param k = 0.5
X -> 2X @ 1.0
X + Y -> 2Y @ k
Y -> 0 @ 0.3
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => DEFAULT.to_string(),
    };
    let scheme = parse_scheme(&text)?;
    println!("species: {}", scheme.species().names().join(", "));
    for (i, (inter, r)) in scheme
        .interactions()
        .iter()
        .zip(step_operator(&scheme))
        .enumerate()
    {
        println!(
            "#{i}: I={:?} F={:?} r={:?} k+={} k-={}",
            inter.reactants,
            inter.products,
            r,
            inter.k_plus.label(),
            inter.k_minus.label()
        );
    }
    println!("\ncanonical form:\n{}", scheme.to_source());
    println!("{}", serde_json::to_string_pretty(&scheme.summary())?);
    Ok(())
}
