//! Gram angles of the eigenvector pairs next to the walk-sum prediction,
//! written as CSV.
//!
//! `cargo run --example basis_profile`

use hill_riesz::spectral::{basis_profile, Bc};
use hill_riesz::{parse_potential, Result};

pub fn run_example() -> Result<String> {
    // |a| ≠ |b|: the Gram modulus tends to 1 and the projections blow up
    let p = parse_potential("-2:1,2:2")?;
    let profile = basis_profile(&p, Bc::PerPlus, &[4, 6, 8, 10]);
    let mut buf = Vec::new();
    profile.write_csv(&mut buf)?;
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
