//! Eigenvalue pairs of the truncated periodic operator in the discs
//! `n² + D`, and where localization sets in.
//!
//! `cargo run --example spectrum`

use hill_riesz::spectral::{localization_report, spectral_pair_auto, Bc};
use hill_riesz::{parse_potential, Result};

pub fn run_example() -> Result<String> {
    let p = parse_potential("-2:1,2:1/2")?;
    let mut out = String::new();

    let loc = localization_report(&p, Bc::PerMinus, 15, None)?;
    match loc.empirical_n {
        Some(n) => out += &format!("per-: K = {}, every disc beyond n = {n} holds two eigenvalues\n", loc.k),
        None => out += &format!("per-: K = {}, every disc up to n = 15 holds two eigenvalues\n", loc.k),
    }

    for n in [4, 8] {
        let pair = spectral_pair_auto(&p, Bc::PerPlus, n)?;
        let (l1, l2) = (pair.lambda1.to_c64(), pair.lambda2.to_c64());
        out += &format!("n={n} λ = {l1:.9}, {l2:.9} |gram| = {:.3e}\n", pair.gram_abs.unwrap_or(f64::NAN));
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
