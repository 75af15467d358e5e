//! A full report: theorem prediction, ratio trace, localization and Gram
//! profile, cross-checked against each other.
//!
//! `cargo run --example report`

use hill_riesz::spectral::Bc;
use hill_riesz::verdict::full_report;
use hill_riesz::{parse_potential, Result};

pub fn run_example() -> Result<String> {
    let p = parse_potential("-2:1,2:1")?;
    let report = full_report(&p, Bc::PerMinus, &[5, 7, 9, 11]);
    let mut out = format!("{:?} on {}: consistent = {:?}\n", report.prediction, report.bc, report.consistent);
    if let Some(g) = report.empirical.max_gram_abs {
        out += &format!("max |gram| over {:?}: {g:.3e}\n", report.empirical.checked_range);
    }
    out += &serde_json::to_string_pretty(&report.verdict())?;
    out.push('\n');
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
