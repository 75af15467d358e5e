//! Basis verdicts for one potential from each family, with the walk-sum
//! ratio trend that backs them.
//!
//! `cargo run --example verdict`

use hill_riesz::spectral::Bc;
use hill_riesz::verdict::{ratio_criterion, theorem_verdict};
use hill_riesz::{parse_potential, Result};

pub fn run_example() -> Result<String> {
    let mut out = String::new();
    for text in ["-2:1,2:2", "-2:3/5+4/5i,2:1", "-2:1,4:1", "-4:1,-2:1,2:1,4:2", "-4:1,-2:1,2:4,4:-1"] {
        let p = parse_potential(text)?;
        let v = theorem_verdict(&p, Bc::PerPlus);
        let r = ratio_criterion(&p, Bc::PerPlus, &[6, 8, 10, 12, 14]);
        out += &format!("{text:<22} {:?} {:?}, trend {:?}\n", v.family, v.prediction, r.trend);
        for g in &v.grounds {
            out += &format!("    {g}\n");
        }
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
