//! Exact walk sums for the two-term potential `e^{-2ix} + 2e^{2ix}`.
//!
//! `cargo run --example walk_sums`

use hill_riesz::walkgen::{enumerate_walks, walk_sum, weight, Direction, ZArg};
use hill_riesz::{parse_potential, Result};

pub fn run_example() -> Result<String> {
    let p = parse_potential("-2:1,2:2")?;
    let mut out = String::new();

    // every forward walk from -3 to 3 with at most five steps, weighted at z = 0
    let z = hill_riesz::exact::cint(0);
    for w in &enumerate_walks(&p, 3, Direction::Forward, 5)? {
        out += &w.dump_line(&weight(w, &p, &z)?);
        out.push('\n');
    }

    let r = walk_sum(&p, 6, Direction::Forward, &"1/2-1/2i".parse::<ZArg>()?, 4)?;
    for c in &r.classes {
        out += &format!("class {} ({} walks): {:.6e}\n", c.index, c.count, c.sum.to_c64());
    }
    out += &format!("B+(6, 1/2-i/2) ≈ {:.6e}, tail ≤ {:.2e}\n", r.value(), r.tail_bound.unwrap_or(f64::NAN));
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
