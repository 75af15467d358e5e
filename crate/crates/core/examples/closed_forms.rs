//! Leading asymptotics of the walk sums against the exact values, and the
//! combinatorial identities behind them.
//!
//! `cargo run --example closed_forms`

use hill_riesz::closedform::{catalan, compare_asymptotics, fibonacci_forward_count, r_factors, Parity};
use hill_riesz::potential::reparametrize;
use hill_riesz::walkgen::Direction;
use hill_riesz::{parse_potential, Result};

pub fn run_example() -> Result<String> {
    let mut out = String::new();
    for (text, dir) in [("-2:1,2:2", Direction::Forward), ("-2:1,4:1", Direction::Backward)] {
        let p = parse_potential(text)?;
        out += &format!("{text} {}\n", dir.as_str());
        for row in compare_asymptotics(&p, dir, &[6, 10, 14])? {
            out += &format!("  n={:>2} rel_err {:.3e} ({})\n", row.n, row.rel_err, row.error_model.as_str());
        }
    }

    let four = parse_potential("-4:-1,-2:1,2:1,4:-1/2")?;
    let rep = reparametrize(&four)?;
    let r = r_factors(&rep, Parity::Even);
    out += &format!("σ² = {:.4}, τ² = {:.4}, R+ = {:.4}, R- = {:.4}\n", rep.sigma_sq, rep.tau_sq, r.r_plus, r.r_minus);

    let fib: Vec<String> = (1..=8).map(|n| fibonacci_forward_count(n).map(|c| c.to_string())).collect::<Result<_>>()?;
    let cat: Vec<String> = (1..=7).map(|k| catalan(k).map(|c| c.to_string())).collect::<Result<_>>()?;
    out += &format!("forward walk counts {}\ncatalan {}\n", fib.join(" "), cat.join(" "));
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
