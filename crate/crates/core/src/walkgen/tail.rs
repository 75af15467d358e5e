//! Certified bounds on the walk classes omitted from a truncated sum.
//!
//! Two majorants are available and the smaller one is reported:
//!
//! - the family surgery bound: every walk in class `k` is reduced to the
//!   class skeleton by removing step groups, each removal shrinking the
//!   weight by a fixed ratio, and the classes are counted by binomials;
//! - a Neumann bound: any walk of length `L` has weight at most
//!   `‖V‖₁^L / d_min^{L-1}`, and a walk with `k` reverse steps has length
//!   at least `k + ⌈(2n + k·r_min)/f_max⌉`.

use num_complex::Complex64;

use super::sum::class_sums;
use super::Direction;
use crate::error::{Error, Result};
use crate::exact::to_c64;
use crate::potential::{classify, FamilyTag, Potential};

/// Relative slack covering floating rounding in the bound evaluation.
const SAFETY: f64 = 1.0 + 1e-10;
/// Explicit terms summed before the geometric closure.
const EXPLICIT_TERMS: u64 = 800;

fn ln_binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// `Σ_{k ≥ from} exp(ln_term(k))`, where `exp(ln_c + k·ln_theta)`
/// majorizes every term; `None` when that majorant does not converge.
fn series_tail(from: u64, ln_term: impl Fn(u64) -> f64, ln_c: f64, ln_theta: f64) -> Option<f64> {
    if !(ln_theta < 0.0) {
        return None;
    }
    let end = from + EXPLICIT_TERMS;
    let mut lns: Vec<f64> = (from..end).map(&ln_term).collect();
    let theta = ln_theta.exp();
    lns.push(ln_c + end as f64 * ln_theta - (1.0 - theta).ln());
    let max = lns.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Some(0.0);
    }
    let s: f64 = lns.iter().map(|l| (l - max).exp()).sum();
    Some(positive_exp(max + s.ln()))
}

/// `exp(x)`, never rounding a positive quantity down to zero.
fn positive_exp(x: f64) -> f64 {
    x.exp().max(f64::MIN_POSITIVE)
}

/// Smallest `|n² - j²|` over lattice vertices `j ≡ n (mod 2)`, `j ≠ ±n`.
fn min_vertex_gap(n: u32) -> f64 {
    if n == 1 {
        8.0
    } else {
        4.0 * n as f64 - 4.0
    }
}

/// Neumann bound on all walks with at least `k_first` reverse steps.
pub fn neumann_tail(p: &Potential, n: u32, dir: Direction, z_abs: f64, k_first: u32) -> Option<f64> {
    let sign = dir.sign();
    let progress: Vec<i64> = p.support().iter().map(|s| s * sign).collect();
    let f_max = progress.iter().copied().filter(|&x| x > 0).max()?;
    let r_min = progress.iter().copied().filter(|&x| x < 0).map(|x| -x).min().unwrap_or(0);
    if r_min == 0 {
        // no reverse steps: the omitted classes are empty
        return Some(0.0);
    }
    let norm = p.l1_norm();
    let d_min = min_vertex_gap(n) - z_abs;
    if d_min <= 0.0 {
        return None;
    }
    let theta = norm / d_min;
    if theta >= 1.0 {
        return None;
    }
    let k = k_first as i64;
    let len = k + num_integer::Integer::div_ceil(&(2 * n as i64 + k * r_min), &f_max);
    Some(positive_exp(norm.ln() + (len - 1) as f64 * theta.ln() - (1.0 - theta).ln()))
}

/// `Σ |h(x, z)|` over one class, in floating point.
pub fn skeleton_mass(p: &Potential, n: u32, dir: Direction, z: Complex64, class: u32) -> Result<f64> {
    Ok(class_sums(p, n, dir, &z, class, false)?[class as usize].mass)
}

/// Per-pair ratio for the forward asymmetric family: the three removed
/// denominators times the worst product of shifted denominators.
fn asymmetric_pair_ratio(c: f64, n: u32, z_abs: f64) -> Option<f64> {
    let n_i = n as i64;
    let d = 4.0 * n as f64 - 4.0 - z_abs;
    if d <= 0.0 {
        return None;
    }
    let mut worst: f64 = 1.0;
    let t_max = (n_i - 1) / 2;
    for i in 1..=t_max {
        let mut prod = 1.0;
        for t in i..=t_max {
            let num = (n_i * n_i - (-n_i + 4 * t).pow(2)) as f64;
            let den = (n_i * n_i - (-n_i + 4 * t - 2).pow(2)) as f64;
            if den - z_abs <= 0.0 {
                return None;
            }
            prod *= (num.abs() + z_abs) / (den - z_abs);
            worst = worst.max(prod);
        }
    }
    Some(c / d.powi(3) * worst)
}

fn family_tail(p: &Potential, n: u32, dir: Direction, z: Complex64, max_class: u32) -> Result<Option<f64>> {
    let z_abs = z.norm();
    let k = max_class as u64;
    let nn = n as u64;
    let nf = n as f64;
    let ln2 = std::f64::consts::LN_2;
    Ok(match (classify(p), dir) {
        (FamilyTag::TwoTerm { a, b }, _) => {
            if n <= 2 {
                return Ok(Some(0.0));
            }
            let x = to_c64(&a).norm() * to_c64(&b).norm() / (nf * nf);
            let s0 = skeleton_mass(p, n, dir, z, 0)?;
            series_tail(k + 1, |q| ln_binomial(nn + 2 * q, q) + q as f64 * x.ln(), nf * ln2, (4.0 * x).ln())
                .map(|t| t * s0)
        }
        (FamilyTag::AsymmetricTwoTerm { a, big_b }, Direction::Backward) if n >= 6 => {
            let x = to_c64(&a).norm_sqr() * to_c64(&big_b).norm() / nf.powi(3);
            let s0 = skeleton_mass(p, n, dir, z, 0)?;
            series_tail(k + 1, |q| ln_binomial(nn + 3 * q, q) + q as f64 * x.ln(), nf * ln2, (8.0 * x).ln())
                .map(|t| t * s0)
        }
        (FamilyTag::AsymmetricTwoTerm { a, big_b }, Direction::Forward) if n >= 6 => {
            let c = to_c64(&a).norm_sqr() * to_c64(&big_b).norm();
            let Some(rho) = asymmetric_pair_ratio(c, n, z_abs) else { return Ok(None) };
            let m = nn / 2;
            if n % 2 == 0 {
                let s0 = skeleton_mass(p, n, dir, z, 0)?;
                series_tail(
                    k / 2 + 1,
                    |r| ln_binomial(m + 3 * r, 2 * r) + r as f64 * rho.ln(),
                    m as f64 * ln2,
                    (8.0 * rho).ln(),
                )
                .map(|t| t * s0)
            } else {
                let s1 = skeleton_mass(p, n, dir, z, 1)?;
                series_tail(
                    k.div_ceil(2),
                    |r| ln_binomial(m + 3 * r + 2, 2 * r + 1) + r as f64 * rho.ln(),
                    (m + 2) as f64 * ln2,
                    (8.0 * rho).ln(),
                )
                .map(|t| t * s1)
            }
        }
        _ => None,
    })
}

/// Certified upper bound on `Σ |h(x, z)|` over all admissible walks in
/// classes above `max_class`, for `|z| ≤ 1`.
pub fn certified_tail(p: &Potential, n: u32, dir: Direction, z: Complex64, max_class: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    if matches!(classify(p), FamilyTag::General) {
        return Err(Error::CertificationUnavailable(
            "no majorant is available outside the two-term, asymmetric and four-term families".into(),
        ));
    }
    if z.norm() > 1.0 {
        return Err(Error::CertificationUnavailable(format!("|z| = {} exceeds 1", z.norm())));
    }
    let family = family_tail(p, n, dir, z, max_class)?;
    let neumann = neumann_tail(p, n, dir, z.norm(), max_class + 1);
    let best = match (family, neumann) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => {
            return Err(Error::CertificationUnavailable(format!(
                "majorant series does not converge at n = {n}; coefficients too large for this n"
            )))
        }
    };
    Ok(best * SAFETY)
}

/// `e^{W} - 1` with `W = Σ -ln(1 - |z|/(n² - j²))` over every vertex
/// strictly between `-n` and `n`; bounds `|h(w, z)/h(w, 0) - 1|` for every
/// sign-constant walk `w`.
pub fn forward_perturbation_majorant(n: u32, z_abs: f64) -> Option<f64> {
    let n_i = n as i64;
    let mut w = 0.0;
    let mut j = -n_i + 2;
    while j < n_i {
        let d = (n_i * n_i - j * j) as f64;
        if d <= z_abs {
            return None;
        }
        w += -(1.0 - z_abs / d).ln();
        j += 2;
    }
    Some(w.exp_m1())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::parse_potential;
    use crate::walkgen::{walk_sum, ZArg};

    #[test]
    fn ln_binomial_small() {
        assert!((ln_binomial(10, 3) - 120f64.ln()).abs() < 1e-12);
        assert_eq!(ln_binomial(5, 0), 0.0);
    }

    /// The omitted mass, measured by summing many more classes, never
    /// exceeds the bound.
    #[test]
    fn tails_dominate_measured_mass() {
        let cases = ["-2:1, 2:2", "-2:1, 4:1", "-2:2, 4:1/2", "-4:1/4, -2:1/4, 2:1/4, 4:1/4"];
        for spec in cases {
            let p = parse_potential(spec).unwrap();
            for n in [3u32, 6, 7, 8] {
                for dir in [Direction::Forward, Direction::Backward] {
                    let z = Complex64::new(0.3, -0.4);
                    let k0 = 2;
                    let Ok(t) = certified_tail(&p, n, dir, z, k0) else { continue };
                    let deep = walk_sum(&p, n, dir, &ZArg::Float(z), k0 + 10).unwrap();
                    let omitted: f64 = deep.classes.iter().filter(|c| c.index > k0).map(|c| c.mass).sum();
                    assert!(omitted <= t, "{spec} n={n} {dir}: {omitted} > {t}");
                }
            }
        }
    }

    #[test]
    fn general_uncertified() {
        let p = parse_potential("-2:1, 2:1, 4:1").unwrap();
        assert!(matches!(
            certified_tail(&p, 5, Direction::Forward, Complex64::new(0.0, 0.0), 3),
            Err(Error::CertificationUnavailable(_))
        ));
    }

    #[test]
    fn perturbation_majorant_grows_with_z() {
        let a = forward_perturbation_majorant(20, 0.5).unwrap();
        let b = forward_perturbation_majorant(20, 1.0).unwrap();
        assert!(0.0 < a && a < b);
    }
}
