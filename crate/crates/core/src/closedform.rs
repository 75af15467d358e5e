//! Closed-form leading terms of `B^±(n, 0)` for the three covered
//! families, the exact forward-walk product identity of the four-term
//! family, the `R^±` factors, and the Fibonacci/Catalan combinatorics.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{binomial, cint, cpow, factorial, CRational, ScaledComplex};
use crate::potential::{classify, reparametrize, FamilyKind, FamilyTag, Potential};
use crate::walkgen::{walk_sum_auto, ComplexValue, Direction, ZArg};

/// Order of the relative error of a leading term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorModel {
    LogOverN,
    OneOverSqrtN,
    OneOverN,
}

impl ErrorModel {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorModel::LogOverN => "LogOverN",
            ErrorModel::OneOverSqrtN => "OneOverSqrtN",
            ErrorModel::OneOverN => "OneOverN",
        }
    }

    /// The model's order at `n`, without constant.
    pub fn order(self, n: u32) -> f64 {
        let n = n as f64;
        match self {
            ErrorModel::LogOverN => n.ln() / n,
            ErrorModel::OneOverSqrtN => 1.0 / n.sqrt(),
            ErrorModel::OneOverN => 1.0 / n,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsymptoticValue {
    pub family: FamilyKind,
    pub direction: Direction,
    pub n: u32,
    pub leading: ComplexValue,
    pub relative_error_model: ErrorModel,
    #[serde(skip)]
    pub leading_exact: Option<CRational>,
    #[serde(skip, default = "ScaledComplex::zero")]
    pub leading_scaled: ScaledComplex,
}

impl AsymptoticValue {
    fn exact(family: FamilyKind, direction: Direction, n: u32, v: CRational, model: ErrorModel) -> Self {
        AsymptoticValue {
            family,
            direction,
            n,
            leading: ComplexValue::from_exact(&v),
            relative_error_model: model,
            leading_scaled: ScaledComplex::from_exact(&v),
            leading_exact: Some(v),
        }
    }

    fn scaled(family: FamilyKind, direction: Direction, n: u32, v: ScaledComplex, model: ErrorModel) -> Self {
        AsymptoticValue {
            family,
            direction,
            n,
            leading: ComplexValue::from_c64(v.to_c64()),
            relative_error_model: model,
            leading_exact: None,
            leading_scaled: v,
        }
    }
}

fn check_n(n: u32) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidArgument("n must be positive".into()))
    } else {
        Ok(())
    }
}

fn big(c: BigInt) -> CRational {
    CRational::new(BigRational::from_integer(c), BigRational::zero())
}

/// `4 (c/4)^n / ((n-1)!)²`.
fn factorial_form(c: &CRational, n: u32) -> CRational {
    let f = big(factorial(n as u64 - 1));
    cint(4) * cpow(&(c / cint(4)), n) / (&f * &f)
}

fn ln_double_factorial(k: i64) -> f64 {
    let mut s = 0.0;
    let mut i = k;
    while i > 1 {
        s += (i as f64).ln();
        i -= 2;
    }
    s
}

/// Leading term of `B^±(n, 0)`.
pub fn leading_b(p: &Potential, dir: Direction, n: u32) -> Result<AsymptoticValue> {
    check_n(n)?;
    let tag = classify(p);
    let kind = tag.kind();
    match (tag, dir) {
        (FamilyTag::TwoTerm { b, .. }, Direction::Forward) => {
            Ok(AsymptoticValue::exact(kind, dir, n, factorial_form(&b, n), ErrorModel::LogOverN))
        }
        (FamilyTag::TwoTerm { a, .. }, Direction::Backward) => {
            Ok(AsymptoticValue::exact(kind, dir, n, factorial_form(&a, n), ErrorModel::LogOverN))
        }
        (FamilyTag::AsymmetricTwoTerm { a, .. }, Direction::Backward) => {
            Ok(AsymptoticValue::exact(kind, dir, n, factorial_form(&a, n), ErrorModel::LogOverN))
        }
        (FamilyTag::AsymmetricTwoTerm { big_b, .. }, Direction::Forward) => {
            if n % 2 == 1 {
                return Err(Error::Unsupported(
                    "odd n for the forward asymmetric sum: the first nonempty class sums to zero".into(),
                ));
            }
            let m = n / 2;
            let f = big(factorial(m as u64 - 1));
            let v = cint(16) * cpow(&(big_b / cint(16)), m) / (&f * &f);
            Ok(AsymptoticValue::exact(kind, dir, n, v, ErrorModel::OneOverSqrtN))
        }
        (FamilyTag::FourTerm { .. }, Direction::Forward) => four_term_leading(p, n, dir),
        (FamilyTag::FourTerm { .. }, Direction::Backward) => four_term_leading(&p.reflected(), n, dir),
        (FamilyTag::General, _) => Err(Error::Unsupported("no closed form for General potentials".into())),
    }
}

/// Forward leading term of a four-term potential; the backward term is
/// this evaluated on the reflected potential (σ, β replaced by τ, α).
fn four_term_leading(p: &Potential, n: u32, dir: Direction) -> Result<AsymptoticValue> {
    let rep = reparametrize(p)?;
    if rep.sigma_is_integer {
        let which = if dir == Direction::Forward { "σ" } else { "τ" };
        return Err(Error::DegenerateLeadingTerm(format!("{which} is an integer; the R factor vanishes")));
    }
    let half_i_beta = Complex64::new(0.0, 1.0) * rep.beta / 2.0;
    let ln_df = ln_double_factorial(n as i64 - 2);
    let w = PI * rep.sigma / 2.0;
    let (factor, model) = if n % 2 == 0 {
        (w.cos() * 4.0, ErrorModel::LogOverN)
    } else {
        (Complex64::new(0.0, 4.0) * (2.0 / PI) * w.sin(), ErrorModel::LogOverN)
    };
    let ln_abs = n as f64 * half_i_beta.norm().ln() - 2.0 * ln_df;
    let arg = n as f64 * half_i_beta.arg();
    let v = ScaledComplex::from_polar_ln(ln_abs, arg).mul(&ScaledComplex::from_c64(factor));
    Ok(AsymptoticValue::scaled(FamilyKind::FourTerm, dir, n, v, model))
}

/// The exact forward-walk sum of a four-term potential at `z = 0`:
///
/// - even `n`: `4(β/2)^n/((n-1)!)² · Π_{i=1}^{n/2} (σ² - (2i-1)²)`
/// - odd `n`: `-4(β/2)^n/((n-1)!)² · σ · Π_{i=1}^{(n-1)/2} (σ² - (2i)²)`
///
/// Both reduce to polynomials in `B`, `b` and `σ² = -b²/(4B)`, so the
/// result is exact and independent of the square-root branch. The
/// backward direction uses the reflected potential.
pub fn forward_sum_product_form(p: &Potential, dir: Direction, n: u32) -> Result<CRational> {
    check_n(n)?;
    let p = if dir == Direction::Backward { p.reflected() } else { p.clone() };
    let (b, big_b) = match classify(&p) {
        FamilyTag::FourTerm { b, big_b, .. } => (b, big_b),
        other => {
            return Err(Error::InvalidArgument(format!("product form needs a FourTerm potential, got {}", other.kind())))
        }
    };
    let sigma_sq = -(&b * &b) / (cint(4) * &big_b);
    let f = big(factorial(n as u64 - 1));
    let f2 = &f * &f;
    let minus_b_over_4 = -big_b.clone() / cint(4);
    if n % 2 == 0 {
        // (β/2)^n = (β²/4)^{n/2} = (-B/4)^{n/2}
        let mut prod = cint(1);
        for i in 1..=(n / 2) as i64 {
            prod = prod * (&sigma_sq - cint((2 * i - 1) * (2 * i - 1)));
        }
        Ok(cint(4) * cpow(&minus_b_over_4, n / 2) / f2 * prod)
    } else {
        // (β/2)^n σ = (-B/4)^{(n-1)/2} · βσ/2 = (-B/4)^{(n-1)/2} · (-b/4)
        let mut prod = cint(1);
        for i in 1..=((n - 1) / 2) as i64 {
            prod = prod * (&sigma_sq - cint(4 * i * i));
        }
        let beta_sigma_half = -b / cint(4);
        Ok(-cint(4) * cpow(&minus_b_over_4, (n - 1) / 2) * beta_sigma_half / f2 * prod)
    }
}

/// Same identity in floating point from explicit `(β, σ)`.
pub fn product_form_from_params(beta: Complex64, sigma: Complex64, n: u32) -> Complex64 {
    let mut f = 1.0f64;
    for k in 1..n {
        f *= k as f64;
    }
    let pre = 4.0 * (beta / 2.0).powu(n) / (f * f);
    let s2 = sigma * sigma;
    if n % 2 == 0 {
        (1..=n / 2).fold(pre, |acc, i| acc * (s2 - ((2 * i - 1) * (2 * i - 1)) as f64))
    } else {
        (1..=(n - 1) / 2).fold(-pre * sigma, |acc, i| acc * (s2 - (4 * i * i) as f64))
    }
}

/// `A(n)`: number of forward walks `-n → n` with steps in `{2, 4}`;
/// `A(1) = 1`, `A(2) = 2`, `A(n+1) = A(n) + A(n-1)`.
pub fn fibonacci_forward_count(n: u32) -> Result<BigInt> {
    check_n(n)?;
    let (mut a, mut b) = (BigInt::one(), BigInt::from(2));
    for _ in 1..n {
        let c = &a + &b;
        a = b;
        b = c;
    }
    Ok(a)
}

/// `A(n)` from the Binet formula `(φ^{n+1} - ψ^{n+1})/√5`, rounded.
pub fn fibonacci_binet(n: u32) -> f64 {
    let s5 = 5f64.sqrt();
    let phi = (1.0 + s5) / 2.0;
    let psi = (1.0 - s5) / 2.0;
    ((phi.powi(n as i32 + 1) - psi.powi(n as i32 + 1)) / s5).round()
}

/// `C_k = (1/k) · C(2k-2, k-1)`, so `C_1 = 1, C_2 = 1, C_3 = 2, C_4 = 5`.
pub fn catalan(k: u32) -> Result<BigInt> {
    if k == 0 {
        return Err(Error::InvalidArgument("Catalan index starts at 1".into()));
    }
    let k = k as u64;
    Ok(binomial(2 * k - 2, k - 1) / BigInt::from(k))
}

/// `P = (n² - (-n-2)²) · Π_{τ=0}^{m-1} (n² - (-n+2+4τ)²)` with `n = 2m+1`.
pub fn p_product(m: u32) -> BigInt {
    let n = 2 * m as i64 + 1;
    let mut acc = BigInt::from(n * n - (n + 2) * (n + 2));
    for tau in 0..m as i64 {
        acc *= BigInt::from(n * n - (-n + 2 + 4 * tau).pow(2));
    }
    acc
}

/// `-8(m+1) 4^m (2m)!`.
pub fn p_closed(m: u32) -> BigInt {
    -BigInt::from(8) * BigInt::from(m + 1) * num_traits::pow(BigInt::from(4), m as usize) * factorial(2 * m as u64)
}

/// `P(t) = Π_{τ=1}^t (n² - (-n+4τ)²)` with `n = 2m+1`.
pub fn p_t_product(m: u32, t: u32) -> BigInt {
    let n = 2 * m as i64 + 1;
    (1..=t as i64).fold(BigInt::one(), |acc, tau| acc * BigInt::from(n * n - (-n + 4 * tau).pow(2)))
}

/// `4^t t! (2m)!/m! · (m-t)!/(2(m-t))!`, valid for `0 ≤ t ≤ m`.
pub fn p_t_closed(m: u32, t: u32) -> BigRational {
    let (m, t) = (m as u64, t as u64);
    let num = num_traits::pow(BigInt::from(4), t as usize) * factorial(t) * factorial(2 * m) * factorial(m - t);
    let den = factorial(m) * factorial(2 * (m - t));
    BigRational::new(num, den)
}

/// `(H₀*, H₀)` for the asymmetric potential with `a = B = 1`, `n = 2m+1`:
/// the sum of `|h|` and of `h` over the `m+2` walks with one `-2` step.
///
/// The two walks that start or end with the `-2` step contribute `1/P`
/// each; the remaining `m` walks contribute `1/(P(t)P(m+1-t))`.
pub fn h0_star_and_h0(m: u32) -> Result<(BigRational, BigRational)> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    let p = BigRational::from_integer(p_product(m));
    let ends = BigRational::from_integer(BigInt::from(2)) / &p;
    let mut inner = BigRational::zero();
    for t in 1..=m {
        let d = p_t_product(m, t) * p_t_product(m, m + 1 - t);
        inner += BigRational::new(BigInt::one(), d);
    }
    Ok((ends.abs() + &inner, ends + inner))
}

/// `(2 · 4^m (m+1) (2m)!)^{-1}`.
pub fn h0_star_closed(m: u32) -> BigRational {
    let d = BigInt::from(2) * num_traits::pow(BigInt::from(4), m as usize) * BigInt::from(m + 1) * factorial(2 * m as u64);
    BigRational::new(BigInt::one(), d)
}

/// The inner sum `Σ_{t=1}^m (P(t)P(m+1-t))^{-1}` through the Catalan
/// recurrence: `1/(4^{m+1} (m+1) (2m)!)`.
pub fn inner_sum_catalan(m: u32) -> Result<BigRational> {
    let c_top = catalan(m + 1)?;
    let mut conv = BigInt::zero();
    for t in 1..=m {
        conv += catalan(t)? * catalan(m + 1 - t)?;
    }
    let d = num_traits::pow(BigInt::from(4), m as usize + 1) * BigInt::from(m + 1) * factorial(2 * m as u64);
    Ok(BigRational::new(conv, c_top) / BigRational::from_integer(d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: u32) -> Parity {
        if n % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RFactor {
    pub r_plus: f64,
    pub r_minus: f64,
    pub parity: Parity,
}

impl RFactor {
    /// Either factor below `1e-8`: the leading asymptotics degenerate.
    pub fn is_degenerate(&self) -> bool {
        self.r_plus < 1e-8 || self.r_minus < 1e-8
    }
}

/// `|cos(πs/2)|/cosh(π|s|/2)` (even) or `|sin(πs/2)|/sinh(π|s|/2)` (odd).
pub fn r_single(s: Complex64, parity: Parity) -> f64 {
    let w = PI * s / 2.0;
    let x = w.norm();
    match parity {
        Parity::Even => w.cos().norm() / x.cosh(),
        Parity::Odd => {
            if x == 0.0 {
                1.0
            } else if s.norm() < 1e-6 {
                // sin(w)/w ≈ 1 - w²/6, sinh(x)/x ≈ 1 + x²/6
                (Complex64::new(1.0, 0.0) - w * w / 6.0).norm() / (1.0 + x * x / 6.0)
            } else {
                w.sin().norm() / x.sinh()
            }
        }
    }
}

pub fn r_factors(rep: &crate::potential::Reparam, parity: Parity) -> RFactor {
    RFactor { r_plus: r_single(rep.sigma, parity), r_minus: r_single(rep.tau, parity), parity }
}

/// One row of a walk-sum versus closed-form comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsymptoticRow {
    pub n: u32,
    pub exact: ComplexValue,
    pub leading: ComplexValue,
    pub rel_err: f64,
    pub error_model: ErrorModel,
    pub tail_bound: Option<f64>,
}

/// `|exact/leading - 1|` evaluated without underflow.
pub fn relative_error(exact: &ScaledComplex, leading: &ScaledComplex) -> f64 {
    (exact.div(leading).to_c64() - Complex64::new(1.0, 0.0)).norm()
}

/// Compares exact walk sums at `z = 0` with the leading term for each `n`.
pub fn compare_asymptotics(p: &Potential, dir: Direction, ns: &[u32]) -> Result<Vec<AsymptoticRow>> {
    let rows = crate::parallel::ordered_map(ns, |&n| -> Result<AsymptoticRow> {
        let lead = leading_b(p, dir, n)?;
        let sum = walk_sum_auto(p, n, dir, &ZArg::zero(), 1e-12, 64)?;
        Ok(AsymptoticRow {
            n,
            rel_err: relative_error(&sum.partial_sum_scaled, &lead.leading_scaled),
            exact: sum.partial_sum,
            leading: lead.leading,
            error_model: lead.relative_error_model,
            tail_bound: sum.tail_bound,
        })
    });
    rows.into_iter().collect()
}

/// Exact `4(b/4)^n/((n-1)!)²` with `n` and rational `b`, exposed for tests.
pub fn two_term_leading_exact(b: &CRational, n: u32) -> CRational {
    factorial_form(b, n)
}

/// `16 (B/16)^m / ((m-1)!)²`.
pub fn asymmetric_forward_leading_exact(big_b: &CRational, m: u32) -> CRational {
    let f = big(factorial(m as u64 - 1));
    cint(16) * cpow(&(big_b / cint(16)), m) / (&f * &f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{creal, rat};
    use crate::potential::parse_potential;
    use crate::walkgen::forward_only_sum;

    #[test]
    fn leading_small_cases() {
        let p = parse_potential("-2:3, 2:5").unwrap();
        assert_eq!(leading_b(&p, Direction::Forward, 2).unwrap().leading_exact.unwrap(), creal(25, 4));
        let q = parse_potential("-2:1, 4:7").unwrap();
        assert_eq!(leading_b(&q, Direction::Forward, 2).unwrap().leading_exact.unwrap(), cint(7));
        assert!(matches!(leading_b(&q, Direction::Forward, 3), Err(Error::Unsupported(_))));
        let g = parse_potential("2:1, 4:1").unwrap();
        assert!(matches!(leading_b(&g, Direction::Forward, 3), Err(Error::Unsupported(_))));
    }

    #[test]
    fn integer_sigma_is_degenerate() {
        // σ² = -b²/(4B) = 4 with B = -1, b = 4
        let p = parse_potential("-4:1/4, -2:1/4, 2:4, 4:-1").unwrap();
        assert!(matches!(leading_b(&p, Direction::Forward, 4), Err(Error::DegenerateLeadingTerm(_))));
        assert!(leading_b(&p, Direction::Backward, 4).is_ok());
    }

    #[test]
    fn product_form_small_n() {
        let p = parse_potential("-4:2, -2:3, 2:5, 4:7").unwrap();
        // n = 1: the single step b
        assert_eq!(forward_sum_product_form(&p, Direction::Forward, 1).unwrap(), cint(5));
        // n = 2: B + b²/4 = β²(σ² - 1)
        assert_eq!(forward_sum_product_form(&p, Direction::Forward, 2).unwrap(), cint(7) + creal(25, 4));
        for n in 1..=8 {
            for dir in [Direction::Forward, Direction::Backward] {
                let walks = forward_only_sum(&p, n, dir, &ZArg::zero()).unwrap();
                assert_eq!(walks.partial_sum_exact.unwrap(), forward_sum_product_form(&p, dir, n).unwrap(), "n={n} {dir}");
            }
        }
    }

    #[test]
    fn product_form_matches_params() {
        let beta = Complex64::new(0.7, 0.2);
        let sigma = Complex64::new(0.3, -0.4);
        // B = -β², b = -2σβ
        let big_b = -beta * beta;
        let b = -2.0 * sigma * beta;
        for n in 1..=6 {
            let direct = product_form_from_params(beta, sigma, n);
            let p = Potential::four_term(
                cint(1),
                crate::exact::complex_from_c64(b).unwrap(),
                cint(1),
                crate::exact::complex_from_c64(big_b).unwrap(),
            )
            .unwrap();
            let exact = crate::exact::to_c64(&forward_sum_product_form(&p, Direction::Forward, n).unwrap());
            assert!((direct - exact).norm() <= 1e-12 * exact.norm(), "n={n}");
        }
    }

    #[test]
    fn fibonacci_and_binet() {
        let v: Vec<u64> = (1..=10).map(|n| fibonacci_forward_count(n).unwrap().try_into().unwrap()).collect();
        assert_eq!(v, vec![1, 2, 3, 5, 8, 13, 21, 34, 55, 89]);
        for n in 1..=40 {
            assert_eq!(fibonacci_binet(n), fibonacci_forward_count(n).unwrap().to_string().parse::<f64>().unwrap());
        }
    }

    #[test]
    fn catalan_values() {
        let v: Vec<u64> = (1..=6).map(|k| catalan(k).unwrap().try_into().unwrap()).collect();
        assert_eq!(v, vec![1, 1, 2, 5, 14, 42]);
        let c5: BigInt = (1..=4).map(|i| catalan(i).unwrap() * catalan(5 - i).unwrap()).sum();
        assert_eq!(c5, catalan(5).unwrap());
    }

    #[test]
    fn h0_values() {
        let (s, h) = h0_star_and_h0(1).unwrap();
        assert_eq!((s, h), (rat(1, 32), BigRational::zero()));
        let (s, h) = h0_star_and_h0(2).unwrap();
        assert_eq!((s, h), (rat(1, 2304), BigRational::zero()));
    }

    #[test]
    fn p_identities() {
        for m in 1..=10 {
            assert_eq!(p_product(m), p_closed(m));
            for t in 0..=m {
                assert_eq!(BigRational::from_integer(p_t_product(m, t)), p_t_closed(m, t));
            }
            let inner: BigRational =
                (1..=m).map(|t| BigRational::new(BigInt::one(), p_t_product(m, t) * p_t_product(m, m + 1 - t))).sum();
            assert_eq!(inner, inner_sum_catalan(m).unwrap());
        }
    }

    #[test]
    fn r_factor_cases() {
        assert!(r_single(Complex64::new(1.0, 0.0), Parity::Even) < 1e-15);
        assert!((r_single(Complex64::new(0.0, 1.0), Parity::Even) - 1.0).abs() < 1e-14);
        assert!((r_single(Complex64::new(1e-8, 0.0), Parity::Odd) - 1.0).abs() < 1e-12);
        assert!((r_single(Complex64::new(0.0, 0.0), Parity::Odd) - 1.0).abs() < 1e-15);
        assert!(r_single(Complex64::new(2.0, 0.0), Parity::Odd) < 1e-15);
        // continuity across the series switch
        let a = r_single(Complex64::new(0.99e-6, 0.0), Parity::Odd);
        let b = r_single(Complex64::new(1.01e-6, 0.0), Parity::Odd);
        assert!((a - b).abs() < 1e-12);
    }
}
