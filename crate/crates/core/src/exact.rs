//! Complex-rational helpers shared by the exact code paths: parsing,
//! formatting, exact square roots, and conversion to floating point
//! without underflow.

use num_bigint::{BigInt, Sign};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CRational = num_complex::Complex<BigRational>;

pub fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn rint(p: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(p))
}

pub fn crat(re: BigRational, im: BigRational) -> CRational {
    CRational::new(re, im)
}

/// Real complex-rational `p/q + 0i`.
pub fn creal(p: i64, q: i64) -> CRational {
    CRational::new(rat(p, q), BigRational::zero())
}

pub fn cint(p: i64) -> CRational {
    CRational::new(rint(p), BigRational::zero())
}

pub fn modulus_sq(c: &CRational) -> BigRational {
    &c.re * &c.re + &c.im * &c.im
}

pub fn is_zero(c: &CRational) -> bool {
    c.re.is_zero() && c.im.is_zero()
}

/// Exact conversion of a finite double.
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::InvalidArgument(format!("non-finite value {x}")))
}

pub fn complex_from_c64(z: Complex64) -> Result<CRational> {
    Ok(CRational::new(rational_from_f64(z.re)?, rational_from_f64(z.im)?))
}

fn bit_len(x: &BigInt) -> i64 {
    x.bits() as i64
}

/// `floor(log2 |x|)` up to ±1, or `None` for zero.
fn log2_estimate(x: &BigRational) -> Option<i64> {
    if x.is_zero() {
        None
    } else {
        Some(bit_len(x.numer()) - bit_len(x.denom()))
    }
}

fn mul_pow2(x: &BigRational, e: i64) -> BigRational {
    if e >= 0 {
        x * BigRational::from_integer(BigInt::one() << (e as usize))
    } else {
        x / BigRational::from_integer(BigInt::one() << ((-e) as usize))
    }
}

/// Correctly scaled conversion of a rational to `f64`; underflows to zero
/// and overflows to infinity like an ordinary cast.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    match log2_estimate(x) {
        None => 0.0,
        Some(e) => {
            let m = mul_pow2(x, -e).to_f64().unwrap_or(f64::NAN);
            m * 2f64.powi(e.clamp(-1100, 1100) as i32)
        }
    }
}

pub fn to_c64(c: &CRational) -> Complex64 {
    Complex64::new(rational_to_f64(&c.re), rational_to_f64(&c.im))
}

/// A complex number as `mant · 2^exp2`, so that magnitudes far below the
/// double-precision range can still be compared and divided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledComplex {
    pub mant: Complex64,
    pub exp2: i64,
}

impl ScaledComplex {
    pub fn zero() -> Self {
        ScaledComplex { mant: Complex64::new(0.0, 0.0), exp2: 0 }
    }

    pub fn from_c64(z: Complex64) -> Self {
        ScaledComplex { mant: z, exp2: 0 }.normalized()
    }

    pub fn from_exact(c: &CRational) -> Self {
        let e = match (log2_estimate(&c.re), log2_estimate(&c.im)) {
            (None, None) => return Self::zero(),
            (Some(a), None) | (None, Some(a)) => a,
            (Some(a), Some(b)) => a.max(b),
        };
        let mant = Complex64::new(
            mul_pow2(&c.re, -e).to_f64().unwrap_or(0.0),
            mul_pow2(&c.im, -e).to_f64().unwrap_or(0.0),
        );
        ScaledComplex { mant, exp2: e }
    }

    /// `modulus · e^{i·arg}` with the modulus given through its natural log.
    pub fn from_polar_ln(ln_abs: f64, arg: f64) -> Self {
        let e2 = ln_abs / std::f64::consts::LN_2;
        let k = e2.floor();
        let r = (e2 - k).exp2();
        ScaledComplex { mant: Complex64::from_polar(r, arg), exp2: k as i64 }
    }

    fn normalized(self) -> Self {
        let a = self.mant.norm();
        if a == 0.0 || !a.is_finite() {
            return self;
        }
        let k = a.log2().floor() as i64;
        ScaledComplex { mant: self.mant * 2f64.powi(-(k as i32)), exp2: self.exp2 + k }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.re == 0.0 && self.mant.im == 0.0
    }

    pub fn ln_abs(&self) -> f64 {
        self.mant.norm().ln() + self.exp2 as f64 * std::f64::consts::LN_2
    }

    pub fn to_c64(&self) -> Complex64 {
        self.mant * 2f64.powi(self.exp2.clamp(-1100, 1100) as i32)
    }

    pub fn mul(&self, other: &Self) -> Self {
        ScaledComplex { mant: self.mant * other.mant, exp2: self.exp2 + other.exp2 }.normalized()
    }

    pub fn div(&self, other: &Self) -> Self {
        ScaledComplex { mant: self.mant / other.mant, exp2: self.exp2 - other.exp2 }.normalized()
    }

    pub fn abs(&self) -> ScaledComplex {
        ScaledComplex { mant: Complex64::new(self.mant.norm(), 0.0), exp2: self.exp2 }
    }
}

pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty number".into()));
    }
    let bad = || Error::Parse(format!("malformed rational '{text}'"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in '{text}'")));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let negative = int.trim_start().starts_with('-');
        let int_part = int.trim_start_matches(['+', '-']);
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac.chars().all(|c| c.is_ascii_digit())
            || (int_part.is_empty() && frac.is_empty())
        {
            return Err(bad());
        }
        let digits = format!("{int_part}{frac}");
        let mag: BigInt = digits.parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let r = BigRational::new(mag, den);
        return Ok(if negative { -r } else { r });
    }
    let p: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(p))
}

/// Parses `r`, `r+si`, `r-si`, `si`, `i`, `-i` with rational (`p/q`)
/// components. Whitespace is ignored.
pub fn parse_complex(text: &str) -> Result<CRational> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::Parse("empty complex literal".into()));
    }
    let Some(body) = s.strip_suffix('i') else {
        return Ok(CRational::new(parse_rational(&s)?, BigRational::zero()));
    };
    // split at the last sign that is not the leading one
    let split = body
        .char_indices()
        .filter(|&(k, c)| k > 0 && (c == '+' || c == '-'))
        .map(|(k, _)| k)
        .last();
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("", body),
    };
    let im = match im {
        "" | "+" => BigRational::one(),
        "-" => -BigRational::one(),
        other => parse_rational(other.strip_prefix('+').unwrap_or(other))
            .map_err(|_| Error::Parse(format!("malformed complex literal '{text}'")))?,
    };
    let re = if re.is_empty() {
        BigRational::zero()
    } else {
        parse_rational(re).map_err(|_| Error::Parse(format!("malformed complex literal '{text}'")))?
    };
    Ok(CRational::new(re, im))
}

pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Inverse of [`parse_complex`].
pub fn format_complex(c: &CRational) -> String {
    match (c.re.is_zero(), c.im.is_zero()) {
        (_, true) => format_rational(&c.re),
        (true, false) => format!("{}i", format_rational(&c.im)),
        (false, false) => {
            let sign = if c.im.is_negative() { '-' } else { '+' };
            format!("{}{}{}i", format_rational(&c.re), sign, format_rational(&c.im.abs()))
        }
    }
}

fn integer_sqrt_exact(x: &BigInt) -> Option<BigInt> {
    if x.sign() == Sign::Minus {
        return None;
    }
    let r = x.sqrt();
    (&r * &r == *x).then_some(r)
}

/// Square root of a nonnegative rational, if it is rational.
pub fn rational_sqrt(x: &BigRational) -> Option<BigRational> {
    if x.is_negative() {
        return None;
    }
    let p = integer_sqrt_exact(x.numer())?;
    let q = integer_sqrt_exact(x.denom())?;
    Some(BigRational::new(p, q))
}

/// Principal square root of a complex rational, if it is a complex
/// rational: real part ≥ 0, and imaginary part ≥ 0 when the real part is 0.
pub fn exact_sqrt(c: &CRational) -> Option<CRational> {
    if is_zero(c) {
        return Some(c.clone());
    }
    let r = rational_sqrt(&modulus_sq(c))?;
    let two = rint(2);
    let re = rational_sqrt(&((&r + &c.re) / &two))?;
    let mut im = rational_sqrt(&((&r - &c.re) / &two))?;
    if c.im.is_negative() {
        im = -im;
    }
    Some(CRational::new(re, im))
}

/// True iff `c = k²` for some integer `k ≥ 0`.
pub fn is_integer_square(c: &CRational) -> bool {
    c.im.is_zero() && c.re.is_integer() && integer_sqrt_exact(c.re.numer()).is_some()
}

pub fn factorial(k: u64) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// `k!!` with the conventions `0!! = (-1)!! = 1`.
pub fn double_factorial(k: i64) -> BigInt {
    let mut acc = BigInt::one();
    let mut i = k;
    while i > 1 {
        acc *= BigInt::from(i);
        i -= 2;
    }
    acc
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn cpow(c: &CRational, k: u32) -> CRational {
    let mut acc = cint(1);
    for _ in 0..k {
        acc = &acc * c;
    }
    acc
}
