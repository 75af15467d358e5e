//! Binary fixed-point complex numbers on `BigInt`: a value `x` is stored
//! as the integer `round(x · 2^bits)`.

use num_bigint::{BigInt, Sign};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::exact::CRational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CFx {
    pub re: BigInt,
    pub im: BigInt,
}

/// Arithmetic context fixing the number of fractional bits.
#[derive(Debug, Clone, Copy)]
pub struct Fx {
    pub bits: u32,
}

fn real_from_f64(x: f64, bits: u32) -> BigInt {
    if x == 0.0 {
        return BigInt::zero();
    }
    let r = BigRational::from_float(x).expect("finite");
    (r.numer() << bits as usize) / r.denom()
}

/// `v · 2^{-bits}` as `f64`, correct for values far outside the `f64`
/// exponent range of `v` itself.
pub fn real_to_f64(v: &BigInt, bits: u32) -> f64 {
    let nb = v.bits() as i64;
    if nb == 0 {
        return 0.0;
    }
    let shift = (nb - 62).max(0);
    let top = (v >> shift as usize).to_f64().unwrap_or(0.0);
    top * 2f64.powi((shift - bits as i64).clamp(-1100, 1100) as i32)
}

/// `ln |v · 2^{-bits}|`.
#[cfg(test)]
pub fn real_ln_abs(v: &BigInt, bits: u32) -> f64 {
    let nb = v.bits() as i64;
    if nb == 0 {
        return f64::NEG_INFINITY;
    }
    let shift = (nb - 62).max(0);
    let top = (num_traits::Signed::abs(v) >> shift as usize).to_f64().unwrap_or(0.0);
    top.ln() + (shift - bits as i64) as f64 * std::f64::consts::LN_2
}

impl Fx {
    pub fn new(bits: u32) -> Self {
        Fx { bits }
    }

    pub fn zero(&self) -> CFx {
        CFx { re: BigInt::zero(), im: BigInt::zero() }
    }

    pub fn one(&self) -> CFx {
        self.from_i64(1)
    }

    pub fn from_i64(&self, k: i64) -> CFx {
        CFx { re: BigInt::from(k) << self.bits as usize, im: BigInt::zero() }
    }

    pub fn from_c64(&self, z: Complex64) -> CFx {
        CFx { re: real_from_f64(z.re, self.bits), im: real_from_f64(z.im, self.bits) }
    }

    pub fn from_exact(&self, c: &CRational) -> CFx {
        let conv = |r: &BigRational| (r.numer() << self.bits as usize) / r.denom();
        CFx { re: conv(&c.re), im: conv(&c.im) }
    }

    pub fn to_c64(&self, a: &CFx) -> Complex64 {
        Complex64::new(real_to_f64(&a.re, self.bits), real_to_f64(&a.im, self.bits))
    }

    pub fn add(&self, a: &CFx, b: &CFx) -> CFx {
        CFx { re: &a.re + &b.re, im: &a.im + &b.im }
    }

    pub fn sub(&self, a: &CFx, b: &CFx) -> CFx {
        CFx { re: &a.re - &b.re, im: &a.im - &b.im }
    }

    pub fn neg(&self, a: &CFx) -> CFx {
        CFx { re: -&a.re, im: -&a.im }
    }

    pub fn conj(&self, a: &CFx) -> CFx {
        CFx { re: a.re.clone(), im: -&a.im }
    }

    pub fn is_zero(&self, a: &CFx) -> bool {
        a.re.is_zero() && a.im.is_zero()
    }

    fn shr(&self, x: BigInt) -> BigInt {
        x >> self.bits as usize
    }

    pub fn mul(&self, a: &CFx, b: &CFx) -> CFx {
        CFx {
            re: self.shr(&a.re * &b.re - &a.im * &b.im),
            im: self.shr(&a.re * &b.im + &a.im * &b.re),
        }
    }

    /// `a · 2^k` for small integers `k`.
    pub fn scale_pow2(&self, a: &CFx, k: i32) -> CFx {
        if k >= 0 {
            CFx { re: &a.re << k as usize, im: &a.im << k as usize }
        } else {
            CFx { re: &a.re >> (-k) as usize, im: &a.im >> (-k) as usize }
        }
    }

    /// `|a|²` as a fixed-point real.
    pub fn norm_sqr(&self, a: &CFx) -> BigInt {
        self.shr(&a.re * &a.re + &a.im * &a.im)
    }

    /// `|a|²` unshifted, i.e. scaled by `2^{2·bits}`; exact, for comparisons.
    pub fn norm_sqr_wide(&self, a: &CFx) -> BigInt {
        &a.re * &a.re + &a.im * &a.im
    }

    pub fn div(&self, a: &CFx, b: &CFx) -> CFx {
        let d = &b.re * &b.re + &b.im * &b.im;
        assert!(!d.is_zero(), "fixed-point division by zero");
        let nr = &a.re * &b.re + &a.im * &b.im;
        let ni = &a.im * &b.re - &a.re * &b.im;
        CFx { re: (nr << self.bits as usize) / &d, im: (ni << self.bits as usize) / &d }
    }

    /// Square root of a nonnegative fixed-point real.
    pub fn sqrt_real(&self, x: &BigInt) -> BigInt {
        if x.sign() != Sign::Plus {
            return BigInt::zero();
        }
        (x << self.bits as usize).sqrt()
    }

    pub fn abs(&self, a: &CFx) -> BigInt {
        (&a.re * &a.re + &a.im * &a.im).sqrt()
    }

    /// Principal square root.
    pub fn sqrt(&self, a: &CFx) -> CFx {
        if self.is_zero(a) {
            return self.zero();
        }
        let r = self.abs(a);
        let two = BigInt::from(2);
        if a.re.sign() != Sign::Minus {
            let re = self.sqrt_real(&((&r + &a.re) / &two));
            let im = (&a.im << self.bits as usize) / (&re * &two);
            CFx { re, im }
        } else {
            let mut im = self.sqrt_real(&((&r - &a.re) / &two));
            if a.im.sign() == Sign::Minus {
                im = -im;
            }
            let re = (&a.im << self.bits as usize) / (&im * &two);
            CFx { re, im }
        }
    }

    /// `e^{-iθ}` with `θ = arg a`, so that `a · phase(a)` is real positive.
    pub fn unit_conj_phase(&self, a: &CFx) -> CFx {
        let r = self.abs(a);
        CFx { re: (&a.re << self.bits as usize) / &r, im: -((&a.im << self.bits as usize) / &r) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_and_arithmetic() {
        let f = Fx::new(200);
        let a = f.from_c64(Complex64::new(1.5, -0.25));
        let b = f.from_c64(Complex64::new(-0.75, 2.0));
        let p = f.to_c64(&f.mul(&a, &b));
        let e = Complex64::new(1.5, -0.25) * Complex64::new(-0.75, 2.0);
        assert!((p - e).norm() < 1e-15);
        let q = f.to_c64(&f.div(&a, &b));
        let e = Complex64::new(1.5, -0.25) / Complex64::new(-0.75, 2.0);
        assert!((q - e).norm() < 1e-15);
    }

    #[test]
    fn principal_sqrt() {
        let f = Fx::new(200);
        for z in [Complex64::new(-4.0, 0.0), Complex64::new(3.0, 4.0), Complex64::new(-3.0, -4.0), Complex64::new(1e-30, 0.0)] {
            let s = f.to_c64(&f.sqrt(&f.from_c64(z)));
            assert!((s - z.sqrt()).norm() <= 1e-14 * z.sqrt().norm(), "{z}");
        }
    }

    #[test]
    fn tiny_values_convert() {
        let f = Fx::new(400);
        let x = BigInt::from(3) << 10usize; // 3 · 2^{-390}
        assert!((real_to_f64(&x, 400) / (3.0 * 2f64.powi(-390)) - 1.0).abs() < 1e-15);
        assert!((real_ln_abs(&x, 400) - (3f64.ln() - 390.0 * std::f64::consts::LN_2)).abs() < 1e-12);
        let _ = f;
    }
}
