use num_complex::Complex64;
use num_traits::Zero;

use crate::exact::{is_zero, to_c64, CRational, ScaledComplex};

/// Arithmetic needed by the walk engine. Implemented exactly for
/// complex rationals and approximately for `Complex64`, whose accumulator
/// uses Neumaier-compensated summation.
pub trait WalkScalar: Clone + Send + Sync + std::fmt::Debug {
    type Acc: Clone + Send;

    fn from_exact(c: &CRational) -> Self;
    fn from_int(k: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn is_zero(&self) -> bool;
    fn to_c64(&self) -> Complex64;
    fn norm(&self) -> f64;
    fn scaled(&self) -> ScaledComplex;
    fn as_exact(&self) -> Option<CRational>;

    fn acc_new() -> Self::Acc;
    fn acc_add(acc: &mut Self::Acc, x: &Self);
    fn acc_value(acc: &Self::Acc) -> Self;
}

impl WalkScalar for CRational {
    type Acc = CRational;

    fn from_exact(c: &CRational) -> Self {
        c.clone()
    }
    fn from_int(k: i64) -> Self {
        crate::exact::cint(k)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn is_zero(&self) -> bool {
        is_zero(self)
    }
    fn to_c64(&self) -> Complex64 {
        to_c64(self)
    }
    fn norm(&self) -> f64 {
        ScaledComplex::from_exact(self).ln_abs().exp()
    }
    fn scaled(&self) -> ScaledComplex {
        ScaledComplex::from_exact(self)
    }
    fn as_exact(&self) -> Option<CRational> {
        Some(self.clone())
    }

    fn acc_new() -> Self::Acc {
        CRational::zero()
    }
    fn acc_add(acc: &mut Self::Acc, x: &Self) {
        *acc += x;
    }
    fn acc_value(acc: &Self::Acc) -> Self {
        acc.clone()
    }
}

fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

/// Running sum and compensation for each component.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    re: (f64, f64),
    im: (f64, f64),
}

impl WalkScalar for Complex64 {
    type Acc = CompensatedSum;

    fn from_exact(c: &CRational) -> Self {
        to_c64(c)
    }
    fn from_int(k: i64) -> Self {
        Complex64::new(k as f64, 0.0)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
    fn scaled(&self) -> ScaledComplex {
        ScaledComplex::from_c64(*self)
    }
    fn as_exact(&self) -> Option<CRational> {
        None
    }

    fn acc_new() -> Self::Acc {
        CompensatedSum::default()
    }
    fn acc_add(acc: &mut Self::Acc, x: &Self) {
        neumaier(&mut acc.re.0, &mut acc.re.1, x.re);
        neumaier(&mut acc.im.0, &mut acc.im.1, x.im);
    }
    fn acc_value(acc: &Self::Acc) -> Self {
        Complex64::new(acc.re.0 + acc.re.1, acc.im.0 + acc.im.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = Complex64::acc_new();
        Complex64::acc_add(&mut acc, &Complex64::new(1.0, 0.0));
        for _ in 0..1000 {
            Complex64::acc_add(&mut acc, &Complex64::new(1e-17, 0.0));
        }
        Complex64::acc_add(&mut acc, &Complex64::new(-1.0, 0.0));
        let v = Complex64::acc_value(&acc);
        assert!((v.re - 1e-14).abs() < 1e-20, "{}", v.re);
    }
}
