//! Trigonometric-polynomial potentials `v(x) = Σ V(m) e^{imx}` with even
//! nonzero harmonics, their family classification, and the
//! reparametrization `A = -α², a = -2τα, B = -β², b = -2σβ` of the
//! four-term family.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact::{
    cint, exact_sqrt, format_complex, is_integer_square, is_zero, modulus_sq, parse_complex, to_c64,
    CRational,
};

/// Default tolerance for deciding integrality of `σ`, `τ` from floating inputs.
pub const INTEGRALITY_TOL: f64 = 1e-9;

/// Finite Fourier coefficient map on nonzero even integers. The constant
/// term `V(0)` is not part of the model: it only shifts the spectrum.
#[derive(Clone, PartialEq, Eq)]
pub struct Potential {
    coeffs: BTreeMap<i64, CRational>,
}

impl Potential {
    pub fn new<I>(coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, CRational)>,
    {
        let mut map = BTreeMap::new();
        for (m, v) in coeffs {
            if m == 0 || m % 2 != 0 {
                return Err(Error::Parse(format!("index {m} must be even and nonzero")));
            }
            if is_zero(&v) {
                return Err(Error::Parse(format!("coefficient V({m}) is zero")));
            }
            if map.insert(m, v).is_some() {
                return Err(Error::Parse(format!("index {m} listed twice")));
            }
        }
        if map.is_empty() {
            return Err(Error::Parse("potential has no coefficients".into()));
        }
        Ok(Potential { coeffs: map })
    }

    /// `a e^{-2ix} + b e^{2ix}`.
    pub fn two_term(a: CRational, b: CRational) -> Result<Self> {
        Self::new([(-2, a), (2, b)])
    }

    /// `a e^{-2ix} + B e^{4ix}`.
    pub fn asymmetric_two_term(a: CRational, big_b: CRational) -> Result<Self> {
        Self::new([(-2, a), (4, big_b)])
    }

    /// `a e^{-2ix} + b e^{2ix} + A e^{-4ix} + B e^{4ix}`.
    pub fn four_term(a: CRational, b: CRational, big_a: CRational, big_b: CRational) -> Result<Self> {
        Self::new([(-2, a), (2, b), (-4, big_a), (4, big_b)])
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, CRational> {
        &self.coeffs
    }

    pub fn coeff(&self, m: i64) -> Option<&CRational> {
        self.coeffs.get(&m)
    }

    pub fn coeff_c64(&self, m: i64) -> Complex64 {
        self.coeffs.get(&m).map(to_c64).unwrap_or_else(|| Complex64::new(0.0, 0.0))
    }

    pub fn support(&self) -> Vec<i64> {
        self.coeffs.keys().copied().collect()
    }

    pub fn max_abs_index(&self) -> i64 {
        self.coeffs.keys().map(|m| m.abs()).max().unwrap_or(0)
    }

    /// Half-bandwidth of the Galerkin matrix in frequency units.
    pub fn band(&self) -> usize {
        (self.max_abs_index() / 2) as usize
    }

    /// `Σ |V(m)|`.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|v| to_c64(v).norm()).sum()
    }

    /// True iff `V(-m) = conj(V(m))` for every `m`, i.e. `v` is real.
    pub fn is_real_valued(&self) -> bool {
        self.coeffs.iter().all(|(m, v)| match self.coeffs.get(&-m) {
            Some(w) => w.re == v.re && w.im == -v.im.clone(),
            None => false,
        })
    }

    /// The potential `v(-x)`, i.e. `V(m) ↦ V(-m)`; swaps `a ↔ b`, `A ↔ B`.
    pub fn reflected(&self) -> Potential {
        Potential { coeffs: self.coeffs.iter().map(|(m, v)| (-m, v.clone())).collect() }
    }

    pub fn classify(&self) -> FamilyTag {
        classify(self)
    }

    /// Text form accepted by [`parse_potential`].
    pub fn to_spec_string(&self) -> String {
        self.coeffs
            .iter()
            .map(|(m, v)| format!("{m}:{}", format_complex(v)))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Potential({})", self.to_spec_string())
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_spec_string())
    }
}

impl Serialize for Potential {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_spec_string())
    }
}

impl<'de> Deserialize<'de> for Potential {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_potential(&s).map_err(serde::de::Error::custom)
    }
}

impl std::str::FromStr for Potential {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_potential(s)
    }
}

/// Parses `index:complex` pairs separated by commas, e.g. `"-2:1, 4:-3/4i"`.
pub fn parse_potential(text: &str) -> Result<Potential> {
    let mut pairs = Vec::new();
    for item in text.split(',') {
        let item = item.trim();
        if item.is_empty() {
            return Err(Error::Parse(format!("empty entry in '{text}'")));
        }
        let (idx, val) = item
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected index:value, got '{item}'")))?;
        let idx: String = idx.chars().filter(|c| !c.is_whitespace()).collect();
        let m: i64 = idx.parse().map_err(|_| Error::Parse(format!("bad index '{idx}'")))?;
        pairs.push((m, parse_complex(val)?));
    }
    Potential::new(pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyKind {
    TwoTerm,
    AsymmetricTwoTerm,
    FourTerm,
    General,
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FamilyKind::TwoTerm => "TwoTerm",
            FamilyKind::AsymmetricTwoTerm => "AsymmetricTwoTerm",
            FamilyKind::FourTerm => "FourTerm",
            FamilyKind::General => "General",
        };
        f.write_str(s)
    }
}

/// Family of a potential, decided by its support alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyTag {
    /// support `{-2, 2}`: `a = V(-2)`, `b = V(2)`
    TwoTerm { a: CRational, b: CRational },
    /// support `{-2, 4}`: `a = V(-2)`, `big_b = V(4)`
    AsymmetricTwoTerm { a: CRational, big_b: CRational },
    /// support `{-4, -2, 2, 4}`
    FourTerm { a: CRational, b: CRational, big_a: CRational, big_b: CRational },
    General,
}

impl FamilyTag {
    pub fn kind(&self) -> FamilyKind {
        match self {
            FamilyTag::TwoTerm { .. } => FamilyKind::TwoTerm,
            FamilyTag::AsymmetricTwoTerm { .. } => FamilyKind::AsymmetricTwoTerm,
            FamilyTag::FourTerm { .. } => FamilyKind::FourTerm,
            FamilyTag::General => FamilyKind::General,
        }
    }
}

pub fn classify(p: &Potential) -> FamilyTag {
    let c = |m: i64| p.coeff(m).cloned().expect("support checked");
    match p.support().as_slice() {
        [-2, 2] => FamilyTag::TwoTerm { a: c(-2), b: c(2) },
        [-2, 4] => FamilyTag::AsymmetricTwoTerm { a: c(-2), big_b: c(4) },
        [-4, -2, 2, 4] => FamilyTag::FourTerm { a: c(-2), b: c(2), big_a: c(-4), big_b: c(4) },
        _ => FamilyTag::General,
    }
}

/// Exact square-root data, available when every root is a complex rational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactRoots {
    pub alpha: CRational,
    pub tau: CRational,
    pub beta: CRational,
    pub sigma: CRational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reparam {
    pub alpha: Complex64,
    pub tau: Complex64,
    pub beta: Complex64,
    pub sigma: Complex64,
    pub sigma_sq: Complex64,
    pub tau_sq: Complex64,
    pub sigma_is_integer: bool,
    pub tau_is_integer: bool,
    /// `σ² = -b²/(4B)` exactly, for rational inputs.
    pub sigma_sq_exact: Option<CRational>,
    /// `τ² = -a²/(4A)` exactly, for rational inputs.
    pub tau_sq_exact: Option<CRational>,
    pub exact_roots: Option<ExactRoots>,
}

impl Reparam {
    /// Reparametrizes exact four-term coefficients. `α = √(-A)` and
    /// `β = √(-B)` use the principal branch.
    pub fn from_exact(a: &CRational, b: &CRational, big_a: &CRational, big_b: &CRational) -> Result<Self> {
        if is_zero(big_a) || is_zero(big_b) {
            return Err(Error::InvalidArgument("reparametrization needs A, B ≠ 0".into()));
        }
        let four = cint(4);
        let sigma_sq = -(b * b) / (&four * big_b);
        let tau_sq = -(a * a) / (&four * big_a);
        let two = cint(2);
        let exact_roots = match (exact_sqrt(&-big_a.clone()), exact_sqrt(&-big_b.clone())) {
            (Some(alpha), Some(beta)) => {
                let tau = -a.clone() / (&two * &alpha);
                let sigma = -b.clone() / (&two * &beta);
                Some(ExactRoots { alpha, tau, beta, sigma })
            }
            _ => None,
        };
        let mut r = Self::from_floats(to_c64(a), to_c64(b), to_c64(big_a), to_c64(big_b), INTEGRALITY_TOL)?;
        if let Some(roots) = &exact_roots {
            r.alpha = to_c64(&roots.alpha);
            r.tau = to_c64(&roots.tau);
            r.beta = to_c64(&roots.beta);
            r.sigma = to_c64(&roots.sigma);
        }
        r.sigma_sq = to_c64(&sigma_sq);
        r.tau_sq = to_c64(&tau_sq);
        r.sigma_is_integer = is_integer_square(&sigma_sq);
        r.tau_is_integer = is_integer_square(&tau_sq);
        r.sigma_sq_exact = Some(sigma_sq);
        r.tau_sq_exact = Some(tau_sq);
        r.exact_roots = exact_roots;
        Ok(r)
    }

    /// Floating reparametrization; `σ` counts as an integer when it lies
    /// within `tol` of one.
    pub fn from_floats(a: Complex64, b: Complex64, big_a: Complex64, big_b: Complex64, tol: f64) -> Result<Self> {
        if big_a == Complex64::new(0.0, 0.0) || big_b == Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidArgument("reparametrization needs A, B ≠ 0".into()));
        }
        let alpha = (-big_a).sqrt();
        let beta = (-big_b).sqrt();
        let tau = -a / (2.0 * alpha);
        let sigma = -b / (2.0 * beta);
        let near_int = |x: Complex64| x.im.abs() <= tol && (x.re - x.re.round()).abs() <= tol;
        Ok(Reparam {
            alpha,
            tau,
            beta,
            sigma,
            sigma_sq: -(b * b) / (4.0 * big_b),
            tau_sq: -(a * a) / (4.0 * big_a),
            sigma_is_integer: near_int(sigma),
            tau_is_integer: near_int(tau),
            sigma_sq_exact: None,
            tau_sq_exact: None,
            exact_roots: None,
        })
    }

    /// `(A, a, B, b)` rebuilt from the parameters.
    pub fn reconstruct(&self) -> (Complex64, Complex64, Complex64, Complex64) {
        (
            -self.alpha * self.alpha,
            -2.0 * self.tau * self.alpha,
            -self.beta * self.beta,
            -2.0 * self.sigma * self.beta,
        )
    }

    /// Exact `(A, a, B, b)` when the roots are rational.
    pub fn reconstruct_exact(&self) -> Option<(CRational, CRational, CRational, CRational)> {
        let r = self.exact_roots.as_ref()?;
        let two = cint(2);
        Some((
            -(&r.alpha * &r.alpha),
            -(&two * &r.tau * &r.alpha),
            -(&r.beta * &r.beta),
            -(&two * &r.sigma * &r.beta),
        ))
    }

    /// Whether the excluded case of the four-term theorem applies: `σ²` or
    /// `τ²` is the square of an integer.
    pub fn violates_exclusion(&self) -> bool {
        self.sigma_is_integer || self.tau_is_integer
    }
}

/// Reparametrizes a four-term potential.
pub fn reparametrize(p: &Potential) -> Result<Reparam> {
    match classify(p) {
        FamilyTag::FourTerm { a, b, big_a, big_b } => Reparam::from_exact(&a, &b, &big_a, &big_b),
        other => Err(Error::InvalidArgument(format!(
            "reparametrization applies to FourTerm potentials, got {}",
            other.kind()
        ))),
    }
}

/// Moduli of the family coefficients, `|a|², |b|², |A|², |B|²` as exact rationals.
pub fn family_moduli_sq(tag: &FamilyTag) -> Vec<num_rational::BigRational> {
    match tag {
        FamilyTag::TwoTerm { a, b } => vec![modulus_sq(a), modulus_sq(b)],
        FamilyTag::AsymmetricTwoTerm { a, big_b } => vec![modulus_sq(a), modulus_sq(big_b)],
        FamilyTag::FourTerm { a, b, big_a, big_b } => {
            vec![modulus_sq(a), modulus_sq(b), modulus_sq(big_a), modulus_sq(big_b)]
        }
        FamilyTag::General => vec![],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{crat, creal, rat, rint};

    #[test]
    fn parses_listed_examples() {
        let p = parse_potential("-2:1, 2:2").unwrap();
        assert_eq!(p.coeff(-2), Some(&cint(1)));
        assert_eq!(p.coeff(2), Some(&cint(2)));
        assert_eq!(p.support(), vec![-2, 2]);
        let q = parse_potential("-2:1, 4:1").unwrap();
        assert_eq!(q.support(), vec![-2, 4]);
        let r = parse_potential("-2:1+0i, 4:-3/4i").unwrap();
        assert_eq!(r.coeff(4), Some(&crat(rint(0), rat(-3, 4))));
    }

    #[test]
    fn rejects_bad_input() {
        for bad in ["-2:1, 3:1", "0:1", "2:0", "2:1/0", "2:x", "", "2:1,,4:1", "2:1, 2:3", "2"] {
            assert!(matches!(parse_potential(bad), Err(Error::Parse(_))), "{bad}");
        }
    }

    #[test]
    fn classification_by_support() {
        let fam = |s: &str| classify(&parse_potential(s).unwrap()).kind();
        assert_eq!(fam("-2:1, 2:1"), FamilyKind::TwoTerm);
        assert_eq!(fam("-2:1, 4:1"), FamilyKind::AsymmetricTwoTerm);
        assert_eq!(fam("-4:1,-2:1,2:1,4:1"), FamilyKind::FourTerm);
        assert_eq!(fam("-2:1, 2:1, 4:1"), FamilyKind::General);
        assert_eq!(fam("2:1"), FamilyKind::General);
    }

    #[test]
    fn reparam_identity_parameters() {
        let r = Reparam::from_exact(&cint(-2), &cint(-2), &cint(-1), &cint(-1)).unwrap();
        let roots = r.exact_roots.clone().unwrap();
        assert_eq!((roots.alpha, roots.tau, roots.beta, roots.sigma), (cint(1), cint(1), cint(1), cint(1)));
        assert!(r.sigma_is_integer && r.tau_is_integer);
    }

    #[test]
    fn reparam_half_integer_tau() {
        // A=-1, a=-1, B=-4, b=-4
        let r = Reparam::from_exact(&cint(-1), &cint(-4), &cint(-1), &cint(-4)).unwrap();
        let roots = r.exact_roots.clone().unwrap();
        assert_eq!(roots.alpha, cint(1));
        assert_eq!(roots.tau, creal(1, 2));
        assert_eq!(roots.beta, cint(2));
        assert_eq!(roots.sigma, cint(1));
        assert!(r.sigma_is_integer && !r.tau_is_integer);
        let (ba, a, bb, b) = r.reconstruct_exact().unwrap();
        assert_eq!((ba, a, bb, b), (cint(-1), cint(-1), cint(-4), cint(-4)));
    }

    #[test]
    fn reparam_all_ones() {
        let r = Reparam::from_exact(&cint(1), &cint(1), &cint(1), &cint(1)).unwrap();
        assert_eq!(r.sigma_sq_exact, Some(creal(-1, 4)));
        assert_eq!(r.tau_sq_exact, Some(creal(-1, 4)));
        assert!(!r.sigma_is_integer && !r.tau_is_integer);
        // -1 has the rational root i, so the roots are exact here too
        let (ba, a, bb, b) = r.reconstruct_exact().unwrap();
        assert_eq!((ba, a, bb, b), (cint(1), cint(1), cint(1), cint(1)));
    }

    #[test]
    fn real_valued_predicate() {
        assert!(parse_potential("-2:1+i, 2:1-i").unwrap().is_real_valued());
        assert!(!parse_potential("-2:1, 2:2").unwrap().is_real_valued());
        assert!(!parse_potential("-2:1, 4:1").unwrap().is_real_valued());
    }

    #[test]
    fn reflection_swaps_coefficients() {
        let p = parse_potential("-4:3, -2:1, 2:2, 4:5").unwrap();
        assert_eq!(p.reflected().to_spec_string(), "-4:5, -2:2, 2:1, 4:3");
    }
}
