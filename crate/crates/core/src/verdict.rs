//! Basis / non-basis decisions: the family theorems as a predicate on
//! coefficient moduli, the ratio criterion `|B⁻(n,0)/B⁺(n,0)|` on a finite
//! range, and their comparison with the spectral Gram profile.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{format_rational, modulus_sq};
use crate::parallel::ordered_map;
use crate::potential::{classify, reparametrize, FamilyKind, FamilyTag, Potential};
use crate::spectral::{basis_profile, localization_report, BasisProfile, Bc, LocalizationReport};
use crate::walkgen::{walk_sum_auto, Direction, ZArg};

/// Log-ratio slope per parity step above which the trace is taken to
/// tend to 0 or infinity.
pub const DIVERGENT_SLOPE: f64 = 0.05;
/// Slope below which the trace counts as bounded on both sides.
pub const BOUNDED_SLOPE: f64 = 0.01;
/// Largest `|gram|` still consistent with a basis on finite data.
pub const BASIS_GRAM_BAR: f64 = 0.9;

const RATIO_REL_TOL: f64 = 1e-8;
const RATIO_CLASS_CAP: u32 = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Prediction {
    Basis,
    NotBasis,
    NotCovered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    BoundedTwoSided,
    ToZero,
    ToInfinity,
    Indeterminate,
}

/// Everything the theorem predicate is allowed to look at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerdictFacts {
    pub family: FamilyKind,
    /// `|a|², |b|²`, `|a|², |B|²` or `|a|², |b|², |A|², |B|²` by family.
    pub moduli_sq: Vec<BigRational>,
    pub sigma_integer: bool,
    pub tau_integer: bool,
    /// `σ²` and `τ²` in the coefficient grammar, for the grounds text.
    pub sigma_sq: Option<String>,
    pub tau_sq: Option<String>,
}

pub fn verdict_facts(p: &Potential) -> VerdictFacts {
    let tag = classify(p);
    let mut f = VerdictFacts {
        family: tag.kind(),
        moduli_sq: Vec::new(),
        sigma_integer: false,
        tau_integer: false,
        sigma_sq: None,
        tau_sq: None,
    };
    match &tag {
        FamilyTag::TwoTerm { a, b } => f.moduli_sq = vec![modulus_sq(a), modulus_sq(b)],
        FamilyTag::AsymmetricTwoTerm { a, big_b } => f.moduli_sq = vec![modulus_sq(a), modulus_sq(big_b)],
        FamilyTag::FourTerm { a, b, big_a, big_b } => {
            f.moduli_sq = vec![modulus_sq(a), modulus_sq(b), modulus_sq(big_a), modulus_sq(big_b)];
            let rep = reparametrize(p).expect("four-term coefficients are nonzero");
            f.sigma_integer = rep.sigma_is_integer;
            f.tau_integer = rep.tau_is_integer;
            f.sigma_sq = rep.sigma_sq_exact.as_ref().map(crate::exact::format_complex);
            f.tau_sq = rep.tau_sq_exact.as_ref().map(crate::exact::format_complex);
        }
        FamilyTag::General => {}
    }
    f
}

fn modulus_text(x: &BigRational) -> String {
    match crate::exact::rational_sqrt(x) {
        Some(r) => format_rational(&r),
        None => format!("√{}", format_rational(x)),
    }
}

/// The theorem predicate on moduli and integrality flags.
pub fn verdict_from_facts(f: &VerdictFacts, bc: Bc) -> (Prediction, Vec<String>) {
    let m = &f.moduli_sq;
    match f.family {
        FamilyKind::TwoTerm => {
            let eq = m[0] == m[1];
            let fact = format!(
                "|a| = {} {} |b| = {}",
                modulus_text(&m[0]),
                if eq { "=" } else { "≠" },
                modulus_text(&m[1])
            );
            let pred = if eq { Prediction::Basis } else { Prediction::NotBasis };
            (pred, vec![format!("two-term family, {bc}: basis iff |a| = |b|"), fact])
        }
        FamilyKind::AsymmetricTwoTerm => match bc {
            Bc::PerPlus => (
                Prediction::NotBasis,
                vec![
                    "asymmetric two-term family, per+: the system is complete but never a basis".into(),
                    "|B⁻/B⁺| → 0 super-exponentially for any nonzero a, B".into(),
                ],
            ),
            Bc::PerMinus => (
                Prediction::NotCovered,
                vec!["asymmetric two-term family, per-: open case, no odd-n analog of the even-n scheme".into()],
            ),
        },
        FamilyKind::FourTerm => {
            if f.sigma_integer || f.tau_integer {
                let mut g = vec!["four-term family: excluded case, σ² or τ² is an integer square".to_string()];
                if let Some(s) = &f.sigma_sq {
                    g.push(format!("σ² = -b²/(4B) = {s}{}", if f.sigma_integer { " (integer square)" } else { "" }));
                }
                if let Some(t) = &f.tau_sq {
                    g.push(format!("τ² = -a²/(4A) = {t}{}", if f.tau_integer { " (integer square)" } else { "" }));
                }
                return (Prediction::NotCovered, g);
            }
            let eq = m[2] == m[3];
            let fact = format!(
                "|A| = {} {} |B| = {}",
                modulus_text(&m[2]),
                if eq { "=" } else { "≠" },
                modulus_text(&m[3])
            );
            let pred = if eq { Prediction::Basis } else { Prediction::NotBasis };
            (
                pred,
                vec![
                    format!("four-term family, {bc}: basis iff |A| = |B| when neither σ² nor τ² is an integer square"),
                    fact,
                ],
            )
        }
        FamilyKind::General => {
            (Prediction::NotCovered, vec!["general potential: outside the two-term, asymmetric and four-term families".into()])
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatioPoint {
    pub n: u32,
    /// `|B⁻(n,0) / B⁺(n,0)|`.
    pub ratio: f64,
    pub ln_ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisVerdict {
    pub family: FamilyKind,
    pub bc: Bc,
    pub prediction: Prediction,
    pub grounds: Vec<String>,
    pub ratio_trace: Vec<RatioPoint>,
    pub empirical_consistent: Option<bool>,
}

pub fn theorem_verdict(p: &Potential, bc: Bc) -> BasisVerdict {
    let f = verdict_facts(p);
    let (prediction, grounds) = verdict_from_facts(&f, bc);
    BasisVerdict { family: f.family, bc, prediction, grounds, ratio_trace: Vec::new(), empirical_consistent: None }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatioCriterion {
    pub bc: Bc,
    pub trace: Vec<RatioPoint>,
    pub inf: Option<f64>,
    pub sup: Option<f64>,
    /// Least-squares slope of `ln ratio` per parity step (`n → n + 2`).
    pub slope: Option<f64>,
    pub trend: Trend,
    pub diagnostics: Vec<String>,
}

/// Classifies a log-ratio slope per parity step.
pub fn classify_slope(slope: f64) -> Trend {
    if slope.abs() < BOUNDED_SLOPE {
        Trend::BoundedTwoSided
    } else if slope < -DIVERGENT_SLOPE {
        Trend::ToZero
    } else if slope > DIVERGENT_SLOPE {
        Trend::ToInfinity
    } else {
        Trend::Indeterminate
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn ratio_point(p: &Potential, n: u32) -> Result<RatioPoint> {
    let sum = |d| walk_sum_auto(p, n, d, &ZArg::zero(), RATIO_REL_TOL, RATIO_CLASS_CAP);
    let (f, b) = (sum(Direction::Forward)?, sum(Direction::Backward)?);
    for r in [&f, &b] {
        if !r.certified {
            return Err(Error::CertificationUnavailable(format!(
                "n = {n} {}: {}",
                r.direction,
                r.tail_note.as_deref().unwrap_or("no certified tail")
            )));
        }
        if r.relative_tail() >= 1.0 || r.partial_sum_scaled.is_zero() {
            return Err(Error::PredictionUnavailable(format!("B at n = {n} {} is not separated from zero", r.direction)));
        }
    }
    let ln_ratio = b.ln_abs() - f.ln_abs();
    Ok(RatioPoint { n, ratio: ln_ratio.exp(), ln_ratio })
}

/// `|B⁻(n,0)/B⁺(n,0)|` over the admissible `n` in `ns`, with its trend.
pub fn ratio_criterion(p: &Potential, bc: Bc, ns: &[u32]) -> RatioCriterion {
    let ns: Vec<u32> = ns.iter().copied().filter(|&n| n > 0 && bc.admits(n)).collect();
    let results = ordered_map(&ns, |&n| ratio_point(p, n));
    let mut trace = Vec::new();
    let mut diagnostics = Vec::new();
    for r in results {
        match r {
            Ok(pt) => trace.push(pt),
            Err(e) => diagnostics.push(e.to_string()),
        }
    }
    let xs: Vec<f64> = trace.iter().map(|t| t.n as f64 / 2.0).collect();
    let ys: Vec<f64> = trace.iter().map(|t| t.ln_ratio).collect();
    let slope = ls_slope(&xs, &ys);
    let trend = match slope {
        Some(s) if diagnostics.is_empty() => classify_slope(s),
        _ => Trend::Indeterminate,
    };
    if slope.is_none() {
        diagnostics.push("fewer than two certified points".into());
    }
    let inf = trace.iter().map(|t| t.ratio).reduce(f64::min);
    let sup = trace.iter().map(|t| t.ratio).reduce(f64::max);
    RatioCriterion { bc, trace, inf, sup, slope, trend, diagnostics }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmpiricalSummary {
    /// `[lo, hi]` of the disc indices that produced a spectral row.
    pub checked_range: Option<[u32; 2]>,
    pub max_gram_abs: Option<f64>,
    /// Slope of `ln(1 - |gram|)` per parity step.
    pub defect_slope: Option<f64>,
    pub localization: Option<LocalizationReport>,
    pub profile: BasisProfile,
    pub note: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FullReport {
    pub potential: String,
    pub family: FamilyKind,
    pub bc: Bc,
    pub prediction: Prediction,
    pub grounds: Vec<String>,
    pub ratio_trace: Vec<RatioPoint>,
    pub ratio: RatioCriterion,
    pub empirical: EmpiricalSummary,
    /// Whether the spectral Gram trend agrees with the prediction; `None`
    /// when there is no prediction or not enough data.
    pub consistent: Option<bool>,
    pub diagnostics: Vec<String>,
}

impl FullReport {
    pub fn verdict(&self) -> BasisVerdict {
        BasisVerdict {
            family: self.family,
            bc: self.bc,
            prediction: self.prediction,
            grounds: self.grounds.clone(),
            ratio_trace: self.ratio_trace.clone(),
            empirical_consistent: self.consistent,
        }
    }
}

/// Default disc range for reports: `n` from 4 to 14 of the right parity.
pub fn default_range(bc: Bc) -> Vec<u32> {
    bc.discs(4, 14)
}

fn empirical_consistency(pred: Prediction, profile: &BasisProfile) -> (Option<bool>, Option<f64>, Option<f64>, String) {
    let grams: Vec<f64> = profile.rows.iter().filter_map(|r| r.gram_abs).collect();
    let max_gram = grams.iter().copied().reduce(f64::max);
    let pts: Vec<(f64, f64)> = profile
        .rows
        .iter()
        .filter_map(|r| r.gram_defect.filter(|d| *d > 0.0).map(|d| (r.n as f64 / 2.0, d.ln())))
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
    let slope = ls_slope(&xs, &ys);
    let doubles = profile.rows.iter().filter(|r| r.numerically_double).count();
    match pred {
        Prediction::NotCovered => (None, max_gram, slope, "no theorem applies; empirical profile only".into()),
        Prediction::Basis => match max_gram {
            Some(g) if doubles == 0 => (
                Some(g < BASIS_GRAM_BAR),
                max_gram,
                slope,
                format!("basis expected: max |gram| = {g:.6} against the bar {BASIS_GRAM_BAR}"),
            ),
            _ => (None, max_gram, slope, format!("{doubles} numerically double pairs; Gram bar not checkable")),
        },
        Prediction::NotBasis => match slope {
            Some(s) if pts.len() >= 3 => {
                let falling = ys.last() < ys.first();
                (
                    Some(s < -DIVERGENT_SLOPE && falling),
                    max_gram,
                    slope,
                    format!("non-basis expected: ln(1 - |gram|) slope {s:.4} per step, |gram| → 1 needs < -{DIVERGENT_SLOPE}"),
                )
            }
            _ => (None, max_gram, slope, "fewer than three resolved Gram values".into()),
        },
    }
}

/// Theorem verdict, ratio criterion and spectral profile in one record.
pub fn full_report(p: &Potential, bc: Bc, ns: &[u32]) -> FullReport {
    let ns: Vec<u32> = ns.iter().copied().filter(|&n| n > 0 && bc.admits(n)).collect();
    let v = theorem_verdict(p, bc);
    let ratio = ratio_criterion(p, bc, &ns);
    let mut diagnostics = ratio.diagnostics.clone();
    let localization = match ns.iter().max() {
        Some(&hi) => match localization_report(p, bc, hi, None) {
            Ok(l) => Some(l),
            Err(e) => {
                diagnostics.push(format!("localization: {e}"));
                None
            }
        },
        None => None,
    };
    let above: Vec<u32> = match localization.as_ref().and_then(|l| l.empirical_n) {
        Some(e) => ns.iter().copied().filter(|&n| n > e).collect(),
        None => ns.clone(),
    };
    let profile = basis_profile(p, bc, &above);
    for s in &profile.skipped {
        diagnostics.push(format!("n = {}: {}", s.n, s.error));
    }
    let (consistent, max_gram, defect_slope, note) = empirical_consistency(v.prediction, &profile);
    let lo = profile.rows.iter().map(|r| r.n).min();
    let hi = profile.rows.iter().map(|r| r.n).max();
    FullReport {
        potential: p.to_spec_string(),
        family: v.family,
        bc,
        prediction: v.prediction,
        grounds: v.grounds,
        ratio_trace: ratio.trace.clone(),
        ratio,
        empirical: EmpiricalSummary {
            checked_range: lo.zip(hi).map(|(a, b)| [a, b]),
            max_gram_abs: max_gram,
            defect_slope,
            localization,
            profile,
            note,
        },
        consistent,
        diagnostics,
    }
}

/// Whether a trend agrees with a prediction: divergence for a non-basis,
/// two-sided boundedness for a basis.
pub fn trend_agrees(pred: Prediction, trend: Trend) -> Option<bool> {
    match (pred, trend) {
        (Prediction::NotCovered, _) | (_, Trend::Indeterminate) => None,
        (Prediction::Basis, t) => Some(t == Trend::BoundedTwoSided),
        (Prediction::NotBasis, t) => Some(matches!(t, Trend::ToZero | Trend::ToInfinity)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::parse_potential;

    fn verdict(spec: &str, bc: Bc) -> Prediction {
        theorem_verdict(&parse_potential(spec).unwrap(), bc).prediction
    }

    #[test]
    fn family_table() {
        assert_eq!(verdict("-2:1, 2:1", Bc::PerPlus), Prediction::Basis);
        assert_eq!(verdict("-2:1, 2:i", Bc::PerMinus), Prediction::Basis);
        assert_eq!(verdict("-2:1, 2:2", Bc::PerPlus), Prediction::NotBasis);
        assert_eq!(verdict("-2:1, 4:1", Bc::PerPlus), Prediction::NotBasis);
        assert_eq!(verdict("-2:1, 4:1", Bc::PerMinus), Prediction::NotCovered);
        assert_eq!(verdict("-4:1/4, -2:1/4, 2:1/4, 4:1/4", Bc::PerPlus), Prediction::Basis);
        assert_eq!(verdict("-4:1/4, -2:1/4, 2:1/4, 4:1/2", Bc::PerPlus), Prediction::NotBasis);
        assert_eq!(verdict("-4:1, -2:1, 2:4, 4:-1", Bc::PerPlus), Prediction::NotCovered);
        assert_eq!(verdict("-2:1, 2:1, 4:1", Bc::PerPlus), Prediction::NotCovered);
    }

    #[test]
    fn excluded_case_cites_integer_square() {
        let v = theorem_verdict(&parse_potential("-4:1, -2:1, 2:4, 4:-1").unwrap(), Bc::PerPlus);
        assert!(v.grounds.iter().any(|g| g.contains("σ² = -b²/(4B) = 4 (integer square)")), "{:?}", v.grounds);
    }

    #[test]
    fn slope_classes() {
        assert_eq!(classify_slope(2.0 * 0.5f64.ln()), Trend::ToZero);
        assert_eq!(classify_slope(0.2), Trend::ToInfinity);
        assert_eq!(classify_slope(0.001), Trend::BoundedTwoSided);
        assert_eq!(classify_slope(0.03), Trend::Indeterminate);
        assert!((ls_slope(&[1.0, 2.0, 3.0], &[1.0, 3.0, 5.0]).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn two_term_ratio_trend() {
        let p = parse_potential("-2:1, 2:2").unwrap();
        let rc = ratio_criterion(&p, Bc::PerPlus, &Bc::PerPlus.discs(4, 12));
        assert_eq!(rc.trend, Trend::ToZero);
        let s = rc.slope.unwrap();
        assert!((s - 2.0 * 0.5f64.ln()).abs() < 0.1, "{s}");
        let q = parse_potential("-2:2, 2:2").unwrap();
        let rc = ratio_criterion(&q, Bc::PerPlus, &Bc::PerPlus.discs(4, 12));
        assert_eq!(rc.trend, Trend::BoundedTwoSided);
        assert!(rc.trace.iter().all(|t| (t.ratio - 1.0).abs() < 1e-12));
    }
}
