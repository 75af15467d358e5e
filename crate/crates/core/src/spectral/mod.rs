//! Truncated Fourier–Galerkin matrices of the operator and the eigenpair
//! diagnostics in each disc `D_n = n² + {|z| < 1}`.
//!
//! Index conventions: row and column `r` belong to the exponential
//! `e^{i e_r x}` with `e_r = 2k` (`Per+`, `k = -K..=K`) or `e_r = 2k + 1`
//! (`Per-`, `k = -K..K`). The diagonal holds `e_r²` and entry `(r, c)`
//! holds `V(e_r - e_c)`, so the superdiagonal carries `V(-2)` and the
//! subdiagonal `V(2)`.
//!
//! Eigenvalues are counted per disc from a dense double-precision Schur
//! decomposition. The two eigenpairs inside a disc are then recomputed in
//! binary fixed point (320 bits and up) by reducing the matrix to a `2×2`
//! problem on the exponents `±n`: the splitting of the pair decays like
//! `(n!)^{-2}`, far below double precision already for moderate `n`.

pub mod dense;
mod fixed;
mod reduction;

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel::ordered_map;
use crate::potential::Potential;
use crate::walkgen::{walk_sum_auto, ComplexValue, Direction, ZArg};
use fixed::{real_to_f64, CFx, Fx};

pub use dense::DiscCount;

/// Eigenvalue drift tolerance under truncation doubling.
pub const STABILITY_TOL: f64 = 1e-10;
/// Relative residual bound for returned eigenpairs.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Fixed-point precision of the first attempt.
pub const BASE_BITS: u32 = 320;
/// Precision ceiling; a pair still unresolved here is reported as double.
pub const MAX_BITS: u32 = 2048;
/// Extra truncation beyond `n` used when no `K` is given.
pub const DEFAULT_MARGIN: usize = 16;
const MAX_DOUBLINGS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bc {
    #[serde(rename = "per+")]
    PerPlus,
    #[serde(rename = "per-")]
    PerMinus,
}

impl Bc {
    pub fn as_str(self) -> &'static str {
        match self {
            Bc::PerPlus => "per+",
            Bc::PerMinus => "per-",
        }
    }

    /// Whether the disc index `n` belongs to this boundary condition.
    pub fn admits(self, n: u32) -> bool {
        match self {
            Bc::PerPlus => n % 2 == 0,
            Bc::PerMinus => n % 2 == 1,
        }
    }

    /// Admissible disc indices in `lo..=hi`, skipping `n = 0`.
    pub fn discs(self, lo: u32, hi: u32) -> Vec<u32> {
        (lo.max(1)..=hi).filter(|&n| self.admits(n)).collect()
    }
}

impl fmt::Display for Bc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Bc {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "per+" | "+" | "periodic" => Ok(Bc::PerPlus),
            "per-" | "-" | "antiperiodic" => Ok(Bc::PerMinus),
            other => Err(Error::Parse(format!("unknown boundary condition {other:?}; expected per+ or per-"))),
        }
    }
}

/// Smallest truncation half-width accepted for disc `n`.
pub fn min_k_for(n: u32, band: usize) -> usize {
    (n as usize).div_ceil(2) + band + 1
}

/// Default truncation half-width for disc `n`.
pub fn default_k(n: u32, band: usize) -> usize {
    (n as usize + DEFAULT_MARGIN).max(min_k_for(n, band))
}

#[derive(Debug, Clone)]
pub struct TruncatedOperator {
    bc: Bc,
    k: usize,
    exponents: Vec<i64>,
    potential: Option<Potential>,
    eigenvalues: OnceLock<Vec<Complex64>>,
}

impl TruncatedOperator {
    pub fn build_matrix(p: &Potential, bc: Bc, k: usize) -> Result<Self> {
        Self::with(Some(p.clone()), bc, k)
    }

    /// The operator with `v = 0`.
    pub fn free(bc: Bc, k: usize) -> Result<Self> {
        Self::with(None, bc, k)
    }

    /// Like [`build_matrix`](Self::build_matrix), but rejects a `K` too
    /// small to resolve discs up to `n_max`.
    pub fn build_for(p: &Potential, bc: Bc, k: usize, n_max: u32) -> Result<Self> {
        let need = min_k_for(n_max, p.band());
        if k < need {
            return Err(Error::InvalidArgument(format!("K = {k} too small for n = {n_max}; need K ≥ {need}")));
        }
        Self::build_matrix(p, bc, k)
    }

    fn with(potential: Option<Potential>, bc: Bc, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("truncation half-width K must be positive".into()));
        }
        let k_i = k as i64;
        let exponents = match bc {
            Bc::PerPlus => (-k_i..=k_i).map(|j| 2 * j).collect(),
            Bc::PerMinus => (-k_i..k_i).map(|j| 2 * j + 1).collect(),
        };
        Ok(TruncatedOperator { bc, k, exponents, potential, eigenvalues: OnceLock::new() })
    }

    pub fn bc(&self) -> Bc {
        self.bc
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[i64] {
        &self.exponents
    }

    pub fn potential(&self) -> Option<&Potential> {
        self.potential.as_ref()
    }

    pub fn band(&self) -> usize {
        self.potential.as_ref().map_or(0, |p| p.band())
    }

    /// Row of the exponential `e^{i e x}`, if it is in the truncation.
    pub fn position(&self, e: i64) -> Option<usize> {
        let k = self.k as i64;
        let idx = match self.bc {
            Bc::PerPlus if e.rem_euclid(2) == 0 => e / 2 + k,
            Bc::PerMinus if e.rem_euclid(2) == 1 => (e - 1).div_euclid(2) + k,
            _ => return None,
        };
        (0..self.dim() as i64).contains(&idx).then_some(idx as usize)
    }

    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        let (er, ec) = (self.exponents[r], self.exponents[c]);
        if r == c {
            return Complex64::new((er * er) as f64, 0.0);
        }
        self.potential.as_ref().map_or(Complex64::new(0.0, 0.0), |p| p.coeff_c64(er - ec))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.exponents.iter().map(|e| (e * e) as f64).collect()
    }

    pub fn dense(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |r, c| self.entry(r, c))
    }

    pub fn norm_inf(&self) -> f64 {
        let off = self.potential.as_ref().map_or(0.0, |p| p.l1_norm());
        self.exponents.iter().map(|e| (e * e) as f64).fold(0.0, f64::max) + off
    }

    pub fn is_hermitian(&self) -> bool {
        self.potential.as_ref().is_none_or(|p| p.is_real_valued())
    }

    /// All eigenvalues in double precision, computed once and cached.
    pub fn eigenvalues(&self) -> Result<&[Complex64]> {
        if let Some(ev) = self.eigenvalues.get() {
            return Ok(ev);
        }
        let ev = dense::eigenvalues(&self.dense())?;
        Ok(self.eigenvalues.get_or_init(|| ev))
    }

    pub fn disc_count(&self, n: u32) -> Result<DiscCount> {
        Ok(dense::count_in_disc(self.eigenvalues()?, n))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Stability {
    pub k: usize,
    pub k_doubled: usize,
    /// Largest eigenvalue displacement, pairing the two pairs optimally.
    pub eig_drift: f64,
    pub gram_drift: f64,
    pub tol: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralPair {
    pub n: u32,
    pub bc: Bc,
    pub k: usize,
    pub lambda1: ComplexValue,
    pub lambda2: ComplexValue,
    /// `z_i = λ_i - n²`.
    pub z1: ComplexValue,
    pub z2: ComplexValue,
    pub gap: ComplexValue,
    pub gap_abs: f64,
    /// `(z1 + z2) / 2`.
    pub a_proxy: ComplexValue,
    /// `Σ v1_i · conj(v2_i)`; absent for a numerically double pair.
    pub gram: Option<ComplexValue>,
    pub gram_abs: Option<f64>,
    /// `1 - |gram|`, computed before rounding to double.
    pub gram_defect: Option<f64>,
    /// `(1 - |gram|²)^{-1/2}`.
    pub proj_norm: Option<f64>,
    pub numerically_double: bool,
    /// `max_i ‖M v_i - λ_i v_i‖_∞ / ‖M‖_∞`.
    pub residual: f64,
    pub precision_bits: u32,
    pub exponents: Vec<i64>,
    /// Unit coefficient vectors as `[re, im]` pairs, largest entry real positive.
    pub v1: Vec<[f64; 2]>,
    pub v2: Vec<[f64; 2]>,
    pub truncation: Option<Stability>,
}

fn cv(z: Complex64) -> ComplexValue {
    ComplexValue::from_c64(z)
}

fn hp_residual(op: &TruncatedOperator, fx: &Fx, n: u32, z: &CFx, v: &[CFx]) -> f64 {
    let lam = fx.add(&fx.from_i64((n as i64).pow(2)), z);
    let coeff: Vec<(i64, CFx)> = op
        .potential()
        .map(|p| p.coeffs().iter().map(|(m, c)| (*m, fx.from_exact(c))).collect())
        .unwrap_or_default();
    let mut worst = 0.0f64;
    for (r, &er) in op.exponents().iter().enumerate() {
        let mut acc = fx.mul(&fx.sub(&fx.from_i64(er * er), &lam), &v[r]);
        for (m, c) in &coeff {
            if let Some(col) = op.position(er - m) {
                acc = fx.add(&acc, &fx.mul(c, &v[col]));
            }
        }
        worst = worst.max(fx.to_c64(&acc).norm());
    }
    worst / op.norm_inf()
}

fn match_distance(a: [Complex64; 2], b: [Complex64; 2]) -> f64 {
    let straight = (a[0] - b[0]).norm().max((a[1] - b[1]).norm());
    let crossed = (a[0] - b[1]).norm().max((a[1] - b[0]).norm());
    straight.min(crossed)
}

/// The two eigenpairs of `op` in `D_n` with Gram diagnostics.
pub fn eigenpairs_in_disc(op: &TruncatedOperator, n: u32) -> Result<SpectralPair> {
    if n == 0 || !op.bc().admits(n) {
        return Err(Error::InvalidArgument(format!("n = {n} has the wrong parity for {}", op.bc())));
    }
    let need = min_k_for(n, op.band());
    if op.k() < need {
        return Err(Error::InvalidArgument(format!("K = {} too small for n = {n}; need K ≥ {need}", op.k())));
    }
    let count = op.disc_count(n)?;
    if count.inside != 2 || count.on_boundary != 0 {
        return Err(Error::LocalizationViolation { n, count: count.inside + count.on_boundary });
    }

    let n2 = Complex64::new((n as f64).powi(2), 0.0);
    let inside: Vec<Complex64> =
        op.eigenvalues()?.iter().copied().filter(|l| (l - n2).norm() < 1.0).collect();
    let seeds = [inside[0] - n2, inside[1] - n2];
    // the high-precision roots must be the ones the dense solver placed in the disc
    let tol = 1e-6 * op.norm_inf().sqrt().max(1.0);
    let mismatch = |hp: &reduction::HpPair| {
        let z = [hp.fx.to_c64(&hp.z[0]), hp.fx.to_c64(&hp.z[1])];
        let dist = match_distance([z[0] + n2, z[1] + n2], [inside[0], inside[1]]);
        (!(dist <= tol)).then_some(dist)
    };

    let mut bits = BASE_BITS;
    let (hp, double) = loop {
        let hp = match reduction::hp_pair(op, n, bits) {
            Ok(hp) if mismatch(&hp).is_none() => hp,
            _ => reduction::hp_pair_seeded(op, n, bits, seeds)?,
        };
        if let Some(dist) = mismatch(&hp) {
            return Err(Error::Solver(format!(
                "reduced eigenvalues disagree with the dense solve by {dist:e} at n = {n}"
            )));
        }
        let gap = hp.fx.abs(&hp.fx.sub(&hp.z[0], &hp.z[1]));
        let resolved = gap >= BigInt::from(1) << (bits - bits / 3) as usize;
        if resolved || bits >= MAX_BITS {
            break (hp, !resolved);
        }
        bits = (bits * 2).min(MAX_BITS);
    };
    let fx = hp.fx;
    let z = [fx.to_c64(&hp.z[0]), fx.to_c64(&hp.z[1])];

    let residual = hp_residual(op, &fx, n, &hp.z[0], &hp.v[0]).max(hp_residual(op, &fx, n, &hp.z[1], &hp.v[1]));
    if !(residual <= RESIDUAL_TOL) {
        return Err(Error::Solver(format!("relative residual {residual:e} exceeds {RESIDUAL_TOL:e}")));
    }

    let (gram, gram_abs, gram_defect, proj_norm) = if double {
        (None, None, None, None)
    } else {
        let g = hp.v[0].iter().zip(&hp.v[1]).fold(fx.zero(), |acc, (a, b)| fx.add(&acc, &fx.mul(a, &fx.conj(b))));
        let g2 = fx.norm_sqr(&g);
        let one = fx.one().re;
        let one_minus_sq = &one - &g2;
        let defect = &one - fx.sqrt_real(&g2);
        let oms = real_to_f64(&one_minus_sq, fx.bits);
        let proj = if oms > 0.0 { oms.powf(-0.5) } else { f64::INFINITY };
        (Some(cv(fx.to_c64(&g))), Some(fx.to_c64(&g).norm()), Some(real_to_f64(&defect, fx.bits)), Some(proj))
    };
    let gap = fx.to_c64(&fx.sub(&hp.z[0], &hp.z[1]));
    let a_proxy = fx.to_c64(&fx.scale_pow2(&fx.add(&hp.z[0], &hp.z[1]), -1));
    let vec_out = |v: &[CFx]| v.iter().map(|x| fx.to_c64(x)).map(|c| [c.re, c.im]).collect::<Vec<_>>();
    Ok(SpectralPair {
        n,
        bc: op.bc(),
        k: op.k(),
        lambda1: cv(z[0] + n2),
        lambda2: cv(z[1] + n2),
        z1: cv(z[0]),
        z2: cv(z[1]),
        gap: cv(gap),
        gap_abs: gap.norm(),
        a_proxy: cv(a_proxy),
        gram,
        gram_abs,
        gram_defect,
        proj_norm,
        numerically_double: double,
        residual,
        precision_bits: fx.bits,
        exponents: op.exponents().to_vec(),
        v1: vec_out(&hp.v[0]),
        v2: vec_out(&hp.v[1]),
        truncation: None,
    })
}

fn compare(k: usize, a: &Result<SpectralPair>, b: &SpectralPair, tol: f64) -> Stability {
    let (eig_drift, gram_drift) = match a {
        Ok(a) => {
            let l = |p: &SpectralPair| [p.lambda1.to_c64(), p.lambda2.to_c64()];
            let g = match (a.gram_abs, b.gram_abs) {
                (Some(x), Some(y)) => (x - y).abs(),
                (None, None) => 0.0,
                _ => f64::INFINITY,
            };
            (match_distance(l(a), l(b)), g)
        }
        Err(_) => (f64::INFINITY, f64::INFINITY),
    };
    Stability {
        k,
        k_doubled: 2 * k,
        eig_drift,
        gram_drift,
        tol,
        stable: eig_drift < tol && gram_drift < 10.0 * tol,
    }
}

fn stability_run(p: &Potential, bc: Bc, n: u32, k: usize, tol: f64) -> Result<(Stability, SpectralPair)> {
    let small = TruncatedOperator::build_matrix(p, bc, k).and_then(|op| eigenpairs_in_disc(&op, n));
    let big = eigenpairs_in_disc(&TruncatedOperator::build_matrix(p, bc, 2 * k)?, n)?;
    Ok((compare(k, &small, &big, tol), big))
}

/// Recomputes the pair at `2K` and reports how far it moved. A failure at
/// `K` itself (too small, or a spurious eigenvalue in the disc) counts as
/// unstable; failures at `2K` are returned.
pub fn truncation_stability(p: &Potential, bc: Bc, n: u32, k: usize, tol: f64) -> Result<Stability> {
    stability_run(p, bc, n, k, tol).map(|(s, _)| s)
}

/// The pair in `D_n`, with `K` doubled from [`default_k`] until
/// [`truncation_stability`] passes at [`STABILITY_TOL`]. The returned pair
/// is the one at the larger truncation.
pub fn spectral_pair_auto(p: &Potential, bc: Bc, n: u32) -> Result<SpectralPair> {
    spectral_pair_from(p, bc, n, default_k(n, p.band()))
}

pub fn spectral_pair_from(p: &Potential, bc: Bc, n: u32, k0: usize) -> Result<SpectralPair> {
    let mut k = k0.max(min_k_for(n, p.band()));
    let mut last = None;
    for _ in 0..=MAX_DOUBLINGS {
        let (st, mut pair) = stability_run(p, bc, n, k, STABILITY_TOL)?;
        if st.stable {
            pair.truncation = Some(st);
            return Ok(pair);
        }
        last = Some(st);
        k *= 2;
    }
    let st = last.expect("at least one attempt");
    Err(Error::Truncation(format!(
        "pair at n = {n} still moves by {:e} (gram {:e}) between K = {} and {}",
        st.eig_drift, st.gram_drift, st.k, st.k_doubled
    )))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscRecord {
    pub n: u32,
    pub inside: usize,
    pub on_boundary: usize,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub bc: Bc,
    pub k: usize,
    pub discs: Vec<DiscRecord>,
    /// Largest checked `n` whose disc does not hold exactly two
    /// eigenvalues; `None` when every checked disc does.
    pub empirical_n: Option<u32>,
    /// Whether the same counts come out at `2K`.
    pub stable_under_doubling: bool,
}

impl LocalizationReport {
    /// Checked discs beyond the empirical threshold.
    pub fn localized(&self) -> Vec<u32> {
        self.discs.iter().filter(|d| self.empirical_n.is_none_or(|e| d.n > e)).map(|d| d.n).collect()
    }
}

fn disc_records(op: &TruncatedOperator, ns: &[u32]) -> Result<Vec<DiscRecord>> {
    ns.iter()
        .map(|&n| {
            let c = op.disc_count(n)?;
            Ok(DiscRecord { n, inside: c.inside, on_boundary: c.on_boundary, ok: c.inside == 2 && c.on_boundary == 0 })
        })
        .collect()
}

/// Eigenvalue counts for every admissible disc up to `n_max`.
pub fn localization_report(p: &Potential, bc: Bc, n_max: u32, k: Option<usize>) -> Result<LocalizationReport> {
    let k = k.unwrap_or_else(|| default_k(n_max, p.band()));
    let op = TruncatedOperator::build_for(p, bc, k, n_max)?;
    let ns = bc.discs(1, n_max);
    let discs = disc_records(&op, &ns)?;
    let doubled = disc_records(&TruncatedOperator::build_matrix(p, bc, 2 * k)?, &ns)?;
    let stable = discs.iter().zip(&doubled).all(|(a, b)| a.inside == b.inside && a.on_boundary == b.on_boundary);
    let empirical_n = discs.iter().filter(|d| !d.ok).map(|d| d.n).max();
    Ok(LocalizationReport { bc, k, discs, empirical_n, stable_under_doubling: stable })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GramPrediction {
    pub n: u32,
    pub b_plus: ComplexValue,
    pub b_minus: ComplexValue,
    pub ln_abs_b_plus: f64,
    pub ln_abs_b_minus: f64,
    /// `|B⁻(n,0) / B⁺(n,0)|`.
    pub r_squared: f64,
    /// `|1 - r²| / (1 + r²)`.
    pub predicted_gram: f64,
    /// `2 |B⁺(n,0) B⁻(n,0)|^{1/2}`.
    pub predicted_gap: f64,
}

const PREDICTION_REL_TOL: f64 = 1e-8;
const PREDICTION_CLASS_CAP: u32 = 48;

/// Gram modulus and gap predicted from the walk sums at `z = 0`.
pub fn gram_prediction(p: &Potential, bc: Bc, n: u32) -> Result<GramPrediction> {
    if n == 0 || !bc.admits(n) {
        return Err(Error::InvalidArgument(format!("n = {n} has the wrong parity for {bc}")));
    }
    let sum = |dir| walk_sum_auto(p, n, dir, &ZArg::zero(), PREDICTION_REL_TOL, PREDICTION_CLASS_CAP);
    let fwd = sum(Direction::Forward)?;
    let bwd = sum(Direction::Backward)?;
    for (r, name) in [(&fwd, "B⁺"), (&bwd, "B⁻")] {
        if !r.certified {
            return Err(Error::PredictionUnavailable(format!(
                "{name}(n = {n}) has no certified tail: {}",
                r.tail_note.as_deref().unwrap_or("uncertified")
            )));
        }
    }
    if fwd.partial_sum_scaled.is_zero() || fwd.relative_tail() >= 1.0 {
        return Err(Error::PredictionUnavailable(format!("B⁺(n = {n}, 0) is indistinguishable from zero")));
    }
    let b_minus_zero = bwd.partial_sum_scaled.is_zero() && bwd.tail_bound == Some(0.0);
    if !b_minus_zero && bwd.relative_tail() >= 1.0 {
        return Err(Error::PredictionUnavailable(format!("B⁻(n = {n}, 0) is indistinguishable from zero")));
    }
    let (lp, lm) = (fwd.ln_abs(), bwd.ln_abs());
    let r_squared = if b_minus_zero { 0.0 } else { (lm - lp).exp() };
    let predicted_gram = if r_squared.is_infinite() { 1.0 } else { (1.0 - r_squared).abs() / (1.0 + r_squared) };
    let predicted_gap = if b_minus_zero { 0.0 } else { 2.0 * (0.5 * (lp + lm)).exp() };
    Ok(GramPrediction {
        n,
        b_plus: fwd.partial_sum.clone(),
        b_minus: bwd.partial_sum.clone(),
        ln_abs_b_plus: lp,
        ln_abs_b_minus: lm,
        r_squared,
        predicted_gram,
        predicted_gap,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileRow {
    pub n: u32,
    pub k: usize,
    pub gram_abs: Option<f64>,
    pub gram_defect: Option<f64>,
    pub proj_norm: Option<f64>,
    pub gap: f64,
    pub a_proxy_abs: f64,
    pub numerically_double: bool,
    pub predicted_gram: Option<f64>,
    pub predicted_gap: Option<f64>,
    pub r_squared: Option<f64>,
    /// `|gap| / predicted_gap`.
    pub gap_ratio: Option<f64>,
    /// `| |gram| - predicted_gram |`.
    pub gram_error: Option<f64>,
    pub prediction_note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SkippedDisc {
    pub n: u32,
    pub category: String,
    pub error: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisProfile {
    pub potential: String,
    pub bc: Bc,
    pub rows: Vec<ProfileRow>,
    pub skipped: Vec<SkippedDisc>,
}

impl BasisProfile {
    pub fn row(&self, n: u32) -> Option<&ProfileRow> {
        self.rows.iter().find(|r| r.n == n)
    }

    /// The six-column table.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["n", "gram_abs", "proj_norm", "gap", "predicted_gram", "predicted_gap"])?;
        let f = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
        for r in &self.rows {
            out.write_record([
                r.n.to_string(),
                f(r.gram_abs),
                f(r.proj_norm),
                f(Some(r.gap)),
                f(r.predicted_gram),
                f(r.predicted_gap),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Long format `n, quantity, value`, one line per available number.
    pub fn write_long_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["n", "quantity", "value"])?;
        for r in &self.rows {
            let items = [
                ("gram_abs", r.gram_abs),
                ("gram_defect", r.gram_defect),
                ("proj_norm", r.proj_norm),
                ("gap", Some(r.gap)),
                ("predicted_gram", r.predicted_gram),
                ("predicted_gap", r.predicted_gap),
                ("gap_ratio", r.gap_ratio),
                ("gram_error", r.gram_error),
                ("a_proxy_abs", Some(r.a_proxy_abs)),
            ];
            for (name, v) in items {
                if let Some(v) = v {
                    out.write_record([r.n.to_string(), name.to_string(), format!("{v:e}")])?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }
}

fn profile_row(p: &Potential, bc: Bc, n: u32) -> Result<ProfileRow> {
    let pair = spectral_pair_auto(p, bc, n)?;
    let pred = gram_prediction(p, bc, n);
    let (pg, pgap, r2, note) = match &pred {
        Ok(g) => (Some(g.predicted_gram), Some(g.predicted_gap), Some(g.r_squared), None),
        Err(e) => (None, None, None, Some(e.to_string())),
    };
    Ok(ProfileRow {
        n,
        k: pair.k,
        gram_abs: pair.gram_abs,
        gram_defect: pair.gram_defect,
        proj_norm: pair.proj_norm,
        gap: pair.gap_abs,
        a_proxy_abs: pair.a_proxy.to_c64().norm(),
        numerically_double: pair.numerically_double,
        predicted_gram: pg,
        predicted_gap: pgap,
        r_squared: r2,
        gap_ratio: pgap.filter(|&g| g > 0.0).map(|g| pair.gap_abs / g),
        gram_error: pair.gram_abs.zip(pg).map(|(a, b)| (a - b).abs()),
        prediction_note: note,
    })
}

/// Spectral measurement merged with the walk-sum prediction for each
/// admissible `n`; discs that fail are recorded in `skipped`.
pub fn basis_profile(p: &Potential, bc: Bc, ns: &[u32]) -> BasisProfile {
    let ns: Vec<u32> = ns.iter().copied().filter(|&n| n > 0 && bc.admits(n)).collect();
    let results = ordered_map(&ns, |&n| profile_row(p, bc, n));
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (n, r) in ns.iter().zip(results) {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => skipped.push(SkippedDisc { n: *n, category: format!("{:?}", e.category()), error: e.to_string() }),
        }
    }
    BasisProfile { potential: p.to_spec_string(), bc, rows, skipped }
}

/// Pairs for several discs of one operator, sharing its eigendecomposition.
pub fn pairs_for(op: &TruncatedOperator, ns: &[u32]) -> Vec<Result<SpectralPair>> {
    let _ = op.eigenvalues();
    ordered_map(ns, |&n| eigenpairs_in_disc(op, n))
}
