use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{certified_tail, Direction, Walk, WalkScalar};
use crate::error::{Error, Result};
use crate::exact::{format_complex, parse_complex, to_c64, CRational, ScaledComplex};
use crate::potential::{classify, FamilyTag, Potential};

pub const DEFAULT_MAX_CLASS: u32 = 6;

/// Spectral parameter `z`: exact rational input keeps the whole sum exact.
#[derive(Debug, Clone, PartialEq)]
pub enum ZArg {
    Exact(CRational),
    Float(Complex64),
}

impl ZArg {
    pub fn zero() -> Self {
        ZArg::Exact(crate::exact::cint(0))
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            ZArg::Exact(c) => to_c64(c),
            ZArg::Float(z) => *z,
        }
    }

    pub fn value(&self) -> ComplexValue {
        match self {
            ZArg::Exact(c) => ComplexValue::from_exact(c),
            ZArg::Float(z) => ComplexValue::from_c64(*z),
        }
    }
}

impl std::str::FromStr for ZArg {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_complex(s).map(ZArg::Exact)
    }
}

impl From<Complex64> for ZArg {
    fn from(z: Complex64) -> Self {
        ZArg::Float(z)
    }
}

impl From<CRational> for ZArg {
    fn from(z: CRational) -> Self {
        ZArg::Exact(z)
    }
}

/// Complex number in JSON: floating components plus the exact value in
/// the coefficient grammar when one is known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
    pub exact: Option<String>,
}

impl ComplexValue {
    pub fn from_exact(c: &CRational) -> Self {
        let z = to_c64(c);
        ComplexValue { re: z.re, im: z.im, exact: Some(format_complex(c)) }
    }

    pub fn from_c64(z: Complex64) -> Self {
        ComplexValue { re: z.re, im: z.im, exact: None }
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassSum {
    pub index: u32,
    pub sum: ComplexValue,
    /// `Σ |h(x, z)|` over the class.
    pub mass: f64,
    pub count: u128,
    #[serde(skip)]
    pub sum_exact: Option<CRational>,
    #[serde(skip, default = "ScaledComplex::zero")]
    pub sum_scaled: ScaledComplex,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WalkSumResult {
    pub potential: String,
    pub n: u32,
    pub direction: Direction,
    pub z: ComplexValue,
    pub partial_sum: ComplexValue,
    pub classes: Vec<ClassSum>,
    pub max_class: u32,
    /// Certified bound on the omitted classes; `None` when no certificate applies.
    pub tail_bound: Option<f64>,
    pub certified: bool,
    pub walk_count: u128,
    pub tail_note: Option<String>,
    #[serde(skip)]
    pub partial_sum_exact: Option<CRational>,
    #[serde(skip, default = "ScaledComplex::zero")]
    pub partial_sum_scaled: ScaledComplex,
}

impl WalkSumResult {
    pub fn class(&self, k: u32) -> Option<&ClassSum> {
        self.classes.iter().find(|c| c.index == k)
    }

    pub fn value(&self) -> Complex64 {
        self.partial_sum.to_c64()
    }

    /// `ln |partial_sum|`, valid far below the double-precision range.
    pub fn ln_abs(&self) -> f64 {
        self.partial_sum_scaled.ln_abs()
    }

    /// `tail_bound / |partial_sum|`, or infinity when uncertified.
    pub fn relative_tail(&self) -> f64 {
        match self.tail_bound {
            Some(t) if t == 0.0 => 0.0,
            Some(t) => (t.ln() - self.ln_abs()).exp(),
            None => f64::INFINITY,
        }
    }
}

/// How walk classes are counted for a potential.
#[derive(Debug, Clone, Copy)]
pub(crate) enum ClassRule {
    /// class = number of steps against the walk direction
    ReverseSteps,
    /// class = total steps minus the minimal possible length
    TotalSteps { offset: u32 },
}

pub(crate) fn class_rule(p: &Potential, n: u32, dir: Direction) -> ClassRule {
    match classify(p) {
        FamilyTag::General => {
            let fwd = p.support().into_iter().map(|s| s * dir.sign()).max().unwrap_or(1).max(1);
            ClassRule::TotalSteps { offset: num_integer::Integer::div_ceil(&(2 * n as i64), &fwd) as u32 }
        }
        _ => ClassRule::ReverseSteps,
    }
}

/// Class index of an admissible walk under the engine's class rule.
pub fn class_of(p: &Potential, w: &Walk) -> u32 {
    let sign = w.direction.sign();
    match class_rule(p, w.n, w.direction) {
        ClassRule::ReverseSteps => w.steps.iter().filter(|&&s| s * sign < 0).count() as u32,
        ClassRule::TotalSteps { offset } => (w.steps.len() as u32).saturating_sub(offset),
    }
}

pub(crate) struct ClassAcc<S: WalkScalar> {
    pub value: S::Acc,
    pub mass: f64,
    pub count: u128,
}

struct Cell<S: WalkScalar> {
    value: S::Acc,
    mass: f64,
    count: u128,
}

/// Dynamic programme over `(cost, progress)` states, where progress is
/// the vertex measured along the walk direction. Every transition strictly
/// increases the key, so states are finalized in key order.
pub(crate) fn class_sums<S: WalkScalar>(
    p: &Potential,
    n: u32,
    dir: Direction,
    z: &S,
    max_class: u32,
    forward_only: bool,
) -> Result<Vec<ClassAcc<S>>> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let n_i = n as i64;
    let sign = dir.sign();
    let rule = class_rule(p, n, dir);
    struct Step<S> {
        progress: i64,
        cost: u32,
        v: S,
        v_abs: f64,
    }
    let steps: Vec<Step<S>> = p
        .coeffs()
        .iter()
        .filter(|(s, _)| !forward_only || **s * sign > 0)
        .map(|(s, v)| {
            let progress = s * sign;
            let cost = match rule {
                ClassRule::ReverseSteps => (progress < 0) as u32,
                ClassRule::TotalSteps { .. } => 1,
            };
            Step { progress, cost, v: S::from_exact(v), v_abs: to_c64(v).norm() }
        })
        .collect();
    let max_fwd = steps.iter().map(|s| s.progress).filter(|&x| x > 0).max().unwrap_or(0);
    let max_rev = steps.iter().map(|s| -s.progress).filter(|&x| x > 0).max().unwrap_or(0);
    let offset = match rule {
        ClassRule::ReverseSteps => 0,
        ClassRule::TotalSteps { offset } => offset,
    };
    let max_cost = offset + max_class;

    let mut classes: Vec<ClassAcc<S>> =
        (0..=max_class).map(|_| ClassAcc { value: S::acc_new(), mass: 0.0, count: 0 }).collect();
    if max_fwd == 0 {
        return Ok(classes);
    }

    let feasible = |cost: u32, u: i64| -> bool {
        let left = (max_cost - cost) as i64;
        match rule {
            ClassRule::ReverseSteps => u <= n_i || u - n_i <= left * max_rev,
            ClassRule::TotalSteps { .. } => {
                left > 0 && if u < n_i { n_i - u <= left * max_fwd } else { u - n_i <= left * max_rev }
            }
        }
    };

    let mut work: BTreeMap<(u32, i64), Cell<S>> = BTreeMap::new();
    let mut one = S::acc_new();
    S::acc_add(&mut one, &S::from_int(1));
    work.insert((0, -n_i), Cell { value: one, mass: 1.0, count: 1 });

    while let Some(((cost, u), cell)) = work.pop_first() {
        let val = S::acc_value(&cell.value);
        for st in &steps {
            let nc = cost + st.cost;
            if nc > max_cost {
                continue;
            }
            let nu = u + st.progress;
            if nu == n_i {
                if nc >= offset {
                    let c = &mut classes[(nc - offset) as usize];
                    S::acc_add(&mut c.value, &val.mul(&st.v));
                    c.mass += cell.mass * st.v_abs;
                    c.count += cell.count;
                }
                continue;
            }
            if nu == -n_i || !feasible(nc, nu) {
                continue;
            }
            let den = S::from_int(n_i * n_i - nu * nu).add(z);
            if den.is_zero() {
                return Err(Error::SingularWeight { n, vertex: sign * nu });
            }
            let contrib = val.mul(&st.v).div(&den);
            let mass = cell.mass * st.v_abs / den.norm();
            let e = work
                .entry((nc, nu))
                .or_insert_with(|| Cell { value: S::acc_new(), mass: 0.0, count: 0 });
            S::acc_add(&mut e.value, &contrib);
            e.mass += mass;
            e.count += cell.count;
        }
    }
    Ok(classes)
}

fn assemble<S: WalkScalar>(
    p: &Potential,
    n: u32,
    dir: Direction,
    z: &ZArg,
    max_class: u32,
    accs: Vec<ClassAcc<S>>,
) -> WalkSumResult {
    let mut total = S::acc_new();
    let mut classes = Vec::with_capacity(accs.len());
    let mut walk_count = 0u128;
    for (k, a) in accs.into_iter().enumerate() {
        let v = S::acc_value(&a.value);
        S::acc_add(&mut total, &v);
        walk_count += a.count;
        classes.push(ClassSum {
            index: k as u32,
            sum: match v.as_exact() {
                Some(e) => ComplexValue::from_exact(&e),
                None => ComplexValue::from_c64(v.to_c64()),
            },
            mass: a.mass,
            count: a.count,
            sum_exact: v.as_exact(),
            sum_scaled: v.scaled(),
        });
    }
    let total = S::acc_value(&total);
    let exact = total.as_exact();
    WalkSumResult {
        potential: p.to_spec_string(),
        n,
        direction: dir,
        z: z.value(),
        partial_sum: match &exact {
            Some(e) => ComplexValue::from_exact(e),
            None => ComplexValue::from_c64(total.to_c64()),
        },
        classes,
        max_class,
        tail_bound: None,
        certified: false,
        walk_count,
        tail_note: None,
        partial_sum_exact: exact,
        partial_sum_scaled: total.scaled(),
    }
}

/// `B^±(n, z)` truncated to classes `0..=max_class`, with the certified
/// bound on everything omitted.
pub fn walk_sum(p: &Potential, n: u32, dir: Direction, z: &ZArg, max_class: u32) -> Result<WalkSumResult> {
    let mut r = match z {
        ZArg::Exact(zz) => assemble(p, n, dir, z, max_class, class_sums(p, n, dir, zz, max_class, false)?),
        ZArg::Float(zz) => assemble(p, n, dir, z, max_class, class_sums(p, n, dir, zz, max_class, false)?),
    };
    match certified_tail(p, n, dir, z.to_c64(), max_class) {
        Ok(t) => {
            r.tail_bound = Some(t);
            r.certified = true;
        }
        Err(Error::CertificationUnavailable(msg)) => r.tail_note = Some(msg),
        Err(e) => return Err(e),
    }
    Ok(r)
}

/// [`walk_sum`] with the class bound raised from [`DEFAULT_MAX_CLASS`] until
/// the certified tail is at most `rel_tol · |partial_sum|` or `cap` is hit.
pub fn walk_sum_auto(p: &Potential, n: u32, dir: Direction, z: &ZArg, rel_tol: f64, cap: u32) -> Result<WalkSumResult> {
    let mut k = DEFAULT_MAX_CLASS.min(cap);
    loop {
        let r = walk_sum(p, n, dir, z, k)?;
        if !r.certified || r.relative_tail() <= rel_tol || k >= cap {
            return Ok(r);
        }
        k = (k + 4).min(cap);
    }
}

/// Sum over the sign-constant walks only (all steps in the walk direction).
pub fn forward_only_sum(p: &Potential, n: u32, dir: Direction, z: &ZArg) -> Result<WalkSumResult> {
    // with only forward steps every walk has at most n steps
    let cap = match class_rule(p, n, dir) {
        ClassRule::ReverseSteps => 0,
        ClassRule::TotalSteps { offset } => n.saturating_sub(offset),
    };
    let mut r = match z {
        ZArg::Exact(zz) => assemble(p, n, dir, z, cap, class_sums(p, n, dir, zz, cap, true)?),
        ZArg::Float(zz) => assemble(p, n, dir, z, cap, class_sums(p, n, dir, zz, cap, true)?),
    };
    r.tail_bound = Some(0.0);
    r.certified = true;
    r.tail_note = Some("sign-constant walks only".into());
    Ok(r)
}
