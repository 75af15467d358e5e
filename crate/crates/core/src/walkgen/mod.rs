//! Admissible walks `-n → n` and `n → -n` on the even (or odd) integer
//! lattice, their weights
//!
//! ```text
//! h(x, z) = Π V(x(t)) / Π_{t=1..ν} (n² - j(t)² + z)
//! ```
//!
//! and the sums `B⁺(n, z)`, `B⁻(n, z)` of those weights.
//!
//! Walk sums are computed by a layered dynamic programme over
//! `(vertex, class)` states rather than by listing walks, so the cost is
//! polynomial in `n` and the class bound. [`enumerate_walks`] lists walks
//! explicitly for small cases and dumps.

mod scalar;
mod sum;
mod tail;

pub use scalar::WalkScalar;
pub use sum::{
    class_of, forward_only_sum, walk_sum, walk_sum_auto, ClassSum, ComplexValue, WalkSumResult, ZArg,
    DEFAULT_MAX_CLASS,
};
pub use tail::{certified_tail, forward_perturbation_majorant, neumann_tail, skeleton_mass};

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{format_complex, CRational};
use crate::potential::Potential;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    /// `-n → n`, contributing to `B⁺`
    #[serde(rename = "fwd")]
    Forward,
    /// `n → -n`, contributing to `B⁻`
    #[serde(rename = "bwd")]
    Backward,
}

impl Direction {
    /// `+1` for forward, `-1` for backward.
    pub fn sign(self) -> i64 {
        match self {
            Direction::Forward => 1,
            Direction::Backward => -1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Forward => "fwd",
            Direction::Backward => "bwd",
        }
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fwd" | "forward" | "+" => Ok(Direction::Forward),
            "bwd" | "backward" | "-" => Ok(Direction::Backward),
            other => Err(Error::InvalidArgument(format!("unknown direction '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Walk {
    pub n: u32,
    pub direction: Direction,
    pub steps: Vec<i64>,
}

impl Walk {
    pub fn new(n: u32, direction: Direction, steps: Vec<i64>) -> Self {
        Walk { n, direction, steps }
    }

    pub fn start(&self) -> i64 {
        -self.direction.sign() * self.n as i64
    }

    pub fn target(&self) -> i64 {
        self.direction.sign() * self.n as i64
    }

    /// Intermediate vertices `j(1), …, j(ν)`.
    pub fn vertices(&self) -> Vec<i64> {
        let mut j = self.start();
        let mut out = Vec::with_capacity(self.steps.len().saturating_sub(1));
        for &s in &self.steps[..self.steps.len().saturating_sub(1)] {
            j += s;
            out.push(j);
        }
        out
    }

    pub fn is_forward(&self) -> bool {
        self.steps.iter().all(|&s| s > 0)
    }

    pub fn is_backward(&self) -> bool {
        self.steps.iter().all(|&s| s < 0)
    }

    pub fn is_sign_constant(&self) -> bool {
        self.is_forward() || self.is_backward()
    }

    /// Checks the endpoint sum, the forbidden intermediate vertices `±n`
    /// and that every step lies in the support of `p`.
    pub fn is_admissible(&self, p: &Potential) -> bool {
        let n = self.n as i64;
        !self.steps.is_empty()
            && self.steps.iter().sum::<i64>() == 2 * self.target()
            && self.vertices().iter().all(|&j| j != n && j != -n)
            && self.steps.iter().all(|s| p.coeff(*s).is_some())
    }

    /// One line of the walk dump: `n dir [s1,s2,...] num den -> value`.
    pub fn dump_line(&self, w: &WalkWeight<CRational>) -> String {
        let steps: Vec<String> = self.steps.iter().map(|s| s.to_string()).collect();
        format!(
            "{} {} [{}] {} {} -> {}",
            self.n,
            self.direction,
            steps.join(","),
            format_complex(&w.numerator),
            format_complex(&w.denominator),
            format_complex(&w.value)
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkWeight<S> {
    pub numerator: S,
    pub denominator: S,
    pub value: S,
}

/// `h(w, z)`, exact when `S` is [`CRational`].
pub fn weight<S: WalkScalar>(w: &Walk, p: &Potential, z: &S) -> Result<WalkWeight<S>> {
    let mut num = S::from_int(1);
    for s in &w.steps {
        let v = p
            .coeff(*s)
            .ok_or_else(|| Error::InvalidArgument(format!("step {s} not in the support of the potential")))?;
        num = num.mul(&S::from_exact(v));
    }
    let n = w.n as i64;
    let mut den = S::from_int(1);
    for j in w.vertices() {
        let f = S::from_int(n * n - j * j).add(z);
        if f.is_zero() {
            return Err(Error::SingularWeight { n: w.n, vertex: j });
        }
        den = den.mul(&f);
    }
    let value = num.div(&den);
    Ok(WalkWeight { numerator: num, denominator: den, value })
}

fn check_n(n: u32) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidArgument("n must be positive".into()))
    } else {
        Ok(())
    }
}

/// All admissible walks with at most `max_steps` steps, in lexicographic
/// order of their step sequences.
pub fn enumerate_walks(p: &Potential, n: u32, direction: Direction, max_steps: usize) -> Result<Vec<Walk>> {
    check_n(n)?;
    let steps = p.support();
    let n_i = n as i64;
    let target = direction.sign() * n_i;
    let max_pos = steps.iter().copied().filter(|&s| s > 0).max().unwrap_or(0);
    let max_neg = steps.iter().copied().filter(|&s| s < 0).map(|s| -s).max().unwrap_or(0);

    struct Ctx<'a> {
        steps: &'a [i64],
        target: i64,
        n: i64,
        max_steps: usize,
        max_pos: i64,
        max_neg: i64,
        out: Vec<Vec<i64>>,
    }
    fn reachable(c: &Ctx, j: i64, left: usize) -> bool {
        let d = c.target - j;
        let left = left as i64;
        if d > 0 {
            d <= left * c.max_pos
        } else {
            -d <= left * c.max_neg
        }
    }
    fn dfs(c: &mut Ctx, j: i64, path: &mut Vec<i64>) {
        for k in 0..c.steps.len() {
            let s = c.steps[k];
            let nj = j + s;
            path.push(s);
            if nj == c.target {
                c.out.push(path.clone());
            } else if nj != -c.target && nj.abs() != c.n {
                let left = c.max_steps - path.len();
                if left > 0 && reachable(c, nj, left) {
                    dfs(c, nj, path);
                }
            }
            path.pop();
        }
    }

    let mut ctx = Ctx { steps: &steps, target, n: n_i, max_steps, max_pos, max_neg, out: Vec::new() };
    if max_steps > 0 && reachable(&ctx, -target, max_steps) {
        dfs(&mut ctx, -target, &mut Vec::new());
    }
    Ok(ctx.out.into_iter().map(|s| Walk::new(n, direction, s)).collect())
}

/// Splits walks into the forward (all steps positive) and backward (all
/// steps negative) subsets; mixed walks are dropped.
pub fn forward_backward_subsets(walks: &[Walk]) -> (Vec<Walk>, Vec<Walk>) {
    let fwd = walks.iter().filter(|w| w.is_forward()).cloned().collect();
    let bwd = walks.iter().filter(|w| w.is_backward()).cloned().collect();
    (fwd, bwd)
}

/// `τ = h(w, z)/h(w, 0) - 1 = Π (n² - j²)/(n² - j² + z) - 1`.
pub fn z_perturbation_ratio<S: WalkScalar>(w: &Walk, z: &S) -> Result<S> {
    let n = w.n as i64;
    let mut prod = S::from_int(1);
    for j in w.vertices() {
        let d0 = S::from_int(n * n - j * j);
        let dz = d0.add(z);
        if dz.is_zero() {
            return Err(Error::SingularWeight { n: w.n, vertex: j });
        }
        if d0.is_zero() {
            return Err(Error::SingularWeight { n: w.n, vertex: j });
        }
        prod = prod.mul(&d0.div(&dz));
    }
    Ok(prod.add(&S::from_int(-1)))
}

/// `Π_{t=i..j} (n² - (-n+4t)²)/(n² - (-n+4t-2)²)` for `1 ≤ i ≤ j < n/2`.
pub fn lem_p_product(n: u32, i: u32, j: u32) -> Result<BigRational> {
    if !(1 <= i && i <= j && 2 * j < n) {
        return Err(Error::InvalidArgument(format!("need 1 ≤ i ≤ j < n/2, got n={n}, i={i}, j={j}")));
    }
    let n = n as i64;
    let mut acc = BigRational::one();
    for t in i as i64..=j as i64 {
        let num = n * n - (-n + 4 * t).pow(2);
        let den = n * n - (-n + 4 * t - 2).pow(2);
        acc *= BigRational::new(BigInt::from(num), BigInt::from(den));
    }
    Ok(acc)
}

/// `|τ_n|` in floating point for a sign-constant walk at complex `z`.
pub fn z_perturbation_abs(w: &Walk, z: Complex64) -> Result<f64> {
    Ok(z_perturbation_ratio(w, &z)?.norm())
}
