//! High-precision eigenpairs in one disc by Schur-complement reduction.
//!
//! Split the coefficient space into `P = {e^{-inx}, e^{inx}}` and the rest
//! `Q`. With `λ = n² + z`, `λ` is an eigenvalue of the truncated matrix
//! `M` iff `z` is an eigenvalue of the `2×2` matrix
//!
//! ```text
//! A(z) = (M_PP - n²) + M_PQ (λ - M_QQ)^{-1} M_QP,
//! ```
//!
//! and `λ - M_QQ` is well conditioned because its diagonal stays at least
//! `4n - 4 - |z|` away from zero. Each of the two roots is found by the
//! fixed-point iteration `z ← μ(A(z))`, following one branch of the `2×2`
//! eigenvalue continuously. When that iteration stalls (small `n`, where
//! `A` still depends strongly on `z`) the roots are instead polished by a
//! secant iteration on `det(A(z) - z)` seeded with the dense eigenvalues.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::fixed::{CFx, Fx};
use super::TruncatedOperator;
use crate::error::{Error, Result};

const MAX_ITER: usize = 500;

pub(crate) struct HpPair {
    pub fx: Fx,
    /// `z_i = λ_i - n²`, ordered by decreasing real part.
    pub z: [CFx; 2],
    /// Unit eigenvectors, phase fixed by a real positive largest entry.
    pub v: [Vec<CFx>; 2],
}

struct Reduced {
    a: [[CFx; 2]; 2],
    /// `(λ - M_QQ)^{-1} M_QP`, one row per `Q` index.
    x: Vec<[CFx; 2]>,
}

struct Setup {
    fx: Fx,
    n2: i64,
    p_pos: [usize; 2],
    q_idx: Vec<usize>,
    exps: Vec<i64>,
    coeff: BTreeMap<i64, CFx>,
    band: usize,
}

impl Setup {
    fn off(&self, r: usize, c: usize) -> Option<&CFx> {
        self.coeff.get(&(self.exps[r] - self.exps[c]))
    }

    fn reduce(&self, z: &CFx) -> Result<Reduced> {
        let fx = &self.fx;
        let m = self.q_idx.len();
        let lam = fx.add(&fx.from_i64(self.n2), z);
        // T = λ - M_QQ with two right-hand sides M_QP appended
        let mut t: Vec<Vec<CFx>> = vec![vec![fx.zero(); m + 2]; m];
        for (i, &qi) in self.q_idx.iter().enumerate() {
            let lo = i.saturating_sub(self.band);
            let hi = (i + self.band).min(m - 1);
            for (j, &qj) in self.q_idx.iter().enumerate().take(hi + 1).skip(lo) {
                if i == j {
                    t[i][j] = fx.sub(&lam, &fx.from_i64(self.exps[qi] * self.exps[qi]));
                } else if let Some(v) = self.off(qi, qj) {
                    t[i][j] = fx.neg(v);
                }
            }
            for (k, &pk) in self.p_pos.iter().enumerate() {
                if let Some(v) = self.off(qi, pk) {
                    t[i][m + k] = v.clone();
                }
            }
        }
        let x = band_solve(fx, t, self.band)?;
        let mut a: [[CFx; 2]; 2] = Default::default();
        for r in 0..2 {
            for c in 0..2 {
                let mut acc = if r == c {
                    fx.zero()
                } else {
                    self.off(self.p_pos[r], self.p_pos[c]).cloned().unwrap_or_else(|| fx.zero())
                };
                for (i, &qi) in self.q_idx.iter().enumerate() {
                    if let Some(v) = self.off(self.p_pos[r], qi) {
                        acc = fx.add(&acc, &fx.mul(v, &x[i][c]));
                    }
                }
                a[r][c] = acc;
            }
        }
        Ok(Reduced { a, x })
    }
}

impl Default for CFx {
    fn default() -> Self {
        CFx { re: Default::default(), im: Default::default() }
    }
}

/// Gaussian elimination with partial pivoting restricted to the band;
/// the last two columns of `t` are right-hand sides.
fn band_solve(fx: &Fx, mut t: Vec<Vec<CFx>>, band: usize) -> Result<Vec<[CFx; 2]>> {
    let m = t.len();
    let upper = 2 * band;
    for k in 0..m {
        let last_row = (k + band).min(m - 1);
        let piv = (k..=last_row)
            .max_by(|&i, &j| fx.norm_sqr_wide(&t[i][k]).cmp(&fx.norm_sqr_wide(&t[j][k])).then(j.cmp(&i)))
            .expect("nonempty");
        if fx.is_zero(&t[piv][k]) {
            return Err(Error::Solver("singular reduced system".into()));
        }
        t.swap(k, piv);
        let last_col = (k + upper).min(m - 1);
        for i in k + 1..=last_row {
            if fx.is_zero(&t[i][k]) {
                continue;
            }
            let f = fx.div(&t[i][k], &t[k][k]);
            for j in k..=last_col {
                let d = fx.mul(&f, &t[k][j]);
                t[i][j] = fx.sub(&t[i][j], &d);
            }
            for j in m..m + 2 {
                let d = fx.mul(&f, &t[k][j]);
                t[i][j] = fx.sub(&t[i][j], &d);
            }
        }
    }
    let mut x = vec![[fx.zero(), fx.zero()]; m];
    for i in (0..m).rev() {
        let last_col = (i + upper).min(m - 1);
        for c in 0..2 {
            let mut s = t[i][m + c].clone();
            for j in i + 1..=last_col {
                s = fx.sub(&s, &fx.mul(&t[i][j], &x[j][c]));
            }
            x[i][c] = fx.div(&s, &t[i][i]);
        }
    }
    Ok(x)
}

fn dist2(fx: &Fx, a: &CFx, b: &CFx) -> num_bigint::BigInt {
    fx.norm_sqr_wide(&fx.sub(a, b))
}

/// Eigenvalues `tr/2 ± s` of a `2×2` matrix: returns `(tr/2, s)` with the
/// principal root `s`.
fn eig2(fx: &Fx, a: &[[CFx; 2]; 2]) -> (CFx, CFx) {
    let half_tr = fx.scale_pow2(&fx.add(&a[0][0], &a[1][1]), -1);
    let half_diff = fx.scale_pow2(&fx.sub(&a[0][0], &a[1][1]), -1);
    let disc = fx.add(&fx.mul(&half_diff, &half_diff), &fx.mul(&a[0][1], &a[1][0]));
    (half_tr, fx.sqrt(&disc))
}

fn converge_branch(s: &Setup, sign: i32) -> Result<(CFx, Reduced)> {
    let fx = &s.fx;
    let tol = num_bigint::BigInt::from(1u64 << 16);
    let tol2 = &tol * &tol;
    let mut red = s.reduce(&fx.zero())?;
    let (h, root) = eig2(fx, &red.a);
    let mut root = if sign > 0 { root } else { fx.neg(&root) };
    let mut z = fx.add(&h, &root);
    for _ in 0..MAX_ITER {
        red = s.reduce(&z)?;
        let (h, r) = eig2(fx, &red.a);
        let nr = fx.neg(&r);
        root = if dist2(fx, &r, &root) <= dist2(fx, &nr, &root) { r } else { nr };
        let z_new = fx.add(&h, &root);
        let done = dist2(fx, &z_new, &z) < tol2;
        z = z_new;
        if done {
            return Ok((z, red));
        }
    }
    Err(Error::Solver(format!("disc iteration did not converge in {MAX_ITER} steps")))
}

fn eigenvector(s: &Setup, z: &CFx, red: &Reduced) -> Vec<CFx> {
    let fx = &s.fx;
    let a = &red.a;
    // null vector of zI - A from either row, whichever is larger
    let s11 = fx.sub(z, &a[0][0]);
    let s22 = fx.sub(z, &a[1][1]);
    let c1 = [a[0][1].clone(), s11];
    let c2 = [s22, a[1][0].clone()];
    let w = |c: &[CFx; 2]| fx.norm_sqr_wide(&c[0]) + fx.norm_sqr_wide(&c[1]);
    let mut u_p = if w(&c1) >= w(&c2) { c1 } else { c2 };
    if fx.is_zero(&u_p[0]) && fx.is_zero(&u_p[1]) {
        // A = z·I: any vector works; take e^{-inx}
        u_p = [fx.one(), fx.zero()];
    }
    let dim = s.exps.len();
    let mut u = vec![fx.zero(); dim];
    u[s.p_pos[0]] = u_p[0].clone();
    u[s.p_pos[1]] = u_p[1].clone();
    for (i, &qi) in s.q_idx.iter().enumerate() {
        u[qi] = fx.add(&fx.mul(&red.x[i][0], &u_p[0]), &fx.mul(&red.x[i][1], &u_p[1]));
    }
    normalize(fx, &mut u);
    u
}

pub(crate) fn normalize(fx: &Fx, u: &mut [CFx]) {
    let n2: num_bigint::BigInt = u.iter().map(|x| fx.norm_sqr(x)).sum();
    let norm = fx.sqrt_real(&n2);
    let inv = CFx { re: (num_bigint::BigInt::from(1) << (2 * fx.bits) as usize) / &norm, im: Default::default() };
    for x in u.iter_mut() {
        *x = fx.mul(x, &inv);
    }
    let big = (0..u.len())
        .max_by(|&i, &j| fx.norm_sqr_wide(&u[i]).cmp(&fx.norm_sqr_wide(&u[j])).then(j.cmp(&i)))
        .expect("nonempty");
    let ph = fx.unit_conj_phase(&u[big]);
    for x in u.iter_mut() {
        *x = fx.mul(x, &ph);
    }
    // the rotated pivot is real up to the last bit; make it exactly so
    u[big].im = Default::default();
}

fn setup(op: &TruncatedOperator, n: u32, bits: u32) -> Result<Setup> {
    let fx = Fx::new(bits);
    let n_i = n as i64;
    let pos = |e: i64| op.position(e).ok_or_else(|| Error::InvalidArgument(format!("exponent {e} outside truncation")));
    let p_pos = [pos(-n_i)?, pos(n_i)?];
    let dim = op.dim();
    let q_idx: Vec<usize> = (0..dim).filter(|i| !p_pos.contains(i)).collect();
    let coeff = match op.potential() {
        Some(p) => p.coeffs().iter().map(|(m, v)| (*m, fx.from_exact(v))).collect(),
        None => BTreeMap::new(),
    };
    Ok(Setup {
        fx,
        n2: n_i * n_i,
        p_pos,
        q_idx,
        exps: op.exponents().to_vec(),
        coeff,
        band: op.band().max(1),
    })
}

fn assemble(setup: Setup, a: (CFx, Reduced), b: (CFx, Reduced)) -> HpPair {
    let va = eigenvector(&setup, &a.0, &a.1);
    let vb = eigenvector(&setup, &b.0, &b.1);
    let (z, v) = if a.0.re >= b.0.re { ([a.0, b.0], [va, vb]) } else { ([b.0, a.0], [vb, va]) };
    HpPair { fx: setup.fx, z, v }
}

pub(crate) fn hp_pair(op: &TruncatedOperator, n: u32, bits: u32) -> Result<HpPair> {
    let setup = setup(op, n, bits)?;
    let a = converge_branch(&setup, 1)?;
    let b = converge_branch(&setup, -1)?;
    Ok(assemble(setup, a, b))
}

/// `det(A(z) - z)`.
fn secular(s: &Setup, z: &CFx) -> Result<(CFx, Reduced)> {
    let fx = &s.fx;
    let red = s.reduce(z)?;
    let d0 = fx.sub(&red.a[0][0], z);
    let d1 = fx.sub(&red.a[1][1], z);
    let f = fx.sub(&fx.mul(&d0, &d1), &fx.mul(&red.a[0][1], &red.a[1][0]));
    Ok((f, red))
}

fn converge_secant(s: &Setup, seed: Complex64) -> Result<(CFx, Reduced)> {
    let fx = &s.fx;
    // once consecutive iterates agree to 2^{-bits/3} the difference quotient
    // is dominated by rounding, so stop there
    let tol2 = num_bigint::BigInt::from(1) << (2 * fx.bits - 2 * (fx.bits / 3)) as usize;
    let mut z0 = fx.from_c64(seed);
    let mut z1 = fx.from_c64(seed + Complex64::new(1e-7, 1e-7));
    let (mut f0, _) = secular(s, &z0)?;
    for _ in 0..MAX_ITER {
        let (f1, red) = secular(s, &z1)?;
        let df = fx.sub(&f1, &f0);
        if fx.is_zero(&f1) || fx.is_zero(&df) {
            return Ok((z1, red));
        }
        let step = fx.div(&fx.mul(&f1, &fx.sub(&z1, &z0)), &df);
        let z2 = fx.sub(&z1, &step);
        if fx.norm_sqr_wide(&step) < tol2 {
            let (_, red) = secular(s, &z2)?;
            return Ok((z2, red));
        }
        (z0, f0, z1) = (z1, f1, z2);
    }
    Err(Error::Solver(format!("secant refinement did not converge in {MAX_ITER} steps")))
}

/// Both roots polished from double-precision seeds `z = λ - n²`.
pub(crate) fn hp_pair_seeded(op: &TruncatedOperator, n: u32, bits: u32, seeds: [Complex64; 2]) -> Result<HpPair> {
    let setup = setup(op, n, bits)?;
    let a = converge_secant(&setup, seeds[0])?;
    let b = converge_secant(&setup, seeds[1])?;
    Ok(assemble(setup, a, b))
}
