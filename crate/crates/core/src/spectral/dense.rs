//! Double-precision eigenvalues of the whole truncated matrix, used for
//! counting eigenvalues per disc.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigenvalues from a complex Schur decomposition, sorted by real part.
///
/// The unshifted QR iteration occasionally stagnates; the decomposition is
/// then retried on `M + sI` for a few fixed complex shifts `s`.
pub fn eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    const SHIFTS: [Complex64; 3] =
        [Complex64::new(0.0, 0.0), Complex64::new(0.37, 0.21), Complex64::new(-1.13, 0.57)];
    for s in SHIFTS {
        let shifted = m + DMatrix::from_diagonal_element(m.nrows(), m.ncols(), s);
        if let Some(schur) = shifted.try_schur(f64::EPSILON, 10_000) {
            let (_, t) = schur.unpack();
            let mut ev: Vec<Complex64> = t.diagonal().iter().map(|l| l - s).collect();
            ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
            return Ok(ev);
        }
    }
    Err(Error::Solver("Schur iteration did not converge".into()))
}

/// Relative margin inside which `|λ - n²|` counts as touching the boundary.
pub const BOUNDARY_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiscCount {
    pub inside: usize,
    pub on_boundary: usize,
}

pub fn count_in_disc(ev: &[Complex64], n: u32) -> DiscCount {
    let c = (n as f64).powi(2);
    let mut out = DiscCount { inside: 0, on_boundary: 0 };
    for l in ev {
        let d = (l - c).norm();
        if (d - 1.0).abs() <= BOUNDARY_MARGIN {
            out.on_boundary += 1;
        } else if d < 1.0 {
            out.inside += 1;
        }
    }
    out
}
