//! Dense and banded linear-algebra kernels.
//!
//! Determinants are held in log-magnitude + phase form throughout: the
//! multi-scale analysis only ever consumes determinant ratios and zero sets,
//! and block determinants overflow `f64` well below the region sizes we care
//! about.

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("near-singular: smallest singular value {sigma:.3e} below tolerance {tol:.3e}")]
    NearSingular { sigma: f64, tol: f64 },
    #[error("matrix is not square")]
    NotSquare,
    #[error("factorization failed: {0}")]
    Factorization(String),
}

/// A determinant in log-magnitude + unit-phase form.
///
/// `det = exp(ln_abs) * phase` with `|phase| = 1`; `ln_abs = -inf` encodes an
/// exact zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub ln_abs: f64,
    pub phase: Complex64,
}

impl LogDet {
    pub fn zero() -> Self {
        Self {
            ln_abs: f64::NEG_INFINITY,
            phase: Complex64::new(1.0, 0.0),
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        let n = z.norm();
        if n == 0.0 {
            Self::zero()
        } else {
            Self {
                ln_abs: n.ln(),
                phase: z / n,
            }
        }
    }

    /// The determinant as a complex number; overflows to infinity for large
    /// magnitudes.
    pub fn to_complex(self) -> Complex64 {
        self.phase * self.ln_abs.exp()
    }

    pub fn product(self, other: LogDet) -> LogDet {
        LogDet {
            ln_abs: self.ln_abs + other.ln_abs,
            phase: self.phase * other.phase,
        }
    }

    /// `|self - other|` relative to `max(1, |self|)`, computed without
    /// leaving log space.
    pub fn rel_diff(self, other: LogDet) -> f64 {
        if self.ln_abs == f64::NEG_INFINITY && other.ln_abs == f64::NEG_INFINITY {
            return 0.0;
        }
        let base = self.ln_abs.max(other.ln_abs);
        let a = self.phase * (self.ln_abs - base).exp();
        let b = other.phase * (other.ln_abs - base).exp();
        let diff = (a - b).norm(); // |self - other| = diff * e^base
        // denominator max(1, |self|) in log space
        let ln_den = self.ln_abs.max(0.0);
        diff * (base - ln_den).exp()
    }
}

/// Log-determinant via LU with partial pivoting. Works for real and complex
/// square matrices.
pub fn log_det<T>(m: &DMatrix<T>) -> LogDet
where
    T: ComplexField<RealField = f64>,
{
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "log_det expects a square matrix");
    if n == 0 {
        return LogDet::from_complex(Complex64::new(1.0, 0.0));
    }
    let lu = m.clone().lu();
    let mut ln_abs = 0.0f64;
    let mut phase = Complex64::new(1.0, 0.0);
    let u = lu.u();
    for i in 0..n {
        let d = u[(i, i)].clone();
        let modulus = d.clone().modulus();
        if modulus == 0.0 {
            return LogDet::zero();
        }
        ln_abs += modulus.ln();
        let arg = d.argument();
        phase *= Complex64::new(arg.cos(), arg.sin());
    }
    // permutation parity
    let sign: f64 = if lu.p().len().is_multiple_of(2) { 1.0 } else { -1.0 };
    phase *= sign;
    LogDet { ln_abs, phase }
}

/// Inverse via LU; errors if the factorization breaks down.
pub fn invert_dense(m: &DMatrix<f64>) -> Result<DMatrix<f64>, LinalgError> {
    m.clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| LinalgError::Factorization("singular matrix in LU inverse".into()))
}

pub fn invert_dense_c(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>, LinalgError> {
    m.clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| LinalgError::Factorization("singular matrix in LU inverse".into()))
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().cloned().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Smallest singular value of a real symmetric matrix (min |eigenvalue|).
pub fn sym_sigma_min(m: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(m)
        .iter()
        .map(|l| l.abs())
        .fold(f64::INFINITY, f64::min)
}

/// Operator norm of a real symmetric matrix (max |eigenvalue|).
pub fn sym_op_norm(m: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(m)
        .iter()
        .map(|l| l.abs())
        .fold(0.0, f64::max)
}

/// Max absolute row sum. For symmetric matrices this bounds the operator
/// norm; it is also the norm the Schur-complement row estimates use.
pub fn row_sum_norm_c(m: &DMatrix<Complex64>) -> f64 {
    let mut best = 0.0f64;
    for i in 0..m.nrows() {
        let s: f64 = (0..m.ncols()).map(|j| m[(i, j)].norm()).sum();
        best = best.max(s);
    }
    best
}

/// Operator norm (2-norm) of a complex matrix via power iteration on
/// `M^H M`. Adequate for the sandwich checks where only modest accuracy is
/// required; the row-sum norm certifies the upper end.
pub fn op_norm_c(m: &DMatrix<Complex64>, iters: usize) -> f64 {
    let n = m.ncols();
    if n == 0 {
        return 0.0;
    }
    let mh = m.adjoint();
    let seed: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + (i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()))
        .collect();
    let mut v = nalgebra::DVector::from_vec(seed);
    v /= Complex64::new(v.norm(), 0.0);
    let mut lambda = 0.0f64;
    for _ in 0..iters {
        let w = &mh * (m * &v);
        let nw = w.norm();
        if nw == 0.0 {
            return 0.0;
        }
        lambda = nw;
        v = w / Complex64::new(nw, 0.0);
    }
    lambda.sqrt()
}

/// ---------------------------------------------------------------------
/// Inertia counting
/// ---------------------------------------------------------------------
///
/// `count_below` computes `#{λ ∈ σ(A) : λ ≤ shift}` from the signs of the
/// pivots of a symmetric factorization of `A - shift·I`. No eigenvalues are
/// extracted; the count is an exact integer up to the pivot guard.
#[derive(Debug, Clone, Copy)]
pub struct InertiaCount {
    pub below: usize,
    /// Jitter that had to be added to the shift to clear an exact pivot
    /// breakdown (0 when the factorization went through unmodified).
    pub jitter: f64,
}

/// Dense symmetric inertia count with diagonal (symmetric) pivoting.
///
/// On pivot breakdown the shift is retried at `shift + jitter` with
/// `jitter = 1e-12 · scale`, doubling until the factorization succeeds.
pub fn dense_count_below(a: &DMatrix<f64>, shift: f64, scale: f64) -> InertiaCount {
    let mut jitter = 0.0f64;
    let base = 1e-12 * scale.max(1.0);
    loop {
        match try_dense_count(a, shift + jitter, base) {
            Some(below) => return InertiaCount { below, jitter },
            None => {
                jitter = if jitter == 0.0 { base } else { jitter * 2.0 };
                assert!(
                    jitter < 1e6 * base,
                    "inertia jitter failed to clear pivot breakdown"
                );
            }
        }
    }
}

fn try_dense_count(a: &DMatrix<f64>, shift: f64, pivot_guard: f64) -> Option<usize> {
    let n = a.nrows();
    let mut w = a.clone();
    for i in 0..n {
        w[(i, i)] -= shift;
    }
    let mut active: Vec<usize> = (0..n).collect();
    let mut below = 0usize;
    while let Some(pos) = {
        // symmetric pivoting: take the largest remaining diagonal entry
        let mut best: Option<(usize, f64)> = None;
        for (idx, &r) in active.iter().enumerate() {
            let v = w[(r, r)].abs();
            if best.is_none_or(|(_, bv)| v > bv) {
                best = Some((idx, v));
            }
        }
        best.map(|(idx, _)| idx)
    } {
        let r = active.swap_remove(pos);
        let d = w[(r, r)];
        if d.abs() < pivot_guard {
            return None; // exact-singularity signal: caller retries with jitter
        }
        if d < 0.0 {
            below += 1;
        }
        #[allow(clippy::needless_range_loop)]
        for ii in 0..active.len() {
            let i = active[ii];
            let li = w[(i, r)] / d;
            for jj in ii..active.len() {
                let j = active[jj];
                let upd = li * w[(r, j)];
                w[(i, j)] -= upd;
                if i != j {
                    w[(j, i)] = w[(i, j)];
                }
            }
        }
        if active.is_empty() {
            break;
        }
    }
    Some(below)
}

/// Symmetric banded matrix: `band[b][i] = A(i, i+b)` for `0 ≤ b ≤ bw`.
#[derive(Debug, Clone)]
pub struct SymBand {
    pub n: usize,
    pub bw: usize,
    pub band: Vec<Vec<f64>>,
}

impl SymBand {
    pub fn zeros(n: usize, bw: usize) -> Self {
        let band = (0..=bw).map(|b| vec![0.0; n.saturating_sub(b)]).collect();
        Self { n, bw, band }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let b = hi - lo;
        if b > self.bw {
            0.0
        } else {
            self.band[b][lo]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let b = hi - lo;
        assert!(b <= self.bw, "entry outside band");
        self.band[b][lo] = v;
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for b in 0..=self.bw {
                if i + b < self.n {
                    m[(i, i + b)] = self.band[b][i];
                    m[(i + b, i)] = self.band[b][i];
                }
            }
        }
        m
    }

    /// Max absolute row sum, an upper bound for the operator norm.
    pub fn row_sum_norm(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.n {
            let mut s = self.band[0][i].abs();
            for b in 1..=self.bw {
                if i + b < self.n {
                    s += self.band[b][i].abs();
                }
                if i >= b {
                    s += self.band[b][i - b].abs();
                }
            }
            best = best.max(s);
        }
        best
    }

    /// Banded inertia count (LDLᵀ without pivoting; retried with jitter on
    /// pivot breakdown, matching the dense path's contract).
    pub fn count_below(&self, shift: f64, scale: f64) -> InertiaCount {
        let mut jitter = 0.0f64;
        let base = 1e-12 * scale.max(1.0);
        loop {
            match self.try_count(shift + jitter, base) {
                Some(below) => return InertiaCount { below, jitter },
                None => {
                    jitter = if jitter == 0.0 { base } else { jitter * 2.0 };
                    assert!(
                        jitter < 1e6 * base,
                        "banded inertia jitter failed to clear pivot breakdown"
                    );
                }
            }
        }
    }

    fn try_count(&self, shift: f64, pivot_guard: f64) -> Option<usize> {
        let n = self.n;
        let bw = self.bw;
        if n == 0 {
            return Some(0);
        }
        // working copy of the band, lower storage w[b][i] = A(i+b, i)
        let mut w: Vec<Vec<f64>> = self.band.clone();
        for v in w[0].iter_mut() {
            *v -= shift;
        }
        let mut below = 0usize;
        for k in 0..n {
            let d = w[0][k];
            if d.abs() < pivot_guard {
                return None; // exact-singularity signal: caller retries with jitter
            }
            if d < 0.0 {
                below += 1;
            }
            let reach = bw.min(n - 1 - k);
            for i in 1..=reach {
                let li = w[i][k] / d;
                for j in i..=reach {
                    // update A(k+j, k+i) stored at w[j-i][k+i]
                    w[j - i][k + i] -= li * w[j][k];
                }
            }
        }
        Some(below)
    }

    /// Distance from `shift` to the nearest eigenvalue, by bisection on
    /// inertia counts. `span` must bound the spectral radius.
    pub fn sigma_min_at(&self, shift: f64, span: f64) -> f64 {
        let scale = self.row_sum_norm();
        let count_at = |x: f64| self.count_below(x, scale).below;
        let tol = 1e-14 * span.max(1.0);
        // nearest eigenvalue above `shift`
        let c0 = count_at(shift);
        let above = {
            let (mut lo, mut hi) = (shift, shift + span);
            if count_at(hi) == c0 {
                f64::INFINITY
            } else {
                while hi - lo > tol {
                    let mid = 0.5 * (lo + hi);
                    if count_at(mid) > c0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                hi - shift
            }
        };
        let below = {
            let (mut lo, mut hi) = (shift - span, shift);
            if count_at(lo) == c0 {
                // no eigenvalue within span below the shift
                f64::INFINITY
            } else {
                while hi - lo > tol {
                    let mid = 0.5 * (lo + hi);
                    if count_at(mid) < c0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                shift - lo
            }
        };
        above.min(below)
    }
}
