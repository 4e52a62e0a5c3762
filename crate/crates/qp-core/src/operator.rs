//! Finite-volume operator assembly.
//!
//! `T_Λ(E; θ) = (cos 2π(θ + n·ω) - E) δ_{n,n'} + ε Δ` restricted to a region,
//! with the nearest-neighbour Laplacian `Δ(n, n') = δ_{‖n-n'‖₁, 1}`.

use crate::lattice::{HalfLatticePoint, LatticeError, Region};
use crate::linalg::SymBand;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

/// Dense storage beyond this size becomes banded.
pub const DENSE_LIMIT: usize = 4096;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("empty-region")]
    EmptyRegion,
    #[error("region must lie in Z^d for operator assembly")]
    NonIntegerRegion,
    #[error("lattice error: {0}")]
    Lattice(#[from] LatticeError),
}

/// Model parameters `(d, ε, ω, θ, E)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorParams {
    pub d: usize,
    pub eps: f64,
    pub omega: Vec<f64>,
    pub theta: f64,
    pub energy: f64,
}

impl OperatorParams {
    pub fn new(eps: f64, omega: Vec<f64>, theta: f64, energy: f64) -> Self {
        Self {
            d: omega.len(),
            eps,
            omega,
            theta,
            energy,
        }
    }

    /// Phase `θ + n·ω`, reduced mod 1 for trigonometric accuracy.
    pub fn phase(&self, n: &HalfLatticePoint) -> f64 {
        (self.theta + n.dot(&self.omega)).rem_euclid(1.0)
    }

    /// Diagonal entry `D_n = cos 2π(θ + n·ω) - E`.
    pub fn diagonal(&self, n: &HalfLatticePoint) -> f64 {
        (TAU * self.phase(n)).cos() - self.energy
    }

    /// Apriori operator-norm bound `‖H‖ ≤ 1 + 2dε`.
    pub fn norm_bound(&self) -> f64 {
        1.0 + 2.0 * self.d as f64 * self.eps
    }
}

#[derive(Debug, Clone)]
pub enum MatrixRep {
    Dense(DMatrix<f64>),
    Banded(SymBand),
}

/// An assembled finite-volume symmetric matrix, indexed by the region's
/// lexicographic point order.
#[derive(Debug, Clone)]
pub struct OperatorInstance {
    pub params: OperatorParams,
    pub region: Region,
    pub points: Vec<HalfLatticePoint>,
    pub matrix: MatrixRep,
}

impl OperatorInstance {
    /// Assemble `T_Λ = H_Λ - E` on a region of `Z^d`. Dense for
    /// `|Λ| ≤ DENSE_LIMIT`, banded above.
    pub fn assemble(region: &Region, params: &OperatorParams) -> Result<Self, OperatorError> {
        Self::assemble_with_limit(region, params, DENSE_LIMIT)
    }

    pub fn assemble_with_limit(
        region: &Region,
        params: &OperatorParams,
        dense_limit: usize,
    ) -> Result<Self, OperatorError> {
        if region.is_empty() {
            return Err(OperatorError::EmptyRegion);
        }
        if region.parity().iter().any(|&p| p != 0) {
            return Err(OperatorError::NonIntegerRegion);
        }
        let points: Vec<HalfLatticePoint> = region.iter().cloned().collect();
        let matrix = if points.len() <= dense_limit {
            MatrixRep::Dense(assemble_dense(&points, params))
        } else {
            MatrixRep::Banded(assemble_banded(&points, params))
        };
        Ok(Self {
            params: params.clone(),
            region: region.clone(),
            points,
            matrix,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index_of(&self, p: &HalfLatticePoint) -> Option<usize> {
        self.points.binary_search(p).ok()
    }

    pub fn dense(&self) -> DMatrix<f64> {
        match &self.matrix {
            MatrixRep::Dense(m) => m.clone(),
            MatrixRep::Banded(b) => b.to_dense(),
        }
    }

    pub fn banded(&self) -> SymBand {
        match &self.matrix {
            MatrixRep::Dense(_) => assemble_banded(&self.points, &self.params),
            MatrixRep::Banded(b) => b.clone(),
        }
    }

    /// Max absolute row sum of the assembled matrix.
    pub fn row_sum_norm(&self) -> f64 {
        match &self.matrix {
            MatrixRep::Dense(m) => {
                let mut best = 0.0f64;
                for i in 0..m.nrows() {
                    let s: f64 = (0..m.ncols()).map(|j| m[(i, j)].abs()).sum();
                    best = best.max(s);
                }
                best
            }
            MatrixRep::Banded(b) => b.row_sum_norm(),
        }
    }
}

fn assemble_dense(points: &[HalfLatticePoint], params: &OperatorParams) -> DMatrix<f64> {
    let n = points.len();
    let mut m = DMatrix::zeros(n, n);
    for (i, p) in points.iter().enumerate() {
        m[(i, i)] = params.diagonal(p);
        for (j, q) in points.iter().enumerate().skip(i + 1) {
            if p.dist_l1(q) == 1.0 {
                m[(i, j)] = params.eps;
                m[(j, i)] = params.eps;
            }
        }
    }
    m
}

fn assemble_banded(points: &[HalfLatticePoint], params: &OperatorParams) -> SymBand {
    let n = points.len();
    // bandwidth = max index distance over ℓ¹-neighbour pairs
    let mut bw = 0usize;
    let mut bonds: Vec<(usize, usize)> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        for (j, q) in points.iter().enumerate().skip(i + 1) {
            if p.dist(q) > 1.0 {
                // points are sorted lexicographically; once the leading
                // coordinate gap exceeds 1 no later point can be a neighbour
                if (q.doubled()[0] - p.doubled()[0]) > 2 {
                    break;
                }
                continue;
            }
            if p.dist_l1(q) == 1.0 {
                bonds.push((i, j));
                bw = bw.max(j - i);
            }
        }
    }
    let mut b = SymBand::zeros(n, bw.max(1));
    for (i, p) in points.iter().enumerate() {
        b.band[0][i] = params.diagonal(p);
    }
    for (i, j) in bonds {
        b.set(i, j, params.eps);
    }
    b
}

/// Complexified block matrix `M(z) = (cos 2π(z + n·ω) δ_{n,n'} - E + ε Δ)`
/// over a region that may live on any half-integer parity class.
pub fn complexified(region: &Region, params: &OperatorParams, z: Complex64) -> DMatrix<Complex64> {
    let points: Vec<&HalfLatticePoint> = region.iter().collect();
    let n = points.len();
    let mut m = DMatrix::zeros(n, n);
    let e = Complex64::new(params.energy, 0.0);
    for (i, p) in points.iter().enumerate() {
        let arg = (z + p.dot(&params.omega)) * TAU;
        m[(i, i)] = arg.cos() - e;
        for (j, q) in points.iter().enumerate().skip(i + 1) {
            if p.dist_l1(q) == 1.0 {
                let eps = Complex64::new(params.eps, 0.0);
                m[(i, j)] = eps;
                m[(j, i)] = eps;
            }
        }
    }
    m
}

/// Derivative entries `d/dz cos 2π(z + n·ω) = -2π sin 2π(z + n·ω)` on the
/// diagonal (used by Newton refinement of determinant zeros).
pub fn complexified_diag_derivative(
    region: &Region,
    params: &OperatorParams,
    z: Complex64,
) -> Vec<Complex64> {
    region
        .iter()
        .map(|p| {
            let arg = (z + p.dot(&params.omega)) * TAU;
            -TAU * arg.sin()
        })
        .collect()
}
