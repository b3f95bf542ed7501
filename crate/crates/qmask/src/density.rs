use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{QmaskError, Result};

/// Hermitian, unit-trace, positive semi-definite complex matrix for a site
/// subset of a register.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    dim: usize,
    mat: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-10), unit trace (1e-10) and positivity
    /// (eigenvalues ≥ −1e-9, values within 1e-10 of zero clamped first).
    pub fn new(mat: DMatrix<Complex64>) -> Result<Self> {
        let dim = mat.nrows();
        if mat.ncols() != dim {
            return Err(QmaskError::DimMismatch(dim, mat.ncols()));
        }
        let herm_dev = (0..dim)
            .flat_map(|i| (0..dim).map(move |j| (i, j)))
            .map(|(i, j)| (mat[(i, j)] - mat[(j, i)].conj()).norm())
            .fold(0.0f64, f64::max);
        if herm_dev > 1e-10 {
            return Err(QmaskError::NotHermitian(herm_dev));
        }
        let trace_dev = (mat.trace() - Complex64::new(1.0, 0.0)).norm();
        if trace_dev > 1e-10 {
            return Err(QmaskError::BadTrace(trace_dev));
        }
        let min_eig = hermitian_eigenvalues(&mat)
            .into_iter()
            .map(|v| if v.abs() <= 1e-10 { 0.0 } else { v })
            .fold(f64::INFINITY, f64::min);
        if min_eig < -1e-9 {
            return Err(QmaskError::NotPositive(min_eig));
        }
        Ok(DensityMatrix { dim, mat })
    }

    /// Maximally mixed state I/d.
    pub fn maximally_mixed(dim: usize) -> Self {
        let mat = DMatrix::from_diagonal_element(dim, dim, Complex64::new(1.0 / dim as f64, 0.0));
        DensityMatrix { dim, mat }
    }

    /// Projector |ψ⟩⟨ψ| onto a unit vector of amplitudes.
    pub fn pure_projector(amps: &[Complex64]) -> Self {
        let dim = amps.len();
        let mat = DMatrix::from_fn(dim, dim, |i, j| amps[i] * amps[j].conj());
        DensityMatrix { dim, mat }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mat(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    /// Overlap ⟨ψ|ρ|ψ⟩, the fidelity of ρ with a pure state.
    pub fn overlap_with(&self, amps: &[Complex64]) -> Result<f64> {
        if amps.len() != self.dim {
            return Err(QmaskError::DimMismatch(self.dim, amps.len()));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += amps[i].conj() * self.mat[(i, j)] * amps[j];
            }
        }
        Ok(acc.re)
    }
}

/// Eigenvalues of a Hermitian matrix, via cyclic complex Jacobi rotations.
///
/// Dimensions here are tiny (≤ d² ≤ 100), so the quadratically convergent
/// sweep loop is more than enough and keeps the result deterministic.
pub fn hermitian_eigenvalues(mat: &DMatrix<Complex64>) -> Vec<f64> {
    let n = mat.nrows();
    let mut a = mat.clone();
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() < 1e-14 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.norm() < 1e-300 {
                    continue;
                }
                // Phase out the (p,q) entry, then rotate the real 2x2 block:
                // V = diag(1, e^{-iφ})·[[c,s],[-s,c]] with tan 2θ = 2|apq|/(aqq−app).
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let phase = apq / apq.norm();
                let theta = 0.5 * (2.0 * apq.norm()).atan2(aqq - app);
                let c = theta.cos();
                let s = theta.sin();
                // A ← A·V
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * c - aiq * phase.conj() * s;
                    a[(i, q)] = aip * s + aiq * phase.conj() * c;
                }
                // A ← V†·A
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = apj * c - aqj * phase * s;
                    a[(q, j)] = apj * s + aqj * phase * c;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}

/// Trace distance (1/2)·Σ singular values of (a − b).
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim != b.dim {
        return Err(QmaskError::DimMismatch(a.dim, b.dim));
    }
    let diff = a.mat() - b.mat();
    let sum: f64 = hermitian_eigenvalues(&diff).iter().map(|v| v.abs()).sum();
    Ok(0.5 * sum)
}
