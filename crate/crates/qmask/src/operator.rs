use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{QmaskError, Result};
use crate::register::RegisterShape;

/// A square complex matrix acting on a declared sub-register.
#[derive(Debug, Clone)]
pub struct Operator {
    arity_shape: RegisterShape,
    mat: DMatrix<Complex64>,
    unitary: bool,
}

impl Operator {
    /// Wraps `mat` as an operator on `arity_shape`. With `unitary` set, the
    /// matrix is checked against U†U = I entrywise within 1e-10.
    pub fn new(arity_shape: RegisterShape, mat: DMatrix<Complex64>, unitary: bool) -> Result<Self> {
        let dim = arity_shape.total_dim();
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(QmaskError::OperatorShapeMismatch);
        }
        if unitary {
            let gram = mat.adjoint() * &mat;
            let dev = max_dev_from_identity(&gram);
            if dev > 1e-10 {
                return Err(QmaskError::NotHermitian(dev));
            }
        }
        Ok(Operator {
            arity_shape,
            mat,
            unitary,
        })
    }

    /// Unitary operator on a single d-level site.
    pub fn single_site(d: usize, mat: DMatrix<Complex64>) -> Result<Self> {
        Operator::new(RegisterShape::new(vec![d])?, mat, true)
    }

    pub fn identity(shape: RegisterShape) -> Self {
        let dim = shape.total_dim();
        Operator {
            arity_shape: shape,
            mat: DMatrix::identity(dim, dim),
            unitary: true,
        }
    }

    pub fn arity_shape(&self) -> &RegisterShape {
        &self.arity_shape
    }

    pub fn mat(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn dagger(&self) -> Operator {
        Operator {
            arity_shape: self.arity_shape.clone(),
            mat: self.mat.adjoint(),
            unitary: self.unitary,
        }
    }

    /// Matrix product `self · rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &Operator) -> Result<Operator> {
        if self.dim() != rhs.dim() {
            return Err(QmaskError::OperatorShapeMismatch);
        }
        Ok(Operator {
            arity_shape: self.arity_shape.clone(),
            mat: &self.mat * &rhs.mat,
            unitary: self.unitary && rhs.unitary,
        })
    }

    pub fn pow(&self, n: usize) -> Operator {
        let dim = self.dim();
        let mut acc = DMatrix::identity(dim, dim);
        for _ in 0..n {
            acc = &acc * &self.mat;
        }
        Operator {
            arity_shape: self.arity_shape.clone(),
            mat: acc,
            unitary: self.unitary,
        }
    }

    /// Tensor product; the left factor is the more significant sub-register.
    pub fn kron(&self, rhs: &Operator) -> Result<Operator> {
        Ok(Operator {
            arity_shape: self.arity_shape.concat(&rhs.arity_shape)?,
            mat: self.mat.kronecker(&rhs.mat),
            unitary: self.unitary && rhs.unitary,
        })
    }
}

fn max_dev_from_identity(m: &DMatrix<Complex64>) -> f64 {
    let mut dev = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let target = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            dev = dev.max((m[(i, j)] - target).norm());
        }
    }
    dev
}
