use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{QmaskError, Result};

/// Default cap on the number of dense amplitudes a register may hold.
pub const DEFAULT_MAX_AMPLITUDES: usize = 1_000_000;

static MAX_AMPLITUDES: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_AMPLITUDES);

/// Overrides the dense-dimension cap for subsequently constructed registers.
pub fn set_max_amplitudes(cap: usize) {
    MAX_AMPLITUDES.store(cap, Ordering::Relaxed);
}

pub fn max_amplitudes() -> usize {
    MAX_AMPLITUDES.load(Ordering::Relaxed)
}

/// Ordered site dimensions of a multi-qudit register.
///
/// Amplitude indexing is row-major with site 0 most significant, so for a
/// register `[d0, d1]` the basis state |a⟩|b⟩ sits at index `a*d1 + b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterShape {
    dims: Vec<usize>,
}

impl RegisterShape {
    pub fn new(dims: impl Into<Vec<usize>>) -> Result<Self> {
        let dims = dims.into();
        let cap = max_amplitudes();
        let mut total: usize = 1;
        for &d in &dims {
            if d < 2 {
                return Err(QmaskError::DimTooSmall(d));
            }
            total = total
                .checked_mul(d)
                .filter(|&t| t <= cap)
                .ok_or(QmaskError::DimensionOverflow(cap))?;
        }
        Ok(RegisterShape { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_sites(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Row-major stride of each site: `stride[i] = prod(dims[i+1..])`.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.dims.len()];
        for i in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.dims[i + 1];
        }
        strides
    }

    /// Digit of `index` at `site` under row-major ordering.
    pub fn digit(&self, index: usize, site: usize) -> usize {
        (index / self.strides()[site]) % self.dims[site]
    }

    /// Concatenation of two shapes (tensor-product register).
    pub fn concat(&self, other: &RegisterShape) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        RegisterShape::new(dims)
    }
}
