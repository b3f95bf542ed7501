use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{QmaskError, Result};
use crate::operator::Operator;
use crate::register::RegisterShape;
use crate::state::PureState;

/// Label (k, l) of a generalized Bell state in dimension d: k indexes the
/// phase, l the shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BellLabel {
    pub d: usize,
    pub k: usize,
    pub l: usize,
}

impl BellLabel {
    pub fn new(d: usize, k: usize, l: usize) -> Result<Self> {
        if d < 2 {
            return Err(QmaskError::DimTooSmall(d));
        }
        if k >= d || l >= d {
            return Err(QmaskError::InvalidLabel { d, k, l });
        }
        Ok(BellLabel { d, k, l })
    }
}

/// Primitive d-th root of unity e^{2πi/d}, raised to `pow`.
pub fn omega(d: usize, pow: i64) -> Complex64 {
    let angle = 2.0 * std::f64::consts::PI * pow as f64 / d as f64;
    Complex64::new(angle.cos(), angle.sin())
}

/// Shift-up operator X|k⟩ = |k ⊕_d 1⟩.
pub fn shift_x(d: usize) -> Result<Operator> {
    if d < 2 {
        return Err(QmaskError::DimTooSmall(d));
    }
    let mat = DMatrix::from_fn(d, d, |i, j| {
        if i == (j + 1) % d {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Operator::single_site(d, mat)
}

/// Clock operator Z|l⟩ = ω^l|l⟩.
pub fn phase_z(d: usize) -> Result<Operator> {
    if d < 2 {
        return Err(QmaskError::DimTooSmall(d));
    }
    let mat = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            omega(d, i as i64)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Operator::single_site(d, mat)
}

/// Fourier basis state (1/√d) Σ_i ω^{ik}|i⟩.
pub fn fourier_state(d: usize, k: usize) -> Result<PureState> {
    if k >= d {
        return Err(QmaskError::InvalidLabel { d, k, l: 0 });
    }
    let scale = 1.0 / (d as f64).sqrt();
    let amp = (0..d).map(|i| omega(d, (i * k) as i64) * scale).collect();
    PureState::new(RegisterShape::new(vec![d])?, amp)
}

/// Two-site controlled shift |c⟩|t⟩ → |c⟩|t ⊕_d direction·c⟩
/// (control first, target second).
pub fn cshift(d: usize, direction: i8) -> Result<Operator> {
    if d < 2 {
        return Err(QmaskError::DimTooSmall(d));
    }
    if direction != 1 && direction != -1 {
        return Err(QmaskError::InvalidDirection(direction));
    }
    let dim = d * d;
    let mut mat = DMatrix::zeros(dim, dim);
    for c in 0..d {
        for t in 0..d {
            let shifted = (t + d + (direction as i64 * c as i64).rem_euclid(d as i64) as usize) % d;
            mat[(c * d + shifted, c * d + t)] = Complex64::new(1.0, 0.0);
        }
    }
    Operator::new(RegisterShape::new(vec![d, d])?, mat, true)
}

/// Generalized Bell state |φ_kl⟩ = (1/√d) Σ_i ω^{ik} |l ⊕_d i⟩|i⟩.
pub fn bell_state(label: BellLabel) -> Result<PureState> {
    let BellLabel { d, k, l } = label;
    let scale = 1.0 / (d as f64).sqrt();
    let mut amp = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        amp[((l + i) % d) * d + i] = omega(d, (i * k) as i64) * scale;
    }
    PureState::new(RegisterShape::new(vec![d, d])?, amp)
}

/// Conditional state |χ_kl⟩ = Σ_i α_{l ⊕_d i} ω^{−ik} |i⟩ for a single-site
/// input with amplitudes α.
pub fn chi_state(label: BellLabel, input: &PureState) -> Result<PureState> {
    let BellLabel { d, k, l } = label;
    if input.shape().dims() != [d] {
        return Err(QmaskError::ShapeMismatch);
    }
    let alpha = input.amplitudes();
    let amp = (0..d)
        .map(|i| alpha[(l + i) % d] * omega(d, -((i * k) as i64)))
        .collect();
    PureState::new(RegisterShape::new(vec![d])?, amp)
}

/// Teleportation correction R_kl = X^l·Z^k, the unitary with
/// R_kl|χ_kl⟩ = |χ⟩ for every input χ.
pub fn correction_weyl(label: BellLabel) -> Result<Operator> {
    let x = shift_x(label.d)?;
    let z = phase_z(label.d)?;
    x.pow(label.l).compose(&z.pow(label.k))
}

/// Two-site normalizer A = U^l ⊗ (V†)^k with U the shift-down operator,
/// mapping |l⟩⊗|ψ_k⟩ to |0⟩⊗|ψ_0⟩ (and |φ_kl⟩ to |φ_00⟩).
pub fn alice_normalizer(label: BellLabel) -> Result<Operator> {
    let u_down = shift_x(label.d)?.dagger();
    let v_dag = phase_z(label.d)?.dagger();
    u_down.pow(label.l).kron(&v_dag.pow(label.k))
}
