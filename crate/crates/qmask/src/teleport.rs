use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{QmaskError, Result};
use crate::gates::{bell_state, correction_weyl, BellLabel};
use crate::operator::Operator;
use crate::register::RegisterShape;
use crate::state::{apply_local, overlap_extract, tensor, PureState};

/// Outcome of a qudit teleportation run.
#[derive(Debug, Clone)]
pub struct TeleportOutcome {
    pub label: BellLabel,
    pub probability: f64,
    pub received: PureState,
}

/// L2 residual between input⊗|φ₀₀⟩ built directly and via the Bell/χ
/// decomposition (1/d) Σ_{kl} |φ_kl⟩|χ_kl⟩ — the identity underpinning the
/// masking construction. Note the decomposition places the Bell pair on
/// the first two sites and the conditional state on the third, i.e. it
/// expands |χ⟩₁⊗|φ₀₀⟩₂₃ re-read as sites (1,2) entangled against 3.
pub fn bell_decomposition_residual(d: usize, input: &PureState) -> Result<f64> {
    if input.shape().dims() != [d] {
        return Err(QmaskError::ShapeMismatch);
    }
    let direct = tensor(input, &bell_state(BellLabel::new(d, 0, 0)?)?)?;
    let shape = RegisterShape::new(vec![d, d, d])?;
    let mut amp = vec![Complex64::new(0.0, 0.0); shape.total_dim()];
    let scale = 1.0 / d as f64;
    for k in 0..d {
        for l in 0..d {
            let label = BellLabel::new(d, k, l)?;
            let bell = bell_state(label)?;
            let chi = crate::gates::chi_state(label, input)?;
            for (b_idx, b_amp) in bell.amplitudes().iter().enumerate() {
                if b_amp.norm_sqr() == 0.0 {
                    continue;
                }
                for (i3, c_amp) in chi.amplitudes().iter().enumerate() {
                    amp[b_idx * d + i3] += scale * b_amp * c_amp;
                }
            }
        }
    }
    let sq: f64 = direct
        .amplitudes()
        .iter()
        .zip(&amp)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    Ok(sq.sqrt())
}

/// Basis-change unitary on two sites whose action maps |φ_kl⟩ to the
/// computational pair |k⟩|l⟩, so a Bell measurement becomes two
/// computational measurements.
fn bell_measurement_unitary(d: usize) -> Result<Operator> {
    let dim = d * d;
    let mut mat = DMatrix::zeros(dim, dim);
    for k in 0..d {
        for l in 0..d {
            let bell = bell_state(BellLabel::new(d, k, l)?)?;
            for (col, amp) in bell.amplitudes().iter().enumerate() {
                mat[(k * d + l, col)] += amp.conj();
            }
        }
    }
    Operator::new(RegisterShape::new(vec![d, d])?, mat, true)
}

/// Exact Born probabilities of the d² Bell outcomes (index k·d + l) for
/// teleporting `input` through the reference channel.
pub fn outcome_probabilities(d: usize, input: &PureState) -> Result<Vec<f64>> {
    let st = pre_measurement_state(d, input)?;
    let mut probs = vec![0.0f64; d * d];
    for (idx, a) in st.amplitudes().iter().enumerate() {
        probs[idx / d] += a.norm_sqr();
    }
    Ok(probs)
}

fn pre_measurement_state(d: usize, input: &PureState) -> Result<PureState> {
    if input.shape().dims() != [d] {
        return Err(QmaskError::ShapeMismatch);
    }
    let st = tensor(input, &bell_state(BellLabel::new(d, 0, 0)?)?)?;
    apply_local(&st, &bell_measurement_unitary(d)?, &[0, 1])
}

fn complete(d: usize, st: &PureState, k: usize, l: usize, probability: f64) -> Result<TeleportOutcome> {
    let label = BellLabel::new(d, k, l)?;
    let st = apply_local(st, &correction_weyl(label)?, &[2])?;
    let reference = tensor(
        &PureState::site_basis(d, k)?,
        &PureState::site_basis(d, l)?,
    )?;
    let (v, residual) = overlap_extract(&st, 2, &reference)?;
    if residual > 1e-8 {
        return Err(QmaskError::NotInRange(residual));
    }
    Ok(TeleportOutcome {
        label,
        probability,
        received: PureState::new(RegisterShape::new(vec![d])?, v)?,
    })
}

/// Standard teleportation with the Bell outcome sampled from `rng`.
pub fn teleport<R: Rng + ?Sized>(
    d: usize,
    input: &PureState,
    rng: &mut R,
) -> Result<TeleportOutcome> {
    let st = pre_measurement_state(d, input)?;
    let first = crate::state::measure_site(&st, 0, rng)?;
    let second = crate::state::measure_site(&first.post_state, 1, rng)?;
    complete(
        d,
        &second.post_state,
        first.outcome,
        second.outcome,
        first.probability * second.probability,
    )
}

/// Teleportation conditioned on a chosen Bell outcome; the outcome's exact
/// probability is returned alongside.
pub fn teleport_forced(d: usize, input: &PureState, k: usize, l: usize) -> Result<TeleportOutcome> {
    let st = pre_measurement_state(d, input)?;
    let first = crate::state::project_site(&st, 0, k)?;
    let second = crate::state::project_site(&first.post_state, 1, l)?;
    complete(
        d,
        &second.post_state,
        k,
        l,
        first.probability * second.probability,
    )
}
