use num_complex::Complex64;
use rand::Rng;

use crate::density::DensityMatrix;
use crate::error::{QmaskError, Result};
use crate::gates::{alice_normalizer, bell_state, chi_state, correction_weyl, cshift, BellLabel};
use crate::register::RegisterShape;
use crate::state::{
    apply_local, fidelity_pure, measure_site, overlap_extract, partial_trace, project_site,
    tensor, MeasurementRecord, PureState,
};

/// Residual-norm threshold separating protocol inverses from garbage input.
const RANGE_RESIDUAL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeId {
    FourHeavy,
    Four,
    FourLiteralQutrit,
    Three,
}

impl SchemeId {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeId::FourHeavy => "four-heavy",
            SchemeId::Four => "four",
            SchemeId::FourLiteralQutrit => "four-literal-qutrit",
            SchemeId::Three => "three",
        }
    }

    pub fn parse(name: &str) -> Option<SchemeId> {
        match name {
            "four-heavy" => Some(SchemeId::FourHeavy),
            "four" => Some(SchemeId::Four),
            "four-literal-qutrit" => Some(SchemeId::FourLiteralQutrit),
            "three" => Some(SchemeId::Three),
            _ => None,
        }
    }
}

impl std::fmt::Display for SchemeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A masking scheme together with its input dimension.
#[derive(Debug, Clone, Copy)]
pub struct MaskScheme {
    pub id: SchemeId,
    pub d: usize,
}

impl MaskScheme {
    pub fn new(id: SchemeId, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(QmaskError::DimTooSmall(d));
        }
        if id == SchemeId::FourLiteralQutrit && d != 3 {
            return Err(QmaskError::InvalidScheme {
                scheme: id.name().to_string(),
                d,
            });
        }
        Ok(MaskScheme { id, d })
    }

    pub fn output_shape(&self) -> Result<RegisterShape> {
        let d = self.d;
        match self.id {
            SchemeId::FourHeavy => RegisterShape::new(vec![d * d, d, d, d]),
            SchemeId::Four | SchemeId::FourLiteralQutrit => RegisterShape::new(vec![d, d, d, d]),
            SchemeId::Three => RegisterShape::new(vec![d, d, d]),
        }
    }

    pub fn mask(&self, input: &PureState) -> Result<PureState> {
        match self.id {
            SchemeId::FourHeavy => mask_four_heavy(self.d, input),
            SchemeId::Four => mask_four(self.d, input),
            SchemeId::FourLiteralQutrit => mask_four_literal_qutrit(input),
            SchemeId::Three => mask_three(self.d, input),
        }
    }

    /// Round-trip fidelity of the scheme's unmasker. For the heavy scheme
    /// this is the minimum over all forced apparatus outcomes.
    pub fn recover_fidelity(&self, input: &PureState) -> Result<f64> {
        let masked = self.mask(input)?;
        match self.id {
            SchemeId::Four => fidelity_pure(&unmask_four(&masked)?, input),
            SchemeId::Three => fidelity_pure(&unmask_three(&masked)?, input),
            SchemeId::FourLiteralQutrit => {
                fidelity_pure(&unmask_four_literal_qutrit(&masked)?, input)
            }
            SchemeId::FourHeavy => {
                let mut min_f = f64::INFINITY;
                for nu in 0..self.d * self.d {
                    let (recovered, _p) = unmask_four_heavy_forced(&masked, nu)?;
                    min_f = min_f.min(fidelity_pure(&recovered, input)?);
                }
                Ok(min_f)
            }
        }
    }
}

fn check_single_site(d: usize, input: &PureState) -> Result<()> {
    if input.shape().dims() != [d] {
        return Err(QmaskError::ShapeMismatch);
    }
    Ok(())
}

fn check_shape(state: &PureState, dims: &[usize]) -> Result<()> {
    if state.shape().dims() != dims {
        return Err(QmaskError::ShapeMismatch);
    }
    Ok(())
}

/// Four-partite masker with a d²-level apparatus:
/// |Ω⟩ = (1/d) Σ_{k,l} |dl+k⟩₀ |φ_kl⟩₁₂ |χ_kl⟩₃.
pub fn mask_four_heavy(d: usize, input: &PureState) -> Result<PureState> {
    check_single_site(d, input)?;
    let shape = RegisterShape::new(vec![d * d, d, d, d])?;
    let mut amp = vec![Complex64::new(0.0, 0.0); shape.total_dim()];
    let block = d * d * d;
    let scale = 1.0 / d as f64;
    for k in 0..d {
        for l in 0..d {
            let label = BellLabel::new(d, k, l)?;
            let bell = bell_state(label)?;
            let chi = chi_state(label, input)?;
            let nu = d * l + k;
            for (b_idx, b_amp) in bell.amplitudes().iter().enumerate() {
                if b_amp.norm_sqr() == 0.0 {
                    continue;
                }
                for (i3, c_amp) in chi.amplitudes().iter().enumerate() {
                    amp[nu * block + b_idx * d + i3] += scale * b_amp * c_amp;
                }
            }
        }
    }
    PureState::new(shape, amp)
}

/// Four-partite masker with a d-level apparatus. Pipeline: attach the
/// reference Bell channel, Bell-factorize with a shift-down controlled
/// shift (control system 2, target system 1), then copy system 1 onto a
/// fresh apparatus site. Closed form:
/// (1/√d) Σ_{k,m} α_k |k⊖m⟩₀|k⊖m⟩₁|m⟩₂|m⟩₃.
pub fn mask_four(d: usize, input: &PureState) -> Result<PureState> {
    check_single_site(d, input)?;
    let channel = bell_state(BellLabel::new(d, 0, 0)?)?;
    let st = tensor(input, &channel)?;
    let st = apply_local(&st, &cshift(d, -1)?, &[1, 0])?;
    let st = tensor(&PureState::site_basis(d, 0)?, &st)?;
    apply_local(&st, &cshift(d, 1)?, &[1, 0])
}

/// The literal qutrit apparatus superposition as displayed in the source
/// protocol, where the apparatus label copies the coefficient index. Its
/// apparatus marginal is diag(|α₀|²,|α₁|²,|α₂|²) — input dependent — which
/// is exactly the discrepancy this constructor exists to quantify.
pub fn mask_four_literal_qutrit(input: &PureState) -> Result<PureState> {
    check_single_site(3, input)?;
    // rows: (apparatus a, fourier index, site-3 digit, site-1 digit)
    const TERMS: [(usize, usize, usize, usize); 9] = [
        (0, 0, 0, 0),
        (0, 1, 2, 1),
        (0, 2, 1, 2),
        (1, 2, 1, 0),
        (1, 0, 0, 1),
        (1, 1, 2, 2),
        (2, 1, 2, 0),
        (2, 2, 1, 1),
        (2, 0, 0, 2),
    ];
    let shape = RegisterShape::new(vec![3, 3, 3, 3])?;
    let mut amp = vec![Complex64::new(0.0, 0.0); shape.total_dim()];
    let alpha = input.amplitudes();
    let scale = 1.0 / 3f64.sqrt();
    for &(a, psi, s3, s1) in &TERMS {
        let psi_state = crate::gates::fourier_state(3, psi)?;
        for (s2, p_amp) in psi_state.amplitudes().iter().enumerate() {
            amp[a * 27 + s1 * 9 + s2 * 3 + s3] += scale * alpha[a] * p_amp;
        }
    }
    PureState::new(shape, amp)
}

/// Tripartite masker: controlled shift-up from system 2 onto system 1,
/// then from system 1 onto system 2. Closed form:
/// (1/√d) Σ_{k,m} α_k |k⊕m⟩₁|k⊕2m⟩₂|m⟩₃.
///
/// Masks all three marginals for odd d; for even d the site-2 marginal is
/// input dependent (the qubit case reduces to perfectly distinguishable
/// marginals, the no-masking failure).
pub fn mask_three(d: usize, input: &PureState) -> Result<PureState> {
    check_single_site(d, input)?;
    let channel = bell_state(BellLabel::new(d, 0, 0)?)?;
    let st = tensor(input, &channel)?;
    let st = apply_local(&st, &cshift(d, 1)?, &[1, 0])?;
    apply_local(&st, &cshift(d, 1)?, &[0, 1])
}

fn range_check(residual: f64) -> Result<()> {
    if residual > RANGE_RESIDUAL {
        return Err(QmaskError::NotInRange(residual));
    }
    Ok(())
}

/// Inverse of `mask_four`: uncopy the apparatus, undo the Bell
/// factorization, and peel the recovered state off system 1. Fails if the
/// input is not in the isometry's range.
pub fn unmask_four(masked: &PureState) -> Result<PureState> {
    let dims = masked.shape().dims().to_vec();
    if dims.len() != 4 || dims.iter().any(|&x| x != dims[0]) {
        return Err(QmaskError::ShapeMismatch);
    }
    let d = dims[0];
    let st = apply_local(masked, &cshift(d, -1)?, &[1, 0])?;
    let st = apply_local(&st, &cshift(d, 1)?, &[2, 1])?;
    let reference = tensor(
        &PureState::site_basis(d, 0)?,
        &bell_state(BellLabel::new(d, 0, 0)?)?,
    )?;
    let (v, residual) = overlap_extract(&st, 1, &reference)?;
    range_check(residual)?;
    PureState::new(RegisterShape::new(vec![d])?, v)
}

/// Inverse of `mask_four_literal_qutrit`, by contraction against the
/// images of the basis states.
pub fn unmask_four_literal_qutrit(masked: &PureState) -> Result<PureState> {
    check_shape(masked, &[3, 3, 3, 3])?;
    let mut alpha = Vec::with_capacity(3);
    let mut images = Vec::with_capacity(3);
    for a in 0..3 {
        let image = mask_four_literal_qutrit(&PureState::site_basis(3, a)?)?;
        let inner: Complex64 = image
            .amplitudes()
            .iter()
            .zip(masked.amplitudes())
            .map(|(x, y)| x.conj() * y)
            .sum();
        alpha.push(inner);
        images.push(image);
    }
    // residual against the reconstruction, entrywise to avoid cancellation
    let mut residual_sq = 0.0f64;
    for (idx, m) in masked.amplitudes().iter().enumerate() {
        let mut recon = Complex64::new(0.0, 0.0);
        for a in 0..3 {
            recon += alpha[a] * images[a].amplitudes()[idx];
        }
        residual_sq += (m - recon).norm_sqr();
    }
    range_check(residual_sq.sqrt())?;
    PureState::new(RegisterShape::new(vec![3])?, alpha)
}

fn decode_heavy_shape(masked: &PureState) -> Result<usize> {
    let dims = masked.shape().dims();
    if dims.len() != 4 || dims[1] != dims[2] || dims[1] != dims[3] || dims[0] != dims[1] * dims[1] {
        return Err(QmaskError::ShapeMismatch);
    }
    Ok(dims[1])
}

/// Measures the apparatus with a forced outcome ν (decoded as k = ν mod d,
/// l = ν div d), applies the Weyl correction on system 3 and the
/// normalizer on systems 1-2, and extracts the recovered state from
/// system 3. Returns the recovered state and the outcome probability.
pub fn unmask_four_heavy_forced(masked: &PureState, nu: usize) -> Result<(PureState, f64)> {
    let d = decode_heavy_shape(masked)?;
    let rec = project_site(masked, 0, nu)?;
    let k = nu % d;
    let l = nu / d;
    let label = BellLabel::new(d, k, l)?;
    let st = apply_local(&rec.post_state, &correction_weyl(label)?, &[3])?;
    let st = apply_local(&st, &alice_normalizer(label)?, &[1, 2])?;
    let reference = tensor(
        &PureState::site_basis(d * d, nu)?,
        &bell_state(BellLabel::new(d, 0, 0)?)?,
    )?;
    let (v, residual) = overlap_extract(&st, 3, &reference)?;
    range_check(residual)?;
    Ok((PureState::new(RegisterShape::new(vec![d])?, v)?, rec.probability))
}

/// Sampled-outcome unmasker for the heavy scheme.
pub fn unmask_four_heavy<R: Rng + ?Sized>(
    masked: &PureState,
    rng: &mut R,
) -> Result<(PureState, MeasurementRecord)> {
    decode_heavy_shape(masked)?;
    let record = measure_site(masked, 0, rng)?;
    let (recovered, _p) = unmask_four_heavy_forced(masked, record.outcome)?;
    Ok((recovered, record))
}

/// Inverse of `mask_three`: undo both controlled shifts and peel the
/// recovered state off system 1.
pub fn unmask_three(masked: &PureState) -> Result<PureState> {
    let (v, residual) = unmask_three_components(masked)?;
    range_check(residual)?;
    let d = masked.shape().dims()[0];
    PureState::new(RegisterShape::new(vec![d])?, v)
}

fn unmask_three_components(masked: &PureState) -> Result<(Vec<Complex64>, f64)> {
    let dims = masked.shape().dims().to_vec();
    if dims.len() != 3 || dims.iter().any(|&x| x != dims[0]) {
        return Err(QmaskError::ShapeMismatch);
    }
    let d = dims[0];
    let st = apply_local(masked, &cshift(d, -1)?, &[0, 1])?;
    let st = apply_local(&st, &cshift(d, -1)?, &[1, 0])?;
    let reference = bell_state(BellLabel::new(d, 0, 0)?)?;
    overlap_extract(&st, 0, &reference)
}

/// Result of routing the tripartite unmasker to system 2 or 3.
#[derive(Debug, Clone)]
pub struct UnmaskToReport {
    pub target: usize,
    /// Reduced state of the target site after the gate pair.
    pub reduced: DensityMatrix,
    /// ⟨χ|ρ_target|χ⟩ against the supplied original input.
    pub fidelity: f64,
}

/// Applies the rotated controlled-shift pair that is claimed to move the
/// masked information to system 2 or 3, and reports the measured fidelity
/// with the original input rather than assuming recovery.
pub fn unmask_three_to(
    masked: &PureState,
    target: usize,
    original: &PureState,
) -> Result<UnmaskToReport> {
    let (_v, residual) = unmask_three_components(masked)?;
    range_check(residual)?;
    let d = masked.shape().dims()[0];
    check_single_site(d, original)?;
    let st = match target {
        // first C₂₃, then C†₃₂ (site indices are 0-based: systems 1,2,3 → 0,1,2)
        2 => {
            let st = apply_local(masked, &cshift(d, -1)?, &[1, 2])?;
            apply_local(&st, &cshift(d, -1)?, &[2, 1])?
        }
        // first C₁₃, then C†₃₁
        3 => {
            let st = apply_local(masked, &cshift(d, -1)?, &[0, 2])?;
            apply_local(&st, &cshift(d, -1)?, &[2, 0])?
        }
        t => return Err(QmaskError::InvalidTarget(t)),
    };
    let reduced = partial_trace(&st, &[target - 1])?;
    let fidelity = reduced.overlap_with(original.amplitudes())?;
    Ok(UnmaskToReport {
        target,
        reduced,
        fidelity,
    })
}
