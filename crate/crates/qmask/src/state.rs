use num_complex::Complex64;
use rand::Rng;

use crate::density::DensityMatrix;
use crate::error::{QmaskError, Result};
use crate::operator::Operator;
use crate::register::RegisterShape;

/// Outcomes with Born probability below this are never sampled.
const MIN_OUTCOME_PROBABILITY: f64 = 1e-15;

/// Unit-norm complex amplitude array over a `RegisterShape`, row-major with
/// site 0 most significant.
#[derive(Debug, Clone)]
pub struct PureState {
    shape: RegisterShape,
    amp: Vec<Complex64>,
}

/// Result of a projective measurement on a single site.
#[derive(Debug, Clone)]
pub struct MeasurementRecord {
    pub site: usize,
    pub outcome: usize,
    pub probability: f64,
    pub post_state: PureState,
}

impl PureState {
    /// Normalizing constructor; rejects zero vectors and length mismatches.
    pub fn new(shape: RegisterShape, amp: Vec<Complex64>) -> Result<Self> {
        if amp.len() != shape.total_dim() {
            return Err(QmaskError::LengthMismatch {
                expected: shape.total_dim(),
                got: amp.len(),
            });
        }
        let norm = l2_norm(&amp);
        if norm <= 0.0 || !norm.is_finite() {
            return Err(QmaskError::ZeroNorm);
        }
        let amp = amp.into_iter().map(|a| a / norm).collect();
        Ok(PureState { shape, amp })
    }

    /// Computational basis state |index⟩ of the register.
    pub fn basis(shape: RegisterShape, index: usize) -> Result<Self> {
        let dim = shape.total_dim();
        if index >= dim {
            return Err(QmaskError::OutcomeOutOfRange(index, dim));
        }
        let mut amp = vec![Complex64::new(0.0, 0.0); dim];
        amp[index] = Complex64::new(1.0, 0.0);
        Ok(PureState { shape, amp })
    }

    /// Single-site basis state |k⟩ in dimension d.
    pub fn site_basis(d: usize, k: usize) -> Result<Self> {
        PureState::basis(RegisterShape::new(vec![d])?, k)
    }

    pub fn shape(&self) -> &RegisterShape {
        &self.shape
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amp
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.amp)
    }

    pub fn num_sites(&self) -> usize {
        self.shape.num_sites()
    }

    /// L2 norm of the amplitude difference with another state.
    pub fn distance_to(&self, other: &PureState) -> Result<f64> {
        if self.shape != other.shape {
            return Err(QmaskError::ShapeMismatch);
        }
        let sq: f64 = self
            .amp
            .iter()
            .zip(&other.amp)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok(sq.sqrt())
    }
}

fn l2_norm(amp: &[Complex64]) -> f64 {
    amp.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Norm of a raw amplitude sequence, for callers that must reject inputs
/// deviating from unit norm before construction.
pub fn input_norm(amp: &[Complex64]) -> f64 {
    l2_norm(amp)
}

/// Builds a normalized state from raw amplitudes.
pub fn make_state(shape: RegisterShape, amp: Vec<Complex64>) -> Result<PureState> {
    PureState::new(shape, amp)
}

/// Tensor product; `a` becomes the more significant sub-register.
pub fn tensor(a: &PureState, b: &PureState) -> Result<PureState> {
    let shape = a.shape.concat(&b.shape)?;
    let mut amp = Vec::with_capacity(shape.total_dim());
    for x in &a.amp {
        for y in &b.amp {
            amp.push(x * y);
        }
    }
    Ok(PureState { shape, amp })
}

/// Offsets of the basis vectors of the sub-register spanned by `sites`
/// (row-major over the site order given), and the base offsets of the
/// complementary sites.
fn subspace_offsets(shape: &RegisterShape, sites: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let dims = shape.dims();
    let strides = shape.strides();

    let expand = |selected: &[usize]| -> Vec<usize> {
        let count: usize = selected.iter().map(|&s| dims[s]).product();
        let mut offsets = Vec::with_capacity(count);
        for mut j in 0..count {
            let mut off = 0;
            for &s in selected.iter().rev() {
                off += (j % dims[s]) * strides[s];
                j /= dims[s];
            }
            offsets.push(off);
        }
        offsets
    };

    let rest: Vec<usize> = (0..dims.len()).filter(|s| !sites.contains(s)).collect();
    (expand(sites), expand(&rest))
}

fn validate_sites(shape: &RegisterShape, sites: &[usize]) -> Result<()> {
    for (i, &s) in sites.iter().enumerate() {
        if s >= shape.num_sites() {
            return Err(QmaskError::SiteOutOfRange(s, shape.num_sites()));
        }
        if sites[..i].contains(&s) {
            return Err(QmaskError::RepeatedSite(s));
        }
    }
    Ok(())
}

/// Applies `op` on the listed sites (identity elsewhere). The first listed
/// site is the most significant index of the operator's own register.
pub fn apply_local(state: &PureState, op: &Operator, sites: &[usize]) -> Result<PureState> {
    validate_sites(&state.shape, sites)?;
    let dims = state.shape.dims();
    let op_dims = op.arity_shape().dims();
    if sites.len() != op_dims.len() || sites.iter().zip(op_dims).any(|(&s, &d)| dims[s] != d) {
        return Err(QmaskError::OperatorShapeMismatch);
    }

    let (sel, rest) = subspace_offsets(&state.shape, sites);
    let d_op = sel.len();
    let mat = op.mat();
    let mut out = state.amp.clone();
    let mut buf = vec![Complex64::new(0.0, 0.0); d_op];
    for &base in &rest {
        for (j, &off) in sel.iter().enumerate() {
            buf[j] = state.amp[base + off];
        }
        for (i, &off) in sel.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, b) in buf.iter().enumerate() {
                acc += mat[(i, j)] * b;
            }
            out[base + off] = acc;
        }
    }
    Ok(PureState {
        shape: state.shape.clone(),
        amp: out,
    })
}

/// Reduced density matrix over the kept sites (in the order given).
pub fn partial_trace(state: &PureState, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(QmaskError::SiteOutOfRange(0, 0));
    }
    validate_sites(&state.shape, keep)?;
    let (kept, rest) = subspace_offsets(&state.shape, keep);
    let dk = kept.len();
    let mut mat = nalgebra::DMatrix::zeros(dk, dk);
    for &r in &rest {
        for (a, &ka) in kept.iter().enumerate() {
            let va = state.amp[ka + r];
            if va.norm_sqr() == 0.0 {
                continue;
            }
            for (b, &kb) in kept.iter().enumerate() {
                mat[(a, b)] += va * state.amp[kb + r].conj();
            }
        }
    }
    DensityMatrix::new(mat)
}

/// Born probabilities of the outcomes of measuring `site`.
pub fn site_probabilities(state: &PureState, site: usize) -> Result<Vec<f64>> {
    validate_sites(&state.shape, &[site])?;
    let d = state.shape.dims()[site];
    let mut probs = vec![0.0f64; d];
    for (idx, a) in state.amp.iter().enumerate() {
        probs[state.shape.digit(idx, site)] += a.norm_sqr();
    }
    Ok(probs)
}

/// Projects onto outcome `outcome` of `site` and renormalizes.
pub fn project_site(state: &PureState, site: usize, outcome: usize) -> Result<MeasurementRecord> {
    let probs = site_probabilities(state, site)?;
    if outcome >= probs.len() {
        return Err(QmaskError::OutcomeOutOfRange(outcome, probs.len()));
    }
    let p = probs[outcome];
    if p < MIN_OUTCOME_PROBABILITY {
        return Err(QmaskError::OutcomeOutOfRange(outcome, probs.len()));
    }
    let scale = 1.0 / p.sqrt();
    let amp = state
        .amp
        .iter()
        .enumerate()
        .map(|(idx, a)| {
            if state.shape.digit(idx, site) == outcome {
                a * scale
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Ok(MeasurementRecord {
        site,
        outcome,
        probability: p,
        post_state: PureState {
            shape: state.shape.clone(),
            amp,
        },
    })
}

/// Projective measurement of a single site, sampled from the supplied
/// deterministic random source.
pub fn measure_site<R: Rng + ?Sized>(
    state: &PureState,
    site: usize,
    rng: &mut R,
) -> Result<MeasurementRecord> {
    let probs = site_probabilities(state, site)?;
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut chosen = None;
    for (o, &p) in probs.iter().enumerate() {
        if p < MIN_OUTCOME_PROBABILITY {
            continue;
        }
        acc += p;
        chosen = Some(o);
        if u < acc {
            break;
        }
    }
    let outcome = chosen.expect("probabilities sum to 1");
    project_site(state, site, outcome)
}

/// |⟨a|b⟩|² for pure states of equal shape.
pub fn fidelity_pure(a: &PureState, b: &PureState) -> Result<f64> {
    if a.shape != b.shape {
        return Err(QmaskError::ShapeMismatch);
    }
    let inner: Complex64 = a
        .amp
        .iter()
        .zip(&b.amp)
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(inner.norm_sqr())
}

/// Contracts `reference` (a state over every site except `keep`, in
/// ascending site order) against `state`. Returns the unnormalized vector
/// left on `keep` and the residual norm outside the reference component.
pub fn overlap_extract(
    state: &PureState,
    keep: usize,
    reference: &PureState,
) -> Result<(Vec<Complex64>, f64)> {
    validate_sites(&state.shape, &[keep])?;
    let others: Vec<usize> = (0..state.num_sites()).filter(|&s| s != keep).collect();
    let other_dims: Vec<usize> = others.iter().map(|&s| state.shape.dims()[s]).collect();
    if reference.shape.dims() != other_dims.as_slice() {
        return Err(QmaskError::ShapeMismatch);
    }
    let (kept, rest) = subspace_offsets(&state.shape, &[keep]);
    let mut v = vec![Complex64::new(0.0, 0.0); kept.len()];
    for (r_idx, &r) in rest.iter().enumerate() {
        let w = reference.amp[r_idx].conj();
        if w.norm_sqr() == 0.0 {
            continue;
        }
        for (j, &k) in kept.iter().enumerate() {
            v[j] += w * state.amp[k + r];
        }
    }
    // Residual of the component orthogonal to reference⊗v, computed
    // entrywise to avoid cancellation in ‖ψ‖² − ‖v‖².
    let mut residual_sq = 0.0f64;
    for (r_idx, &r) in rest.iter().enumerate() {
        let w = reference.amp[r_idx];
        for (j, &k) in kept.iter().enumerate() {
            residual_sq += (state.amp[k + r] - w * v[j]).norm_sqr();
        }
    }
    Ok((v, residual_sq.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn make_state_normalizes() {
        let s = make_state(
            RegisterShape::new(vec![3]).unwrap(),
            vec![c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        let r = 1.0 / 3f64.sqrt();
        for a in s.amplitudes() {
            assert!((a.re - r).abs() < 1e-12 && a.im.abs() < 1e-12);
        }
    }

    #[test]
    fn make_state_rejects_zero_and_mismatch() {
        let shape = RegisterShape::new(vec![3]).unwrap();
        assert!(make_state(shape.clone(), vec![c(0.0, 0.0); 3]).is_err());
        assert!(make_state(shape, vec![c(1.0, 0.0); 2]).is_err());
    }

    #[test]
    fn tensor_of_basis_states() {
        let a = PureState::site_basis(2, 0).unwrap();
        let b = PureState::site_basis(2, 1).unwrap();
        let ab = tensor(&a, &b).unwrap();
        assert!((ab.amplitudes()[1].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shift_on_first_site_of_two() {
        let zz = tensor(
            &PureState::site_basis(3, 0).unwrap(),
            &PureState::site_basis(3, 0).unwrap(),
        )
        .unwrap();
        let x = gates::shift_x(3).unwrap();
        let out = apply_local(&zz, &x, &[0]).unwrap();
        // |1⟩⊗|0⟩ sits at index 3
        assert!((out.amplitudes()[3].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn apply_local_rejects_repeated_site() {
        let s = make_state(
            RegisterShape::new(vec![2, 2]).unwrap(),
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        let cx = gates::cshift(2, 1).unwrap();
        assert!(apply_local(&s, &cx, &[0, 0]).is_err());
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let bell = make_state(
            RegisterShape::new(vec![2, 2]).unwrap(),
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        let rho = partial_trace(&bell, &[0]).unwrap();
        let mm = crate::density::DensityMatrix::maximally_mixed(2);
        assert!(crate::density::trace_distance(&rho, &mm).unwrap() < 1e-12);
    }

    #[test]
    fn keep_all_gives_pure_projector() {
        let bell = make_state(
            RegisterShape::new(vec![2, 2]).unwrap(),
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        let rho = partial_trace(&bell, &[0, 1]).unwrap();
        let proj = crate::density::DensityMatrix::pure_projector(bell.amplitudes());
        assert!(crate::density::trace_distance(&rho, &proj).unwrap() < 1e-12);
    }

    #[test]
    fn measure_deterministic_on_basis_state() {
        let s = PureState::site_basis(3, 1).unwrap();
        let mut rng = rand::rngs::mock::StepRng::new(0, 0);
        let rec = measure_site(&s, 0, &mut rng).unwrap();
        assert_eq!(rec.outcome, 1);
        assert!((rec.probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fidelity_examples() {
        let zero = PureState::site_basis(2, 0).unwrap();
        let one = PureState::site_basis(2, 1).unwrap();
        let plus = make_state(
            RegisterShape::new(vec![2]).unwrap(),
            vec![c(1.0, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        assert!((fidelity_pure(&zero, &zero).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity_pure(&zero, &one).unwrap() < 1e-12);
        assert!((fidelity_pure(&zero, &plus).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn overlap_extract_recovers_factor() {
        let chi = make_state(
            RegisterShape::new(vec![2]).unwrap(),
            vec![c(0.6, 0.0), c(0.0, 0.8)],
        )
        .unwrap();
        let bell = make_state(
            RegisterShape::new(vec![2, 2]).unwrap(),
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        let total = tensor(&bell, &chi).unwrap();
        let (v, residual) = overlap_extract(&total, 2, &bell).unwrap();
        assert!(residual < 1e-12);
        assert!((v[0] - chi.amplitudes()[0]).norm() < 1e-12);
        assert!((v[1] - chi.amplitudes()[1]).norm() < 1e-12);
    }
}
