use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::register::RegisterShape;
use crate::state::PureState;

/// Haar-uniform random single-site pure state: d independent standard
/// complex Gaussian amplitudes, normalized.
pub fn random_pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<PureState> {
    let amp: Vec<Complex64> = (0..d)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    PureState::new(RegisterShape::new(vec![d])?, amp)
}
