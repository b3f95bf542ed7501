//! Dense qudit state-vector mechanics plus the masking and teleportation
//! protocols built on top of them: two four-partite maskers (with d²- and
//! d-level apparatus), the tripartite controlled-shift masker, their
//! unmaskers, standard qudit teleportation, and a verification harness
//! that checks every masking claim numerically.

pub mod density;
pub mod error;
pub mod gates;
pub mod maskers;
pub mod operator;
pub mod random;
pub mod register;
pub mod state;
pub mod teleport;
pub mod verify;

pub use density::{hermitian_eigenvalues, trace_distance, DensityMatrix};
pub use error::{QmaskError, Result};
pub use gates::BellLabel;
pub use maskers::{MaskScheme, SchemeId};
pub use operator::Operator;
pub use register::{set_max_amplitudes, RegisterShape, DEFAULT_MAX_AMPLITUDES};
pub use state::{
    apply_local, fidelity_pure, make_state, measure_site, partial_trace, tensor,
    MeasurementRecord, PureState,
};
pub use verify::{masking_report, no_masking_demo, step1_rho1_check, VerificationReport};
