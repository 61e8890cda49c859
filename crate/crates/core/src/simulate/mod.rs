//! Path integration of the full stochastic system, the truncated averaged
//! system, slow observables and the capture detector.

mod capture;
mod observe;
mod sde;
mod truncated;

pub use capture::{detect_capture, CaptureThresholds, CaptureVerdict};
pub use observe::{observables, track_point, Observables};
pub use sde::{integrate_sde, sde_step, DtControl, SamplePath, SdeProblem, OVERFLOW_GUARD};
pub use truncated::{integrate_truncated, truncated_rhs, TruncatedOptions, TruncatedPath};
