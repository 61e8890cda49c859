//! Resonance capture in pendulum-type oscillators driven by a decaying
//! chirped-frequency excitation and multiplicative white noise.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: singular and periodic quadrature, bracketed root finding,
//!   trigonometric series and keyed random streams.
//! * [`oscillator`]: polynomial potentials, turning points, period and
//!   frequency, action-angle maps and their inverse, leading-order orbits.
//! * [`reduction`]: exponent calculus, resonance curve, averaged leading
//!   coefficients, locked phases and their classification, stochastic
//!   stability horizons.
//! * [`simulate`]: Itô integration of the full system, the truncated averaged
//!   system, observable extraction and capture detection.
//! * [`harness`]: scenarios, Monte Carlo ensembles, figure data and manifests.

// Negated float comparisons are deliberate: they reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod numerics;
pub mod oscillator;
pub mod reduction;
pub mod simulate;

pub use error::{Error, Result};
pub use harness::{EnsembleStats, Scenario};
pub use numerics::{QuadratureSpec, RandomStream, TrigSeries};
pub use oscillator::{LeadingOrbit, OrbitTable, Potential};
pub use reduction::{
    Exponent, ForcingSpec, HorizonClass, LockClass, NoiseSpec, ResonanceAnalysis,
};
pub use simulate::{CaptureVerdict, DtControl, SamplePath, SdeProblem};
