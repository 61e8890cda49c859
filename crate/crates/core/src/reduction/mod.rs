//! Exponent calculus, resonance curve, leading averaged coefficients,
//! locked phases, Duffing thresholds and stochastic-stability horizons.

mod analysis;
mod averages;
mod curve;
mod exponent;
mod exponents;
mod phases;
mod spec;
mod threshold;

pub use analysis::{analyze, analyze_with, AnalysisOptions, ResonanceAnalysis};
pub use averages::{leading_averages, AveragedCoefficients, THETA_GRID};
pub use curve::{resonance_curve, ResonanceTrack};
pub use exponent::Exponent;
pub use exponents::{exponents, Exponents, HorizonClass, HorizonEstimate};
pub use phases::{classify, find_locked_phases, principal_stable, LockClass, LockedPhase};
pub use spec::{ForcingSpec, NoiseSpec, PolyTerm};
pub use threshold::{duffing_threshold, duffing_threshold_with, ThresholdCase};
