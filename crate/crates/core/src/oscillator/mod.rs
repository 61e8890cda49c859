//! Orbit machinery for polynomial potentials in the outer region above the
//! separatrix.

mod leading;
mod level;
mod potential;
mod table;

pub use leading::{duffing_fourier, leading_period, DuffingFourier, LeadingOrbit};
pub use level::Level;
pub use potential::Potential;
pub use table::OrbitTable;

/// Fixed RK4 steps per period for orbit integration.
pub const STEPS_PER_PERIOD: usize = 4096;
/// Uniform phase samples per orbit.
pub const DEFAULT_PHI_COUNT: usize = 512;
/// Geometric radius-grid density.
pub const DEFAULT_RHO_PER_DECADE: usize = 64;
/// Relative energy drift above which an orbit integration is rejected.
pub const ENERGY_TOLERANCE: f64 = 1e-8;
