use serde::{Deserialize, Serialize};

use crate::numerics::{rk6_step, RandomStream, StreamId};
use crate::oscillator::Potential;
use crate::reduction::{ForcingSpec, NoiseSpec};
use crate::{Error, Result};

/// States with a component beyond this magnitude count as blown up.
pub const OVERFLOW_GUARD: f64 = 1e8;

/// Step-size policy `dt = min(dt_max, 2π / (osc_resolution · S'(t)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DtControl {
    pub dt_max: f64,
    pub osc_resolution: f64,
    /// Spacing of recorded samples; the integrator lands on each record time.
    pub record_interval: f64,
}

impl Default for DtControl {
    fn default() -> Self {
        Self { dt_max: 1e-2, osc_resolution: 40.0, record_interval: 1.0 }
    }
}

impl DtControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return Err(Error::Validation("dt_max must be positive".into()));
        }
        if !(self.osc_resolution >= 1.0) {
            return Err(Error::Validation("osc_resolution must be at least 1".into()));
        }
        if !(self.record_interval > 0.0) {
            return Err(Error::Validation("record_interval must be positive".into()));
        }
        Ok(())
    }

    pub fn step_at(&self, forcing: &ForcingSpec, t: f64) -> f64 {
        let rate = forcing.phase_rate(t);
        if rate > 0.0 {
            self.dt_max.min(std::f64::consts::TAU / (self.osc_resolution * rate))
        } else {
            self.dt_max
        }
    }

    /// Closed-form number of steps over `[t0, t_end]` (record landings aside).
    pub fn estimate_steps(&self, forcing: &ForcingSpec, t0: f64, t_end: f64) -> f64 {
        if t_end <= t0 {
            return 0.0;
        }
        // S'(t_c) = 2π / (osc · dt_max) separates the two regimes.
        let b = forcing.beta.value();
        let crit = std::f64::consts::TAU / (self.osc_resolution * self.dt_max);
        let t_c = (crit / (forcing.s * (b + 1.0))).powf(1.0 / b).clamp(t0, t_end);
        let flat = (t_c - t0) / self.dt_max;
        let chirped = self.osc_resolution / std::f64::consts::TAU * (forcing.phase(t_end) - forcing.phase(t_c));
        flat + chirped
    }
}

/// The full Itô system in Cartesian coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdeProblem {
    pub potential: Potential,
    pub forcing: ForcingSpec,
    pub noise: NoiseSpec,
    pub t0: f64,
    pub initial: [f64; 2],
    pub t_end: f64,
}

impl SdeProblem {
    pub fn validate(&self) -> Result<()> {
        if !(self.t0 >= 1.0) {
            return Err(Error::Validation(format!("t0 = {} must be at least 1", self.t0)));
        }
        if !(self.t_end > self.t0 && self.t_end.is_finite()) {
            return Err(Error::Validation(format!("t_end = {} must be finite and exceed t0", self.t_end)));
        }
        if !self.initial.iter().all(|v| v.is_finite()) {
            return Err(Error::Validation("initial state must be finite".into()));
        }
        self.forcing.validate(self.potential.h())?;
        self.noise.validate()
    }

    pub fn drift(&self, t: f64, x: &[f64; 2]) -> [f64; 2] {
        let s = self.forcing.phase(t);
        let decay = t.powf(-self.forcing.alpha.value());
        [x[1], -self.potential.derivative(x[0]) + decay * self.forcing.field(x[0], x[1], s)]
    }

    /// Coefficient of `dw` in the velocity equation.
    pub fn diffusion(&self, t: f64, x: &[f64; 2]) -> f64 {
        if self.noise.mu == 0.0 {
            return 0.0;
        }
        let s = self.forcing.phase(t);
        t.powf(-self.noise.gamma.value()) * self.noise.mu * self.noise.field(x[0], x[1], s)
    }
}

/// Recorded trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub times: Vec<f64>,
    pub states: Vec<[f64; 2]>,
    pub stream: Option<StreamId>,
}

/// One step: sixth-order Runge-Kutta for the drift plus the Itô increment `g(t_n, x_n) ΔW`.
pub fn sde_step<const N: usize, F, G>(drift: &F, diffusion: &G, t: f64, x: &[f64; N], dt: f64, dw: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    G: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut y = rk6_step(drift, t, x, dt);
    let g = diffusion(t, x);
    for i in 0..N {
        y[i] += g[i] * dw;
    }
    y
}

pub fn integrate_sde(problem: &SdeProblem, stream: &mut RandomStream, control: &DtControl) -> Result<SamplePath> {
    problem.validate()?;
    control.validate()?;
    let drift = |t: f64, x: &[f64; 2]| problem.drift(t, x);
    let diffusion = |t: f64, x: &[f64; 2]| [0.0, problem.diffusion(t, x)];
    let noisy = problem.noise.mu != 0.0;

    let mut t = problem.t0;
    let mut x = problem.initial;
    let mut times = vec![t];
    let mut states = vec![x];
    let mut k = 1u64;
    let mut next_record = (problem.t0 + control.record_interval).min(problem.t_end);
    while t < problem.t_end {
        let mut dt = control.step_at(&problem.forcing, t);
        let landing = t + dt >= next_record - 1e-12 * next_record;
        if landing {
            dt = next_record - t;
        }
        let dw = if noisy { stream.next_normal() * dt.sqrt() } else { 0.0 };
        let y = sde_step(&drift, &diffusion, t, &x, dt, dw);
        if !(y[0].abs() <= OVERFLOW_GUARD && y[1].abs() <= OVERFLOW_GUARD) {
            return Err(Error::BlowUp { t: t + dt, last_valid: t });
        }
        x = y;
        if landing {
            t = next_record;
            times.push(t);
            states.push(x);
            k += 1;
            next_record = (problem.t0 + k as f64 * control.record_interval).min(problem.t_end);
        } else {
            t += dt;
        }
    }
    Ok(SamplePath { times, states, stream: Some(stream.id()) })
}
