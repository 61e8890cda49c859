use std::f64::consts::{FRAC_PI_2, SQRT_2, TAU};

use crate::numerics::{integrate_singular, periodic_average, rk4_step, QuadratureSpec, TrigSeries};
use crate::oscillator::DEFAULT_PHI_COUNT;
use crate::{Error, Result};

const SUBSTEPS: usize = 8;

/// Period of the leading-order orbit `X^(2h+2)/(2h+2) + Y^2/2 = 1`.
///
/// The endpoint singularities at `±1` are factored out of `1 - z^(2h+2)`,
/// leaving the smooth factor `sqrt(2) / sqrt(1 + z^2 + ... + z^(2h))`.
pub fn leading_period(h: u32) -> Result<f64> {
    let p = 2 * h as i32 + 2;
    let smooth = |z: f64| {
        let z2 = z * z;
        let mut acc = 0.0;
        for _ in 0..=h {
            acc = acc * z2 + 1.0;
        }
        SQRT_2 / acc.sqrt()
    };
    let integral = integrate_singular(smooth, -1.0, 1.0, QuadratureSpec::singular())?;
    Ok(f64::from(p).powf(1.0 / f64::from(p)) * integral)
}

/// Leading term of the large-amplitude orbit, scaled so that
/// `X10^(2h+2)/(2h+2) + X20^2/2 = 1`, parametrised by a phase of period 2π.
#[derive(Debug, Clone)]
pub struct LeadingOrbit {
    h: u32,
    nu0: f64,
    period0: f64,
    x10: Vec<f64>,
    x20: Vec<f64>,
    series_x1: TrigSeries,
    series_x2: TrigSeries,
}

impl LeadingOrbit {
    pub fn new(h: u32) -> Result<Self> {
        let period0 = leading_period(h)?;
        let nu0 = TAU / period0;
        let p = 2 * h as i32 + 1;
        let field = |_: f64, x: &[f64; 2]| [x[1] / nu0, -x[0].powi(p) / nu0];
        let n = DEFAULT_PHI_COUNT;
        let step = TAU / (n * SUBSTEPS) as f64;
        let mut state = [f64::from(p + 1).powf(1.0 / f64::from(p + 1)), 0.0];
        let mut x10 = Vec::with_capacity(n);
        let mut x20 = Vec::with_capacity(n);
        for j in 0..n {
            x10.push(state[0]);
            x20.push(state[1]);
            for k in 0..SUBSTEPS {
                let phi = (j * SUBSTEPS + k) as f64 * step;
                state = rk4_step(&field, phi, &state, step);
            }
        }
        let series_x1 = TrigSeries::from_samples(&x10).truncated(1e-15);
        let series_x2 = TrigSeries::from_samples(&x20).truncated(1e-15);
        Ok(Self { h, nu0, period0, x10, x20, series_x1, series_x2 })
    }

    pub fn h(&self) -> u32 {
        self.h
    }

    pub fn nu0(&self) -> f64 {
        self.nu0
    }

    pub fn period0(&self) -> f64 {
        self.period0
    }

    /// Samples of `X10` on the uniform phase grid.
    pub fn x10_samples(&self) -> &[f64] {
        &self.x10
    }

    pub fn x20_samples(&self) -> &[f64] {
        &self.x20
    }

    /// Cosine coefficients of `X10` (harmonic 1 upward).
    pub fn fourier_cos(&self) -> Vec<f64> {
        (1..=self.series_x1.band()).map(|k| self.series_x1.harmonic(k).0).collect()
    }

    pub fn x1(&self, phi: f64) -> f64 {
        self.series_x1.eval(phi)
    }

    pub fn x2(&self, phi: f64) -> f64 {
        self.series_x2.eval(phi)
    }

    /// `dX10/dphi`, exact from the orbit equations.
    pub fn dx1(&self, phi: f64) -> f64 {
        self.x2(phi) / self.nu0
    }

    pub fn d2x1(&self, phi: f64) -> f64 {
        -self.x1(phi).powi(2 * self.h as i32 + 1) / (self.nu0 * self.nu0)
    }

    /// Largest pointwise violation of the normalised energy identity.
    pub fn energy_error(&self) -> f64 {
        let p = 2 * self.h as i32 + 2;
        self.x10
            .iter()
            .zip(&self.x20)
            .map(|(a, b)| (a.powi(p) / f64::from(p) + b * b / 2.0 - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Fourier data of the cubic leading orbit `X10 = Σ q_k cos((2k-1)φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DuffingFourier {
    pub k: u32,
    /// Closed form `2 ν0 √2 sech((2k-1)π/2)`.
    pub q: f64,
    /// Twice the average of `X10(ζ) cos((2k-1)ζ)`.
    pub q_projected: f64,
    /// Average of `X10(ζ)^2 cos(2kζ)`.
    pub qtilde: f64,
}

pub fn duffing_fourier(leading: &LeadingOrbit, k: u32) -> Result<DuffingFourier> {
    if leading.h() != 1 {
        return Err(Error::Validation(format!(
            "Duffing Fourier data need h = 1, got h = {}",
            leading.h()
        )));
    }
    if k == 0 {
        return Err(Error::Validation("harmonic index k must be positive".into()));
    }
    let odd = f64::from(2 * k - 1);
    let q = 2.0 * leading.nu0() * SQRT_2 / (odd * FRAC_PI_2).cosh();
    let spec = QuadratureSpec::periodic();
    let q_projected = 2.0 * periodic_average(|z| leading.x1(z) * (odd * z).cos(), 1, spec)?;
    let even = f64::from(2 * k);
    let qtilde = periodic_average(|z| leading.x1(z).powi(2) * (even * z).cos(), 1, spec)?;
    Ok(DuffingFourier { k, q, q_projected, qtilde })
}
