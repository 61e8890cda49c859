use serde::{Deserialize, Serialize};

use crate::numerics::rk4_step;
use crate::reduction::AveragedCoefficients;
use crate::{Error, Result};

/// Integration settings for the truncated averaged system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruncatedOptions {
    pub dtau: f64,
    /// Integration stops once `|R|` exceeds this radius.
    pub r0: f64,
    pub record_every: usize,
}

impl Default for TruncatedOptions {
    fn default() -> Self {
        Self { dtau: 0.5, r0: 1.0, record_every: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedPath {
    pub tau: Vec<f64>,
    pub r: Vec<f64>,
    pub theta: Vec<f64>,
    /// First `tau` at which `|R| > r0`, if the trajectory left the domain.
    pub exit_tau: Option<f64>,
}

impl TruncatedPath {
    pub fn end(&self) -> (f64, f64, f64) {
        let i = self.tau.len() - 1;
        (self.tau[i], self.r[i], self.theta[i])
    }

    /// Largest Euclidean distance from `(0, theta0)` over the recorded samples.
    pub fn max_distance(&self, theta0: f64) -> f64 {
        self.r
            .iter()
            .zip(&self.theta)
            .map(|(r, th)| r.hypot(th - theta0))
            .fold(0.0, f64::max)
    }
}

/// Right-hand side of the truncated system with the order-zero coefficients.
pub fn truncated_rhs(c: &AveragedCoefficients, tau: f64, r: f64, theta: f64) -> [f64; 2] {
    let ex = &c.exponents;
    let (a, b, cc) = (ex.big_a.value(), ex.big_b.value(), ex.big_c.value());
    let p = |k: f64| tau.powf(-k / b);
    let dr = p(a) * c.theta_1_a_0.eval(theta)
        + p(b - a) * c.chi_1_bma_0
        + p(2.0 * a) * c.theta_1_2a_0.eval(theta) * r
        + c.chi_1_b_0 * r / tau
        + p(2.0 * cc - a) * c.theta_1_2cma_0.eval(theta);
    let dtheta = p(a) * c.chi_2_a_0 * r + p(2.0 * a) * (c.theta_2_2a_0.eval(theta) + c.chi_2_2a_0 * r * r);
    [dr, dtheta]
}

pub fn integrate_truncated(
    coeffs: &AveragedCoefficients,
    initial: (f64, f64),
    tau0: f64,
    tau_end: f64,
    options: &TruncatedOptions,
) -> Result<TruncatedPath> {
    if !(tau0 > 0.0 && tau_end > tau0) {
        return Err(Error::Validation(format!("need 0 < tau0 < tau_end, got {tau0}, {tau_end}")));
    }
    if !(options.dtau > 0.0 && options.r0 > 0.0 && options.record_every > 0) {
        return Err(Error::Validation("dtau, r0 and record_every must be positive".into()));
    }
    let f = |tau: f64, y: &[f64; 2]| truncated_rhs(coeffs, tau, y[0], y[1]);
    let mut y = [initial.0, initial.1];
    let mut path = TruncatedPath { tau: vec![tau0], r: vec![y[0]], theta: vec![y[1]], exit_tau: None };
    let steps = ((tau_end - tau0) / options.dtau).ceil() as usize;
    let h = (tau_end - tau0) / steps as f64;
    for i in 0..steps {
        let tau = tau0 + i as f64 * h;
        y = rk4_step(&f, tau, &y, h);
        let now = tau0 + (i + 1) as f64 * h;
        let out = !(y[0].abs() <= options.r0);
        if out || (i + 1) % options.record_every == 0 || i + 1 == steps {
            path.tau.push(now);
            path.r.push(y[0]);
            path.theta.push(y[1]);
        }
        if out {
            path.exit_tau = Some(now);
            break;
        }
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscillator::LeadingOrbit;
    use crate::reduction::{analyze_with, AnalysisOptions, Exponent, ForcingSpec, NoiseSpec};

    fn setup(q: f64, s: f64) -> (AveragedCoefficients, Option<f64>) {
        let third = Exponent::new(1, 3);
        let f = ForcingSpec::duffing(third, third, s, q, 0);
        let n = NoiseSpec::duffing(Exponent::new(1, 6), 0.0, 0);
        let l = LeadingOrbit::new(1).unwrap();
        let (a, c) = analyze_with(&l, &f, &n, 1, AnalysisOptions::default()).unwrap();
        (c, a.theta0())
    }

    #[test]
    fn stable_lock_converges_slowly() {
        let (c, theta0) = setup(4.0, 0.5);
        let theta0 = theta0.unwrap();
        let path = integrate_truncated(&c, (0.0, theta0 + 0.05), 1e3, 1e5, &TruncatedOptions::default()).unwrap();
        assert!(path.exit_tau.is_none());
        let (_, r, th) = path.end();
        let d_end = r.hypot(th - theta0);
        // Reference from an independent adaptive integration: ≈0.07 at τ = 1e5,
        // with a transient peak ≈0.24 shortly after the start.
        assert!(d_end < 0.1 && d_end > 0.03, "{d_end}");
        let peak = path.max_distance(theta0);
        assert!(peak > 0.15 && peak < 0.35, "{peak}");
    }

    #[test]
    fn drift_leaves_domain() {
        let (c, theta0) = setup(1.0, 1.0);
        assert!(theta0.is_none());
        let path = integrate_truncated(&c, (0.0, 0.0), 1e3, 1e6, &TruncatedOptions::default()).unwrap();
        let exit = path.exit_tau.expect("drift must exit");
        assert!(exit < 1e4, "{exit}");
    }

    #[test]
    fn non_stable_root_leaves_ball() {
        // In this family J equals -1/4 at every root, so flipping the sign
        // of the forcing only moves the roots by pi. The root that cannot
        // hold the trajectory is the one with P' > 0.
        for q in [4.0, -4.0] {
            let third = Exponent::new(1, 3);
            let f = ForcingSpec::duffing(third, third, 0.5, q, 0);
            let n = NoiseSpec::duffing(Exponent::new(1, 6), 0.0, 0);
            let l = LeadingOrbit::new(1).unwrap();
            let (a, c) = analyze_with(&l, &f, &n, 1, AnalysisOptions::default()).unwrap();
            let saddle = a
                .locked_phases
                .iter()
                .find(|p| p.class == crate::reduction::LockClass::SaddleLock)
                .expect("a saddle root");
            let path = integrate_truncated(&c, (0.0, saddle.theta0 + 0.01), 1e3, 1e6, &TruncatedOptions::default()).unwrap();
            assert!(path.exit_tau.is_some() || path.max_distance(saddle.theta0) > 0.3);
        }
    }

    #[test]
    fn bad_interval() {
        let (c, _) = setup(4.0, 0.5);
        assert!(integrate_truncated(&c, (0.0, 0.0), 10.0, 5.0, &TruncatedOptions::default()).is_err());
    }
}
