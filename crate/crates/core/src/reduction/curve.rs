use rayon::prelude::*;

use crate::numerics::{solve_scalar, DEFAULT_ROOT_TOL};
use crate::oscillator::{leading_period, Potential};
use crate::reduction::ForcingSpec;
use crate::{Error, Result};

/// Resonant amplitude `rho_kappa(t)`: the root of `nu(rho) = S'(t)/kappa`.
pub fn resonance_curve(potential: &Potential, forcing: &ForcingSpec, kappa: u32, t: f64) -> Result<f64> {
    let target = forcing.phase_rate(t) / f64::from(kappa);
    solve_frequency(potential, target).map_err(|e| match e {
        Error::PreAsymptotic { .. } => {
            let nu_lo = potential.frequency(potential.rho0() * (1.0 + 1e-9)).unwrap_or(f64::NAN);
            Error::PreAsymptotic { t, t_min: minimal_time(forcing, kappa, nu_lo) }
        }
        other => other,
    })
}

fn minimal_time(forcing: &ForcingSpec, kappa: u32, nu: f64) -> f64 {
    let b = forcing.beta.value();
    (f64::from(kappa) * nu / (forcing.s * (b + 1.0))).powf(1.0 / b)
}

/// Amplitude whose orbit frequency equals `target`, on the monotone outer branch.
fn solve_frequency(potential: &Potential, target: f64) -> Result<f64> {
    let h = potential.h();
    if h == 0 {
        return Err(Error::Unsupported("frequency is amplitude independent for h = 0".into()));
    }
    let lo = (potential.rho0() * (1.0 + 1e-9)).max(f64::MIN_POSITIVE);
    let nu_lo = potential.frequency(lo)?;
    if nu_lo >= target {
        return Err(Error::PreAsymptotic { t: f64::NAN, t_min: f64::NAN });
    }
    let nu0 = std::f64::consts::TAU / leading_period(h)?;
    let mut hi = (1.5 * (target / nu0).powf(1.0 / f64::from(h))).max(2.0 * lo);
    let mut nu_hi = potential.frequency(hi)?;
    let mut lo_b = lo;
    while nu_hi <= target {
        lo_b = hi;
        hi *= 2.0;
        nu_hi = potential.frequency(hi)?;
    }
    let tol = DEFAULT_ROOT_TOL * hi.max(1.0);
    solve_scalar(|r| potential.frequency(r).unwrap_or(f64::NAN) - target, lo_b, hi, tol)
}

/// Tabulated resonance curve on a geometric time grid, interpolated linearly
/// in `(log t, log rho)`. Shared read-only by all path simulations.
#[derive(Debug, Clone)]
pub struct ResonanceTrack {
    log_t: Vec<f64>,
    log_rho: Vec<f64>,
    step: f64,
}

impl ResonanceTrack {
    pub const PER_DECADE: usize = 200;

    pub fn new(potential: &Potential, forcing: &ForcingSpec, kappa: u32, t_lo: f64, t_hi: f64) -> Result<Self> {
        if !(t_lo > 0.0 && t_hi >= t_lo) {
            return Err(Error::Validation(format!("bad track interval [{t_lo}, {t_hi}]")));
        }
        let step = std::f64::consts::LN_10 / Self::PER_DECADE as f64;
        let n = (((t_hi / t_lo).ln() / step).ceil() as usize).max(1);
        let log_t: Vec<f64> = (0..=n).map(|i| t_lo.ln() + i as f64 * step).collect();
        let log_rho = log_t
            .par_iter()
            .map(|&lt| resonance_curve(potential, forcing, kappa, lt.exp()).map(f64::ln))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { log_t, log_rho, step })
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.log_t[0].exp(), self.log_t[self.log_t.len() - 1].exp())
    }

    /// `rho_kappa(t)`; `None` outside the tabulated range.
    pub fn rho(&self, t: f64) -> Option<f64> {
        let x = t.ln();
        let u = (x - self.log_t[0]) / self.step;
        let last = self.log_t.len() - 1;
        if !(u >= -1e-9 && u <= last as f64 + 1e-9) {
            return None;
        }
        let i = (u.floor().max(0.0) as usize).min(last.saturating_sub(1));
        if last == 0 {
            return Some(self.log_rho[0].exp());
        }
        let w = (u - i as f64).clamp(0.0, 1.0);
        Some(((1.0 - w) * self.log_rho[i] + w * self.log_rho[i + 1]).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::Exponent;

    fn forcing(s: f64, beta: Exponent) -> ForcingSpec {
        ForcingSpec::duffing(beta, beta, s, 1.0, 0)
    }

    #[test]
    fn leading_order_ratios() {
        let u = Potential::duffing();
        let third = Exponent::new(1, 3);
        let r = resonance_curve(&u, &forcing(0.5, third), 1, 1e6).unwrap();
        assert!((r / 100.0 - 0.556).abs() < 0.01, "{}", r / 100.0);
        let half = Exponent::new(1, 2);
        let r = resonance_curve(&u, &forcing(1.0, half), 2, 1e6).unwrap();
        assert!((r / 1000.0 - 0.626).abs() < 0.01, "{}", r / 1000.0);
    }

    #[test]
    fn root_satisfies_resonance() {
        let u = Potential::duffing();
        let f = forcing(0.5, Exponent::new(1, 3));
        let r = resonance_curve(&u, &f, 1, 500.0).unwrap();
        assert!((u.frequency(r).unwrap() - f.phase_rate(500.0)).abs() < 1e-10);
    }

    #[test]
    fn doubling_s_doubles_asymptotic_ratio() {
        let u = Potential::duffing();
        let third = Exponent::new(1, 3);
        let t = 1e9;
        let r1 = resonance_curve(&u, &forcing(0.5, third), 1, t).unwrap();
        let r2 = resonance_curve(&u, &forcing(1.0, third), 1, t).unwrap();
        assert!((r2 / r1 - 2.0).abs() < 1e-4);
    }

    #[test]
    fn early_time_is_pre_asymptotic() {
        let u = Potential::duffing();
        let f = forcing(0.01, Exponent::new(1, 3));
        match resonance_curve(&u, &f, 1, 1.0) {
            Err(Error::PreAsymptotic { t_min, .. }) => {
                assert!(t_min > 1.0);
                assert!(resonance_curve(&u, &f, 1, t_min * 1.01).is_ok());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn track_interpolation_is_accurate() {
        let u = Potential::duffing();
        let f = forcing(0.5, Exponent::new(1, 3));
        let track = ResonanceTrack::new(&u, &f, 1, 10.0, 1e4).unwrap();
        for &t in &[10.0, 17.3, 512.0, 9999.0, 1e4] {
            let exact = resonance_curve(&u, &f, 1, t).unwrap();
            assert!((track.rho(t).unwrap() / exact - 1.0).abs() < 1e-6, "t = {t}");
        }
        assert!(track.rho(5.0).is_none());
    }
}
