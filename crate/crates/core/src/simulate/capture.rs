use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerances of the capture detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CaptureThresholds {
    /// Trailing share of the time span that must stay locked.
    pub window_fraction: f64,
    pub eps_theta: f64,
    pub eps_rho: f64,
}

impl Default for CaptureThresholds {
    fn default() -> Self {
        Self { window_fraction: 0.2, eps_theta: 0.5, eps_rho: 0.2 }
    }
}

impl CaptureThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.window_fraction > 0.0 && self.window_fraction <= 1.0) {
            return Err(Error::Validation("window_fraction must lie in (0, 1]".into()));
        }
        if !(self.eps_theta > 0.0 && self.eps_rho > 0.0) {
            return Err(Error::Validation("capture tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaptureVerdict {
    pub captured: bool,
    pub sup_deviation: f64,
    pub exit_time: Option<f64>,
}

impl CaptureVerdict {
    /// Verdict for a path that could not be completed.
    pub fn failed(exit_time: f64) -> Self {
        Self { captured: false, sup_deviation: f64::INFINITY, exit_time: Some(exit_time) }
    }
}

fn wrapped_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Continuous lift of a wrapped angle series; `NaN` entries are kept and
/// skipped when measuring jumps.
fn unwrap(theta: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(theta.len());
    let mut last: Option<(f64, f64)> = None;
    for &v in theta {
        if v.is_nan() {
            out.push(f64::NAN);
            continue;
        }
        let lifted = match last {
            Some((raw, lift)) => {
                let mut d = (v - raw).rem_euclid(TAU);
                if d > PI {
                    d -= TAU;
                }
                lift + d
            }
            None => v,
        };
        last = Some((v, lifted));
        out.push(lifted);
    }
    out
}

/// Decides whether a path stayed phase locked near `theta0`.
///
/// Lock is judged on the trailing window with the wrapped distance. The
/// exit time uses the continuous lift of `theta` instead, referenced to the
/// branch of `theta0` nearest the first sample, so that a drifting phase
/// that keeps slipping through whole turns counts as having left for good.
/// `NaN` samples count as violations.
pub fn detect_capture(
    times: &[f64],
    theta: &[f64],
    rho_ratio: &[f64],
    theta0: f64,
    thresholds: &CaptureThresholds,
) -> CaptureVerdict {
    let n = times.len().min(theta.len()).min(rho_ratio.len());
    if n == 0 {
        return CaptureVerdict { captured: false, sup_deviation: f64::INFINITY, exit_time: None };
    }
    let (t_first, t_last) = (times[0], times[n - 1]);
    let window_start = t_last - thresholds.window_fraction * (t_last - t_first);
    let norm = |v: f64| if v.is_nan() { f64::INFINITY } else { v };

    let mut sup_theta: f64 = 0.0;
    let mut sup_rho: f64 = 0.0;
    for i in (0..n).filter(|&i| times[i] >= window_start) {
        sup_theta = sup_theta.max(norm(wrapped_distance(theta[i], theta0)));
        sup_rho = sup_rho.max(norm((rho_ratio[i] - 1.0).abs()));
    }
    let sup_deviation = (sup_theta / thresholds.eps_theta).max(sup_rho / thresholds.eps_rho);
    let captured = sup_theta < thresholds.eps_theta && sup_rho < thresholds.eps_rho;
    if captured {
        return CaptureVerdict { captured, sup_deviation, exit_time: None };
    }

    let lifted = unwrap(&theta[..n]);
    let branch = lifted
        .iter()
        .find(|v| v.is_finite())
        .map(|&v| theta0 + TAU * ((v - theta0) / TAU).round())
        .unwrap_or(theta0);
    let violated = |i: usize| {
        let dt = (lifted[i] - branch).abs();
        let dr = (rho_ratio[i] - 1.0).abs();
        !(dt < thresholds.eps_theta && dr < thresholds.eps_rho)
    };
    let exit_index = if violated(n - 1) {
        // Start of the final run of violations.
        (0..n).rev().find(|&i| !violated(i)).map_or(0, |i| i + 1)
    } else {
        // Ends inside the bounds but broke them in the window.
        (0..n).find(|&i| times[i] >= window_start && violated(i)).unwrap_or(n - 1)
    };
    CaptureVerdict { captured, sup_deviation, exit_time: Some(times[exit_index]) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64).collect()
    }

    #[test]
    fn constant_lock_is_captured() {
        let t = grid(100);
        let v = detect_capture(&t, &vec![-0.127; 100], &vec![1.0; 100], -0.127, &Default::default());
        assert!(v.captured);
        assert_eq!(v.sup_deviation, 0.0);
        assert_eq!(v.exit_time, None);
    }

    #[test]
    fn linear_drift_is_not_captured() {
        let t = grid(1000);
        let theta: Vec<f64> = t.iter().map(|&s| crate::numerics::wrap_angle(0.02 * s)).collect();
        let v = detect_capture(&t, &theta, &vec![1.0; 1000], 0.0, &Default::default());
        assert!(!v.captured);
        // The lifted deviation passes 0.5 at t = 25 and never returns.
        assert_eq!(v.exit_time, Some(25.0));
    }

    #[test]
    fn amplitude_loss_sets_exit() {
        let t = grid(100);
        let ratio: Vec<f64> = t.iter().map(|&s| if s < 60.0 { 1.0 } else { 0.3 }).collect();
        let v = detect_capture(&t, &vec![0.0; 100], &ratio, 0.0, &Default::default());
        assert!(!v.captured);
        assert_eq!(v.exit_time, Some(60.0));
        assert!((v.sup_deviation - 3.5).abs() < 1e-12);
    }

    #[test]
    fn gaps_count_as_violations() {
        let t = grid(10);
        let mut ratio = vec![1.0; 10];
        ratio[9] = f64::NAN;
        let v = detect_capture(&t, &[0.0; 10], &ratio, 0.0, &Default::default());
        assert!(!v.captured && v.sup_deviation.is_infinite());
        assert_eq!(v.exit_time, Some(9.0));
    }

    #[test]
    fn wrapped_branch_is_respected() {
        let t = grid(10);
        let v = detect_capture(&t, &[3.1; 10], &[1.0; 10], -3.1, &Default::default());
        assert!(v.captured);
    }

    proptest! {
        #[test]
        fn captured_implies_no_exit(
            theta in prop::collection::vec(-3.2f64..3.2, 1..60),
            ratio in prop::collection::vec(0.5f64..1.5, 60),
            theta0 in -3.0f64..3.0,
        ) {
            let t = grid(theta.len());
            let v = detect_capture(&t, &theta, &ratio[..theta.len()], theta0, &Default::default());
            prop_assert_eq!(v.captured, v.exit_time.is_none());
            prop_assert!(v.sup_deviation >= 0.0);
            prop_assert_eq!(v.captured, v.sup_deviation < 1.0);
        }
    }
}
