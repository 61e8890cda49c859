use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::numerics::{solve_scalar, wrap_angle, TrigSeries};
use crate::{Error, Result};

/// Roots closer than this (in wrapped distance) are merged.
pub const MERGE_TOL: f64 = 1e-6;
/// `|P'(Θ0)|` below this, relative to `max |P|`, violates the simple-root assumption.
pub const DEGENERATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LockClass {
    StableLock,
    UnstableLock,
    SaddleLock,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LockedPhase {
    #[serde(rename = "Theta0")]
    pub theta0: f64,
    #[serde(rename = "P_prime")]
    pub p_prime: f64,
    #[serde(rename = "J_value")]
    pub j_value: f64,
    pub class: LockClass,
}

pub fn classify(p_prime: f64, j_value: f64) -> LockClass {
    if p_prime > 0.0 {
        LockClass::SaddleLock
    } else if j_value < 0.0 {
        LockClass::StableLock
    } else {
        LockClass::UnstableLock
    }
}

/// All simple zeros of `P` in `(-π, π]`, classified with `J`.
///
/// Returns the phases sorted by `Θ0` and a drift flag that is set exactly
/// when `P` has no zeros.
pub fn find_locked_phases(p: &TrigSeries, j: &TrigSeries, grid: usize) -> Result<(Vec<LockedPhase>, bool)> {
    let n = grid.max(16);
    let dp = p.derivative();
    let theta = |i: usize| -PI + 2.0 * PI * i as f64 / n as f64;
    let values: Vec<f64> = (0..=n).map(|i| p.eval(theta(i))).collect();
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);

    let mut roots: Vec<f64> = Vec::new();
    for i in 0..n {
        let (a, b) = (values[i], values[i + 1]);
        if a == 0.0 {
            roots.push(theta(i));
        } else if a * b < 0.0 {
            roots.push(solve_scalar(|x| p.eval(x), theta(i), theta(i + 1), 1e-14)?);
        } else if i > 0 {
            // A local minimum of |P| touching zero is a double root.
            let prev = values[i - 1];
            if a.abs() <= prev.abs() && a.abs() <= b.abs() && a.abs() < DEGENERATE_TOL * scale && prev * a > 0.0 {
                return Err(Error::DegenerateRoot { theta: theta(i), slope: dp.eval(theta(i)) });
            }
        }
    }
    let mut wrapped: Vec<f64> = roots.into_iter().map(wrap_angle).collect();
    wrapped.sort_by(f64::total_cmp);
    let mut merged: Vec<f64> = Vec::new();
    for r in wrapped {
        if merged.last().is_none_or(|&m| (r - m).abs() > MERGE_TOL) {
            merged.push(r);
        }
    }
    if merged.len() > 1 {
        let (first, last) = (merged[0], merged[merged.len() - 1]);
        if wrap_angle(first - last).abs() < MERGE_TOL {
            merged.pop();
        }
    }

    let mut phases = Vec::with_capacity(merged.len());
    for theta0 in merged {
        let slope = dp.eval(theta0);
        if slope.abs() < DEGENERATE_TOL * scale {
            return Err(Error::DegenerateRoot { theta: theta0, slope });
        }
        let j_value = j.eval(theta0);
        phases.push(LockedPhase { theta0, p_prime: slope, j_value, class: classify(slope, j_value) });
    }
    let drift = phases.is_empty();
    Ok((phases, drift))
}

/// The stable lock closest to `Θ = 0` in wrapped distance.
pub fn principal_stable(phases: &[LockedPhase]) -> Option<LockedPhase> {
    phases
        .iter()
        .filter(|p| p.class == LockClass::StableLock)
        .min_by(|a, b| a.theta0.abs().total_cmp(&b.theta0.abs()))
        .copied()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine_family(amp: f64, k: usize, offset: f64) -> TrigSeries {
        let mut sin = vec![0.0; k];
        sin[k - 1] = amp;
        TrigSeries::new(offset, vec![0.0; k], sin)
    }

    #[test]
    fn classification_table() {
        assert_eq!(classify(-1.0, -1.0), LockClass::StableLock);
        assert_eq!(classify(-1.0, 1.0), LockClass::UnstableLock);
        assert_eq!(classify(1.0, -1.0), LockClass::SaddleLock);
    }

    #[test]
    fn sine_roots_found_and_classified() {
        // P = -(2 sin Θ + 1)/c: roots at asin(-1/2) = -π/6 and π + π/6.
        let p = sine_family(-2.0, 1, -1.0);
        let j = sine_family(1.0, 1, 0.25);
        let (phases, drift) = find_locked_phases(&p, &j, 1024).unwrap();
        assert!(!drift);
        assert_eq!(phases.len(), 2);
        assert!((phases[0].theta0 + 5.0 * PI / 6.0).abs() < 1e-12);
        assert!((phases[1].theta0 + PI / 6.0).abs() < 1e-12);
        assert_eq!(phases[1].class, LockClass::StableLock);
        assert_eq!(phases[0].class, LockClass::SaddleLock);
        assert!((principal_stable(&phases).unwrap().theta0 + PI / 6.0).abs() < 1e-12);
    }

    #[test]
    fn no_roots_means_drift() {
        let p = sine_family(0.5, 1, -1.0);
        let (phases, drift) = find_locked_phases(&p, &p, 1024).unwrap();
        assert!(drift && phases.is_empty());
    }

    #[test]
    fn double_root_is_degenerate() {
        let p = sine_family(1.0, 1, 1.0);
        assert!(matches!(find_locked_phases(&p, &p, 1024), Err(Error::DegenerateRoot { .. })));
    }

    #[test]
    fn refinement_keeps_labels() {
        let p = sine_family(-3.0, 2, -1.0);
        let j = sine_family(1.0, 2, 0.25);
        let coarse = find_locked_phases(&p, &j, 512).unwrap().0;
        let fine = find_locked_phases(&p, &j, 2048).unwrap().0;
        assert_eq!(coarse.len(), 4);
        for (a, b) in coarse.iter().zip(&fine) {
            assert_eq!(a.class, b.class);
            assert!((a.theta0 - b.theta0).abs() < 1e-12);
        }
    }
}
