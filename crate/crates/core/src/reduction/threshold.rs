use serde::{Deserialize, Serialize};

use crate::oscillator::{duffing_fourier, LeadingOrbit};
use crate::{Error, Result};

/// The two Duffing forcing families with closed-form locking thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdCase {
    /// `p = 0`, odd resonance `kappa = 2k - 1`; locking needs `|Q|/s^2 > Q_kappa`.
    P0Odd,
    /// `p = 1`, even resonance `kappa = 2k`; locking needs `|Q|/s > Q_kappa`.
    P1Even,
}

pub fn duffing_threshold(kappa: u32, case: ThresholdCase) -> Result<f64> {
    let leading = LeadingOrbit::new(1)?;
    duffing_threshold_with(&leading, kappa, case)
}

pub fn duffing_threshold_with(leading: &LeadingOrbit, kappa: u32, case: ThresholdCase) -> Result<f64> {
    let nu0 = leading.nu0();
    match case {
        ThresholdCase::P0Odd => {
            if kappa.is_multiple_of(2) {
                return Err(Error::Validation(format!("p = 0 threshold needs odd kappa, got {kappa}")));
            }
            let f = duffing_fourier(leading, kappa.div_ceil(2))?;
            Ok(128.0 / ((3.0 * nu0 * f64::from(kappa)).powi(3) * f.q))
        }
        ThresholdCase::P1Even => {
            if kappa == 0 || kappa % 2 == 1 {
                return Err(Error::Validation(format!("p = 1 threshold needs even kappa, got {kappa}")));
            }
            let k = kappa / 2;
            let f = duffing_fourier(leading, k)?;
            Ok(3.0 / (2.0 * (nu0 * f64::from(k)).powi(2) * f.qtilde))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_thresholds() {
        let q1 = duffing_threshold(1, ThresholdCase::P0Odd).unwrap();
        assert!((q1 - 2.041).abs() < 0.005, "{q1}");
        let q2 = duffing_threshold(2, ThresholdCase::P1Even).unwrap();
        assert!((q2 - 2.101).abs() < 0.005, "{q2}");
    }

    #[test]
    fn third_order_threshold() {
        // Independent evaluation: 128 / ((9 nu0)^3 q2) with nu0, q2 from mpmath.
        let q3 = duffing_threshold(3, ThresholdCase::P0Odd).unwrap();
        let nu0: f64 = 1.198140234735592;
        let expected = 128.0 / ((9.0 * nu0).powi(3) * 0.060881180499009555);
        assert!((q3 - expected).abs() < 1e-10);
        assert!((q3 - 1.6767812889).abs() < 1e-6);
    }

    #[test]
    fn parity_mismatch() {
        assert!(duffing_threshold(2, ThresholdCase::P0Odd).is_err());
        assert!(duffing_threshold(1, ThresholdCase::P1Even).is_err());
        assert!(duffing_threshold(0, ThresholdCase::P1Even).is_err());
    }
}
