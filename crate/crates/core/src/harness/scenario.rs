use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::oscillator::Potential;
use crate::reduction::{AnalysisOptions, Exponent, ForcingSpec, NoiseSpec};
use crate::simulate::{CaptureThresholds, DtControl};
use crate::{Error, Result};

/// Upper bound on automatically chosen horizons.
pub const HORIZON_CAP: f64 = 1e6;

/// End of the simulated interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Horizon {
    Fixed(f64),
    /// `"auto"`: `min(t0 + T̃, HORIZON_CAP)`, with `T̃` the stochastic
    /// stability horizon measured from `t0` (the cap applies when it is
    /// unbounded).
    Rule(AutoHorizon),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoHorizon {
    Auto,
}

/// How the first state of every path is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialRule {
    /// The point of the resonant track at the principal locked phase
    /// (phase offset zero when no stable lock exists).
    OnTrack,
    Explicit { x1: f64, x2: f64 },
    /// Track point shifted by a uniform draw from the disc of radius `delta`
    /// in the `(R, Theta)` plane.
    PerturbedTrack { delta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub path_count: usize,
    pub master_seed: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self { path_count: 1, master_seed: 0 }
    }
}

/// A complete, self-describing simulation setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub potential: Potential,
    pub forcing: ForcingSpec,
    pub noise: NoiseSpec,
    pub kappa: u32,
    pub t0: f64,
    pub t_end: Horizon,
    pub initial: InitialRule,
    #[serde(default)]
    pub ensemble: EnsembleConfig,
    #[serde(default)]
    pub dt_control: DtControl,
    #[serde(default)]
    pub capture: CaptureThresholds,
    #[serde(default)]
    pub analysis: AnalysisOptions,
}

pub const BUILTINS: [&str; 4] = ["ex1", "ex2", "ex3", "fex0"];

impl Scenario {
    /// Named examples of the perturbed Duffing oscillator
    /// `x'' = x - x^3 + t^-alpha Q x^p cos S + t^-gamma mu x^n cos S · noise`.
    ///
    /// * `ex1`: p = n = 0, alpha = beta = 1/3, gamma = 1/6, Q = 4, s = 1/2, kappa = 1.
    /// * `ex2`: p = n = 1, alpha = beta = 1/2, gamma = 3/4, Q = 8, s = 1, kappa = 2.
    /// * `ex3`: p = 1, n = 2, alpha = beta = 1/2, gamma = 3/2, Q = 5, s = 1, kappa = 2.
    /// * `fex0`: p = n = 0, alpha = beta = 1/3, gamma = 1/6, Q = 2.5, s = 1, kappa = 1.
    ///
    /// All use mu = 0.2 and start on the resonant track at t0 = 100.
    pub fn builtin(name: &str) -> Result<Self> {
        let e = Exponent::new;
        let (ab, gamma, p, n, q, s, kappa, t_end) = match name {
            "ex1" => (e(1, 3), e(1, 6), 0, 0, 4.0, 0.5, 1, Horizon::Rule(AutoHorizon::Auto)),
            "ex2" => (e(1, 2), e(3, 4), 1, 1, 8.0, 1.0, 2, Horizon::Rule(AutoHorizon::Auto)),
            "ex3" => (e(1, 2), e(3, 2), 1, 2, 5.0, 1.0, 2, Horizon::Fixed(2000.0)),
            "fex0" => (e(1, 3), e(1, 6), 0, 0, 2.5, 1.0, 1, Horizon::Fixed(2000.0)),
            other => {
                return Err(Error::Validation(format!(
                    "unknown builtin scenario {other:?}; expected one of {BUILTINS:?}"
                )))
            }
        };
        Ok(Self {
            name: name.to_string(),
            potential: Potential::duffing(),
            forcing: ForcingSpec::duffing(ab, ab, s, q, p),
            noise: NoiseSpec::duffing(gamma, 0.2, n),
            kappa,
            t0: 100.0,
            t_end,
            initial: InitialRule::OnTrack,
            ensemble: EnsembleConfig::default(),
            dt_control: DtControl::default(),
            capture: CaptureThresholds::default(),
            analysis: AnalysisOptions::default(),
        })
    }

    /// Parses a JSON scenario; unknown keys are rejected.
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Checks everything that does not need the reduction.
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::Validation("scenario name must not be empty".into()));
        }
        if self.kappa == 0 {
            return Err(Error::Validation("kappa must be a positive integer".into()));
        }
        if !(self.t0 >= 1.0 && self.t0.is_finite()) {
            return Err(Error::Validation(format!("t0 = {} must be at least 1", self.t0)));
        }
        if let Horizon::Fixed(t) = self.t_end {
            if !(t > self.t0 && t.is_finite()) {
                return Err(Error::Validation(format!("t_end = {t} must be finite and exceed t0")));
            }
        }
        match self.initial {
            InitialRule::Explicit { x1, x2 } if !(x1.is_finite() && x2.is_finite()) => {
                return Err(Error::Validation("explicit initial state must be finite".into()))
            }
            InitialRule::PerturbedTrack { delta } if !(delta >= 0.0 && delta.is_finite()) => {
                return Err(Error::Validation("perturbation radius must be nonnegative".into()))
            }
            _ => {}
        }
        if self.ensemble.path_count == 0 {
            return Err(Error::Validation("path_count must be at least 1".into()));
        }
        self.forcing.validate(self.potential.h())?;
        self.noise.validate()?;
        self.dt_control.validate()?;
        self.capture.validate()
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.noise.mu = mu;
        self
    }

    /// Sets the cosine amplitude of every forcing term to `q` and the chirp
    /// rate to `s`. Meant for the single-term builtins.
    pub fn with_amplitude(mut self, q: f64, s: f64) -> Self {
        for term in &mut self.forcing.terms {
            term.cos_amp = q;
        }
        self.forcing.s = s;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_validate_and_round_trip() {
        for name in BUILTINS {
            let s = Scenario::builtin(name).unwrap();
            s.validate().unwrap();
            let back = Scenario::from_json(&s.to_json().unwrap()).unwrap();
            assert_eq!(back, s);
        }
        assert!(Scenario::builtin("ex4").is_err());
    }

    #[test]
    fn horizon_forms_parse() {
        let mut v: serde_json::Value = serde_json::from_str(&Scenario::builtin("ex1").unwrap().to_json().unwrap()).unwrap();
        assert_eq!(v["t_end"], "auto");
        v["t_end"] = serde_json::json!(500.0);
        let s: Scenario = serde_json::from_value(v.clone()).unwrap();
        assert_eq!(s.t_end, Horizon::Fixed(500.0));
        v["t_end"] = serde_json::json!("forever");
        assert!(serde_json::from_value::<Scenario>(v).is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&Scenario::builtin("ex2").unwrap().to_json().unwrap()).unwrap();
        v["colour"] = serde_json::json!("red");
        assert!(Scenario::from_json(&v.to_string()).is_err());
        let mut v: serde_json::Value = serde_json::from_str(&Scenario::builtin("ex2").unwrap().to_json().unwrap()).unwrap();
        v["initial"] = serde_json::json!({"rule": "explicit", "x1": 1.0, "x2": 0.0, "x3": 2.0});
        assert!(Scenario::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        let mut s = Scenario::builtin("ex1").unwrap();
        s.t0 = 0.5;
        assert!(s.validate().is_err());
        let mut s = Scenario::builtin("ex1").unwrap();
        s.t_end = Horizon::Fixed(50.0);
        assert!(s.validate().is_err());
        let mut s = Scenario::builtin("ex1").unwrap();
        s.ensemble.path_count = 0;
        assert!(s.validate().is_err());
        let mut s = Scenario::builtin("ex1").unwrap();
        s.initial = InitialRule::PerturbedTrack { delta: -1.0 };
        assert!(s.validate().is_err());
    }

    #[test]
    fn amplitude_override() {
        let s = Scenario::builtin("ex1").unwrap().with_amplitude(1.0, 1.0);
        assert_eq!(s.forcing.terms[0].cos_amp, 1.0);
        assert_eq!(s.forcing.s, 1.0);
        let s = Scenario::builtin("ex1").unwrap().with_amplitude(-3.0, 0.5);
        assert_eq!(s.forcing.terms[0].cos_amp, -3.0);
    }
}
