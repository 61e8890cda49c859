use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::numerics::TrigSeries;
use crate::oscillator::{LeadingOrbit, Potential};
use crate::reduction::{
    find_locked_phases, leading_averages, principal_stable, AveragedCoefficients, Exponent, Exponents,
    ForcingSpec, HorizonEstimate, LockedPhase, NoiseSpec, THETA_GRID,
};
use crate::{Error, Result};

/// Knobs of the reduction that are not part of the physical model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisOptions {
    pub theta_grid: usize,
    /// Exponent parameter of the horizon estimate, in `(0, 1)`.
    pub epsilon: f64,
    /// Start time from which the horizon is measured.
    pub t_star: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self { theta_grid: THETA_GRID, epsilon: 0.5, t_star: 1.0 }
    }
}

/// Full reduced phase-plane picture of one resonance.
#[derive(Debug, Clone)]
pub struct ResonanceAnalysis {
    pub kappa: u32,
    pub h: u32,
    pub nu0: f64,
    pub exponents: Exponents,
    pub z0: f64,
    pub p_theta: TrigSeries,
    pub j_theta: TrigSeries,
    pub locked_phases: Vec<LockedPhase>,
    pub drift: bool,
    pub horizon: HorizonEstimate,
    pub caveats: Vec<String>,
}

impl ResonanceAnalysis {
    pub fn ncond_ok(&self) -> bool {
        self.exponents.ncond_ok
    }

    pub fn adas_ok(&self) -> bool {
        self.exponents.adas_ok
    }

    /// The stable lock nearest `Θ = 0`, if any.
    pub fn principal(&self) -> Option<LockedPhase> {
        principal_stable(&self.locked_phases)
    }

    pub fn theta0(&self) -> Option<f64> {
        self.principal().map(|p| p.theta0)
    }

    pub fn to_json(&self) -> Value {
        let e = |x: Exponent| json!({ "ratio": x.to_string(), "value": x.value() });
        let x = &self.exponents;
        let samples = |s: &TrigSeries| s.samples(THETA_GRID);
        json!({
            "kappa": self.kappa,
            "h": self.h,
            "nu0": self.nu0,
            "exponents": {
                "a": e(x.a), "b": e(x.b), "M1": e(x.m1), "M2": e(x.m2), "M": e(x.m),
                "A": e(x.big_a), "B": e(x.big_b), "C": e(x.big_c),
            },
            "ncond_ok": x.ncond_ok,
            "adas_ok": x.adas_ok,
            "kronecker_B_2A": x.kronecker_b_2a,
            "z0": self.z0,
            "PTheta": { "series": &self.p_theta, "grid_points": THETA_GRID, "samples": samples(&self.p_theta) },
            "JTheta": { "series": &self.j_theta, "grid_points": THETA_GRID, "samples": samples(&self.j_theta) },
            "locked_phases": &self.locked_phases,
            "principal_Theta0": self.theta0(),
            "drift": self.drift,
            "horizon": &self.horizon,
            "caveats": &self.caveats,
        })
    }
}

/// Exponents, averaged coefficients, locked phases and horizon in one pass.
pub fn analyze(
    potential: &Potential,
    forcing: &ForcingSpec,
    noise: &NoiseSpec,
    kappa: u32,
    options: AnalysisOptions,
) -> Result<(ResonanceAnalysis, AveragedCoefficients)> {
    let h = potential.h();
    let leading = LeadingOrbit::new(h)?;
    analyze_with(&leading, forcing, noise, kappa, options)
}

pub fn analyze_with(
    leading: &LeadingOrbit,
    forcing: &ForcingSpec,
    noise: &NoiseSpec,
    kappa: u32,
    options: AnalysisOptions,
) -> Result<(ResonanceAnalysis, AveragedCoefficients)> {
    let coeffs = leading_averages(forcing, noise, leading, kappa, options.theta_grid)?;
    let ex = coeffs.exponents;
    let p_theta = coeffs.p_series();
    let j_theta = coeffs.j_series();
    let mut caveats = vec![
        "P and J are built from the leading (k = 0) asymptotic terms only; the time range where this picture is accurate is not quantified".to_string(),
        "R is reported at leading order, without the averaging correction of order tau^(-A/B)".to_string(),
    ];
    let (p, l) = forcing.degrees();
    let (n, m) = noise.degrees();
    if n > p || m > l {
        caveats.push(format!(
            "noise degrees (n, m) = ({n}, {m}) exceed forcing degrees (p, l) = ({p}, {l})"
        ));
    }
    let (locked_phases, drift) = if ex.ncond_ok && ex.adas_ok {
        find_locked_phases(&p_theta, &j_theta, options.theta_grid)?
    } else {
        caveats.push(format!(
            "existence conditions fail (ncond_ok = {}, adas_ok = {}); locked phases were not computed",
            ex.ncond_ok, ex.adas_ok
        ));
        (Vec::new(), false)
    };
    if locked_phases.iter().any(|p| p.j_value == 0.0) {
        caveats.push("J vanishes at a locked phase; classified as unstable".into());
    }
    let horizon = ex.horizon(noise.mu, options.epsilon, options.t_star)?;
    if principal_stable(&locked_phases).is_none() {
        caveats.push("no stable lock: the horizon estimate does not apply".into());
    }
    if !(coeffs.z0.is_finite() && coeffs.z0 > 0.0) {
        return Err(Error::Validation("z0 is not a positive number".into()));
    }
    let analysis = ResonanceAnalysis {
        kappa,
        h: leading.h(),
        nu0: leading.nu0(),
        exponents: ex,
        z0: coeffs.z0,
        p_theta,
        j_theta,
        locked_phases,
        drift,
        horizon,
        caveats,
    };
    Ok((analysis, coeffs))
}
