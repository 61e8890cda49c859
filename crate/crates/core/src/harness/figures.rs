use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde_json::json;

use crate::numerics::RandomStream;
use crate::reduction::{duffing_threshold, ThresholdCase};
use crate::{Error, Result};

use super::bundle::{path_file_name, BundleWriter};
use super::ensemble::{PathRun, Prepared};
use super::scenario::{EnsembleConfig, Horizon, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig2a,
    Fig2b,
    Fig3,
    Fig4,
    Fig5,
}

impl Figure {
    pub const ALL: [Figure; 5] = [Figure::Fig2a, Figure::Fig2b, Figure::Fig3, Figure::Fig4, Figure::Fig5];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2a => "fig2a",
            Figure::Fig2b => "fig2b",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
        }
    }

    /// The scenario each figure reproduces.
    pub fn scenario(self) -> Scenario {
        let (base, mu, paths) = match self {
            Figure::Fig2a => ("fex0", 0.0, 1),
            Figure::Fig2b => ("fex0", 0.2, 5),
            Figure::Fig3 => ("ex1", 0.2, 5),
            Figure::Fig4 => ("ex2", 0.2, 5),
            Figure::Fig5 => ("ex3", 0.2, 5),
        };
        let mut s = Scenario::builtin(base).expect("builtin").with_mu(mu);
        s.name = self.name().to_string();
        s.t_end = Horizon::Fixed(3000.0);
        s.ensemble = EnsembleConfig { path_count: paths, master_seed: 2024 };
        s
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Validation(format!("unknown figure {s:?}; expected fig2a, fig2b, fig3, fig4 or fig5")))
    }
}

/// Amplitude multipliers of the fig2a sweep relative to the resonance
/// curve at `t0`, all started at the principal locked phase.
pub const FIG2A_SWEEP: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];

/// Per-path series, a reference-curve file and a metadata sidecar for one
/// figure, plus the manifest. Returns the manifest path.
pub fn emit_figure_data(figure: Figure, out_dir: &Path) -> Result<PathBuf> {
    emit_scenario_figure(figure, &figure.scenario(), out_dir)
}

/// As [`emit_figure_data`] with an explicit (for example shortened) scenario.
pub fn emit_scenario_figure(figure: Figure, scenario: &Scenario, out_dir: &Path) -> Result<PathBuf> {
    let prepared = Prepared::new(scenario)?;
    let s = &prepared.scenario;
    let runs: Vec<(PathRun, [f64; 2])> = if figure == Figure::Fig2a {
        let base = prepared.initial_state(&mut RandomStream::new(0, 0))?;
        let rho_track = s.potential.amplitude(base[0], base[1]).unwrap_or(f64::NAN);
        let locked = if prepared.theta0.is_nan() { 0.0 } else { prepared.theta0 };
        let phase = s.forcing.phase(s.t0) / s.kappa as f64 + locked;
        FIG2A_SWEEP
            .par_iter()
            .enumerate()
            .map(|(i, &factor)| {
                let x0 = s.potential.orbit_point(phase, factor * rho_track)?;
                Ok((prepared.run_path_from(i as u64, Some(x0), true)?, x0))
            })
            .collect::<Result<_>>()?
    } else {
        (0..s.ensemble.path_count as u64)
            .into_par_iter()
            .map(|i| {
                let x0 = prepared.initial_state(&mut RandomStream::new(s.ensemble.master_seed, i))?;
                Ok((prepared.run_path(i, true)?, x0))
            })
            .collect::<Result<_>>()?
    };

    let mut out = BundleWriter::create(out_dir)?;
    let mut listing = Vec::new();
    for (run, x0) in &runs {
        let v = run.verdict;
        let file = path_file_name(v.index);
        if let Some(obs) = &run.observables {
            let mut buf = Vec::new();
            obs.write_csv(&mut buf)?;
            out.write(&file, &buf)?;
        } else {
            out.warn(format!("path {} blew up; no series written", v.index));
        }
        listing.push(json!({
            "file": file,
            "initial": x0,
            "label": if v.captured { "resonant" } else { "non-resonant" },
            "verdict": v,
        }));
    }

    let a = &prepared.analysis;
    let growth = s.forcing.beta.value() / s.potential.h() as f64;
    let mut reference = csv::Writer::from_writer(Vec::new());
    reference.write_record(["t", "rho_ref", "rho_kappa", "Theta0"])?;
    let n = 200;
    for i in 0..=n {
        let t = s.t0 * (prepared.t_end / s.t0).powf(i as f64 / n as f64);
        let rk = prepared.track.rho(t).unwrap_or(f64::NAN);
        reference.write_record([t, a.z0 * t.powf(growth), rk, prepared.theta0].iter().map(|v| format!("{v:e}")))?;
    }
    let reference = reference.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    out.write("reference.csv", &reference)?;

    let (p, _) = s.forcing.degrees();
    let case = if p == 0 { ThresholdCase::P0Odd } else { ThresholdCase::P1Even };
    let threshold = duffing_threshold(s.kappa, case).ok();
    let metadata = json!({
        "figure": figure.name(),
        "constants": {
            "z0": a.z0,
            "theta0": a.theta0(),
            "Q_kappa": threshold,
            "kappa": s.kappa,
            "rho_ref_exponent": growth,
        },
        "columns": {
            "paths": {
                "t": "time",
                "x1": "position",
                "x2": "velocity",
                "rho": "amplitude H^(1/(2h+2)); NaN outside the outer region",
                "phi_lifted": "continuous phase",
                "Theta": "phi - S(t)/kappa wrapped to (-pi, pi]",
                "R": "(rho/rho_kappa - 1) t^A",
            },
            "reference": {
                "t": "time (log-spaced)",
                "rho_ref": "z0 t^(beta/h)",
                "rho_kappa": "resonance curve",
                "Theta0": "principal locked phase (NaN when none)",
            },
        },
        "paths": listing,
        "scenario": s,
    });
    out.write_json("metadata.json", &metadata)?;
    out.finish(json!({ "figure": figure.name(), "master_seed": s.ensemble.master_seed }))
}
