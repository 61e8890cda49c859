use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;

use crate::numerics::RandomStream;
use crate::oscillator::OrbitTable;
use crate::reduction::{analyze, resonance_curve, AveragedCoefficients, ResonanceAnalysis, ResonanceTrack};
use crate::simulate::{detect_capture, integrate_sde, observables, CaptureVerdict, Observables, SamplePath, SdeProblem};
use crate::{Error, Result};

use super::scenario::{Horizon, InitialRule, Scenario, HORIZON_CAP};

/// Everything the paths of one scenario share, computed once.
pub struct Prepared {
    /// The scenario with `t_end` resolved to a fixed time.
    pub scenario: Scenario,
    pub analysis: ResonanceAnalysis,
    pub coefficients: AveragedCoefficients,
    pub table: OrbitTable,
    pub track: ResonanceTrack,
    pub t_end: f64,
    /// Phase the detector locks onto; the principal stable lock, or `NaN`.
    pub theta0: f64,
}

impl Prepared {
    /// Validates the scenario and runs the reduction. Fails before any path
    /// is integrated when the exponent preconditions do not hold.
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let (analysis, coefficients) = analyze(
            &scenario.potential,
            &scenario.forcing,
            &scenario.noise,
            scenario.kappa,
            scenario.analysis,
        )?;
        if !(analysis.ncond_ok() && analysis.adas_ok()) {
            return Err(Error::Validation(format!(
                "exponent preconditions fail for {:?}: ncond_ok = {}, adas_ok = {}",
                scenario.name,
                analysis.ncond_ok(),
                analysis.adas_ok()
            )));
        }
        let t0 = scenario.t0;
        let t_end = match scenario.t_end {
            Horizon::Fixed(t) => t,
            Horizon::Rule(_) => {
                let est = analysis.exponents.horizon(scenario.noise.mu, scenario.analysis.epsilon, t0)?;
                est.t_tilde.map_or(HORIZON_CAP, |tt| (t0 + tt).min(HORIZON_CAP))
            }
        };
        if !(t_end > t0) {
            return Err(Error::Validation(format!("resolved horizon {t_end} does not exceed t0 = {t0}")));
        }
        // Probe first so a pre-asymptotic start is reported as such.
        let rho_end = resonance_curve(&scenario.potential, &scenario.forcing, scenario.kappa, t_end)?;
        resonance_curve(&scenario.potential, &scenario.forcing, scenario.kappa, t0)?;
        let track = ResonanceTrack::new(&scenario.potential, &scenario.forcing, scenario.kappa, t0, t_end)?;
        let rho0 = scenario.potential.rho0();
        let grid = OrbitTable::geometric_grid(rho0 * 1.05, (3.0 * rho_end).max(rho0 * 10.0), 16);
        let table = OrbitTable::build(&scenario.potential, &grid, 64)?;
        let mut resolved = scenario.clone();
        resolved.t_end = Horizon::Fixed(t_end);
        let theta0 = analysis.theta0().unwrap_or(f64::NAN);
        Ok(Self { scenario: resolved, analysis, coefficients, table, track, t_end, theta0 })
    }

    /// Initial state of path `index`; perturbed starts draw from `stream`.
    pub fn initial_state(&self, stream: &mut RandomStream) -> Result<[f64; 2]> {
        let s = &self.scenario;
        let base = if self.theta0.is_nan() { 0.0 } else { self.theta0 };
        let (d_r, d_theta) = match s.initial {
            InitialRule::Explicit { x1, x2 } => return Ok([x1, x2]),
            InitialRule::OnTrack => (0.0, 0.0),
            InitialRule::PerturbedTrack { delta } => {
                let radius = delta * stream.next_uniform().sqrt();
                let angle = TAU * stream.next_uniform();
                (radius * angle.cos(), radius * angle.sin())
            }
        };
        let t0 = s.t0;
        let rho_k = resonance_curve(&s.potential, &s.forcing, s.kappa, t0)?;
        let rho = rho_k * (1.0 + d_r * t0.powf(-self.analysis.exponents.big_a.value()));
        let phi = s.forcing.phase(t0) / s.kappa as f64 + base + d_theta;
        s.potential.orbit_point(phi, rho)
    }

    pub fn problem(&self, initial: [f64; 2]) -> SdeProblem {
        let s = &self.scenario;
        SdeProblem {
            potential: s.potential.clone(),
            forcing: s.forcing.clone(),
            noise: s.noise.clone(),
            t0: s.t0,
            initial,
            t_end: self.t_end,
        }
    }

    pub fn simulate(&self, index: u64) -> Result<SamplePath> {
        self.simulate_from(index, None)
    }

    /// Path `index`, started from `initial` instead of the scenario's rule
    /// when given.
    pub fn simulate_from(&self, index: u64, initial: Option<[f64; 2]>) -> Result<SamplePath> {
        let mut stream = RandomStream::new(self.scenario.ensemble.master_seed, index);
        let x0 = match initial {
            Some(x) => x,
            None => self.initial_state(&mut stream)?,
        };
        integrate_sde(&self.problem(x0), &mut stream, &self.scenario.dt_control)
    }

    pub fn observe(&self, path: &SamplePath) -> Observables {
        observables(path, &self.table, &self.analysis, &self.scenario.forcing, &self.track)
    }

    /// Integrates, observes and judges one path. Blow-ups become
    /// non-captured verdicts rather than errors.
    pub fn run_path(&self, index: u64, keep_observables: bool) -> Result<PathRun> {
        self.run_path_from(index, None, keep_observables)
    }

    pub fn run_path_from(&self, index: u64, initial: Option<[f64; 2]>, keep_observables: bool) -> Result<PathRun> {
        match self.simulate_from(index, initial) {
            Ok(path) => {
                let obs = self.observe(&path);
                let ratio = obs.rho_ratio();
                let verdict = detect_capture(&obs.times, &obs.theta, &ratio, self.theta0, &self.scenario.capture);
                let summary = PathVerdict {
                    index,
                    captured: verdict.captured,
                    sup_deviation: verdict.sup_deviation,
                    exit_time: verdict.exit_time,
                    final_rho_ratio: *ratio.last().expect("paths hold at least the initial sample"),
                    blow_up: None,
                };
                Ok(PathRun { verdict: summary, observables: keep_observables.then_some(obs) })
            }
            Err(Error::BlowUp { last_valid, .. }) => {
                let v = CaptureVerdict::failed(last_valid);
                let summary = PathVerdict {
                    index,
                    captured: false,
                    sup_deviation: v.sup_deviation,
                    exit_time: v.exit_time,
                    final_rho_ratio: f64::INFINITY,
                    blow_up: Some(last_valid),
                };
                Ok(PathRun { verdict: summary, observables: None })
            }
            Err(e) => Err(e),
        }
    }

    /// All paths of the ensemble, in index order regardless of scheduling.
    pub fn run_all(&self, keep_observables: bool) -> Result<Vec<PathRun>> {
        (0..self.scenario.ensemble.path_count as u64)
            .into_par_iter()
            .map(|i| self.run_path(i, keep_observables))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathVerdict {
    pub index: u64,
    pub captured: bool,
    pub sup_deviation: f64,
    pub exit_time: Option<f64>,
    /// `rho / rho_kappa` at the last recorded time.
    pub final_rho_ratio: f64,
    /// Last finite time when the path hit the overflow guard.
    pub blow_up: Option<f64>,
}

pub struct PathRun {
    pub verdict: PathVerdict,
    pub observables: Option<Observables>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quantiles {
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
}

/// Capture statistics of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub path_count: usize,
    pub captured_count: usize,
    pub capture_fraction: f64,
    /// Binomial standard error `sqrt(f (1 - f) / n)`.
    pub standard_error: f64,
    pub sup_deviation_quantiles: Quantiles,
    /// Sorted exit times of the paths that left the lock.
    pub exit_times: Vec<f64>,
    pub blow_up_count: usize,
    pub verdicts: Vec<PathVerdict>,
}

/// Nearest-rank quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

impl EnsembleStats {
    /// Reduces per-path verdicts; the result does not depend on their order.
    pub fn from_verdicts(mut verdicts: Vec<PathVerdict>) -> Self {
        verdicts.sort_by_key(|v| v.index);
        let n = verdicts.len();
        let captured_count = verdicts.iter().filter(|v| v.captured).count();
        let f = if n > 0 { captured_count as f64 / n as f64 } else { f64::NAN };
        let mut sups: Vec<f64> = verdicts.iter().map(|v| v.sup_deviation).collect();
        sups.sort_by(f64::total_cmp);
        let mut exit_times: Vec<f64> = verdicts.iter().filter_map(|v| v.exit_time).collect();
        exit_times.sort_by(f64::total_cmp);
        Self {
            path_count: n,
            captured_count,
            capture_fraction: f,
            standard_error: (f * (1.0 - f) / n as f64).sqrt(),
            sup_deviation_quantiles: Quantiles {
                p50: quantile(&sups, 0.5),
                p90: quantile(&sups, 0.9),
                p99: quantile(&sups, 0.99),
            },
            exit_times,
            blow_up_count: verdicts.iter().filter(|v| v.blow_up.is_some()).count(),
            verdicts,
        }
    }

    /// Fraction of paths whose final amplitude ratio lies below `level`.
    pub fn fraction_below(&self, level: f64) -> f64 {
        let k = self.verdicts.iter().filter(|v| v.final_rho_ratio < level).count();
        k as f64 / self.path_count as f64
    }
}

/// Runs every path of the scenario and reduces the verdicts.
pub fn run_ensemble(config: &Scenario) -> Result<EnsembleStats> {
    let prepared = Prepared::new(config)?;
    let runs = prepared.run_all(false)?;
    Ok(EnsembleStats::from_verdicts(runs.into_iter().map(|r| r.verdict).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::scenario::EnsembleConfig;
    use proptest::prelude::*;

    fn small(mu: f64, paths: usize) -> Scenario {
        let mut s = Scenario::builtin("ex1").unwrap().with_mu(mu);
        s.t_end = Horizon::Fixed(400.0);
        s.ensemble = EnsembleConfig { path_count: paths, master_seed: 11 };
        s
    }

    #[test]
    fn auto_horizon_is_power_law() {
        let s = Scenario::builtin("ex1").unwrap().with_mu(0.2);
        let p = Prepared::new(&s).unwrap();
        assert!((p.t_end - 100.0 * 0.2f64.powf(-0.75)).abs() < 1e-6, "{}", p.t_end);
    }

    #[test]
    fn deterministic_on_track_ensemble_is_captured() {
        let stats = run_ensemble(&small(0.0, 4)).unwrap();
        assert_eq!(stats.capture_fraction, 1.0);
        assert_eq!(stats.standard_error, 0.0);
        assert!(stats.exit_times.is_empty());
    }

    #[test]
    fn repeated_runs_identical() {
        let s = small(0.3, 6);
        let a = run_ensemble(&s).unwrap();
        let b = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run_ensemble(&s).unwrap());
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn perturbed_start_moves_off_track() {
        let mut s = small(0.0, 2);
        s.initial = InitialRule::PerturbedTrack { delta: 0.5 };
        let p = Prepared::new(&s).unwrap();
        let a = p.simulate(0).unwrap();
        let b = p.simulate(1).unwrap();
        assert_ne!(a.states[0], b.states[0]);
        let on = Prepared::new(&small(0.0, 1)).unwrap().simulate(0).unwrap();
        let rho = |x: [f64; 2]| s.potential.amplitude(x[0], x[1]).unwrap();
        let rel = (rho(a.states[0]) / rho(on.states[0]) - 1.0).abs();
        assert!(rel > 0.0 && rel <= 0.5 * 100f64.powf(-2.0 / 3.0) + 1e-12, "{rel}");
    }

    #[test]
    fn blow_up_is_a_verdict() {
        let mut s = small(0.0, 1);
        s.initial = InitialRule::Explicit { x1: 1e7, x2: 1e7 };
        let p = Prepared::new(&s).unwrap();
        let run = p.run_path(0, false).unwrap();
        assert!(!run.verdict.captured);
        assert!(run.verdict.blow_up.is_some());
    }

    #[test]
    fn preconditions_checked_before_compute() {
        let mut s = small(0.0, 1);
        // An undamped cubic forcing gives M1 = beta, violating M < beta.
        let third = crate::reduction::Exponent::new(1, 3);
        s.forcing = crate::reduction::ForcingSpec::duffing(crate::reduction::Exponent::zero(), third, 0.5, 4.0, 3);
        assert!(matches!(Prepared::new(&s), Err(e) if e.is_validation()));
    }

    fn verdict(index: u64, captured: bool, sup: f64) -> PathVerdict {
        PathVerdict {
            index,
            captured,
            sup_deviation: sup,
            exit_time: (!captured).then_some(index as f64),
            final_rho_ratio: 1.0,
            blow_up: None,
        }
    }

    proptest! {
        #[test]
        fn stats_invariants(flags in prop::collection::vec((any::<bool>(), 0.0f64..5.0), 1..80), seed in any::<u64>()) {
            let vs: Vec<PathVerdict> = flags.iter().enumerate().map(|(i, &(c, s))| verdict(i as u64, c, s)).collect();
            let a = EnsembleStats::from_verdicts(vs.clone());
            let mut shuffled = vs;
            let n = shuffled.len();
            for i in 0..n {
                let j = (seed.wrapping_mul(i as u64 + 1) % n as u64) as usize;
                shuffled.swap(i, j);
            }
            let b = EnsembleStats::from_verdicts(shuffled);
            prop_assert_eq!(&a, &b);
            let k = a.capture_fraction * a.path_count as f64;
            prop_assert!((k - k.round()).abs() < 1e-9);
            let q = a.sup_deviation_quantiles;
            prop_assert!(q.p50 <= q.p90 && q.p90 <= q.p99);
        }
    }
}
