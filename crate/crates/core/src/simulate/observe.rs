use std::f64::consts::TAU;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::numerics::wrap_angle;
use crate::oscillator::{OrbitTable, Potential};
use crate::reduction::{resonance_curve, ForcingSpec, ResonanceAnalysis, ResonanceTrack};
use crate::simulate::SamplePath;
use crate::Result;

/// Slow observables along a recorded path. Samples outside the outer
/// region are gaps and hold `NaN` in every derived column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub times: Vec<f64>,
    pub states: Vec<[f64; 2]>,
    pub rho: Vec<f64>,
    pub phi_lifted: Vec<f64>,
    /// `phi - S/kappa` wrapped to `(-pi, pi]`.
    pub theta: Vec<f64>,
    pub r: Vec<f64>,
    pub rho_kappa: Vec<f64>,
}

impl Observables {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn rho_ratio(&self) -> Vec<f64> {
        self.rho.iter().zip(&self.rho_kappa).map(|(r, k)| r / k).collect()
    }

    pub fn gap_count(&self) -> usize {
        self.rho.iter().filter(|r| r.is_nan()).count()
    }

    /// CSV with columns `t,x1,x2,rho,phi_lifted,Theta,R`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "x1", "x2", "rho", "phi_lifted", "Theta", "R"])?;
        for i in 0..self.len() {
            let row = [
                self.times[i],
                self.states[i][0],
                self.states[i][1],
                self.rho[i],
                self.phi_lifted[i],
                self.theta[i],
                self.r[i],
            ];
            w.write_record(row.iter().map(|v| format!("{v:e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Resonance amplitude at `t`, from the track when it covers `t`.
fn rho_kappa_at(track: &ResonanceTrack, potential: &Potential, forcing: &ForcingSpec, kappa: u32, t: f64) -> f64 {
    track
        .rho(t)
        .or_else(|| resonance_curve(potential, forcing, kappa, t).ok())
        .unwrap_or(f64::NAN)
}

/// Extracts `(rho, phi, Theta, R)` from a path.
///
/// The angle is lifted by predicting each increment from the mean of the
/// neighbouring orbit frequencies, then snapping the inverted phase to the
/// nearest branch. The prediction must be better than half a turn, which
/// holds whenever the record interval is short against the time over which
/// the frequency changes appreciably.
pub fn observables(
    path: &SamplePath,
    table: &OrbitTable,
    analysis: &ResonanceAnalysis,
    forcing: &ForcingSpec,
    track: &ResonanceTrack,
) -> Observables {
    let potential = table.potential();
    let kappa = analysis.kappa;
    let a = analysis.exponents.big_a.value();
    let freq = |rho: f64| table.frequency(rho).or_else(|_| potential.frequency(rho)).unwrap_or(f64::NAN);

    let n = path.times.len();
    let mut out = Observables {
        times: path.times.clone(),
        states: path.states.clone(),
        rho: Vec::with_capacity(n),
        phi_lifted: Vec::with_capacity(n),
        theta: Vec::with_capacity(n),
        r: Vec::with_capacity(n),
        rho_kappa: Vec::with_capacity(n),
    };
    // (time, lifted phase, frequency) of the last valid sample.
    let mut prev: Option<(f64, f64, f64)> = None;
    for (&t, x) in path.times.iter().zip(&path.states) {
        let rk = rho_kappa_at(track, potential, forcing, kappa, t);
        out.rho_kappa.push(rk);
        let Ok((rho, phi)) = table.invert(x[0], x[1]) else {
            prev = None;
            for col in [&mut out.rho, &mut out.phi_lifted, &mut out.theta, &mut out.r] {
                col.push(f64::NAN);
            }
            continue;
        };
        let nu = freq(rho);
        let slow = forcing.phase(t) / kappa as f64;
        let target = match prev {
            Some((tp, lp, nup)) if nu.is_finite() && nup.is_finite() => lp + 0.5 * (nu + nup) * (t - tp),
            // First sample or after a gap: take the branch nearest the excitation.
            _ => slow,
        };
        let lifted = phi + TAU * ((target - phi) / TAU).round();
        prev = Some((t, lifted, nu));
        out.rho.push(rho);
        out.phi_lifted.push(lifted);
        out.theta.push(wrap_angle(phi - slow));
        out.r.push((rho / rk - 1.0) * t.powf(a));
    }
    out
}

/// The point `(X1, X2)(S(t)/kappa + theta, rho_kappa(t))` on the resonant track.
pub fn track_point(potential: &Potential, forcing: &ForcingSpec, kappa: u32, theta: f64, t: f64) -> Result<[f64; 2]> {
    let rho = resonance_curve(potential, forcing, kappa, t)?;
    potential.orbit_point(forcing.phase(t) / kappa as f64 + theta, rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RandomStream;
    use crate::reduction::{analyze, AnalysisOptions, Exponent, NoiseSpec};
    use crate::simulate::{integrate_sde, DtControl, SdeProblem};

    fn ex1(q: f64, s: f64) -> (ForcingSpec, NoiseSpec, ResonanceAnalysis) {
        let third = Exponent::new(1, 3);
        let f = ForcingSpec::duffing(third, third, s, q, 0);
        let n = NoiseSpec::duffing(Exponent::new(1, 6), 0.0, 0);
        let (a, _) = analyze(&Potential::duffing(), &f, &n, 1, AnalysisOptions::default()).unwrap();
        (f, n, a)
    }

    fn table(rho_max: f64) -> OrbitTable {
        let grid = OrbitTable::geometric_grid(0.5, rho_max, 20);
        OrbitTable::build(&Potential::duffing(), &grid, 64).unwrap()
    }

    #[test]
    fn synthetic_track_round_trip() {
        let (f, _, a) = ex1(4.0, 0.5);
        let theta0 = a.theta0().unwrap();
        let u = Potential::duffing();
        let track = ResonanceTrack::new(&u, &f, 1, 100.0, 400.0).unwrap();
        let times: Vec<f64> = (0..=300).map(|i| 100.0 + i as f64).collect();
        // Synthesize with the same resonance amplitude the observables use.
        let states = times
            .iter()
            .map(|&t| u.orbit_point(f.phase(t) + theta0, track.rho(t).unwrap()).unwrap())
            .collect();
        let path = SamplePath { times, states, stream: None };
        let obs = observables(&path, &table(20.0), &a, &f, &track);
        for i in 0..obs.len() {
            assert!((obs.theta[i] - theta0).abs() < 1e-6, "{}", obs.theta[i]);
            assert!(obs.r[i].abs() < 1e-6, "{}", obs.r[i]);
            let lift_err = obs.phi_lifted[i] - (f.phase(obs.times[i]) + theta0);
            assert!(lift_err.abs() < 1e-6, "{lift_err}");
        }
    }

    #[test]
    fn lift_advances_by_full_turn_per_period() {
        let u = Potential::duffing();
        let (f, n, a) = ex1(4.0, 0.5);
        let quiet = ForcingSpec { terms: vec![crate::reduction::PolyTerm::cosine(0, 0, 1, 0.0)], ..f.clone() };
        let x0 = [3.0, 0.0];
        let period = u.period(u.amplitude(x0[0], x0[1]).unwrap()).unwrap();
        let p = SdeProblem { potential: u.clone(), forcing: quiet.clone(), noise: n, t0: 1.0, initial: x0, t_end: 1.0 + 10.0 * period };
        let control = DtControl { dt_max: 1e-3, osc_resolution: 1.0, record_interval: period / 7.0 };
        let path = integrate_sde(&p, &mut RandomStream::new(0, 0), &control).unwrap();
        let track = ResonanceTrack::new(&u, &f, 1, 1.0, 2.0).unwrap();
        let obs = observables(&path, &table(10.0), &a, &quiet, &track);
        let turns = (obs.phi_lifted.last().unwrap() - obs.phi_lifted[0]) / TAU;
        assert!((turns - 10.0).abs() < 1e-4, "{turns}");
        for w in obs.phi_lifted.windows(2) {
            assert!((w[1] - w[0] - TAU / 7.0).abs() < 1e-3);
        }
    }

    #[test]
    fn gaps_are_marked() {
        let (f, _, a) = ex1(4.0, 0.5);
        let u = Potential::duffing();
        let track = ResonanceTrack::new(&u, &f, 1, 100.0, 110.0).unwrap();
        let inside = u.orbit_point(0.3, 5.0).unwrap();
        let path = SamplePath { times: vec![100.0, 101.0, 102.0], states: vec![inside, [0.9, 0.0], inside], stream: None };
        let obs = observables(&path, &table(10.0), &a, &f, &track);
        assert_eq!(obs.gap_count(), 1);
        assert!(obs.theta[1].is_nan() && obs.r[1].is_nan());
        assert!(obs.theta[2].is_finite());
    }

    #[test]
    fn deterministic_capture_follows_track() {
        let (f, n, a) = ex1(4.0, 0.5);
        let u = Potential::duffing();
        let theta0 = a.theta0().unwrap();
        let t0 = 100.0;
        let p = SdeProblem {
            potential: u.clone(),
            forcing: f.clone(),
            noise: n,
            t0,
            initial: track_point(&u, &f, 1, theta0, t0).unwrap(),
            t_end: 1e5,
        };
        let control = DtControl { record_interval: 10.0, ..Default::default() };
        let path = integrate_sde(&p, &mut RandomStream::new(0, 0), &control).unwrap();
        let track = ResonanceTrack::new(&u, &f, 1, t0, 1e5).unwrap();
        let obs = observables(&path, &table(60.0), &a, &f, &track);
        let mut last_decade = Vec::new();
        for i in 0..obs.len() {
            let t = obs.times[i];
            if t >= 1e3 {
                let ratio = obs.rho[i] / (a.z0 * t.powf(1.0 / 3.0));
                assert!((0.9..=1.1).contains(&ratio), "t = {t}: {ratio}");
            }
            if t >= 1e4 {
                last_decade.push(obs.theta[i]);
            }
        }
        let mean = last_decade.iter().sum::<f64>() / last_decade.len() as f64;
        assert!((mean + 0.127).abs() < 0.05, "{mean}");
    }
}
