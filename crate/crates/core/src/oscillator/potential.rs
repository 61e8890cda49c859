use serde::{Deserialize, Serialize};

use crate::numerics::solve_scalar;
use crate::{Error, Result};

/// `U(x) = x^(2h+2)/(2h+2) + Σ_{i ≤ 2h+1} u_i x^i`.
///
/// The leading coefficient is implied by `h` and is not stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPotential", into = "RawPotential")]
pub struct Potential {
    h: u32,
    u: Vec<f64>,
    rho0_override: Option<f64>,
    floor: EnergyFloor,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct EnergyFloor {
    /// Highest interior critical value (U(0) included).
    top: f64,
    /// Level that defines rho0.
    admissible: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPotential {
    h: u32,
    u: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rho0: Option<f64>,
}

impl TryFrom<RawPotential> for Potential {
    type Error = Error;

    fn try_from(raw: RawPotential) -> Result<Self> {
        let p = Potential::new(raw.h, raw.u)?;
        match raw.rho0 {
            Some(r) => p.with_rho0(r),
            None => Ok(p),
        }
    }
}

impl From<Potential> for RawPotential {
    fn from(p: Potential) -> Self {
        RawPotential { h: p.h, u: p.u, rho0: p.rho0_override }
    }
}

impl Potential {
    /// `u` lists `u_0, u_1, …`; missing trailing coefficients are zero.
    pub fn new(h: u32, mut u: Vec<f64>) -> Result<Self> {
        let n = 2 * h as usize + 2;
        if u.len() > n {
            return Err(Error::Validation(format!(
                "potential with h = {h} takes at most {n} free coefficients, got {}",
                u.len()
            )));
        }
        if u.iter().any(|c| !c.is_finite()) {
            return Err(Error::Validation("potential coefficients must be finite".into()));
        }
        u.resize(n, 0.0);
        let mut p = Self {
            h,
            u,
            rho0_override: None,
            floor: EnergyFloor { top: 0.0, admissible: 0.0 },
        };
        p.floor = p.compute_floor()?;
        Ok(p)
    }

    pub fn harmonic() -> Self {
        Self::new(0, vec![]).expect("harmonic potential is valid")
    }

    /// `x^4/4 - x^2/2`.
    pub fn duffing() -> Self {
        Self::new(1, vec![0.0, 0.0, -0.5, 0.0]).expect("Duffing potential is valid")
    }

    pub fn with_rho0(mut self, rho0: f64) -> Result<Self> {
        let level = rho0.powi(self.level_power());
        if !(rho0 >= 0.0) || level <= self.floor.top {
            return Err(Error::Validation(format!(
                "rho0 = {rho0} must lie strictly above the highest critical level {}",
                self.floor.top
            )));
        }
        self.rho0_override = Some(rho0);
        Ok(self)
    }

    pub fn h(&self) -> u32 {
        self.h
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.u
    }

    /// `2h + 2`.
    pub fn level_power(&self) -> i32 {
        2 * self.h as i32 + 2
    }

    /// All polynomial coefficients of `U`, constant term first.
    pub fn poly(&self) -> Vec<f64> {
        let mut c = self.u.clone();
        c.push(1.0 / self.level_power() as f64);
        c
    }

    pub fn value(&self, x: f64) -> f64 {
        let top = 1.0 / self.level_power() as f64;
        self.u.iter().rev().fold(top, |acc, c| acc * x + c)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let n = self.u.len();
        let mut acc = 1.0; // coefficient of x^(2h+1)
        for i in (1..n).rev() {
            acc = acc * x + i as f64 * self.u[i];
        }
        acc
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        let mut acc = (2 * self.h + 1) as f64;
        for i in (2..self.u.len()).rev() {
            acc = acc * x + (i * (i - 1)) as f64 * self.u[i];
        }
        acc
    }

    pub fn energy(&self, x1: f64, x2: f64) -> f64 {
        0.5 * x2 * x2 + self.value(x1)
    }

    /// Amplitude `H^(1/(2h+2))` of a point, or `None` when `H ≤ 0`.
    pub fn amplitude(&self, x1: f64, x2: f64) -> Option<f64> {
        let e = self.energy(x1, x2);
        (e > 0.0).then(|| e.powf(1.0 / self.level_power() as f64))
    }

    /// Lowest admissible amplitude of the outer region.
    pub fn rho0(&self) -> f64 {
        self.rho0_override
            .unwrap_or_else(|| self.floor.admissible.max(0.0).powf(1.0 / self.level_power() as f64))
    }

    /// Energy level `rho0^(2h+2)` bounding the outer region from below.
    pub fn admissible_energy(&self) -> f64 {
        self.rho0().powi(self.level_power())
    }

    /// Highest interior critical value of `U` (with `U(0)` included).
    pub fn critical_top(&self) -> f64 {
        self.floor.top
    }

    pub fn is_admissible(&self, rho: f64) -> bool {
        rho > self.rho0() && rho.powi(self.level_power()) > self.floor.top
    }

    pub fn check_level(&self, rho: f64) -> Result<()> {
        if self.is_admissible(rho) {
            Ok(())
        } else {
            Err(Error::BelowSeparatrix { rho, rho0: self.rho0() })
        }
    }

    /// Real critical points of `U`, ascending.
    pub fn critical_points(&self) -> Vec<f64> {
        let n = self.u.len();
        // Cauchy bound for the monic derivative.
        let bound = 1.0
            + (1..n)
                .map(|i| (i as f64 * self.u[i]).abs())
                .fold(0.0, f64::max);
        let samples = 4000;
        let xs: Vec<f64> = (0..=samples)
            .map(|i| -bound + 2.0 * bound * i as f64 / samples as f64)
            .collect();
        let d: Vec<f64> = xs.iter().map(|&x| self.derivative(x)).collect();
        let scale = 1.0 + bound.powi(2 * self.h as i32 + 1);
        let mut out = Vec::new();
        for i in 0..samples {
            if d[i] == 0.0 {
                out.push(xs[i]);
            } else if d[i].signum() != d[i + 1].signum() && d[i + 1] != 0.0 {
                if let Ok(x) = solve_scalar(|x| self.derivative(x), xs[i], xs[i + 1], 1e-14) {
                    out.push(x);
                }
            }
        }
        // Tangential zeros of U' (inflection critical points).
        for i in 1..samples {
            if d[i].abs() < d[i - 1].abs() && d[i].abs() <= d[i + 1].abs() && d[i - 1].signum() == d[i + 1].signum() {
                let dd = |x: f64| self.second_derivative(x);
                if let Ok(x) = solve_scalar(dd, xs[i - 1], xs[i + 1], 1e-14) {
                    if self.derivative(x).abs() < 1e-10 * scale {
                        out.push(x);
                    }
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        out
    }

    fn compute_floor(&self) -> Result<EnergyFloor> {
        let crit = self.critical_points();
        let values: Vec<f64> = crit.iter().map(|&x| self.value(x)).collect();
        let top = values.iter().copied().fold(self.value(0.0), f64::max);
        let bottom = values.iter().copied().fold(f64::INFINITY, f64::min);
        let bottom = if bottom.is_finite() { bottom } else { top };
        let admissible = top + 0.1 * (top.abs() + (top - bottom));
        if !admissible.is_finite() {
            return Err(Error::Validation("potential has no finite critical levels".into()));
        }
        Ok(EnergyFloor { top, admissible })
    }
}
