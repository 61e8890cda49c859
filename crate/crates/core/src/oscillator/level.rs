use std::f64::consts::{PI, SQRT_2, TAU};

use crate::numerics::{gauss_legendre, integrate_singular, rk4_step, solve_scalar, QuadratureSpec};
use crate::oscillator::{Potential, STEPS_PER_PERIOD};
use crate::{Error, Result};

/// One closed level curve `H(x1, x2) = rho^(2h+2)` of the limiting system.
///
/// `quotient` holds `q(x) = (E - U(x)) / ((x - x_minus)(x_plus - x))`, which
/// is positive on `[x_minus, x_plus]`; all arc integrals are written in terms
/// of it so that no endpoint cancellation occurs.
#[derive(Debug, Clone)]
pub struct Level<'a> {
    potential: &'a Potential,
    rho: f64,
    energy: f64,
    x_minus: f64,
    x_plus: f64,
    quotient: Vec<f64>,
    period: f64,
}

impl Potential {
    /// Turning points `x_minus < 0 < x_plus` of the level `rho`.
    pub fn turning_points(&self, rho: f64) -> Result<(f64, f64)> {
        self.check_level(rho)?;
        let e = rho.powi(self.level_power());
        let g = |x: f64| self.value(x) - e;
        let crit = self.critical_points();
        let right = crit.iter().copied().fold(0.0, f64::max);
        let left = crit.iter().copied().fold(0.0, f64::min);
        let mut step = 1.0f64.max(rho);
        let mut hi = right + step;
        while g(hi) <= 0.0 {
            step *= 2.0;
            hi = right + step;
        }
        let mut step = 1.0f64.max(rho);
        let mut lo = left - step;
        while g(lo) <= 0.0 {
            step *= 2.0;
            lo = left - step;
        }
        let tol = 1e-15 * hi.abs().max(1.0);
        let xp = solve_scalar(g, right, hi, tol)?;
        let xm = solve_scalar(g, lo, left, 1e-15 * lo.abs().max(1.0))?;
        Ok((xm, xp))
    }

    pub fn level(&self, rho: f64) -> Result<Level<'_>> {
        let (x_minus, x_plus) = self.turning_points(rho)?;
        let energy = rho.powi(self.level_power());
        let mut c = self.poly();
        c[0] -= energy;
        let c = deflate(&c, x_plus);
        let c = deflate(&c, x_minus);
        // U - E = (x - x_plus)(x - x_minus) c(x), so q = c.
        let mut level = Level { potential: self, rho, energy, x_minus, x_plus, quotient: c, period: 0.0 };
        level.period = level.compute_period()?;
        Ok(level)
    }

    /// `T(rho)`.
    pub fn period(&self, rho: f64) -> Result<f64> {
        Ok(self.level(rho)?.period)
    }

    /// `nu(rho) = 2π / T(rho)`.
    pub fn frequency(&self, rho: f64) -> Result<f64> {
        Ok(TAU / self.period(rho)?)
    }

    /// Forward action-angle map `(phi, rho) ↦ (X1, X2)`.
    pub fn orbit_point(&self, phi: f64, rho: f64) -> Result<[f64; 2]> {
        self.level(rho)?.point_at(phi)
    }

    /// Inverse map `(x1, x2) ↦ (rho, phi)` with `phi ∈ [0, 2π)`.
    pub fn invert(&self, x1: f64, x2: f64) -> Result<(f64, f64)> {
        let e = self.energy(x1, x2);
        let floor = self.admissible_energy().max(self.critical_top());
        if !(e > floor) || e <= 0.0 {
            return Err(Error::OutsideDomain { x1, x2, level: floor });
        }
        let rho = e.powf(1.0 / self.level_power() as f64);
        let level = self.level(rho)?;
        Ok((rho, level.phase_of(x1, x2)))
    }

    pub(crate) fn limiting_field(&self) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
        move |_t, x| [x[1], -self.derivative(x[0])]
    }
}

/// Divides a polynomial (constant term first) by `(x - root)`.
fn deflate(c: &[f64], root: f64) -> Vec<f64> {
    let n = c.len() - 1;
    let mut q = vec![0.0; n];
    let mut carry = c[n];
    for k in (0..n).rev() {
        q[k] = carry;
        carry = c[k] + root * carry;
    }
    q
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v)
}

impl<'a> Level<'a> {
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn turning_points(&self) -> (f64, f64) {
        (self.x_minus, self.x_plus)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn frequency(&self) -> f64 {
        TAU / self.period
    }

    fn q(&self, x: f64) -> f64 {
        horner(&self.quotient, x)
    }

    fn compute_period(&self) -> Result<f64> {
        integrate_singular(
            |x| {
                let q = self.q(x);
                if q > 0.0 { SQRT_2 / q.sqrt() } else { f64::NAN }
            },
            self.x_minus,
            self.x_plus,
            QuadratureSpec::singular(),
        )
    }

    /// Sine-substitution angle of an orbit point, in `[-π/2, π/2]`.
    fn arc_angle(&self, x1: f64, x2: f64) -> f64 {
        let r = 0.5 * (self.x_plus - self.x_minus);
        let s = (x1 - 0.5 * (self.x_plus + self.x_minus)) / r;
        let q = self.q(x1.clamp(self.x_minus, self.x_plus)).max(f64::MIN_POSITIVE);
        let c = x2.abs() / (r * (2.0 * q).sqrt());
        s.atan2(c)
    }

    /// Travel time from `(x_plus, 0)` to the point with abscissa `x1` along
    /// the lower half of the orbit.
    pub fn time_from_turning_point(&self, angle: f64) -> f64 {
        let c = 0.5 * (self.x_plus + self.x_minus);
        let r = 0.5 * (self.x_plus - self.x_minus);
        gauss_legendre().integrate(
            |u| 1.0 / (2.0 * self.q(c + r * u.sin())).sqrt(),
            angle,
            0.5 * PI,
        )
    }

    /// Angle variable of an orbit point, in `[0, 2π)`.
    pub fn phase_of(&self, x1: f64, x2: f64) -> f64 {
        let t = self.time_from_turning_point(self.arc_angle(x1, x2));
        let phi = if x2 <= 0.0 { self.frequency() * t } else { TAU - self.frequency() * t };
        phi.rem_euclid(TAU)
    }

    /// Orbit point at angle `phi`, by RK4 from the nearer turning point.
    pub fn point_at(&self, phi: f64) -> Result<[f64; 2]> {
        let phi = phi.rem_euclid(TAU);
        let (start, from) = if phi < PI { ([self.x_plus, 0.0], 0.0) } else { ([self.x_minus, 0.0], PI) };
        let time = (phi - from) / self.frequency();
        let h = self.period / STEPS_PER_PERIOD as f64;
        let f = self.potential.limiting_field();
        let n = (time / h).floor() as usize;
        let mut x = start;
        for i in 0..n {
            x = rk4_step(&f, i as f64 * h, &x, h);
        }
        let rest = time - n as f64 * h;
        if rest > 0.0 {
            x = rk4_step(&f, n as f64 * h, &x, rest);
        }
        if !x[0].is_finite() || !x[1].is_finite() {
            return Err(Error::Evaluation { abscissa: phi });
        }
        Ok(x)
    }

    /// Samples one period on a uniform phase grid of `count` points and
    /// reports the largest relative energy drift.
    pub fn sample_orbit(&self, count: usize) -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let sub = STEPS_PER_PERIOD.div_ceil(count).max(1);
        let h = self.period / (count * sub) as f64;
        let f = self.potential.limiting_field();
        let mut x = [self.x_plus, 0.0];
        let mut xs = Vec::with_capacity(count);
        let mut vs = Vec::with_capacity(count);
        let mut drift: f64 = 0.0;
        let scale = self.energy.abs().max(f64::MIN_POSITIVE);
        for j in 0..count {
            xs.push(x[0]);
            vs.push(x[1]);
            drift = drift.max((self.potential.energy(x[0], x[1]) - self.energy).abs() / scale);
            for k in 0..sub {
                x = rk4_step(&f, (j * sub + k) as f64 * h, &x, h);
            }
        }
        Ok((xs, vs, drift))
    }
}
