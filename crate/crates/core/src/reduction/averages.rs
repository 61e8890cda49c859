use rayon::prelude::*;

use crate::numerics::{periodic_average, QuadratureSpec, TrigSeries};
use crate::oscillator::LeadingOrbit;
use crate::reduction::{exponents, Exponents, ForcingSpec, NoiseSpec};
use crate::{Error, Result};

/// Default number of Θ samples for the averaged functions.
pub const THETA_GRID: usize = 1024;
const SERIES_TOL: f64 = 1e-14;

/// Leading (order-zero) averaged coefficients of the reduced system.
///
/// `f10 .. c20` are the closed-form leading coefficients of the amplitude-angle
/// system; the `theta_*` series are their ζ-averages along the resonance,
/// sampled on a Θ grid and stored as trigonometric series.
#[derive(Debug, Clone)]
pub struct AveragedCoefficients {
    pub kappa: u32,
    pub exponents: Exponents,
    pub z0: f64,
    pub mu: f64,
    pub theta_1_a_0: TrigSeries,
    pub theta_1_2a_0: TrigSeries,
    pub theta_1_2cma_0: TrigSeries,
    pub theta_2_2a_0: TrigSeries,
    pub chi_1_bma_0: f64,
    pub chi_1_b_0: f64,
    pub chi_2_a_0: f64,
    pub chi_2_2a_0: f64,
    leading: LeadingOrbit,
    forcing: ForcingSpec,
    noise: NoiseSpec,
}

impl AveragedCoefficients {
    pub fn leading(&self) -> &LeadingOrbit {
        &self.leading
    }

    fn h1(&self) -> f64 {
        f64::from(self.leading.h()) + 1.0
    }

    fn orbit(&self, phi: f64) -> (f64, f64) {
        (self.leading.x1(phi), self.leading.x2(phi))
    }

    pub fn f10(&self, phi: f64, s: f64) -> f64 {
        let (x, y) = self.orbit(phi);
        self.f_at(x, y, s)[0]
    }

    pub fn f20(&self, phi: f64, s: f64) -> f64 {
        let (x, y) = self.orbit(phi);
        self.f_at(x, y, s)[1]
    }

    pub fn g10(&self, phi: f64, s: f64) -> f64 {
        let (x, y) = self.orbit(phi);
        self.g_at(x, y, s)[0]
    }

    pub fn g20(&self, phi: f64, s: f64) -> f64 {
        let (x, y) = self.orbit(phi);
        self.g_at(x, y, s)[1]
    }

    pub fn c10(&self, phi: f64, s: f64) -> f64 {
        let (x, y) = self.orbit(phi);
        self.c_at(x, y, s)[0]
    }

    pub fn c20(&self, phi: f64, s: f64) -> f64 {
        let (x, y) = self.orbit(phi);
        self.c_at(x, y, s)[1]
    }

    // The closed forms below take the orbit point (X10, X20) directly and use
    // dX10 = X20/nu0, d2X10 = -X10^(2h+1)/nu0^2.

    fn f_at(&self, x: f64, y: f64, s: f64) -> [f64; 2] {
        let (p, l) = self.forcing.degrees();
        let nu0 = self.leading.nu0();
        let pre = nu0 * self.forcing.top_coefficient(s) / (2.0 * self.h1()) * x.powi(p as i32) * y.powi(l as i32);
        [pre * y / nu0, -pre * x]
    }

    fn g_at(&self, x: f64, y: f64, s: f64) -> [f64; 2] {
        let (n, m) = self.noise.degrees();
        let nu0 = self.leading.nu0();
        let h = f64::from(self.leading.h());
        let amp = self.mu * nu0 * self.noise.top_coefficient(s);
        let pre = -amp * amp / (8.0 * self.h1() * self.h1()) * x.powi(2 * n as i32) * y.powi(2 * m as i32);
        let dx = y / nu0;
        let d2x = -x.powi(2 * self.leading.h() as i32 + 1) / (nu0 * nu0);
        [pre * (h * dx * dx + x * d2x), -pre * (h + 2.0) * x * dx]
    }

    fn c_at(&self, x: f64, y: f64, s: f64) -> [f64; 2] {
        let (n, m) = self.noise.degrees();
        let nu0 = self.leading.nu0();
        let pre = nu0 * self.noise.top_coefficient(s) / (2.0 * self.h1()) * x.powi(n as i32) * y.powi(m as i32);
        [pre * y / nu0, -pre * x]
    }

    /// Samples a coefficient on a uniform `(phi, S)` grid, row-major in phi.
    pub fn sample_grid<F: Fn(&Self, f64, f64) -> f64>(&self, f: F, n_phi: usize, n_s: usize) -> Vec<Vec<f64>> {
        let tau = std::f64::consts::TAU;
        (0..n_phi)
            .map(|i| {
                let phi = tau * i as f64 / n_phi as f64;
                (0..n_s).map(|j| f(self, phi, tau * j as f64 / n_s as f64)).collect()
            })
            .collect()
    }

    fn kronecker(&self) -> f64 {
        if self.exponents.kronecker_b_2a {
            1.0
        } else {
            0.0
        }
    }

    /// `P(Θ) = ϑ_{1,A,0}(Θ) + δ_{B,2A} χ_{1,B-A,0}`.
    pub fn p_series(&self) -> TrigSeries {
        self.theta_1_a_0.plus_constant(self.kronecker() * self.chi_1_bma_0)
    }

    /// `J(Θ) = ϑ_{1,2A,0}(Θ) + ϑ'_{2,2A,0}(Θ) + δ_{B,2A} χ_{1,B,0}`.
    pub fn j_series(&self) -> TrigSeries {
        self.theta_1_2a_0
            .add(&self.theta_2_2a_0.derivative())
            .plus_constant(self.kronecker() * self.chi_1_b_0)
    }
}

/// Evaluates the leading coefficients and their resonant averages.
pub fn leading_averages(
    forcing: &ForcingSpec,
    noise: &NoiseSpec,
    leading: &LeadingOrbit,
    kappa: u32,
    theta_grid: usize,
) -> Result<AveragedCoefficients> {
    let h = leading.h();
    if kappa == 0 {
        return Err(Error::Validation("resonance order kappa must be positive".into()));
    }
    if theta_grid < 16 {
        return Err(Error::Validation("theta grid needs at least 16 points".into()));
    }
    forcing.validate(h)?;
    noise.validate()?;
    forcing.check_leading()?;
    noise.check_leading()?;
    let ex = exponents(forcing, noise, h)?;
    let nu0 = leading.nu0();
    let beta = forcing.beta.value();
    let z0 = (forcing.s * (beta + 1.0) / (nu0 * f64::from(kappa))).powf(1.0 / f64::from(h));
    let (a, b) = (ex.a.value(), ex.b.value());
    let (big_a, big_b, big_c) = (ex.big_a.value(), ex.big_b.value(), ex.big_c.value());
    let hf = f64::from(h);

    let mut coeffs = AveragedCoefficients {
        kappa,
        exponents: ex,
        z0,
        mu: noise.mu,
        theta_1_a_0: TrigSeries::new(0.0, vec![], vec![]),
        theta_1_2a_0: TrigSeries::new(0.0, vec![], vec![]),
        theta_1_2cma_0: TrigSeries::new(0.0, vec![], vec![]),
        theta_2_2a_0: TrigSeries::new(0.0, vec![], vec![]),
        chi_1_bma_0: -big_b.powf((big_a - big_b) / big_b) * beta / hf,
        chi_1_b_0: (big_a - beta / hf) / big_b,
        chi_2_a_0: big_b.powf(-big_a / big_b) * z0.powi(h as i32) * hf * nu0,
        chi_2_2a_0: big_b.powf(-2.0 * big_a / big_b) * z0.powi(h as i32) * hf * (hf - 1.0) * nu0 / 2.0,
        leading: leading.clone(),
        forcing: forcing.clone(),
        noise: noise.clone(),
    };

    let spec = QuadratureSpec::periodic();
    let k = f64::from(kappa);
    let tau = std::f64::consts::TAU;
    // Every abscissa ζ/κ + Θ lies on the uniform grid of lcm(theta_grid, nodes·κ)
    // points, so the orbit is tabulated there once instead of summing its
    // Fourier series at each quadrature node.
    let nodes = spec.node_count() * kappa as usize;
    let lookup_n = theta_grid / gcd(theta_grid, nodes) * nodes;
    let table: Option<Vec<(f64, f64)>> = (lookup_n <= 1 << 18).then(|| {
        (0..lookup_n)
            .into_par_iter()
            .map(|i| {
                let phi = tau * i as f64 / lookup_n as f64;
                (leading.x1(phi), leading.x2(phi))
            })
            .collect()
    });
    let c = &coeffs;
    let point = |phi: f64| match &table {
        Some(t) => t[((phi / tau * lookup_n as f64).round() as usize) % lookup_n],
        None => (leading.x1(phi), leading.x2(phi)),
    };
    let rows: Vec<[f64; 3]> = (0..theta_grid)
        .into_par_iter()
        .map(|i| {
            let theta = tau * i as f64 / theta_grid as f64;
            let avg = |f: &dyn Fn(f64, f64, f64) -> f64| {
                periodic_average(
                    |z| {
                        let (x, y) = point(z / k + theta);
                        f(x, y, z)
                    },
                    kappa,
                    spec,
                )
            };
            Ok([
                avg(&|x, y, s| c.f_at(x, y, s)[0])?,
                avg(&|x, y, s| c.f_at(x, y, s)[1])?,
                avg(&|x, y, s| c.g_at(x, y, s)[0])?,
            ])
        })
        .collect::<Result<_>>()?;
    let column = |j: usize| rows.iter().map(|r| r[j]).collect::<Vec<_>>();
    let series = |j: usize, scale: f64| TrigSeries::from_samples(&column(j)).scaled(scale).truncated(SERIES_TOL);

    let t1a = series(0, big_b.powf(-big_a / big_b) * z0.powf(a));
    coeffs.theta_1_2a_0 = t1a.scaled((a + 1.0) * big_b.powf(-big_a / big_b));
    coeffs.theta_1_a_0 = t1a;
    coeffs.theta_2_2a_0 = series(1, big_b.powf(-2.0 * big_a / big_b) * z0.powf(a));
    coeffs.theta_1_2cma_0 = series(2, big_b.powf((big_a - 2.0 * big_c) / big_b) * z0.powf(2.0 * b));
    Ok(coeffs)
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
