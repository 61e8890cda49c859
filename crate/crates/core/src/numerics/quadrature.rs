use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureKind {
    EndpointSingular,
    PeriodicTrapezoid,
}

/// Node count and rule family for the fixed-order quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    node_count: usize,
    kind: QuadratureKind,
}

impl QuadratureSpec {
    pub const DEFAULT_SINGULAR_NODES: usize = 256;
    pub const DEFAULT_PERIODIC_NODES: usize = 512;

    pub fn new(kind: QuadratureKind, node_count: usize) -> Result<Self> {
        if node_count < 16 {
            return Err(Error::Validation(format!(
                "quadrature needs at least 16 nodes, got {node_count}"
            )));
        }
        if kind == QuadratureKind::PeriodicTrapezoid && !node_count.is_multiple_of(2) {
            return Err(Error::Validation(format!(
                "periodic trapezoid node count must be even, got {node_count}"
            )));
        }
        Ok(Self { node_count, kind })
    }

    pub fn singular() -> Self {
        Self { node_count: Self::DEFAULT_SINGULAR_NODES, kind: QuadratureKind::EndpointSingular }
    }

    pub fn periodic() -> Self {
        Self { node_count: Self::DEFAULT_PERIODIC_NODES, kind: QuadratureKind::PeriodicTrapezoid }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn kind(&self) -> QuadratureKind {
        self.kind
    }
}

/// Evaluates `∫_a^b f(x) / sqrt((x - a)(b - x)) dx`.
///
/// Under `x = (a + b)/2 + (b - a)/2 · sin u` the weight disappears and the
/// integrand becomes a smooth even-periodic function of `u`, so the rule used
/// here (Gauss-Chebyshev of the first kind, i.e. the midpoint trapezoid in
/// `u`) converges spectrally for analytic `f`.
pub fn integrate_singular<F>(mut f: F, a: f64, b: f64, spec: QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(a < b) {
        return Err(Error::Validation(format!("empty interval [{a}, {b}]")));
    }
    let n = spec.node_count;
    let centre = 0.5 * (a + b);
    let radius = 0.5 * (b - a);
    let mut sum = 0.0;
    for i in 0..n {
        let theta = (2 * i + 1) as f64 * PI / (2 * n) as f64;
        let x = centre + radius * theta.cos();
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::Evaluation { abscissa: x });
        }
        sum += v;
    }
    Ok(sum * PI / n as f64)
}

/// Mean of a `2πκ`-periodic function over one period, by the trapezoid rule
/// with `node_count` nodes per `2π`.
pub fn periodic_average<F>(mut f: F, kappa: u32, spec: QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if kappa == 0 {
        return Err(Error::Validation("averaging period multiplier must be positive".into()));
    }
    let n = spec.node_count * kappa as usize;
    let step = TAU * kappa as f64 / n as f64;
    let mut sum = 0.0;
    for i in 0..n {
        let z = i as f64 * step;
        let v = f(z);
        if !v.is_finite() {
            return Err(Error::Evaluation { abscissa: z });
        }
        sum += v;
    }
    Ok(sum / n as f64)
}

/// Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = x;
            nodes[n - 1 - i] = -x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(c + r * x))
            .sum::<f64>()
            * r
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared 64-point rule used for partial arc integrals.
pub fn gauss_legendre() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(64))
}
