use std::f64::consts::TAU;

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

/// Real trigonometric polynomial
/// `f(x) = mean + Σ_k (cos[k-1]·cos kx + sin[k-1]·sin kx)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigSeries {
    mean: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl TrigSeries {
    pub fn new(mean: f64, cos: Vec<f64>, sin: Vec<f64>) -> Self {
        assert_eq!(cos.len(), sin.len());
        Self { mean, cos, sin }
    }

    /// Trigonometric interpolant of uniform samples on `[0, 2π)`.
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        assert!(n >= 2, "need at least two samples");
        let mut buf: Vec<Complex<f64>> = samples.iter().map(|&v| Complex::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let scale = 2.0 / n as f64;
        let top = (n - 1) / 2;
        let mut cos = Vec::with_capacity(n / 2);
        let mut sin = Vec::with_capacity(n / 2);
        for c in buf.iter().take(top + 1).skip(1) {
            cos.push(c.re * scale);
            sin.push(-c.im * scale);
        }
        if n.is_multiple_of(2) {
            // Nyquist term; its sine part is invisible on the grid.
            cos.push(buf[n / 2].re / n as f64);
            sin.push(0.0);
        }
        Self { mean: buf[0].re / n as f64, cos, sin }
    }

    pub fn sample<F: FnMut(f64) -> f64>(mut f: F, n: usize) -> Self {
        let samples: Vec<f64> = (0..n).map(|i| f(TAU * i as f64 / n as f64)).collect();
        Self::from_samples(&samples)
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `(a_k, b_k)` for `k ≥ 1`; zero beyond the stored band.
    pub fn harmonic(&self, k: usize) -> (f64, f64) {
        if k == 0 {
            return (self.mean, 0.0);
        }
        match (self.cos.get(k - 1), self.sin.get(k - 1)) {
            (Some(&a), Some(&b)) => (a, b),
            _ => (0.0, 0.0),
        }
    }

    pub fn band(&self) -> usize {
        self.cos.len()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (s1, c1) = x.sin_cos();
        let (mut ck, mut sk) = (1.0, 0.0);
        let mut acc = self.mean;
        for (a, b) in self.cos.iter().zip(&self.sin) {
            let c = ck * c1 - sk * s1;
            sk = sk * c1 + ck * s1;
            ck = c;
            acc += a * ck + b * sk;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let mut cos = Vec::with_capacity(self.cos.len());
        let mut sin = Vec::with_capacity(self.sin.len());
        for (k, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let k = (k + 1) as f64;
            cos.push(k * b);
            sin.push(-k * a);
        }
        Self { mean: 0.0, cos, sin }
    }

    /// Drops the tail of harmonics whose magnitude stays below `tol`.
    pub fn truncated(&self, tol: f64) -> Self {
        let keep = self
            .cos
            .iter()
            .zip(&self.sin)
            .rposition(|(a, b)| a.hypot(*b) >= tol)
            .map_or(0, |i| i + 1);
        Self { mean: self.mean, cos: self.cos[..keep].to_vec(), sin: self.sin[..keep].to_vec() }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            mean: self.mean * factor,
            cos: self.cos.iter().map(|v| v * factor).collect(),
            sin: self.sin.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn plus_constant(&self, c: f64) -> Self {
        Self { mean: self.mean + c, ..self.clone() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.cos.len().max(other.cos.len());
        let mut cos = vec![0.0; n];
        let mut sin = vec![0.0; n];
        for k in 1..=n {
            let (a1, b1) = self.harmonic(k);
            let (a2, b2) = other.harmonic(k);
            cos[k - 1] = a1 + a2;
            sin[k - 1] = b1 + b2;
        }
        Self { mean: self.mean + other.mean, cos, sin }
    }

    pub fn samples(&self, n: usize) -> Vec<f64> {
        (0..n).map(|i| self.eval(TAU * i as f64 / n as f64)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_coefficients() {
        let f = |x: f64| 0.5 + 2.0 * x.cos() - 0.75 * (3.0 * x).sin() + 0.1 * (7.0 * x).cos();
        let s = TrigSeries::sample(f, 64);
        assert!((s.mean() - 0.5).abs() < 1e-14);
        let (a1, b1) = s.harmonic(1);
        assert!((a1 - 2.0).abs() < 1e-14 && b1.abs() < 1e-14);
        let (a3, b3) = s.harmonic(3);
        assert!(a3.abs() < 1e-14 && (b3 + 0.75).abs() < 1e-14);
        for x in [0.1, 1.7, 4.4] {
            assert!((s.eval(x) - f(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn spectral_derivative() {
        let s = TrigSeries::sample(|x| (2.0 * x).sin() + x.cos(), 32);
        let d = s.derivative();
        for x in [0.3f64, 2.2, 5.9] {
            let exact = 2.0 * (2.0 * x).cos() - x.sin();
            assert!((d.eval(x) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn truncation_keeps_significant_band() {
        let s = TrigSeries::sample(|x| x.cos() + 1e-3 * (5.0 * x).sin(), 128).truncated(1e-10);
        assert_eq!(s.band(), 5);
    }
}
