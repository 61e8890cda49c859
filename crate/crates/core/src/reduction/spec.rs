use serde::{Deserialize, Serialize};

use crate::reduction::Exponent;
use crate::{Error, Result};

/// One monomial `(c cos(kS) + d sin(kS)) x1^i x2^j` of a trigonometric
/// polynomial coefficient field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyTerm {
    pub i: u32,
    pub j: u32,
    pub harmonic: i32,
    #[serde(default)]
    pub cos_amp: f64,
    #[serde(default)]
    pub sin_amp: f64,
}

impl PolyTerm {
    pub fn cosine(i: u32, j: u32, harmonic: i32, amp: f64) -> Self {
        Self { i, j, harmonic, cos_amp: amp, sin_amp: 0.0 }
    }

    fn coefficient(&self, s: f64) -> f64 {
        let k = f64::from(self.harmonic);
        self.cos_amp * (k * s).cos() + self.sin_amp * (k * s).sin()
    }
}

fn field(terms: &[PolyTerm], x1: f64, x2: f64, s: f64) -> f64 {
    terms
        .iter()
        .map(|t| t.coefficient(s) * x1.powi(t.i as i32) * x2.powi(t.j as i32))
        .sum()
}

fn is_active(t: &PolyTerm) -> bool {
    t.cos_amp != 0.0 || t.sin_amp != 0.0
}

/// Top powers over the terms with a nonzero amplitude.
fn top_degrees(terms: &[PolyTerm]) -> (u32, u32) {
    let active = || terms.iter().filter(|t| is_active(t));
    let p = active().map(|t| t.i).max().unwrap_or(0);
    let l = active().map(|t| t.j).max().unwrap_or(0);
    (p, l)
}

fn top_coefficient(terms: &[PolyTerm], s: f64) -> f64 {
    let (p, l) = top_degrees(terms);
    terms.iter().filter(|t| t.i == p && t.j == l).map(|t| t.coefficient(s)).sum()
}

fn check_terms(terms: &[PolyTerm], what: &str) -> Result<()> {
    if terms.is_empty() {
        return Err(Error::Validation(format!("{what} needs at least one term")));
    }
    for t in terms {
        if !(t.cos_amp.is_finite() && t.sin_amp.is_finite()) {
            return Err(Error::Validation(format!("{what} has a non-finite amplitude")));
        }
    }
    Ok(())
}

/// The averaged reduction needs a nonvanishing `x1^p x2^l` coefficient.
fn check_leading(terms: &[PolyTerm], what: &str) -> Result<()> {
    let (p, l) = top_degrees(terms);
    if !terms.iter().any(|t| t.i == p && t.j == l && is_active(t)) {
        return Err(Error::Validation(format!(
            "{what}: top coefficient of x1^{p} x2^{l} vanishes identically"
        )));
    }
    Ok(())
}

/// Deterministic forcing `t^(-alpha) Q(x1, x2, S)` with `S = s t^(beta+1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSpec {
    pub alpha: Exponent,
    pub beta: Exponent,
    pub s: f64,
    pub terms: Vec<PolyTerm>,
}

impl ForcingSpec {
    /// `t^(-alpha) amp x1^p cos S` as in the Duffing family.
    pub fn duffing(alpha: Exponent, beta: Exponent, s: f64, amp: f64, p: u32) -> Self {
        Self { alpha, beta, s, terms: vec![PolyTerm::cosine(p, 0, 1, amp)] }
    }

    pub fn validate(&self, h: u32) -> Result<()> {
        if self.alpha.is_negative() {
            return Err(Error::Validation("alpha must be nonnegative".into()));
        }
        if !self.beta.is_positive() {
            return Err(Error::Validation("beta must be positive".into()));
        }
        if !(self.s > 0.0 && self.s.is_finite()) {
            return Err(Error::Validation("s must be positive".into()));
        }
        check_terms(&self.terms, "forcing")?;
        let (p, l) = self.degrees();
        if l > p || p > 2 * h + 1 {
            return Err(Error::Validation(format!(
                "forcing degrees need 0 <= l <= p <= 2h+1, got p = {p}, l = {l}, h = {h}"
            )));
        }
        Ok(())
    }

    pub fn check_leading(&self) -> Result<()> {
        check_leading(&self.terms, "forcing")
    }

    /// `(p, l)`: largest powers of `x1` and `x2`.
    pub fn degrees(&self) -> (u32, u32) {
        top_degrees(&self.terms)
    }

    pub fn phase(&self, t: f64) -> f64 {
        self.s * t.powf(self.beta.value() + 1.0)
    }

    /// `S'(t)`, the instantaneous excitation frequency.
    pub fn phase_rate(&self, t: f64) -> f64 {
        let b = self.beta.value();
        self.s * (b + 1.0) * t.powf(b)
    }

    pub fn field(&self, x1: f64, x2: f64, s: f64) -> f64 {
        field(&self.terms, x1, x2, s)
    }

    /// `Q_{p,l}(S)`.
    pub fn top_coefficient(&self, s: f64) -> f64 {
        top_coefficient(&self.terms, s)
    }
}

/// Multiplicative noise `t^(-gamma) mu sigma(x1, x2, S) dw`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub gamma: Exponent,
    pub mu: f64,
    pub terms: Vec<PolyTerm>,
}

impl NoiseSpec {
    pub fn duffing(gamma: Exponent, mu: f64, n: u32) -> Self {
        Self { gamma, mu, terms: vec![PolyTerm::cosine(n, 0, 1, 1.0)] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma.is_negative() {
            return Err(Error::Validation("gamma must be nonnegative".into()));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::Validation("mu must be nonnegative".into()));
        }
        check_terms(&self.terms, "noise")
    }

    pub fn check_leading(&self) -> Result<()> {
        check_leading(&self.terms, "noise")
    }

    /// `(n, m)`: largest powers of `x1` and `x2`.
    pub fn degrees(&self) -> (u32, u32) {
        top_degrees(&self.terms)
    }

    pub fn field(&self, x1: f64, x2: f64, s: f64) -> f64 {
        field(&self.terms, x1, x2, s)
    }

    pub fn top_coefficient(&self, s: f64) -> f64 {
        top_coefficient(&self.terms, s)
    }

    pub fn with_mu(&self, mu: f64) -> Self {
        Self { mu, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn third() -> Exponent {
        Exponent::new(1, 3)
    }

    #[test]
    fn duffing_fields() {
        let f = ForcingSpec::duffing(third(), third(), 0.5, 4.0, 1);
        assert_eq!(f.degrees(), (1, 0));
        assert!((f.field(2.0, 7.0, 0.3) - 8.0 * 0.3f64.cos()).abs() < 1e-15);
        assert!((f.top_coefficient(0.3) - 4.0 * 0.3f64.cos()).abs() < 1e-15);
        assert!((f.phase(8.0) - 0.5 * 16.0).abs() < 1e-12);
        assert!((f.phase_rate(8.0) - 0.5 * 4.0 / 3.0 * 2.0).abs() < 1e-12);
        f.validate(1).unwrap();
    }

    #[test]
    fn degree_bounds() {
        let mut f = ForcingSpec::duffing(third(), third(), 1.0, 1.0, 4);
        assert!(f.validate(1).is_err());
        f.terms = vec![PolyTerm::cosine(0, 1, 1, 1.0)];
        assert!(f.validate(1).is_err());
        f.terms = vec![PolyTerm::cosine(2, 0, 1, 1.0), PolyTerm::cosine(0, 1, 1, 1.0)];
        f.validate(1).unwrap();
        assert!(f.check_leading().is_err(), "x1^2 x2 coefficient is zero");
        f.terms = vec![PolyTerm::cosine(3, 0, 1, 0.0)];
        assert_eq!(f.degrees(), (0, 0));
        f.validate(1).unwrap();
    }

    #[test]
    fn noise_validation() {
        let n = NoiseSpec::duffing(Exponent::new(1, 6), 0.1, 0);
        n.validate().unwrap();
        assert!(n.with_mu(-1.0).validate().is_err());
        let empty = NoiseSpec { terms: vec![], ..n };
        assert!(empty.validate().is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = r#"{"gamma": "1/6", "mu": 0.1, "terms": [], "extra": 1}"#;
        assert!(serde_json::from_str::<NoiseSpec>(bad).is_err());
        let good = r#"{"gamma": "1/6", "mu": 0.1, "terms": [{"i": 0, "j": 0, "harmonic": 1, "cos_amp": 1.0}]}"#;
        let n: NoiseSpec = serde_json::from_str(good).unwrap();
        assert_eq!(n.terms[0].sin_amp, 0.0);
    }
}
