use serde::{Deserialize, Serialize};

use crate::reduction::{Exponent, ForcingSpec, NoiseSpec};
use crate::{Error, Result};

/// Exponent bundle derived from the forcing and noise degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub h: u32,
    pub a: Exponent,
    pub b: Exponent,
    pub m1: Exponent,
    pub m2: Exponent,
    pub m: Exponent,
    #[serde(rename = "A")]
    pub big_a: Exponent,
    #[serde(rename = "B")]
    pub big_b: Exponent,
    #[serde(rename = "C")]
    pub big_c: Exponent,
    pub ncond_ok: bool,
    pub adas_ok: bool,
    /// Exact test of `B = 2A`, the switch for the Kronecker terms.
    pub kronecker_b_2a: bool,
}

pub fn exponents(forcing: &ForcingSpec, noise: &NoiseSpec, h: u32) -> Result<Exponents> {
    if h == 0 {
        return Err(Error::Unsupported(
            "h = 0: the frequency does not grow with amplitude, so no resonance curve exists".into(),
        ));
    }
    let hh = Exponent::integer(i64::from(h) + 1);
    let one = Exponent::integer(1);
    let two = Exponent::integer(2);
    let (p, l) = forcing.degrees();
    let (n, m) = noise.degrees();
    let a = Exponent::integer(p.into()) + (Exponent::integer(l.into()) - one) * hh;
    let b = Exponent::integer(n.into()) + (Exponent::integer(m.into()) - one) * hh;
    let beta = forcing.beta;
    let h_e = Exponent::integer(h.into());
    let m1 = -forcing.alpha + a * beta / h_e;
    let m2 = -two * noise.gamma + two * b * beta / h_e;
    let big_m = m1.max(m2);
    let big_a = (beta - big_m) / two;
    let big_b = beta + one;
    let big_c = (beta - m1.min(m2)) / two;
    Ok(Exponents {
        h,
        a,
        b,
        m1,
        m2,
        m: big_m,
        big_a,
        big_b,
        big_c,
        ncond_ok: -one <= big_m && big_m < beta,
        adas_ok: Exponent::integer(3) * m1 - two * m2 >= beta,
        kronecker_b_2a: big_b == two * big_a,
    })
}

/// Stochastic-stability horizon classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HorizonClass {
    Polynomial,
    Exponential,
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizonEstimate {
    pub class: HorizonClass,
    /// Length of the time interval after `t_star`; `None` when unbounded.
    pub t_tilde: Option<f64>,
    pub mu: f64,
    pub epsilon: f64,
    pub t_star: f64,
}

impl Exponents {
    pub fn horizon_class(&self) -> HorizonClass {
        let rhs = self.big_a + self.big_b / Exponent::integer(2);
        match self.big_c.cmp(&rhs) {
            std::cmp::Ordering::Less => HorizonClass::Polynomial,
            std::cmp::Ordering::Equal => HorizonClass::Exponential,
            std::cmp::Ordering::Greater => HorizonClass::Infinite,
        }
    }

    pub fn horizon(&self, mu: f64, epsilon: f64, t_star: f64) -> Result<HorizonEstimate> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Validation(format!("epsilon = {epsilon} must lie in (0, 1)")));
        }
        if !(mu >= 0.0) || !(t_star > 0.0) {
            return Err(Error::Validation("horizon needs mu >= 0 and t_star > 0".into()));
        }
        let class = self.horizon_class();
        let power = mu.powf(-2.0 * (1.0 - epsilon) / self.big_b.value());
        let t_tilde = match class {
            HorizonClass::Infinite => None,
            _ if mu == 0.0 => None,
            HorizonClass::Polynomial => Some(t_star * (power - 1.0)),
            HorizonClass::Exponential => Some(t_star * power.exp_m1()),
        };
        Ok(HorizonEstimate { class, t_tilde: t_tilde.filter(|t| t.is_finite()), mu, epsilon, t_star })
    }
}
