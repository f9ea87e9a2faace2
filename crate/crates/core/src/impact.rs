//! Price-impact profile `λ(t, S₁) = ε λ̂(t, S₁)`.
//!
//! `λ̂ = 1 − exp(−β (T − t)^{3/2})` inside the band `[S̲, S̄]` and zero
//! outside. The band edge is a hard cutoff.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpactParams {
    /// Impact magnitude ε (expansion parameter).
    pub epsilon: f64,
    /// Decay coefficient β, per year^{3/2}.
    pub beta: f64,
    /// Lower band edge S̲.
    pub s_low: f64,
    /// Upper band edge S̄.
    pub s_high: f64,
}

impl Default for ImpactParams {
    fn default() -> Self {
        Self {
            epsilon: 0.01,
            beta: 100.0,
            s_low: 60.0,
            s_high: 140.0,
        }
    }
}

impl ImpactParams {
    pub fn new(epsilon: f64, beta: f64, s_low: f64, s_high: f64) -> Result<Self> {
        let p = Self {
            epsilon,
            beta,
            s_low,
            s_high,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::domain(format!(
                "epsilon must be >= 0, got {}",
                self.epsilon
            )));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::domain(format!(
                "beta must be >= 0, got {}",
                self.beta
            )));
        }
        if !(self.s_low >= 0.0 && self.s_low < self.s_high && self.s_high.is_finite()) {
            return Err(Error::domain(format!(
                "impact band must satisfy 0 <= s_low < s_high, got [{}, {}]",
                self.s_low, self.s_high
            )));
        }
        Ok(())
    }

    pub fn in_band(&self, s1: f64) -> bool {
        self.s_low <= s1 && s1 <= self.s_high
    }
}

/// Normalized impact `λ̂(t, S₁)`, in `[0, 1)`.
pub fn lambda_hat(t: f64, s1: f64, maturity: f64, p: &ImpactParams) -> f64 {
    if !p.in_band(s1) {
        return 0.0;
    }
    let tau = (maturity - t).max(0.0);
    // -expm1 keeps precision for small β τ^{3/2}
    -(-p.beta * tau.powf(1.5)).exp_m1()
}
