//! Closed-form benchmarks for the perfectly liquid two-asset model.
//!
//! Both formulas are undiscounted and take spot inputs, matching the
//! classical statements of Margrabe (exchange option, `k = 0`) and Kirk
//! (spread approximation, `S₂ + k` treated as lognormal).

use crate::error::{Error, Result};

/// Volatilities, correlation and risk-free rate of the two-asset model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    /// Volatility of asset 1, per √year.
    pub sigma1: f64,
    /// Volatility of asset 2, per √year.
    pub sigma2: f64,
    /// Correlation of the two driving Brownian motions.
    pub rho: f64,
    /// Risk-free rate, per year.
    pub r: f64,
}

impl MarketParams {
    pub fn new(sigma1: f64, sigma2: f64, rho: f64, r: f64) -> Result<Self> {
        let params = Self {
            sigma1,
            sigma2,
            rho,
            r,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma1.is_finite() && self.sigma1 > 0.0) {
            return Err(Error::domain(format!(
                "sigma1 must be > 0, got {}",
                self.sigma1
            )));
        }
        if !(self.sigma2.is_finite() && self.sigma2 > 0.0) {
            return Err(Error::domain(format!(
                "sigma2 must be > 0, got {}",
                self.sigma2
            )));
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(Error::domain(format!(
                "rho must lie in [-1, 1], got {}",
                self.rho
            )));
        }
        if !(self.r.is_finite() && self.r >= 0.0) {
            return Err(Error::domain(format!("r must be >= 0, got {}", self.r)));
        }
        Ok(())
    }
}

/// Standardized moneyness and effective volatility of a two-asset
/// lognormal-ratio price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MargrabeTerms {
    pub d_plus: f64,
    pub d_minus: f64,
    pub sigma_eff: f64,
}

/// Standard normal CDF, `Φ(x) = ½ erfc(−x/√2)`.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Spread volatility with asset 2 scaled by `weight = S₂ / (S₂ + k)`.
fn spread_sigma(params: &MarketParams, weight: f64) -> f64 {
    let MarketParams {
        sigma1,
        sigma2,
        rho,
        ..
    } = *params;
    let var = sigma1 * sigma1 + (weight * weight) * (sigma2 * sigma2)
        - 2.0 * weight * rho * sigma1 * sigma2;
    var.max(0.0).sqrt()
}

fn terms(s1: f64, s2_eff: f64, sigma_eff: f64, maturity: f64) -> MargrabeTerms {
    let vol_t = sigma_eff * maturity.sqrt();
    let log_ratio = (s1 / s2_eff).ln();
    let (d_plus, d_minus) = if vol_t > 0.0 {
        let centre = log_ratio / vol_t;
        (centre + 0.5 * vol_t, centre - 0.5 * vol_t)
    } else {
        // Deterministic ratio: the sign of the log-moneyness decides.
        let d = if log_ratio >= 0.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        };
        (d, d)
    };
    MargrabeTerms {
        d_plus,
        d_minus,
        sigma_eff,
    }
}

fn check_common(s1: f64, s2: f64, params: &MarketParams, maturity: f64) -> Result<()> {
    params.validate()?;
    if !(s1.is_finite() && s1 > 0.0) {
        return Err(Error::domain(format!("S1 must be > 0, got {s1}")));
    }
    if !(s2.is_finite() && s2 > 0.0) {
        return Err(Error::domain(format!("S2 must be > 0, got {s2}")));
    }
    if !(maturity.is_finite() && maturity > 0.0) {
        return Err(Error::domain(format!("T must be > 0, got {maturity}")));
    }
    Ok(())
}

/// `d±` and `σ_eff` of the Margrabe formula.
pub fn margrabe_terms(
    s1: f64,
    s2: f64,
    params: &MarketParams,
    maturity: f64,
) -> Result<MargrabeTerms> {
    check_common(s1, s2, params, maturity)?;
    Ok(terms(s1, s2, spread_sigma(params, 1.0), maturity))
}

/// Margrabe price of the option to exchange asset 2 for asset 1.
pub fn margrabe_price(s1: f64, s2: f64, params: &MarketParams, maturity: f64) -> Result<f64> {
    kirk_price(s1, s2, 0.0, params, maturity)
}

/// Kirk's approximation for a spread call `(S₁ − S₂ − k)⁺`, as an
/// undiscounted formula on spots. Reduces to Margrabe at `k = 0`.
pub fn kirk_price(
    s1: f64,
    s2: f64,
    strike: f64,
    params: &MarketParams,
    maturity: f64,
) -> Result<f64> {
    check_common(s1, s2, params, maturity)?;
    if !strike.is_finite() {
        return Err(Error::domain("strike must be finite"));
    }
    let s2_eff = s2 + strike;
    if s2_eff <= 0.0 {
        return Err(Error::domain(format!(
            "S2 + k must be > 0 for the Kirk approximation, got {s2_eff}"
        )));
    }
    let weight = s2 / s2_eff;
    let t = terms(s1, s2_eff, spread_sigma(params, weight), maturity);
    Ok(s1 * norm_cdf(t.d_plus) - s2_eff * norm_cdf(t.d_minus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Maclaurin series for erf, independent of libm. Accurate to ~1e-9 for
    /// |z| ≤ 4; beyond that Φ is within 1e-8 of its saturation value.
    fn erf_series(z: f64) -> f64 {
        let mut term = z;
        let mut sum = z;
        let z2 = z * z;
        for n in 1..400 {
            term *= -z2 / n as f64;
            let contrib = term / (2 * n + 1) as f64;
            sum += contrib;
            if contrib.abs() < 1e-18 {
                break;
            }
        }
        2.0 / std::f64::consts::PI.sqrt() * sum
    }

    fn phi_oracle(x: f64) -> f64 {
        let z = x / std::f64::consts::SQRT_2;
        if z > 4.0 {
            1.0
        } else if z < -4.0 {
            0.0
        } else {
            0.5 * (1.0 + erf_series(z))
        }
    }

    fn table1(rho: f64) -> MarketParams {
        MarketParams::new(0.15, 0.10, rho, 0.04).unwrap()
    }

    #[test]
    fn norm_cdf_examples() {
        assert_eq!(norm_cdf(0.0), 0.5);
        assert!((norm_cdf(40.0) - 1.0).abs() <= 1e-15);
        // mpmath: Φ(1.959964) = 0.9750000009035576
        assert!((norm_cdf(1.959964) - 0.975).abs() < 1e-8);
        assert!((norm_cdf(1.959964) - 0.975_000_000_903_557_6).abs() < 1e-12);
    }

    #[test]
    fn norm_cdf_against_series_oracle() {
        let n = 10_000;
        let mut prev = 0.0;
        for i in 0..=n {
            let x = -8.0 + 16.0 * i as f64 / n as f64;
            let p = norm_cdf(x);
            assert!((p - phi_oracle(x)).abs() <= 1e-7, "x={x}");
            assert!(p >= prev, "monotonicity broken at {x}");
            assert!((p + norm_cdf(-x) - 1.0).abs() <= 1e-15, "symmetry at {x}");
            prev = p;
        }
    }

    #[test]
    fn margrabe_examples() {
        let p = margrabe_price(112.0, 104.0, &table1(0.5), 1.0).unwrap();
        assert!((p - 10.5648).abs() < 5e-4, "{p}");
        let p = margrabe_price(112.0, 104.0, &table1(0.7), 0.5).unwrap();
        assert!((p - 8.7115).abs() < 5e-4, "{p}");
        let degenerate = MarketParams::new(0.15, 0.15, 1.0, 0.04).unwrap();
        let p = margrabe_price(112.0, 104.0, &degenerate, 1.0).unwrap();
        assert!((p - 8.0).abs() < 1e-12, "{p}");
    }

    #[test]
    fn margrabe_terms_identity() {
        let t = margrabe_terms(112.0, 104.0, &table1(0.1), 0.7).unwrap();
        assert!((t.d_plus - t.d_minus - t.sigma_eff * 0.7f64.sqrt()).abs() < 1e-14);
        assert!(t.sigma_eff > 0.0);
    }

    #[test]
    fn margrabe_rejects_bad_inputs() {
        let p = table1(0.5);
        assert!(margrabe_price(0.0, 104.0, &p, 1.0).is_err());
        assert!(margrabe_price(112.0, -1.0, &p, 1.0).is_err());
        assert!(margrabe_price(112.0, 104.0, &p, 0.0).is_err());
        let bad = MarketParams { rho: 1.5, ..p };
        assert!(margrabe_price(112.0, 104.0, &bad, 1.0).is_err());
    }

    #[test]
    fn margrabe_nonincreasing_in_rho() {
        let mut prev = f64::INFINITY;
        for i in 0..=40 {
            let rho = -1.0 + i as f64 * 0.05;
            let p = margrabe_price(112.0, 104.0, &table1(rho.min(1.0)), 0.7).unwrap();
            assert!(p <= prev + 1e-12, "rho={rho}");
            prev = p;
        }
    }

    #[test]
    fn kirk_boundary_of_precondition() {
        let p = table1(0.7);
        assert!(kirk_price(112.0, 104.0, -104.0, &p, 1.0).is_err());
        assert!(kirk_price(112.0, 104.0, -103.0, &p, 1.0).is_ok());
    }

    proptest! {
        #[test]
        fn margrabe_is_homogeneous(
            s1 in 10.0f64..300.0, s2 in 10.0f64..300.0, a in 0.1f64..10.0,
            rho in -1.0f64..1.0, t in 0.05f64..2.0,
        ) {
            let p = table1(rho);
            let base = margrabe_price(s1, s2, &p, t).unwrap();
            let scaled = margrabe_price(a * s1, a * s2, &p, t).unwrap();
            prop_assert!((scaled - a * base).abs() <= 1e-12 * (a * base).abs().max(1e-300) + 1e-12 * a * s1);
        }

        #[test]
        fn kirk_at_zero_strike_is_margrabe(
            s1 in 10.0f64..300.0, s2 in 10.0f64..300.0,
            sig1 in 0.01f64..1.0, sig2 in 0.01f64..1.0,
            rho in -1.0f64..1.0, t in 0.05f64..2.0,
        ) {
            let p = MarketParams::new(sig1, sig2, rho, 0.03).unwrap();
            let k = kirk_price(s1, s2, 0.0, &p, t).unwrap();
            let m = margrabe_price(s1, s2, &p, t).unwrap();
            prop_assert!((k - m).abs() <= 1e-12 * m.abs().max(1.0));
        }
    }
}
