//! Monte Carlo reference pricer for the liquid (`λ = 0`) model.
//!
//! Terminal prices are sampled exactly from the risk-neutral lognormal law,
//! so there is no time-discretization bias. Paths are split into fixed-size
//! batches; batch `b` draws from ChaCha8 stream `b` of the configured seed,
//! and batch statistics are merged in batch order. The estimate therefore
//! does not depend on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::closed_form::MarketParams;
use crate::error::{Error, Result};
use crate::grid::SpreadPayoff;

/// Samples per batch (one sample is one path, or one antithetic pair).
const BATCH: usize = 1 << 14;

/// Recorded in run manifests.
pub const RNG_ALGORITHM: &str = "chacha8-stream-per-batch";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub n_paths: usize,
    pub seed: u64,
    pub antithetic: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_paths: 1_000_000,
            seed: 20_240_531,
            antithetic: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub price: f64,
    pub std_error: f64,
    /// Independent samples behind the estimate (pairs when antithetic).
    pub samples: usize,
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let w = other.count as f64 / count as f64;
        Moments {
            count,
            mean: self.mean + delta * w,
            m2: self.m2 + other.m2 + delta * delta * self.count as f64 * w,
        }
    }
}

/// Discounted Monte Carlo price of `(S₁(T) − S₂(T) − k)⁺` with its
/// standard error.
pub fn mc_spread_price(
    s1: f64,
    s2: f64,
    payoff: &SpreadPayoff,
    params: &MarketParams,
    maturity: f64,
    cfg: &McConfig,
) -> Result<McEstimate> {
    params.validate()?;
    if !(s1 > 0.0 && s2 > 0.0 && s1.is_finite() && s2.is_finite()) {
        return Err(Error::domain(format!(
            "spots must be > 0, got ({s1}, {s2})"
        )));
    }
    if !(maturity.is_finite() && maturity > 0.0) {
        return Err(Error::domain(format!("T must be > 0, got {maturity}")));
    }
    if cfg.n_paths < 2 {
        return Err(Error::domain("n_paths must be >= 2"));
    }

    let MarketParams {
        sigma1,
        sigma2,
        rho,
        r,
    } = *params;
    let sqrt_t = maturity.sqrt();
    let drift1 = (r - 0.5 * sigma1 * sigma1) * maturity;
    let drift2 = (r - 0.5 * sigma2 * sigma2) * maturity;
    let rho_perp = (1.0 - rho * rho).max(0.0).sqrt();
    let path_payoff = |z1: f64, w: f64| {
        let z2 = rho * z1 + rho_perp * w;
        let st1 = s1 * (drift1 + sigma1 * sqrt_t * z1).exp();
        let st2 = s2 * (drift2 + sigma2 * sqrt_t * z2).exp();
        payoff.value(st1, st2)
    };

    let samples = if cfg.antithetic {
        cfg.n_paths.div_ceil(2)
    } else {
        cfg.n_paths
    };
    let batches = samples.div_ceil(BATCH);
    let per_batch: Vec<Moments> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(b as u64);
            let size = BATCH.min(samples - b * BATCH);
            let mut acc = Moments::default();
            for _ in 0..size {
                let z1: f64 = StandardNormal.sample(&mut rng);
                let w: f64 = StandardNormal.sample(&mut rng);
                let x = if cfg.antithetic {
                    0.5 * (path_payoff(z1, w) + path_payoff(-z1, -w))
                } else {
                    path_payoff(z1, w)
                };
                acc.push(x);
            }
            acc
        })
        .collect();
    let total = per_batch
        .into_iter()
        .fold(Moments::default(), Moments::merge);

    let discount = (-r * maturity).exp();
    let variance = total.m2 / (total.count - 1) as f64;
    Ok(McEstimate {
        price: discount * total.mean,
        std_error: discount * (variance / total.count as f64).sqrt(),
        samples: total.count,
    })
}
