//! Frozen-coefficient Von Neumann analysis of the Peaceman-Rachford scheme.
//!
//! With `a₂ = C a₁`, `c₂ = Ĉ a₁` the sufficient condition for `|g| ≤ 1` is
//! `a₁ ≤ A = min{2/Ĉ, 1/(1 + 2Ĉ), 1/(4Ĉ² + 2Ĉ)}`, which on the square
//! lattice becomes `Δt/Δx² ≤ A / (max{σ₁², σ₂²} x_max²)`.
//!
//! The coefficients are frozen at `x = y = x_max`, where `a₁` is largest.
//! There `Ĉ = |ρ|σ₂/(2σ₁)` and `C = σ₂²/σ₁²`. All constants assume Θ = 0.

use std::f64::consts::PI;

use crate::closed_form::MarketParams;
use crate::grid::Grid;

/// Per-point coefficients of the amplification factor.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AmplificationCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    pub c1: f64,
    pub c2: f64,
}

impl AmplificationCoefficients {
    /// Coefficients frozen at the node `(x, y)`.
    pub fn at_point(grid: &Grid, params: &MarketParams, x: f64, y: f64) -> Self {
        let dt = grid.dt();
        let (dx, dy) = (grid.dx(), grid.dy());
        let MarketParams {
            sigma1,
            sigma2,
            rho,
            r,
        } = *params;
        Self {
            a1: dt * sigma1 * sigma1 * x * x / (dx * dx),
            a2: dt * sigma2 * sigma2 * y * y / (dy * dy),
            b1: dt * r * x / (2.0 * dx),
            b2: dt * r * y / (2.0 * dy),
            c1: 0.5 * r * dt,
            c2: dt * sigma1 * sigma2 * rho * x * y / (2.0 * dx * dy),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    /// `a₁ = Δt σ₁² x² / Δx²` at the frozen point.
    pub a1: f64,
    /// `C = a₂ / a₁`.
    pub c: f64,
    /// `Ĉ = |c₂| / a₁`.
    pub c_hat: f64,
    /// Bound constant `A`.
    pub a_bound: f64,
    pub dt: f64,
    /// Largest admissible `Δt` on this lattice.
    pub dt_max: f64,
    pub satisfied: bool,
    /// All six coefficients at the frozen point.
    pub coefficients: AmplificationCoefficients,
}

/// `A = min{2/Ĉ, 1/(1 + 2Ĉ), 1/(4Ĉ² + 2Ĉ)}`; terms with a zero
/// denominator are dropped, so `A = 1` at `Ĉ = 0`.
pub fn bound_constant(c_hat: f64) -> f64 {
    let mut a = 1.0 / (1.0 + 2.0 * c_hat);
    if c_hat > 0.0 {
        a = a
            .min(2.0 / c_hat)
            .min(1.0 / (4.0 * c_hat * c_hat + 2.0 * c_hat));
    }
    a
}

pub fn stability_bound(grid: &Grid, params: &MarketParams) -> StabilityReport {
    let x_max = grid.x_max();
    let coefficients = AmplificationCoefficients::at_point(grid, params, x_max, grid.y_max());
    let c = (params.sigma2 * params.sigma2) / (params.sigma1 * params.sigma1);
    let c_hat = params.rho.abs() * params.sigma2 / (2.0 * params.sigma1);
    let a_bound = bound_constant(c_hat);
    let sigma_max2 = (params.sigma1 * params.sigma1).max(params.sigma2 * params.sigma2);
    let dx = grid.dx();
    let dt_max = a_bound * dx * dx / (sigma_max2 * x_max * x_max);
    let dt = grid.dt();
    StabilityReport {
        a1: coefficients.a1,
        c,
        c_hat,
        a_bound,
        dt,
        dt_max,
        satisfied: dt <= dt_max,
        coefficients,
    }
}

/// `|g(θ, φ)|²` of the Peaceman-Rachford scheme for frozen coefficients.
pub fn evaluate_amplification(theta: f64, phi: f64, k: &AmplificationCoefficients) -> f64 {
    let st = (0.5 * theta).sin().powi(2);
    let sp = (0.5 * phi).sin().powi(2);
    let (sin_t, sin_p) = (theta.sin(), phi.sin());
    let cross = k.c2 * sin_t * sin_p;
    let num_x = (1.0 - k.a1 * st - cross).powi(2) + (k.b1 * sin_t).powi(2);
    let num_y = (1.0 - k.a2 * sp - k.c1 - cross).powi(2) + (k.b2 * sin_p).powi(2);
    let den_x = (1.0 + k.a1 * st).powi(2) + (k.b1 * sin_t).powi(2);
    let den_y = (1.0 + k.a2 * sp + k.c1).powi(2) + (k.b2 * sin_p).powi(2);
    num_x * num_y / (den_x * den_y)
}

/// Maximum of `|g|²` over a `samples × samples` grid on `[−π, π]²`.
pub fn max_amplification(k: &AmplificationCoefficients, samples: usize) -> f64 {
    let step = 2.0 * PI / (samples.max(2) - 1) as f64;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..samples {
        let theta = -PI + i as f64 * step;
        for j in 0..samples {
            let phi = -PI + j as f64 * step;
            worst = worst.max(evaluate_amplification(theta, phi, k));
        }
    }
    worst
}
