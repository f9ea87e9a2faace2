//! Two-asset spread option pricing in a market with price impact.
//!
//! The nonlinear full-feedback pricing PDE is linearized as `V ≈ V⁰ + εV¹`.
//! Both linear problems are marched backward in time with a Peaceman-Rachford
//! ADI scheme on a truncated uniform grid. Margrabe/Kirk closed forms and a
//! Monte Carlo pricer serve as independent checks.
//!
//! Module map:
//!
//! * [`closed_form`]: Margrabe exchange price and Kirk spread approximation.
//! * [`grid`]: lattice, payoff, surfaces, interpolation and CSV export.
//! * [`impact`]: the price-impact profile `λ̂(t, S₁)`.
//! * [`operators`]: finite-difference operators, ghost nodes, tridiagonal solves.
//! * [`adi`]: the `V⁰`/`V¹` time marching and the source term `G`.
//! * [`stability`]: frozen-coefficient Von Neumann bound and amplification factor.
//! * [`mc`]: Monte Carlo reference pricer for the liquid model.
//! * [`config`], [`manifest`], [`app`]: command-line driver plumbing.

pub mod adi;
pub mod app;
pub mod closed_form;
pub mod config;
pub mod error;
pub mod grid;
pub mod impact;
pub mod manifest;
pub mod mc;
pub mod operators;
pub mod stability;

pub use adi::{
    solve_full, solve_v0, solve_v0_t0, SolveResult, SolverConfig, SourceTerm, V1CrossTerm,
};
pub use closed_form::{kirk_price, margrabe_price, norm_cdf, MarketParams};
pub use error::{Error, Result};
pub use grid::{build_grid, payoff_surface, Grid, SpreadPayoff, Surface};
pub use impact::{lambda_hat, ImpactParams};
pub use mc::{mc_spread_price, McConfig, McEstimate};
pub use operators::OperatorConfig;
pub use stability::{stability_bound, StabilityReport};
