//! Peaceman-Rachford marching for the linearized full-feedback model.
//!
//! `V⁰` solves the two-asset Black-Scholes PDE with the payoff as terminal
//! value. `V¹` solves the same operator forced by the source term `G` built
//! from `V⁰`'s second derivatives, with zero terminal value. The price is
//! `V ≈ V⁰ + εV¹`.
//!
//! Each backward step `l + 1 → l` is two half-steps, implicit in x then y:
//!
//! ```text
//! (I − Δt/2 A_dx) V^{l+½} = (I + Δt/2 A_dy) V^{l+1} + Δt/2 A_dxdy V^{l+1} [− Δt/2 G^{l+1}]
//! (I − Δt/2 A_dy) V^{l}   = (I + Δt/2 A_dx) V^{l+½} + Δt/2 A_dxdy V^{l+½} [− Δt/2 G^{l}]
//! ```

use ndarray::{Array2, Zip};

use crate::closed_form::MarketParams;
use crate::error::{Error, Result};
use crate::grid::{interpolate_at, payoff_surface, Grid, SpreadPayoff, Surface};
use crate::impact::{lambda_hat, ImpactParams};
use crate::operators::{
    implicit_matrix, line_operator, second_derivatives, Direction, OperatorConfig, Padded,
    TridiagonalFactor,
};

/// Which surface the cross term of the second `V¹` half-step acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum V1CrossTerm {
    /// `A_dxdy V^{1,l+½}`, consistent with the splitting of the `V¹` equation.
    #[default]
    Consistent,
    /// `A_dxdy V^{0,l+½}`, the literal reading of the printed scheme.
    AsPrinted,
}

impl V1CrossTerm {
    pub fn name(&self) -> &'static str {
        match self {
            V1CrossTerm::Consistent => "consistent",
            V1CrossTerm::AsPrinted => "as_printed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolverConfig {
    pub operators: OperatorConfig,
    pub v1_cross: V1CrossTerm,
}

/// `G` at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceTerm {
    pub values: Surface,
}

/// All time levels of both expansion terms plus the recombined price at `t₀`.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub v0_levels: Vec<Surface>,
    pub v1_levels: Vec<Surface>,
    pub combined_t0: Surface,
    pub epsilon: f64,
}

/// Prices read off the `t₀` surfaces at one spot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpotPrices {
    pub s1: f64,
    pub s2: f64,
    /// Liquid (Black-Scholes) price `V⁰`.
    pub v0: f64,
    /// Excess price `εV¹`.
    pub excess: f64,
    /// `V⁰ + εV¹`.
    pub combined: f64,
}

impl SolveResult {
    pub fn v0_t0(&self) -> &Surface {
        &self.v0_levels[0]
    }

    pub fn v1_t0(&self) -> &Surface {
        &self.v1_levels[0]
    }

    /// `εV¹` at `t₀`.
    pub fn excess_t0(&self) -> Surface {
        Surface::new(self.v1_t0().values() * self.epsilon, 0)
    }

    pub fn prices_at(&self, grid: &Grid, s1: f64, s2: f64) -> Result<SpotPrices> {
        let v0 = interpolate_at(self.v0_t0(), grid, s1, s2)?;
        let v1 = interpolate_at(self.v1_t0(), grid, s1, s2)?;
        let combined = interpolate_at(&self.combined_t0, grid, s1, s2)?;
        Ok(SpotPrices {
            s1,
            s2,
            v0,
            excess: self.epsilon * v1,
            combined,
        })
    }
}

/// Prefactored implicit operators for one (grid, params) pair.
struct Scheme<'a> {
    grid: &'a Grid,
    params: &'a MarketParams,
    cfg: &'a SolverConfig,
    half_dt: f64,
    implicit_x: TridiagonalFactor,
    implicit_y: TridiagonalFactor,
}

impl<'a> Scheme<'a> {
    fn new(grid: &'a Grid, params: &'a MarketParams, cfg: &'a SolverConfig) -> Result<Self> {
        check_params(params)?;
        cfg.operators.validate()?;
        let half_dt = 0.5 * grid.dt();
        let ax = line_operator(Direction::X, grid, params, &cfg.operators);
        let ay = line_operator(Direction::Y, grid, params, &cfg.operators);
        Ok(Self {
            grid,
            params,
            cfg,
            half_dt,
            implicit_x: TridiagonalFactor::new(&implicit_matrix(&ax, half_dt))?,
            implicit_y: TridiagonalFactor::new(&implicit_matrix(&ay, half_dt))?,
        })
    }

    /// `V + h (A_d{dir} V + A_dxdy C)` where `C` is `cross_of` (or `V`).
    fn explicit(
        &self,
        v: &Array2<f64>,
        dir: Direction,
        cross_of: Option<&Array2<f64>>,
    ) -> Array2<f64> {
        let g = self.grid;
        let p = self.params;
        let theta = self.cfg.operators.theta;
        let h = self.half_dt;
        let step = g.dx();
        let (sigma, react) = match dir {
            Direction::X => (p.sigma1, p.r * theta),
            Direction::Y => (p.sigma2, p.r * (1.0 - theta)),
        };
        let diff = 0.5 * sigma * sigma / (step * step);
        let conv = p.r / (2.0 * step);
        let cross = p.rho * p.sigma1 * p.sigma2 / (4.0 * g.dx() * g.dy());

        let pv = Padded::new(v);
        let pc = cross_of.map(Padded::new);
        let pc = pc.as_ref().unwrap_or(&pv);
        let mut out = Array2::zeros(g.shape());
        Zip::indexed(&mut out).par_for_each(|(m, n), o| {
            let (mi, ni) = (m as isize, n as isize);
            let c = pv.at(mi, ni);
            let (z, fwd, back) = match dir {
                Direction::X => (g.x(m), pv.at(mi + 1, ni), pv.at(mi - 1, ni)),
                Direction::Y => (g.y(n), pv.at(mi, ni + 1), pv.at(mi, ni - 1)),
            };
            let a = diff * z * z * (fwd - 2.0 * c + back) + conv * z * (fwd - back) - react * c;
            let xy = pc.at(mi + 1, ni + 1) - pc.at(mi + 1, ni - 1) - pc.at(mi - 1, ni + 1)
                + pc.at(mi - 1, ni - 1);
            let axy = cross * g.x(m) * g.y(n) * xy;
            *o = c + h * (a + axy);
        });
        out
    }

    /// One backward step. Returns `(V^{l+½}, V^l)`.
    fn step(
        &self,
        v_next: &Array2<f64>,
        forcing_next: Option<&Array2<f64>>,
        forcing_now: Option<&Array2<f64>>,
        second_cross: Option<&Array2<f64>>,
    ) -> (Array2<f64>, Array2<f64>) {
        let h = self.half_dt;
        let mut half = self.explicit(v_next, Direction::Y, None);
        if let Some(g) = forcing_next {
            half.scaled_add(-h, g);
        }
        self.implicit_x.solve_lines(&mut half, Direction::X);

        let mut now = self.explicit(&half, Direction::X, second_cross);
        if let Some(g) = forcing_now {
            now.scaled_add(-h, g);
        }
        self.implicit_y.solve_lines(&mut now, Direction::Y);
        (half, now)
    }
}

/// Like [`MarketParams::validate`] but admits zero volatilities, where the
/// scheme degenerates to pure discounting along characteristics.
fn check_params(p: &MarketParams) -> Result<()> {
    let ok = p.sigma1.is_finite()
        && p.sigma1 >= 0.0
        && p.sigma2.is_finite()
        && p.sigma2 >= 0.0
        && (-1.0..=1.0).contains(&p.rho)
        && p.r.is_finite()
        && p.r >= 0.0;
    if ok {
        Ok(())
    } else {
        Err(Error::domain(format!("invalid market parameters {p:?}")))
    }
}

fn check_finite(values: &Array2<f64>, level: usize) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { level })
    }
}

fn check_level(v: &Surface, grid: &Grid) -> Result<()> {
    v.check_grid(grid)?;
    if v.time_index() == 0 || v.time_index() > grid.l() {
        return Err(Error::domain(format!(
            "cannot step back from time level {}",
            v.time_index()
        )));
    }
    check_finite(v.values(), v.time_index())
}

/// One Peaceman-Rachford step of `V⁰` from level `l + 1` to `l`.
pub fn step_v0(
    v_next: &Surface,
    grid: &Grid,
    params: &MarketParams,
    cfg: &SolverConfig,
) -> Result<Surface> {
    check_level(v_next, grid)?;
    let scheme = Scheme::new(grid, params, cfg)?;
    let level = v_next.time_index() - 1;
    let (_, now) = scheme.step(v_next.values(), None, None, None);
    check_finite(&now, level)?;
    Ok(Surface::new(now, level))
}

/// Marches `V⁰` from the payoff at `l = L` back to `l = 0`. Index `l` of the
/// result holds level `l`.
pub fn solve_v0(
    grid: &Grid,
    params: &MarketParams,
    payoff: &SpreadPayoff,
    cfg: &SolverConfig,
) -> Result<Vec<Surface>> {
    let scheme = Scheme::new(grid, params, cfg)?;
    let mut levels = Vec::with_capacity(grid.l() + 1);
    levels.push(payoff_surface(grid, payoff));
    for l in (0..grid.l()).rev() {
        let (_, now) = scheme.step(levels.last().unwrap().values(), None, None, None);
        check_finite(&now, l)?;
        levels.push(Surface::new(now, l));
    }
    levels.reverse();
    Ok(levels)
}

/// `V⁰` at `t₀` only, keeping two levels in memory.
pub fn solve_v0_t0(
    grid: &Grid,
    params: &MarketParams,
    payoff: &SpreadPayoff,
    cfg: &SolverConfig,
) -> Result<Surface> {
    let scheme = Scheme::new(grid, params, cfg)?;
    let mut v = payoff_surface(grid, payoff).into_values();
    for l in (0..grid.l()).rev() {
        v = scheme.step(&v, None, None, None).1;
        check_finite(&v, l)?;
    }
    Ok(Surface::new(v, 0))
}

/// `G = −λ̂ (σ₁²x²V_xx² + 2ρσ₁σ₂xy V_xx V_xy + σ₂²y²V_xy²)` on one level of `V⁰`.
pub fn compute_g(
    v0: &Surface,
    grid: &Grid,
    params: &MarketParams,
    impact: &ImpactParams,
    t: f64,
    maturity: f64,
) -> Result<SourceTerm> {
    let (vxx, vxy) = second_derivatives(v0, grid)?;
    let rho = params.rho;
    let lam: Vec<f64> = (0..=grid.m())
        .map(|m| lambda_hat(t, grid.x(m), maturity, impact))
        .collect();
    let mut g = Array2::zeros(grid.shape());
    Zip::indexed(&mut g)
        .and(&vxx)
        .and(&vxy)
        .for_each(|(m, n), out, &xx, &xy| {
            if lam[m] == 0.0 {
                return;
            }
            let a = params.sigma1 * grid.x(m) * xx;
            let b = params.sigma2 * grid.y(n) * xy;
            // a² + 2ρab + b² as a sum of squares, so G ≤ 0 survives rounding
            let quad = (a + rho * b).powi(2) + (1.0 - rho * rho) * b * b;
            *out = -lam[m] * quad;
        });
    Ok(SourceTerm {
        values: Surface::new(g, v0.time_index()),
    })
}

/// One Peaceman-Rachford step of `V¹` from level `l + 1` to `l`, forced by
/// `G^{l+1}` in the first half-step and `G^l` in the second.
///
/// `v0_half` (`V^{0,l+½}`) is needed only for [`V1CrossTerm::AsPrinted`].
pub fn step_v1(
    v1_next: &Surface,
    g_next: &SourceTerm,
    g_now: &SourceTerm,
    grid: &Grid,
    params: &MarketParams,
    cfg: &SolverConfig,
    v0_half: Option<&Surface>,
) -> Result<Surface> {
    check_level(v1_next, grid)?;
    g_next.values.check_grid(grid)?;
    g_now.values.check_grid(grid)?;
    let scheme = Scheme::new(grid, params, cfg)?;
    let second_cross = match cfg.v1_cross {
        V1CrossTerm::Consistent => None,
        V1CrossTerm::AsPrinted => Some(
            v0_half
                .ok_or_else(|| Error::domain("as-printed V1 scheme needs V0 at l + 1/2"))?
                .values(),
        ),
    };
    let level = v1_next.time_index() - 1;
    let (_, now) = scheme.step(
        v1_next.values(),
        Some(g_next.values.values()),
        Some(g_now.values.values()),
        second_cross,
    );
    check_finite(&now, level)?;
    Ok(Surface::new(now, level))
}

/// Solves `V⁰` fully, then marches `V¹` with `G` built from the stored `V⁰`
/// levels, and recombines `V⁰ + εV¹` at `t₀`.
pub fn solve_full(
    grid: &Grid,
    params: &MarketParams,
    impact: &ImpactParams,
    payoff: &SpreadPayoff,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    impact.validate()?;
    let v0_levels = solve_v0(grid, params, payoff, cfg)?;
    let scheme = Scheme::new(grid, params, cfg)?;
    let maturity = grid.maturity();
    let source = |l: usize| compute_g(&v0_levels[l], grid, params, impact, grid.t(l), maturity);

    let mut v1_levels = Vec::with_capacity(grid.l() + 1);
    v1_levels.push(Surface::zeros(grid, grid.l()));
    let mut g_next = source(grid.l())?;
    for l in (0..grid.l()).rev() {
        let g_now = source(l)?;
        let v0_half = match cfg.v1_cross {
            V1CrossTerm::Consistent => None,
            V1CrossTerm::AsPrinted => {
                Some(scheme.step(v0_levels[l + 1].values(), None, None, None).0)
            }
        };
        let (_, now) = scheme.step(
            v1_levels.last().unwrap().values(),
            Some(g_next.values.values()),
            Some(g_now.values.values()),
            v0_half.as_ref(),
        );
        check_finite(&now, l)?;
        v1_levels.push(Surface::new(now, l));
        g_next = g_now;
    }
    v1_levels.reverse();

    let epsilon = impact.epsilon;
    let mut combined = v0_levels[0].values().clone();
    Zip::from(&mut combined)
        .and(v1_levels[0].values())
        .for_each(|v, &w| {
            if w != 0.0 && epsilon != 0.0 {
                *v += epsilon * w;
            }
        });
    Ok(SolveResult {
        v0_levels,
        v1_levels,
        combined_t0: Surface::new(combined, 0),
        epsilon,
    })
}
