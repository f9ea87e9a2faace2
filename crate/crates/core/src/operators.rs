//! Centered second-order operators `A_dx`, `A_dy`, `A_dxdy` on the square
//! lattice, ghost-node extrapolation, and the tridiagonal solver used by
//! the implicit half-steps.
//!
//! Ghost nodes one step outside the domain are defined by linear
//! extrapolation, `V₋₁ = 2V₀ − V₁` and `V_{M+1} = 2V_M − V_{M−1}` (same in y).
//! Corner ghosts apply the rule in x first, then in y; the result is the
//! same in either order.

use ndarray::{Array2, Axis, Zip};
use rayon::prelude::*;

use crate::closed_form::MarketParams;
use crate::error::{Error, Result};
use crate::grid::{Grid, Surface};

/// Splitting weight Θ of the `−rV` term between `A_x` (`Θ`) and `A_y` (`1 − Θ`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorConfig {
    pub theta: f64,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        Self { theta: 0.0 }
    }
}

impl OperatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::domain(format!(
                "theta must lie in [0, 1], got {}",
                self.theta
            )));
        }
        Ok(())
    }
}

/// Surface values padded by one ghost layer on every side.
pub(crate) struct Padded {
    data: Array2<f64>,
}

impl Padded {
    pub(crate) fn new(values: &Array2<f64>) -> Self {
        let (rows, cols) = values.dim();
        let mut data = Array2::zeros((rows + 2, cols + 2));
        data.slice_mut(ndarray::s![1..rows + 1, 1..cols + 1])
            .assign(values);
        for j in 1..=cols {
            data[[0, j]] = 2.0 * data[[1, j]] - data[[2, j]];
            data[[rows + 1, j]] = 2.0 * data[[rows, j]] - data[[rows - 1, j]];
        }
        for i in 0..rows + 2 {
            data[[i, 0]] = 2.0 * data[[i, 1]] - data[[i, 2]];
            data[[i, cols + 1]] = 2.0 * data[[i, cols]] - data[[i, cols - 1]];
        }
        Self { data }
    }

    /// Value at node `(m, n)`, where `-1` and `M + 1` address ghosts.
    #[inline]
    pub(crate) fn at(&self, m: isize, n: isize) -> f64 {
        self.data[[(m + 1) as usize, (n + 1) as usize]]
    }

    #[inline]
    fn d2x(&self, m: isize, n: isize) -> f64 {
        self.at(m + 1, n) - 2.0 * self.at(m, n) + self.at(m - 1, n)
    }

    #[inline]
    fn d2y(&self, m: isize, n: isize) -> f64 {
        self.at(m, n + 1) - 2.0 * self.at(m, n) + self.at(m, n - 1)
    }

    #[inline]
    fn d1x(&self, m: isize, n: isize) -> f64 {
        self.at(m + 1, n) - self.at(m - 1, n)
    }

    #[inline]
    fn d1y(&self, m: isize, n: isize) -> f64 {
        self.at(m, n + 1) - self.at(m, n - 1)
    }

    #[inline]
    fn cross(&self, m: isize, n: isize) -> f64 {
        self.at(m + 1, n + 1) - self.at(m + 1, n - 1) - self.at(m - 1, n + 1)
            + self.at(m - 1, n - 1)
    }
}

/// Ghost values outside each edge of a surface.
#[derive(Debug, Clone, PartialEq)]
pub struct GhostEdges {
    /// `V₋₁,n` for `n = 0..=N`.
    pub x_low: Vec<f64>,
    /// `V_{M+1},n` for `n = 0..=N`.
    pub x_high: Vec<f64>,
    /// `V_m,₋₁` for `m = 0..=M`.
    pub y_low: Vec<f64>,
    /// `V_m,N+1` for `m = 0..=M`.
    pub y_high: Vec<f64>,
}

pub fn ghost_extrapolate(surface: &Surface) -> Result<GhostEdges> {
    let (rows, cols) = surface.shape();
    if rows < 3 || cols < 3 {
        return Err(Error::domain("ghost extrapolation needs M, N >= 2"));
    }
    let p = Padded::new(surface.values());
    let (mm, nn) = (rows as isize - 1, cols as isize - 1);
    Ok(GhostEdges {
        x_low: (0..=nn).map(|n| p.at(-1, n)).collect(),
        x_high: (0..=nn).map(|n| p.at(mm + 1, n)).collect(),
        y_low: (0..=mm).map(|m| p.at(m, -1)).collect(),
        y_high: (0..=mm).map(|m| p.at(m, nn + 1)).collect(),
    })
}

fn map_nodes(
    grid: &Grid,
    surface: &Surface,
    f: impl Fn(&Padded, usize, usize) -> f64 + Sync,
) -> Result<Surface> {
    surface.check_grid(grid)?;
    let p = Padded::new(surface.values());
    let mut out = Array2::zeros(grid.shape());
    Zip::indexed(&mut out).par_for_each(|(m, n), o| *o = f(&p, m, n));
    Ok(Surface::new(out, surface.time_index()))
}

/// `A_dx V = ½σ₁²x²V_xx + r x V_x − rΘV` with centered differences.
pub fn apply_adx(
    surface: &Surface,
    grid: &Grid,
    params: &MarketParams,
    cfg: &OperatorConfig,
) -> Result<Surface> {
    let dx = grid.dx();
    let diff = 0.5 * params.sigma1 * params.sigma1 / (dx * dx);
    let conv = params.r / (2.0 * dx);
    let react = params.r * cfg.theta;
    map_nodes(grid, surface, |p, m, n| {
        let x = grid.x(m);
        let (mi, ni) = (m as isize, n as isize);
        diff * x * x * p.d2x(mi, ni) + conv * x * p.d1x(mi, ni) - react * p.at(mi, ni)
    })
}

/// `A_dy V = ½σ₂²y²V_yy + r y V_y − r(1 − Θ)V` with centered differences.
pub fn apply_ady(
    surface: &Surface,
    grid: &Grid,
    params: &MarketParams,
    cfg: &OperatorConfig,
) -> Result<Surface> {
    let dy = grid.dy();
    let diff = 0.5 * params.sigma2 * params.sigma2 / (dy * dy);
    let conv = params.r / (2.0 * dy);
    let react = params.r * (1.0 - cfg.theta);
    map_nodes(grid, surface, |p, m, n| {
        let y = grid.y(n);
        let (mi, ni) = (m as isize, n as isize);
        diff * y * y * p.d2y(mi, ni) + conv * y * p.d1y(mi, ni) - react * p.at(mi, ni)
    })
}

/// `A_dxdy V = ρσ₁σ₂ x y V_xy` with the four-point cross stencil.
pub fn apply_adxdy(surface: &Surface, grid: &Grid, params: &MarketParams) -> Result<Surface> {
    let coef = params.rho * params.sigma1 * params.sigma2 / (4.0 * grid.dx() * grid.dy());
    map_nodes(grid, surface, |p, m, n| {
        coef * grid.x(m) * grid.y(n) * p.cross(m as isize, n as isize)
    })
}

/// Centered `V_xx` and `V_xy` at every node, ghost-extrapolated at the edges.
pub fn second_derivatives(surface: &Surface, grid: &Grid) -> Result<(Array2<f64>, Array2<f64>)> {
    surface.check_grid(grid)?;
    let p = Padded::new(surface.values());
    let inv_dx2 = 1.0 / (grid.dx() * grid.dx());
    let inv_4dxdy = 1.0 / (4.0 * grid.dx() * grid.dy());
    let vxx = Array2::from_shape_fn(grid.shape(), |(m, n)| {
        p.d2x(m as isize, n as isize) * inv_dx2
    });
    let vxy = Array2::from_shape_fn(grid.shape(), |(m, n)| {
        p.cross(m as isize, n as isize) * inv_4dxdy
    });
    Ok((vxx, vxy))
}

/// Direction of a one-dimensional operator on the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    X,
    Y,
}

/// Tridiagonal coefficients of `A_dx` (or `A_dy`) along one grid line, with
/// the ghost relations folded into the first and last rows. The
/// coefficients depend only on the position along the line, so one set
/// serves every line in that direction.
pub fn line_operator(
    direction: Direction,
    grid: &Grid,
    params: &MarketParams,
    cfg: &OperatorConfig,
) -> TridiagonalSystem {
    let (sigma, step, react, count) = match direction {
        Direction::X => (params.sigma1, grid.dx(), params.r * cfg.theta, grid.m() + 1),
        Direction::Y => (
            params.sigma2,
            grid.dy(),
            params.r * (1.0 - cfg.theta),
            grid.n() + 1,
        ),
    };
    let mut lower = vec![0.0; count];
    let mut diag = vec![0.0; count];
    let mut upper = vec![0.0; count];
    for i in 0..count {
        let z = i as f64 * step;
        let a = 0.5 * sigma * sigma * z * z / (step * step);
        let b = params.r * z / (2.0 * step);
        lower[i] = a - b;
        diag[i] = -2.0 * a - react;
        upper[i] = a + b;
    }
    // V₋₁ = 2V₀ − V₁
    diag[0] += 2.0 * lower[0];
    upper[0] -= lower[0];
    lower[0] = 0.0;
    // V_{M+1} = 2V_M − V_{M−1}
    let last = count - 1;
    diag[last] += 2.0 * upper[last];
    lower[last] -= upper[last];
    upper[last] = 0.0;
    TridiagonalSystem {
        lower,
        diag,
        upper,
        rhs: vec![0.0; count],
    }
}

/// `I − scale·A` for a line operator `A`.
pub fn implicit_matrix(op: &TridiagonalSystem, scale: f64) -> TridiagonalSystem {
    TridiagonalSystem {
        lower: op.lower.iter().map(|v| -scale * v).collect(),
        diag: op.diag.iter().map(|v| 1.0 - scale * v).collect(),
        upper: op.upper.iter().map(|v| -scale * v).collect(),
        rhs: vec![0.0; op.diag.len()],
    }
}

/// `lower[i] x[i−1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
///
/// All vectors have the same length; `lower[0]` and `upper[n−1]` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    fn check(&self) -> Result<()> {
        let n = self.diag.len();
        if n == 0 || self.lower.len() != n || self.upper.len() != n || self.rhs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: (n, n),
                actual: (self.lower.len(), self.upper.len().max(self.rhs.len())),
            });
        }
        Ok(())
    }

    /// Matrix-vector product `A x` (ignores `rhs`).
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    v += self.upper[i] * x[i + 1];
                }
                v
            })
            .collect()
    }
}

/// LU factors of a tridiagonal matrix (Thomas algorithm without pivoting).
#[derive(Debug, Clone)]
pub struct TridiagonalFactor {
    lower: Vec<f64>,
    upper_mod: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl TridiagonalFactor {
    pub fn new(system: &TridiagonalSystem) -> Result<Self> {
        system.check()?;
        let n = system.len();
        let mut upper_mod = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        for i in 0..n {
            let pivot = if i == 0 {
                system.diag[0]
            } else {
                system.diag[i] - system.lower[i] * upper_mod[i - 1]
            };
            if !pivot.is_finite() || pivot.abs() < f64::MIN_POSITIVE {
                return Err(Error::SingularPivot { row: i });
            }
            inv_pivot[i] = 1.0 / pivot;
            if i + 1 < n {
                upper_mod[i] = system.upper[i] * inv_pivot[i];
            }
        }
        Ok(Self {
            lower: system.lower.clone(),
            upper_mod,
            inv_pivot,
        })
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    /// Overwrites `rhs` with the solution.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = self.len();
        debug_assert_eq!(rhs.len(), n);
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.upper_mod[i] * rhs[i + 1];
        }
    }

    /// Solves along every line of `values` in `direction`, in place. Lines
    /// are independent, so the result does not depend on thread count.
    pub fn solve_lines(&self, values: &mut Array2<f64>, direction: Direction) {
        // x-direction lines run over m at fixed n, i.e. the columns.
        let axis = match direction {
            Direction::X => Axis(1),
            Direction::Y => Axis(0),
        };
        values
            .axis_iter_mut(axis)
            .into_par_iter()
            .for_each(|mut line| {
                let mut buf = line.to_vec();
                self.solve_in_place(&mut buf);
                line.iter_mut().zip(buf).for_each(|(dst, src)| *dst = src);
            });
    }
}

pub fn solve_tridiagonal(system: &TridiagonalSystem) -> Result<Vec<f64>> {
    let factor = TridiagonalFactor::new(system)?;
    let mut x = system.rhs.clone();
    factor.solve_in_place(&mut x);
    Ok(x)
}
