//! Uniform lattice on the truncated domain `[0, x_max] × [0, y_max] × [0, T]`.
//!
//! The lattice is square: `M = N`, `Δx = Δy`, `x_max = y_max`. Node `(m, n)`
//! sits at `(m Δx, n Δy)` and time level `l` at `l Δt`.

use std::io::{Read, Write};

use ndarray::Array2;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_max: f64,
    steps: usize,
    time_steps: usize,
    maturity: f64,
}

/// Builds the square lattice with `N = M` and `y_max = x_max`.
pub fn build_grid(x_max: f64, m: usize, l: usize, maturity: f64) -> Result<Grid> {
    if !(x_max.is_finite() && x_max > 0.0) {
        return Err(Error::domain(format!("x_max must be > 0, got {x_max}")));
    }
    if m < 2 {
        return Err(Error::domain(format!("M must be >= 2, got {m}")));
    }
    if l < 1 {
        return Err(Error::domain(format!("L must be >= 1, got {l}")));
    }
    if !(maturity.is_finite() && maturity > 0.0) {
        return Err(Error::domain(format!("T must be > 0, got {maturity}")));
    }
    Ok(Grid {
        x_max,
        steps: m,
        time_steps: l,
        maturity,
    })
}

impl Grid {
    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn y_max(&self) -> f64 {
        self.x_max
    }

    /// Number of x steps `M`.
    pub fn m(&self) -> usize {
        self.steps
    }

    /// Number of y steps `N` (always equal to `M`).
    pub fn n(&self) -> usize {
        self.steps
    }

    /// Number of time steps `L`.
    pub fn l(&self) -> usize {
        self.time_steps
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }

    pub fn dx(&self) -> f64 {
        self.x_max / self.steps as f64
    }

    pub fn dy(&self) -> f64 {
        self.dx()
    }

    pub fn dt(&self) -> f64 {
        self.maturity / self.time_steps as f64
    }

    pub fn x(&self, m: usize) -> f64 {
        m as f64 * self.dx()
    }

    pub fn y(&self, n: usize) -> f64 {
        n as f64 * self.dy()
    }

    pub fn t(&self, l: usize) -> f64 {
        l as f64 * self.dt()
    }

    /// Shape `(M + 1, N + 1)` of every surface on this grid.
    pub fn shape(&self) -> (usize, usize) {
        (self.steps + 1, self.steps + 1)
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..=self.steps).map(|m| self.x(m)).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        (0..=self.steps).map(|n| self.y(n)).collect()
    }
}

/// Payoff `(S₁ − S₂ − k)⁺`. Negative strikes are allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreadPayoff {
    pub strike: f64,
}

impl SpreadPayoff {
    pub fn new(strike: f64) -> Result<Self> {
        if !strike.is_finite() {
            return Err(Error::domain("strike must be finite"));
        }
        Ok(Self { strike })
    }

    pub fn value(&self, s1: f64, s2: f64) -> f64 {
        (s1 - s2 - self.strike).max(0.0)
    }
}

/// Values of a function of `(x, y)` on one time level, indexed `[m, n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    values: Array2<f64>,
    time_index: usize,
}

impl Surface {
    pub fn new(values: Array2<f64>, time_index: usize) -> Self {
        Self { values, time_index }
    }

    pub fn zeros(grid: &Grid, time_index: usize) -> Self {
        Self::new(Array2::zeros(grid.shape()), time_index)
    }

    /// Samples `f(x_m, y_n)` at every node.
    pub fn from_fn(grid: &Grid, time_index: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = Array2::from_shape_fn(grid.shape(), |(m, n)| f(grid.x(m), grid.y(n)));
        Self::new(values, time_index)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array2<f64> {
        &mut self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn time_index(&self) -> usize {
        self.time_index
    }

    pub fn set_time_index(&mut self, l: usize) {
        self.time_index = l;
    }

    pub fn shape(&self) -> (usize, usize) {
        self.values.dim()
    }

    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.values[[m, n]]
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if self.shape() != grid.shape() {
            return Err(Error::DimensionMismatch {
                expected: grid.shape(),
                actual: self.shape(),
            });
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Node index of the maximum value.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let mut best_val = f64::NEG_INFINITY;
        for ((m, n), &v) in self.values.indexed_iter() {
            if v > best_val {
                best_val = v;
                best = (m, n);
            }
        }
        best
    }
}

/// Payoff sampled on the grid at the terminal level `L`.
pub fn payoff_surface(grid: &Grid, payoff: &SpreadPayoff) -> Surface {
    Surface::from_fn(grid, grid.l(), |x, y| payoff.value(x, y))
}

/// Bilinear interpolation over the cell enclosing `(S₁, S₂)`.
pub fn interpolate_at(surface: &Surface, grid: &Grid, s1: f64, s2: f64) -> Result<f64> {
    surface.check_grid(grid)?;
    if !(0.0..=grid.x_max()).contains(&s1) || !(0.0..=grid.y_max()).contains(&s2) {
        return Err(Error::domain(format!(
            "point ({s1}, {s2}) outside [0, {}]²",
            grid.x_max()
        )));
    }
    let (i, fx) = cell(s1 / grid.dx(), grid.m());
    let (j, fy) = cell(s2 / grid.dy(), grid.n());
    let v = surface.values();
    let lower = (1.0 - fy) * v[[i, j]] + fy * v[[i, j + 1]];
    let upper = (1.0 - fy) * v[[i + 1, j]] + fy * v[[i + 1, j + 1]];
    Ok((1.0 - fx) * lower + fx * upper)
}

fn cell(pos: f64, steps: usize) -> (usize, f64) {
    let i = (pos.floor() as usize).min(steps - 1);
    (i, pos - i as f64)
}

/// Formats a real with 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `surface` as CSV: header `x\y,y_0,...,y_N`, then one row per x node.
pub fn write_surface_csv<W: Write>(surface: &Surface, grid: &Grid, out: W) -> Result<()> {
    surface.check_grid(grid)?;
    let mut wtr = csv::WriterBuilder::new().from_writer(out);
    let mut header = vec!["x\\y".to_string()];
    header.extend(grid.ys().into_iter().map(fmt_real));
    wtr.write_record(&header)?;
    for (m, row) in surface.values().outer_iter().enumerate() {
        let mut rec = Vec::with_capacity(row.len() + 1);
        rec.push(fmt_real(grid.x(m)));
        rec.extend(row.iter().map(|&v| fmt_real(v)));
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

/// A surface read back from CSV together with its axis coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceTable {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: Array2<f64>,
}

pub fn read_surface_csv<R: Read>(input: R) -> Result<SurfaceTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header = rdr.headers()?.clone();
    if header.get(0) != Some("x\\y") {
        return Err(Error::Config("surface CSV must start with `x\\y`".into()));
    }
    let ys = header
        .iter()
        .skip(1)
        .map(parse_real)
        .collect::<Result<Vec<_>>>()?;
    let mut xs = Vec::new();
    let mut flat = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != ys.len() + 1 {
            return Err(Error::Config(format!(
                "row has {} fields, expected {}",
                rec.len(),
                ys.len() + 1
            )));
        }
        let mut fields = rec.iter();
        xs.push(parse_real(fields.next().unwrap_or_default())?);
        for f in fields {
            flat.push(parse_real(f)?);
        }
    }
    let values = Array2::from_shape_vec((xs.len(), ys.len()), flat)
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(SurfaceTable { xs, ys, values })
}

pub(crate) fn parse_real(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("not a number: `{s}`")))
}
