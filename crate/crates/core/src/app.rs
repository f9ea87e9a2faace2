//! Command implementations behind the `illiquid-spread` binary.
//!
//! Each command computes everything first and only then touches the output
//! directory, so a failed run leaves no files behind.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::adi::{compute_g, solve_full, solve_v0_t0, SolveResult, SpotPrices};
use crate::closed_form::{margrabe_price, MarketParams};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::grid::{
    build_grid, interpolate_at, payoff_surface, write_surface_csv, Grid, SpreadPayoff, Surface,
};
use crate::impact::ImpactParams;
use crate::manifest::Manifest;
use crate::mc::{mc_spread_price, RNG_ALGORITHM};
use crate::stability::{stability_bound, StabilityReport};

/// Risk-free rate used by the table reproductions.
pub const TABLE_RATE: f64 = 0.05;
pub const TABLE2_SPOT: (f64, f64) = (112.0, 104.0);
pub const TABLE2_RHOS: [f64; 4] = [0.1, 0.5, 0.7, 0.9];
pub const TABLE2_MATURITIES: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 1.0];
pub const TABLE3_SPOT: (f64, f64) = (100.0, 100.0);
pub const TABLE3_MATURITY: f64 = 0.4;
pub const TABLE3_STRIKES: [f64; 8] = [-15.0, -5.0, -2.0, 0.0, 2.0, 5.0, 10.0, 20.0];
pub const DEFAULT_LADDER: [(usize, usize); 3] = [(50, 100), (100, 100), (200, 200)];

/// `(m, l)` rows of one correlation block; the ρ = 0.7 block uses
/// `l = 210` in its middle row.
pub fn table2_ladder(rho: f64) -> [(usize, usize); 3] {
    if rho == 0.7 {
        [(50, 100), (100, 210), (200, 200)]
    } else {
        DEFAULT_LADDER
    }
}

fn with_rate(market: &MarketParams, rho: f64, r: f64) -> MarketParams {
    MarketParams { rho, r, ..*market }
}

// price

pub struct PriceRun {
    pub grid: Grid,
    pub result: SolveResult,
    pub stability: StabilityReport,
    pub prices: Vec<SpotPrices>,
    pub manifest: Manifest,
}

pub fn run_price(cfg: &RunConfig) -> Result<PriceRun> {
    let start = Instant::now();
    let grid = cfg.grid.build()?;
    let stability = stability_bound(&grid, &cfg.market);
    let result = solve_full(&grid, &cfg.market, &cfg.impact, &cfg.payoff, &cfg.solver)?;
    let prices = cfg
        .spots
        .iter()
        .map(|&(s1, s2)| result.prices_at(&grid, s1, s2))
        .collect::<Result<Vec<_>>>()?;

    let mut mf = Manifest::new();
    echo_inputs(&mut mf, cfg, &grid);
    echo_stability(&mut mf, &stability);
    mf.push("solver.v1_cross", cfg.solver.v1_cross.name());
    mf.push("spot.count", prices.len());
    for (i, p) in prices.iter().enumerate() {
        mf.push(format!("spot.{i}.s1"), p.s1);
        mf.push(format!("spot.{i}.s2"), p.s2);
        mf.push(format!("spot.{i}.v0"), p.v0);
        mf.push(format!("spot.{i}.excess"), p.excess);
        mf.push(format!("spot.{i}.combined"), p.combined);
    }
    mf.push("wall_time_s", start.elapsed().as_secs_f64());
    Ok(PriceRun {
        grid,
        result,
        stability,
        prices,
        manifest: mf,
    })
}

fn echo_inputs(mf: &mut Manifest, cfg: &RunConfig, grid: &Grid) {
    let MarketParams {
        sigma1,
        sigma2,
        rho,
        r,
    } = cfg.market;
    mf.push("market.sigma1", sigma1);
    mf.push("market.sigma2", sigma2);
    mf.push("market.rho", rho);
    mf.push("market.r", r);
    let ImpactParams {
        epsilon,
        beta,
        s_low,
        s_high,
    } = cfg.impact;
    mf.push("impact.epsilon", epsilon);
    mf.push("impact.beta", beta);
    mf.push("impact.s_low", s_low);
    mf.push("impact.s_high", s_high);
    mf.push("payoff.strike", cfg.payoff.strike);
    mf.push("grid.x_max", grid.x_max());
    mf.push("grid.m", grid.m());
    mf.push("grid.n", grid.n());
    mf.push("grid.l", grid.l());
    mf.push("grid.maturity", grid.maturity());
    mf.push("grid.dx", grid.dx());
    mf.push("grid.dt", grid.dt());
    mf.push("solver.theta", cfg.solver.operators.theta);
}

fn echo_stability(mf: &mut Manifest, s: &StabilityReport) {
    mf.push("stability.a1", s.a1);
    mf.push("stability.c", s.c);
    mf.push("stability.c_hat", s.c_hat);
    mf.push("stability.a_bound", s.a_bound);
    mf.push("stability.dt", s.dt);
    mf.push("stability.dt_max", s.dt_max);
    mf.push("stability.satisfied", s.satisfied);
    if !s.satisfied {
        mf.push(
            "warning",
            format!(
                "dt = {} exceeds the frozen-coefficient bound dt_max = {}",
                s.dt, s.dt_max
            ),
        );
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_surface(path: &Path, s: &Surface, grid: &Grid) -> Result<()> {
    write_surface_csv(s, grid, create(path)?)
}

/// Writes `manifest.txt` and the `t₀` surfaces; with `all_levels`, every
/// time level of `V⁰` and `V¹` under `levels/`.
pub fn write_price_outputs(run: &PriceRun, dir: &Path, all_levels: bool) -> Result<()> {
    fs::create_dir_all(dir)?;
    run.manifest.write_to(create(&dir.join("manifest.txt"))?)?;
    let g = &run.grid;
    write_surface(&dir.join("v0_t0.csv"), run.result.v0_t0(), g)?;
    write_surface(&dir.join("v1_t0.csv"), run.result.v1_t0(), g)?;
    write_surface(&dir.join("excess_t0.csv"), &run.result.excess_t0(), g)?;
    write_surface(&dir.join("price_t0.csv"), &run.result.combined_t0, g)?;
    if all_levels {
        let levels = dir.join("levels");
        fs::create_dir_all(&levels)?;
        for (l, (v0, v1)) in run
            .result
            .v0_levels
            .iter()
            .zip(&run.result.v1_levels)
            .enumerate()
        {
            write_surface(&levels.join(format!("v0_l{l:05}.csv")), v0, g)?;
            write_surface(&levels.join(format!("v1_l{l:05}.csv")), v1, g)?;
        }
    }
    Ok(())
}

// tables

/// One printed row: either a grid row (`m`, `l` set) or the closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub rho: f64,
    pub kind: String,
    pub m: Option<usize>,
    pub l: Option<usize>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// Column labels after the fixed `rho,kind,m,l` prefix.
    pub columns: Vec<String>,
    pub rows: Vec<TableRow>,
}

impl Table {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let mut header = vec!["rho".to_string(), "kind".into(), "m".into(), "l".into()];
        header.extend(self.columns.iter().cloned());
        wtr.write_record(&header)?;
        let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        for row in &self.rows {
            let mut rec = vec![
                row.rho.to_string(),
                row.kind.clone(),
                opt(row.m),
                opt(row.l),
            ];
            rec.extend(row.values.iter().map(f64::to_string));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let header = rdr.headers()?.clone();
        if header.len() < 4 {
            return Err(Error::Config("table CSV needs rho,kind,m,l columns".into()));
        }
        let columns = header.iter().skip(4).map(String::from).collect();
        let parse_opt = |s: &str| -> Result<Option<usize>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse()
                    .map(Some)
                    .map_err(|_| Error::Config(format!("bad count `{s}`")))
            }
        };
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let f = |i: usize| rec.get(i).unwrap_or_default();
            rows.push(TableRow {
                rho: crate::grid::parse_real(f(0))?,
                kind: f(1).to_string(),
                m: parse_opt(f(2))?,
                l: parse_opt(f(3))?,
                values: rec
                    .iter()
                    .skip(4)
                    .map(crate::grid::parse_real)
                    .collect::<Result<_>>()?,
            });
        }
        Ok(Self { columns, rows })
    }

    pub fn row(&self, rho: f64, kind: &str, m: Option<usize>) -> Option<&TableRow> {
        self.rows
            .iter()
            .find(|r| r.rho == rho && r.kind == kind && (m.is_none() || r.m == m))
    }
}

/// Liquid-model PDE price at `k = 0` versus Margrabe over the ρ blocks and
/// maturities; `ladder` replaces the per-block `(m, l)` rows when given.
pub fn table2(cfg: &RunConfig, rhos: &[f64], ladder: Option<&[(usize, usize)]>) -> Result<Table> {
    let (s1, s2) = TABLE2_SPOT;
    let payoff = SpreadPayoff::new(0.0)?;
    let mut rows = Vec::new();
    for &rho in rhos {
        let params = with_rate(&cfg.market, rho, TABLE_RATE);
        let block = table2_ladder(rho);
        for &(m, l) in ladder.unwrap_or(&block) {
            let values = TABLE2_MATURITIES
                .iter()
                .map(|&t| {
                    let grid = build_grid(cfg.grid.x_max, m, l, t)?;
                    let v = solve_v0_t0(&grid, &params, &payoff, &cfg.solver)?;
                    interpolate_at(&v, &grid, s1, s2)
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(TableRow {
                rho,
                kind: "pde".into(),
                m: Some(m),
                l: Some(l),
                values,
            });
        }
        let values = TABLE2_MATURITIES
            .iter()
            .map(|&t| margrabe_price(s1, s2, &params, t))
            .collect::<Result<Vec<_>>>()?;
        rows.push(TableRow {
            rho,
            kind: "margrabe".into(),
            m: None,
            l: None,
            values,
        });
    }
    Ok(Table {
        columns: TABLE2_MATURITIES.iter().map(|t| format!("T={t}")).collect(),
        rows,
    })
}

/// Full-feedback price and excess over the strike ladder at spots
/// `(100, 100)`, `T = 0.4`, for each ρ.
pub fn table3(cfg: &RunConfig, rhos: &[f64], m: usize, l: usize) -> Result<Table> {
    let (s1, s2) = TABLE3_SPOT;
    let grid = build_grid(cfg.grid.x_max, m, l, TABLE3_MATURITY)?;
    let mut rows = Vec::new();
    for &rho in rhos {
        let params = with_rate(&cfg.market, rho, TABLE_RATE);
        let mut price = Vec::new();
        let mut excess = Vec::new();
        for &k in &TABLE3_STRIKES {
            let res = solve_full(
                &grid,
                &params,
                &cfg.impact,
                &SpreadPayoff::new(k)?,
                &cfg.solver,
            )?;
            let p = res.prices_at(&grid, s1, s2)?;
            price.push(p.combined);
            excess.push(p.excess);
        }
        for (kind, values) in [("price", price), ("excess", excess)] {
            rows.push(TableRow {
                rho,
                kind: kind.into(),
                m: Some(m),
                l: Some(l),
                values,
            });
        }
    }
    Ok(Table {
        columns: TABLE3_STRIKES.iter().map(|k| format!("k={k}")).collect(),
        rows,
    })
}

// converge

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergeRow {
    pub m: usize,
    pub l: usize,
    pub s1: f64,
    pub s2: f64,
    pub value: f64,
    pub exact: f64,
    pub error: f64,
    /// `log₂(e_prev / e)` against the previous rung at the same spot.
    pub order: Option<f64>,
}

/// Errors of the liquid PDE price against Margrabe along a refinement ladder.
pub fn converge(cfg: &RunConfig, ladder: &[(usize, usize)]) -> Result<Vec<ConvergeRow>> {
    if cfg.payoff.strike != 0.0 {
        return Err(Error::Config(format!(
            "converge needs strike 0 (closed form exists only there), got {}; \
             use `validate` for the Monte Carlo check at nonzero strike",
            cfg.payoff.strike
        )));
    }
    let payoff = SpreadPayoff::new(0.0)?;
    let t = cfg.grid.maturity;
    let mut rows: Vec<ConvergeRow> = Vec::new();
    for &(m, l) in ladder {
        let grid = build_grid(cfg.grid.x_max, m, l, t)?;
        let v = solve_v0_t0(&grid, &cfg.market, &payoff, &cfg.solver)?;
        for &(s1, s2) in &cfg.spots {
            let value = interpolate_at(&v, &grid, s1, s2)?;
            let exact = margrabe_price(s1, s2, &cfg.market, t)?;
            let error = (value - exact).abs();
            let order = rows
                .iter()
                .rev()
                .find(|r| r.s1 == s1 && r.s2 == s2)
                .map(|prev| (prev.error / error).log2());
            rows.push(ConvergeRow {
                m,
                l,
                s1,
                s2,
                value,
                exact,
                error,
                order,
            });
        }
    }
    Ok(rows)
}

pub fn write_converge_csv<W: std::io::Write>(rows: &[ConvergeRow], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record([
        "m",
        "l",
        "s1",
        "s2",
        "pde",
        "margrabe",
        "abs_error",
        "order",
    ])?;
    for r in rows {
        wtr.write_record([
            r.m.to_string(),
            r.l.to_string(),
            r.s1.to_string(),
            r.s2.to_string(),
            r.value.to_string(),
            r.exact.to_string(),
            r.error.to_string(),
            r.order.map(|o| o.to_string()).unwrap_or_default(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

// validate

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Informational checks never fail a run.
    pub informational: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            passed,
            informational: false,
            detail,
        }
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed || c.informational)
}

/// Runs the invariant suite on the configured problem.
pub fn validate(cfg: &RunConfig) -> Result<Vec<Check>> {
    let grid = cfg.grid.build()?;
    let res = solve_full(&grid, &cfg.market, &cfg.impact, &cfg.payoff, &cfg.solver)?;
    let mut checks = Vec::new();

    // Band moved off the lattice: λ̂ ≡ 0 on every node.
    let off = ImpactParams {
        s_low: 2.0 * grid.x_max() + 1.0,
        s_high: 2.0 * grid.x_max() + 2.0,
        ..cfg.impact
    };
    let liquid = solve_full(&grid, &cfg.market, &off, &cfg.payoff, &cfg.solver)?;
    let same = liquid
        .combined_t0
        .values()
        .iter()
        .zip(liquid.v0_t0().values())
        .all(|(a, b)| a.to_bits() == b.to_bits());
    checks.push(Check::new(
        "lambda_zero_degenerates_to_v0",
        same,
        "combined price equals V0 bit-for-bit with the impact band off the grid".into(),
    ));

    let mut g_max = f64::NEG_INFINITY;
    for (l, v0) in res.v0_levels.iter().enumerate() {
        let g = compute_g(
            v0,
            &grid,
            &cfg.market,
            &cfg.impact,
            grid.t(l),
            grid.maturity(),
        )?;
        g_max = g_max.max(g.values.max());
    }
    checks.push(Check::new(
        "source_term_nonpositive",
        g_max <= 0.0,
        format!("max G over all levels = {g_max:e}"),
    ));

    let payoff = payoff_surface(&grid, &cfg.payoff);
    let floor = -1e-8 * payoff.max();
    let v1_min = res
        .v1_levels
        .iter()
        .map(Surface::min)
        .fold(f64::INFINITY, f64::min);
    checks.push(Check::new(
        "v1_nonnegative",
        v1_min >= floor,
        format!("min V1 over all levels = {v1_min:e}, floor = {floor:e}"),
    ));

    let terminal_ok = res.v0_levels[grid.l()] == Surface::new(payoff.values().clone(), grid.l())
        && res.v1_levels[grid.l()].values().iter().all(|&v| v == 0.0);
    checks.push(Check::new(
        "terminal_conditions",
        terminal_ok,
        "V0(T) = payoff and V1(T) = 0 exactly".into(),
    ));

    for &(s1, s2) in &cfg.spots {
        let pde = res.prices_at(&grid, s1, s2)?.v0;
        let (passed, detail) = if s1 > 0.0 && s2 > 0.0 {
            let est = mc_spread_price(s1, s2, &cfg.payoff, &cfg.market, grid.maturity(), &cfg.mc)?;
            let z = (pde - est.price) / est.std_error;
            (
                z.abs() <= 3.0,
                format!(
                    "spot ({s1}, {s2}): pde {pde} vs mc {} ± {} ({} paths, {RNG_ALGORITHM}, seed {}), z = {z:.2}",
                    est.price, est.std_error, cfg.mc.n_paths, cfg.mc.seed
                ),
            )
        } else {
            (true, format!("spot ({s1}, {s2}) on an axis, skipped"))
        };
        checks.push(Check::new("mc_agreement", passed, detail));
    }

    let st = stability_bound(&grid, &cfg.market);
    checks.push(Check {
        name: "stability_bound",
        passed: st.satisfied,
        informational: true,
        detail: format!(
            "dt = {}, dt_max = {} (A = {}, C_hat = {})",
            st.dt, st.dt_max, st.a_bound, st.c_hat
        ),
    });
    Ok(checks)
}

/// `dir/name`, creating `dir`.
pub fn output_file(dir: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    Ok(dir.join(name))
}

pub fn write_table_file(table: &Table, dir: &Path, name: &str) -> Result<PathBuf> {
    let path = output_file(dir, name)?;
    table.write_csv(create(&path)?)?;
    Ok(path)
}
