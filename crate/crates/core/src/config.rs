//! Run configuration: INI-style sections with flat `key = value` pairs.
//!
//! ```text
//! [market]   sigma1 sigma2 rho r
//! [impact]   epsilon beta s_low s_high
//! [grid]     x_max m l maturity
//! [payoff]   strike
//! [solver]   theta v1_cross
//! [mc]       paths seed antithetic
//! [run]      spots = 112 104; 100 100
//!            out = results
//! ```
//!
//! Every section and key is optional; unknown sections or keys are errors.

use std::path::{Path, PathBuf};

use ini::Ini;

use crate::adi::{SolverConfig, V1CrossTerm};
use crate::closed_form::MarketParams;
use crate::error::{Error, Result};
use crate::grid::{build_grid, parse_real, Grid, SpreadPayoff};
use crate::impact::ImpactParams;
use crate::mc::McConfig;
use crate::operators::OperatorConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_max: f64,
    pub m: usize,
    pub l: usize,
    pub maturity: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            x_max: 200.0,
            m: 100,
            l: 100,
            maturity: 0.4,
        }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        build_grid(self.x_max, self.m, self.l, self.maturity)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub market: MarketParams,
    pub impact: ImpactParams,
    pub payoff: SpreadPayoff,
    pub grid: GridSpec,
    pub solver: SolverConfig,
    pub mc: McConfig,
    pub spots: Vec<(f64, f64)>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            market: MarketParams {
                sigma1: 0.15,
                sigma2: 0.10,
                rho: 0.7,
                r: 0.04,
            },
            impact: ImpactParams::default(),
            payoff: SpreadPayoff { strike: 5.0 },
            grid: GridSpec::default(),
            solver: SolverConfig::default(),
            mc: McConfig::default(),
            spots: vec![(112.0, 104.0)],
            out: None,
        }
    }
}

/// Command-line overrides, applied after the file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub m: Option<usize>,
    pub l: Option<usize>,
    pub rho: Option<f64>,
    pub strike: Option<f64>,
    pub epsilon: Option<f64>,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut cfg = RunConfig::default();
        for (section, props) in ini.iter() {
            for (key, value) in props.iter() {
                cfg.set(section.unwrap_or(""), key, value.trim())?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let real = || parse_real(value).map_err(|_| bad_value(section, key, value));
        let count = || {
            value
                .parse::<usize>()
                .map_err(|_| bad_value(section, key, value))
        };
        match (section, key) {
            ("market", "sigma1") => self.market.sigma1 = real()?,
            ("market", "sigma2") => self.market.sigma2 = real()?,
            ("market", "rho") => self.market.rho = real()?,
            ("market", "r") => self.market.r = real()?,
            ("impact", "epsilon") => self.impact.epsilon = real()?,
            ("impact", "beta") => self.impact.beta = real()?,
            ("impact", "s_low") => self.impact.s_low = real()?,
            ("impact", "s_high") => self.impact.s_high = real()?,
            ("grid", "x_max") => self.grid.x_max = real()?,
            ("grid", "m") => self.grid.m = count()?,
            ("grid", "l") => self.grid.l = count()?,
            ("grid", "maturity") => self.grid.maturity = real()?,
            ("payoff", "strike") => self.payoff.strike = real()?,
            ("solver", "theta") => self.solver.operators = OperatorConfig { theta: real()? },
            ("solver", "v1_cross") => {
                self.solver.v1_cross = match value {
                    "consistent" => V1CrossTerm::Consistent,
                    "as_printed" => V1CrossTerm::AsPrinted,
                    _ => return Err(bad_value(section, key, value)),
                }
            }
            ("mc", "paths") => self.mc.n_paths = count()?,
            ("mc", "seed") => {
                self.mc.seed = value.parse().map_err(|_| bad_value(section, key, value))?
            }
            ("mc", "antithetic") => {
                self.mc.antithetic = value.parse().map_err(|_| bad_value(section, key, value))?
            }
            ("run", "spots") => self.spots = parse_spots(value)?,
            ("run", "out") => self.out = Some(PathBuf::from(value)),
            ("", _) => return Err(Error::Config(format!("key `{key}` outside any section"))),
            _ => return Err(Error::Config(format!("unknown key `{key}` in [{section}]"))),
        }
        Ok(())
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(m) = o.m {
            self.grid.m = m;
        }
        if let Some(l) = o.l {
            self.grid.l = l;
        }
        if let Some(rho) = o.rho {
            self.market.rho = rho;
        }
        if let Some(k) = o.strike {
            self.payoff.strike = k;
        }
        if let Some(e) = o.epsilon {
            self.impact.epsilon = e;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        self.market.validate().map_err(to_config)?;
        self.impact.validate().map_err(to_config)?;
        SpreadPayoff::new(self.payoff.strike).map_err(to_config)?;
        self.solver.operators.validate().map_err(to_config)?;
        let grid = self.grid.build().map_err(to_config)?;
        if self.mc.n_paths < 2 {
            return Err(Error::Config("[mc] paths must be >= 2".into()));
        }
        if self.spots.is_empty() {
            return Err(Error::Config(
                "[run] spots must list at least one point".into(),
            ));
        }
        for &(s1, s2) in &self.spots {
            let inside = |s: f64, hi: f64| (0.0..=hi).contains(&s);
            if !(inside(s1, grid.x_max()) && inside(s2, grid.y_max())) {
                return Err(Error::Config(format!(
                    "spot ({s1}, {s2}) lies outside [0, {}]²",
                    grid.x_max()
                )));
            }
        }
        Ok(())
    }
}

fn to_config(e: Error) -> Error {
    match e {
        Error::Domain(msg) => Error::Config(msg),
        other => other,
    }
}

fn bad_value(section: &str, key: &str, value: &str) -> Error {
    Error::Config(format!("[{section}] {key}: cannot parse `{value}`"))
}

/// `"112 104; 100 100"` → `[(112, 104), (100, 100)]`.
fn parse_spots(value: &str) -> Result<Vec<(f64, f64)>> {
    value
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let parts: Vec<&str> = pair.split_whitespace().collect();
            match parts.as_slice() {
                [a, b] => Ok((parse_real(a)?, parse_real(b)?)),
                _ => Err(Error::Config(format!("spot `{pair}` must be two numbers"))),
            }
        })
        .collect::<Result<_>>()
        .map_err(to_config)
}
