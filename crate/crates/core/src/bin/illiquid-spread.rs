use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use illiquid_spread::app::{self, DEFAULT_LADDER, TABLE2_RHOS};
use illiquid_spread::config::{Overrides, RunConfig};
use illiquid_spread::Error;

const EXIT_INPUT: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_CHECKS_FAILED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "illiquid-spread",
    version,
    about = "Spread option pricing with price impact"
)]
struct Cli {
    /// INI-style configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: `[run] out`, else `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Spatial steps per axis.
    #[arg(long, global = true)]
    m: Option<usize>,
    /// Time steps.
    #[arg(long, global = true)]
    l: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    rho: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    strike: Option<f64>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve V0 and V1, write the manifest and t0 surfaces.
    Price {
        /// Also write every time level.
        #[arg(long)]
        all_levels: bool,
    },
    /// Liquid-model convergence table against the Margrabe price.
    Table2,
    /// Full-feedback prices and excess prices over the strike ladder.
    Table3,
    /// Error and observed order along a refinement ladder (strike 0 only).
    Converge {
        /// Rungs as `m:l`, finest last.
        #[arg(long, value_delimiter = ',', default_value = "50:100,100:100,200:200")]
        ladder: Vec<String>,
    },
    /// Run the invariant checks and the Monte Carlo cross-check.
    Validate,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_INPUT
            })
        }
    }
}

fn parse_rung(s: &str) -> Result<(usize, usize), Error> {
    let bad = || Error::Config(format!("ladder rung `{s}` must be m:l"));
    let (m, l) = s.split_once(':').ok_or_else(bad)?;
    Ok((
        m.trim().parse().map_err(|_| bad())?,
        l.trim().parse().map_err(|_| bad())?,
    ))
}

fn run(cli: Cli) -> Result<u8, Error> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    let overrides = Overrides {
        m: cli.m,
        l: cli.l,
        rho: cli.rho,
        strike: cli.strike,
        epsilon: cli.epsilon,
    };
    cfg.apply(&overrides)?;
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let grid_override = match (cli.m, cli.l) {
        (None, None) => None,
        _ => Some([(cfg.grid.m, cfg.grid.l)]),
    };
    let rhos: Vec<f64> = cli.rho.map_or_else(|| TABLE2_RHOS.to_vec(), |r| vec![r]);

    match cli.command {
        Command::Price { all_levels } => {
            let run = app::run_price(&cfg)?;
            app::write_price_outputs(&run, &out, all_levels)?;
            for p in &run.prices {
                println!(
                    "S=({}, {})  V0={:.6}  excess={:.6}  price={:.6}",
                    p.s1, p.s2, p.v0, p.excess, p.combined
                );
            }
            if !run.stability.satisfied {
                eprintln!(
                    "warning: dt = {} exceeds stability bound dt_max = {}",
                    run.stability.dt, run.stability.dt_max
                );
            }
            println!("wrote {}", out.display());
        }
        Command::Table2 => {
            let table = app::table2(&cfg, &rhos, grid_override.as_ref().map(|g| &g[..]))?;
            let path = app::write_table_file(&table, &out, "table2.csv")?;
            print!("{}", fs::read_to_string(&path)?);
        }
        Command::Table3 => {
            let (m, l) = match (cli.m, cli.l) {
                (None, None) => (100, 100),
                _ => (cfg.grid.m, cfg.grid.l),
            };
            let table = app::table3(&cfg, &rhos, m, l)?;
            let path = app::write_table_file(&table, &out, "table3.csv")?;
            print!("{}", fs::read_to_string(&path)?);
        }
        Command::Converge { ladder } => {
            let ladder = if ladder.is_empty() {
                DEFAULT_LADDER.to_vec()
            } else {
                ladder
                    .iter()
                    .map(|s| parse_rung(s))
                    .collect::<Result<_, _>>()?
            };
            let rows = app::converge(&cfg, &ladder)?;
            let path = app::output_file(&out, "converge.csv")?;
            app::write_converge_csv(&rows, fs::File::create(&path)?)?;
            print!("{}", fs::read_to_string(&path)?);
        }
        Command::Validate => {
            let checks = app::validate(&cfg)?;
            for c in &checks {
                let tag = match (c.passed, c.informational) {
                    (true, _) => "PASS",
                    (false, true) => "INFO",
                    (false, false) => "FAIL",
                };
                println!("{tag} {}: {}", c.name, c.detail);
            }
            if !app::all_passed(&checks) {
                return Ok(EXIT_CHECKS_FAILED);
            }
        }
    }
    Ok(0)
}
