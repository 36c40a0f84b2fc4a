//! Command-line front end.
//!
//! Every subcommand reads its parameters from flags, from a JSON config
//! object (`--config`) whose keys mirror the flags, or both; flags win.
//! Output is JSON by default and CSV with `--format csv`. All floating-point
//! output is rounded to 9 significant digits and then printed in shortest
//! round-trip form, so identical inputs give byte-identical output.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Error;
use crate::exact::{check_compatibility, BoundaryField};
use crate::lattice::TclLattice;
use crate::model::CouplingParams;
use crate::phase::{orbit, scan_capped, Axis, Grid, MAX_GRID_CELLS};
use crate::recurrence::h_update;
use crate::roots::fixed_points;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "CHANDELIER_THREADS";

const DEFAULT_STEPS: usize = 1000;
const DEFAULT_SEED: u64 = 0;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] Error),
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(Error::Domain(_)) => EXIT_DOMAIN,
            CliError::Model(Error::Capacity(_) | Error::Unsupported(_)) => EXIT_CAPACITY,
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "chandelier", version, about = "Competing-interaction Ising model on the triangular chandelier lattice")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON object whose keys mirror the flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    #[arg(long = "J", allow_negative_numbers = true)]
    pub j: Option<f64>,
    #[arg(long = "Jp", allow_negative_numbers = true)]
    pub jp: Option<f64>,
    #[arg(long = "Jsl", allow_negative_numbers = true)]
    pub jsl: Option<f64>,
    #[arg(long = "T", allow_negative_numbers = true)]
    pub t: Option<f64>,
}

/// Grid axes as `value` or `start:end:n`.
#[derive(Debug, Clone, Default, Args)]
pub struct GridArgs {
    #[arg(long = "J", allow_hyphen_values = true)]
    pub j: Option<String>,
    #[arg(long = "Jp", allow_hyphen_values = true)]
    pub jp: Option<String>,
    #[arg(long = "Jsl", allow_hyphen_values = true)]
    pub jsl: Option<String>,
    #[arg(long = "T", allow_hyphen_values = true)]
    pub t: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Vertex and pair counts of a finite lattice.
    LatticeStats {
        #[arg(long, allow_negative_numbers = true)]
        depth: Option<i64>,
        /// Also write the labelled edge list to this file.
        #[arg(long)]
        edges: Option<PathBuf>,
    },
    /// Roots of the fixed-point quartic and their stability.
    FixedPoints {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Fixed-point analysis over a parameter grid.
    PhaseScan {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        max_cells: Option<usize>,
    },
    /// Orbit of the reduced map.
    #[command(visible_alias = "orbit")]
    Iterate {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, allow_negative_numbers = true)]
        x0: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Exhaustive check that one recursion step yields compatible finite-volume measures.
    VerifyConsistency {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, allow_negative_numbers = true)]
        depth: Option<i64>,
        /// Outer boundary field as 8 comma-separated values; random from `--seed` when absent.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        field: Option<Vec<f64>>,
    },
}

/// Keys accepted in a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(rename = "J")]
    j: Option<Value>,
    #[serde(rename = "Jp")]
    jp: Option<Value>,
    #[serde(rename = "Jsl")]
    jsl: Option<Value>,
    #[serde(rename = "T")]
    t: Option<Value>,
    depth: Option<i64>,
    edges: Option<PathBuf>,
    max_cells: Option<usize>,
    x0: Option<f64>,
    steps: Option<usize>,
    field: Option<Vec<f64>>,
    format: Option<OutputFormat>,
    output: Option<PathBuf>,
    seed: Option<u64>,
}

/// A fully resolved operation.
#[derive(Debug, Clone, PartialEq)]
pub enum Operation {
    LatticeStats { depth: i64, edges: Option<PathBuf> },
    FixedPoints { params: CouplingParams },
    PhaseScan { grid: Grid, max_cells: usize },
    Iterate { params: CouplingParams, x0: f64, steps: usize },
    VerifyConsistency { params: CouplingParams, depth: i64, field: Option<BoundaryField> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub operation: Operation,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
    pub seed: u64,
}

impl RunConfig {
    /// Merges parsed flags with the optional config file.
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let file = match &cli.config {
            Some(path) => read_config(path)?,
            None => ConfigFile::default(),
        };
        let operation = match cli.command {
            Command::LatticeStats { depth, edges } => Operation::LatticeStats {
                depth: depth.or(file.depth).ok_or_else(|| usage("lattice-stats needs --depth"))?,
                edges: edges.or(file.edges),
            },
            Command::FixedPoints { params } => Operation::FixedPoints { params: resolve_params(&params, &file)? },
            Command::PhaseScan { grid, max_cells } => Operation::PhaseScan {
                grid: resolve_grid(&grid, &file)?,
                max_cells: max_cells.or(file.max_cells).unwrap_or(MAX_GRID_CELLS),
            },
            Command::Iterate { params, x0, steps } => Operation::Iterate {
                params: resolve_params(&params, &file)?,
                x0: x0.or(file.x0).ok_or_else(|| usage("iterate needs --x0"))?,
                steps: steps.or(file.steps).unwrap_or(DEFAULT_STEPS),
            },
            Command::VerifyConsistency { params, depth, field } => {
                let field = match field.or_else(|| file.field.clone()) {
                    Some(values) => Some(BoundaryField(
                        values.try_into().map_err(|_| usage("--field takes exactly 8 values"))?,
                    )),
                    None => None,
                };
                Operation::VerifyConsistency {
                    params: resolve_params(&params, &file)?,
                    depth: depth.or(file.depth).unwrap_or(2),
                    field,
                }
            }
        };
        Ok(RunConfig {
            operation,
            format: cli.format.or(file.format).unwrap_or_default(),
            output: cli.output.or(file.output),
            seed: cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        })
    }
}

fn read_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))
}

fn config_number(key: &str, v: &Option<Value>) -> Result<Option<f64>, CliError> {
    match v {
        None => Ok(None),
        Some(Value::Number(n)) => Ok(n.as_f64()),
        Some(other) => Err(usage(format!("config key {key} must be a number, got {other}"))),
    }
}

fn resolve_params(args: &ParamArgs, file: &ConfigFile) -> Result<CouplingParams, CliError> {
    let get = |flag: Option<f64>, key: &str, v: &Option<Value>| -> Result<f64, CliError> {
        match flag {
            Some(x) => Ok(x),
            None => config_number(key, v)?.ok_or_else(|| usage(format!("missing --{key}"))),
        }
    };
    let params = CouplingParams {
        j: get(args.j, "J", &file.j)?,
        jp: get(args.jp, "Jp", &file.jp)?,
        jsl: get(args.jsl, "Jsl", &file.jsl)?,
        t: get(args.t, "T", &file.t)?,
    };
    params.validate()?;
    Ok(params)
}

fn resolve_grid(args: &GridArgs, file: &ConfigFile) -> Result<Grid, CliError> {
    let axis = |flag: &Option<String>, key: &str, v: &Option<Value>| -> Result<Axis, CliError> {
        let text = match (flag, v) {
            (Some(s), _) => s.clone(),
            (None, Some(Value::String(s))) => s.clone(),
            (None, Some(Value::Number(n))) => return Ok(Axis::point(n.as_f64().unwrap_or(f64::NAN))),
            (None, Some(other)) => return Err(usage(format!("config key {key} must be a number or \"a:b:n\", got {other}"))),
            (None, None) => return Err(usage(format!("missing --{key}"))),
        };
        text.parse().map_err(CliError::from)
    };
    Ok(Grid {
        j: axis(&args.j, "J", &file.j)?,
        jp: axis(&args.jp, "Jp", &file.jp)?,
        jsl: axis(&args.jsl, "Jsl", &file.jsl)?,
        t: axis(&args.t, "T", &file.t)?,
    })
}

/// Rounds to 9 significant digits.
pub fn round_sig9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

/// Number as printed in CSV output.
pub fn fmt_num(x: f64) -> String {
    format!("{:?}", round_sig9(x))
}

fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                if let Some(r) = n.as_f64().map(round_sig9).and_then(serde_json::Number::from_f64) {
                    *n = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    let mut v = serde_json::to_value(value).map_err(|e| usage(e.to_string()))?;
    round_json(&mut v);
    serde_json::to_writer_pretty(&mut *out, &v).map_err(io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

fn random_field(seed: u64) -> BoundaryField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    BoundaryField(std::array::from_fn(|_| rng.gen_range(-2.0..2.0)))
}

/// Executes one operation, writing its output to `out`.
pub fn execute(config: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let csv = config.format == OutputFormat::Csv;
    match &config.operation {
        Operation::LatticeStats { depth, edges } => {
            let lattice = TclLattice::build(*depth)?;
            if let Some(path) = edges {
                let mut w = BufWriter::new(File::create(path)?);
                lattice.write_edge_list(&mut w)?;
                w.flush()?;
            }
            let s = lattice.stats();
            if csv {
                writeln!(out, "depth,vertices,nn_edges,slnn_edges,pnnn_pairs")?;
                writeln!(out, "{},{},{},{},{}", s.depth, s.vertices, s.nn_edges, s.slnn_edges, s.pnnn_pairs)?;
            } else {
                write_json(out, &s)?;
            }
        }
        Operation::FixedPoints { params } => {
            let report = fixed_points(params)?;
            if csv {
                writeln!(out, "x,f_prime,class")?;
                for p in &report.positive {
                    writeln!(out, "{},{},{}", fmt_num(p.x), fmt_num(p.f_prime), p.class)?;
                }
            } else {
                write_json(out, &report)?;
            }
        }
        Operation::PhaseScan { grid, max_cells } => {
            let cells = scan_capped(grid, *max_cells)?;
            if csv {
                writeln!(out, "J,Jp,Jsl,T,n_positive,transition,classes,T_star,T_double_star,formula_agrees")?;
                for c in &cells {
                    let p = &c.params;
                    writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{},{}",
                        fmt_num(p.j),
                        fmt_num(p.jp),
                        fmt_num(p.jsl),
                        fmt_num(p.t),
                        c.n_positive_roots,
                        c.transition,
                        c.classes_label(),
                        fmt_num(c.critical.t_star),
                        fmt_num(c.critical.t_double_star),
                        c.formula_agrees
                    )?;
                }
            } else {
                write_json(out, &cells)?;
            }
        }
        Operation::Iterate { params, x0, steps } => {
            let orbit = orbit(params, *x0, *steps)?;
            log::info!("orbit ended: {}", orbit.end);
            if csv {
                writeln!(out, "step,x,f_x")?;
                for (k, pair) in orbit.points.windows(2).enumerate() {
                    writeln!(out, "{k},{},{}", fmt_num(pair[0]), fmt_num(pair[1]))?;
                }
            } else {
                write_json(out, &json!({ "params": params, "points": orbit.points, "end": orbit.end }))?;
            }
        }
        Operation::VerifyConsistency { params, depth, field } => {
            let lattice = TclLattice::build(*depth)?;
            if lattice.depth() > crate::exact::MAX_EXACT_DEPTH {
                return Err(Error::capacity(format!(
                    "exhaustive check supports depth {} only, got {depth}",
                    crate::exact::MAX_EXACT_DEPTH
                ))
                .into());
            }
            let outer = field.unwrap_or_else(|| random_field(config.seed));
            let inner = h_update(&outer, &params.weights()?);
            let report = check_compatibility(&lattice, params, &inner, &outer)?;
            if csv {
                writeln!(out, "sigma,residual")?;
                for (sigma, r) in report.per_sigma.iter().enumerate() {
                    writeln!(out, "{sigma},{}", fmt_num(*r))?;
                }
            } else {
                write_json(out, &report)?;
            }
        }
    }
    Ok(())
}

/// Runs a resolved config, sending output to `--output` or to `stdout`.
/// Returns the process exit code.
pub fn run(config: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = match &config.output {
        Some(path) => File::create(path).map_err(CliError::from).and_then(|f| {
            let mut w = BufWriter::new(f);
            execute(config, &mut w)?;
            w.flush().map_err(CliError::from)
        }),
        None => execute(config, stdout).and_then(|_| stdout.flush().map_err(CliError::from)),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "chandelier: {e}");
            e.exit_code()
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match RunConfig::from_cli(cli) {
        Ok(config) => run(&config, stdout, stderr),
        Err(e) => {
            let _ = writeln!(stderr, "chandelier: {e}");
            e.exit_code()
        }
    }
}

/// Sizes the global rayon pool from [`THREADS_ENV`] when set.
pub fn configure_threads() {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return };
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("could not size thread pool: {e}");
            }
        }
        _ => log::warn!("ignoring {THREADS_ENV}={raw}"),
    }
}
