//! `eigenbound`: upper bounds for the first Dirichlet eigenvalue of a
//! geodesic ball from the areas of its geodesic spheres.
//!
//! ```text
//! eigenbound bound --builtin hyperbolic(1) --radius 2
//! eigenbound oracle --config bumped.json --mesh 128x128
//! eigenbound compare --builtin euclidean --kappa -1
//! eigenbound paper-example --format csv
//! ```

mod commands;
mod config;
mod error;
mod report;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::BuiltinId;
use crate::error::{exit, CliError};

#[derive(Debug, Parser)]
#[command(name = "eigenbound", version, about)]
#[command(after_help = "Exit codes: 0 ok, 1 not converged, 2 usage or config error, \
3 numerical failure, 4 output error, 5 comparison bound violated")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Moment-hierarchy bound with the per-level estimator series.
    Bound,
    /// Independent eigenvalue: radial shooting for models, finite volumes for 2-D metrics.
    Oracle,
    /// Tables of the sphere area A(t) and the symmetrized warping ω(t).
    Symmetrize,
    /// Comparison against a space form (--kappa) or a warping (--warping-ref).
    Compare {
        /// Reference warping W(t) as an expression in t, R and kappa.
        #[arg(long, value_name = "EXPR", conflicts_with = "kappa")]
        warping_ref: Option<String>,
    },
    /// Reproduce the bumped-disc example: flat areas, bound, strict gap.
    PaperExample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct MeshSpec {
    radial: usize,
    angular: usize,
}

impl FromStr for MeshSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (m, p) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("mesh must look like 64x64, got `{s}`"))?;
        let parse = |v: &str| v.trim().parse::<usize>().map_err(|_| format!("bad mesh size `{v}`"));
        Ok(MeshSpec {
            radial: parse(m)?,
            angular: parse(p)?,
        })
    }
}

#[derive(Debug, Args)]
struct Opts {
    /// JSON model config.
    #[arg(long, global = true, value_name = "PATH", conflicts_with = "builtin")]
    config: Option<PathBuf>,
    /// euclidean | spherical(k) | hyperbolic(k) | paper-example
    #[arg(long, global = true, value_name = "ID")]
    builtin: Option<BuiltinId>,
    #[arg(long, global = true)]
    radius: Option<f64>,
    #[arg(long, global = true)]
    dimension: Option<usize>,
    /// Reference curvature for `compare`; elsewhere the value of `kappa` in
    /// expressions and the curvature of spherical/hyperbolic builtins.
    #[arg(long, global = true, allow_hyphen_values = true)]
    kappa: Option<f64>,
    /// Radial grid intervals.
    #[arg(long, global = true, default_value_t = 4096)]
    grid: usize,
    /// Angular samples for symmetrizing 2-D metrics.
    #[arg(long, global = true, default_value_t = 256)]
    theta: usize,
    /// Maximum moment level.
    #[arg(long, global = true, default_value_t = 200)]
    kmax: usize,
    /// Relative convergence tolerance of the estimators.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// 2-D oracle mesh, radial intervals x angles; refined once for the error estimate.
    #[arg(long, global = true, default_value = "64x64", value_name = "MxP")]
    mesh: MeshSpec,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let report = commands::dispatch(&cli)?;
    let code = if report.converged() {
        exit::OK
    } else {
        exit::UNCONVERGED
    };
    let mut buf = Vec::new();
    match cli.opts.format {
        Format::Json => report.write_json(&mut buf)?,
        Format::Csv => report.write_csv(&mut buf)?,
    }
    match &cli.opts.output {
        Some(path) => std::fs::write(path, &buf).map_err(|e| report::io(&path.display().to_string(), e))?,
        None => match io::stdout().lock().write_all(&buf) {
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => {}
            other => other.map_err(|e| report::io("stdout", e))?,
        },
    }
    Ok(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { exit::OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
