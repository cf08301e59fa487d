//! Command-line front end: argument parsing, output routing and exit codes.
//!
//! Exit status is 0 when every record passes, 1 when a check fails, and 2 for
//! usage, configuration or output errors.

use crate::error::Error;
use crate::report::{in_profile_csv, run, Command, Report, RunConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "FRACEXT_OUT_DIR";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "fracext", version, about = "Numerical checks for fractional Poisson extensions on the unit ball")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Cmd {
    /// Kernel mass h(r) and its bounds
    MassCheck,
    /// Conformal covariance of kernels and factors
    Covariance,
    /// The radial function In: consistency, induction, hyperbolic residuals
    InFunc,
    /// Extension operator residuals
    ExtendCheck,
    /// Sharp constants from the constant optimizer
    SharpConst,
    /// Inequality slack on random and constant data
    Inequality,
    /// Equality on the extremal family
    Extremal,
    /// Euler-Lagrange residuals and the constant C*(n)
    ElResidual,
    /// Kazdan-Warner integrals
    KwCheck,
    /// The planar Carleman inequality
    Carleman,
    /// Moving spheres on the half-space
    MovingSphere,
    /// Every suite at reduced grid levels
    ReportAll,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::MassCheck => Command::MassCheck,
            Cmd::Covariance => Command::Covariance,
            Cmd::InFunc => Command::InFunc,
            Cmd::ExtendCheck => Command::ExtendCheck,
            Cmd::SharpConst => Command::SharpConst,
            Cmd::Inequality => Command::Inequality,
            Cmd::Extremal => Command::Extremal,
            Cmd::ElResidual => Command::ElResidual,
            Cmd::KwCheck => Command::KwCheck,
            Cmd::Carleman => Command::Carleman,
            Cmd::MovingSphere => Command::MovingSphere,
            Cmd::ReportAll => Command::ReportAll,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Args)]
struct Opts {
    /// Dimension (2 to 6)
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Order parameter alpha in [2 - n, 1)
    #[arg(long, global = true, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Use the limit case alpha = 2 - n
    #[arg(long, global = true)]
    limit: bool,
    /// Grid level
    #[arg(long, global = true)]
    level: Option<usize>,
    /// Largest radius of ball grids
    #[arg(long, global = true)]
    rmax: Option<f64>,
    /// Tolerance override
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for every random choice
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of random cases or probes
    #[arg(long, global = true)]
    count: Option<usize>,
    /// Report format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Report path; defaults to <FRACEXT_OUT_DIR>/<command>.<format>, else stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Point of the unit ball, comma separated
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    zeta: Option<Vec<f64>>,
    /// Boundary point of the half-space, comma separated
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    v0: Option<Vec<f64>>,
    /// Upper end of the moving-sphere radius search
    #[arg(long = "lambda-max", global = true)]
    lambda_max: Option<f64>,
    /// Write the In profile CSV (in-func only)
    #[arg(long = "emit-profile", global = true)]
    emit_profile: Option<PathBuf>,
}

impl Opts {
    fn run_config(&self) -> RunConfig {
        RunConfig {
            n: self.n,
            alpha: self.alpha,
            limit: self.limit,
            level: self.level,
            r_max: self.rmax,
            tol: self.tol,
            seed: self.seed,
            count: self.count,
            zeta: self.zeta.clone(),
            v0: self.v0.clone(),
            lambda_max: self.lambda_max,
        }
    }
}

fn resolve(path: &Path, out_dir: Option<&Path>) -> PathBuf {
    match out_dir {
        Some(d) if path.is_relative() => d.join(path),
        _ => path.to_path_buf(),
    }
}

fn write_file(path: &Path, body: &str) -> std::io::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, body)
}

fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv(),
    }
}

/// Parse `args` (including the program name), run, and write to `out`/`err`.
/// `out_dir` plays the role of [`OUT_DIR_ENV`].
pub fn run_with<I, T>(args: I, out_dir: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let command = Command::from(cli.command);
    let opts = &cli.opts;
    if opts.emit_profile.is_some() && command != Command::InFunc {
        let _ = writeln!(err, "error: --emit-profile applies to in-func only");
        return EXIT_USAGE;
    }
    let cfg = opts.run_config();
    let report = match run(command, &cfg) {
        Ok(r) => r,
        Err(e @ (Error::Config(_) | Error::InvalidParams(_) | Error::Domain(_))) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_FAIL;
        }
    };
    if let Some(p) = &opts.emit_profile {
        let path = resolve(p, out_dir);
        let body = match in_profile_csv(cfg.n.unwrap_or(4)) {
            Ok(b) => b,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return EXIT_FAIL;
            }
        };
        if let Err(e) = write_file(&path, &body) {
            let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
            return EXIT_USAGE;
        }
    }
    let body = render(&report, opts.format);
    let target = match (&opts.out, out_dir) {
        (Some(p), _) => Some(resolve(p, out_dir)),
        (None, Some(d)) => Some(d.join(format!("{}.{}", command, opts.format.extension()))),
        (None, None) => None,
    };
    match target {
        Some(path) => {
            if let Err(e) = write_file(&path, &body) {
                let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
                return EXIT_USAGE;
            }
            let failed = report.records.iter().filter(|r| !r.pass).count();
            let _ = writeln!(
                err,
                "{command}: {} records, {failed} failed, written to {}",
                report.records.len(),
                path.display()
            );
        }
        None => {
            let _ = out.write_all(body.as_bytes());
        }
    }
    if report.pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

/// Entry point used by the binary.
pub fn main_exit_code() -> i32 {
    let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), dir.as_deref(), &mut stdout.lock(), &mut stderr.lock())
}
