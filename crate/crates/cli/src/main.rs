//! `twobody`: factor scans, wave-function grids, figure data and the
//! validation suite.

mod commands;
mod config;
mod figures;
mod grid;
mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use grid::{Grid, KGrid};
use output::Format;
use std::path::PathBuf;
use std::process::ExitCode;
use twobody_core::{Method, PhysicalParams, ReducedParams};

/// Exit codes.
pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

/// Environment variable selecting the number of worker threads.
pub const WORKERS_ENV: &str = "TWOBODY_WORKERS";

#[derive(Parser, Debug)]
#[command(
    name = "twobody",
    version,
    about = "Two-particle scattering off a surface: Wiener-Hopf factor, wave function, asymptotics",
    after_help = "Grids are written start:stop:count and include both ends, e.g. --R -20:-0.5:40.\n\
                  Options are resolved as: command-line flag, then --config file, then defaults (a=1, k0=2, hbar=1).\n\
                  Set TWOBODY_WORKERS to fix the number of worker threads.\n\
                  Exit codes: 0 success, 1 validation failure, 2 usage error, 3 numerical non-convergence."
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default, Clone)]
pub struct Common {
    /// Config file (JSON object or key = value lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Inverse decay length of the bound pair.
    #[arg(long, global = true)]
    a: Option<f64>,
    /// Centre-of-mass wavenumber.
    #[arg(long, global = true)]
    k0: Option<f64>,
    /// Total mass (physical input; needs --mu, --lam, --e).
    #[arg(long, global = true)]
    m: Option<f64>,
    /// Reduced mass.
    #[arg(long, global = true)]
    mu: Option<f64>,
    /// Binding strength.
    #[arg(long, global = true)]
    lam: Option<f64>,
    /// Incident energy.
    #[arg(long, global = true)]
    e: Option<f64>,
    #[arg(long, global = true)]
    hbar: Option<f64>,
    /// Absolute tolerance (default depends on the command).
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Output file (directory for `figures`); stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate S+(k) along a line in the k plane.
    Factor(FactorArgs),
    /// Evaluate psi(R, y) on a grid.
    Wavefunction(WaveArgs),
    /// Write the data behind figures 1-4.
    Figures(FigureArgs),
    /// Run the invariant suite.
    Validate(ValidateArgs),
    /// Far-field and steepest-descent forms on a grid.
    Asymptotics(AsymArgs),
}

#[derive(Args, Debug)]
pub struct FactorArgs {
    /// im:start:stop:count (k = i t) or re:start:stop:count.
    #[arg(long, allow_hyphen_values = true)]
    pub k_grid: Option<KGrid>,
    #[arg(long, value_enum, default_value_t = FactorChoice::Closed)]
    pub method: FactorChoice,
    /// Compare every point with the exp(-J) oracle.
    #[arg(long)]
    pub check_oracle: bool,
    /// Print S+(K).
    #[arg(long = "at-K")]
    pub at_k: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FactorChoice {
    Closed,
    JIntegral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodChoice {
    /// Real cut segment only (R < 0); full contour for R > 0.
    Regional,
    /// Full contour.
    Full,
    /// Shifted-line integral, extrapolated in eps.
    Unified,
    /// Upper side of the cut segment (R < 0).
    Approx31,
    /// Closed far-field form (R < 0).
    FarField,
    /// Closed steepest-descent form for the outgoing part (R > 0).
    Steepest,
}

impl MethodChoice {
    pub fn method(self) -> Method {
        match self {
            MethodChoice::Regional => Method::Regional,
            MethodChoice::Full => Method::RegionalWithVerticalLeg,
            MethodChoice::Unified => Method::UnifiedA7,
            MethodChoice::Approx31 => Method::Approx31,
            MethodChoice::FarField => Method::FarField32,
            MethodChoice::Steepest => Method::Steepest35,
        }
    }
}

#[derive(Args, Debug)]
pub struct WaveArgs {
    #[arg(long = "R", allow_hyphen_values = true)]
    pub r: Grid,
    #[arg(long, allow_hyphen_values = true)]
    pub y: Grid,
    #[arg(long, value_enum)]
    pub method: Option<MethodChoice>,
    /// Smallest eps of the shifted-line route.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Debug: use the wrong side limit of the root on the cut.
    #[arg(long, hide = true)]
    pub wrong_branch: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    All,
}

#[derive(Args, Debug)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub which: Figure,
    /// Method for the R < 0 figures.
    #[arg(long, value_enum)]
    pub method: Option<MethodChoice>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Run one module: specfun, model, quadrature, wiener_hopf, wavefunction.
    #[arg(long)]
    pub only: Option<String>,
    /// Debug: evaluate the regional routes on the wrong sheet.
    #[arg(long, hide = true)]
    pub inject_wrong_branch: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AsymKind {
    FarField,
    Steepest,
}

#[derive(Args, Debug)]
pub struct AsymArgs {
    #[arg(long, value_enum)]
    pub kind: AsymKind,
    #[arg(long = "R", allow_hyphen_values = true)]
    pub r: Grid,
    #[arg(long, allow_hyphen_values = true)]
    pub y: Grid,
    /// Add the full-contour value and the relative deviation.
    #[arg(long)]
    pub compare: bool,
}

/// Options after merging flags, config file and defaults.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: ReducedParams,
    pub physical: Option<PhysicalParams>,
    pub tol: Option<f64>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub config: config::ConfigMap,
}

impl Resolved {
    pub fn config_str(&self, key: &str) -> Option<&str> {
        self.config.get(key).map(|s| s.as_str())
    }
}

/// Command failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(m: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: m.into(),
        }
    }

    pub fn numerical(m: impl Into<String>) -> Self {
        Self {
            code: EXIT_NUMERICAL,
            message: m.into(),
        }
    }
}

impl From<twobody_core::Error> for Failure {
    fn from(e: twobody_core::Error) -> Self {
        use twobody_core::Error::*;
        match e {
            Domain(_) | BranchPoint(_) | OnBranchCut { .. } | RegionBoundary | Confluence(_) => {
                Failure::usage(e.to_string())
            }
            _ => Failure::numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_NUMERICAL,
            message: format!("i/o error: {e}"),
        }
    }
}

fn pick<T: std::str::FromStr>(
    flag: Option<T>,
    cfg: &config::ConfigMap,
    key: &str,
) -> Result<Option<T>, Failure> {
    if flag.is_some() {
        return Ok(flag);
    }
    match cfg.get(key) {
        Some(s) => s
            .parse()
            .map(Some)
            .map_err(|_| Failure::usage(format!("config key '{key}': cannot parse '{s}'"))),
        None => Ok(None),
    }
}

pub fn resolve(c: &Common) -> Result<Resolved, Failure> {
    let cfg = match &c.config {
        Some(p) => config::load(p).map_err(Failure::usage)?,
        None => config::ConfigMap::new(),
    };
    let a = pick(c.a, &cfg, "a")?;
    let k0 = pick(c.k0, &cfg, "k0")?;
    let phys = [
        pick(c.m, &cfg, "m")?,
        pick(c.mu, &cfg, "mu")?,
        pick(c.lam, &cfg, "lam")?,
        pick(c.e, &cfg, "e")?,
    ];
    let hbar = pick(c.hbar, &cfg, "hbar")?.unwrap_or(1.0);
    let (params, physical) = if phys.iter().any(Option::is_some) {
        if a.is_some() || k0.is_some() {
            return Err(Failure::usage(
                "give either --a/--k0 or the physical set --m/--mu/--lam/--e, not both",
            ));
        }
        let [Some(m), Some(mu), Some(lam), Some(e)] = phys else {
            return Err(Failure::usage(
                "physical input needs all of --m, --mu, --lam, --e",
            ));
        };
        let p = PhysicalParams {
            m,
            mu,
            lam,
            e,
            hbar,
        };
        (twobody_core::model::reduce(&p)?, Some(p))
    } else {
        (
            ReducedParams::new(a.unwrap_or(1.0), k0.unwrap_or(2.0))?,
            None,
        )
    };
    let tol = pick(c.tol, &cfg, "tol")?;
    if let Some(t) = tol {
        if t.is_nan() || t <= 0.0 {
            return Err(Failure::usage("--tol must be positive"));
        }
    }
    let format = match c.format {
        Some(f) => f,
        None => match cfg.get("format").map(|s| s.to_ascii_lowercase()) {
            Some(s) if s == "csv" => Format::Csv,
            Some(s) if s == "json" => Format::Json,
            Some(s) => {
                return Err(Failure::usage(format!(
                    "config key 'format': unknown '{s}'"
                )))
            }
            None => Format::Csv,
        },
    };
    let out = c.out.clone().or_else(|| cfg.get("out").map(PathBuf::from));
    Ok(Resolved {
        params,
        physical,
        tol,
        format,
        out,
        config: cfg,
    })
}

fn init_workers() -> Result<(), Failure> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v
            .parse()
            .map_err(|_| Failure::usage(format!("{WORKERS_ENV} must be a positive integer")))?;
        if n == 0 {
            return Err(Failure::usage(format!(
                "{WORKERS_ENV} must be a positive integer"
            )));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::numerical(format!("worker pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    init_workers()?;
    let res = resolve(&cli.common)?;
    match cli.command {
        Command::Factor(a) => commands::factor(&res, &a),
        Command::Wavefunction(a) => commands::wavefunction(&res, &a),
        Command::Figures(a) => figures::run(&res, &a),
        Command::Validate(a) => commands::validate(&res, &a),
        Command::Asymptotics(a) => commands::asymptotics(&res, &a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("twobody: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
