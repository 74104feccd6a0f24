//! `njc-lab`: audits metrics, estimates their von Neumann–Jordan constants,
//! builds product metrics and reproduces the table of known constants.
//!
//! Exit codes: 0 success, 1 profile mismatch or failed estimate/row, 2 bad
//! configuration. Machine output goes to `--out` or stdout; diagnostics go to
//! stderr.

pub mod commands;
pub mod descriptor;
pub mod output;
pub mod reproduce;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use njc_core::estimator::Budget;
use njc_core::Order;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Invalid flags, config file or metric descriptor (exit 2).
    Config(String),
    /// A computation failed (exit 1).
    Failure(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn failure(msg: impl Into<String>) -> Self {
        CliError::Failure(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Failure(m) => write!(f, "error: {m}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "njc-lab", version, about = "Generalized von Neumann-Jordan constants of metrics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Audit the metric axioms and the structural profile of a metric.
    Audit(RunArgs),
    /// Estimate the constant at each order in --sigma.
    Estimate(RunArgs),
    /// Build a product metric from --component specs and --psi.
    Product(RunArgs),
    /// Reproduce the table of closed-form constants.
    Reproduce(RunArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Metric descriptor, e.g. `truncated(1):2`, `norm(inf):3`, `hamel-additive`.
    #[arg(long)]
    pub metric: Option<String>,
    /// Comma-separated orders, each at least 1.
    #[arg(long, value_delimiter = ',')]
    pub sigma: Option<Vec<String>>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Search budget RESTARTSxSAMPLESxSTEPS, e.g. 32x4096x200.
    #[arg(long)]
    pub budget: Option<String>,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON basis declaration for rational metrics.
    #[arg(long)]
    pub basis_file: Option<PathBuf>,
    /// JSON config file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Audit sample count.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Product component descriptor (repeat once per component).
    #[arg(long = "component")]
    pub components: Vec<String>,
    /// Simplex function: `p:<value>` or `custom:<name>`.
    #[arg(long)]
    pub psi: Option<String>,
    /// Search the unit-sphere formulation instead of the full ratio.
    #[arg(long)]
    pub unit_sphere: bool,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    metric: Option<String>,
    sigma: Option<Vec<f64>>,
    seed: Option<u64>,
    budget: Option<String>,
    out: Option<PathBuf>,
    format: Option<Format>,
    basis_file: Option<PathBuf>,
    samples: Option<usize>,
    product: Option<ProductConfig>,
    unit_sphere: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductConfig {
    pub components: Vec<String>,
    pub psi: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Audit,
    Estimate,
    Product,
    Reproduce,
}

/// Validated configuration for one command.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub metric: Option<String>,
    pub sigma: Vec<Order>,
    pub seed: u64,
    pub budget: Option<Budget>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub basis_file: Option<PathBuf>,
    pub samples: usize,
    pub product: Option<ProductConfig>,
    pub unit_sphere: bool,
}

pub const DEFAULT_SAMPLES: usize = 2000;

fn parse_sigma(values: &[f64]) -> Result<Vec<Order>, CliError> {
    values
        .iter()
        .map(|&s| {
            Order::new(s)
                .map_err(|_| CliError::config(format!("--sigma: each order must be a finite number >= 1, got {s}")))
        })
        .collect()
}

fn read_config(path: &Path) -> Result<FileConfig, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::config(format!("--config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::config(format!("--config {}: {e}", path.display())))
}

impl RunConfig {
    pub fn resolve(command: CommandKind, args: RunArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(p) => read_config(p)?,
            None => FileConfig::default(),
        };
        let sigma_raw = match args.sigma {
            Some(list) => list
                .iter()
                .map(|s| {
                    s.trim().parse::<f64>().map_err(|_| CliError::config(format!("--sigma: {s:?} is not a number")))
                })
                .collect::<Result<Vec<_>, _>>()?,
            None => file.sigma.unwrap_or_default(),
        };
        let budget = match args.budget.or(file.budget) {
            Some(b) => Some(b.parse::<Budget>().map_err(|e| CliError::config(format!("--budget: {e}")))?),
            None => None,
        };
        if budget.is_some_and(|b| b.restarts == 0 || b.samples_per_restart == 0) {
            return Err(CliError::config("--budget: restarts and samples must be at least 1"));
        }
        let product = match (args.components.is_empty(), args.psi) {
            (true, None) => file.product,
            (false, Some(psi)) => Some(ProductConfig { components: args.components, psi }),
            _ => return Err(CliError::config("--component and --psi must be given together")),
        };
        let samples = args.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES);
        if samples == 0 {
            return Err(CliError::config("--samples must be at least 1"));
        }
        let default_format = if command == CommandKind::Reproduce { Format::Csv } else { Format::Json };
        let cfg = RunConfig {
            command,
            metric: args.metric.or(file.metric),
            sigma: parse_sigma(&sigma_raw)?,
            seed: args.seed.or(file.seed).unwrap_or(0),
            budget,
            out: args.out.or(file.out),
            format: args.format.or(file.format).unwrap_or(default_format),
            basis_file: args.basis_file.or(file.basis_file),
            samples,
            product,
            unit_sphere: args.unit_sphere || file.unit_sphere.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        use CommandKind::*;
        match self.command {
            Audit | Estimate => {
                if self.metric.is_none() {
                    return Err(CliError::config("--metric is required"));
                }
                if self.product.is_some() {
                    return Err(CliError::config("--component/--psi belong to the product command"));
                }
            }
            Product => {
                if self.metric.is_some() {
                    return Err(CliError::config("product takes --component and --psi, not --metric"));
                }
                if self.product.is_none() {
                    return Err(CliError::config("product needs --component (at least twice) and --psi"));
                }
            }
            Reproduce => {
                if self.metric.is_some() || self.product.is_some() || self.basis_file.is_some() {
                    return Err(CliError::config("reproduce runs a fixed table and takes no metric"));
                }
                if !self.sigma.is_empty() {
                    return Err(CliError::config("--sigma: reproduce uses the orders of its fixed table"));
                }
            }
        }
        if self.command == Estimate && self.sigma.is_empty() {
            return Err(CliError::config("--sigma: give at least one order"));
        }
        if self.unit_sphere && !matches!(self.command, Estimate | Product) {
            return Err(CliError::config("--unit-sphere only applies to estimate and product"));
        }
        Ok(())
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let (kind, args) = match cli.command {
        Command::Audit(a) => (CommandKind::Audit, a),
        Command::Estimate(a) => (CommandKind::Estimate, a),
        Command::Product(a) => (CommandKind::Product, a),
        Command::Reproduce(a) => (CommandKind::Reproduce, a),
    };
    let result = RunConfig::resolve(kind, args).and_then(|cfg| match kind {
        CommandKind::Audit => commands::cmd_audit(&cfg),
        CommandKind::Estimate => commands::cmd_estimate(&cfg),
        CommandKind::Product => commands::cmd_product(&cfg),
        CommandKind::Reproduce => reproduce::cmd_reproduce(&cfg),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
