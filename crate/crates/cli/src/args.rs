//! Command-line syntax and the parsing of its value formats.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "dyson-dd", version, about = "Dyson series via divided differences of the exponential")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve a basis state and write its amplitudes and populations.
    Evolve(EvolveArgs),
    /// Infidelity of truncated series against the ODE oracle over a time grid.
    InfidelitySweep(SweepArgs),
    /// Order-by-order transition amplitudes between two basis states.
    Amplitude(AmplitudeArgs),
    /// Run the built-in validation suites.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Split the path walk across threads (capped by DYSON_DD_THREADS).
    #[arg(long)]
    pub parallel: bool,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Built-in model (single-spin, anharmonic, fermi) or a JSON model file.
    #[arg(long)]
    pub model: String,
    /// Built-in model parameter, repeatable.
    #[arg(long = "param", value_name = "K=V")]
    pub params: Vec<String>,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Time, or a grid `start:stop:steps` with `steps` equal intervals.
    #[arg(long = "t", allow_hyphen_values = true)]
    pub t: String,
    /// Truncation order, or a comma-separated list.
    #[arg(long = "Q")]
    pub q: String,
    /// Initial basis state.
    #[arg(long, default_value_t = 0)]
    pub z0: usize,
    /// Add ODE-oracle columns.
    #[arg(long)]
    pub oracle: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long = "t", allow_hyphen_values = true)]
    pub t: String,
    #[arg(long = "Q")]
    pub q: String,
    #[arg(long, default_value_t = 0)]
    pub z0: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AmplitudeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long = "t", allow_hyphen_values = true)]
    pub t: String,
    /// Highest order.
    #[arg(long = "Q")]
    pub q: String,
    #[arg(long)]
    pub zin: usize,
    #[arg(long)]
    pub zfin: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Also check the alpha/beta bridge on this model.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long = "param", value_name = "K=V")]
    pub params: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// `val` or `start:stop:steps`; the grid includes both ends.
pub fn parse_times(text: &str) -> Result<Vec<f64>, CliError> {
    let number = |s: &str| -> Result<f64, CliError> {
        let value: f64 = s.trim().parse().map_err(|_| CliError::Config(format!("'{s}' is not a number")))?;
        if value.is_finite() {
            Ok(value)
        } else {
            Err(CliError::Config(format!("time '{s}' is not finite")))
        }
    };
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [single] => Ok(vec![number(single)?]),
        [start, stop, steps] => {
            let (start, stop) = (number(start)?, number(stop)?);
            let steps: usize =
                steps.trim().parse().map_err(|_| CliError::Config(format!("'{steps}' is not a step count")))?;
            if steps == 0 || stop <= start {
                return Err(CliError::Config(format!(
                    "time grid '{text}' must have stop > start and at least one step"
                )));
            }
            Ok((0..=steps).map(|k| start + (stop - start) * k as f64 / steps as f64).collect())
        }
        _ => Err(CliError::Config(format!("time '{text}' must be `val` or `start:stop:steps`"))),
    }
}

/// `Q` or `Q1,Q2,..`, returned sorted and deduplicated.
pub fn parse_orders(text: &str) -> Result<Vec<usize>, CliError> {
    let mut orders = text
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| CliError::Config(format!("'{s}' is not a non-negative order"))))
        .collect::<Result<Vec<_>, _>>()?;
    orders.sort_unstable();
    orders.dedup();
    Ok(orders)
}

/// `k=v` pairs with numeric values.
pub fn parse_params(pairs: &[String]) -> Result<Vec<(String, f64)>, CliError> {
    pairs
        .iter()
        .map(|pair| {
            let (key, value) =
                pair.split_once('=').ok_or_else(|| CliError::Config(format!("parameter '{pair}' must be k=v")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("parameter '{pair}' has a non-numeric value")))?;
            Ok((key.trim().to_string(), value))
        })
        .collect()
}
