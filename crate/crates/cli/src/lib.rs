//! `curvnet`: prices → curvature series → WD-LSTM forecasts → metrics report.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use curvnet_core::curvature::CurvatureKind;
use curvnet_core::market_data::WindowScheme;
use curvnet_core::wavelet::{ThresholdMode, WaveletFamily};

pub use commands::{cmd_analyze, cmd_forecast, cmd_report};
pub use config::PipelineConfig;
pub use error::CliError;

pub const CONFIG_ENV: &str = "CURVNET_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "curvnet", version, about = "Ricci curvature of stock correlation networks and WD-LSTM forecasting")]
pub struct Cli {
    /// TOML configuration file; every key has a default.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build window networks and write the curvature series.
    Analyze(Overrides),
    /// Forecast each configured curvature series.
    Forecast {
        /// Curvature CSV to forecast (defaults to <out>/curvature.csv).
        #[arg(long)]
        series: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Tabulate MAE, MSE and R² from the forecast outputs.
    Report(Overrides),
}

fn parse_scheme(s: &str) -> Result<WindowScheme, String> {
    match s {
        "rolling" => Ok(WindowScheme::Rolling),
        "non-overlapping" => Ok(WindowScheme::NonOverlapping),
        other => Err(format!("unknown scheme `{other}` (rolling | non-overlapping)")),
    }
}

/// Command-line values that replace the matching configuration keys.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// Price CSV (market_data.input).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Window length in return rows.
    #[arg(long)]
    pub tau: Option<usize>,
    /// Shift between rolling windows.
    #[arg(long)]
    pub delta: Option<usize>,
    /// Correlation threshold for non-MST edges.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// rolling | non-overlapping.
    #[arg(long, value_parser = parse_scheme)]
    pub scheme: Option<WindowScheme>,
    /// Comma-separated subset of or,fr,mr,hr.
    #[arg(long, value_delimiter = ',')]
    pub curvatures: Option<Vec<CurvatureKind>>,
    /// Wavelet decomposition levels.
    #[arg(long)]
    pub levels: Option<usize>,
    /// haar | db2 | db4 | sym4.
    #[arg(long)]
    pub wavelet: Option<WaveletFamily>,
    /// Master seed for every random stream.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also train the plain LSTM baseline.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub baseline: Option<bool>,
    /// Write one edge list per window under networks/.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub dump_networks: Option<bool>,
    /// Threshold detail coefficients before forecasting.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub denoise: Option<bool>,
    /// Denoising threshold (universal threshold if unset).
    #[arg(long)]
    pub threshold: Option<f64>,
    /// soft | hard.
    #[arg(long)]
    pub mode: Option<ThresholdMode>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut PipelineConfig) {
        macro_rules! set {
            ($field:ident => $($target:tt)+) => {
                if let Some(v) = &self.$field {
                    $($target)+ = v.clone();
                }
            };
        }
        if let Some(p) = &self.input {
            cfg.market_data.input = Some(p.clone());
        }
        set!(tau => cfg.market_data.tau);
        set!(delta => cfg.market_data.delta);
        set!(scheme => cfg.market_data.scheme);
        set!(theta => cfg.network.theta);
        set!(dump_networks => cfg.network.dump_networks);
        set!(curvatures => cfg.curvature.kinds);
        set!(levels => cfg.wavelet.levels);
        set!(wavelet => cfg.wavelet.family);
        set!(denoise => cfg.wavelet.denoise);
        set!(mode => cfg.wavelet.mode);
        if let Some(t) = self.threshold {
            cfg.wavelet.threshold = Some(t);
        }
        set!(baseline => cfg.forecaster.baseline);
        set!(seed => cfg.seed);
        set!(out => cfg.output.dir);
    }
}

fn resolve(config: Option<&PathBuf>, overrides: &Overrides) -> Result<PipelineConfig, CliError> {
    let mut cfg = match config {
        Some(path) => {
            let mut cfg = PipelineConfig::load(path)?;
            // an input path inside a config file is relative to that file
            if let (Some(input), Some(dir)) = (&cfg.market_data.input, path.parent()) {
                if input.is_relative() {
                    cfg.market_data.input = Some(dir.join(input));
                }
            }
            cfg
        }
        None => PipelineConfig::default(),
    };
    overrides.apply(&mut cfg);
    Ok(cfg)
}

/// Runs one command, writing progress to `out`.
pub fn execute<W: Write>(cli: &Cli, out: &mut W) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    match &cli.command {
        Command::Analyze(o) => {
            let cfg = resolve(cli.config.as_ref(), o)?;
            let done = cmd_analyze(&cfg)?;
            writeln!(out, "analyzed {} windows", done.series.len()).map_err(io)?;
            for f in &done.files {
                writeln!(out, "wrote {}", f.display()).map_err(io)?;
            }
        }
        Command::Forecast { series, overrides } => {
            let cfg = resolve(cli.config.as_ref(), overrides)?;
            let file = cmd_forecast(&cfg, series.as_deref())?;
            for r in &file.reports {
                for k in &r.kinds {
                    let r2 = k.forecast.metrics.r2.map_or("n/a".to_string(), |v| format!("{v:.4}"));
                    writeln!(out, "{} {}: mse {:.6} r2 {r2}", r.model, k.kind, k.forecast.metrics.mse).map_err(io)?;
                }
            }
            writeln!(out, "wrote {}", cfg.output.dir.join(commands::FORECAST_JSON).display()).map_err(io)?;
        }
        Command::Report(o) => {
            let cfg = resolve(cli.config.as_ref(), o)?;
            let text = cmd_report(&cfg.output.dir)?;
            write!(out, "{text}").map_err(io)?;
        }
    }
    Ok(())
}

/// Parses `args` and runs; returns the process exit code. Failures print a
/// single `error[class]: message` line to `err`.
pub fn run<I, T, W, E>(args: I, out: &mut W, err: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    W: Write,
    E: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            let _ = writeln!(err, "error[usage]: {first}");
            return 3;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error[{}]: {}", e.class(), one_line(&e.to_string()));
            e.exit_code()
        }
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}
