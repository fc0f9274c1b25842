//! `analyze`, `forecast` and `report`. Each command reads its inputs, calls
//! the library and writes every output file atomically.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use curvnet_core::curvature::{read_series_csv, write_series_csv, CurvatureKind, CurvatureSeries};
use curvnet_core::forecaster::{
    lstm_forecast, wd_lstm_forecast_bands, ForecastReport, KindForecast, ModelTag, SeriesForecast, TrainConfig,
};
use curvnet_core::market_data::{load_prices, log_returns};
use curvnet_core::pipeline::analyze;
use curvnet_core::rng::stream_seed;
use curvnet_core::wavelet::{denoise, dwt_multilevel, universal_threshold, WaveletDecomposition};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::CliError;
use crate::report::{render_csv, render_text, MetricsTable};

pub const CURVATURE_CSV: &str = "curvature.csv";
pub const FORECAST_JSON: &str = "forecast.json";
pub const NETWORKS_DIR: &str = "networks";
pub const REPORT_CSV: &str = "report.csv";
pub const REPORT_TXT: &str = "report.txt";

/// Writes `path` via a temporary sibling and a rename, so readers never see
/// a partial file.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut BufWriter<fs::File>) -> Result<(), CliError>) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    let io_err = |e: std::io::Error| CliError::Io(format!("cannot write {}: {e}", path.display()));
    let file = fs::File::create(&tmp).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    let result = fill(&mut w).and_then(|_| {
        use std::io::Write;
        w.flush().map_err(io_err)
    });
    drop(w);
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(e);
    }
    fs::rename(&tmp, path).map_err(io_err)
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    write_atomic(path, |w| {
        use std::io::Write;
        w.write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
    })
}

#[derive(Debug, Clone)]
pub struct AnalyzeOutcome {
    pub series: CurvatureSeries,
    pub files: Vec<PathBuf>,
}

/// Prices to the curvature CSV (all four kinds) plus optional network dumps.
pub fn cmd_analyze(cfg: &PipelineConfig) -> Result<AnalyzeOutcome, CliError> {
    cfg.validate()?;
    let input = cfg
        .market_data
        .input
        .as_ref()
        .ok_or_else(|| CliError::Config("no input price file (set market_data.input or pass --input)".into()))?;
    let file = fs::File::open(input).map_err(|e| CliError::Io(format!("cannot open {}: {e}", input.display())))?;
    let prices = load_prices(std::io::BufReader::new(file))?;
    let returns = log_returns(&prices);
    let analysis = analyze(&returns, &cfg.analysis())?;

    let out = &cfg.output.dir;
    let mut files = Vec::new();
    let csv_path = out.join(CURVATURE_CSV);
    write_atomic(&csv_path, |w| Ok(write_series_csv(&analysis.series, w)?))?;
    files.push(csv_path);
    if cfg.network.dump_networks {
        let dir = out.join(NETWORKS_DIR);
        for (k, wn) in analysis.networks.iter().enumerate() {
            let path = dir.join(format!("{k:04}_{}.txt", sanitize(&wn.end_date)));
            write_atomic(&path, |w| Ok(wn.network.write_dump(returns.tickers(), w)?))?;
            files.push(path);
        }
    }
    Ok(AnalyzeOutcome {
        series: analysis.series,
        files,
    })
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Seed of one model on one curvature kind: stream `forecast/{kind}/{model}`.
/// WD-LSTM bands derive theirs from this by band name.
pub fn model_seed(seed: u64, kind: CurvatureKind, model: ModelTag) -> u64 {
    stream_seed(seed, &format!("forecast/{kind}/{}", model.slug()))
}

/// Contents of `forecast.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastFile {
    pub config: PipelineConfig,
    pub reports: Vec<ForecastReport>,
}

fn decomposition(values: &[f64], cfg: &PipelineConfig) -> Result<WaveletDecomposition, CliError> {
    let dec = dwt_multilevel(values, &cfg.wavelet_spec())?;
    if !cfg.wavelet.denoise {
        return Ok(dec);
    }
    let t = cfg.wavelet.threshold.unwrap_or_else(|| universal_threshold(&dec));
    Ok(denoise(&dec, t, cfg.wavelet.mode)?)
}

struct KindResult {
    kind: CurvatureKind,
    dec: WaveletDecomposition,
    wd: SeriesForecast,
    baseline: Option<SeriesForecast>,
}

fn forecast_kind(series: &CurvatureSeries, kind: CurvatureKind, cfg: &PipelineConfig) -> Result<KindResult, CliError> {
    let values = series.get(kind);
    let base = cfg.train();
    let dec = decomposition(values, cfg)?;
    let wd_cfg = TrainConfig {
        seed: model_seed(cfg.seed, kind, ModelTag::WdLstm),
        ..base
    };
    let wd = wd_lstm_forecast_bands(values, &dec, &wd_cfg)?;
    let baseline = if cfg.forecaster.baseline {
        let cfg = TrainConfig {
            seed: model_seed(cfg.seed, kind, ModelTag::Lstm),
            ..base
        };
        Some(lstm_forecast(values, &cfg)?)
    } else {
        None
    };
    Ok(KindResult { kind, dec, wd, baseline })
}

/// Curvature CSV to forecast JSON, per-kind plot CSVs and band dumps.
pub fn cmd_forecast(cfg: &PipelineConfig, series_path: Option<&Path>) -> Result<ForecastFile, CliError> {
    cfg.validate()?;
    let default_path = cfg.output.dir.join(CURVATURE_CSV);
    let path = series_path.unwrap_or(&default_path);
    let file = fs::File::open(path).map_err(|e| CliError::MissingArtifact(format!("cannot open {}: {e}", path.display())))?;
    let series = read_series_csv(std::io::BufReader::new(file))?;

    let results: Vec<Result<KindResult, CliError>> = cfg
        .curvature
        .kinds
        .par_iter()
        .map(|&kind| forecast_kind(&series, kind, cfg))
        .collect();
    let results: Vec<KindResult> = results.into_iter().collect::<Result<_, _>>()?;

    let base = cfg.train();
    let mut wd_report = ForecastReport {
        model: ModelTag::WdLstm,
        config: base,
        wavelet: Some(cfg.wavelet_spec()),
        kinds: Vec::new(),
    };
    let mut lstm_report = ForecastReport {
        model: ModelTag::Lstm,
        config: base,
        wavelet: None,
        kinds: Vec::new(),
    };
    let out = &cfg.output.dir;
    for r in results {
        let dates = series.window_end_dates[r.wd.test_start..].to_vec();
        write_atomic(&out.join(format!("wavelet_{}.csv", r.kind)), |w| Ok(r.dec.write_csv(w)?))?;
        for (report, forecast) in [(&mut wd_report, Some(r.wd)), (&mut lstm_report, r.baseline)] {
            let Some(forecast) = forecast else { continue };
            let kf = KindForecast {
                kind: r.kind,
                dates: dates.clone(),
                forecast,
            };
            let path = out.join(format!("forecast_{}_{}.csv", report.model.slug(), r.kind));
            write_atomic(&path, |w| write_plot_csv(&kf, w))?;
            report.kinds.push(kf);
        }
    }
    let mut reports = vec![wd_report];
    if cfg.forecaster.baseline {
        reports.push(lstm_report);
    }
    let file = ForecastFile {
        config: cfg.clone(),
        reports,
    };
    let json = serde_json::to_string_pretty(&file).expect("forecast report serialises");
    write_text(&out.join(FORECAST_JSON), &(json + "\n"))?;
    Ok(file)
}

fn write_plot_csv<W: std::io::Write>(kf: &KindForecast, w: &mut W) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    writeln!(w, "date,actual,predicted").map_err(io)?;
    for ((d, a), p) in kf.dates.iter().zip(&kf.forecast.actual).zip(&kf.forecast.predicted) {
        writeln!(w, "{d},{a},{p}").map_err(io)?;
    }
    Ok(())
}

/// Forecast JSON to the metrics table, as CSV and aligned text. Returns the text.
pub fn cmd_report(out_dir: &Path) -> Result<String, CliError> {
    let path = out_dir.join(FORECAST_JSON);
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::MissingArtifact(format!("cannot read {}: {e}", path.display())))?;
    let file: ForecastFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Core(curvnet_core::Error::Parse {
            line: e.line(),
            message: format!("{}: {e}", path.display()),
        }))?;
    let tables: Vec<MetricsTable> = file.reports.iter().map(MetricsTable::from_report).collect();
    let rendered = render_text(&tables);
    write_text(&out_dir.join(REPORT_CSV), &render_csv(&tables))?;
    write_text(&out_dir.join(REPORT_TXT), &rendered)?;
    Ok(rendered)
}
