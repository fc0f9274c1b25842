//! One-step-ahead forecasting of curvature series: a plain LSTM baseline and
//! the wavelet-decomposed variant that trains one LSTM per band and sums the
//! band forecasts.

mod lstm;
mod train;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use lstm::{
    forecast_head, gate_values, gradient_check, loss_and_gradient, lstm_step, run_sequence, sequence_loss, sigmoid, Gate, GateValues,
    LstmParams,
};
pub use train::{
    clip_global_norm, predict_one_step, train, walk_forward, Adam, AdamConfig, Scaler, TrainConfig, TrainedModel,
    MIN_TRAIN_SERIES,
};

use crate::curvature::CurvatureKind;
use crate::error::{Error, Result};
use crate::rng::stream_seed;
use crate::wavelet::{dwt_multilevel, WaveletDecomposition, WaveletSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelTag {
    #[serde(rename = "WD-LSTM")]
    WdLstm,
    #[serde(rename = "LSTM")]
    Lstm,
}

impl ModelTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelTag::WdLstm => "WD-LSTM",
            ModelTag::Lstm => "LSTM",
        }
    }

    /// Lower-case form used in file and stream names.
    pub fn slug(self) -> &'static str {
        match self {
            ModelTag::WdLstm => "wd-lstm",
            ModelTag::Lstm => "lstm",
        }
    }
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `r2` is `None` when the actuals have zero variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mae: f64,
    pub mse: f64,
    pub r2: Option<f64>,
}

pub fn metrics(pred: &[f64], actual: &[f64]) -> Result<Metrics> {
    if pred.len() != actual.len() || pred.is_empty() {
        return Err(Error::Invalid(format!(
            "metrics need equal nonzero lengths, got {} and {}",
            pred.len(),
            actual.len()
        )));
    }
    let n = actual.len() as f64;
    let mae = pred.iter().zip(actual).map(|(p, a)| (p - a).abs()).sum::<f64>() / n;
    let sse: f64 = pred.iter().zip(actual).map(|(p, a)| (p - a) * (p - a)).sum();
    let mean = actual.iter().sum::<f64>() / n;
    let sst: f64 = actual.iter().map(|a| (a - mean) * (a - mean)).sum();
    let scale = actual.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
    // Rounding in `mean` leaves a tiny residual on constant input.
    let floor = n * (16.0 * f64::EPSILON * scale).powi(2);
    let r2 = if sst <= floor { None } else { Some(1.0 - sse / sst) };
    Ok(Metrics { mae, mse: sse / n, r2 })
}

/// Test-split forecast of one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesForecast {
    pub model: ModelTag,
    /// Index of the first test point in the series.
    pub test_start: usize,
    pub actual: Vec<f64>,
    pub predicted: Vec<f64>,
    pub metrics: Metrics,
    /// Test inputs (over every trained band) that fell outside the training
    /// range and so may be clipped by the sigmoid head.
    pub saturated: usize,
}

struct BandForecast {
    predicted: Vec<f64>,
    saturated: usize,
}

fn forecast_band(values: &[f64], cfg: &TrainConfig) -> Result<BandForecast> {
    let model = train(values, cfg)?;
    let start = cfg.split_index(values.len());
    let predicted = walk_forward(&model.params, &model.scaler, values, start)?;
    let saturated = values[start..]
        .iter()
        .map(|&x| model.scaler.transform(x))
        .filter(|y| !(0.0..=1.0).contains(y))
        .count();
    Ok(BandForecast { predicted, saturated })
}

fn finish(model: ModelTag, series: &[f64], cfg: &TrainConfig, predicted: Vec<f64>, saturated: usize) -> Result<SeriesForecast> {
    let test_start = cfg.split_index(series.len());
    let actual = series[test_start..].to_vec();
    let metrics = metrics(&predicted, &actual)?;
    Ok(SeriesForecast {
        model,
        test_start,
        actual,
        predicted,
        metrics,
        saturated,
    })
}

/// Plain LSTM on the raw series, seeded with `cfg.seed`.
pub fn lstm_forecast(series: &[f64], cfg: &TrainConfig) -> Result<SeriesForecast> {
    let band = forecast_band(series, cfg)?;
    finish(ModelTag::Lstm, series, cfg, band.predicted, band.saturated)
}

/// Decompose, forecast every band with its own LSTM, sum the band forecasts.
pub fn wd_lstm_forecast(series: &[f64], spec: &WaveletSpec, cfg: &TrainConfig) -> Result<SeriesForecast> {
    let dec = dwt_multilevel(series, spec)?;
    wd_lstm_forecast_bands(series, &dec, cfg)
}

/// As [`wd_lstm_forecast`] with a precomputed (possibly denoised)
/// decomposition of `series`. Band `name` trains with seed
/// `stream_seed(cfg.seed, name)`.
pub fn wd_lstm_forecast_bands(series: &[f64], dec: &WaveletDecomposition, cfg: &TrainConfig) -> Result<SeriesForecast> {
    cfg.validate()?;
    if dec.original_length() != series.len() {
        return Err(Error::Invalid(format!(
            "decomposition of length {} for a series of length {}",
            dec.original_length(),
            series.len()
        )));
    }
    let bands = dec.sub_series();
    let results: Vec<Result<BandForecast>> = bands
        .par_iter()
        .map(|(name, values)| {
            let band_cfg = TrainConfig {
                seed: stream_seed(cfg.seed, name),
                ..*cfg
            };
            forecast_band(values, &band_cfg).map_err(|e| e.in_sub_series(name))
        })
        .collect();
    let mut total: Option<Vec<f64>> = None;
    let mut saturated = 0;
    for band in results {
        let band = band?;
        saturated += band.saturated;
        match total.as_mut() {
            None => total = Some(band.predicted),
            Some(acc) => acc.iter_mut().zip(&band.predicted).for_each(|(a, b)| *a += b),
        }
    }
    let predicted = total.unwrap_or_default();
    finish(ModelTag::WdLstm, series, cfg, predicted, saturated)
}

/// One curvature kind's forecast with its test dates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindForecast {
    pub kind: CurvatureKind,
    pub dates: Vec<String>,
    #[serde(flatten)]
    pub forecast: SeriesForecast,
}

/// All kinds forecast by one model, with the configuration that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastReport {
    pub model: ModelTag,
    pub config: TrainConfig,
    pub wavelet: Option<WaveletSpec>,
    pub kinds: Vec<KindForecast>,
}

impl ForecastReport {
    pub fn get(&self, kind: CurvatureKind) -> Option<&KindForecast> {
        self.kinds.iter().find(|k| k.kind == kind)
    }
}
