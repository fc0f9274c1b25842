use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::lstm::{forecast_head, loss_and_gradient, lstm_step, LstmParams};
use crate::error::{Error, Result};

pub const MIN_TRAIN_SERIES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub hidden_size: usize,
    pub train_fraction: f64,
    pub max_iterations: usize,
    pub learning_rate: f64,
    pub gradient_clip: f64,
    pub adam: AdamConfig,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden_size: 200,
            train_fraction: 0.8,
            max_iterations: 250,
            learning_rate: 0.005,
            gradient_clip: 1.0,
            adam: AdamConfig::default(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Invalid(m));
        if self.hidden_size == 0 {
            return bad("hidden_size must be at least 1".into());
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!("train_fraction {} must lie in (0, 1)", self.train_fraction));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate {} must be positive", self.learning_rate));
        }
        if !(self.gradient_clip > 0.0) {
            return bad(format!("gradient_clip {} must be positive", self.gradient_clip));
        }
        let a = &self.adam;
        if !(0.0..1.0).contains(&a.beta1) || !(0.0..1.0).contains(&a.beta2) || !(a.epsilon > 0.0) {
            return bad("adam parameters need beta1, beta2 in [0, 1) and epsilon > 0".into());
        }
        Ok(())
    }

    /// Number of leading points used for training out of `len`.
    pub fn split_index(&self, len: usize) -> usize {
        (self.train_fraction * len as f64).floor() as usize
    }
}

/// Min-max scaler onto `[0, 1]`, fitted on training values only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    min: f64,
    max: f64,
}

impl Scaler {
    /// A flat training range `c` is widened to `[c - 1, c + 1]` so that `c`
    /// maps to 0.5, the sigmoid's unbiased output.
    pub fn fit(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(index) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let scale = min.abs().max(max.abs()).max(1.0);
        if max - min <= 1e-12 * scale {
            let c = 0.5 * (min + max);
            return Ok(Self { min: c - 1.0, max: c + 1.0 });
        }
        Ok(Self { min, max })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn transform(&self, x: f64) -> f64 {
        (x - self.min) / (self.max - self.min)
    }

    pub fn inverse(&self, y: f64) -> f64 {
        self.min + y * (self.max - self.min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub params: LstmParams,
    pub scaler: Scaler,
    /// Loss before each update; entry `k` is the loss at iteration `k + 1`.
    pub loss_history: Vec<f64>,
    pub final_loss: f64,
}

/// Scales the whole gradient so its Euclidean norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_global_norm(grad: &mut [f64], max_norm: f64) -> f64 {
    let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm {
        let s = max_norm / norm;
        grad.iter_mut().for_each(|g| *g *= s);
    }
    norm
}

pub struct Adam {
    cfg: AdamConfig,
    lr: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(n: usize, lr: f64, cfg: AdamConfig) -> Self {
        Self {
            cfg,
            lr,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let AdamConfig { beta1, beta2, epsilon } = self.cfg;
        let c1 = 1.0 - beta1.powi(self.t);
        let c2 = 1.0 - beta2.powi(self.t);
        for k in 0..params.len() {
            self.m[k] = beta1 * self.m[k] + (1.0 - beta1) * grad[k];
            self.v[k] = beta2 * self.v[k] + (1.0 - beta2) * grad[k] * grad[k];
            params[k] -= self.lr * (self.m[k] / c1) / ((self.v[k] / c2).sqrt() + epsilon);
        }
    }
}

fn check_series(series: &[f64]) -> Result<()> {
    if series.len() < MIN_TRAIN_SERIES {
        return Err(Error::TooShort {
            what: "points to train a forecaster",
            needed: MIN_TRAIN_SERIES,
            got: series.len(),
        });
    }
    if let Some(index) = series.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(())
}

/// Fits one LSTM on the leading `train_fraction` of `series`, teacher-forced
/// one step ahead on min-max scaled values.
pub fn train(series: &[f64], cfg: &TrainConfig) -> Result<TrainedModel> {
    cfg.validate()?;
    check_series(series)?;
    let n_train = cfg.split_index(series.len());
    if n_train < 2 || n_train >= series.len() {
        return Err(Error::TooShort {
            what: "points in the training and test splits",
            needed: 2,
            got: n_train.min(series.len() - n_train),
        });
    }
    let scaler = Scaler::fit(&series[..n_train])?;
    let scaled: Vec<f64> = series[..n_train].iter().map(|&x| scaler.transform(x)).collect();
    let inputs = &scaled[..n_train - 1];
    let targets = &scaled[1..];

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = LstmParams::init(cfg.hidden_size, &mut rng);
    let mut adam = Adam::new(params.as_flat().len(), cfg.learning_rate, cfg.adam);
    let mut loss_history = Vec::with_capacity(cfg.max_iterations);
    let diverged = |iteration: usize, loss: f64| Error::Diverged { iteration, loss };
    for iteration in 1..=cfg.max_iterations {
        let (loss, mut grad) =
            loss_and_gradient(&params, inputs, targets).map_err(|_| diverged(iteration, f64::NAN))?;
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(diverged(iteration, loss));
        }
        loss_history.push(loss);
        clip_global_norm(&mut grad, cfg.gradient_clip);
        adam.step(params.as_flat_mut(), &grad);
    }
    let final_loss = super::lstm::sequence_loss(&params, inputs, targets)
        .map_err(|_| diverged(cfg.max_iterations + 1, f64::NAN))?;
    if !final_loss.is_finite() {
        return Err(diverged(cfg.max_iterations + 1, final_loss));
    }
    Ok(TrainedModel {
        params,
        scaler,
        loss_history,
        final_loss,
    })
}

/// Runs the scaled history through the recurrence and returns the
/// inverse-scaled prediction for the next value.
pub fn predict_one_step(params: &LstmParams, scaler: &Scaler, history: &[f64]) -> Result<f64> {
    if history.is_empty() {
        return Err(Error::EmptyInput);
    }
    let hsz = params.hidden_size();
    let mut h = vec![0.0; hsz];
    let mut c = vec![0.0; hsz];
    for &x in history {
        (h, c) = lstm_step(params, scaler.transform(x), &h, &c)?;
    }
    Ok(scaler.inverse(forecast_head(params, &h)))
}

/// One-step-ahead predictions for `series[start..]`, each made from the true
/// values before it. Equivalent to `predict_one_step(&series[..t])` for every
/// `t >= start`, computed in a single pass.
pub fn walk_forward(params: &LstmParams, scaler: &Scaler, series: &[f64], start: usize) -> Result<Vec<f64>> {
    if start == 0 || start > series.len() {
        return Err(Error::Invalid(format!(
            "walk-forward start {start} outside 1..={}",
            series.len()
        )));
    }
    let hsz = params.hidden_size();
    let mut h = vec![0.0; hsz];
    let mut c = vec![0.0; hsz];
    let mut out = Vec::with_capacity(series.len() - start);
    for (t, &x) in series.iter().enumerate().take(series.len() - 1) {
        (h, c) = lstm_step(params, scaler.transform(x), &h, &c)?;
        if t + 1 >= start {
            out.push(scaler.inverse(forecast_head(params, &h)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> TrainConfig {
        TrainConfig {
            hidden_size: 8,
            max_iterations: 150,
            learning_rate: 0.01,
            seed,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn defaults() {
        let c = TrainConfig::default();
        assert_eq!((c.hidden_size, c.max_iterations), (200, 250));
        assert_eq!((c.train_fraction, c.learning_rate, c.gradient_clip), (0.8, 0.005, 1.0));
        assert_eq!(c.split_index(400), 320);
    }

    #[test]
    fn validation() {
        for bad in [
            TrainConfig { train_fraction: 1.0, ..TrainConfig::default() },
            TrainConfig { train_fraction: 0.0, ..TrainConfig::default() },
            TrainConfig { hidden_size: 0, ..TrainConfig::default() },
            TrainConfig { gradient_clip: 0.0, ..TrainConfig::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn scaler_round_trip_and_flat() {
        let s = Scaler::fit(&[2.0, 4.0, 3.0]).unwrap();
        assert_eq!(s.transform(2.0), 0.0);
        assert_eq!(s.transform(4.0), 1.0);
        assert!((s.inverse(s.transform(3.3)) - 3.3).abs() < 1e-15);
        let flat = Scaler::fit(&[5.0; 4]).unwrap();
        assert_eq!(flat.transform(5.0), 0.5);
        assert!(Scaler::fit(&[]).is_err());
    }

    #[test]
    fn clip_bounds_norm() {
        let mut g = vec![3.0, 4.0];
        assert_eq!(clip_global_norm(&mut g, 1.0), 5.0);
        assert!((g[0] - 0.6).abs() < 1e-15 && (g[1] - 0.8).abs() < 1e-15);
        let mut small = vec![0.1, 0.1];
        clip_global_norm(&mut small, 1.0);
        assert_eq!(small, vec![0.1, 0.1]);
    }

    #[test]
    fn constant_series_is_learned() {
        let series = vec![1.7; 60];
        let m = train(&series, &small(1)).unwrap();
        assert!(m.final_loss < 1e-4, "loss {}", m.final_loss);
        let p = predict_one_step(&m.params, &m.scaler, &series[..48]).unwrap();
        assert!((p - 1.7).abs() < 1.7 * 0.05 + 0.01);
    }

    #[test]
    fn deterministic_for_seed() {
        let ramp: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
        let a = train(&ramp, &small(9)).unwrap();
        let b = train(&ramp, &small(9)).unwrap();
        assert_eq!(a, b);
        let c = train(&ramp, &small(10)).unwrap();
        assert_ne!(a.params, c.params);
    }

    #[test]
    fn too_short() {
        assert!(matches!(train(&[1.0; 19], &small(0)), Err(Error::TooShort { .. })));
    }

    #[test]
    fn walk_forward_matches_one_step() {
        let series: Vec<f64> = (0..30).map(|i| (i as f64 * 0.4).sin()).collect();
        let m = train(&series, &TrainConfig { max_iterations: 5, ..small(2) }).unwrap();
        let wf = walk_forward(&m.params, &m.scaler, &series, 24).unwrap();
        assert_eq!(wf.len(), 6);
        for (k, t) in (24..30).enumerate() {
            assert_eq!(wf[k], predict_one_step(&m.params, &m.scaler, &series[..t]).unwrap());
        }
        assert!(predict_one_step(&m.params, &m.scaler, &series[..1]).unwrap().is_finite());
    }
}
