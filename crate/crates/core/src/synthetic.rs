//! Seeded synthetic inputs: one-factor stock prices with an optional
//! high-correlation regime, and trend-plus-seasonality series.

use std::f64::consts::PI;
use std::ops::Range;

use ndarray::Array2;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::market_data::PriceMatrix;
use crate::rng::stream_rng;

/// Daily log return of stock `j` is
/// `vol * (beta * f_t + sqrt(1 - beta^2) * e_jt)`, so the pairwise return
/// correlation is `beta^2`. Inside `regime` (return-row indices) the loading
/// switches to `sqrt(regime_loading_sq)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    pub n_stocks: usize,
    pub n_days: usize,
    pub loading_sq: f64,
    pub regime_loading_sq: f64,
    pub regime: Option<Range<usize>>,
    pub volatility: f64,
}

impl Default for FactorModel {
    fn default() -> Self {
        Self {
            n_stocks: 40,
            n_days: 1200,
            loading_sq: 0.3,
            regime_loading_sq: 0.8,
            regime: None,
            volatility: 0.01,
        }
    }
}

/// Date label for day `i`: `t0000`, `t0001`, ... (sorts chronologically).
pub fn day_label(i: usize) -> String {
    format!("t{i:04}")
}

pub fn one_factor_prices(model: &FactorModel, seed: u64) -> Result<PriceMatrix> {
    for (name, v) in [("loading_sq", model.loading_sq), ("regime_loading_sq", model.regime_loading_sq)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Invalid(format!("{name} {v} must lie in [0, 1]")));
        }
    }
    if model.n_days < 2 || model.n_stocks == 0 {
        return Err(Error::Invalid("need at least one stock and two days".into()));
    }
    let mut rng = stream_rng(seed, "synthetic/one-factor");
    let mut prices = Array2::zeros((model.n_days, model.n_stocks));
    prices.row_mut(0).fill(100.0);
    for t in 1..model.n_days {
        let in_regime = model.regime.as_ref().is_some_and(|r| r.contains(&(t - 1)));
        let b2 = if in_regime { model.regime_loading_sq } else { model.loading_sq };
        let (beta, idio) = (b2.sqrt(), (1.0 - b2).sqrt());
        let f: f64 = StandardNormal.sample(&mut rng);
        for j in 0..model.n_stocks {
            let e: f64 = StandardNormal.sample(&mut rng);
            let r = model.volatility * (beta * f + idio * e);
            prices[[t, j]] = prices[[t - 1, j]] * r.exp();
        }
    }
    let dates = (0..model.n_days).map(day_label).collect();
    let tickers = (0..model.n_stocks).map(|j| format!("S{j:02}")).collect();
    PriceMatrix::new(dates, tickers, prices)
}

/// `0.002 t + sin(2 pi t / 50) + 0.5 sin(2 pi t / 23) + N(0, noise_sd^2)`.
pub fn curvature_like_series(len: usize, noise_sd: f64, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, "synthetic/curvature-like");
    (0..len)
        .map(|t| {
            let t = t as f64;
            let e: f64 = StandardNormal.sample(&mut rng);
            0.002 * t + (2.0 * PI * t / 50.0).sin() + 0.5 * (2.0 * PI * t / 23.0).sin() + noise_sd * e
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_data::log_returns;
    use crate::network::pearson_matrix;

    fn mean_offdiag(model: &FactorModel, rows: Range<usize>) -> f64 {
        let r = log_returns(&one_factor_prices(model, 1).unwrap());
        let c = pearson_matrix(r.returns().slice(ndarray::s![rows, ..]), r.tickers()).unwrap();
        let n = c.n();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += c.get(i, j);
                }
            }
        }
        s / (n * (n - 1)) as f64
    }

    #[test]
    fn regime_raises_correlation() {
        let model = FactorModel {
            n_days: 801,
            regime: Some(400..800),
            ..FactorModel::default()
        };
        let normal = mean_offdiag(&model, 0..400);
        let regime = mean_offdiag(&model, 400..800);
        assert!((normal - 0.3).abs() < 0.08, "{normal}");
        assert!((regime - 0.8).abs() < 0.08, "{regime}");
    }

    #[test]
    fn seeded() {
        let m = FactorModel { n_days: 30, n_stocks: 3, ..FactorModel::default() };
        assert_eq!(one_factor_prices(&m, 3).unwrap(), one_factor_prices(&m, 3).unwrap());
        assert_eq!(curvature_like_series(50, 0.3, 2), curvature_like_series(50, 0.3, 2));
        assert_ne!(curvature_like_series(50, 0.3, 2), curvature_like_series(50, 0.3, 3));
    }
}
