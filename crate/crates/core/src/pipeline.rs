//! Returns to curvature series: one threshold network per window, averaged
//! curvatures per network.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::{curvature_series, CurvatureOptions, CurvatureSeries};
use crate::error::Result;
use crate::market_data::{make_schedule, ReturnMatrix, WindowSchedule, WindowScheme};
use crate::network::{distance_matrix, pearson_matrix, threshold_network, ThresholdNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub scheme: WindowScheme,
    pub tau: usize,
    pub delta: usize,
    pub theta: f64,
    pub curvature: CurvatureOptions,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            scheme: WindowScheme::Rolling,
            tau: 22,
            delta: 5,
            theta: 0.75,
            curvature: CurvatureOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct WindowNetwork {
    pub end_date: String,
    pub network: ThresholdNetwork,
}

impl AsRef<crate::graph::Graph> for WindowNetwork {
    fn as_ref(&self) -> &crate::graph::Graph {
        self.network.graph()
    }
}

/// Correlation-threshold network of every window in `schedule`.
pub fn window_networks(returns: &ReturnMatrix, schedule: &WindowSchedule, theta: f64) -> Result<Vec<WindowNetwork>> {
    let built: Vec<Result<WindowNetwork>> = schedule
        .windows
        .par_iter()
        .map(|&w| {
            let date = returns.end_date(w);
            let build = || -> Result<ThresholdNetwork> {
                let c = pearson_matrix(returns.window(w), returns.tickers())?;
                let d = distance_matrix(&c);
                threshold_network(&c, &d, theta)
            };
            build()
                .map(|network| WindowNetwork {
                    end_date: date.to_string(),
                    network,
                })
                .map_err(|e| e.in_window(date))
        })
        .collect();
    // Sequential pass so the earliest failing window is the one reported.
    built.into_iter().collect()
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub schedule: WindowSchedule,
    pub networks: Vec<WindowNetwork>,
    pub series: CurvatureSeries,
}

pub fn analyze(returns: &ReturnMatrix, cfg: &AnalysisConfig) -> Result<Analysis> {
    cfg.curvature.validate()?;
    let schedule = make_schedule(returns.n_rows(), cfg.scheme, cfg.tau, cfg.delta)?;
    let networks = window_networks(returns, &schedule, cfg.theta)?;
    let dates: Vec<String> = networks.iter().map(|n| n.end_date.clone()).collect();
    let series = curvature_series(&dates, &networks, &cfg.curvature)?;
    Ok(Analysis {
        schedule,
        networks,
        series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_data::{log_returns, PriceMatrix};
    use crate::synthetic::{one_factor_prices, FactorModel};

    fn returns() -> ReturnMatrix {
        let model = FactorModel {
            n_stocks: 8,
            n_days: 33,
            ..FactorModel::default()
        };
        log_returns(&one_factor_prices(&model, 5).unwrap())
    }

    #[test]
    fn rolling_windows_end_dates() {
        let r = returns();
        assert_eq!(r.n_rows(), 32);
        let a = analyze(&r, &AnalysisConfig::default()).unwrap();
        assert_eq!(a.series.len(), 3);
        let ends: Vec<&str> = a.schedule.windows.iter().map(|w| r.end_date(*w)).collect();
        assert_eq!(a.series.window_end_dates, ends);
        assert_eq!(a.schedule.windows.iter().map(|w| w.end).collect::<Vec<_>>(), [22, 27, 32]);
    }

    #[test]
    fn zero_variance_names_window() {
        let dates: Vec<String> = (0..10).map(|i| format!("t{i}")).collect();
        let tickers = vec!["A".to_string(), "B".to_string()];
        let prices = ndarray::Array2::from_shape_fn((10, 2), |(t, j)| if j == 0 { 1.0 } else { 1.0 + t as f64 });
        let r = log_returns(&PriceMatrix::new(dates, tickers, prices).unwrap());
        let cfg = AnalysisConfig {
            tau: 4,
            delta: 2,
            ..AnalysisConfig::default()
        };
        let err = analyze(&r, &cfg).unwrap_err();
        assert!(err.to_string().contains("t4"), "{err}");
    }
}
