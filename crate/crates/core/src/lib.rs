//! Ricci-type curvatures of stock correlation networks and a wavelet +
//! LSTM forecaster for the resulting curvature time series.
//!
//! The pipeline runs prices → log returns → windowed correlation →
//! MST-plus-threshold network → per-edge curvatures → network averages →
//! curvature series → wavelet bands → one LSTM per band → summed forecast.

pub mod curvature;
pub mod error;
pub mod forecaster;
pub mod graph;
pub mod market_data;
pub mod network;
pub mod pipeline;
pub mod rng;
pub mod synthetic;
pub mod wavelet;

pub use error::{Error, ErrorClass, Result};
