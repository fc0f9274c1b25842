//! Price ingestion, log returns and window schedules.
//!
//! Input is a comma-separated table with a mandatory header
//! `date,TICKER1,TICKER2,...`; an empty cell marks a missing price and is
//! filled from the previous trading day of the same column.

use std::io::Read;

use ndarray::{s, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum window length; Pearson correlation over fewer points is degenerate.
pub const MIN_WINDOW: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct PriceMatrix {
    dates: Vec<String>,
    tickers: Vec<String>,
    prices: Array2<f64>,
}

impl PriceMatrix {
    /// Builds a matrix from complete data, checking the type invariants.
    pub fn new(dates: Vec<String>, tickers: Vec<String>, prices: Array2<f64>) -> Result<Self> {
        if prices.nrows() != dates.len() || prices.ncols() != tickers.len() {
            return Err(Error::Invalid(format!(
                "price grid is {}x{} but there are {} dates and {} tickers",
                prices.nrows(),
                prices.ncols(),
                dates.len(),
                tickers.len()
            )));
        }
        if dates.len() < 2 {
            return Err(Error::TooShort {
                what: "trading days",
                needed: 2,
                got: dates.len(),
            });
        }
        if tickers.len() < 2 {
            return Err(Error::TooShort {
                what: "tickers",
                needed: 2,
                got: tickers.len(),
            });
        }
        for w in dates.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::Invalid(format!(
                    "dates not strictly increasing at `{}`",
                    w[1]
                )));
            }
        }
        for ((t, k), &p) in prices.indexed_iter() {
            if !(p > 0.0) || !p.is_finite() {
                return Err(Error::NonPositivePrice {
                    ticker: tickers[k].clone(),
                    date: dates[t].clone(),
                    value: p,
                });
            }
        }
        Ok(Self {
            dates,
            tickers,
            prices,
        })
    }

    pub fn dates(&self) -> &[String] {
        &self.dates
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    /// T x N grid, rows are trading days.
    pub fn prices(&self) -> &Array2<f64> {
        &self.prices
    }

    pub fn n_days(&self) -> usize {
        self.dates.len()
    }

    pub fn n_tickers(&self) -> usize {
        self.tickers.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnMatrix {
    dates: Vec<String>,
    tickers: Vec<String>,
    returns: Array2<f64>,
}

impl ReturnMatrix {
    /// Row `t` is labelled with the later of the two prices it spans.
    pub fn dates(&self) -> &[String] {
        &self.dates
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn returns(&self) -> &Array2<f64> {
        &self.returns
    }

    pub fn n_rows(&self) -> usize {
        self.returns.nrows()
    }

    /// Return rows covered by `window`.
    pub fn window(&self, window: Window) -> ArrayView2<'_, f64> {
        self.returns.slice(s![window.start..window.end, ..])
    }

    /// Date label of the last row in `window`.
    pub fn end_date(&self, window: Window) -> &str {
        &self.dates[window.end - 1]
    }
}

/// Reads a price table, forward-filling gaps column by column.
pub fn load_prices<R: Read>(source: R) -> Result<PriceMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let header = reader.headers()?.clone();
    if header.len() < 2 {
        return Err(Error::Parse {
            line: 1,
            message: "header needs a date column and at least one ticker".into(),
        });
    }
    let tickers: Vec<String> = header.iter().skip(1).map(str::to_string).collect();

    let mut rows: Vec<(String, Vec<Option<f64>>)> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != header.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let date = record[0].to_string();
        if date.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty date".into(),
            });
        }
        let mut cells = Vec::with_capacity(tickers.len());
        for (k, field) in record.iter().skip(1).enumerate() {
            if field.is_empty() {
                cells.push(None);
                continue;
            }
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("cannot parse `{field}` for `{}`", tickers[k]),
            })?;
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::NonPositivePrice {
                    ticker: tickers[k].clone(),
                    date,
                    value,
                });
            }
            cells.push(Some(value));
        }
        rows.push((date, cells));
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }

    rows.sort_by(|a, b| a.0.cmp(&b.0));
    for w in rows.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::DuplicateDate {
                date: w[0].0.clone(),
            });
        }
    }

    let n_days = rows.len();
    let mut prices = Array2::<f64>::zeros((n_days, tickers.len()));
    for (t, (date, cells)) in rows.iter().enumerate() {
        for (k, cell) in cells.iter().enumerate() {
            prices[[t, k]] = match cell {
                Some(v) => *v,
                None if t == 0 => {
                    return Err(Error::LeadingGap {
                        ticker: tickers[k].clone(),
                        date: date.clone(),
                    })
                }
                None => prices[[t - 1, k]],
            };
        }
    }

    let dates = rows.into_iter().map(|(d, _)| d).collect();
    PriceMatrix::new(dates, tickers, prices)
}

/// `returns[t][k] = ln P[t+1][k] - ln P[t][k]`.
pub fn log_returns(pm: &PriceMatrix) -> ReturnMatrix {
    let p = pm.prices();
    let (t_days, n) = p.dim();
    let mut returns = Array2::<f64>::zeros((t_days - 1, n));
    for t in 0..t_days - 1 {
        for k in 0..n {
            returns[[t, k]] = p[[t + 1, k]].ln() - p[[t, k]].ln();
        }
    }
    ReturnMatrix {
        dates: pm.dates()[1..].to_vec(),
        tickers: pm.tickers().to_vec(),
        returns,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowScheme {
    /// Back-to-back windows of `tau` rows.
    NonOverlapping,
    /// Windows of `tau` rows whose end advances by `delta` rows.
    Rolling,
}

/// Half-open row range `[start, end)` into a [`ReturnMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Window {
    pub start: usize,
    pub end: usize,
}

impl Window {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowSchedule {
    pub scheme: WindowScheme,
    pub tau: usize,
    /// Shift between consecutive rolling windows; `None` for non-overlapping.
    pub delta: Option<usize>,
    pub windows: Vec<Window>,
}

/// Lays out windows over `n_returns` rows. Trailing partial windows are dropped.
pub fn make_schedule(
    n_returns: usize,
    scheme: WindowScheme,
    tau: usize,
    delta: usize,
) -> Result<WindowSchedule> {
    if tau < MIN_WINDOW {
        return Err(Error::Invalid(format!(
            "window length {tau} is below the minimum of {MIN_WINDOW}"
        )));
    }
    if tau > n_returns {
        return Err(Error::TooShort {
            what: "return rows for one window",
            needed: tau,
            got: n_returns,
        });
    }
    let (step, delta) = match scheme {
        WindowScheme::NonOverlapping => (tau, None),
        WindowScheme::Rolling => {
            if delta == 0 {
                return Err(Error::Invalid("rolling shift must be at least 1".into()));
            }
            (delta, Some(delta))
        }
    };
    let windows = (tau..=n_returns)
        .step_by(step)
        .map(|end| Window {
            start: end - tau,
            end,
        })
        .collect();
    Ok(WindowSchedule {
        scheme,
        tau,
        delta,
        windows,
    })
}
