//! Multilevel discrete wavelet transform (Mallat pyramid) with per-band
//! time-domain reconstruction and threshold denoising.
//!
//! Analysis at each level is `a[o] = sum_j h[j] x[2o+1-j]` (and likewise
//! with the high-pass filter for `d`), evaluated for every `o` whose filter
//! window touches the signal, with symmetric half-sample extension at both
//! ends. For orthogonal filters the adjoint of that operator reconstructs the
//! signal exactly for any length, so no power-of-two padding is needed.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveletFamily {
    Haar,
    /// Daubechies, 2 vanishing moments (4 taps).
    Db2,
    /// Daubechies, 4 vanishing moments (8 taps).
    Db4,
    /// Symlet, 4 vanishing moments (8 taps).
    Sym4,
}

const HAAR: [f64; 2] = [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2];

const DB2: [f64; 4] = [
    -0.129_409_522_551_260_37,
    0.224_143_868_042_013_4,
    0.836_516_303_737_807_9,
    0.482_962_913_144_534_16,
];

const DB4: [f64; 8] = [
    -0.010_597_401_784_997_278,
    0.032_883_011_666_982_945,
    0.030_841_381_835_986_965,
    -0.187_034_811_718_881_14,
    -0.027_983_769_416_983_85,
    0.630_880_767_929_590_4,
    0.714_846_570_552_541_5,
    0.230_377_813_308_855_23,
];

const SYM4: [f64; 8] = [
    -0.075_765_714_789_273_33,
    -0.029_635_527_645_998_51,
    0.497_618_667_632_015_45,
    0.803_738_751_805_916_1,
    0.297_857_795_605_277_36,
    -0.099_219_543_576_847_22,
    -0.012_603_967_262_037_833,
    0.032_223_100_604_042_7,
];

impl WaveletFamily {
    /// Low-pass decomposition filter.
    pub fn dec_lo(self) -> &'static [f64] {
        match self {
            WaveletFamily::Haar => &HAAR,
            WaveletFamily::Db2 => &DB2,
            WaveletFamily::Db4 => &DB4,
            WaveletFamily::Sym4 => &SYM4,
        }
    }

    /// High-pass decomposition filter, the quadrature mirror of [`Self::dec_lo`].
    pub fn dec_hi(self) -> Vec<f64> {
        let h = self.dec_lo();
        let f = h.len();
        (0..f)
            .map(|k| if k % 2 == 0 { -h[f - 1 - k] } else { h[f - 1 - k] })
            .collect()
    }

    pub fn filter_len(self) -> usize {
        self.dec_lo().len()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            WaveletFamily::Haar => "haar",
            WaveletFamily::Db2 => "db2",
            WaveletFamily::Db4 => "db4",
            WaveletFamily::Sym4 => "sym4",
        }
    }
}

impl fmt::Display for WaveletFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WaveletFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "haar" | "db1" => Ok(WaveletFamily::Haar),
            "db2" => Ok(WaveletFamily::Db2),
            "db4" => Ok(WaveletFamily::Db4),
            "sym4" => Ok(WaveletFamily::Sym4),
            other => Err(Error::Invalid(format!("unknown wavelet family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WaveletSpec {
    pub family: WaveletFamily,
    pub levels: usize,
}

impl Default for WaveletSpec {
    fn default() -> Self {
        Self {
            family: WaveletFamily::Db4,
            levels: 4,
        }
    }
}

impl WaveletSpec {
    /// Shortest series this spec can decompose: `2^levels`.
    pub fn min_length(&self) -> usize {
        1usize.checked_shl(self.levels as u32).unwrap_or(usize::MAX)
    }

    pub fn validate(&self, series_len: usize) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::Invalid("wavelet levels must be at least 1".into()));
        }
        if series_len < self.min_length() {
            return Err(Error::TooShort {
                what: "points for the requested wavelet levels",
                needed: self.min_length(),
                got: series_len,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdMode {
    #[default]
    Soft,
    Hard,
}

impl FromStr for ThresholdMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "soft" => Ok(ThresholdMode::Soft),
            "hard" => Ok(ThresholdMode::Hard),
            other => Err(Error::Invalid(format!("unknown threshold mode `{other}`"))),
        }
    }
}

/// Coefficient bands plus their full-length time-domain reconstructions.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletDecomposition {
    spec: WaveletSpec,
    original_length: usize,
    /// Input length at each level: `[N, N_1, ..., N_{L-1}]`.
    level_lengths: Vec<usize>,
    approx_coeffs: Vec<f64>,
    /// Level 1 (finest) first.
    detail_coeffs: Vec<Vec<f64>>,
    approximation: Vec<f64>,
    details: Vec<Vec<f64>>,
}

impl WaveletDecomposition {
    pub fn spec(&self) -> WaveletSpec {
        self.spec
    }

    pub fn original_length(&self) -> usize {
        self.original_length
    }

    /// Smooth level-L component, full length.
    pub fn approximation(&self) -> &[f64] {
        &self.approximation
    }

    /// Detail components, full length, highest frequency first.
    pub fn details(&self) -> &[Vec<f64>] {
        &self.details
    }

    pub fn approx_coeffs(&self) -> &[f64] {
        &self.approx_coeffs
    }

    pub fn detail_coeffs(&self) -> &[Vec<f64>] {
        &self.detail_coeffs
    }

    /// `("approx", a), ("d1", d1), ...`: every band as a named sub-series.
    pub fn sub_series(&self) -> Vec<(String, &[f64])> {
        let mut out = vec![("approx".to_string(), self.approximation.as_slice())];
        for (i, d) in self.details.iter().enumerate() {
            out.push((format!("d{}", i + 1), d.as_slice()));
        }
        out
    }

    /// Replaces detail sub-series `level` (1-based) with zeros, keeping coefficients in sync.
    pub fn zero_detail(&mut self, level: usize) {
        if let Some(c) = self.detail_coeffs.get_mut(level - 1) {
            c.iter_mut().for_each(|x| *x = 0.0);
            self.details[level - 1].iter_mut().for_each(|x| *x = 0.0);
        }
    }

    /// Energy (sum of squares) of the detail coefficients.
    pub fn detail_energy(&self) -> f64 {
        self.detail_coeffs.iter().flatten().map(|x| x * x).sum()
    }

    /// `t,approx,d1,...,dL`, one row per time step.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string(), "approx".to_string()];
        header.extend((1..=self.details.len()).map(|i| format!("d{i}")));
        w.write_record(&header)?;
        for t in 0..self.original_length {
            let mut row = vec![t.to_string(), self.approximation[t].to_string()];
            row.extend(self.details.iter().map(|d| d[t].to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Symmetric half-sample extension: `x[-1] = x[0]`, `x[n] = x[n-1]`, period `2n`.
fn mirror(k: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = k.rem_euclid(period) as usize;
    if m < n {
        m
    } else {
        2 * n - 1 - m
    }
}

fn analysis(x: &[f64], filter: &[f64]) -> Vec<f64> {
    let n = x.len();
    let f = filter.len();
    let out_len = (n + f - 1) / 2;
    (0..out_len)
        .map(|o| {
            let centre = (2 * o + 1) as isize;
            filter
                .iter()
                .enumerate()
                .map(|(j, h)| h * x[mirror(centre - j as isize, n)])
                .sum()
        })
        .collect()
}

/// Adjoint of [`analysis`] for both bands, restricted to `out_len` samples.
fn synthesis(approx: &[f64], detail: &[f64], lo: &[f64], hi: &[f64], out_len: usize) -> Vec<f64> {
    let f = lo.len();
    let mut x = vec![0.0; out_len];
    for (n, xn) in x.iter_mut().enumerate() {
        // o ranges over 2o+1-n in [0, f-1]
        let o_min = n.saturating_sub(1).div_ceil(2);
        let o_max = (n + f - 2) / 2;
        let mut acc = 0.0;
        for o in o_min..=o_max.min(approx.len().saturating_sub(1)) {
            let k = 2 * o + 1 - n;
            if k < f {
                acc += lo[k] * approx[o] + hi[k] * detail[o];
            }
        }
        *xn = acc;
    }
    x
}

/// Mallat decomposition followed by full-length reconstruction of each band.
pub fn dwt_multilevel(series: &[f64], spec: &WaveletSpec) -> Result<WaveletDecomposition> {
    spec.validate(series.len())?;
    if let Some(index) = series.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let lo = spec.family.dec_lo();
    let hi = spec.family.dec_hi();
    let mut level_lengths = Vec::with_capacity(spec.levels);
    let mut detail_coeffs = Vec::with_capacity(spec.levels);
    let mut current = series.to_vec();
    for _ in 0..spec.levels {
        level_lengths.push(current.len());
        detail_coeffs.push(analysis(&current, &hi));
        current = analysis(&current, lo);
    }
    let mut dec = WaveletDecomposition {
        spec: *spec,
        original_length: series.len(),
        level_lengths,
        approx_coeffs: current,
        detail_coeffs,
        approximation: Vec::new(),
        details: Vec::new(),
    };
    rebuild_bands(&mut dec);
    Ok(dec)
}

/// Recomputes the time-domain sub-series from the stored coefficients.
fn rebuild_bands(dec: &mut WaveletDecomposition) {
    let lo = dec.spec.family.dec_lo();
    let hi = dec.spec.family.dec_hi();
    let levels = dec.detail_coeffs.len();

    // Inverse pyramid from `level` (1-based) down to the original length.
    let lift = |mut approx: Vec<f64>, mut detail: Vec<f64>, level: usize| -> Vec<f64> {
        for l in (0..level).rev() {
            let x = synthesis(&approx, &detail, lo, &hi, dec.level_lengths[l]);
            if l > 0 {
                detail = vec![0.0; dec.detail_coeffs[l - 1].len()];
            }
            approx = x;
        }
        approx
    };

    dec.approximation = lift(
        dec.approx_coeffs.clone(),
        vec![0.0; dec.approx_coeffs.len()],
        levels,
    );
    dec.details = (1..=levels)
        .map(|level| {
            let d = dec.detail_coeffs[level - 1].clone();
            lift(vec![0.0; d.len()], d, level)
        })
        .collect();
}

/// Pointwise sum of the approximation and every detail sub-series.
pub fn reconstruct(dec: &WaveletDecomposition) -> Vec<f64> {
    let mut x = dec.approximation.clone();
    for d in &dec.details {
        for (xi, di) in x.iter_mut().zip(d) {
            *xi += di;
        }
    }
    x.truncate(dec.original_length);
    x
}

pub fn threshold_coefficient(w: f64, threshold: f64, mode: ThresholdMode) -> f64 {
    match mode {
        ThresholdMode::Hard => {
            if w.abs() <= threshold {
                0.0
            } else {
                w
            }
        }
        ThresholdMode::Soft => w.signum() * (w.abs() - threshold).max(0.0),
    }
}

/// Thresholds the detail coefficients and rebuilds the sub-series; the
/// approximation is left untouched.
pub fn denoise(dec: &WaveletDecomposition, threshold: f64, mode: ThresholdMode) -> Result<WaveletDecomposition> {
    if !(threshold >= 0.0) {
        return Err(Error::Invalid(format!("threshold {threshold} must be non-negative")));
    }
    let mut out = dec.clone();
    for band in &mut out.detail_coeffs {
        for w in band.iter_mut() {
            *w = threshold_coefficient(*w, threshold, mode);
        }
    }
    rebuild_bands(&mut out);
    Ok(out)
}

/// Universal threshold `sigma * sqrt(2 ln N)` with `sigma` estimated from the
/// median absolute finest-level detail coefficient.
pub fn universal_threshold(dec: &WaveletDecomposition) -> f64 {
    let mut abs: Vec<f64> = dec.detail_coeffs[0].iter().map(|x| x.abs()).collect();
    if abs.is_empty() {
        return 0.0;
    }
    abs.sort_by(|a, b| a.total_cmp(b));
    let mid = abs.len() / 2;
    let median = if abs.len() % 2 == 0 {
        (abs[mid - 1] + abs[mid]) / 2.0
    } else {
        abs[mid]
    };
    let sigma = median / 0.6745;
    sigma * (2.0 * (dec.original_length as f64).ln()).sqrt()
}

/// Decompose, threshold, reconstruct.
pub fn denoise_series(series: &[f64], spec: &WaveletSpec, threshold: Option<f64>, mode: ThresholdMode) -> Result<Vec<f64>> {
    let dec = dwt_multilevel(series, spec)?;
    let t = threshold.unwrap_or_else(|| universal_threshold(&dec));
    Ok(reconstruct(&denoise(&dec, t, mode)?))
}
