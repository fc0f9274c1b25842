use std::io::{Read, Write};

use rayon::prelude::*;

use super::{average_curvatures, CurvatureAverages, CurvatureKind, CurvatureOptions};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Network-average curvature per window, indexed by window end date.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurvatureSeries {
    pub window_end_dates: Vec<String>,
    pub or: Vec<f64>,
    pub fr: Vec<f64>,
    pub mr: Vec<f64>,
    pub hr: Vec<f64>,
}

impl CurvatureSeries {
    pub fn len(&self) -> usize {
        self.window_end_dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window_end_dates.is_empty()
    }

    pub fn get(&self, kind: CurvatureKind) -> &[f64] {
        match kind {
            CurvatureKind::Or => &self.or,
            CurvatureKind::Fr => &self.fr,
            CurvatureKind::Mr => &self.mr,
            CurvatureKind::Hr => &self.hr,
        }
    }

    pub fn push(&mut self, date: String, avg: CurvatureAverages) {
        self.window_end_dates.push(date);
        self.or.push(avg.or);
        self.fr.push(avg.fr);
        self.mr.push(avg.mr);
        self.hr.push(avg.hr);
    }
}

/// Averages every window's network; window failures carry the window date.
pub fn curvature_series<G>(end_dates: &[String], networks: &[G], opts: &CurvatureOptions) -> Result<CurvatureSeries>
where
    G: AsRef<Graph> + Sync,
{
    if end_dates.len() != networks.len() {
        return Err(Error::Invalid(format!(
            "{} window dates for {} networks",
            end_dates.len(),
            networks.len()
        )));
    }
    let averages: Vec<Result<CurvatureAverages>> = networks
        .par_iter()
        .zip(end_dates.par_iter())
        .map(|(g, date)| average_curvatures(g.as_ref(), opts).map_err(|e| e.in_window(date)))
        .collect();
    let mut series = CurvatureSeries::default();
    for (avg, date) in averages.into_iter().zip(end_dates) {
        series.push(date.clone(), avg?);
    }
    Ok(series)
}

/// `window_end_date,or,fr,mr,hr`, values in shortest round-trip form.
pub fn write_series_csv<W: Write>(series: &CurvatureSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["window_end_date", "or", "fr", "mr", "hr"])?;
    for i in 0..series.len() {
        w.write_record([
            series.window_end_dates[i].clone(),
            series.or[i].to_string(),
            series.fr[i].to_string(),
            series.mr[i].to_string(),
            series.hr[i].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_series_csv<R: Read>(input: R) -> Result<CurvatureSeries> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = r.headers()?.clone();
    let expected = ["window_end_date", "or", "fr", "mr", "hr"];
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`", expected.join(",")),
        });
    }
    let mut series = CurvatureSeries::default();
    for record in r.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let num = |k: usize| -> Result<f64> {
            record[k].parse().map_err(|_| Error::Parse {
                line,
                message: format!("cannot parse `{}`", &record[k]),
            })
        };
        let avg = CurvatureAverages {
            or: num(1)?,
            fr: num(2)?,
            mr: num(3)?,
            hr: num(4)?,
        };
        series.push(record[0].to_string(), avg);
    }
    Ok(series)
}
