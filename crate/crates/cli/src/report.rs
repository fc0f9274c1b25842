//! Metrics tables: rows MAE, MSE, R²; one column per curvature kind in the
//! order OR, MR, HR, FR; one block per model.

use curvnet_core::curvature::CurvatureKind;
use curvnet_core::forecaster::{ForecastReport, Metrics, ModelTag};

pub const COLUMN_ORDER: [CurvatureKind; 4] = [CurvatureKind::Or, CurvatureKind::Mr, CurvatureKind::Hr, CurvatureKind::Fr];
pub const ROWS: [&str; 3] = ["MAE", "MSE", "R2"];

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsTable {
    pub model: ModelTag,
    pub columns: Vec<(CurvatureKind, Metrics)>,
}

impl MetricsTable {
    pub fn from_report(report: &ForecastReport) -> Self {
        let columns = COLUMN_ORDER
            .iter()
            .filter_map(|&k| report.get(k).map(|f| (k, f.forecast.metrics)))
            .collect();
        Self {
            model: report.model,
            columns,
        }
    }

    /// `None` for an undefined R².
    pub fn cell(&self, row: usize, col: usize) -> Option<f64> {
        let m = &self.columns[col].1;
        match row {
            0 => Some(m.mae),
            1 => Some(m.mse),
            _ => m.r2,
        }
    }
}

fn header(kind: CurvatureKind) -> String {
    kind.as_str().to_ascii_uppercase()
}

/// `model,metric,<kinds...>`, values in shortest round-trip form, `NA` when undefined.
pub fn render_csv(tables: &[MetricsTable]) -> String {
    let mut out = String::new();
    for (i, t) in tables.iter().enumerate() {
        if i == 0 || tables[i - 1].columns.iter().map(|c| c.0).ne(t.columns.iter().map(|c| c.0)) {
            let cols: Vec<String> = t.columns.iter().map(|c| header(c.0)).collect();
            out.push_str(&format!("model,metric,{}\n", cols.join(",")));
        }
        for (r, name) in ROWS.iter().enumerate() {
            let cells: Vec<String> = (0..t.columns.len())
                .map(|c| t.cell(r, c).map_or("NA".to_string(), |v| v.to_string()))
                .collect();
            out.push_str(&format!("{},{name},{}\n", t.model, cells.join(",")));
        }
    }
    out
}

/// Human-readable blocks with right-aligned columns.
pub fn render_text(tables: &[MetricsTable]) -> String {
    let mut out = String::new();
    for (i, t) in tables.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!("{}\n", t.model));
        out.push_str(&format!("{:<6}", "metric"));
        for c in &t.columns {
            out.push_str(&format!("{:>14}", header(c.0)));
        }
        out.push('\n');
        for (r, name) in ROWS.iter().enumerate() {
            out.push_str(&format!("{name:<6}"));
            for c in 0..t.columns.len() {
                let cell = t.cell(r, c).map_or("n/a".to_string(), |v| format!("{v:.6}"));
                out.push_str(&format!("{cell:>14}"));
            }
            out.push('\n');
        }
    }
    out
}
