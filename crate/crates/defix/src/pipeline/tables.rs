//! Table artifacts: documented column schemas, CSV and text rendering.
//!
//! Every table is materialised as `<out>/<table_id>.csv` (machine-readable,
//! full precision) and `<out>/<table_id>.txt` (aligned text with stars and
//! t-statistics in parentheses).

use crate::econometrics::{significance_stars, CorrMatrix, PanelResult, RegressionResult};
use crate::stats::SummaryRow;

/// Column set shared by every regression-style table.
pub const REGRESSION_COLUMNS: &[&str] = &[
    "table_id", "row", "term", "coef", "se", "t", "p", "stars", "ci_low", "ci_high", "r2",
    "r2_between", "n",
];

/// Column set for correlation matrices.
pub const CORR_COLUMNS: &[&str] = &["table_id", "row", "col", "r", "t", "p", "stars", "n"];

/// Column set for the summary-statistics table.
pub const SUMMARY_COLUMNS: &[&str] = &[
    "table_id", "panel", "frequency", "variable", "units", "mean", "sd", "max", "min", "sharpe",
    "skewness", "kurtosis", "durbin_watson", "n",
];

/// Column set for the cumulative-returns export.
pub const FIG1_COLUMNS: &[&str] =
    &["date", "cumret_defix", "cumret_btc", "cumret_eth", "cumret_crix"];

/// Column set for the log-size scatter export.
pub const FIG2_COLUMNS: &[&str] = &["symbol", "date", "ln_tvl", "ln_mcap"];

/// Documented schema per table id.
pub fn schema_for(table_id: &str) -> Option<&'static [&'static str]> {
    match table_id {
        "t1" => Some(SUMMARY_COLUMNS),
        "t2" | "t6" => Some(CORR_COLUMNS),
        "t3" | "t4" | "t5" | "t7" | "t8" | "t9" | "t10" | "t11" | "t12" | "t13" | "t14"
        | "t15" | "t16" | "d1" | "d2" => Some(REGRESSION_COLUMNS),
        "fig1" => Some(FIG1_COLUMNS),
        "fig2" => Some(FIG2_COLUMNS),
        _ => None,
    }
}

/// Every table id the pipeline can emit.
pub const SCHEMA_IDS: &[&str] = &[
    "t1", "t2", "t3", "t4", "t5", "t6", "t7", "t8", "t9", "t10", "t11", "t12", "t13", "t14",
    "t15", "t16", "d1", "d2", "fig1", "fig2",
];

/// A fully materialised table: header, pre-formatted cells, footnotes.
#[derive(Debug, Clone)]
pub struct TableArtifact {
    pub table_id: String,
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Rendered into the text output only.
    pub notes: Vec<String>,
}

/// One row of a regression table before formatting.
#[derive(Debug, Clone)]
pub struct TableRow {
    pub row: String,
    pub term: String,
    pub coef: f64,
    pub se: f64,
    pub t: f64,
    pub p: f64,
    pub ci: Option<(f64, f64)>,
    pub r2: f64,
    pub r2_between: Option<f64>,
    pub n: usize,
}

/// Full-precision, locale-free float cell. Empty for missing.
pub fn csv_float(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else {
        String::new()
    }
}

/// Three-decimal rendering used by the text tables (summary statistics).
pub fn format_3dp(v: f64) -> String {
    format!("{v:.3}")
}

impl TableArtifact {
    pub fn new(table_id: &str, title: &str, columns: &[&str]) -> Self {
        TableArtifact {
            table_id: table_id.to_string(),
            title: title.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push_regression_row(&mut self, row: TableRow) {
        debug_assert_eq!(self.columns.len(), REGRESSION_COLUMNS.len());
        let (ci_low, ci_high) = match row.ci {
            Some((lo, hi)) => (csv_float(lo), csv_float(hi)),
            None => (String::new(), String::new()),
        };
        self.rows.push(vec![
            self.table_id.clone(),
            row.row,
            row.term,
            csv_float(row.coef),
            csv_float(row.se),
            csv_float(row.t),
            csv_float(row.p),
            significance_stars(row.p).to_string(),
            ci_low,
            ci_high,
            csv_float(row.r2),
            row.r2_between.map(csv_float).unwrap_or_default(),
            row.n.to_string(),
        ]);
    }

    /// Append every reported term of one fitted model.
    pub fn push_fit(&mut self, row_label: &str, fit: &RegressionResult) {
        for j in 0..fit.names.len() {
            self.push_regression_row(TableRow {
                row: row_label.to_string(),
                term: fit.names[j].clone(),
                coef: fit.coef[j],
                se: fit.se[j],
                t: fit.t[j],
                p: fit.p[j],
                ci: Some((fit.ci_low[j], fit.ci_high[j])),
                r2: fit.r2,
                r2_between: None,
                n: fit.n,
            });
        }
    }

    /// Append every reported term of one panel fit.
    pub fn push_panel_fit(&mut self, row_label: &str, fit: &PanelResult) {
        for j in 0..fit.names.len() {
            self.push_regression_row(TableRow {
                row: row_label.to_string(),
                term: fit.names[j].clone(),
                coef: fit.coef[j],
                se: fit.se[j],
                t: fit.t[j],
                p: fit.p[j],
                ci: Some((fit.ci_low[j], fit.ci_high[j])),
                r2: fit.r2,
                r2_between: Some(fit.r2_between),
                n: fit.n,
            });
        }
        for w in &fit.warnings {
            self.notes.push(w.clone());
        }
    }

    pub fn push_summary_row(
        &mut self,
        panel: &str,
        frequency: &str,
        variable: &str,
        units: &str,
        row: &SummaryRow,
    ) {
        debug_assert_eq!(self.columns.len(), SUMMARY_COLUMNS.len());
        self.rows.push(vec![
            self.table_id.clone(),
            panel.to_string(),
            frequency.to_string(),
            variable.to_string(),
            units.to_string(),
            csv_float(row.mean),
            csv_float(row.sd),
            csv_float(row.max),
            csv_float(row.min),
            row.sharpe.map(csv_float).unwrap_or_default(),
            csv_float(row.skewness),
            csv_float(row.kurtosis_excess),
            csv_float(row.durbin_watson),
            row.n.to_string(),
        ]);
    }

    /// Lower-triangular correlation rows (diagonal included).
    pub fn push_corr_matrix(&mut self, m: &CorrMatrix) {
        debug_assert_eq!(self.columns.len(), CORR_COLUMNS.len());
        for i in 0..m.labels.len() {
            for j in 0..=i {
                let t = if i == j {
                    String::new()
                } else {
                    let (t, _) = crate::econometrics::pearson_significance(m.r[i][j], m.n[i][j]);
                    csv_float(t)
                };
                self.rows.push(vec![
                    self.table_id.clone(),
                    m.labels[i].clone(),
                    m.labels[j].clone(),
                    csv_float(m.r[i][j]),
                    t,
                    if i == j { String::new() } else { csv_float(m.p[i][j]) },
                    m.stars[i][j].clone(),
                    m.n[i][j].to_string(),
                ]);
            }
        }
    }
}

/// Render the artifact as CSV (header + rows, `\n` line endings).
pub fn render_csv(table: &TableArtifact) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(&table.columns).expect("in-memory write");
    for row in &table.rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

/// Render the artifact as an aligned text table.
pub fn render_text(table: &TableArtifact) -> String {
    let mut widths: Vec<usize> = table.columns.iter().map(|c| c.len()).collect();
    for row in &table.rows {
        for (i, cell) in row.iter().enumerate() {
            let cell = trim_cell(cell);
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    out.push_str(&format!("{}  [{}]\n", table.title, table.table_id));
    let header: Vec<String> = table
        .columns
        .iter()
        .enumerate()
        .map(|(i, c)| format!("{:w$}", c, w = widths[i]))
        .collect();
    out.push_str(&header.join("  "));
    out.push('\n');
    out.push_str(&"-".repeat(header.join("  ").len()));
    out.push('\n');
    for row in &table.rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{:w$}", trim_cell(c), w = widths[i]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    for note in &table.notes {
        out.push_str(&format!("note: {note}\n"));
    }
    out
}

/// Shorten long float cells for the text rendering.
fn trim_cell(cell: &str) -> String {
    match cell.parse::<f64>() {
        Ok(v) if cell.contains('.') && cell.len() > 10 => format!("{v:.4}"),
        _ => cell.to_string(),
    }
}
