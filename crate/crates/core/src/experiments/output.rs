//! Result files.
//!
//! `results.csv` holds one row per run; `aggregate.csv` holds the mean and
//! standard error per `(case, scheme, A/lambda)`, skipping failed runs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::config::{Case, Scheme};
use crate::experiments::sweep::ResultRow;

pub const RESULTS_HEADER: &str =
    "case,scheme,A_over_lambda,trial_seed,metric_name,metric_value,iterations,residual,wall_time_ms";
pub const AGGREGATE_HEADER: &str = "case,scheme,A_over_lambda,mean,stderr,n";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    /// One JSON object per line.
    JsonLines,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub case: Case,
    pub scheme: Scheme,
    #[serde(rename = "A_over_lambda")]
    pub a_over_lambda: f64,
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

/// Mean and standard error (sample standard deviation over `sqrt(n)`) of the
/// successful rows, grouped in first-appearance order.
pub fn aggregate(rows: &[ResultRow]) -> Vec<AggregateRow> {
    let mut groups: Vec<((Case, Scheme, f64), Vec<f64>)> = Vec::new();
    for row in rows.iter().filter(|r| !r.is_error() && r.metric_value.is_finite()) {
        let key = (row.case, row.scheme, row.a_over_lambda);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, vals)) => vals.push(row.metric_value),
            None => groups.push((key, vec![row.metric_value])),
        }
    }
    groups
        .into_iter()
        .map(|((case, scheme, a_over_lambda), vals)| {
            let n = vals.len();
            let mean = vals.iter().sum::<f64>() / n as f64;
            let stderr = if n > 1 {
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            } else {
                0.0
            };
            AggregateRow {
                case,
                scheme,
                a_over_lambda,
                mean,
                stderr,
                n,
            }
        })
        .collect()
}

fn csv_line(row: &ResultRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{:.3}",
        row.case,
        row.scheme,
        row.a_over_lambda,
        row.trial_seed,
        row.metric_name,
        row.metric_value,
        row.iterations,
        row.residual,
        row.wall_time_ms
    )
}

/// Render rows as CSV text, header included.
pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&csv_line(row));
        out.push('\n');
    }
    out
}

pub fn aggregate_csv(aggs: &[AggregateRow]) -> String {
    let mut out = String::from(AGGREGATE_HEADER);
    out.push('\n');
    for a in aggs {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            a.case, a.scheme, a.a_over_lambda, a.mean, a.stderr, a.n
        ));
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(contents.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Write `results.csv` (or `results.jsonl`) and `aggregate.csv` into
/// `out_dir`, creating it if needed. Returns the two paths.
pub fn emit_results(rows: &[ResultRow], out_dir: &Path, format: OutputFormat) -> Result<(PathBuf, PathBuf)> {
    if rows.is_empty() {
        return Err(Error::Precondition("no result rows to write".into()));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let results_path = match format {
        OutputFormat::Csv => {
            let p = out_dir.join("results.csv");
            write_file(&p, &results_csv(rows))?;
            p
        }
        OutputFormat::JsonLines => {
            let p = out_dir.join("results.jsonl");
            let mut text = String::new();
            for row in rows {
                text.push_str(&serde_json::to_string(row).map_err(|e| Error::Config(e.to_string()))?);
                text.push('\n');
            }
            write_file(&p, &text)?;
            p
        }
    };
    let agg_path = out_dir.join("aggregate.csv");
    write_file(&agg_path, &aggregate_csv(&aggregate(rows)))?;
    Ok((results_path, agg_path))
}
