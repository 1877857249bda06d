//! Metrics CSV: one header row, one row per recorded time, LF endings,
//! every value in scientific notation with 17 significant digits.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::{column_names, pair_count, row_values, MetricsRecord, MetricsSeries};

/// Renders the series as CSV text.
pub fn format_metrics_csv(series: &MetricsSeries<f64>) -> Result<String> {
    if series.is_empty() {
        return Err(Error::Csv("refusing to write an empty series".into()));
    }
    let mut out = column_names(series.neurons()).join(",");
    out.push('\n');
    for rec in series.records() {
        let row: Vec<String> = row_values(rec).iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn write_metrics_csv(series: &MetricsSeries<f64>, path: &Path) -> Result<()> {
    fs::write(path, format_metrics_csv(series)?)?;
    Ok(())
}

/// Parses text produced by [`format_metrics_csv`].
pub fn parse_metrics_csv(text: &str) -> Result<MetricsSeries<f64>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Csv("empty file".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    // 1 + 4m + 2 + m(m-1)/2 columns; solve for m.
    let m = (2..=4096)
        .find(|&m| 1 + 4 * m + 2 + pair_count(m) == cols.len())
        .ok_or_else(|| Error::Csv(format!("{} columns match no neuron count", cols.len())))?;
    let expected = column_names(m);
    if cols != expected {
        return Err(Error::Csv("header does not match the metrics layout".into()));
    }
    let mut series = MetricsSeries::new(m);
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let vals = line
            .split(',')
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Csv(format!("row {}: {e}", lineno + 2)))?;
        if vals.len() != cols.len() {
            return Err(Error::Csv(format!(
                "row {} has {} fields, header has {}",
                lineno + 2,
                vals.len(),
                cols.len()
            )));
        }
        let block = |k: usize| vals[1 + k * m..1 + (k + 1) * m].to_vec();
        let base = 1 + 4 * m;
        series.push(MetricsRecord {
            t: vals[0],
            u_norm: block(0),
            w_norm: block(1),
            rho_norm: block(2),
            g_norm_sq: block(3),
            total_energy: vals[base],
            u_l4_total: vals[base + 1],
            pairs: vals[base + 2..].to_vec(),
        })?;
    }
    Ok(series)
}

pub fn read_metrics_csv(path: &Path) -> Result<MetricsSeries<f64>> {
    parse_metrics_csv(&fs::read_to_string(path)?)
}
