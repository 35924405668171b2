//! Result table: one schema for every mode, rendered as CSV with a
//! `#`-prefixed config header or as JSON lines with a leading config record.

use serde::Serialize;
use std::io::Write;

use crate::config::{ExperimentConfig, OutputFormat};

pub const COLUMNS: [&str; 14] = [
    "mode",
    "b",
    "rho",
    "alpha",
    "lambda",
    "mu",
    "e_over_n0_db",
    "bound_lower",
    "bound_upper_1round",
    "bound_upper_2round",
    "mc_mse",
    "mc_stderr",
    "avg_energy",
    "retx_rate",
];

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Row {
    pub mode: String,
    pub b: u32,
    pub rho: Option<f64>,
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub e_over_n0_db: f64,
    pub bound_lower: Option<f64>,
    pub bound_upper_1round: Option<f64>,
    pub bound_upper_2round: Option<f64>,
    pub mc_mse: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub avg_energy: Option<f64>,
    pub retx_rate: Option<f64>,
}

impl Row {
    pub fn empty(mode: &str, b: u32, e_over_n0_db: f64) -> Row {
        Row {
            mode: mode.to_string(),
            b,
            rho: None,
            alpha: None,
            lambda: None,
            mu: None,
            e_over_n0_db,
            bound_lower: None,
            bound_upper_1round: None,
            bound_upper_2round: None,
            mc_mse: None,
            mc_stderr: None,
            avg_energy: None,
            retx_rate: None,
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => x.to_string(),
        None => "NA".to_string(),
    }
}

/// Deterministic output order: (mode, b, rho, e_over_n0_db).
pub fn sort_rows(rows: &mut [Row]) {
    rows.sort_by(|a, b| {
        a.mode
            .cmp(&b.mode)
            .then(a.b.cmp(&b.b))
            .then(
                a.rho
                    .unwrap_or(f64::NEG_INFINITY)
                    .total_cmp(&b.rho.unwrap_or(f64::NEG_INFINITY)),
            )
            .then(a.e_over_n0_db.total_cmp(&b.e_over_n0_db))
    });
}

pub fn write_table<W: Write>(
    w: &mut W,
    cfg: &ExperimentConfig,
    rows: &[Row],
) -> std::io::Result<()> {
    match cfg.format {
        OutputFormat::Csv => write_csv(w, cfg, rows),
        OutputFormat::Jsonl => write_jsonl(w, cfg, rows),
    }
}

fn write_csv<W: Write>(w: &mut W, cfg: &ExperimentConfig, rows: &[Row]) -> std::io::Result<()> {
    writeln!(w, "# jscc {}", env!("CARGO_PKG_VERSION"))?;
    for (k, v) in cfg.header_entries() {
        writeln!(w, "# {k} = {v}")?;
    }
    writeln!(w, "{}", COLUMNS.join(","))?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.mode,
            r.b,
            fmt_opt(r.rho),
            fmt_opt(r.alpha),
            fmt_opt(r.lambda),
            fmt_opt(r.mu),
            r.e_over_n0_db,
            fmt_opt(r.bound_lower),
            fmt_opt(r.bound_upper_1round),
            fmt_opt(r.bound_upper_2round),
            fmt_opt(r.mc_mse),
            fmt_opt(r.mc_stderr),
            fmt_opt(r.avg_energy),
            fmt_opt(r.retx_rate),
        )?;
    }
    Ok(())
}

fn write_jsonl<W: Write>(w: &mut W, cfg: &ExperimentConfig, rows: &[Row]) -> std::io::Result<()> {
    let meta = serde_json::json!({
        "tool": "jscc",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg.header_entries(),
    });
    writeln!(w, "{}", serde_json::to_string(&meta)?)?;
    for r in rows {
        writeln!(w, "{}", serde_json::to_string(r)?)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_schema_is_stable() {
        let cfg = ExperimentConfig::default();
        let mut rows = vec![
            Row::empty("bounds", 4, 3.0),
            Row::empty("bounds", 4, 1.0),
            Row::empty("bounds", 2, 2.0),
        ];
        sort_rows(&mut rows);
        assert_eq!(rows[0].b, 2);
        assert_eq!(rows[1].e_over_n0_db, 1.0);
        let mut buf = Vec::new();
        write_table(&mut buf, &cfg, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text
            .lines()
            .find(|l| !l.starts_with('#'))
            .unwrap();
        assert_eq!(header, COLUMNS.join(","));
        let first = text.lines().find(|l| l.starts_with("bounds")).unwrap();
        assert_eq!(first.split(',').count(), COLUMNS.len());
        assert!(first.contains("NA"));
    }

    #[test]
    fn jsonl_rows_parse_back() {
        let cfg = ExperimentConfig {
            format: OutputFormat::Jsonl,
            ..ExperimentConfig::default()
        };
        let rows = vec![Row::empty("mc", 4, 10.0)];
        let mut buf = Vec::new();
        write_table(&mut buf, &cfg, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let meta: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
        assert_eq!(meta["tool"], "jscc");
        let row: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
        assert_eq!(row["b"], 4);
        assert!(row["mc_mse"].is_null());
    }
}
