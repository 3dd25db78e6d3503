//! Report emission: self-describing JSON records and plain CSV tables.
//!
//! Reruns with the same configuration and seed must emit byte-identical
//! files, so everything wall-clock flavored goes in a separate sidecar.

use crate::beta::BetaSumReport;
use crate::carleson::{BetaMdRow, PackingReport, ScanRow};
use crate::error::Result;
use crate::seminorm::AnalysisParams;
use serde::Serialize;
use std::io::Write;
use std::path::Path;

/// Self-describing record around a pointwise decay scan.
#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub schema_version: u32,
    pub point: Vec<f64>,
    pub max_level: u32,
    pub rows: Vec<ScanRow>,
    pub params: AnalysisParams,
}

/// Self-describing record around a beta-versus-md table.
#[derive(Clone, Debug, Serialize)]
pub struct BetaMdReport {
    pub schema_version: u32,
    pub depth: u32,
    pub quadrature_m: usize,
    pub quadrature_lines: usize,
    pub rows: Vec<BetaMdRow>,
    pub params: AnalysisParams,
}

/// Writes a pretty-printed JSON document with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| crate::error::Error::Parse(e.to_string()))?;
    file.write_all(text.as_bytes())?;
    file.write_all(b"\n")?;
    Ok(())
}

fn fmt(v: f64) -> String {
    format!("{v:?}")
}

pub fn packing_csv(report: &PackingReport) -> String {
    let mut out = String::from("level,bad_count,bad_volume\n");
    for l in &report.per_level {
        out.push_str(&format!("{},{},{}\n", l.level, l.bad_count, fmt(l.bad_volume)));
    }
    out
}

pub fn beta_sum_csv(report: &BetaSumReport) -> String {
    let mut out = String::from("level,cubes,sum\n");
    for l in &report.per_level {
        out.push_str(&format!("{},{},{}\n", l.level, l.cubes, fmt(l.sum)));
    }
    out
}

pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from("level,side,md\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.level, fmt(r.side), fmt(r.md)));
    }
    out
}

pub fn beta_md_csv(rows: &[BetaMdRow]) -> String {
    let mut out = String::from("cube,level,beta,md\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.cube,
            r.level,
            fmt(r.beta_lifted),
            fmt(r.md)
        ));
    }
    out
}

pub fn write_text(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content)?;
    Ok(())
}

/// Wall-clock metadata, isolated so the main reports stay reproducible.
pub fn write_sidecar(path: &Path) -> Result<()> {
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    std::fs::write(path, format!("wall_clock_unix_seconds={stamp}\n"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::carleson::PackingLevel;
    use crate::seminorm::AnalysisParams;

    #[test]
    fn packing_csv_has_expected_columns() {
        let report = PackingReport {
            schema_version: 1,
            delta: 0.25,
            total_bad_volume: 0.5,
            ratio: 0.25,
            per_level: vec![PackingLevel { level: 0, bad_count: 1, bad_volume: 0.5 }],
            depth: 0,
            l_hat: 1.0,
            l_spec: Some(1.0),
            shift_thirds: vec![0],
            md_params: AnalysisParams::auto(1),
        };
        let csv = packing_csv(&report);
        assert!(csv.starts_with("level,bad_count,bad_volume\n"));
        assert!(csv.contains("0,1,0.5\n"));
    }

    #[test]
    fn json_emission_is_deterministic() {
        let report = ScanRow { level: 3, side: 0.125, md: 0.01 };
        let dir = std::env::temp_dir().join("metricdiff-test-report");
        std::fs::create_dir_all(&dir).unwrap();
        let p1 = dir.join("a.json");
        let p2 = dir.join("b.json");
        write_json(&p1, &report).unwrap();
        write_json(&p2, &report).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
        std::fs::remove_file(&p1).ok();
        std::fs::remove_file(&p2).ok();
    }
}
