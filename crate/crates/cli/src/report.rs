//! Report emission: JSON-lines records, RFC-4180 CSV tables and a
//! human-readable summary. CSV content is a pure function of the metrics so
//! reruns with the same config and seed are byte-identical; wall time lives
//! only in the JSONL records.

use anyhow::{bail, Context, Result};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    ReportOnly,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::ReportOnly => "report-only",
        }
    }
}

/// One appended result row of an experiment run.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRecord {
    pub experiment: String,
    pub claim: String,
    pub params: BTreeMap<String, String>,
    pub metrics: BTreeMap<String, f64>,
    pub verdict: Verdict,
    pub wall_time_ms: u128,
    pub version: String,
    pub seed: u64,
}

/// A metric table destined for one CSV file.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Table {
        Table {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Format a float for CSV with enough digits to round-trip.
pub fn fmt_f(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{x:.1}")
    } else {
        format!("{x:.12e}")
    }
}

fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn write_csv(path: &Path, table: &Table) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "# schema thinshell-v1 table={}", table.name)?;
    writeln!(out, "{}", table.header.iter().map(|h| csv_escape(h)).collect::<Vec<_>>().join(","))?;
    for row in &table.rows {
        writeln!(out, "{}", row.iter().map(|f| csv_escape(f)).collect::<Vec<_>>().join(","))?;
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Write JSONL + one CSV per table + the summary; returns created paths.
pub fn emit_report(
    out_dir: &Path,
    experiment: &str,
    records: &[ReportRecord],
    tables: &[Table],
) -> Result<Vec<std::path::PathBuf>> {
    if records.is_empty() {
        bail!("no records to emit for `{experiment}`");
    }
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let mut created = Vec::new();

    let jsonl_path = out_dir.join(format!("{experiment}.jsonl"));
    let mut jsonl = String::new();
    for rec in records {
        writeln!(jsonl, "{}", serde_json::to_string(rec)?)?;
    }
    fs::write(&jsonl_path, jsonl)?;
    created.push(jsonl_path);

    for table in tables {
        let path = out_dir.join(format!("{experiment}.{}.csv", table.name));
        write_csv(&path, table)?;
        created.push(path);
    }

    let summary_path = out_dir.join("summary.txt");
    let mut summary = String::new();
    writeln!(summary, "experiment: {experiment}")?;
    for rec in records {
        writeln!(summary, "  [{}] {}", rec.verdict.label(), rec.claim)?;
    }
    let worst = records.iter().any(|r| r.verdict == Verdict::Fail);
    writeln!(summary, "overall: {}", if worst { "FAIL" } else { "ok" })?;
    fs::write(&summary_path, summary)?;
    created.push(summary_path);
    Ok(created)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_escaping_rfc4180() {
        assert_eq!(csv_escape("plain"), "plain");
        assert_eq!(csv_escape("a,b"), "\"a,b\"");
        assert_eq!(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn emit_creates_three_kinds_of_files() {
        let dir = std::env::temp_dir().join(format!("tsreport-{}", std::process::id()));
        let rec = ReportRecord {
            experiment: "demo".into(),
            claim: "demo claim".into(),
            params: BTreeMap::new(),
            metrics: BTreeMap::from([("x".to_string(), 1.0)]),
            verdict: Verdict::Pass,
            wall_time_ms: 3,
            version: "0".into(),
            seed: 1,
        };
        let mut t = Table::new("vals", &["a", "b"]);
        t.push(vec!["1".into(), "2".into()]);
        let files = emit_report(&dir, "demo", &[rec], &[t]).unwrap();
        assert_eq!(files.len(), 3);
        for f in &files {
            assert!(f.exists());
        }
        let empty: Vec<ReportRecord> = vec![];
        assert!(emit_report(&dir, "demo", &empty, &[]).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }
}
