use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BENCH_COLUMNS: [&str; 7] = ["combo", "classifier", "precision", "recall", "f1", "infer_ms_per_method", "seed"];

/// Mean scores of one (embedding combination, classifier) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    /// `<graph technique>+<code encoder>`.
    pub combo: String,
    pub classifier: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub infer_ms_per_method: f64,
    pub seed: u64,
}

/// Floats are written in shortest round-trip form.
pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = BENCH_COLUMNS.join(",") + "\n";
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.combo, r.classifier, r.precision, r.recall, r.f1, r.infer_ms_per_method, r.seed
        );
    }
    out
}

pub fn parse_bench_csv(text: &str) -> Result<Vec<BenchRow>> {
    let bad = |line: usize, message: String| Error::MalformedRecord { line, message };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.split(',').eq(BENCH_COLUMNS) => {}
        _ => return Err(bad(1, format!("header must be {}", BENCH_COLUMNS.join(",")))),
    }
    let mut rows = Vec::new();
    for (k, line) in lines {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != BENCH_COLUMNS.len() {
            return Err(bad(k + 1, format!("{} cells", cells.len())));
        }
        let num = |i: usize| cells[i].parse::<f64>().map_err(|e| bad(k + 1, format!("{}: {e}", BENCH_COLUMNS[i])));
        rows.push(BenchRow {
            combo: cells[0].to_string(),
            classifier: cells[1].to_string(),
            precision: num(2)?,
            recall: num(3)?,
            f1: num(4)?,
            infer_ms_per_method: num(5)?,
            seed: cells[6].parse().map_err(|e| bad(k + 1, format!("seed: {e}")))?,
        });
    }
    Ok(rows)
}

pub fn bench_text(rows: &[BenchRow]) -> String {
    let combo_w = rows.iter().map(|r| r.combo.len()).chain([5]).max().unwrap_or(5);
    let mut out = format!(
        "{:<combo_w$}  {:<10}  {:>9}  {:>6}  {:>6}  {:>12}  {:>6}\n",
        "combo", "classifier", "precision", "recall", "f1", "ms/method", "seed"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<combo_w$}  {:<10}  {:>9.3}  {:>6.3}  {:>6.3}  {:>12.4}  {:>6}",
            r.combo, r.classifier, r.precision, r.recall, r.f1, r.infer_ms_per_method, r.seed
        );
    }
    out
}
