use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::bleu::BleuScores;
use super::cv::CrossProjectResult;
use super::metrics::ResultRow;
use crate::error::Result;

/// Writes `metrics.json`, `folds.json` and `table.txt` into `dir`.
pub fn write_bundle<M: Serialize, F: Serialize>(
    dir: &Path,
    metrics: &M,
    folds: &F,
    table: &str,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("metrics.json"), pretty(metrics)?)?;
    fs::write(dir.join("folds.json"), pretty(folds)?)?;
    fs::write(dir.join("table.txt"), table)?;
    Ok(())
}

fn pretty<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn grid(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: Vec<String>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&width)
            .enumerate()
            .map(|(i, (c, w))| {
                if i == 0 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect();
        padded.join(" | ").trim_end().to_string()
    };
    let mut out = String::new();
    writeln!(
        out,
        "{}",
        line(header.iter().map(|h| h.to_string()).collect())
    )
    .unwrap();
    let rule: Vec<String> = width.iter().map(|w| "-".repeat(*w)).collect();
    writeln!(out, "{}", rule.join("-+-")).unwrap();
    for r in rows {
        writeln!(out, "{}", line(r.clone())).unwrap();
    }
    out
}

fn f3(x: f64) -> String {
    format!("{x:.3}")
}

/// `Model | P | R | F1`, rows in the given order.
pub fn detection_table(rows: &[ResultRow]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.name.clone(), f3(r.precision), f3(r.recall), f3(r.f1)])
        .collect();
    grid(&["Model", "P", "R", "F1"], &body)
}

/// `Project | P | R | F1` per held-out project, then the average.
pub fn project_table(result: &CrossProjectResult) -> String {
    let mut body: Vec<Vec<String>> = result
        .rounds
        .iter()
        .map(|r| {
            vec![
                r.project.clone(),
                f3(r.metrics.precision),
                f3(r.metrics.recall),
                f3(r.metrics.f1),
            ]
        })
        .collect();
    body.push(vec![
        "Average".into(),
        f3(result.mean.precision),
        f3(result.mean.recall),
        f3(result.mean.f1),
    ]);
    grid(&["Project", "P", "R", "F1"], &body)
}

/// `Model | B-1 | B-2 | B-3 | B-4`.
pub fn bleu_table(rows: &[(String, BleuScores)]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|(name, b)| {
            let mut r = vec![name.clone()];
            r.extend((1..=4).map(|n| f3(b.get(n))));
            r
        })
        .collect();
    grid(&["Model", "B-1", "B-2", "B-3", "B-4"], &body)
}
