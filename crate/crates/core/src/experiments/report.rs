use std::path::Path;

use super::{ComparisonRow, Verdict};
use crate::error::{Error, Result};

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"))
}

pub(crate) fn sort_rows(rows: &mut [ComparisonRow]) {
    rows.sort_by(|a, b| (a.example.as_str(), a.id.as_str()).cmp(&(b.example.as_str(), b.id.as_str())));
}

/// Rows stored as `<dir>/<id>/row.toml`, sorted by example and id.
pub fn collect_rows(dir: &Path) -> Result<Vec<ComparisonRow>> {
    let mut rows = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path().join("row.toml");
        if path.is_file() {
            let text = std::fs::read_to_string(&path)?;
            rows.push(toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?);
        }
    }
    sort_rows(&mut rows);
    Ok(rows)
}

fn ladder(row: &ComparisonRow) -> String {
    row.measurements.iter().map(|m| format!("{}:{:.4}+-{:.4}", m.n, m.s_star, m.stderr)).collect::<Vec<_>>().join(" ")
}

/// Deterministic CSV (no runtimes).
pub fn render_csv(rows: &[ComparisonRow]) -> String {
    let mut s = String::from("id,example,predicted,clamped,composed,degenerate,ladder,s_star,stderr,flags,tolerance,verdict,refinement_ok,failure\n");
    for r in rows {
        let f = r.finest();
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},\"{}\"\n",
            r.id,
            r.example,
            r.predicted.map_or(String::new(), |v| v.to_string()),
            r.clamped,
            r.composed.map_or(String::new(), |v| v.to_string()),
            r.degenerate,
            ladder(r),
            f.map_or(String::new(), |m| m.s_star.to_string()),
            f.map_or(String::new(), |m| m.stderr.to_string()),
            f.map_or(String::new(), |m| m.flags.join(";")),
            r.tolerance,
            r.verdict,
            r.refinement_ok,
            r.failure.as_deref().unwrap_or("").replace('"', "'")
        ));
    }
    s
}

pub fn render_markdown(rows: &[ComparisonRow]) -> String {
    let mut s = String::from("# Experiment report\n\n");
    s.push_str("| id | example | predicted | composed | measured (finest) | ladder | verdict | runtime (s) |\n");
    s.push_str("|---|---|---|---|---|---|---|---|\n");
    for r in rows {
        let measured = r.finest().map_or("-".to_string(), |m| {
            let flags = if m.flags.is_empty() { String::new() } else { format!(" [{}]", m.flags.join(", ")) };
            format!("{:.4} +- {:.4}{flags}", m.s_star, m.stderr)
        });
        let predicted = match (r.predicted, r.clamped) {
            (Some(p), true) => format!("{p:.4} (clamped)"),
            (p, _) => opt(p),
        };
        s.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} | {:.1} |\n",
            r.id,
            r.example,
            predicted,
            opt(r.composed),
            measured,
            ladder(r),
            r.verdict,
            r.runtime_seconds
        ));
    }
    let failures: Vec<&ComparisonRow> = rows.iter().filter(|r| r.failure.is_some()).collect();
    if !failures.is_empty() {
        s.push_str("\n## Failures\n\n");
        for r in failures {
            s.push_str(&format!("- {}: {}\n", r.id, r.failure.as_deref().unwrap_or("")));
        }
    }
    let inconsistent = rows.iter().filter(|r| r.verdict == Verdict::Inconsistent).count();
    s.push_str(&format!("\n{} experiments, {} inconsistent.\n", rows.len(), inconsistent));
    s
}

pub fn write_report(dir: &Path, rows: &[ComparisonRow]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.md"), render_markdown(rows))?;
    std::fs::write(dir.join("report.csv"), render_csv(rows))?;
    Ok(())
}
