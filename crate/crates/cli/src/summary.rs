//! Human-readable aggregates of an existing report.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde_json::Value;

/// Non-comment lines of a report as JSON records. CSV reports are converted
/// to records keyed by their header.
fn records(text: &str) -> Result<Vec<Value>, String> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let Some(first) = lines.next() else {
        return Ok(Vec::new());
    };
    if first.starts_with('{') {
        return std::iter::once(first)
            .chain(lines)
            .map(|l| serde_json::from_str(l).map_err(|e| format!("malformed record: {e}")))
            .collect();
    }
    let header: Vec<&str> = first.split(',').collect();
    lines
        .map(|l| {
            let cells: Vec<&str> = l.split(',').collect();
            if cells.len() != header.len() {
                return Err(format!("row has {} cells, header has {}", cells.len(), header.len()));
            }
            let obj = header
                .iter()
                .zip(cells)
                .map(|(h, c)| {
                    let v = serde_json::from_str(c).unwrap_or_else(|_| Value::String(c.to_string()));
                    (h.to_string(), v)
                })
                .collect();
            Ok(Value::Object(obj))
        })
        .collect()
}

fn fmt_ci(ci: &Value) -> String {
    match (ci["lo"].as_f64(), ci["hi"].as_f64()) {
        (Some(lo), Some(hi)) => format!("[{lo:.6}, {hi:.6}]"),
        _ => "n/a".into(),
    }
}

pub fn summarize(path: &Path) -> Result<String, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let records = records(&text)?;
    if records.is_empty() {
        return Ok("0 records\n".into());
    }
    let mut out = format!("{} records\n", records.len());
    let mut kinds: BTreeMap<String, usize> = BTreeMap::new();
    for r in &records {
        let kind = r["record"].as_str().unwrap_or(if r.get("gap").is_some() { "weyl" } else { "other" });
        *kinds.entry(kind.to_string()).or_default() += 1;
    }
    for (k, n) in &kinds {
        out.push_str(&format!("  {k:<16} {n}\n"));
    }
    let gaps: Vec<f64> = records.iter().filter_map(|r| r["gap"].as_f64()).collect();
    if !gaps.is_empty() {
        let max = gaps.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
        let non_converged = records.iter().filter(|r| r["converged"] == Value::Bool(false)).count();
        out.push_str(&format!("max |delta - d_U|  {max:.3e}\nmean delta gap     {mean:.3e}\nnon-converged      {non_converged}\n"));
    }
    for r in records.iter().filter(|r| r["record"] == "summary") {
        if let Some(est) = r["estimate"].as_f64() {
            let event = r["event"].as_str().unwrap_or("hit_zero");
            out.push_str(&format!("estimate ({event})  {est:.6}  95% CI {}\n", fmt_ci(&r["ci"])));
        }
        if let Some(o) = r["oracle"].as_f64() {
            out.push_str(&format!("oracle             {o:.6}\n"));
        }
    }
    Ok(out)
}
