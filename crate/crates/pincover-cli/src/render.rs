//! CSV and plain-text table renderings of a report's results.

use std::io::{self, Write};

use serde_json::Value;

use crate::Report;

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<Vec<String>>) {
    match v {
        Value::Object(map) if !map.is_empty() => {
            for (k, x) in map {
                let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&path, x, out);
            }
        }
        Value::Array(items) if items.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        other => out.push(vec![prefix.to_string(), cell(other)]),
    }
}

/// Header and rows: arrays of objects become one row per element, anything else a
/// `field, value` listing.
fn rows(results: &Value) -> Vec<Vec<String>> {
    if let Value::Array(items) = results {
        if !items.is_empty() && items.iter().all(Value::is_object) {
            let mut header: Vec<String> = Vec::new();
            for item in items {
                for k in item.as_object().into_iter().flat_map(|m| m.keys()) {
                    if !header.contains(k) {
                        header.push(k.clone());
                    }
                }
            }
            let body = items.iter().map(|item| header.iter().map(|k| cell(&item[k])).collect());
            return std::iter::once(header.clone()).chain(body).collect();
        }
    }
    let mut out = vec![vec!["field".to_string(), "value".to_string()]];
    flatten("", results, &mut out);
    out
}

pub fn csv(report: &Report, out: &mut impl Write) -> io::Result<()> {
    let mut w = ::csv::Writer::from_writer(out);
    for row in rows(&report.results) {
        w.write_record(&row)?;
    }
    w.flush()
}

pub fn table(report: &Report, out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "{} [{}]", report.command, report.anchors.join(", "))?;
    for (k, v) in &report.inputs {
        writeln!(out, "  {k} = {v}")?;
    }
    let rows = rows(&report.results);
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|j| rows.iter().map(|r| r.get(j).map_or(0, |c| c.chars().count())).max().unwrap_or(0))
        .collect();
    for (i, row) in rows.iter().enumerate() {
        let line: Vec<String> =
            row.iter().zip(&widths).map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count()))).collect();
        writeln!(out, "{}", line.join("  ").trim_end())?;
        if i == 0 {
            let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            writeln!(out, "{}", rule.join("  "))?;
        }
    }
    Ok(())
}
