use std::fmt::Write;

use serde_json::{json, Value};

use gpvm::ComplexMatrix;

/// Fixed-precision decimal without trailing zeros; round-off below the
/// printed precision shows as `0`.
pub fn num(x: f64) -> String {
    let s = format!("{x:.10}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

pub fn nums(xs: &[f64]) -> String {
    xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(", ")
}

fn entry(re: f64, im: f64) -> String {
    let (r, i) = (num(re), num(im));
    match (r.as_str(), i.as_str()) {
        (_, "0") => r,
        ("0", _) => format!("{i}i"),
        _ if i.starts_with('-') => format!("{r}{i}i"),
        _ => format!("{r}+{i}i"),
    }
}

/// Matrix rows, right-aligned, indented by `indent` spaces.
pub fn matrix_text(m: &ComplexMatrix, indent: usize) -> String {
    let cells: Vec<Vec<String>> = (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| entry(m[(i, j)].re, m[(i, j)].im)).collect())
        .collect();
    let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
    let mut out = String::new();
    for row in cells {
        let line: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
        let _ = writeln!(out, "{:indent$}[{}]", "", line.join("  "));
    }
    out
}

pub fn matrix_json(m: &ComplexMatrix) -> Value {
    let part = |f: fn(&gpvm::Complex64) -> f64| -> Vec<Vec<f64>> {
        (0..m.rows()).map(|i| (0..m.cols()).map(|j| f(&m[(i, j)])).collect()).collect()
    };
    json!({ "re": part(|z| z.re), "im": part(|z| z.im) })
}

pub fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}
