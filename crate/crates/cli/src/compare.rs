//! Field-by-field comparison of a run directory against a golden one.
//!
//! Numbers in `summary.json` are compared with a tolerance chosen from their path: slopes
//! absolutely to 0.05, anything under a `reconstruction` key relatively to 1e-3, all other
//! numbers relatively to 1e-6. Strings, booleans and shapes must match exactly, except the
//! list of warnings. Binary grids present in the golden are compared in relative L2 norm,
//! 1e-3 for reconstructions and 1e-6 otherwise.

use std::fs;
use std::path::Path;

use serde_json::Value;

use nullform_core::io::read_grid;

use crate::{CliError, SUMMARY};

pub const NORM_REL: f64 = 1e-6;
pub const SLOPE_ABS: f64 = 0.05;
pub const RECON_REL: f64 = 1e-3;

#[derive(Debug, Default)]
pub struct CompareReport {
    pub checked: usize,
    pub failures: Vec<String>,
}

impl CompareReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

fn tolerance(path: &str) -> (f64, bool) {
    let last = path.rsplit(['.', '[']).next().unwrap_or(path);
    if last.contains("slope") {
        (SLOPE_ABS, false)
    } else if path.contains("reconstruction") || path.contains("rel_error") {
        (RECON_REL, true)
    } else {
        (NORM_REL, true)
    }
}

fn close(a: f64, b: f64, tol: f64, relative: bool) -> bool {
    if a == b || (a.is_nan() && b.is_nan()) {
        return true;
    }
    let d = (a - b).abs();
    if relative {
        d <= tol * a.abs().max(b.abs()) || d <= 1e-300
    } else {
        d <= tol
    }
}

fn walk(path: &str, got: &Value, want: &Value, rep: &mut CompareReport) {
    if path.ends_with("warnings") {
        return;
    }
    match (got, want) {
        (Value::Number(a), Value::Number(b)) => {
            rep.checked += 1;
            let (a, b) = (a.as_f64().unwrap_or(f64::NAN), b.as_f64().unwrap_or(f64::NAN));
            let (tol, rel) = tolerance(path);
            if !close(a, b, tol, rel) {
                let kind = if rel { "relative" } else { "absolute" };
                rep.failures.push(format!("{path}: got {a:e}, golden {b:e} ({kind} tolerance {tol:e})"));
            }
        }
        (Value::Object(a), Value::Object(b)) => {
            for (k, v) in b {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                match a.get(k) {
                    Some(x) => walk(&p, x, v, rep),
                    None => rep.failures.push(format!("{p}: missing from the run")),
                }
            }
            for k in a.keys().filter(|k| !b.contains_key(*k)) {
                rep.failures.push(format!("{}: not in the golden", if path.is_empty() { k.clone() } else { format!("{path}.{k}") }));
            }
        }
        (Value::Array(a), Value::Array(b)) => {
            if a.len() != b.len() {
                rep.failures.push(format!("{path}: length {} vs golden {}", a.len(), b.len()));
                return;
            }
            for (i, (x, y)) in a.iter().zip(b).enumerate() {
                walk(&format!("{path}[{i}]"), x, y, rep);
            }
        }
        (a, b) => {
            rep.checked += 1;
            if a != b {
                rep.failures.push(format!("{path}: got {a}, golden {b}"));
            }
        }
    }
}

/// Compares `summary.json` and every binary grid of `golden` with the run in `out`.
pub fn compare_dirs(out: &Path, golden: &Path) -> Result<CompareReport, CliError> {
    if !golden.is_dir() {
        return Err(CliError::Compare(format!(
            "golden directory {} does not exist; create it from a trusted run with `nullform run <cfg> --out <root>` and copy the run directory there",
            golden.display()
        )));
    }
    let read = |dir: &Path| -> Result<Value, CliError> {
        let p = dir.join(SUMMARY);
        let text = fs::read_to_string(&p).map_err(|e| CliError::Compare(format!("cannot read {}: {e}", p.display())))?;
        Ok(serde_json::from_str(&text)?)
    };
    let want = read(golden)?;
    let got = read(out)?;
    let mut rep = CompareReport::default();
    // the hash follows the config, which is compared field by field below
    let strip = |v: &Value| {
        let mut v = v.clone();
        if let Some(o) = v.as_object_mut() {
            o.remove("config_hash");
        }
        v
    };
    walk("", &strip(&got), &strip(&want), &mut rep);
    let mut grids: Vec<_> =
        fs::read_dir(golden)?.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.extension().is_some_and(|e| e == "nfgrid")).collect();
    grids.sort();
    for g in grids {
        let name = g.file_name().expect("file").to_string_lossy().into_owned();
        let other = out.join(&name);
        if !other.exists() {
            rep.failures.push(format!("{name}: missing from the run"));
            continue;
        }
        let (hw, dw) = read_grid(&g)?;
        let (hg, dg) = read_grid(&other)?;
        rep.checked += 1;
        if hw.dims != hg.dims || hw.components != hg.components || hw.kind != hg.kind {
            rep.failures.push(format!("{name}: shape {:?}x{} vs golden {:?}x{}", hg.dims, hg.components, hw.dims, hw.components));
            continue;
        }
        let tol = if hw.kind == "reconstruction" { RECON_REL } else { NORM_REL };
        let num: f64 = dg.iter().zip(&dw).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let den: f64 = dw.iter().map(|b| b * b).sum::<f64>().sqrt();
        if num > tol * den && num > 0.0 {
            rep.failures.push(format!("{name}: relative L2 difference {:e} exceeds {tol:e}", num / den.max(f64::MIN_POSITIVE)));
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn diff(a: Value, b: Value) -> CompareReport {
        let mut r = CompareReport::default();
        walk("", &a, &b, &mut r);
        r
    }

    #[test]
    fn tolerances_follow_the_quantity() {
        assert!(diff(json!({"slope_l2": 2.0}), json!({"slope_l2": 2.04})).pass());
        assert!(!diff(json!({"slope_l2": 2.0}), json!({"slope_l2": 2.06})).pass());
        assert!(diff(json!({"l2": 1.0}), json!({"l2": 1.0 + 5e-7})).pass());
        assert!(!diff(json!({"l2": 1.0}), json!({"l2": 1.0 + 5e-6})).pass());
        assert!(diff(json!({"reconstruction": {"x": 1.0}}), json!({"reconstruction": {"x": 1.0005}})).pass());
    }

    #[test]
    fn failures_name_the_quantity() {
        let r =
            diff(json!({"config": {"grid": {"dx": 0.01}}, "rows": [1.0]}), json!({"config": {"grid": {"dx": 0.02}}, "rows": [1.0, 2.0]}));
        assert_eq!(r.failures.len(), 2);
        assert!(r.failures[0].starts_with("config.grid.dx"));
        assert!(r.failures[1].starts_with("rows: length"));
        assert!(!diff(json!({"a": "x"}), json!({"a": "y"})).pass());
        assert!(!diff(json!({"a": 1}), json!({})).pass());
    }
}
