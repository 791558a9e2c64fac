use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

use crate::Grid;

/// Scientific notation with `precision` significant digits.
pub fn num(x: f64, precision: usize) -> String {
    format!("{:.*e}", precision - 1, x)
}

pub fn charge_label(c: &[i64]) -> String {
    c.iter().map(i64::to_string).collect::<Vec<_>>().join(";")
}

/// `n` grid points from `lo` to `hi`; the point with index `i` depends only on `i / (n - 1)`.
pub fn grid(lo: f64, hi: f64, n: usize, kind: Grid) -> anyhow::Result<Vec<f64>> {
    anyhow::ensure!(n >= 2, "grid needs at least two points, got {n}");
    anyhow::ensure!(lo > 0.0 && hi > lo, "grid needs 0 < t_min < t_max, got {lo}, {hi}");
    Ok((0..n)
        .map(|i| {
            let frac = i as f64 / (n - 1) as f64;
            match kind {
                Grid::Linear => lo + (hi - lo) * frac,
                Grid::Log => lo * (hi / lo).powf(frac),
            }
        })
        .collect())
}

/// Wraps `report` with the output precision and writes it as pretty JSON.
pub fn write_json<T: Serialize>(dir: &Path, name: &str, precision: usize, report: &T) -> anyhow::Result<PathBuf> {
    let value = serde_json::json!({ "precision": precision, "report": report });
    let path = prepare(dir, name)?;
    let text = serde_json::to_string_pretty(&value)?;
    fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> anyhow::Result<PathBuf> {
    let path = prepare(dir, name)?;
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn prepare(dir: &Path, name: &str) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir.join(name))
}

pub fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}
