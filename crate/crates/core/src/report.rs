//! File output: pretty JSON documents and CSV grids with a one-line header.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::foliation::Leaf;

fn io(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &to_json(value)?)
}

/// CSV with the given header line and one row per record.
pub fn csv<R: AsRef<[f64]>>(header: &[&str], rows: impl IntoIterator<Item = R>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.as_ref().iter().map(|v| format!("{v:e}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// A leaf as `disk_XXX.csv` patch files plus `manifest.json`.
pub fn write_leaf(dir: &Path, leaf: &Leaf) -> Result<()> {
    for (k, d) in leaf.disks.iter().enumerate() {
        write_text(&dir.join(format!("disk_{k:03}.csv")), &d.patch.to_csv())?;
    }
    write_json(&dir.join("manifest.json"), &leaf.manifest())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let s = csv(&["a", "b"], [[1.0, 0.5], [-2.0, 0.0]]);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines, ["a,b", "1e0,5e-1", "-2e0,0e0"]);
    }

    #[test]
    fn json_round_trip() {
        let v = vec![1.5f64, -0.25];
        let s = to_json(&v).unwrap();
        assert!(s.ends_with('\n'));
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}
