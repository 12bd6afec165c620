//! Number formatting, CSV text, atomic file writes and run manifests.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{CliError, CliResult};

/// Shortest round-trip decimal; exponent form outside [1e-4, 1e15).
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 {
        "0".into()
    } else if (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Comma-separated table with a header row and LF line endings.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

/// Two-column numeric CSV.
pub fn xy_csv(header: [&str; 2], x: &[f64], y: &[f64]) -> String {
    csv(&header, x.iter().zip(y).map(|(a, b)| vec![fmt_num(*a), fmt_num(*b)]))
}

/// `key = value` lines.
pub fn report(pairs: &[(String, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

/// Writes through a temporary file in the same directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Columns of a numeric CSV whose header must equal `header`.
pub fn read_xy_csv(path: &Path, header: [&str; 2]) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |reason: String| CliError::Data {
        path: path.display().to_string(),
        reason,
    };
    let mut lines = text.lines();
    let head = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let got: Vec<&str> = head.split(',').map(str::trim).collect();
    if got != header {
        return Err(bad(format!("expected header `{}`, got `{head}`", header.join(","))));
    }
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (n, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',').map(|t| t.trim().parse::<f64>());
        match (cols.next(), cols.next(), cols.next()) {
            (Some(Ok(a)), Some(Ok(b)), None) if a.is_finite() && b.is_finite() => {
                x.push(a);
                y.push(b);
            }
            _ => return Err(bad(format!("line {}: expected two finite numbers", n + 2))),
        }
    }
    Ok((x, y))
}

pub const MANIFEST_FILE: &str = "manifest.txt";

/// Manifest text: command and tool version, then the resolved config.
pub fn manifest(command: &str, config_dump: &str) -> String {
    format!(
        "# hbn-spinlab run manifest; rerun with `hbn-spinlab rerun <this file>`\ncommand = {command}\nversion = {}\n{config_dump}",
        env!("CARGO_PKG_VERSION")
    )
}
