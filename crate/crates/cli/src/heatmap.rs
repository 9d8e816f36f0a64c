//! Terminal preview of a two-axis scan.

use std::fmt::Write;

use thiserror::Error;

use nrcg_battery::ScanResult;

/// Low to high.
pub const RAMP: &[u8] = b" .:-=+*#%@";

#[derive(Debug, Error, PartialEq)]
pub enum HeatmapError {
    #[error("heatmap needs a result with two axes, got {0}")]
    NotTwoDimensional(usize),
    #[error("no defined values to draw")]
    Empty,
}

/// Character for `v` on a panel spanning `[lo, hi]`; only the maximum maps to `@`.
fn shade(v: f64, lo: f64, hi: f64) -> char {
    let top = RAMP.len() - 1;
    if hi <= lo {
        return RAMP[0] as char;
    }
    let idx = (((v - lo) / (hi - lo)) * top as f64).floor() as usize;
    RAMP[idx.min(top)] as char
}

/// First axis runs left to right, second axis bottom to top. Undefined cells are blank.
pub fn ascii_heatmap(result: &ScanResult<f64>) -> Result<String, HeatmapError> {
    if result.axes.len() != 2 {
        return Err(HeatmapError::NotTwoDimensional(result.axes.len()));
    }
    let (x, y) = (&result.axes[0], &result.axes[1]);
    let defined = result.values.iter().flatten().copied();
    let (lo, hi) = defined.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo > hi {
        return Err(HeatmapError::Empty);
    }

    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} over {} x {}  [{:.4}, {:.4}]  ramp \"{}\"",
        result.metric,
        x.kind,
        y.kind,
        lo,
        hi,
        std::str::from_utf8(RAMP).expect("ascii ramp")
    );
    let label_every = (y.coords.len() / 10).max(1);
    for j in (0..y.coords.len()).rev() {
        let label = if j % label_every == 0 || j + 1 == y.coords.len() {
            format!("{:>8.3}", y.coords[j])
        } else {
            " ".repeat(8)
        };
        let line: String = (0..x.coords.len())
            .map(|i| result.value_2d(i, j).map_or(' ', |v| shade(v, lo, hi)))
            .collect();
        let _ = writeln!(out, "{label} |{line}");
    }
    let _ = writeln!(out, "{} +{}", " ".repeat(8), "-".repeat(x.coords.len()));
    let first = format!("{:.3}", x.coords[0]);
    let last = format!("{:.3}", x.coords[x.coords.len() - 1]);
    let gap = x.coords.len().saturating_sub(first.len() + last.len()).max(1);
    let _ = writeln!(out, "{}  {first}{}{last}  {}", " ".repeat(8), " ".repeat(gap), x.kind);
    Ok(out)
}
