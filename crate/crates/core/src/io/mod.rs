//! Text formats: run configuration, diagnostics CSV, node snapshots and SVG
//! renders. All floating-point output uses 17 significant digits so that
//! every value survives a write/read round trip exactly.

mod config;
mod csv;
mod snapshot;
mod svg;

pub use config::{parse_config, serialize_config};
pub use csv::{diagnostics_csv, parse_diagnostics_csv, write_diagnostics_csv, CSV_HEADER};
pub use snapshot::{parse_snapshot, read_snapshot, snapshot_text, write_snapshot};
pub use svg::{render_curve_svg, render_sigma_svg, CurveView, SigmaSeries, SvgOptions};

/// Formats a double with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_file(path: &std::path::Path, text: &str) -> crate::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}
