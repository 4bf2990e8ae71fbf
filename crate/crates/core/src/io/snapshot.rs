use std::path::Path;

use super::{fmt_f64, write_file};
use crate::birkhoff_rott::{Domain, InterfaceCurve, SheetState};
use crate::error::{Error, Result};
use crate::spectral::{PeriodicField, C64};

/// Two header lines (`t n domain A`, then the node columns) followed by one
/// `alpha z1 z2 omega` line per node.
pub fn snapshot_text(state: &SheetState) -> String {
    let curve = &state.curve;
    let cols = match curve.domain() {
        Domain::Plain => "alpha z1 z2 omega",
        Domain::Tilde => "alpha zt1 zt2 omegat",
    };
    let mut out = format!(
        "# t={} n={} domain={} A={}\n# {cols}\n",
        fmt_f64(state.t),
        curve.n(),
        curve.domain().as_str(),
        fmt_f64(curve.arclength_factor())
    );
    for ((a, z), w) in curve.grid().nodes().iter().zip(curve.points()).zip(state.omega.values()) {
        out.push_str(&format!("{} {} {} {}\n", fmt_f64(*a), fmt_f64(z.re), fmt_f64(z.im), fmt_f64(*w)));
    }
    out
}

pub fn write_snapshot(path: &Path, state: &SheetState) -> Result<()> {
    write_file(path, &snapshot_text(state))
}

fn header_field<'a>(header: &'a str, key: &str) -> Result<&'a str> {
    header
        .split_whitespace()
        .find_map(|f| f.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .ok_or_else(|| Error::Parse { line: 1, message: format!("header lacks {key}") })
}

pub fn parse_snapshot(text: &str) -> Result<SheetState> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse { line: 1, message: "empty snapshot".into() })?;
    let bad = |line: usize, m: &str| Error::Parse { line, message: m.to_string() };
    let t: f64 = header_field(header, "t")?.parse().map_err(|_| bad(1, "bad t"))?;
    let n: usize = header_field(header, "n")?.parse().map_err(|_| bad(1, "bad n"))?;
    let domain: Domain = header_field(header, "domain")?.parse().map_err(|_| bad(1, "bad domain"))?;
    lines.next().ok_or_else(|| bad(2, "missing column header"))?;
    let mut points = Vec::with_capacity(n);
    let mut omega = Vec::with_capacity(n);
    for (i, line) in lines.enumerate() {
        let v: Vec<f64> = line
            .split_whitespace()
            .map(|c| c.parse().map_err(|_| bad(i + 3, "bad number")))
            .collect::<Result<_>>()?;
        if v.len() != 4 {
            return Err(bad(i + 3, "expected 4 columns"));
        }
        points.push(C64::new(v[1], v[2]));
        omega.push(v[3]);
    }
    if points.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: points.len() });
    }
    let curve = InterfaceCurve::from_points(domain, points)?;
    let grid = curve.grid();
    SheetState::new(curve, PeriodicField::from_raw(grid, omega), t)
}

pub fn read_snapshot(path: &Path) -> Result<SheetState> {
    parse_snapshot(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tilde_snapshot_parses_back_exactly() {
        let c = InterfaceCurve::from_fn(Domain::Tilde, 32, |a| C64::from_polar(0.5 + 0.1 * a.cos(), -a)).unwrap();
        let w = PeriodicField::from_fn(c.grid(), |a| (2.0 * a).sin() / 3.0);
        let s = SheetState::new(c, w, 0.125).unwrap();
        let back = parse_snapshot(&snapshot_text(&s)).unwrap();
        assert_eq!(back.curve.points(), s.curve.points());
        assert_eq!(back.omega.values(), s.omega.values());
        assert_eq!(back.t, s.t);
    }

    #[test]
    fn plain_snapshot_has_header_and_flat_line() {
        let c = InterfaceCurve::from_fn(Domain::Plain, 16, |a| C64::new(a, 0.0)).unwrap();
        let s = SheetState::new(c, PeriodicField::zeros(crate::spectral::PeriodicGrid::new(16).unwrap()), 0.0).unwrap();
        let text = snapshot_text(&s);
        assert!(text.starts_with("# t=0.0000000000000000e0 n=16 domain=plain"));
        assert_eq!(text.lines().count(), 18);
        let back = parse_snapshot(&text).unwrap();
        assert!(back.curve.points().iter().all(|z| z.im == 0.0));
        let d = back.curve.points().iter().zip(s.curve.points()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(d < 1e-15);
    }
}
