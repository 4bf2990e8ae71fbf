use std::fmt::Write;

use crate::birkhoff_rott::{Domain, SheetState};
use crate::conformal::singular_points;
use crate::diagnostics::{curve_self_intersection, physical_curve};
use crate::error::Result;
use crate::spectral::C64;

/// Which curve a render shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveView {
    /// The state's own curve; tilde states also show the singular points.
    Native,
    /// The physical curve, mapping tilde states back first.
    Physical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvgOptions {
    pub width: u32,
    pub height: u32,
    pub view: CurveView,
    pub title: Option<String>,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self { width: 640, height: 480, view: CurveView::Native, title: None }
    }
}

/// One `σ(α)` curve of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaSeries {
    pub label: String,
    pub alpha: Vec<f64>,
    pub sigma: Vec<f64>,
}

const MARGIN: f64 = 56.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Tick spacing of 1, 2 or 5 times a power of ten giving about five ticks.
fn tick_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    mag * if r < 1.5 {
        1.0
    } else if r < 3.5 {
        2.0
    } else if r < 7.5 {
        5.0
    } else {
        10.0
    }
}

fn fmt_tick(v: f64, step: f64) -> String {
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let s = format!("{:.*}", decimals, v);
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        format!("{:.*}", decimals, 0.0)
    } else {
        s
    }
}

/// Maps data coordinates to the drawing area.
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    w: f64,
    h: f64,
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64), w: f64, h: f64, equal: bool) -> Self {
        let pad = |lo: f64, hi: f64| {
            let s = (hi - lo).max(1e-12);
            (lo - 0.05 * s, hi + 0.05 * s)
        };
        let (mut x0, mut x1) = pad(x.0, x.1);
        let (mut y0, mut y1) = pad(y.0, y.1);
        if equal {
            let (pw, ph) = (w - 2.0 * MARGIN, h - 2.0 * MARGIN);
            let scale = ((x1 - x0) / pw).max((y1 - y0) / ph);
            let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
            x0 = cx - 0.5 * scale * pw;
            x1 = cx + 0.5 * scale * pw;
            y0 = cy - 0.5 * scale * ph;
            y1 = cy + 0.5 * scale * ph;
        }
        Self { x0, x1, y0, y1, w, h }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (self.w - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        self.h - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (self.h - 2.0 * MARGIN)
    }

    fn axes(&self, out: &mut String, xlabel: &str, ylabel: &str) {
        let (l, r, t, b) = (MARGIN, self.w - MARGIN, MARGIN, self.h - MARGIN);
        let _ = writeln!(out, r##"<rect x="{l:.2}" y="{t:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444"/>"##, r - l, b - t);
        let sx = tick_step(self.x1 - self.x0);
        let mut v = (self.x0 / sx).ceil() * sx;
        while v <= self.x1 {
            let x = self.px(v);
            let _ = writeln!(out, r##"<line x1="{x:.2}" y1="{b:.2}" x2="{x:.2}" y2="{:.2}" stroke="#444"/>"##, b + 5.0);
            let _ = writeln!(out, r#"<text x="{x:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#, b + 18.0, fmt_tick(v, sx));
            v += sx;
        }
        let sy = tick_step(self.y1 - self.y0);
        let mut v = (self.y0 / sy).ceil() * sy;
        while v <= self.y1 {
            let y = self.py(v);
            let _ = writeln!(out, r##"<line x1="{:.2}" y1="{y:.2}" x2="{l:.2}" y2="{y:.2}" stroke="#444"/>"##, l - 5.0);
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#, l - 8.0, y + 4.0, fmt_tick(v, sy));
            v += sy;
        }
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">{xlabel}</text>"#, 0.5 * (l + r), self.h - 12.0);
        let _ = writeln!(out, r#"<text x="14" y="{:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 14 {:.2})">{ylabel}</text>"#, 0.5 * (t + b), 0.5 * (t + b));
    }

    fn polyline(&self, pts: &[(f64, f64)]) -> String {
        let mut s = String::with_capacity(pts.len() * 16);
        for (i, (x, y)) in pts.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{:.3},{:.3}", self.px(*x), self.py(*y));
        }
        s
    }
}

fn open(w: u32, h: u32, title: &Option<String>) -> String {
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    if let Some(t) = title {
        let _ = writeln!(out, r#"<text x="{:.1}" y="22" font-size="15" text-anchor="middle">{}</text>"#, w as f64 / 2.0, escape(t));
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds(pts: impl Iterator<Item = (f64, f64)>) -> ((f64, f64), (f64, f64)) {
    pts.fold(((f64::INFINITY, f64::NEG_INFINITY), (f64::INFINITY, f64::NEG_INFINITY)), |((a, b), (c, d)), (x, y)| {
        ((a.min(x), b.max(x)), (c.min(y), d.max(y)))
    })
}

/// Renders a curve with equal axes. Marks a detected self-contact, and the
/// singular points `q^l` when a tilde curve is drawn.
pub fn render_curve_svg(state: &SheetState, opts: &SvgOptions) -> Result<String> {
    let curve = match opts.view {
        CurveView::Native => state.curve.clone(),
        CurveView::Physical => physical_curve(state)?,
    };
    let mut pts: Vec<(f64, f64)> = curve.points().iter().map(|z| (z.re, z.im)).collect();
    // close the loop, or the period for a plain curve
    let shift = if curve.domain() == Domain::Plain { 2.0 * std::f64::consts::PI } else { 0.0 };
    let first = curve.points()[0] + shift;
    pts.push((first.re, first.im));
    let marks: Vec<C64> = if curve.domain() == Domain::Tilde { singular_points().to_vec() } else { Vec::new() };
    let contact = curve_self_intersection(&curve).map(|c| c.point());
    let (xr, yr) = bounds(pts.iter().copied().chain(marks.iter().map(|q| (q.re, q.im))));
    let f = Frame::new(xr, yr, opts.width as f64, opts.height as f64, true);

    let mut out = open(opts.width, opts.height, &opts.title);
    let (xl, yl) = match curve.domain() {
        Domain::Plain => ("z1", "z2"),
        Domain::Tilde => ("zt1", "zt2"),
    };
    f.axes(&mut out, xl, yl);
    let _ = writeln!(out, r##"<polyline class="curve" fill="none" stroke="#1f77b4" stroke-width="1.5" points="{}"/>"##, f.polyline(&pts));
    for (l, q) in marks.iter().enumerate() {
        let (x, y) = (f.px(q.re), f.py(q.im));
        let _ = writeln!(out, r##"<circle class="singular" data-index="{l}" cx="{x:.2}" cy="{y:.2}" r="3.5" fill="#444"/>"##);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="11">q{l}</text>"#, x + 5.0, y - 5.0);
    }
    if let Some(p) = contact {
        let (x, y) = (f.px(p.re), f.py(p.im));
        let _ = writeln!(
            out,
            r##"<circle class="contact" data-x="{:.6}" data-y="{:.6}" cx="{x:.2}" cy="{y:.2}" r="6" fill="none" stroke="#d62728" stroke-width="2"/>"##,
            p.re, p.im
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Plots `σ(α)` for each series with a dashed zero line.
pub fn render_sigma_svg(series: &[SigmaSeries], opts: &SvgOptions) -> String {
    let all = series.iter().flat_map(|s| s.alpha.iter().copied().zip(s.sigma.iter().copied()));
    let (xr, (y0, y1)) = bounds(all.chain(std::iter::once((0.0, 0.0))));
    let f = Frame::new(xr, (y0, y1), opts.width as f64, opts.height as f64, false);
    let mut out = open(opts.width, opts.height, &opts.title);
    f.axes(&mut out, "alpha", "sigma");
    let zy = f.py(0.0);
    let _ = writeln!(
        out,
        r##"<line class="zero-axis" x1="{MARGIN:.2}" y1="{zy:.2}" x2="{:.2}" y2="{zy:.2}" stroke="#888" stroke-dasharray="4 3"/>"##,
        opts.width as f64 - MARGIN
    );
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64)> = s.alpha.iter().copied().zip(s.sigma.iter().copied()).collect();
        let label = escape(&s.label);
        let _ = writeln!(out, r#"<polyline class="sigma" data-label="{label}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, f.polyline(&pts));
        let ly = MARGIN + 16.0 * (i as f64 + 1.0);
        let lx = opts.width as f64 - MARGIN - 110.0;
        let _ = writeln!(out, r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="11">{label}</text>"#, lx + 26.0, ly + 4.0);
    }
    out.push_str("</svg>\n");
    out
}
