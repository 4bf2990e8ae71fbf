use std::f64::consts::PI;

use crate::birkhoff_rott::{chord, CurveInterpolant, Domain, InterfaceCurve};
use crate::conformal::singular_points;
use crate::spectral::{self, C64};

/// Chords below this length count as exact contact.
pub const CONTACT_TOLERANCE: f64 = 1e-8;

/// Separation below which two arcs are considered to be in contact along an arc.
pub const ARC_TOLERANCE: f64 = 1e-6;

/// Grid maximum of the arc-chord ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcChord {
    /// `+∞` when two distinct nodes coincide.
    pub f_max: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// `max F(α, β) = |β| / |z(α) - z(α-β)|` over grid pairs, with the `β = 0`
/// column replaced by its limit `1/|z_α(α)|`.
pub fn arc_chord(curve: &InterfaceCurve) -> ArcChord {
    let n = curve.n();
    let h = curve.grid().spacing();
    let z = curve.points();
    let domain = curve.domain();
    let mut best = ArcChord { f_max: 0.0, alpha: 0.0, beta: 0.0 };
    for (i, t) in curve.tangent().iter().enumerate() {
        let f = 1.0 / t.norm();
        if f > best.f_max {
            best = ArcChord { f_max: f, alpha: curve.grid().node(i), beta: 0.0 };
        }
    }
    for i in 0..n {
        for m in 1..=n / 2 {
            let j = (i + n - m) % n;
            let beta = m as f64 * h;
            let d = chord(domain, z[i] - z[j]);
            let f = if d < CONTACT_TOLERANCE { f64::INFINITY } else { beta / d };
            if f > best.f_max {
                best = ArcChord { f_max: f, alpha: curve.grid().node(i), beta };
                if f.is_infinite() {
                    return best;
                }
            }
        }
    }
    best
}

/// Smallest distance between nodes at least `min_offset` indices apart.
pub fn min_nonlocal_chord(curve: &InterfaceCurve, min_offset: usize) -> f64 {
    let n = curve.n();
    let z = curve.points();
    let mut best = f64::INFINITY;
    for i in 0..n {
        for m in min_offset..=n / 2 {
            let j = (i + m) % n;
            best = best.min(chord(curve.domain(), z[i] - z[j]));
        }
    }
    best
}

/// `m(q^l) = min_α |z̃(α) - q^l|`, refined off-grid near the discrete minimum.
pub fn q_distances(curve: &InterfaceCurve) -> [f64; 5] {
    let interp = curve.interpolant();
    let z = curve.points();
    let nodes = curve.grid().nodes();
    let h = curve.grid().spacing();
    let qs = singular_points();
    std::array::from_fn(|l| {
        let q = qs[l];
        let (i, d0) = z
            .iter()
            .map(|p| (p - q).norm())
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, d)| if d < acc.1 { (i, d) } else { acc });
        // Newton on (z(α) - q)·z_α(α) = 0, kept within one cell
        let mut a = nodes[i];
        for _ in 0..30 {
            let p = interp.eval(a) - q;
            let t = interp.eval_derivative(a, 1);
            let s = interp.eval_derivative(a, 2);
            let g = p.re * t.re + p.im * t.im;
            let dg = t.norm_sqr() + p.re * s.re + p.im * s.im;
            if dg <= 0.0 {
                break;
            }
            let step = g / dg;
            a -= step;
            if (a - nodes[i]).abs() > h || step.abs() < 1e-15 {
                break;
            }
        }
        let refined = if (a - nodes[i]).abs() <= h { (interp.eval(a) - q).norm() } else { d0 };
        refined.min(d0)
    })
}

/// A detected self-contact of a curve.
#[derive(Debug, Clone, PartialEq)]
pub enum SelfContact {
    /// Isolated contact or crossing `z(α₁) = z(α₂)`.
    Point { alpha1: f64, alpha2: f64, point: C64, distance: f64 },
    /// Contact along an arc; parameter intervals on both branches.
    Arc { alpha1: (f64, f64), alpha2: (f64, f64), point: C64 },
}

impl SelfContact {
    pub fn point(&self) -> C64 {
        match self {
            SelfContact::Point { point, .. } | SelfContact::Arc { point, .. } => *point,
        }
    }
}

fn segment_distance(p0: C64, p1: C64, q0: C64, q1: C64) -> (f64, f64, f64) {
    // closest pair of points on two segments, by clamped projection
    let closest = |a: C64, b: C64, x: C64| -> f64 {
        let d = b - a;
        let l = d.norm_sqr();
        if l == 0.0 {
            0.0
        } else {
            (((x - a) * d.conj()).re / l).clamp(0.0, 1.0)
        }
    };
    let mut best = (f64::INFINITY, 0.0, 0.0);
    let mut consider = |s: f64, t: f64| {
        let d = ((p0 + (p1 - p0) * s) - (q0 + (q1 - q0) * t)).norm();
        if d < best.0 {
            best = (d, s, t);
        }
    };
    consider(0.0, closest(q0, q1, p0));
    consider(1.0, closest(q0, q1, p1));
    consider(closest(p0, p1, q0), 0.0);
    consider(closest(p0, p1, q1), 1.0);
    // proper crossing
    let r = p1 - p0;
    let s = q1 - q0;
    let denom = r.re * s.im - r.im * s.re;
    if denom != 0.0 {
        let w = q0 - p0;
        let u = (w.re * s.im - w.im * s.re) / denom;
        let v = (w.re * r.im - w.im * r.re) / denom;
        if (0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v) {
            best = (0.0, u, v);
        }
    }
    best
}

fn cross(a: C64, b: C64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Foot of the perpendicular from `p` onto the curve near parameter `guess`.
fn project(interp: &CurveInterpolant, p: C64, guess: f64, reach: f64) -> f64 {
    let mut a = guess;
    for _ in 0..40 {
        let d = p - interp.eval(a);
        let t = interp.eval_derivative(a, 1);
        let s = interp.eval_derivative(a, 2);
        let g = d.re * t.re + d.im * t.im;
        let dg = -t.norm_sqr() + d.re * s.re + d.im * s.im;
        if dg == 0.0 {
            break;
        }
        let step = g / dg;
        let next = a - step;
        if (next - guess).abs() > reach {
            break;
        }
        a = next;
        if step.abs() < 1e-15 {
            break;
        }
    }
    a
}

/// Levenberg-Marquardt on `z(α₁) - z(α₂) = 0`.
fn levenberg_marquardt(interp: &CurveInterpolant, mut a1: f64, mut a2: f64) -> (f64, f64, f64) {
    let mut lambda = 1e-3;
    let mut f = interp.eval(a1) - interp.eval(a2);
    let mut cost = f.norm_sqr();
    for _ in 0..200 {
        let j1 = interp.eval_derivative(a1, 1);
        let j2 = -interp.eval_derivative(a2, 1);
        // normal equations of the 2x2 real system
        let g11 = j1.norm_sqr() + lambda;
        let g22 = j2.norm_sqr() + lambda;
        let g12 = j1.re * j2.re + j1.im * j2.im;
        let r1 = -(j1.re * f.re + j1.im * f.im);
        let r2 = -(j2.re * f.re + j2.im * f.im);
        let det = g11 * g22 - g12 * g12;
        if det == 0.0 {
            break;
        }
        let d1 = (r1 * g22 - r2 * g12) / det;
        let d2 = (g11 * r2 - g12 * r1) / det;
        let f_new = interp.eval(a1 + d1) - interp.eval(a2 + d2);
        let c_new = f_new.norm_sqr();
        if c_new < cost {
            a1 += d1;
            a2 += d2;
            f = f_new;
            cost = c_new;
            lambda = (lambda * 0.3).max(1e-15);
            if d1.abs().max(d2.abs()) < 1e-15 || cost < 1e-32 {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e8 {
                break;
            }
        }
    }
    (a1, a2, cost.sqrt())
}

/// Tangential contacts are degenerate for the 2D root-finder; locate them as
/// the zero of the tangent cross product along the first branch, with the
/// second parameter slaved to the foot of the perpendicular.
fn polish_tangential(interp: &CurveInterpolant, a1: f64, a2: f64, h: f64) -> (f64, f64, f64) {
    let eval = |x: f64, guess: f64| -> (f64, f64) {
        let p = interp.eval(x);
        let y = project(interp, p, guess, 2.0 * h);
        let t1 = interp.eval_derivative(x, 1);
        let t2 = interp.eval_derivative(y, 1);
        (y, cross(t1, t2) / (t1.norm() * t2.norm()))
    };
    let (y_start, mut f0) = eval(a1, a2);
    let mut x0 = a1;
    let mut x1 = a1 + 0.1 * h;
    let (mut y1, mut f1) = eval(x1, y_start);
    for _ in 0..60 {
        if f1 == f0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        if (x2 - a1).abs() > 2.0 * h {
            break;
        }
        let (y2, f2) = eval(x2, y1);
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
        y1 = y2;
        if (x1 - x0).abs() < 1e-15 {
            break;
        }
    }
    (x1, y1, (interp.eval(x1) - interp.eval(y1)).norm())
}

/// Bound on the trigonometric interpolation error between nodes: the mass
/// in the upper half of the spectrum.
fn interpolation_error(curve: &InterfaceCurve) -> f64 {
    let hat = spectral::fft(curve.periodic_part());
    let n = hat.len();
    (0..n)
        .filter(|&i| spectral::wavenumber(i, n).unsigned_abs() as usize > n / 4)
        .map(|i| hat[i].norm() / n as f64)
        .sum()
}

fn extend_arc(interp: &CurveInterpolant, a1: f64, a2: f64, h: f64, direction: f64, tol: f64) -> (f64, f64) {
    let step = 0.25 * h * direction;
    let mut last = (a1, a2);
    let mut guess = a2;
    let rate = {
        let t1 = interp.eval_derivative(a1, 1).norm();
        let t2 = interp.eval_derivative(a2, 1).norm();
        -t1 / t2
    };
    for k in 1..=(8.0 * PI / h) as usize {
        let x = a1 + k as f64 * step;
        let p = interp.eval(x);
        let y = project(interp, p, guess + rate * step, 2.0 * h);
        // the partner must stay on the other branch
        if (p - interp.eval(y)).norm() > tol || reduce(x - y).abs() < 4.0 * h {
            break;
        }
        last = (x, y);
        guess = y;
    }
    last
}

/// Detects self-contact of the curve (with its 2π-images in the plain domain):
/// segment-level candidates of the node polygon, refined on the trigonometric
/// interpolant. Contacts spanning more than four grid spacings are arcs.
pub fn curve_self_intersection(curve: &InterfaceCurve) -> Option<SelfContact> {
    let n = curve.n();
    let h = curve.grid().spacing();
    let a = curve.arclength_factor();
    let z = curve.points();
    let nodes = curve.grid().nodes();
    let interp = curve.interpolant();
    let shifts: &[f64] = match curve.domain() {
        Domain::Tilde => &[0.0],
        Domain::Plain => &[-2.0 * PI, 0.0, 2.0 * PI],
    };

    let mut candidates: Vec<(f64, f64, f64)> = Vec::new();
    for i in 0..n {
        let (p0, p1) = (z[i], z[(i + 1) % n] + wrap(curve.domain(), i + 1 == n));
        for m in 3..=n - 3 {
            let j = (i + m) % n;
            let (q0, q1) = (z[j], z[(j + 1) % n] + wrap(curve.domain(), j + 1 == n));
            for &s in shifts {
                if curve.domain() == Domain::Plain && s == 0.0 && m > n / 2 {
                    continue;
                }
                let (d, u, v) = segment_distance(p0, p1, q0 + s, q1 + s);
                if d < 0.5 * h * a {
                    candidates.push((d, nodes[i] + u * h, nodes[j] + v * h + s));
                }
            }
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0));

    for &(_, g1, g2) in candidates.iter().take(16) {
        let (mut a1, mut a2, mut dist) = levenberg_marquardt(&interp, g1, g2);
        let t1 = interp.eval_derivative(a1, 1);
        let t2 = interp.eval_derivative(a2, 1);
        let sine = cross(t1, t2).abs() / (t1.norm() * t2.norm());
        if sine < 1e-3 {
            let (b1, b2, d) = polish_tangential(&interp, a1, a2, h);
            if d <= dist.max(CONTACT_TOLERANCE) {
                a1 = b1;
                a2 = b2;
                dist = d;
            }
        }
        let separation = match curve.domain() {
            Domain::Tilde => reduce(a1 - a2).abs(),
            Domain::Plain => (a1 - a2).abs(),
        };
        if dist >= CONTACT_TOLERANCE || separation < 2.0 * h {
            continue;
        }
        let point = 0.5 * (interp.eval(a1) + interp.eval(a2));
        let tol = ARC_TOLERANCE.max(10.0 * interpolation_error(curve));
        let (lo1, lo2) = extend_arc(&interp, a1, a2, h, -1.0, tol);
        let (hi1, hi2) = extend_arc(&interp, a1, a2, h, 1.0, tol);
        let (a1, a2) = normalize_pair(curve.domain(), a1, a2);
        if hi1 - lo1 > 4.0 * h {
            let (lo1, lo2) = normalize_pair(curve.domain(), lo1, lo2);
            let (hi1, hi2) = normalize_pair(curve.domain(), hi1, hi2);
            let mid = 0.5 * (interp.eval(0.5 * (lo1 + hi1)) + interp.eval(0.5 * (lo2 + hi2)));
            return Some(SelfContact::Arc { alpha1: (lo1, hi1), alpha2: (hi2.min(lo2), hi2.max(lo2)), point: mid });
        }
        return Some(SelfContact::Point { alpha1: a1.min(a2), alpha2: a1.max(a2), point, distance: dist });
    }
    None
}

fn wrap(domain: Domain, last: bool) -> C64 {
    if domain == Domain::Plain && last {
        C64::new(2.0 * PI, 0.0)
    } else {
        C64::new(0.0, 0.0)
    }
}

fn reduce(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(2.0 * PI) - PI;
    if (r - PI).abs() < 1e-12 {
        -PI
    } else {
        r
    }
}

fn normalize_pair(_domain: Domain, a1: f64, a2: f64) -> (f64, f64) {
    (reduce(a1), reduce(a2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(n: usize, r: f64, c: C64) -> InterfaceCurve {
        InterfaceCurve::from_fn(Domain::Tilde, n, |a| c + C64::from_polar(r, -a)).unwrap()
    }

    #[test]
    fn circle_arc_chord_is_half_pi() {
        let c = arc_chord(&circle(64, 1.0, C64::new(0.0, 0.0)));
        assert!((c.f_max - PI / 2.0).abs() < 1e-10);
        assert!((c.beta - PI).abs() < 1e-12);
    }

    #[test]
    fn flat_arc_chord_is_one() {
        let flat = InterfaceCurve::from_fn(Domain::Plain, 64, |a| C64::new(a, 0.0)).unwrap();
        assert!((arc_chord(&flat).f_max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn q_distance_of_offset_circle() {
        let q1 = singular_points()[1];
        let c = circle(64, 0.1, q1 + 0.5);
        let m = q_distances(&c);
        assert!((m[1] - 0.4).abs() < 1e-8, "{}", m[1]);
    }

    #[test]
    fn q_distances_swap_under_reflection() {
        let c = circle(64, 0.2, C64::new(0.3, 0.5));
        let r = InterfaceCurve::from_points(Domain::Tilde, c.points().iter().rev().map(|p| p.conj()).collect()).unwrap();
        let m = q_distances(&c);
        let mr = q_distances(&r);
        let qs = singular_points();
        // which index is the conjugate of which
        for l in 0..5 {
            let k = (0..5).find(|&k| (qs[k] - qs[l].conj()).norm() < 1e-12).unwrap();
            assert!((m[l] - mr[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn circle_has_no_self_contact() {
        assert!(curve_self_intersection(&circle(64, 1.0, C64::new(0.0, 0.0))).is_none());
        let wave = InterfaceCurve::from_fn(Domain::Plain, 64, |a| C64::new(a + 0.3 * a.sin(), 0.2 * a.cos())).unwrap();
        assert!(curve_self_intersection(&wave).is_none());
    }

    #[test]
    fn figure_eight_crossing_is_found() {
        let c = InterfaceCurve::from_fn(Domain::Tilde, 128, |a| C64::new(a.sin(), (2.0 * a).sin() * 0.5)).unwrap();
        match curve_self_intersection(&c) {
            Some(SelfContact::Point { point, .. }) => assert!(point.norm() < 1e-10, "{point}"),
            other => panic!("{other:?}"),
        }
        assert!(arc_chord(&c).f_max.is_infinite());
    }
}
