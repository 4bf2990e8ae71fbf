//! The desingularizing map `P(w) = tan(w/2)^{1/2}` and the change of
//! variables it induces on curves, curvature and surface-tension terms.
//!
//! With `ζ = z̃_α` and `a = dP⁻¹/dz̃ = 4z̃/(1+z̃⁴)`, `b = da/dz̃`, every derivative
//! of `P⁻¹` is expressed in closed form; `P` itself is only evaluated to map
//! curves forward.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::birkhoff_rott::{Domain, InterfaceCurve};
use crate::error::{Error, Result};
use crate::spectral::{self, PeriodicField, C64};

/// Distance to a singular point below which `map_jet` refuses to evaluate.
pub const JET_SINGULAR_TOLERANCE: f64 = 1e-6;
/// Distance to a singular point below which `inverse_map_point` refuses.
pub const INVERSE_SINGULAR_TOLERANCE: f64 = 1e-10;
/// Largest admissible change of argument between images of adjacent nodes.
pub const MAX_BRANCH_JUMP: f64 = PI / 2.0;

/// The five points where `P⁻¹` degenerates: the origin and the fourth roots of -1.
pub fn singular_points() -> [C64; 5] {
    let s = FRAC_1_SQRT_2;
    [C64::new(0.0, 0.0), C64::new(s, s), C64::new(-s, s), C64::new(-s, -s), C64::new(s, -s)]
}

/// `tan(w/2)`, written to stay finite far from the real axis.
pub fn tan_half(w: C64) -> C64 {
    let (x, y) = (w.re, w.im);
    let ch = y.cosh();
    if ch.is_finite() {
        C64::new(x.sin(), y.sinh()) / (x.cos() + ch)
    } else {
        C64::new(0.0, y.signum())
    }
}

/// Branch bookkeeping for `P`: the root is fixed by its deep-water limit and
/// continued along paths from there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchContext {
    deep_limit: C64,
    deep_depth: f64,
    continuation_steps: usize,
}

impl Default for BranchContext {
    fn default() -> Self {
        Self {
            deep_limit: -C64::from_polar(1.0, -PI / 4.0),
            deep_depth: 50.0,
            continuation_steps: 400,
        }
    }
}

impl BranchContext {
    pub fn new() -> Self {
        Self::default()
    }

    /// `lim_{y→-∞} P(x + iy)`.
    pub fn deep_limit(&self) -> C64 {
        self.deep_limit
    }

    /// The root of `tan(w/2)` nearest `previous`.
    pub fn continue_root(&self, w: C64, previous: C64) -> C64 {
        let r = tan_half(w).sqrt();
        if (r - previous).norm() <= (-r - previous).norm() {
            r
        } else {
            -r
        }
    }

    /// `P(w)` on the water branch, continued along the vertical segment from
    /// `x - i·depth`. The segment must lie in the water region.
    pub fn map_from_deep(&self, w: C64) -> C64 {
        let start = w.im.min(0.0) - self.deep_depth;
        let mut root = self.continue_root(C64::new(w.re, start), self.deep_limit);
        for s in 1..=self.continuation_steps {
            let y = start + (w.im - start) * s as f64 / self.continuation_steps as f64;
            root = self.continue_root(C64::new(w.re, y), root);
        }
        root
    }
}

/// Maps a physical (plain) curve to its closed image `z̃ = P(z)`.
///
/// The lowest node is reached from deep water; the branch is then continued
/// node to node. Fails if the argument jumps by more than [`MAX_BRANCH_JUMP`]
/// between neighbours or if the continuation does not close after a period.
pub fn forward_map(curve: &InterfaceCurve, ctx: &BranchContext) -> Result<InterfaceCurve> {
    if curve.domain() != Domain::Plain {
        return Err(Error::InvalidArgument("forward_map expects a plain-domain curve".into()));
    }
    let z = curve.points();
    let n = z.len();
    let start = (0..n)
        .min_by(|&i, &j| z[i].im.total_cmp(&z[j].im))
        .unwrap_or(0);
    let mut image = vec![C64::new(0.0, 0.0); n];
    image[start] = ctx.map_from_deep(z[start]);
    let mut prev = image[start];
    for step in 1..=n {
        let j = (start + step) % n;
        let from = (start + step - 1) % n;
        let next = ctx.continue_root(z[j], prev);
        let jump = (next / prev).arg().abs();
        if !jump.is_finite() || jump > MAX_BRANCH_JUMP {
            return Err(Error::BranchDiscontinuity { from, to: j, jump });
        }
        if step == n {
            if (next - image[start]).norm() > 1e-9 * (1.0 + image[start].norm()) {
                return Err(Error::BranchNotClosed);
            }
        } else {
            image[j] = next;
        }
        prev = next;
    }
    InterfaceCurve::from_points(Domain::Tilde, image)
}

fn check_singular(zt: C64, tol: f64) -> Result<()> {
    for (index, q) in singular_points().iter().enumerate() {
        let distance = (zt - q).norm();
        if distance < tol {
            return Err(Error::SingularPoint { index, distance });
        }
    }
    Ok(())
}

/// `P⁻¹(z̃) = 2 arctan(z̃²)` on the principal branch (real part in `(-π, π]`).
pub fn inverse_map_point(zt: C64) -> Result<C64> {
    check_singular(zt, INVERSE_SINGULAR_TOLERANCE)?;
    Ok(2.0 * (zt * zt).atan())
}

/// Maps a closed curve back to the physical domain, unwrapping the real part
/// so that `z₁ - α` is periodic and as close to zero as possible at `α = -π`.
pub fn inverse_map(curve: &InterfaceCurve) -> Result<InterfaceCurve> {
    if curve.domain() != Domain::Tilde {
        return Err(Error::InvalidArgument("inverse_map expects a tilde-domain curve".into()));
    }
    let grid = curve.grid();
    let h = grid.spacing();
    let mut w: Vec<C64> = Vec::with_capacity(curve.n());
    for (j, &zt) in curve.points().iter().enumerate() {
        let mut p = inverse_map_point(zt)?;
        let target = if j == 0 { grid.node(0) } else { w[j - 1].re + h };
        p.re += 2.0 * PI * ((target - p.re) / (2.0 * PI)).round();
        w.push(p);
    }
    InterfaceCurve::from_points(Domain::Plain, w)
}

/// Closed-form derivatives of `P⁻¹` along a curve.
///
/// `a = dP⁻¹/dz̃`, `b = d²P⁻¹/dz̃²`, `c = d³P⁻¹/dz̃³`, `Q = 1/|a|`. Real
/// gradients and Hessians of the components follow from Cauchy-Riemann.
#[derive(Debug, Clone, PartialEq)]
pub struct MapJet {
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    pub c: Vec<C64>,
    pub q: Vec<f64>,
}

impl MapJet {
    /// The jet of the identity map: `a = 1`, `b = c = 0`, `Q = 1`.
    pub fn identity(n: usize) -> Self {
        Self {
            a: vec![C64::new(1.0, 0.0); n],
            b: vec![C64::new(0.0, 0.0); n],
            c: vec![C64::new(0.0, 0.0); n],
            q: vec![1.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn grad_p1(&self, j: usize) -> [f64; 2] {
        [self.a[j].re, -self.a[j].im]
    }

    pub fn grad_p2(&self, j: usize) -> [f64; 2] {
        [self.a[j].im, self.a[j].re]
    }

    pub fn hess_p1(&self, j: usize) -> [[f64; 2]; 2] {
        let b = self.b[j];
        [[b.re, -b.im], [-b.im, -b.re]]
    }

    pub fn hess_p2(&self, j: usize) -> [[f64; 2]; 2] {
        let b = self.b[j];
        [[b.im, b.re], [b.re, -b.im]]
    }

    /// `G = (Im(ā b), Re(ā b))`.
    pub fn g(&self, j: usize) -> [f64; 2] {
        let ab = self.a[j].conj() * self.b[j];
        [ab.im, ab.re]
    }

    /// Gradient of `Q` at the curve point: `∇Q·d = -Q³ Re(ā b d)`.
    pub fn grad_q(&self, j: usize) -> [f64; 2] {
        let ab = self.a[j].conj() * self.b[j];
        let q3 = self.q[j].powi(3);
        [-q3 * ab.re, q3 * ab.im]
    }

    /// Directional derivative `∇G · d` as a 2-vector.
    pub fn grad_g_dot(&self, j: usize, d: C64) -> [f64; 2] {
        let dab = (self.b[j] * d).conj() * self.b[j] + self.a[j].conj() * self.c[j] * d;
        [dab.im, dab.re]
    }

    /// `Q²` at every node.
    pub fn q_squared(&self) -> Vec<f64> {
        self.q.iter().map(|q| q * q).collect()
    }
}

/// `(a, b, c)` at one point.
pub fn map_derivatives(zt: C64) -> (C64, C64, C64) {
    let z2 = zt * zt;
    let z3 = z2 * zt;
    let z4 = z2 * z2;
    let d = 1.0 + z4;
    let a = 4.0 * zt / d;
    let b = 4.0 * (1.0 - 3.0 * z4) / (d * d);
    let c = 16.0 * z3 * (3.0 * z4 - 5.0) / (d * d * d);
    (a, b, c)
}

/// Evaluates the map jet along a tilde curve.
pub fn map_jet(curve: &InterfaceCurve) -> Result<MapJet> {
    let n = curve.n();
    let mut jet = MapJet { a: Vec::with_capacity(n), b: Vec::with_capacity(n), c: Vec::with_capacity(n), q: Vec::with_capacity(n) };
    for &zt in curve.points() {
        check_singular(zt, JET_SINGULAR_TOLERANCE)?;
        let (a, b, c) = map_derivatives(zt);
        jet.a.push(a);
        jet.b.push(b);
        jet.c.push(c);
        jet.q.push(1.0 / a.norm());
    }
    Ok(jet)
}

/// Curvature `z_αα·z_α^⊥ / |z_α|³` of any curve.
pub fn curvature_plain(curve: &InterfaceCurve) -> PeriodicField {
    PeriodicField::from_raw(curve.grid(), curve.curvature())
}

/// Curvature of the preimage split as `K = Q K̃ + M`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureParts {
    /// Curvature of the tilde curve itself.
    pub k_tilde: PeriodicField,
    /// `Q³ X / |z̃_α|³` with `X = |z̃_α|² ⟨G, z̃_α⟩`.
    pub m: PeriodicField,
    /// Curvature of `P⁻¹(z̃)`.
    pub k: PeriodicField,
}

/// `X = |z̃_α|² ⟨G, z̃_α⟩` at every node.
pub fn x_term(curve: &InterfaceCurve, jet: &MapJet) -> Vec<f64> {
    curve
        .tangent()
        .iter()
        .enumerate()
        .map(|(j, d)| {
            let g = jet.g(j);
            d.norm_sqr() * (g[0] * d.re + g[1] * d.im)
        })
        .collect()
}

/// Transports curvature from the tilde curve to its preimage. The `M` term
/// enters with a plus sign: `K = Q K̃ + Q³X/|z̃_α|³`.
pub fn curvature_transform(curve: &InterfaceCurve, jet: &MapJet) -> Result<CurvatureParts> {
    check_jet(curve, jet)?;
    let grid = curve.grid();
    let k_tilde = curve.curvature();
    let x = x_term(curve, jet);
    let speed = curve.speed();
    let m: Vec<f64> = (0..curve.n()).map(|j| jet.q[j].powi(3) * x[j] / speed[j].powi(3)).collect();
    let k: Vec<f64> = (0..curve.n()).map(|j| jet.q[j] * k_tilde[j] + m[j]).collect();
    Ok(CurvatureParts {
        k_tilde: PeriodicField::from_raw(grid, k_tilde),
        m: PeriodicField::from_raw(grid, m),
        k: PeriodicField::from_raw(grid, k),
    })
}

fn quad_form(h: [[f64; 2]; 2], d: C64) -> f64 {
    h[0][0] * d.re * d.re + 2.0 * h[0][1] * d.re * d.im + h[1][1] * d.im * d.im
}

fn dot2(g: [f64; 2], d: C64) -> f64 {
    g[0] * d.re + g[1] * d.im
}

/// The surface-tension contribution to `ω̃_t`:
/// `τ ∂_α[Q³/|z̃_α|³ (z̃_αᵀHP₂⁻¹z̃_α ∇P₁⁻¹·z̃_α - z̃_αᵀHP₁⁻¹z̃_α ∇P₂⁻¹·z̃_α) + Q K̃]`,
/// assembled from the real gradients and Hessians.
pub fn surface_tension_tilde_terms(curve: &InterfaceCurve, jet: &MapJet, tau: f64) -> Result<PeriodicField> {
    check_jet(curve, jet)?;
    let grid = curve.grid();
    if tau == 0.0 {
        return Ok(PeriodicField::zeros(grid));
    }
    let k_tilde = curve.curvature();
    let inner: Vec<f64> = curve
        .tangent()
        .iter()
        .enumerate()
        .map(|(j, &d)| {
            let s3 = d.norm().powi(3);
            let bracket =
                quad_form(jet.hess_p2(j), d) * dot2(jet.grad_p1(j), d) - quad_form(jet.hess_p1(j), d) * dot2(jet.grad_p2(j), d);
            jet.q[j].powi(3) / s3 * bracket + jet.q[j] * k_tilde[j]
        })
        .collect();
    let d = spectral::derivative(&inner, 1);
    Ok(PeriodicField::from_raw(grid, d.into_iter().map(|v| tau * v).collect()))
}

/// Pointwise distances `|z̃_j - q^l|`, one vector per singular point.
pub fn singular_point_distances(curve: &InterfaceCurve) -> [Vec<f64>; 5] {
    let qs = singular_points();
    std::array::from_fn(|l| curve.points().iter().map(|z| (z - qs[l]).norm()).collect())
}

fn check_jet(curve: &InterfaceCurve, jet: &MapJet) -> Result<()> {
    if jet.len() != curve.n() {
        return Err(Error::LengthMismatch { expected: curve.n(), got: jet.len() });
    }
    Ok(())
}
