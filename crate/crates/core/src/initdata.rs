//! Initial states: the splash curve and its splat perturbation, simple test
//! waves, and the inversion from prescribed normal velocity to `ω`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::birkhoff_rott::{perp, solve_implicit, BrOperator, Domain, InterfaceCurve, SheetState};
use crate::conformal::{forward_map, BranchContext};
use crate::diagnostics::{arc_chord, curve_self_intersection, q_distances, SelfContact};
use crate::dynamics::enforce_uniform_parametrization;
use crate::error::{Error, Result};
use crate::spectral::{self, PeriodicField, PeriodicGrid, C64};

/// Residual target of the normal-velocity inversion.
pub const NORMAL_VELOCITY_TOLERANCE: f64 = 1e-10;

/// Spectral decay demanded of smooth data. Loose enough for the `C^∞` but
/// non-analytic splat blend at moderate resolution.
pub const SMOOTHNESS_RATIO: f64 = 1e-3;

/// Smallest accepted `m(q^l)` for valid tilde data.
pub const MIN_SINGULAR_DISTANCE: f64 = 1e-3;

const SPLASH_A1: f64 = 0.25 * (-1.5 * PI - 1.9);
const SPLASH_A3: f64 = 0.25 * (0.5 * PI - 1.9);

fn splash_point(a: f64) -> C64 {
    C64::new(
        a + SPLASH_A1 * a.sin() + 0.5 * (2.0 * a).sin() + SPLASH_A3 * (3.0 * a).sin(),
        0.1 * a.cos() - 0.3 * (2.0 * a).cos() + 0.1 * (3.0 * a).cos(),
    )
}

/// The splash curve sampled exactly from its Fourier coefficients. It touches
/// itself at `z(±π/2) = (0, 0.3)`; not in the uniform gauge.
pub fn splash_curve(n: usize) -> Result<InterfaceCurve> {
    if n < 64 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!("splash curve needs even n >= 64, got {n}")));
    }
    InterfaceCurve::from_fn(Domain::Plain, n, splash_point)
}

/// `Ψ_α = 3cos α - 3.4cos 2α + cos 3α + 0.2cos 4α`, the tangential derivative
/// of the stream function on the splash curve.
pub fn prescribed_stream_derivative(n: usize) -> Result<PeriodicField> {
    let grid = PeriodicGrid::new(n)?;
    Ok(PeriodicField::from_fn(grid, |a| 3.0 * a.cos() - 3.4 * (2.0 * a).cos() + (3.0 * a).cos() + 0.2 * (4.0 * a).cos()))
}

/// `C^∞` step: 0 for `x ≤ 0`, 1 for `x ≥ 1`.
fn smooth_step(x: f64) -> f64 {
    let f = |t: f64| if t <= 0.0 { 0.0 } else { (-1.0 / t).exp() };
    let (a, b) = (f(x), f(1.0 - x));
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Splash curve with `z₁` blended to exactly zero on `|α ∓ π/2| < flat_width`,
/// so the two branches touch along an arc.
pub fn splat_curve(n: usize, flat_width: f64) -> Result<InterfaceCurve> {
    if !(flat_width > 0.0 && flat_width < PI / 4.0) {
        return Err(Error::InvalidArgument(format!("flat_width = {flat_width} must lie in (0, π/4)")));
    }
    splash_curve(n)?;
    InterfaceCurve::from_fn(Domain::Plain, n, |a| splat_point(a, flat_width))
}

/// Splash curve with its two contact branches pulled apart horizontally by
/// `gap`: `z₁ + (gap/2) sin α`.
pub fn near_splash_curve(n: usize, gap: f64) -> Result<InterfaceCurve> {
    if !(gap > 0.0) {
        return Err(Error::InvalidArgument("gap must be positive".into()));
    }
    splash_curve(n)?;
    InterfaceCurve::from_fn(Domain::Plain, n, |a| splash_point(a) + C64::new(0.5 * gap * a.sin(), 0.0))
}

/// Result of inverting the normal velocity.
#[derive(Debug, Clone)]
pub struct NormalVelocitySolve {
    pub omega: Vec<f64>,
    /// Residual with the constant and alternating modes removed.
    pub residual: f64,
    /// Part of `Ψ_α` outside the range of the discrete operator: its constant
    /// and alternating components after the solve. Vanishes spectrally with `n`.
    pub defect: f64,
    pub iterations: usize,
    pub dense: bool,
}

/// Splits `r` into its constant-plus-alternating part and the rest.
fn split_null_modes(r: &[f64]) -> (Vec<f64>, f64) {
    let n = r.len() as f64;
    let m = r.iter().sum::<f64>() / n;
    let alt = r.iter().enumerate().map(|(i, v)| if i % 2 == 0 { *v } else { -v }).sum::<f64>() / n;
    let null = |i: usize| m + if i % 2 == 0 { alt } else { -alt };
    let rest: Vec<f64> = r.iter().enumerate().map(|(i, v)| v - null(i)).collect();
    (rest, m.abs() + alt.abs())
}

/// Solves `BR(z, ω)·z_α^⊥ = Ψ_α` for `ω` with zero mean and zero Nyquist mode.
///
/// The alternate-point operator annihilates both the constant and the
/// alternating mode, so the equation is solved modulo those modes and the
/// leftover is returned as [`NormalVelocitySolve::defect`]. The leading part
/// of the operator is `½H`, so the iteration is preconditioned by `-2H`; a
/// bordered dense solve takes over if it stalls.
pub fn solve_omega_from_normal_velocity(curve: &InterfaceCurve, psi_alpha: &[f64]) -> Result<NormalVelocitySolve> {
    let n = curve.n();
    if psi_alpha.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: psi_alpha.len() });
    }
    let scale = spectral::max_abs(psi_alpha).max(1.0);
    let m = spectral::mean(psi_alpha);
    if m.abs() > 1e-12 * scale {
        return Err(Error::Solvability(m));
    }
    let op = BrOperator::new(curve)?;
    let normals: Vec<C64> = curve.tangent().iter().map(|t| perp(*t)).collect();
    let residual = |w: &[f64]| -> Vec<f64> {
        op.apply_dot(w, &normals).iter().zip(psi_alpha).map(|(a, b)| b - a).collect()
    };
    let tol = NORMAL_VELOCITY_TOLERANCE;

    let mut w = vec![0.0; n];
    let mut best = f64::INFINITY;
    let mut stalled = 0;
    for it in 0..500 {
        let r = residual(&w);
        let (rest, defect) = split_null_modes(&r);
        let rn = spectral::max_abs(&rest);
        if rn < tol {
            return Ok(NormalVelocitySolve { omega: w, residual: rn, defect, iterations: it, dense: false });
        }
        if rn < 0.9 * best {
            best = rn;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled > 10 {
                break;
            }
        }
        let corr = spectral::hilbert(&r);
        w.iter_mut().zip(&corr).for_each(|(wi, c)| *wi -= 2.0 * c);
    }

    log::debug!("normal-velocity iteration stalled at {best:e}; using bordered dense solve");
    let alt = |i: usize| if i % 2 == 0 { 1.0 } else { -1.0 };
    let a = op.dot_matrix(&normals);
    let mut m = DMatrix::<f64>::zeros(n + 2, n + 2);
    m.view_mut((0, 0), (n, n)).copy_from(&a);
    for i in 0..n {
        m[(i, n)] = 1.0;
        m[(n, i)] = 1.0;
        m[(i, n + 1)] = alt(i);
        m[(n + 1, i)] = alt(i);
    }
    let mut b = DVector::<f64>::zeros(n + 2);
    b.rows_mut(0, n).copy_from_slice(psi_alpha);
    let lu = m.lu();
    let x = lu.solve(&b).ok_or_else(|| Error::IllConditioned("singular normal-velocity system".into()))?;
    let mut w: Vec<f64> = x.rows(0, n).iter().copied().collect();
    // one step of iterative refinement
    let mut fix = DVector::<f64>::zeros(n + 2);
    let (rest, _) = split_null_modes(&residual(&w));
    fix.rows_mut(0, n).copy_from_slice(&rest);
    if let Some(c) = lu.solve(&fix) {
        w.iter_mut().zip(c.rows(0, n).iter()).for_each(|(wi, ci)| *wi += ci);
    }
    let (rest, defect) = split_null_modes(&residual(&w));
    let rn = spectral::max_abs(&rest);
    if !(rn < tol) {
        return Err(Error::IllConditioned(format!("normal-velocity residual {rn:e}")));
    }
    Ok(NormalVelocitySolve { omega: w, residual: rn, defect, iterations: 0, dense: true })
}

/// Carries `ω` from a plain curve to its tilde image at the same parameters by
/// matching the boundary potential: `ω̃/2 + BR(z̃, ω̃)·z̃_α = ω/2 + BR(z, ω)·z_α`.
pub fn transfer_omega_to_tilde(plain: &InterfaceCurve, omega: &[f64], tilde: &InterfaceCurve) -> Result<Vec<f64>> {
    if plain.n() != tilde.n() || omega.len() != plain.n() {
        return Err(Error::LengthMismatch { expected: plain.n(), got: omega.len().min(tilde.n()) });
    }
    let t = BrOperator::new(plain)?.apply_tangential(omega);
    let rhs: Vec<f64> = omega.iter().zip(&t).map(|(w, b)| w + 2.0 * b).collect();
    Ok(solve_implicit(&BrOperator::new(tilde)?, &rhs)?.omega_t)
}

/// Per-clause outcome of the splash-curve definition.
#[derive(Debug, Clone)]
pub struct SplashValidationReport {
    /// Smooth and periodic: the upper half of the spectrum stays below
    /// [`SMOOTHNESS_RATIO`] of the peak coefficient.
    pub smooth_periodic: bool,
    /// Self-contact at exactly one point (or along an arc for splat data).
    pub contact: Option<SelfContact>,
    pub single_contact: bool,
    /// Arc-chord maximum with a neighbourhood of the first contact removed.
    pub arc_chord_off_contact: f64,
    pub arc_chord_ok: bool,
    /// The points `(0, 0)` and `(±π, 0)` lie in the vacuum.
    pub vacuum_points: bool,
    /// The tilde image exists, is closed and satisfies arc-chord.
    pub tilde_closed: bool,
    pub tilde_arc_chord: f64,
    /// Distance of the chosen branch from its deep-water limit at depth.
    pub branch_limit: f64,
    pub branch_ok: bool,
    /// Distances of the tilde curve from the singular points.
    pub q_distances: [f64; 5],
    pub q_ok: bool,
}

impl SplashValidationReport {
    pub fn passed(&self) -> bool {
        self.smooth_periodic
            && self.single_contact
            && self.arc_chord_ok
            && self.vacuum_points
            && self.tilde_closed
            && self.branch_ok
            && self.q_ok
    }

    /// One `label: PASS|FAIL (witness)` line per clause.
    pub fn lines(&self) -> Vec<String> {
        let mark = |b: bool| if b { "PASS" } else { "FAIL" };
        let contact = match &self.contact {
            Some(SelfContact::Point { alpha1, alpha2, point, .. }) => {
                format!("point at ({:.12}, {:.12}), alpha = {alpha1:.10}, {alpha2:.10}", point.re, point.im)
            }
            Some(SelfContact::Arc { alpha1, alpha2, .. }) => {
                format!("arc over [{:.6}, {:.6}] and [{:.6}, {:.6}]", alpha1.0, alpha1.1, alpha2.0, alpha2.1)
            }
            None => "none".into(),
        };
        vec![
            format!("smooth periodic: {}", mark(self.smooth_periodic)),
            format!("single contact: {} ({contact})", mark(self.single_contact)),
            format!("arc-chord off contact: {} (F = {:.6})", mark(self.arc_chord_ok), self.arc_chord_off_contact),
            format!("vacuum contains (0,0), (±π,0): {}", mark(self.vacuum_points)),
            format!("tilde image closed with arc-chord: {} (F = {:.6})", mark(self.tilde_closed), self.tilde_arc_chord),
            format!("branch limit: {} ({:e})", mark(self.branch_ok), self.branch_limit),
            format!(
                "singular points avoided: {} (m = {})",
                mark(self.q_ok),
                self.q_distances.iter().map(|d| format!("{d:.6}")).collect::<Vec<_>>().join(", ")
            ),
        ]
    }
}

fn spectrally_smooth(curve: &InterfaceCurve) -> bool {
    let hat = spectral::fft(curve.periodic_part());
    let n = hat.len();
    let top = hat.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let tail = (0..n)
        .filter(|&i| spectral::wavenumber(i, n).unsigned_abs() as usize > n / 4)
        .map(|i| hat[i].norm())
        .fold(0.0, f64::max);
    tail <= SMOOTHNESS_RATIO * top
}

/// Ray parity: a point is in the vacuum if a ray to `y = +∞` crosses the
/// periodic curve an even number of times.
pub fn in_vacuum(curve: &InterfaceCurve, p: C64) -> bool {
    let z = curve.points();
    let n = z.len();
    let top = z.iter().map(|v| v.im).fold(f64::NEG_INFINITY, f64::max) + 1.0;
    if p.im >= top {
        return true;
    }
    // slanted ray, away from the symmetry axes of typical data
    let theta: f64 = 1.3;
    let len = (top - p.im) / theta.sin();
    let end = p + C64::from_polar(len, theta);
    let period = match curve.domain() {
        Domain::Plain => 2.0 * PI,
        Domain::Tilde => 0.0,
    };
    let shifts: Vec<f64> = match curve.domain() {
        Domain::Plain => (-3..=3).map(|m| m as f64 * period).collect(),
        Domain::Tilde => vec![0.0],
    };
    let mut count = 0;
    for &s in &shifts {
        for i in 0..n {
            let a = z[i] + s;
            let b = if i + 1 == n { z[0] + s + period } else { z[i + 1] + s };
            if segments_cross(p, end, a, b) {
                count += 1;
            }
        }
    }
    count % 2 == 0
}

fn segments_cross(p0: C64, p1: C64, q0: C64, q1: C64) -> bool {
    let r = p1 - p0;
    let s = q1 - q0;
    let denom = r.re * s.im - r.im * s.re;
    if denom == 0.0 {
        return false;
    }
    let w = q0 - p0;
    let u = (w.re * s.im - w.im * s.re) / denom;
    let v = (w.re * r.im - w.im * r.re) / denom;
    (0.0..=1.0).contains(&u) && (0.0..1.0).contains(&v)
}

fn arc_chord_excluding(curve: &InterfaceCurve, center: f64, radius: f64) -> f64 {
    let n = curve.n();
    let h = curve.grid().spacing();
    let nodes = curve.grid().nodes();
    let z = curve.points();
    let near = |a: f64| {
        let d = (a - center + PI).rem_euclid(2.0 * PI) - PI;
        d.abs() < radius
    };
    let mut best: f64 = curve.tangent().iter().map(|t| 1.0 / t.norm()).fold(0.0, f64::max);
    for i in 0..n {
        if near(nodes[i]) {
            continue;
        }
        for m in 1..=n / 2 {
            let j = (i + n - m) % n;
            if near(nodes[j]) {
                continue;
            }
            let d = crate::birkhoff_rott::chord(curve.domain(), z[i] - z[j]);
            best = best.max(m as f64 * h / d);
        }
    }
    best
}

/// Checks the clauses of the splash-curve definition on a plain curve.
pub fn validate_splash(curve: &InterfaceCurve, ctx: &BranchContext) -> SplashValidationReport {
    let smooth_periodic = curve.domain() == Domain::Plain && spectrally_smooth(curve);
    let contact = curve_self_intersection(curve);
    let single_contact = contact.is_some();
    let center = match &contact {
        Some(SelfContact::Point { alpha1, .. }) => *alpha1,
        Some(SelfContact::Arc { alpha1, .. }) => 0.5 * (alpha1.0 + alpha1.1),
        None => f64::NAN,
    };
    let radius = match &contact {
        Some(SelfContact::Arc { alpha1, .. }) => 0.5 * (alpha1.1 - alpha1.0) + 0.2,
        _ => 0.2,
    };
    let arc_chord_off_contact = if center.is_nan() { arc_chord(curve).f_max } else { arc_chord_excluding(curve, center, radius) };
    let arc_chord_ok = arc_chord_off_contact.is_finite() && arc_chord_off_contact < 1e4;
    let vacuum_points = [C64::new(0.0, 0.0), C64::new(PI, 0.0), C64::new(-PI, 0.0)].iter().all(|p| in_vacuum(curve, *p));
    let (tilde_closed, tilde_arc_chord, q, branch_limit) = match forward_map(curve, ctx) {
        Ok(t) => {
            let f = arc_chord(&t).f_max;
            let deep = ctx.map_from_deep(C64::new(curve.points()[0].re, -40.0));
            (f.is_finite(), f, q_distances(&t), (deep - ctx.deep_limit()).norm())
        }
        Err(e) => {
            log::debug!("forward map failed: {e}");
            (false, f64::INFINITY, [f64::NAN; 5], f64::NAN)
        }
    };
    let q_ok = q.iter().all(|d| *d > MIN_SINGULAR_DISTANCE);
    SplashValidationReport {
        smooth_periodic,
        contact,
        single_contact,
        arc_chord_off_contact,
        arc_chord_ok,
        vacuum_points,
        tilde_closed,
        tilde_arc_chord,
        branch_limit,
        branch_ok: branch_limit < 1e-3,
        q_distances: q,
        q_ok,
    }
}

/// Named initial data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetName {
    Splash,
    Splat,
    Flat,
    StandingWave,
    NearSplash,
}

impl PresetName {
    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::Splash => "splash",
            PresetName::Splat => "splat",
            PresetName::Flat => "flat",
            PresetName::StandingWave => "standing_wave",
            PresetName::NearSplash => "near_splash",
        }
    }
}

impl std::str::FromStr for PresetName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "splash" => Ok(PresetName::Splash),
            "splat" => Ok(PresetName::Splat),
            "flat" => Ok(PresetName::Flat),
            "standing_wave" => Ok(PresetName::StandingWave),
            "near_splash" => Ok(PresetName::NearSplash),
            other => Err(Error::InvalidArgument(format!("unknown preset '{other}'"))),
        }
    }
}

/// Free parameters of the presets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PresetParams {
    /// Standing-wave surface amplitude.
    pub amplitude: f64,
    /// Standing-wave sheet-strength amplitude (zero for a wave released from rest).
    pub omega_amplitude: f64,
    /// Wavenumber of the standing wave.
    pub mode: u32,
    /// Vertical offset of flat and standing-wave data; must be negative for
    /// tilde runs so the map's singular points stay in the vacuum.
    pub depth: f64,
    /// Half-width of the flattened windows of the splat curve. `z₂` turns at
    /// `|α| = π/2 + 0.146`, so wider windows fold the curve and fail validation.
    pub flat_width: f64,
    /// Horizontal separation of the near-splash branches.
    pub gap: f64,
    /// Reverse the prescribed velocity (approaching instead of separating).
    pub flip_velocity: bool,
    /// How splash-type data is sampled along the curve.
    pub parametrization: Parametrization,
}

/// Node placement for splash-type presets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Parametrization {
    /// The parameter of the Fourier formulas.
    Analytic,
    /// Equal arclength. Needs `n` in the thousands to resolve splash data.
    Arclength,
    /// Equal steps of `|z_α| sqrt(1 + (ℓκ)²) dα` with the given `ℓ`.
    CurvatureWeighted(f64),
}

impl Default for PresetParams {
    fn default() -> Self {
        Self { amplitude: 0.01, omega_amplitude: 0.0, mode: 1, depth: 0.0, flat_width: 0.1, gap: 0.1, flip_velocity: false, parametrization: Parametrization::Analytic }
    }
}

/// A preset in whichever domains it can be posed.
#[derive(Debug, Clone)]
pub struct PresetState {
    pub name: PresetName,
    pub plain: Option<SheetState>,
    pub tilde: Option<SheetState>,
    /// Splash-definition report for splash-type data.
    pub validation: Option<SplashValidationReport>,
    /// `max |ω̃_transfer - ω̃_direct|` where both constructions exist.
    pub omega_consistency: Option<f64>,
    /// Residual of the normal-velocity inversion, if used.
    pub inversion_residual: Option<f64>,
    /// Solvability defect of the normal-velocity inversion, if used.
    pub inversion_defect: Option<f64>,
}

impl PresetState {
    pub fn state(&self, domain: Domain) -> Result<&SheetState> {
        let s = match domain {
            Domain::Plain => self.plain.as_ref(),
            Domain::Tilde => self.tilde.as_ref(),
        };
        s.ok_or_else(|| {
            Error::InvalidArgument(format!("preset '{}' has no {} state", self.name.as_str(), domain.as_str()))
        })
    }
}

/// Sign that makes the prescribed velocity separate the contact branches:
/// the normal velocity at the contact must point into the water.
fn separating_sign(curve: &InterfaceCurve, psi: &[f64], alphas: [f64; 2]) -> f64 {
    let interp = spectral::TrigInterpolant::from_real(psi);
    let c = curve.interpolant();
    let mut s = 0.0;
    for a in alphas {
        let t = c.eval_derivative(a, 1);
        // u·n = Ψ_α/|z_α| with n pointing into the vacuum
        s += interp.eval(a).re / t.norm();
    }
    if s > 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Oversampling factor for the arclength inversion of analytic data.
const OVERSAMPLE: usize = 16;

/// Samples `source` (or its tilde image) at `n` parameters equally spaced in
/// arclength, with `density` carried as a density in `α`.
///
/// The arclength is inverted on an oversampled grid and the source is then
/// evaluated exactly, so node spacing is uniform to round-off even when the
/// uniformly parametrized curve is under-resolved at `n`; in that case the
/// spectral [`InterfaceCurve::gauge_spread`] stays above zero and measures the
/// resolution deficit.
pub fn uniform_sample(
    n: usize,
    source: &dyn Fn(f64) -> C64,
    density: &dyn Fn(f64) -> f64,
    domain: Domain,
) -> Result<(InterfaceCurve, PeriodicField)> {
    let (curve, values) = equidistributed_sample(n, source, density, domain, 0.0)?;
    let spread = curve.gauge_spread();
    if spread > crate::dynamics::UNIFORM_TOLERANCE {
        log::warn!(
            "{} curve is under-resolved in the uniform gauge at n = {n}: spectral spread {spread:.2e}",
            domain.as_str()
        );
    }
    Ok((curve, values))
}

/// Samples `source` at `n` parameters equally spaced in the measure
/// `|z_α| sqrt(1 + (ℓκ)²) dα`, so nodes concentrate where the curvature
/// exceeds `1/ℓ`. With `ℓ = 0` this is equal arclength.
pub fn curvature_weighted_sample(
    n: usize,
    source: &dyn Fn(f64) -> C64,
    density: &dyn Fn(f64) -> f64,
    domain: Domain,
    length_scale: f64,
) -> Result<(InterfaceCurve, PeriodicField)> {
    if !(length_scale >= 0.0) {
        return Err(Error::InvalidArgument(format!("length scale {length_scale} must be non-negative")));
    }
    equidistributed_sample(n, source, density, domain, length_scale)
}

fn equidistributed_sample(
    n: usize,
    source: &dyn Fn(f64) -> C64,
    density: &dyn Fn(f64) -> f64,
    domain: Domain,
    length_scale: f64,
) -> Result<(InterfaceCurve, PeriodicField)> {
    let grid = PeriodicGrid::new(n)?;
    let m = (OVERSAMPLE * n).max(4096);
    let ctx = BranchContext::default();
    let fine_plain = InterfaceCurve::from_fn(Domain::Plain, m, source)?;
    let fine = match domain {
        Domain::Plain => fine_plain,
        Domain::Tilde => forward_map(&fine_plain, &ctx)?,
    };
    let fine_h = fine.grid().spacing();
    let speed = fine.speed();
    let weight: Vec<f64> = if length_scale > 0.0 {
        let zaa = spectral::derivative_c(fine.tangent(), 1);
        fine.tangent()
            .iter()
            .zip(&zaa)
            .zip(&speed)
            .map(|((t, tt), s)| {
                let kappa = (t.conj() * tt).im / (s * s * s);
                s * (1.0 + (length_scale * kappa).powi(2)).sqrt()
            })
            .collect()
    } else {
        speed
    };
    let a = spectral::mean(&weight);
    let weight_i = spectral::TrigInterpolant::from_real(&weight);
    let anti = spectral::TrigInterpolant::from_real(&spectral::antiderivative(&weight));
    let start = grid.node(0);
    let s0 = anti.eval(start).re;
    let measure = |x: f64| a * (x - start) + anti.eval(x).re - s0;

    let mut points = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    let mut x = start;
    for j in 0..n {
        let target = a * (grid.node(j) - start);
        if j > 0 {
            x += a * grid.spacing() / weight_i.eval(x).re.max(1e-3 * a);
            let mut converged = false;
            for _ in 0..100 {
                let step = (measure(x) - target) / weight_i.eval(x).re;
                if !step.is_finite() {
                    break;
                }
                x -= step;
                if step.abs() < 1e-15 * (1.0 + x.abs()) {
                    converged = true;
                    break;
                }
            }
            if !converged && (measure(x) - target).abs() > 1e-12 * a {
                return Err(Error::Reparametrization(format!("arclength inversion failed at node {j}")));
            }
        }
        let w = source(x);
        points.push(match domain {
            Domain::Plain => w,
            Domain::Tilde => {
                let k = (((x + PI) / fine_h).round() as isize).rem_euclid(m as isize) as usize;
                ctx.continue_root(w, fine.points()[k])
            }
        });
        values.push(density(x) * a / weight_i.eval(x).re);
    }
    let curve = InterfaceCurve::from_points(domain, points)?;
    Ok((curve, PeriodicField::from_raw(grid, values)))
}

fn stream_derivative_at(a: f64) -> f64 {
    3.0 * a.cos() - 3.4 * (2.0 * a).cos() + (3.0 * a).cos() + 0.2 * (4.0 * a).cos()
}

fn splat_point(a: f64, flat_width: f64) -> C64 {
    let p = splash_point(a);
    let d = (a.abs() - PI / 2.0).abs();
    let keep = 1.0 - smooth_step((2.0 * flat_width - d) / flat_width);
    C64::new(p.re * keep, p.im)
}

fn velocity_sign(curve: &InterfaceCurve, flip: bool) -> Result<f64> {
    let psi = prescribed_stream_derivative(curve.n())?.into_values();
    Ok(separating_sign(curve, &psi, [-PI / 2.0, PI / 2.0]) * if flip { -1.0 } else { 1.0 })
}

/// Samples `source` (mapped to `domain`) with `density` under the chosen
/// parametrization.
fn sample(
    n: usize,
    source: &dyn Fn(f64) -> C64,
    density: &dyn Fn(f64) -> f64,
    domain: Domain,
    parametrization: Parametrization,
) -> Result<(InterfaceCurve, Vec<f64>)> {
    let (curve, d) = match parametrization {
        Parametrization::Analytic => {
            let plain = InterfaceCurve::from_fn(Domain::Plain, n, source)?;
            let curve = match domain {
                Domain::Plain => plain,
                Domain::Tilde => forward_map(&plain, &BranchContext::default())?,
            };
            let d = curve.grid().nodes().iter().map(|a| density(*a)).collect::<Vec<_>>();
            return Ok((curve, centered(&d)));
        }
        Parametrization::Arclength => uniform_sample(n, source, density, domain)?,
        Parametrization::CurvatureWeighted(l) => curvature_weighted_sample(n, source, density, domain, l)?,
    };
    Ok((curve, centered(d.values())))
}

fn splash_like(name: PresetName, n: usize, params: &PresetParams) -> Result<PresetState> {
    let w = params.flat_width;
    let (curve, source): (InterfaceCurve, Box<dyn Fn(f64) -> C64>) = match name {
        PresetName::Splat => (splat_curve(n, w)?, Box::new(move |a| splat_point(a, w))),
        _ => (splash_curve(n)?, Box::new(splash_point)),
    };
    let report = validate_splash(&curve, &BranchContext::default());
    if !report.passed() {
        return Err(Error::InvalidArgument(format!(
            "{} data fails validation:\n{}",
            name.as_str(),
            report.lines().join("\n")
        )));
    }
    let sign = velocity_sign(&curve, params.flip_velocity)?;
    // the contact curve cannot carry the solve; it is done on the tilde image
    let density = move |a: f64| sign * stream_derivative_at(a);
    let (tilde, psi) = sample(n, &*source, &density, Domain::Tilde, params.parametrization)?;
    let solve = solve_omega_from_normal_velocity(&tilde, &psi)?;
    let grid = tilde.grid();
    Ok(PresetState {
        name,
        plain: None,
        tilde: Some(SheetState::new(tilde, PeriodicField::from_raw(grid, solve.omega), 0.0)?),
        validation: Some(report),
        omega_consistency: None,
        inversion_residual: Some(solve.residual),
        inversion_defect: Some(solve.defect),
    })
}

/// Removes the mean left by quadrature of a reparametrized mean-zero density.
fn centered(v: &[f64]) -> Vec<f64> {
    let m = spectral::mean(v);
    v.iter().map(|x| x - m).collect()
}

fn near_splash(n: usize, params: &PresetParams) -> Result<PresetState> {
    let gap = params.gap;
    let curve = near_splash_curve(n, gap)?;
    let sign = velocity_sign(&curve, params.flip_velocity)?;
    let source = move |a: f64| splash_point(a) + C64::new(0.5 * gap * a.sin(), 0.0);
    let density = move |a: f64| sign * stream_derivative_at(a);
    let (plain, psi) = sample(n, &source, &density, Domain::Plain, params.parametrization)?;
    let solve = solve_omega_from_normal_velocity(&plain, &psi)?;

    // the tilde image at matched parameters, with both ω̃ constructions
    let tilde = forward_map(&plain, &BranchContext::default())?;
    let transferred = transfer_omega_to_tilde(&plain, &solve.omega, &tilde)?;
    let direct = solve_omega_from_normal_velocity(&tilde, &psi)?;
    let consistency = transferred.iter().zip(&direct.omega).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if consistency > 1e-6 {
        log::warn!("near-splash ω̃ constructions differ by {consistency:e}");
    }
    let grid = plain.grid();
    Ok(PresetState {
        name: PresetName::NearSplash,
        plain: Some(SheetState::new(plain, PeriodicField::from_raw(grid, solve.omega), 0.0)?),
        tilde: Some(SheetState::new(tilde, PeriodicField::from_raw(grid, transferred), 0.0)?),
        validation: None,
        omega_consistency: Some(consistency),
        inversion_residual: Some(solve.residual.max(direct.residual)),
        inversion_defect: Some(solve.defect.max(direct.defect)),
    })
}

fn wave(name: PresetName, n: usize, params: &PresetParams) -> Result<PresetState> {
    let (amp, wamp) = match name {
        PresetName::Flat => (0.0, 0.0),
        _ => (params.amplitude, params.omega_amplitude),
    };
    let k = params.mode as f64;
    let curve = InterfaceCurve::from_fn(Domain::Plain, n, |a| C64::new(a, params.depth + amp * (k * a).cos()))?;
    let omega = PeriodicField::from_fn(curve.grid(), |a| wamp * (k * a).sin());
    let (plain, omega) = enforce_uniform_parametrization(&curve, &omega)?;
    let tilde = if params.depth < 0.0 {
        let raw = forward_map(&plain, &BranchContext::default())?;
        if q_distances(&raw).iter().any(|d| *d < MIN_SINGULAR_DISTANCE) {
            None
        } else {
            let w = transfer_omega_to_tilde(&plain, omega.values(), &raw)?;
            let (t, tw) = enforce_uniform_parametrization(&raw, &PeriodicField::from_raw(raw.grid(), w))?;
            Some(SheetState::new(t, tw, 0.0)?)
        }
    } else {
        None
    };
    Ok(PresetState {
        name,
        plain: Some(SheetState::new(plain, omega, 0.0)?),
        tilde,
        validation: None,
        omega_consistency: None,
        inversion_residual: None,
        inversion_defect: None,
    })
}

/// Builds a validated, uniform-gauge preset.
pub fn preset(name: PresetName, n: usize, params: &PresetParams) -> Result<PresetState> {
    match name {
        PresetName::Splash | PresetName::Splat => splash_like(name, n, params),
        PresetName::NearSplash => near_splash(n, params),
        PresetName::Flat | PresetName::StandingWave => wave(name, n, params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splash_contact_point() {
        let c = InterfaceCurve::from_fn(Domain::Plain, 64, splash_point).unwrap();
        let _ = c;
        for a in [PI / 2.0, -PI / 2.0] {
            let p = splash_point(a);
            assert!((p - C64::new(0.0, 0.3)).norm() < 1e-12);
        }
        let p0 = splash_point(0.0);
        assert!((p0 - C64::new(0.0, -0.1)).norm() < 1e-15);
    }

    #[test]
    fn splash_parity() {
        for a in [0.3, 1.1, 2.5] {
            let (p, q) = (splash_point(a), splash_point(-a));
            assert!(((p.re - a) + (q.re + a)).abs() < 1e-14);
            assert!((p.im - q.im).abs() < 1e-15);
        }
    }

    #[test]
    fn stream_derivative_values() {
        let psi = prescribed_stream_derivative(64).unwrap();
        let grid = psi.grid();
        let at = |a: f64| psi.values()[((a + PI) / grid.spacing()).round() as usize % 64];
        assert!((at(0.0) - 0.8).abs() < 1e-14);
        assert!((at(-PI) - (-7.2)).abs() < 1e-14);
        assert!(psi.mean().abs() < 1e-15);
    }

    #[test]
    fn flat_inversion_is_minus_two_hilbert() {
        let n = 64;
        let c = InterfaceCurve::from_fn(Domain::Plain, n, |a| C64::new(a, 0.0)).unwrap();
        let psi: Vec<f64> = c.grid().nodes().iter().map(|a| a.cos()).collect();
        let s = solve_omega_from_normal_velocity(&c, &psi).unwrap();
        let expected: Vec<f64> = c.grid().nodes().iter().map(|a| -2.0 * a.sin()).collect();
        let err = s.omega.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn nonzero_mean_is_rejected() {
        let c = InterfaceCurve::from_fn(Domain::Plain, 32, |a| C64::new(a, 0.0)).unwrap();
        assert!(matches!(solve_omega_from_normal_velocity(&c, &vec![1.0; 32]), Err(Error::Solvability(_))));
    }

    #[test]
    fn splat_flattening_and_support() {
        let w = 0.2;
        let s = splash_curve(256).unwrap();
        let f = splat_curve(256, w).unwrap();
        for (j, a) in s.grid().nodes().iter().enumerate() {
            let d = (a.abs() - PI / 2.0).abs();
            if d < w {
                assert_eq!(f.points()[j].re, 0.0);
            } else if d > 2.0 * w {
                assert!((f.points()[j] - s.points()[j]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn vacuum_parity() {
        let flat = InterfaceCurve::from_fn(Domain::Plain, 64, |a| C64::new(a, -0.5 + 0.1 * a.cos())).unwrap();
        assert!(in_vacuum(&flat, C64::new(0.0, 0.0)));
        assert!(!in_vacuum(&flat, C64::new(0.0, -1.0)));
        let splash = splash_curve(128).unwrap();
        assert!(in_vacuum(&splash, C64::new(0.0, 0.0)));
        assert!(in_vacuum(&splash, C64::new(PI, 0.0)));
        assert!(!in_vacuum(&splash, C64::new(-1.0, -0.2)));
    }

    #[test]
    fn default_velocity_separates_and_flip_approaches() {
        let n = 128;
        let normal_at_contact = |flip: bool| {
            let params = PresetParams { flip_velocity: flip, ..PresetParams::default() };
            let state = preset(PresetName::NearSplash, n, &params).unwrap().plain.unwrap();
            let br = BrOperator::new(&state.curve).unwrap().apply(state.omega.values());
            let interp = state.curve.interpolant();
            let u = spectral::TrigInterpolant::from_complex(&br);
            [-PI / 2.0, PI / 2.0].map(|a| {
                let t = interp.eval_derivative(a, 1);
                crate::birkhoff_rott::dot(u.eval(a), perp(t)) / t.norm()
            })
        };
        // the normal points into the vacuum, so separation is a negative normal velocity
        assert!(normal_at_contact(false).iter().all(|v| *v < 0.0));
        assert!(normal_at_contact(true).iter().all(|v| *v > 0.0));
    }
}

