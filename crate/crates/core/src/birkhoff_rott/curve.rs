use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spectral::{self, PeriodicField, PeriodicGrid, TrigInterpolant, C64};

/// Which of the two interface formulations a curve lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    /// Physical domain, horizontally periodic: `z(α) - (α, 0)` is 2π-periodic.
    Plain,
    /// Image under the desingularizing map: a closed curve.
    Tilde,
}

impl Domain {
    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Plain => "plain",
            Domain::Tilde => "tilde",
        }
    }
}

impl std::str::FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Domain::Plain),
            "tilde" => Ok(Domain::Tilde),
            other => Err(Error::InvalidArgument(format!("unknown domain '{other}'"))),
        }
    }
}

/// A periodic interface sampled on a uniform grid, stored as complex points
/// `z = z₁ + i z₂`, with its first two α-derivatives cached.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceCurve {
    grid: PeriodicGrid,
    domain: Domain,
    periodic: Vec<C64>,
    z: Vec<C64>,
    z_a: Vec<C64>,
    z_aa: Vec<C64>,
}

impl InterfaceCurve {
    /// Builds a curve from its periodic part: `z - α` for [`Domain::Plain`],
    /// the points themselves for [`Domain::Tilde`].
    pub fn from_periodic(domain: Domain, periodic: Vec<C64>) -> Result<Self> {
        let grid = PeriodicGrid::new(periodic.len())?;
        if let Some(index) = periodic.iter().position(|p| !(p.re.is_finite() && p.im.is_finite())) {
            return Err(Error::NonFinite { index });
        }
        let nodes = grid.nodes();
        let dp = spectral::derivative_c(&periodic, 1);
        let z_aa = spectral::derivative_c(&periodic, 2);
        let (z, z_a) = match domain {
            Domain::Plain => (
                periodic.iter().zip(&nodes).map(|(p, &a)| p + a).collect(),
                dp.iter().map(|d| d + 1.0).collect(),
            ),
            Domain::Tilde => (periodic.clone(), dp),
        };
        let curve = Self { grid, domain, periodic, z, z_a, z_aa };
        let (index, value) = curve
            .z_a
            .iter()
            .map(|d| d.norm())
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
        if !(value > 0.0) || value < 1e-12 {
            return Err(Error::DegenerateTangent { index, value });
        }
        Ok(curve)
    }

    /// Builds a curve from the actual points `z(α_j)`.
    pub fn from_points(domain: Domain, points: Vec<C64>) -> Result<Self> {
        let grid = PeriodicGrid::new(points.len())?;
        let periodic = match domain {
            Domain::Plain => points.iter().zip(grid.nodes()).map(|(p, a)| p - a).collect(),
            Domain::Tilde => points,
        };
        Self::from_periodic(domain, periodic)
    }

    pub fn from_fn(domain: Domain, n: usize, f: impl Fn(f64) -> C64) -> Result<Self> {
        let grid = PeriodicGrid::new(n)?;
        Self::from_points(domain, grid.nodes().into_iter().map(f).collect())
    }

    pub fn grid(&self) -> PeriodicGrid {
        self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn points(&self) -> &[C64] {
        &self.z
    }

    pub fn periodic_part(&self) -> &[C64] {
        &self.periodic
    }

    /// `z_α` at the nodes.
    pub fn tangent(&self) -> &[C64] {
        &self.z_a
    }

    /// `z_αα` at the nodes.
    pub fn second_derivative(&self) -> &[C64] {
        &self.z_aa
    }

    /// Stored first component (`z₁ - α` in the plain domain).
    pub fn z1(&self) -> PeriodicField {
        PeriodicField::from_raw(self.grid, self.periodic.iter().map(|p| p.re).collect())
    }

    pub fn z2(&self) -> PeriodicField {
        PeriodicField::from_raw(self.grid, self.periodic.iter().map(|p| p.im).collect())
    }

    pub fn speed(&self) -> Vec<f64> {
        self.z_a.iter().map(|d| d.norm()).collect()
    }

    /// Mean of `|z_α|`, i.e. `L/2π`.
    pub fn arclength_factor(&self) -> f64 {
        spectral::mean(&self.speed())
    }

    pub fn length(&self) -> f64 {
        2.0 * PI * self.arclength_factor()
    }

    /// `max_α ||z_α| - A| / A`.
    pub fn gauge_spread(&self) -> f64 {
        let speed = self.speed();
        let a = spectral::mean(&speed);
        speed.iter().map(|s| (s - a).abs()).fold(0.0, f64::max) / a
    }

    pub fn is_uniform(&self) -> bool {
        self.gauge_spread() < 1e-8
    }

    pub fn interpolant(&self) -> CurveInterpolant {
        CurveInterpolant { domain: self.domain, inner: TrigInterpolant::from_complex(&self.periodic) }
    }

    /// Curvature `z_αα · z_α^⊥ / |z_α|³`, with `(a, b)^⊥ = (-b, a)`.
    pub fn curvature(&self) -> Vec<f64> {
        self.z_a
            .iter()
            .zip(&self.z_aa)
            .map(|(d1, d2)| (d1.conj() * d2).im / d1.norm().powi(3))
            .collect()
    }

    /// Translates the curve. Used by translation-invariance checks.
    pub fn translated(&self, shift: C64) -> Result<Self> {
        Self::from_periodic(self.domain, self.periodic.iter().map(|p| p + shift).collect())
    }
}

/// Off-grid evaluation of an [`InterfaceCurve`].
#[derive(Debug, Clone)]
pub struct CurveInterpolant {
    domain: Domain,
    inner: TrigInterpolant,
}

impl CurveInterpolant {
    pub fn eval(&self, alpha: f64) -> C64 {
        let p = self.inner.eval(alpha);
        match self.domain {
            Domain::Plain => p + alpha,
            Domain::Tilde => p,
        }
    }

    pub fn eval_derivative(&self, alpha: f64, order: u32) -> C64 {
        if order == 0 {
            return self.eval(alpha);
        }
        let d = self.inner.eval_derivative(alpha, order);
        match (self.domain, order) {
            (Domain::Plain, 1) => d + 1.0,
            _ => d,
        }
    }
}

/// Curve plus vortex-sheet strength at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SheetState {
    pub curve: InterfaceCurve,
    pub omega: PeriodicField,
    pub t: f64,
}

impl SheetState {
    pub fn new(curve: InterfaceCurve, omega: PeriodicField, t: f64) -> Result<Self> {
        if omega.len() != curve.n() {
            return Err(Error::LengthMismatch { expected: curve.n(), got: omega.len() });
        }
        Ok(Self { curve, omega, t })
    }

    pub fn domain(&self) -> Domain {
        self.curve.domain()
    }

    pub fn n(&self) -> usize {
        self.curve.n()
    }
}
