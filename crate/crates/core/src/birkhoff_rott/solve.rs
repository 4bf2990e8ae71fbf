use nalgebra::{DMatrix, DVector};

use super::curve::{Domain, InterfaceCurve};
use super::operator::BrOperator;
use crate::error::{Error, Result};
use crate::spectral;

/// Fixed-point sweeps attempted before falling back to the dense solve.
pub const MAX_FIXED_POINT_ITERATIONS: usize = 200;

/// Max-norm residual target for `ω_t + 2 BR(z, ω_t)·z_α = rhs`. For very large
/// right-hand sides the target is raised to a round-off floor of
/// `1000 ε ‖rhs‖_∞`.
pub const IMPLICIT_TOLERANCE: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    FixedPoint,
    Dense,
}

#[derive(Debug, Clone)]
pub struct ImplicitSolve {
    pub omega_t: Vec<f64>,
    pub method: SolveMethod,
    pub iterations: usize,
    /// Max-norm residual of the returned solution.
    pub residual: f64,
}

/// `x ↦ x + S(2 BR(z, x)·z_α) [+ mean(x)]`, with `S` a double mollification
/// (identity at zero width). On closed curves constants lie in the kernel of
/// `I + 2 BR(z, ·)·z_α`; the rank-one `mean` term removes that null mode and
/// pins the solution to mean zero.
struct ImplicitSystem<'a> {
    op: &'a BrOperator,
    smoothing: f64,
    deflate: bool,
    relaxation: f64,
}

impl<'a> ImplicitSystem<'a> {
    fn new(op: &'a BrOperator, smoothing: f64) -> Self {
        let deflate = op.domain() == Domain::Tilde;
        // On closed curves the alternate-point operator maps the grid-scale
        // mode (-1)^j to itself, which the plain iteration would flip forever.
        let relaxation = if deflate { 0.5 } else { 1.0 };
        Self { op, smoothing, deflate, relaxation }
    }

    fn smooth(&self, v: Vec<f64>) -> Vec<f64> {
        if self.smoothing > 0.0 {
            spectral::mollify(&spectral::mollify(&v, self.smoothing), self.smoothing)
        } else {
            v
        }
    }

    /// Everything except the identity.
    fn coupling(&self, x: &[f64]) -> Vec<f64> {
        let bt: Vec<f64> = self.op.apply_tangential(x).iter().map(|b| 2.0 * b).collect();
        let mut out = self.smooth(bt);
        if self.deflate {
            let m = spectral::mean(x);
            out.iter_mut().for_each(|v| *v += m);
        }
        out
    }

    fn residual(&self, x: &[f64], rhs: &[f64]) -> f64 {
        let c = self.coupling(x);
        x.iter().zip(&c).zip(rhs).map(|((xi, ci), r)| (xi + ci - r).abs()).fold(0.0, f64::max)
    }

    fn matrix(&self) -> DMatrix<f64> {
        let n = self.op.n();
        let mut m: DMatrix<f64> = self.op.tangential_matrix() * 2.0;
        if self.smoothing > 0.0 {
            for k in 0..n {
                let col: Vec<f64> = m.column(k).iter().copied().collect();
                let s = self.smooth(col);
                m.column_mut(k).copy_from_slice(&s);
            }
        }
        let shift = if self.deflate { 1.0 / n as f64 } else { 0.0 };
        m.add_scalar_mut(shift);
        for i in 0..n {
            m[(i, i)] += 1.0;
        }
        m
    }

    fn solve(&self, rhs: &[f64]) -> Result<ImplicitSolve> {
        if rhs.len() != self.op.n() {
            return Err(Error::LengthMismatch { expected: self.op.n(), got: rhs.len() });
        }
        let tol = IMPLICIT_TOLERANCE.max(1e3 * f64::EPSILON * spectral::max_abs(rhs));
        let mut x = rhs.to_vec();
        for iteration in 1..=MAX_FIXED_POINT_ITERATIONS {
            let c = self.coupling(&x);
            let next: Vec<f64> = rhs
                .iter()
                .zip(&c)
                .zip(&x)
                .map(|((r, ci), xi)| xi + self.relaxation * (r - ci - xi))
                .collect();
            let step = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            x = next;
            if !step.is_finite() {
                break;
            }
            if step < tol {
                let res = self.residual(&x, rhs);
                if res < tol {
                    return Ok(ImplicitSolve { omega_t: x, method: SolveMethod::FixedPoint, iterations: iteration, residual: res });
                }
            }
        }
        log::debug!("fixed-point omega_t solve stalled; switching to dense LU");
        let omega_t = self.solve_dense(rhs)?;
        let res = self.residual(&omega_t, rhs);
        if !(res < tol) {
            return Err(Error::IllConditioned(format!(
                "implicit omega_t solve: residual {res:e} after fixed-point and dense paths"
            )));
        }
        Ok(ImplicitSolve { omega_t, method: SolveMethod::Dense, iterations: 0, residual: res })
    }

    fn solve_dense(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.op.n();
        let lu = self.matrix().lu();
        let b = DVector::from_column_slice(rhs);
        let sol = lu
            .solve(&b)
            .ok_or_else(|| Error::IllConditioned("singular implicit operator".into()))?;
        // one step of iterative refinement
        let applied: Vec<f64> = {
            let c = self.coupling(sol.as_slice());
            sol.iter().zip(&c).map(|(s, ci)| s + ci).collect()
        };
        let r = &b - DVector::from_vec(applied);
        let corr = lu.solve(&r).unwrap_or_else(|| DVector::zeros(n));
        Ok((sol + corr).as_slice().to_vec())
    }
}

/// Solves `ω_t + 2 BR(z, ω_t)·z_α = rhs` by fixed-point iteration, with a
/// dense LU solve when the iteration stalls. On closed curves the solution is
/// the mean-zero one.
pub fn solve_implicit(op: &BrOperator, rhs: &[f64]) -> Result<ImplicitSolve> {
    ImplicitSystem::new(op, 0.0).solve(rhs)
}

/// As [`solve_implicit`] with the coupling term mollified twice at `width`:
/// `ω_t + φ∗φ∗(2 BR(z, ω_t)·z_α) = rhs`.
pub fn solve_implicit_mollified(op: &BrOperator, rhs: &[f64], width: f64) -> Result<ImplicitSolve> {
    ImplicitSystem::new(op, width).solve(rhs)
}

/// Dense collocation solve of `(I + 2 BR(·)·z_α) ω_t = rhs`.
pub fn solve_implicit_dense(op: &BrOperator, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != op.n() {
        return Err(Error::LengthMismatch { expected: op.n(), got: rhs.len() });
    }
    ImplicitSystem::new(op, 0.0).solve_dense(rhs)
}

/// `ω_t` from the explicit part of the right-hand side, on the curve's own operator.
pub fn solve_omega_t(curve: &InterfaceCurve, rhs_explicit: &[f64]) -> Result<ImplicitSolve> {
    if rhs_explicit.len() != curve.n() {
        return Err(Error::LengthMismatch { expected: curve.n(), got: rhs_explicit.len() });
    }
    solve_implicit(&BrOperator::new(curve)?, rhs_explicit)
}
