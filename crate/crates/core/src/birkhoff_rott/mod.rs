//! Birkhoff-Rott principal-value integral on periodic curves.
//!
//! Velocities and points are stored as complex numbers. With `w^⊥ ↔ i w`,
//! the vector kernel `w^⊥ / |w|²` becomes `i / conj(w)`, so
//!
//! ```text
//! conj(BR(z, ω))(α) = (-i / 2π) PV ∫ ω(β) k(z(α) - z(β)) dβ
//! ```
//!
//! with `k(w) = 1/w` on closed curves and `k(w) = ½ cot(w/2)` on horizontally
//! periodic ones (the exact sum over the 2π-images).

mod curve;
mod operator;
mod solve;

pub use curve::{CurveInterpolant, Domain, InterfaceCurve, SheetState};
pub use operator::{br_eval, br_eval_offcurve, br_eval_subtracted, br_t_explicit, dot, perp, BrOperator};
pub(crate) use operator::chord;
pub use solve::{
    solve_implicit, solve_implicit_dense, solve_implicit_mollified, solve_omega_t, ImplicitSolve, SolveMethod, IMPLICIT_TOLERANCE,
    MAX_FIXED_POINT_ITERATIONS,
};

#[cfg(test)]
pub(crate) mod test_curves {
    use super::*;
    use crate::spectral::C64;

    /// Small deterministic generator for reproducible "random" test data.
    pub struct Lcg(u64);

    impl Lcg {
        pub fn new(seed: u64) -> Self {
            Self(seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407))
        }

        pub fn uniform(&mut self) -> f64 {
            self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((self.0 >> 11) as f64) / ((1u64 << 53) as f64) * 2.0 - 1.0
        }
    }

    /// Clockwise star-shaped closed curve with a few random low modes. Water is
    /// on the right of `z_α`, i.e. inside, as for mapped interfaces.
    pub fn random_closed(n: usize, seed: u64) -> InterfaceCurve {
        let mut rng = Lcg::new(seed);
        let coeffs: Vec<(f64, f64)> = (0..3).map(|_| (0.04 * rng.uniform(), 0.04 * rng.uniform())).collect();
        let center = C64::new(0.3 * rng.uniform(), 0.3 * rng.uniform());
        InterfaceCurve::from_fn(Domain::Tilde, n, |a| {
            let mut r = 1.0;
            for (m, (c, s)) in coeffs.iter().enumerate() {
                let k = (m + 2) as f64;
                r += c * (k * a).cos() + s * (k * a).sin();
            }
            center + C64::from_polar(r, -a)
        })
        .unwrap()
    }

    pub fn random_density(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = Lcg::new(seed ^ 0x9e37);
        let coeffs: Vec<(f64, f64)> = (0..4).map(|_| (rng.uniform(), rng.uniform())).collect();
        let grid = crate::spectral::PeriodicGrid::new(n).unwrap();
        grid.nodes()
            .into_iter()
            .map(|a| {
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(m, (c, s))| {
                        let k = (m + 1) as f64;
                        c * (k * a).cos() + s * (k * a).sin()
                    })
                    .sum()
            })
            .collect()
    }

    pub fn wavy_plain(n: usize, seed: u64) -> InterfaceCurve {
        let mut rng = Lcg::new(seed);
        let a1 = 0.1 * rng.uniform();
        let a2 = 0.1 * rng.uniform();
        let b1 = 0.2 * rng.uniform();
        let b2 = 0.1 * rng.uniform();
        InterfaceCurve::from_fn(Domain::Plain, n, |a| {
            C64::new(a + a1 * a.sin() + a2 * (2.0 * a).sin(), b1 * a.cos() + b2 * (3.0 * a).sin())
        })
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::test_curves::*;
    use super::*;
    use crate::spectral::{self, PeriodicGrid, TrigInterpolant, C64};

    fn flat(n: usize) -> InterfaceCurve {
        InterfaceCurve::from_fn(Domain::Plain, n, |a| C64::new(a, 0.0)).unwrap()
    }

    fn max_err(a: &[C64], b: &[C64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn flat_interface_constant_density_is_at_rest() {
        let c = flat(64);
        let br = br_eval(&c, &[1.0; 64]).unwrap();
        assert!(br.iter().all(|v| v.norm() < 1e-13));
    }

    #[test]
    fn flat_interface_matches_half_hilbert() {
        let n = 256;
        let c = flat(n);
        let g = c.grid();
        let omega: Vec<f64> = g.nodes().iter().map(|a| a.cos()).collect();
        let br = br_eval(&c, &omega).unwrap();
        let expect: Vec<C64> = g.nodes().iter().map(|a| C64::new(0.0, a.sin() / 2.0)).collect();
        assert!(max_err(&br, &expect) < 1e-10, "{}", max_err(&br, &expect));
    }

    #[test]
    fn alternate_point_matches_subtracted_kernel() {
        for seed in 0..3 {
            let c = random_closed(64, seed);
            let w = random_density(64, seed);
            let a = br_eval(&c, &w).unwrap();
            let b = br_eval_subtracted(&c, &w).unwrap();
            assert!(max_err(&a, &b) < 1e-9, "closed seed {seed}: {}", max_err(&a, &b));
            let p = wavy_plain(64, seed);
            let a = br_eval(&p, &w).unwrap();
            let b = br_eval_subtracted(&p, &w).unwrap();
            assert!(max_err(&a, &b) < 1e-9, "plain seed {seed}: {}", max_err(&a, &b));
        }
    }

    #[test]
    fn linear_in_density() {
        let c = random_closed(64, 7);
        let f = random_density(64, 1);
        let g = random_density(64, 2);
        let combo: Vec<f64> = f.iter().zip(&g).map(|(a, b)| 2.0 * a - 0.5 * b).collect();
        let bf = br_eval(&c, &f).unwrap();
        let bg = br_eval(&c, &g).unwrap();
        let bc = br_eval(&c, &combo).unwrap();
        let expect: Vec<C64> = bf.iter().zip(&bg).map(|(a, b)| 2.0 * a - 0.5 * b).collect();
        assert!(max_err(&bc, &expect) < 1e-12);
    }

    #[test]
    fn quadrature_converges_spectrally() {
        let make = |n: usize| {
            let c = InterfaceCurve::from_fn(Domain::Tilde, n, |a| {
                C64::from_polar(1.0 + 0.2 * (3.0 * a).cos(), -a)
            })
            .unwrap();
            let w: Vec<f64> = c.grid().nodes().iter().map(|a| (a.sin()).exp() - 1.2660658777520082).collect();
            (c.grid(), br_eval(&c, &w).unwrap())
        };
        let (_, reference) = make(512);
        let mut errs = vec![];
        for n in [32usize, 64, 128] {
            let (_, v) = make(n);
            let stride = 512 / n;
            let e = (0..n).map(|j| (v[j] - reference[j * stride]).norm()).fold(0.0, f64::max);
            errs.push(e);
        }
        assert!(errs[0] / errs[1] > 1e2, "{errs:?}");
        assert!(errs[1] / errs[2] > 1e2 || errs[2] < 1e-12, "{errs:?}");
    }

    #[test]
    fn independent_of_parametrization() {
        let n = 128;
        let grid = PeriodicGrid::new(n).unwrap();
        let shape = |a: f64| C64::from_polar(1.0 + 0.15 * (2.0 * a).cos(), -a);
        let dens = |a: f64| (2.0 * a).sin() + 0.3 * a.cos();
        let c1 = InterfaceCurve::from_fn(Domain::Tilde, n, shape).unwrap();
        let w1: Vec<f64> = grid.nodes().iter().map(|&a| dens(a)).collect();
        // α = s + 0.2 sin s, ω ds = ω(α) α'(s) ds
        let phi = |s: f64| s + 0.2 * s.sin();
        let c2 = InterfaceCurve::from_fn(Domain::Tilde, n, |s| shape(phi(s))).unwrap();
        let w2: Vec<f64> = grid.nodes().iter().map(|&s| dens(phi(s)) * (1.0 + 0.2 * s.cos())).collect();
        let b1 = br_eval(&c1, &w1).unwrap();
        let b2 = br_eval(&c2, &w2).unwrap();
        let ip: Vec<TrigInterpolant> = vec![TrigInterpolant::from_complex(&b1)];
        for (j, s) in grid.nodes().into_iter().enumerate() {
            let v1 = ip[0].eval(phi(s));
            assert!((v1 - b2[j]).norm() < 1e-8, "node {j}: {}", (v1 - b2[j]).norm());
        }
    }

    #[test]
    fn offcurve_flat_matches_harmonic_extension() {
        let n = 128;
        let c = flat(n);
        let omega: Vec<f64> = c.grid().nodes().iter().map(|a| a.cos()).collect();
        let v = br_eval_offcurve(&c, &omega, &[C64::new(0.0, -1.0), C64::new(0.7, -2.0)]).unwrap();
        // potential ½ sin x e^y below the sheet
        let expect = |x: f64, y: f64| C64::new(0.5 * x.cos() * y.exp(), 0.5 * x.sin() * y.exp());
        assert!((v[0] - expect(0.0, -1.0)).norm() < 1e-8);
        assert!((v[1] - expect(0.7, -2.0)).norm() < 1e-8);
        assert!(br_eval_offcurve(&c, &omega, &[C64::new(0.0, -0.01)]).is_err());
    }

    #[test]
    fn offcurve_symmetry() {
        let n = 128;
        let c = InterfaceCurve::from_fn(Domain::Plain, n, |a| C64::new(a + 0.1 * a.sin(), 0.2 * a.cos())).unwrap();
        // even curve (z₁ odd, z₂ even) with an odd density gives even potential in x
        let omega: Vec<f64> = c.grid().nodes().iter().map(|a| a.sin() + 0.4 * (2.0 * a).sin()).collect();
        let v = br_eval_offcurve(&c, &omega, &[C64::new(0.0, -1.5), C64::new(0.0, -3.0)]).unwrap();
        assert!(v[0].re.abs() < 1e-12 && v[1].re.abs() < 1e-12, "{v:?}");
    }

    #[test]
    fn kernel_variation_trivial_cases() {
        let c = random_closed(64, 3);
        let w = random_density(64, 3);
        let zero = vec![C64::new(0.0, 0.0); 64];
        assert!(br_t_explicit(&c, &w, &zero).unwrap().iter().all(|v| v.norm() < 1e-14));
        let shift = vec![C64::new(0.3, -1.2); 64];
        assert!(br_t_explicit(&c, &w, &shift).unwrap().iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn kernel_variation_matches_time_finite_difference() {
        for curve in [random_closed(64, 11), wavy_plain(64, 11)] {
            let w = random_density(64, 5);
            let zt = curve.tangent().to_vec();
            let kv = br_t_explicit(&curve, &w, &zt).unwrap();
            let eps = 1e-5;
            let moved = |s: f64| {
                let p: Vec<C64> = curve.periodic_part().iter().zip(&zt).map(|(p, d)| p + s * d).collect();
                InterfaceCurve::from_periodic(curve.domain(), p).unwrap()
            };
            let plus = br_eval(&moved(eps), &w).unwrap();
            let minus = br_eval(&moved(-eps), &w).unwrap();
            for j in 0..64 {
                let fd = (plus[j] - minus[j]) / (2.0 * eps);
                assert!((fd - kv[j]).norm() < 1e-6, "{:?} vs {:?}", fd, kv[j]);
            }
        }
    }

    #[test]
    fn implicit_solve_on_flat_interface_is_identity() {
        let c = flat(64);
        let rhs: Vec<f64> = c.grid().nodes().iter().map(|a| (3.0 * a).cos()).collect();
        let s = solve_omega_t(&c, &rhs).unwrap();
        assert_eq!(s.method, SolveMethod::FixedPoint);
        assert_eq!(s.iterations, 1);
        assert!(s.omega_t.iter().zip(&rhs).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn implicit_solve_fixed_point_matches_dense() {
        for curve in [random_closed(64, 21), wavy_plain(64, 21)] {
            let rhs = random_density(64, 9);
            let op = BrOperator::new(&curve).unwrap();
            let fp = solve_implicit(&op, &rhs).unwrap();
            assert_eq!(fp.method, SolveMethod::FixedPoint);
            let dense = solve_implicit_dense(&op, &rhs).unwrap();
            let diff = fp.omega_t.iter().zip(&dense).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(diff < 1e-9, "{diff}");
            assert!(fp.residual < 1e-11);
        }
    }

    #[test]
    fn implicit_solve_is_linear() {
        let c = random_closed(64, 4);
        let f = random_density(64, 1);
        let g = random_density(64, 2);
        let combo: Vec<f64> = f.iter().zip(&g).map(|(a, b)| 1.5 * a + 0.25 * b).collect();
        let sf = solve_omega_t(&c, &f).unwrap().omega_t;
        let sg = solve_omega_t(&c, &g).unwrap().omega_t;
        let sc = solve_omega_t(&c, &combo).unwrap().omega_t;
        for j in 0..64 {
            assert!((sc[j] - 1.5 * sf[j] - 0.25 * sg[j]).abs() < 1e-10);
        }
        assert!(spectral::max_abs(&sc) > 0.0);
    }

    #[test]
    fn coincident_nodes_are_singular() {
        let n = 32;
        let mut pts: Vec<C64> = PeriodicGrid::new(n).unwrap().nodes().iter().map(|&a| C64::from_polar(1.0, a)).collect();
        pts[5] = pts[20];
        let c = InterfaceCurve::from_points(Domain::Tilde, pts).unwrap();
        assert!(matches!(br_eval(&c, &vec![0.0; n]), Err(crate::Error::SingularConfiguration { .. })));
    }
}
