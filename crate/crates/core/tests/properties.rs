//! Property tests for operator identities, map invariants, the sheet
//! velocity and the text formats.

use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use splashwave_core::birkhoff_rott::{br_eval, br_eval_subtracted};
use splashwave_core::conformal::{curvature_plain, curvature_transform, forward_map, inverse_map, map_jet, BranchContext};
use splashwave_core::dynamics::{enforce_uniform_parametrization, DtPolicy, Regularization, SimConfig};
use splashwave_core::initdata::{PresetName, PresetParams};
use splashwave_core::io::{parse_config, parse_snapshot, serialize_config, snapshot_text};
use splashwave_core::spectral::{self, TrigInterpolant};
use splashwave_core::{Domain, InterfaceCurve, PeriodicField, PeriodicGrid, SheetState, C64};

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn trig(coeffs: &[(f64, f64)], a: f64) -> f64 {
    coeffs.iter().enumerate().map(|(m, (c, s))| c * ((m + 1) as f64 * a).cos() + s * ((m + 1) as f64 * a).sin()).sum()
}

fn sample(n: usize, mean: f64, coeffs: &[(f64, f64)]) -> Vec<f64> {
    PeriodicGrid::new(n).unwrap().nodes().iter().map(|&a| mean + trig(coeffs, a)).collect()
}

fn coeffs(max_modes: usize, scale: f64) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-scale..scale, -scale..scale), 1..=max_modes)
}

fn grid_size() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![64usize, 128, 256])
}

/// Graph-like plain interface kept below the map's singular point at 0.
fn plain_curve(n: usize, shape: &[(f64, f64)], lift: &[(f64, f64)], depth: f64) -> InterfaceCurve {
    InterfaceCurve::from_fn(Domain::Plain, n, |a| C64::new(a + trig(shape, a), depth + trig(lift, a))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, rng_seed: RngSeed::Fixed(0x5eed), ..ProptestConfig::default() })]

    #[test]
    fn hilbert_squared_is_minus_identity_off_the_mean(n in grid_size(), mean in -2.0..2.0f64, c in coeffs(12, 1.0)) {
        let f = sample(n, mean, &c);
        let hh = spectral::hilbert(&spectral::hilbert(&f));
        let expect: Vec<f64> = f.iter().map(|v| mean - v).collect();
        prop_assert!(max_diff(&hh, &expect) < 1e-11);
    }

    #[test]
    fn derivative_commutes_with_hilbert_and_composes_to_lambda(n in grid_size(), c in coeffs(12, 1.0)) {
        let f = sample(n, 0.3, &c);
        let dh = spectral::derivative(&spectral::hilbert(&f), 1);
        let hd = spectral::hilbert(&spectral::derivative(&f, 1));
        prop_assert!(max_diff(&dh, &hd) < 1e-10);
        prop_assert!(max_diff(&dh, &spectral::lambda(&f)) < 1e-10);
    }

    #[test]
    fn transform_round_trip_preserves_l2(n in grid_size(), re in coeffs(20, 1.0), im in coeffs(20, 1.0)) {
        let x: Vec<C64> = sample(n, 0.1, &re).into_iter().zip(sample(n, -0.4, &im)).map(|(a, b)| C64::new(a, b)).collect();
        let xf = spectral::fft(&x);
        let back = spectral::ifft(&xf);
        let energy: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let spectral_energy: f64 = xf.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
        prop_assert!((energy - spectral_energy).abs() < 1e-12 * energy.max(1.0));
        prop_assert!(x.iter().zip(&back).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn mollifier_error_shrinks_with_width(n in grid_size(), c in coeffs(8, 1.0)) {
        let f = sample(n, 0.0, &c);
        let errs: Vec<f64> = [0.2, 0.1, 0.05, 0.025].iter().map(|&w| max_diff(&spectral::mollify(&f, w), &f)).collect();
        prop_assert!(errs.windows(2).all(|w| w[1] < w[0] || w[0] < 1e-14), "{:?}", errs);
    }

    #[test]
    fn map_round_trip_and_jet_invariants(shape in coeffs(3, 0.05), lift in coeffs(3, 0.08), depth in -1.2..-0.4f64) {
        let z = plain_curve(128, &shape, &lift, depth);
        let t = forward_map(&z, &BranchContext::default()).unwrap();
        let back = inverse_map(&t).unwrap();
        let err = z.points().iter().zip(back.points()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-9);
        let jet = map_jet(&t).unwrap();
        for j in 0..128 {
            prop_assert!(jet.q[j] > 0.0);
            prop_assert!((jet.q[j] * jet.a[j].norm() - 1.0).abs() < 1e-12);
            let (h1, h2) = (jet.hess_p1(j), jet.hess_p2(j));
            prop_assert!((h1[0][0] + h1[1][1]).abs() < 1e-12 && (h2[0][0] + h2[1][1]).abs() < 1e-12);
        }
    }

    #[test]
    fn curvature_transform_matches_the_inverse_image(shape in coeffs(3, 0.05), lift in coeffs(3, 0.08), depth in -1.2..-0.4f64) {
        let t = forward_map(&plain_curve(256, &shape, &lift, depth), &BranchContext::default()).unwrap();
        let parts = curvature_transform(&t, &map_jet(&t).unwrap()).unwrap();
        let direct = curvature_plain(&inverse_map(&t).unwrap());
        prop_assert!(max_diff(parts.k.values(), direct.values()) < 1e-7);
    }

    #[test]
    fn velocity_is_linear_and_matches_the_split_scheme(
        shape in coeffs(3, 0.05), lift in coeffs(3, 0.1), d1 in coeffs(5, 1.0), d2 in coeffs(5, 1.0), s in -3.0..3.0f64,
    ) {
        let z = plain_curve(128, &shape, &lift, 0.0);
        let (f, g) = (sample(128, 0.0, &d1), sample(128, 0.0, &d2));
        let combo: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a + s * b).collect();
        let (bf, bg, bc) = (br_eval(&z, &f).unwrap(), br_eval(&z, &g).unwrap(), br_eval(&z, &combo).unwrap());
        prop_assert!(bc.iter().zip(bf.iter().zip(&bg)).all(|(c, (a, b))| (c - (a + s * b)).norm() < 1e-12 * (1.0 + s.abs()) * 10.0));
        let split = br_eval_subtracted(&z, &f).unwrap();
        prop_assert!(bf.iter().zip(&split).all(|(a, b)| (a - b).norm() < 1e-9));
    }

    #[test]
    fn velocity_is_independent_of_the_parametrization(eps in -0.25..0.25f64, m in 1usize..3, d in coeffs(3, 1.0)) {
        let n = 128;
        let grid = PeriodicGrid::new(n).unwrap();
        let shape = |a: f64| C64::from_polar(1.0 + 0.15 * (2.0 * a).cos(), -a);
        let phi = |s: f64| s + eps * (m as f64 * s).sin() / m as f64;
        let c1 = InterfaceCurve::from_fn(Domain::Tilde, n, shape).unwrap();
        let c2 = InterfaceCurve::from_fn(Domain::Tilde, n, |s| shape(phi(s))).unwrap();
        let w1: Vec<f64> = grid.nodes().iter().map(|&a| trig(&d, a)).collect();
        let w2: Vec<f64> = grid.nodes().iter().map(|&s| trig(&d, phi(s)) * (1.0 + eps * (m as f64 * s).cos())).collect();
        let ip = TrigInterpolant::from_complex(&br_eval(&c1, &w1).unwrap());
        let b2 = br_eval(&c2, &w2).unwrap();
        for (j, s) in grid.nodes().into_iter().enumerate() {
            prop_assert!((ip.eval(phi(s)) - b2[j]).norm() < 1e-8);
        }
    }

    #[test]
    fn arclength_resampling_is_uniform_and_keeps_circulation(shape in coeffs(3, 0.08), lift in coeffs(3, 0.1), d in coeffs(4, 1.0)) {
        // strongly non-uniform curves need n = 256 for the resampling to converge below 1e-8
        let z = plain_curve(256, &shape, &lift, 0.0);
        let w = PeriodicField::new(sample(256, 0.0, &d)).unwrap();
        let (u, uw) = enforce_uniform_parametrization(&z, &w).unwrap();
        prop_assert!(u.gauge_spread() < 1e-8);
        prop_assert!((u.length() - z.length()).abs() < 1e-10);
        prop_assert!(spectral::mean(uw.values()).abs() < 1e-12);
    }

    #[test]
    fn snapshot_text_round_trips_exactly(lift in coeffs(4, 0.1), d in coeffs(4, 1.0), t in 0.0..1.0f64) {
        let z = plain_curve(32, &[], &lift, -0.2);
        let state = SheetState::new(z, PeriodicField::new(sample(32, 0.0, &d)).unwrap(), t).unwrap();
        let back = parse_snapshot(&snapshot_text(&state)).unwrap();
        prop_assert_eq!(back.t.to_bits(), state.t.to_bits());
        prop_assert!(back.curve.points().iter().zip(state.curve.points()).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()));
        prop_assert!(back.omega.values().iter().zip(state.omega.values()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}

fn config_strategy() -> impl Strategy<Value = SimConfig> {
    (
        (prop::sample::select(vec![32usize, 64, 128, 256, 512]), 0.0..2.0f64, 1e-6..1e-2f64, any::<bool>(), 0.05..1.0f64, 1e-4..1.0f64),
        (any::<bool>(), 0.0..0.1f64, 0.0..0.1f64, 0.0..0.1f64, 1u32..6),
        (prop::sample::select(vec![PresetName::Splash, PresetName::Splat, PresetName::Flat, PresetName::StandingWave, PresetName::NearSplash]),
         any::<bool>(), 0.0..0.2f64, prop::option::of(2u32..64), 0usize..100, 1usize..20),
    )
        .prop_map(|((n, tau, dt, cfl_policy, cfl, t_end), (tilde, eps, delta, mu, k), (preset, flip, amplitude, filter, snap, rec))| SimConfig {
            n,
            tau,
            dt,
            dt_policy: if cfl_policy { DtPolicy::Cfl } else { DtPolicy::Fixed },
            cfl,
            t_end,
            domain: if tilde { Domain::Tilde } else { Domain::Plain },
            regularization: Regularization { eps, delta, mu },
            k,
            preset,
            preset_params: PresetParams { flip_velocity: flip, amplitude, ..PresetParams::default() },
            filter_order: filter,
            snapshot_every: snap,
            record_every: rec,
            ..SimConfig::default()
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, rng_seed: RngSeed::Fixed(0x5eed), ..ProptestConfig::default() })]

    #[test]
    fn config_text_round_trips(config in config_strategy()) {
        prop_assume!(config.validate().is_ok());
        let text = serialize_config(&config);
        let back = parse_config(&text).unwrap();
        prop_assert_eq!(back, config);
    }
}
