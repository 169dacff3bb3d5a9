use num_complex::Complex64;
use platoonlab::bounds::{self, recast_self_accel, self_feedback_error_tf};
use platoonlab::freqstab::{self, Criterion, SweepConfig};
use platoonlab::nnir::{self, time_scale};
use platoonlab::tf::{build_error_tf_accel, build_error_tf_taps, error_tf, Architecture, ControllerSpec, LagSpec};
use proptest::prelude::*;

fn arch() -> impl Strategy<Value = Architecture> {
    prop_oneof![
        Just(Architecture::Pf),
        (1usize..=5).prop_map(Architecture::Rpf),
        (2usize..=5).prop_map(Architecture::OneAndRth),
    ]
}

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn normalized(c: &[f64]) -> Vec<f64> {
    c.iter().map(|x| x / c[0]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn taps_sum_to_unity_at_dc(
        arch in arch(),
        kp in log_uniform(1e-3, 1e2),
        kv in log_uniform(1e-3, 1e1),
        ka in 0.0..0.99f64,
        hw in 0.0..3.0f64,
        tau in 0.0..1.0f64,
    ) {
        let spec = ControllerSpec::equal_gains(arch, kp, kv, ka, hw, 5.0).unwrap();
        let taps = build_error_tf_taps(&spec, &LagSpec::new(tau, 1.0).unwrap()).unwrap();
        let dc: f64 = taps.iter().map(|(_, h)| h.dc_gain()).sum();
        prop_assert!((dc - 1.0).abs() < 1e-12, "{}", dc);
    }

    #[test]
    fn equal_gains_collapse_to_single_tap(
        arch in arch(),
        kp in log_uniform(1e-3, 1e2),
        kv in log_uniform(1e-3, 1e1),
        ka in 0.0..0.99f64,
        hw in 0.0..3.0f64,
        tau in 0.0..1.0f64,
    ) {
        let spec = ControllerSpec::equal_gains(arch, kp, kv, ka, hw, 5.0).unwrap();
        let lag = LagSpec::new(tau, 1.0).unwrap();
        let taps = build_error_tf_taps(&spec, &lag).unwrap();
        let m = taps.len() as f64;
        for (_, h) in &taps[1..] {
            prop_assert_eq!(h, &taps[0].1);
        }
        let mean_lag = arch.lags().iter().sum::<usize>() as f64 / m;
        let collapsed = error_tf(m * kp, m * kv, m * ka, mean_lag * hw, tau).unwrap();
        let summed = taps[0].1.scale(m);
        let (a, b) = (normalized(summed.num()), normalized(collapsed.num()));
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(rel(*x, *y) < 1e-12, "{:?} vs {:?}", a, b);
        }
        let (a, b) = (normalized(summed.den()), normalized(collapsed.den()));
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(rel(*x, *y) < 1e-12, "{:?} vs {:?}", a, b);
        }
    }

    #[test]
    fn frequency_response_is_conjugate_symmetric(
        kp in log_uniform(1e-3, 1e2),
        kv in log_uniform(1e-3, 1e1),
        ka in 0.0..0.99f64,
        hw in 0.0..3.0f64,
        tau in 0.0..1.0f64,
        omega in log_uniform(1e-3, 1e3),
    ) {
        let h = error_tf(kp, kv, ka, hw, tau).unwrap();
        let (p, m) = (h.eval_jw(omega).unwrap(), h.eval_jw(-omega).unwrap());
        prop_assert!((p - m.conj()).norm() <= 1e-14 * p.norm().max(1.0));
    }

    #[test]
    fn recast_round_trip(
        kbar_a in 0.0..10.0f64,
        kbar_v in log_uniform(1e-3, 1e1),
        kbar_p in log_uniform(1e-3, 1e2),
        tau in 0.0..1.0f64,
        hw in 0.1..3.0f64,
        omega in log_uniform(1e-2, 1e2),
    ) {
        let g = recast_self_accel(kbar_a, kbar_v, kbar_p, tau).unwrap();
        let (a, v, p, t) = g.undo();
        for (x, y) in [(a, kbar_a), (v, kbar_v), (p, kbar_p), (t, tau)] {
            prop_assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0), "{} vs {}", x, y);
        }
        prop_assert!(rel(g.h_min, 2.0 * tau / (1.0 + 2.0 * kbar_a)) < 1e-12 || tau == 0.0);
        // the recast loop is the same transfer function
        let direct = self_feedback_error_tf(kbar_a, kbar_v, kbar_p, hw, tau).unwrap();
        let recast = error_tf(g.kp, g.kv, g.ka, hw, g.tau_eff).unwrap();
        let (x, y) = (direct.eval_jw(omega).unwrap(), recast.eval_jw(omega).unwrap());
        prop_assert!((x - y).norm() <= 1e-12 * x.norm().max(1e-12));
    }

    #[test]
    fn multi_predecessor_bound_is_scaled_single_bound(
        r in 1usize..=6,
        frac in 0.0..0.999f64,
        tau0 in 0.05..2.0f64,
    ) {
        let ka = frac / r as f64;
        let multi = bounds::h_min(Architecture::Rpf(r), ka, tau0).unwrap().h_min;
        let single = bounds::h_min(Architecture::Pf, r as f64 * ka, tau0).unwrap().h_min;
        prop_assert!(rel(multi, single * 2.0 / (1.0 + r as f64)) < 1e-15);
    }

    #[test]
    fn accel_gain_at_least_one_violates_norm_at_crossover(
        ka in prop_oneof![Just(1.0), Just(1.2)],
        kp in log_uniform(1e-3, 1e2),
        kv in log_uniform(1e-3, 1e1),
        hw in 0.1..3.0f64,
        tau0 in 0.05..1.0f64,
        frac in 0.01..0.999f64,
    ) {
        let tau = frac * hw.min(tau0);
        let omega0 = ((kv + hw * kp) / tau).sqrt();
        let mag = error_tf(kp, kv, ka, hw, tau).unwrap().magnitude(omega0).unwrap();
        prop_assert!(mag > 1.0, "|H(j omega0)| = {}", mag);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn norm_is_invariant_under_time_scaling(
        kp in log_uniform(1e-2, 1e2),
        kv in log_uniform(1e-2, 1e1),
        ka in 0.0..0.99f64,
        hw in 0.1..3.0f64,
        tau0 in 0.05..2.0f64,
        frac in 0.0..1.0f64,
    ) {
        let tau = frac * tau0;
        prop_assume!(kv + kp * hw > tau * kp);
        let spec = ControllerSpec::pf(kp, kv, ka, hw, 5.0).unwrap();
        let cfg = SweepConfig::default();
        let h = build_error_tf_accel(&spec, &LagSpec::new(tau, tau0).unwrap()).unwrap();
        let s = time_scale(&spec, tau, tau0).unwrap();
        let (n1, w1) = freqstab::hinf_norm(&h, &cfg).unwrap();
        let (n2, w2) = freqstab::hinf_norm(&s.tf().unwrap(), &cfg).unwrap();
        prop_assert!(rel(n1, n2) <= 1e-9, "{} vs {}", n1, n2);
        // peak frequencies correspond up to the flatness of the maximum
        let h_at = h.magnitude(w2 / tau0).unwrap_or(f64::NAN);
        prop_assert!(!w1.is_finite() || !w2.is_finite() || rel(h_at, n1) <= 1e-9);
    }

    #[test]
    fn analytic_test_agrees_with_numeric_norm(
        kp in log_uniform(1e-3, 1e2),
        kv in log_uniform(1e-3, 1e1),
        ka in 0.0..0.99f64,
        hw in 0.1..3.0f64,
        tau in 0.0..1.0f64,
    ) {
        prop_assume!(kv + kp * hw > tau * kp);
        let (norm, _) = freqstab::hinf_norm(&error_tf(kp, kv, ka, hw, tau).unwrap(), &SweepConfig::default()).unwrap();
        let holds = bounds::analytic_norm_test(kp, kv, ka, hw, tau).holds();
        prop_assert!(holds == (norm <= 1.0) || (norm - 1.0).abs() < 1e-6, "norm {} holds {}", norm, holds);
    }

    #[test]
    fn impulse_response_scales_with_time(
        kp in log_uniform(1e-1, 1e2),
        kv in log_uniform(1e-1, 1e1),
        ka in 0.0..0.9f64,
        hw in 0.5..3.0f64,
        tau0 in 0.2..2.0f64,
        frac in 0.05..1.0f64,
    ) {
        let tau = frac * tau0;
        prop_assume!(kv + kp * hw > tau * kp);
        let spec = ControllerSpec::pf(kp, kv, ka, hw, 5.0).unwrap();
        let h = build_error_tf_accel(&spec, &LagSpec::new(tau, tau0).unwrap()).unwrap();
        let s = time_scale(&spec, tau, tau0).unwrap().tf().unwrap();
        let dt = 0.01;
        let a = nnir::impulse_numeric(&h, 10.0, dt).unwrap();
        let b = nnir::impulse_numeric(&s, 10.0 / tau0, dt / tau0).unwrap();
        prop_assert_eq!(a.values.len(), b.values.len());
        let scale = a.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y / tau0).abs() <= 1e-6 * scale, "{} vs {}", x, y / tau0);
        }
    }
}

fn hurwitz_at(spec: &ControllerSpec, tau: f64) -> bool {
    let taps = spec.taps();
    let a0: f64 = taps.iter().map(|t| t.kp).sum();
    let a1: f64 = taps.iter().map(|t| t.kv + t.lag as f64 * t.kp * spec.h_w()).sum();
    a1 > tau * a0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectral_radius_never_exceeds_sum_of_norms(
        r in 2usize..=4,
        one_and_rth in any::<bool>(),
        kp in log_uniform(1e-1, 1e2),
        kv in log_uniform(1e-2, 1e1),
        ka in 0.0..0.25f64,
        hw in 0.1..2.0f64,
        tau0 in 0.0..1.0f64,
    ) {
        let arch = if one_and_rth { Architecture::OneAndRth(r) } else { Architecture::Rpf(r) };
        let spec = ControllerSpec::equal_gains(arch, kp, kv, ka, hw, 5.0).unwrap();
        prop_assume!(hurwitz_at(&spec, tau0));
        let cfg = SweepConfig { points_per_decade: 40, tau_grid_points: 5, ..SweepConfig::default() };
        let rho = freqstab::robust_check(&spec, tau0, &cfg, Criterion::SpectralRadius).unwrap();
        let sum = freqstab::robust_check(&spec, tau0, &cfg, Criterion::SumNorm).unwrap();
        prop_assert!(rho.worst_value <= sum.worst_value * (1.0 + 1e-9), "{} > {}", rho.worst_value, sum.worst_value);
    }

    #[test]
    fn finer_sweep_never_loses_the_peak(
        kp in log_uniform(1e-2, 1e2),
        kv in log_uniform(1e-2, 1e1),
        ka in 0.0..0.99f64,
        hw in 0.1..3.0f64,
        tau in 0.0..1.0f64,
    ) {
        prop_assume!(kv + kp * hw > tau * kp);
        let h = error_tf(kp, kv, ka, hw, tau).unwrap();
        let coarse = SweepConfig { points_per_decade: 50, ..SweepConfig::default() };
        let fine = SweepConfig { points_per_decade: 100, ..coarse };
        let (a, _) = freqstab::hinf_norm(&h, &coarse).unwrap();
        let (b, _) = freqstab::hinf_norm(&h, &fine).unwrap();
        prop_assert!(b >= a * (1.0 - fine.refine_tol), "{} then {}", a, b);
    }
}

#[test]
fn single_predecessor_limits_of_multi_predecessor_bound() {
    let tau0 = 0.5;
    for r in 1..=4usize {
        let rf = r as f64;
        let near_one = bounds::h_min(Architecture::Rpf(r), (1.0 - 1e-6) / rf, tau0).unwrap().h_min;
        assert!((near_one - 2.0 * tau0 / (1.0 + rf)).abs() < 1e-6);
        let zero = bounds::h_min(Architecture::Rpf(r), 0.0, tau0).unwrap().h_min;
        assert!((zero - 4.0 * tau0 / (1.0 + rf)).abs() < 1e-15);
        if r >= 2 {
            let both = bounds::h_min(Architecture::OneAndRth(r), 0.5 - 1e-6, tau0).unwrap().h_min;
            assert!((both - 2.0 * tau0 / (1.0 + rf)).abs() < 1e-6);
        }
    }
    let r2 = bounds::h_min(Architecture::Rpf(2), 0.5 - 1e-7, tau0).unwrap().h_min;
    assert!((r2 - 2.0 * tau0 / 3.0).abs() < 1e-6);
    let r3 = bounds::h_min(Architecture::Rpf(3), 1.0 / 3.0 - 1e-7, tau0).unwrap().h_min;
    assert!((r3 - tau0 / 2.0).abs() < 1e-6);
}

#[test]
fn spectral_radius_of_single_tap_is_its_magnitude() {
    let spec = ControllerSpec::pf(45.0, 0.8, 0.25, 0.88, 5.0).unwrap();
    let taps = build_error_tf_taps(&spec, &LagSpec::at_bound(0.5).unwrap()).unwrap();
    for w in [0.0, 0.3, 2.0, 8.86, 40.0] {
        let rho = freqstab::spectral_radius_p(&taps, w).unwrap();
        let mag: Complex64 = taps[0].1.eval_jw(w).unwrap();
        assert!((rho - mag.norm()).abs() < 1e-14);
    }
}
