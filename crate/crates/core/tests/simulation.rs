use platoonlab::nnir::{self, AxisRange, ScaledTF, ScanGrid};
use platoonlab::sim::{self, Disturbance, PlatoonConfig};
use platoonlab::tf::{Architecture, ControllerSpec, LagSpec};
use platoonlab::{freqstab, SweepConfig};

fn reference(h_w: f64, n: usize) -> PlatoonConfig {
    let spec = ControllerSpec::pf(45.0, 0.8, 0.25, h_w, 5.0).unwrap();
    let mut cfg = PlatoonConfig::new(n, spec, LagSpec::at_bound(0.5).unwrap());
    cfg.t_end = 25.0;
    cfg
}

#[test]
fn halving_the_step_barely_moves_peaks() {
    let mut coarse = reference(0.88, 6);
    coarse.disturbance.frequency = 4.0;
    let mut fine = coarse.clone();
    fine.dt /= 2.0;
    let a = sim::simulate(&coarse).unwrap();
    let b = sim::simulate(&fine).unwrap();
    for (x, y) in a.peak_abs_error.iter().zip(&b.peak_abs_error) {
        assert!((x - y).abs() < 1e-3 * y, "{x} vs {y}");
    }
}

#[test]
fn speed_offset_leaves_errors_unchanged() {
    let base = reference(0.88, 5);
    let mut shifted = base.clone();
    shifted.v_r += 7.5;
    let a = sim::simulate(&base).unwrap();
    let b = sim::simulate(&shifted).unwrap();
    for i in 1..5 {
        for (x, y) in a.e[i].iter().zip(&b.e[i]) {
            assert!((x - y).abs() < 1e-9, "vehicle {i}: {x} vs {y}");
        }
        // positions differ by the moving frame plus the re-equilibrated gap
        let (xa, xb, t) = (a.x[i].last().unwrap(), b.x[i].last().unwrap(), a.t.last().unwrap());
        let expected = 7.5 * t - i as f64 * 0.88 * 7.5;
        assert!((xb - xa - expected).abs() < 1e-6);
    }
}

#[test]
fn longer_platoon_does_not_change_leading_vehicles() {
    let spec = ControllerSpec::equal_gains(Architecture::Rpf(3), 45.0, 0.8, 0.25, 0.5, 5.0).unwrap();
    let mut short = PlatoonConfig::new(6, spec, LagSpec::at_bound(0.5).unwrap());
    short.t_end = 20.0;
    let long = PlatoonConfig { n: 10, ..short.clone() };
    let a = sim::simulate(&short).unwrap();
    let b = sim::simulate(&long).unwrap();
    for i in 1..6 {
        assert_eq!(a.e[i], b.e[i]);
    }
}

#[test]
fn follower_ratio_tracks_frequency_response_at_resonance() {
    let cfg0 = reference(0.88, 8);
    let h = platoonlab::tf::build_error_tf_accel(&cfg0.spec, &cfg0.lag).unwrap();
    // interior resonance of the reference loop
    let (w, _) = (1..4000)
        .map(|k| {
            let w = 1.0 + k as f64 * 0.005;
            (w, h.magnitude(w).unwrap())
        })
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    let gain = h.magnitude(w).unwrap();
    let mut cfg = cfg0;
    cfg.t_end = 40.0;
    cfg.record_every = 1;
    cfg.disturbance = Disturbance { amplitude: 1.0, frequency: w, t_on: 0.0, t_off: 40.0, phase: 0.0 };
    let r = sim::simulate(&cfg).unwrap();
    for i in 2..8 {
        let a = sim::steady_state_amplitude(&r.t, &r.e[i], w, 30.0).unwrap();
        let b = sim::steady_state_amplitude(&r.t, &r.e[i - 1], w, 30.0).unwrap();
        assert!(((a / b) - gain).abs() < 0.01 * gain, "vehicle {i}: {} vs {gain}", a / b);
    }
}

#[test]
fn admissible_cells_have_nonnegative_impulse_response() {
    // a headway with a sizeable admissible set under the exact residue test
    let ka = 0.5;
    let hw = 4.0;
    let grid = ScanGrid {
        kp: AxisRange::new(2e-3, 1.5e-2, 5),
        kv: AxisRange::new(0.13, 0.25, 5),
    };
    let region = nnir::region_scan(ka, hw, &grid, &nnir::default_tau_samples());
    let cells: Vec<_> = region.admissible().collect();
    assert!(cells.len() >= 5, "{}", cells.len());
    for c in cells {
        for tau in [0.1, 0.5, 1.0] {
            let s = ScaledTF::new(ka, c.kp, c.kv, hw, tau).unwrap();
            let tf = s.tf().unwrap();
            let slowest = 1.0 / (c.kp / (c.kv + c.kp * hw));
            let t_max = 40.0 * slowest;
            // resolve both the lag pole and the slow tail
            let dt = (t_max / 200_000.0).min(tau / 50.0);
            let ir = nnir::impulse_numeric(&tf, t_max, dt).unwrap();
            assert!(ir.min_value >= -1e-9, "({}, {}) tau {tau}: {}", c.kp, c.kv, ir.min_value);
            // non-negative response: L1 norm equals the DC gain equals the peak gain
            let (hinf, _) = freqstab::hinf_norm(&tf, &SweepConfig::default()).unwrap();
            assert!((ir.l1_norm() - 1.0).abs() < 1e-4, "l1 {}", ir.l1_norm());
            assert!((hinf - 1.0).abs() < 1e-4, "hinf {hinf}");
        }
    }
}

#[test]
fn region_scan_is_invariant_under_lag_bound() {
    let ka = 0.95;
    let hw = 2.0 / 1.95;
    let grid = ScanGrid {
        kp: AxisRange::new(1e-4, 1e-2, 6),
        kv: AxisRange::new(0.01, 0.3, 6),
    };
    let taus = nnir::default_tau_samples();
    let region = nnir::region_scan(ka, hw, &grid, &taus);
    for tau0 in [0.25, 0.5, 2.0] {
        for c in &region.cells {
            // unscale to physical gains, then rescale through a controller spec
            let (kp, kv, _, h_w, _) = ScaledTF::new(ka, c.kp, c.kv, hw, 0.0).unwrap().unscale(tau0);
            let spec = ControllerSpec::pf(kp, kv, ka, h_w, 5.0).unwrap();
            let back = nnir::time_scale(&spec, 0.0, tau0).unwrap();
            let again = nnir::region_scan(
                ka,
                back.hw,
                &ScanGrid {
                    kp: AxisRange::new(back.kp, back.kp, 1),
                    kv: AxisRange::new(back.kv, back.kv, 1),
                },
                &taus,
            );
            let d = again.cells[0];
            assert_eq!(
                (d.cond_tau0, d.real_distinct, d.cond_tau_pos),
                (c.cond_tau0, c.real_distinct, c.cond_tau_pos),
                "tau0 {tau0}, cell ({}, {})",
                c.kp,
                c.kv
            );
        }
    }
}
