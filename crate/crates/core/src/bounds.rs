//! Minimum-employable-headway calculators, the closed-form `‖H_e‖∞ ≤ 1` test,
//! constructive gain synthesis and the self-acceleration-feedback recast.

use crate::error::{Error, Result};
use crate::tf::{Architecture, RationalTF};

/// Minimum employable time headway for one architecture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadwayBound {
    pub arch: Architecture,
    pub r: usize,
    pub k_a: f64,
    pub h_min: f64,
}

/// Checks the acceleration gain against the architecture's admissible interval:
/// `k_a ∈ [0, 1)` for PF, `r k_a ∈ [0, 1)` for rPF and `2 k_a ∈ [0, 1)` for
/// immediate-plus-`r`-th predecessor following.
pub fn check_accel_gain(arch: Architecture, ka: f64) -> Result<()> {
    let (name, scaled, interval) = match arch {
        Architecture::Pf => ("k_a", ka, "[0, 1)".to_string()),
        Architecture::Rpf(r) => ("r*k_a", r as f64 * ka, format!("[0, 1) with r = {r}")),
        Architecture::OneAndRth(_) => ("2*k_a", 2.0 * ka, "[0, 1)".to_string()),
    };
    if !(ka.is_finite() && (0.0..1.0).contains(&scaled)) {
        return Err(Error::GainOutOfRange {
            name,
            value: scaled,
            interval,
        });
    }
    Ok(())
}

pub fn h_min(arch: Architecture, ka: f64, tau0: f64) -> Result<HeadwayBound> {
    if !(tau0.is_finite() && tau0 > 0.0) {
        return Err(Error::invalid(format!("tau0 must be > 0 (got {tau0})")));
    }
    match arch {
        Architecture::Rpf(0) => return Err(Error::invalid("rpf requires r >= 1")),
        Architecture::OneAndRth(r) if r < 2 => return Err(Error::invalid("one-and-rth requires r >= 2")),
        _ => {}
    }
    check_accel_gain(arch, ka)?;
    let r = arch.reach();
    let rf = r as f64;
    let h = match arch {
        Architecture::Pf => 2.0 * tau0 / (1.0 + ka),
        Architecture::Rpf(_) => 4.0 * tau0 / ((1.0 + rf) * (1.0 + rf * ka)),
        Architecture::OneAndRth(_) => 4.0 * tau0 / ((1.0 + rf) * (1.0 + 2.0 * ka)),
    };
    Ok(HeadwayBound {
        arch,
        r,
        k_a: ka,
        h_min: h,
    })
}

/// Which branch of the closed-form test established `‖H_e‖∞ ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HoldsBy {
    /// `tau = 0`: nominal inequality.
    Nominal,
    /// Nominal inequality plus a nonnegative `ω²` coefficient.
    LinearTerm,
    /// Nominal inequality plus a nonpositive discriminant.
    Discriminant,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormTest {
    Holds(HoldsBy),
    /// `|H_e(j witness_omega)| > 1`.
    Fails { witness_omega: f64 },
}

impl NormTest {
    pub fn holds(&self) -> bool {
        matches!(self, NormTest::Holds(_))
    }
}

/// Coefficients `(A, B, C)` of `q(x) = A x² + B x + C` with `x = ω²`, where
/// `|D(jω)|² - |N(jω)|² = x q(x)` for the single-predecessor error transfer function.
pub fn norm_quartic(kp: f64, kv: f64, ka: f64, h_w: f64, tau: f64) -> (f64, f64, f64) {
    let c = kv + h_w * kp;
    let a = tau * tau;
    let b = (1.0 - ka * ka) - 2.0 * tau * c;
    // (k_v + h_w k_p)^2 - k_v^2 - 2 k_p (1 - k_a), factored to avoid cancellation
    let cst = kp * (h_w * (2.0 * kv + h_w * kp) - 2.0 * (1.0 - ka));
    (a, b, cst)
}

/// Closed-form check of `|H_e(jω)| ≤ 1` for all ω, via nonnegativity of the
/// bi-quadratic `q(ω²)` on `ω² ≥ 0`. On failure the witness sits in the middle
/// of the interval where `q < 0`.
pub fn analytic_norm_test(kp: f64, kv: f64, ka: f64, h_w: f64, tau: f64) -> NormTest {
    let (a, b, c) = norm_quartic(kp, kv, ka, h_w, tau);
    let fails = |x: f64| NormTest::Fails {
        witness_omega: x.max(0.0).sqrt(),
    };
    if a == 0.0 {
        // linear in x
        if c >= 0.0 && b >= 0.0 {
            return NormTest::Holds(HoldsBy::Nominal);
        }
        if b > 0.0 {
            // c < 0: q < 0 on (0, -c/b)
            return fails(-c / b / 2.0);
        }
        if b == 0.0 {
            return fails(1.0);
        }
        // b < 0: q < 0 beyond max(0, -c/b)
        return fails(2.0 * (c / -b).max(0.0) + 1.0);
    }
    if c < 0.0 {
        // q(0) < 0; q has exactly one positive root
        let root = (-b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a);
        return fails(root / 2.0);
    }
    if b >= 0.0 {
        return NormTest::Holds(HoldsBy::LinearTerm);
    }
    let disc = b * b - 4.0 * a * c;
    if disc <= 0.0 {
        return NormTest::Holds(HoldsBy::Discriminant);
    }
    // both roots positive; the minimiser -b/(2a) lies between them
    fails(-b / (2.0 * a))
}

/// Intercepts of the two half-plane boundaries whose intersection holds the
/// synthesized gains: `k_v/a1 + k_p/b1 ≥ 1` (nominal case) and
/// `k_v/a2 + k_p/b2 ≤ 1` (lag case).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainRegionSpec {
    pub k_a: f64,
    pub eta: f64,
    pub tau0: f64,
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
}

impl GainRegionSpec {
    pub fn new(ka: f64, eta: f64, tau0: f64) -> Result<Self> {
        if !(ka.is_finite() && ka > 0.0 && ka < 1.0) {
            return Err(Error::GainOutOfRange {
                name: "k_a",
                value: ka,
                interval: "(0, 1)".into(),
            });
        }
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::GainOutOfRange {
                name: "eta",
                value: eta,
                interval: "(0, inf)".into(),
            });
        }
        if !(tau0.is_finite() && tau0 > 0.0) {
            return Err(Error::invalid(format!("tau0 must be > 0 (got {tau0})")));
        }
        let one_m = 1.0 - ka * ka;
        let m = 1.0 + eta;
        Ok(Self {
            k_a: ka,
            eta,
            tau0,
            a1: one_m / (2.0 * tau0 * m),
            b1: (1.0 + ka).powi(2) * (1.0 - ka) / (2.0 * tau0 * tau0 * m * m),
            a2: one_m / (2.0 * tau0),
            b2: one_m * (1.0 + ka) / (4.0 * tau0 * tau0 * m),
        })
    }

    /// Headway the region is built for: `2 tau0 (1 + eta) / (1 + k_a)`.
    pub fn headway(&self) -> f64 {
        2.0 * self.tau0 * (1.0 + self.eta) / (1.0 + self.k_a)
    }

    pub fn in_nominal_set(&self, kp: f64, kv: f64) -> bool {
        kp > 0.0 && kv > 0.0 && kv / self.a1 + kp / self.b1 >= 1.0
    }

    pub fn in_lag_set(&self, kp: f64, kv: f64) -> bool {
        kp > 0.0 && kv > 0.0 && kv / self.a2 + kp / self.b2 <= 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesizedGains {
    pub kp: f64,
    pub kv: f64,
    pub h_w: f64,
    pub region: GainRegionSpec,
}

/// Picks `(k_p, k_v)` in the intersection of the two gain sets: `k_p` on a thin
/// sliver `min(b1, b2) / 100`, `k_v` midway between the two boundary lines.
pub fn synthesize_gains(ka: f64, eta: f64, tau0: f64) -> Result<SynthesizedGains> {
    let region = GainRegionSpec::new(ka, eta, tau0)?;
    let kp = region.b1.min(region.b2) / 100.0;
    let kv_lo = region.a1 * (1.0 - kp / region.b1);
    let kv_hi = region.a2 * (1.0 - kp / region.b2);
    let kv = 0.5 * (kv_lo + kv_hi);
    Ok(SynthesizedGains {
        kp,
        kv,
        h_w: region.headway(),
        region,
    })
}

/// Gains of a controller that also feeds back its own acceleration, rewritten
/// as an equivalent controller without self-feedback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecastGains {
    pub ka: f64,
    pub kv: f64,
    pub kp: f64,
    pub tau_eff: f64,
    /// `2 tau / (1 + 2 k̄_a)`, with the supplied lag read as the bound `tau0`.
    pub h_min: f64,
}

pub fn recast_self_accel(kbar_a: f64, kbar_v: f64, kbar_p: f64, tau: f64) -> Result<RecastGains> {
    if !(kbar_a.is_finite() && kbar_a >= 0.0) {
        return Err(Error::GainOutOfRange {
            name: "kbar_a",
            value: kbar_a,
            interval: "[0, inf)".into(),
        });
    }
    let f = 1.0 + kbar_a;
    Ok(RecastGains {
        ka: kbar_a / f,
        kv: kbar_v / f,
        kp: kbar_p / f,
        tau_eff: tau / f,
        h_min: 2.0 * tau / (1.0 + 2.0 * kbar_a),
    })
}

impl RecastGains {
    /// Inverse map back to the self-feedback gains `(k̄_a, k̄_v, k̄_p, tau)`.
    pub fn undo(&self) -> (f64, f64, f64, f64) {
        let f = 1.0 / (1.0 - self.ka);
        (self.ka * f, self.kv * f, self.kp * f, self.tau_eff * f)
    }
}

/// Error transfer function when the controlled vehicle also feeds back its own
/// acceleration: `(k̄_a s² + k̄_v s + k̄_p) / (tau s³ + (1 + k̄_a) s² + (k̄_v + k̄_p h_w) s + k̄_p)`.
pub fn self_feedback_error_tf(kbar_a: f64, kbar_v: f64, kbar_p: f64, h_w: f64, tau: f64) -> Result<RationalTF> {
    RationalTF::new(
        vec![kbar_p, kbar_v, kbar_a],
        vec![kbar_p, kbar_v + kbar_p * h_w, 1.0 + kbar_a, tau],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tf::error_tf;

    #[test]
    fn h_min_table_values() {
        let pf = h_min(Architecture::Pf, 0.25, 0.5).unwrap();
        assert!((pf.h_min - 0.8).abs() < 1e-15);
        let r3 = h_min(Architecture::Rpf(3), 0.25, 0.5).unwrap();
        assert!((r3.h_min - 2.0 / 7.0).abs() < 1e-15);
        let base = h_min(Architecture::Rpf(1), 0.0, 0.7).unwrap();
        assert!((base.h_min - 1.4).abs() < 1e-15);
        let r2 = h_min(Architecture::Rpf(2), 0.25, 0.5).unwrap().h_min;
        let one2 = h_min(Architecture::OneAndRth(2), 0.25, 0.5).unwrap().h_min;
        assert!((r2 - one2).abs() < 1e-15);
    }

    #[test]
    fn h_min_gain_intervals() {
        assert!(matches!(h_min(Architecture::Pf, 1.0, 0.5), Err(Error::GainOutOfRange { .. })));
        assert!(matches!(h_min(Architecture::Rpf(3), 0.34, 0.5), Err(Error::GainOutOfRange { .. })));
        assert!(h_min(Architecture::Rpf(3), 0.33, 0.5).is_ok());
        assert!(matches!(h_min(Architecture::OneAndRth(4), 0.5, 0.5), Err(Error::GainOutOfRange { .. })));
        assert!(h_min(Architecture::Pf, -0.1, 0.5).is_err());
        assert!(h_min(Architecture::Pf, 0.1, 0.0).is_err());
    }

    #[test]
    fn analytic_test_satisfying_row_holds_by_discriminant() {
        // B = 0.9375 - 40.4 = -39.4625, B^2 = 1557.29 <= 4 τ^2 C = 1564.02
        let (a, b, c) = norm_quartic(45.0, 0.8, 0.25, 0.88, 0.5);
        assert_eq!(a, 0.25);
        assert!((b * b - 1557.285).abs() < 1e-2);
        assert!((4.0 * a * c - 1564.02).abs() < 1e-2);
        assert_eq!(analytic_norm_test(45.0, 0.8, 0.25, 0.88, 0.5), NormTest::Holds(HoldsBy::Discriminant));
    }

    #[test]
    fn analytic_test_violating_row_gives_witness() {
        // B^2 = 927.96 > 4 τ^2 C = 917.82
        let (a, b, c) = norm_quartic(45.0, 0.8, 0.25, 0.68, 0.5);
        assert!((b * b - 927.96).abs() < 1e-2);
        assert!((4.0 * a * c - 917.82).abs() < 1e-2);
        match analytic_norm_test(45.0, 0.8, 0.25, 0.68, 0.5) {
            NormTest::Fails { witness_omega } => {
                assert!(witness_omega.is_finite() && witness_omega > 0.0);
                let tf = error_tf(45.0, 0.8, 0.25, 0.68, 0.5).unwrap();
                assert!(tf.magnitude(witness_omega).unwrap() > 1.0);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn nominal_equality_holds() {
        // (0.25 + 1.5)^2 = 0.25^2 + 2 * 1.5 * (1 - 0)
        let (_, _, c) = norm_quartic(1.5, 0.25, 0.0, 1.0, 0.0);
        assert_eq!(c, 0.0);
        assert_eq!(analytic_norm_test(1.5, 0.25, 0.0, 1.0, 0.0), NormTest::Holds(HoldsBy::Nominal));
    }

    #[test]
    fn witnesses_exceed_unity_in_every_branch() {
        let cases = [
            (1.0, 0.1, 0.0, 0.1, 0.0),   // nominal fails, c < 0
            (1.0, 0.1, 1.2, 3.0, 0.0),   // τ = 0, b < 0
            (1.0, 0.1, 0.0, 0.1, 0.05),  // c < 0 with lag
            (45.0, 0.8, 0.25, 0.68, 0.5), // discriminant
        ];
        for (kp, kv, ka, hw, tau) in cases {
            let NormTest::Fails { witness_omega } = analytic_norm_test(kp, kv, ka, hw, tau) else {
                panic!("expected failure for {:?}", (kp, kv, ka, hw, tau));
            };
            let tf = error_tf(kp, kv, ka, hw, tau).unwrap();
            let m = tf.eval(num_complex::Complex64::new(0.0, witness_omega)).norm();
            assert!(m > 1.0, "{:?}: |H| = {m} at {witness_omega}", (kp, kv, ka, hw, tau));
        }
    }

    #[test]
    fn region_intercepts_are_ordered() {
        for ka in [1e-9, 0.1, 0.5, 0.9, 0.999] {
            for eta in [1e-3, 0.05, 1.0, 10.0] {
                let g = GainRegionSpec::new(ka, eta, 0.5).unwrap();
                assert!(g.a1 < g.a2);
                assert!(g.a1 > 0.0 && g.b1 > 0.0 && g.a2 > 0.0 && g.b2 > 0.0);
            }
        }
        let g = GainRegionSpec::new(1e-12, 1.0, 1.0).unwrap();
        assert!((g.a1 - 0.25).abs() < 1e-9 && (g.a2 - 0.5).abs() < 1e-9);
    }

    #[test]
    fn synthesized_gains_sit_in_both_sets() {
        let s = synthesize_gains(0.5, 0.05, 0.5).unwrap();
        assert!((s.h_w - 0.7).abs() < 1e-12);
        assert!(s.region.in_nominal_set(s.kp, s.kv));
        assert!(s.region.in_lag_set(s.kp, s.kv));
        for k in 0..=32 {
            let tau = 0.5 * k as f64 / 32.0;
            assert!(analytic_norm_test(s.kp, s.kv, 0.5, s.h_w, tau).holds());
        }
    }

    #[test]
    fn synthesis_rejects_bad_inputs() {
        assert!(synthesize_gains(0.0, 0.1, 0.5).is_err());
        assert!(synthesize_gains(1.0, 0.1, 0.5).is_err());
        assert!(synthesize_gains(0.5, 0.0, 0.5).is_err());
    }

    #[test]
    fn recast_values() {
        let id = recast_self_accel(0.0, 0.8, 45.0, 0.5).unwrap();
        assert_eq!((id.ka, id.kv, id.kp, id.tau_eff), (0.0, 0.8, 45.0, 0.5));
        let r = recast_self_accel(1.0, 0.8, 45.0, 0.5).unwrap();
        assert_eq!(r.tau_eff, 0.25);
        assert_eq!(r.ka, 0.5);
        assert!((r.h_min - 1.0 / 3.0).abs() < 1e-15);
        // matches the PF bound evaluated on the recast lag and gain
        let pf = h_min(Architecture::Pf, r.ka, r.tau_eff).unwrap().h_min;
        assert!((pf - r.h_min).abs() < 1e-15);
    }
}
