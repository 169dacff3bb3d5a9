//! Robust string-stability checks over the lag family `tau ∈ [0, tau0]`.
//!
//! Three metrics are available: the H∞ norm of a single-tap error transfer
//! function, the spectral radius of the spatial characteristic polynomial
//! `P(z; ω) = z^r - Σ_l H_l(jω) z^(r-l)`, and the sum of per-tap H∞ norms
//! (a sufficient condition for the spectral-radius bound).

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::poly;
use crate::tf::{build_error_tf_taps, ControllerSpec, LagSpec, RationalTF};

/// Slack on the `≤ 1` comparison absorbing sweep quantization.
pub const VERDICT_TOL: f64 = 1e-9;

/// Root-finder settings for the spatial characteristic polynomial.
pub const ROOT_TOL: f64 = 1e-12;
pub const ROOT_MAX_ITER: u32 = 200;
pub const MAX_SPATIAL_DEGREE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points_per_decade: usize,
    pub refine_tol: f64,
    pub tau_grid_points: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            omega_min: 1e-3,
            omega_max: 1e3,
            points_per_decade: 200,
            refine_tol: 1e-10,
            tau_grid_points: 33,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_min > 0.0 && self.omega_min.is_finite()) {
            return Err(Error::invalid("omega_min must be > 0"));
        }
        if !(self.omega_max > self.omega_min && self.omega_max.is_finite()) {
            return Err(Error::invalid("omega_max must exceed omega_min"));
        }
        if self.points_per_decade < 16 {
            return Err(Error::invalid("points_per_decade must be >= 16"));
        }
        if !(self.refine_tol > 0.0) {
            return Err(Error::invalid("refine_tol must be > 0"));
        }
        if self.tau_grid_points < 2 {
            return Err(Error::invalid("tau_grid_points must be >= 2"));
        }
        Ok(())
    }

    /// Log-spaced grid over `[lo, hi]`, both ends included.
    fn log_grid(&self, lo: f64, hi: f64) -> Vec<f64> {
        let decades = (hi / lo).log10();
        let n = ((decades * self.points_per_decade as f64).ceil() as usize).max(1);
        let (llo, lhi) = (lo.log10(), hi.log10());
        (0..=n)
            .map(|k| 10f64.powf(llo + (lhi - llo) * k as f64 / n as f64))
            .collect()
    }

    /// Frequency grid for `tf`, widened past the configured band so that every
    /// pole and zero modulus lies at least a decade inside it.
    pub fn frequency_grid(&self, polys: &[&[f64]]) -> Vec<f64> {
        let (mut lo, mut hi) = (self.omega_min, self.omega_max);
        for p in polys {
            if let Some((rlo, rhi)) = poly::root_modulus_bounds(p) {
                lo = lo.min(rlo / 10.0);
                hi = hi.max(rhi * 10.0);
            }
        }
        self.log_grid(lo.max(1e-12), hi.min(1e12))
    }

    /// Uniform lag grid on `[0, tau0]` with both ends included.
    pub fn tau_grid(&self, tau0: f64) -> Vec<f64> {
        if tau0 == 0.0 {
            return vec![0.0];
        }
        let n = self.tau_grid_points - 1;
        (0..=n)
            .map(|k| if k == n { tau0 } else { tau0 * k as f64 / n as f64 })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    RobustlyStringStable,
    Violated,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::RobustlyStringStable => "RobustlyStringStable",
            Verdict::Violated => "Violated",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    /// `‖H‖∞ ≤ 1` for single-tap controllers.
    HinfSingle,
    /// `sup_ω ρ(P(z; ω)) ≤ 1`.
    SpectralRadius,
    /// `Σ_l ‖H_l‖∞ ≤ 1`.
    SumNorm,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::HinfSingle => "hinf",
            Criterion::SpectralRadius => "rho",
            Criterion::SumNorm => "sum",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub verdict: Verdict,
    pub worst_value: f64,
    pub worst_omega: f64,
    pub worst_tau: f64,
    pub criterion: Criterion,
}

/// Routh–Hurwitz test for polynomials up to degree three (strict inequalities).
pub fn is_hurwitz(den: &[f64]) -> Result<bool> {
    let c = poly::trim(den);
    let n = c.len() - 1;
    if n > 3 {
        return Err(Error::UnsupportedDegree(n));
    }
    let sign = c[n].signum();
    let c: Vec<f64> = c.iter().map(|a| a * sign).collect();
    if c.iter().any(|a| *a <= 0.0) {
        return Ok(false);
    }
    Ok(match n {
        3 => c[2] * c[1] > c[3] * c[0],
        _ => true,
    })
}

/// Hurwitz test for arbitrary degree, via the roots when the closed form does not apply.
pub(crate) fn is_hurwitz_any(den: &[f64]) -> Result<bool> {
    match is_hurwitz(den) {
        Err(Error::UnsupportedDegree(_)) => {
            let roots = poly::real_roots_c(den, 1e-14, 500)?;
            Ok(roots.iter().all(|z| z.re < 0.0))
        }
        other => other,
    }
}

/// Relative band within which two metric values count as tied.
const TIE_TOL: f64 = 1e-12;

/// Picks the larger value; ties (within [`TIE_TOL`]) go to the smaller frequency.
fn better(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let scale = a.0.abs().max(b.0.abs());
    if (a.0 - b.0).abs() <= TIE_TOL * scale {
        return if b.1 < a.1 { b } else { a };
    }
    if b.0 > a.0 || a.0.is_nan() {
        b
    } else {
        a
    }
}

/// Golden-section maximisation of `f` over `log10 ω ∈ [a, b]`.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, rel_tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(10f64.powf(c)), f(10f64.powf(d)));
    // tolerance is relative in ω, i.e. absolute in log10 ω
    let tol = (rel_tol / std::f64::consts::LN_10).max(1e-15);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(10f64.powf(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(10f64.powf(d));
        }
    }
    if fc >= fd {
        (fc, 10f64.powf(c))
    } else {
        (fd, 10f64.powf(d))
    }
}

/// `sup_{ω ≥ 0} |tf(jω)|` and its argmax.
///
/// The argmax is `0` when the supremum is attained at DC and `f64::INFINITY`
/// when it is only approached asymptotically.
pub fn hinf_norm(tf: &RationalTF, cfg: &SweepConfig) -> Result<(f64, f64)> {
    cfg.validate()?;
    if !is_hurwitz_any(tf.den())? {
        return Err(Error::NonHurwitz { tau: None });
    }
    let mag = |w: f64| tf.eval(Complex64::new(0.0, w)).norm();
    let grid = cfg.frequency_grid(&[tf.num(), tf.den()]);
    let values: Vec<f64> = grid.iter().map(|&w| mag(w)).collect();

    let mut best = (tf.dc_gain().abs(), 0.0);
    for k in 0..grid.len() {
        let v = values[k];
        let left = if k > 0 { values[k - 1] } else { f64::NEG_INFINITY };
        let right = values.get(k + 1).copied().unwrap_or(f64::NEG_INFINITY);
        if v >= left && v >= right {
            let a = grid[k.saturating_sub(1)].log10();
            let b = grid[(k + 1).min(grid.len() - 1)].log10();
            let refined = if b > a {
                golden_max(mag, a, b, cfg.refine_tol)
            } else {
                (v, grid[k])
            };
            best = better(best, better((v, grid[k]), refined));
        }
    }
    let hf = tf.high_frequency_gain();
    if hf > best.0 {
        best = (hf, f64::INFINITY);
    }
    Ok(best)
}

/// Spectral radius of `P(z) = z^r - Σ_l H_l(jω) z^(r-l)` at one frequency.
pub fn spectral_radius_p(taps: &[(usize, RationalTF)], omega: f64) -> Result<f64> {
    let r = taps.iter().map(|(l, _)| *l).max().unwrap_or(0);
    if r == 0 {
        return Err(Error::invalid("no taps supplied"));
    }
    if r > MAX_SPATIAL_DEGREE {
        return Err(Error::UnsupportedDegree(r));
    }
    // ascending powers of z: coefficient of z^(r-l) is -H_l
    let mut coeffs = vec![Complex64::new(0.0, 0.0); r + 1];
    coeffs[r] = Complex64::new(1.0, 0.0);
    for (l, tf) in taps {
        coeffs[r - l] -= tf.eval_jw(omega)?;
    }
    if r == 1 {
        return Ok(coeffs[0].norm());
    }
    let roots = poly::aberth(&coeffs, ROOT_TOL, ROOT_MAX_ITER)?;
    Ok(roots.roots.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Worst-case metric over the frequency sweep at one lag value.
fn metric_at(
    spec: &ControllerSpec,
    tau: f64,
    cfg: &SweepConfig,
    criterion: Criterion,
) -> Result<(f64, f64)> {
    let lag = LagSpec { tau, tau0: tau };
    let taps = build_error_tf_taps(spec, &lag)?;
    let den = taps[0].1.den().to_vec();
    if !is_hurwitz(&den)? {
        return Err(Error::NonHurwitz { tau: Some(tau) });
    }
    match criterion {
        Criterion::HinfSingle => {
            if taps.len() != 1 {
                return Err(Error::invalid(format!(
                    "hinf criterion needs a single-tap controller, got {}",
                    spec.arch()
                )));
            }
            hinf_norm(&taps[0].1, cfg)
        }
        Criterion::SumNorm => {
            // reported frequency is the argmax of the tap with the largest norm
            let mut total = 0.0;
            let mut top = (f64::NEG_INFINITY, 0.0);
            for (_, tf) in &taps {
                let (v, w) = hinf_norm(tf, cfg)?;
                total += v;
                top = better(top, (v, w));
            }
            Ok((total, top.1))
        }
        Criterion::SpectralRadius => {
            let polys: Vec<&[f64]> = std::iter::once(den.as_slice())
                .chain(taps.iter().map(|(_, tf)| tf.num()))
                .collect();
            let grid = cfg.frequency_grid(&polys);
            let mut best = (spectral_radius_p(&taps, 0.0)?, 0.0);
            for w in grid {
                best = better(best, (spectral_radius_p(&taps, w)?, w));
            }
            Ok(best)
        }
    }
}

/// Evaluates `criterion` on a uniform lag grid over `[0, tau0]` and reports the worst case.
pub fn robust_check(
    spec: &ControllerSpec,
    tau0: f64,
    cfg: &SweepConfig,
    criterion: Criterion,
) -> Result<StabilityReport> {
    cfg.validate()?;
    if !(tau0.is_finite() && tau0 >= 0.0) {
        return Err(Error::invalid(format!("tau0 must be >= 0 (got {tau0})")));
    }
    let taus = cfg.tau_grid(tau0);
    let results: Vec<Result<(f64, f64, f64)>> = taus
        .par_iter()
        .map(|&tau| metric_at(spec, tau, cfg, criterion).map(|(v, w)| (v, w, tau)))
        .collect();

    let mut worst: Option<(f64, f64, f64)> = None;
    for r in results {
        let cand = r?;
        worst = Some(match worst {
            None => cand,
            Some(cur) => match cand.0.partial_cmp(&cur.0) {
                Some(Ordering::Greater) => cand,
                Some(Ordering::Equal) if (cand.1, cand.2) < (cur.1, cur.2) => cand,
                _ => cur,
            },
        });
    }
    let (worst_value, worst_omega, worst_tau) = worst.expect("tau grid is never empty");
    let verdict = if worst_value <= 1.0 + VERDICT_TOL {
        Verdict::RobustlyStringStable
    } else {
        Verdict::Violated
    };
    Ok(StabilityReport {
        verdict,
        worst_value,
        worst_omega,
        worst_tau,
        criterion,
    })
}
