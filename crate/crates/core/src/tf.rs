//! Spacing-error transfer functions for the predecessor-following controller
//! families and their evaluation on the imaginary axis.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly;

/// Smallest denominator modulus accepted by [`RationalTF::eval_jw`].
pub const POLE_ON_AXIS_EPS: f64 = 1e-300;

/// Proper rational transfer function with real coefficients in ascending powers of `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalTF {
    num: Vec<f64>,
    den: Vec<f64>,
}

impl RationalTF {
    pub fn new(num: Vec<f64>, den: Vec<f64>) -> Result<Self> {
        if num.iter().chain(den.iter()).any(|c| !c.is_finite()) {
            return Err(Error::invalid("transfer function coefficients must be finite"));
        }
        let num = poly::trim(&num);
        let den = poly::trim(&den);
        if den.iter().all(|c| *c == 0.0) {
            return Err(Error::invalid("denominator is identically zero"));
        }
        if poly::degree(&num) > poly::degree(&den) {
            return Err(Error::invalid("transfer function is not proper"));
        }
        Ok(Self { num, den })
    }

    pub fn num(&self) -> &[f64] {
        &self.num
    }

    pub fn den(&self) -> &[f64] {
        &self.den
    }

    pub fn num_degree(&self) -> usize {
        poly::degree(&self.num)
    }

    pub fn den_degree(&self) -> usize {
        poly::degree(&self.den)
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        poly::eval_complex(&self.num, s) / poly::eval_complex(&self.den, s)
    }

    /// `H(jω)`. Fails when the denominator vanishes on the axis.
    pub fn eval_jw(&self, omega: f64) -> Result<Complex64> {
        let s = Complex64::new(0.0, omega);
        let d = poly::eval_complex(&self.den, s);
        if d.norm() < POLE_ON_AXIS_EPS {
            return Err(Error::PoleOnAxis { omega });
        }
        Ok(poly::eval_complex(&self.num, s) / d)
    }

    pub fn magnitude(&self, omega: f64) -> Result<f64> {
        self.eval_jw(omega).map(|h| h.norm())
    }

    /// `H(0)`; infinite when the denominator has a root at the origin.
    pub fn dc_gain(&self) -> f64 {
        self.num[0] / self.den[0]
    }

    /// `lim_{ω→∞} |H(jω)|`: the leading-coefficient ratio when biproper, else zero.
    pub fn high_frequency_gain(&self) -> f64 {
        if self.num_degree() == self.den_degree() {
            (self.num[self.num_degree()] / self.den[self.den_degree()]).abs()
        } else {
            0.0
        }
    }

    /// Coefficients scaled so the denominator constant term is one.
    pub fn normalized(&self) -> Self {
        let k = self.den[0];
        if k == 0.0 {
            return self.clone();
        }
        Self {
            num: self.num.iter().map(|c| c / k).collect(),
            den: self.den.iter().map(|c| c / k).collect(),
        }
    }

    pub fn scale(&self, gain: f64) -> Self {
        Self {
            num: self.num.iter().map(|c| c * gain).collect(),
            den: self.den.clone(),
        }
    }
}

impl fmt::Display for RationalTF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "num={:?} den={:?}", self.num, self.den)
    }
}

/// Information-flow architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Architecture {
    /// Immediate predecessor only.
    Pf,
    /// The `r` nearest predecessors.
    Rpf(usize),
    /// Immediate predecessor plus the `r`-th predecessor.
    OneAndRth(usize),
}

impl Architecture {
    /// Largest lag index referenced.
    pub fn reach(&self) -> usize {
        match *self {
            Architecture::Pf => 1,
            Architecture::Rpf(r) | Architecture::OneAndRth(r) => r,
        }
    }

    pub fn lags(&self) -> Vec<usize> {
        match *self {
            Architecture::Pf => vec![1],
            Architecture::Rpf(r) => (1..=r).collect(),
            Architecture::OneAndRth(r) => vec![1, r],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Architecture::Pf => "pf",
            Architecture::Rpf(_) => "rpf",
            Architecture::OneAndRth(_) => "one-and-rth",
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Architecture::Pf => write!(f, "pf"),
            Architecture::Rpf(r) => write!(f, "rpf(r={r})"),
            Architecture::OneAndRth(r) => write!(f, "one-and-rth(r={r})"),
        }
    }
}

/// Feedback gains attached to the `lag`-th predecessor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    pub lag: usize,
    pub kp: f64,
    pub kv: f64,
    pub ka: f64,
}

impl Tap {
    pub fn new(lag: usize, kp: f64, kv: f64, ka: f64) -> Self {
        Self { lag, kp, kv, ka }
    }
}

/// Controller: architecture, per-tap gains, time headway `h_w` (s) and pairwise
/// standstill distance `d` (m). The `l`-th predecessor is kept at `l * d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerSpec {
    arch: Architecture,
    taps: Vec<Tap>,
    h_w: f64,
    d: f64,
}

impl ControllerSpec {
    pub fn new(arch: Architecture, taps: Vec<Tap>, h_w: f64, d: f64) -> Result<Self> {
        match arch {
            Architecture::Rpf(0) => return Err(Error::invalid("rpf requires r >= 1")),
            Architecture::OneAndRth(r) if r < 2 => {
                return Err(Error::invalid("one-and-rth requires r >= 2"))
            }
            _ => {}
        }
        let lags: Vec<usize> = taps.iter().map(|t| t.lag).collect();
        if lags != arch.lags() {
            return Err(Error::invalid(format!(
                "{arch} expects taps at lags {:?}, got {lags:?}",
                arch.lags()
            )));
        }
        for t in &taps {
            if !(t.kp.is_finite() && t.kp > 0.0) {
                return Err(Error::invalid(format!("k_p at lag {} must be > 0 (got {})", t.lag, t.kp)));
            }
            if !(t.kv.is_finite() && t.kv > 0.0) {
                return Err(Error::invalid(format!("k_v at lag {} must be > 0 (got {})", t.lag, t.kv)));
            }
            if !(t.ka.is_finite() && t.ka >= 0.0) {
                return Err(Error::invalid(format!("k_a at lag {} must be >= 0 (got {})", t.lag, t.ka)));
            }
        }
        if !(h_w.is_finite() && h_w >= 0.0) {
            return Err(Error::invalid(format!("time headway must be >= 0 (got {h_w})")));
        }
        if !(d.is_finite() && d >= 0.0) {
            return Err(Error::invalid(format!("standstill distance must be >= 0 (got {d})")));
        }
        Ok(Self { arch, taps, h_w, d })
    }

    /// Same `(k_p, k_v, k_a)` on every tap of `arch`.
    pub fn equal_gains(arch: Architecture, kp: f64, kv: f64, ka: f64, h_w: f64, d: f64) -> Result<Self> {
        let taps = arch.lags().into_iter().map(|l| Tap::new(l, kp, kv, ka)).collect();
        Self::new(arch, taps, h_w, d)
    }

    pub fn pf(kp: f64, kv: f64, ka: f64, h_w: f64, d: f64) -> Result<Self> {
        Self::equal_gains(Architecture::Pf, kp, kv, ka, h_w, d)
    }

    pub fn arch(&self) -> Architecture {
        self.arch
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    pub fn h_w(&self) -> f64 {
        self.h_w
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn with_headway(&self, h_w: f64) -> Result<Self> {
        Self::new(self.arch, self.taps.clone(), h_w, self.d)
    }

    /// Single-tap controllers (PF, or RPF with r = 1).
    pub fn single_tap(&self) -> Option<Tap> {
        match self.taps.as_slice() {
            [t] => Some(*t),
            _ => None,
        }
    }
}

/// Parasitic actuation lag `tau` with its upper bound `tau0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagSpec {
    pub tau: f64,
    pub tau0: f64,
}

impl LagSpec {
    pub fn new(tau: f64, tau0: f64) -> Result<Self> {
        if !(tau0.is_finite() && tau0 > 0.0) {
            return Err(Error::invalid(format!("tau0 must be > 0 (got {tau0})")));
        }
        if !(tau.is_finite() && (0.0..=tau0).contains(&tau)) {
            return Err(Error::invalid(format!("tau must lie in [0, {tau0}] (got {tau})")));
        }
        Ok(Self { tau, tau0 })
    }

    /// Lag at its worst-case bound.
    pub fn at_bound(tau0: f64) -> Result<Self> {
        Self::new(tau0, tau0)
    }
}

/// `tau s^3 + s^2 + Σ_l [(k_vl + l k_pl h_w) s + k_pl]`.
pub fn shared_denominator(taps: &[Tap], h_w: f64, tau: f64) -> Vec<f64> {
    let (lin, cst) = taps.iter().fold((0.0, 0.0), |(lin, cst), t| {
        (lin + t.kv + t.lag as f64 * t.kp * h_w, cst + t.kp)
    });
    vec![cst, lin, 1.0, tau]
}

/// `(k_a s^2 + k_v s + k_p) / (tau s^3 + s^2 + (k_v + k_p h_w) s + k_p)`.
pub fn error_tf(kp: f64, kv: f64, ka: f64, h_w: f64, tau: f64) -> Result<RationalTF> {
    RationalTF::new(vec![kp, kv, ka], vec![kp, kv + kp * h_w, 1.0, tau])
}

/// Predecessor-following error transfer function without acceleration feedforward.
pub fn build_error_tf_basic(spec: &ControllerSpec, lag: &LagSpec) -> Result<RationalTF> {
    let tap = match (spec.arch(), spec.single_tap()) {
        (Architecture::Pf, Some(t)) => t,
        _ => return Err(Error::invalid(format!("expected a pf controller, got {}", spec.arch()))),
    };
    if tap.ka != 0.0 {
        return Err(Error::invalid("basic error transfer function requires k_a = 0"));
    }
    error_tf(tap.kp, tap.kv, 0.0, spec.h_w(), lag.tau)
}

/// Predecessor-following error transfer function with acceleration feedforward.
pub fn build_error_tf_accel(spec: &ControllerSpec, lag: &LagSpec) -> Result<RationalTF> {
    let tap = match spec.single_tap() {
        Some(t) => t,
        None => return Err(Error::invalid(format!("expected a single-tap controller, got {}", spec.arch()))),
    };
    error_tf(tap.kp, tap.kv, tap.ka, spec.h_w(), lag.tau)
}

/// Per-tap transfer functions `H_l(s)` sharing one denominator.
pub fn build_error_tf_taps(spec: &ControllerSpec, lag: &LagSpec) -> Result<Vec<(usize, RationalTF)>> {
    let den = shared_denominator(spec.taps(), spec.h_w(), lag.tau);
    spec.taps()
        .iter()
        .map(|t| RationalTF::new(vec![t.kp, t.kv, t.ka], den.clone()).map(|tf| (t.lag, tf)))
        .collect()
}

pub fn eval_jw(tf: &RationalTF, omega: f64) -> Result<Complex64> {
    tf.eval_jw(omega)
}
