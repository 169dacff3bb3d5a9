//! Fixed-step simulation of an `n`-vehicle platoon.
//!
//! Vehicle `0` leads and tracks `v_r` with a prescribed acceleration
//! disturbance. Followers obey `ẍ = a`, `τ ȧ + a = u` and the multi-tap CTHP
//! control law
//!
//! ```text
//! u_i = Σ_l [ k_a a_{i-l} - k_v (v_i - v_{i-l}) - k_p (x_i - x_{i-l} + l d + l h_w v_i) ]
//! ```
//!
//! where only taps with `l ≤ i` are used.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fmt::sig9;
use crate::tf::{Architecture, ControllerSpec, LagSpec};

/// States with magnitude above this are treated as a numeric blow-up.
pub const DIVERGENCE_LIMIT: f64 = 1e100;

/// Default relative tolerance for [`amplification_verdict`].
pub const VERDICT_TOL: f64 = 0.02;

/// Peak errors below this many metres are treated as zero by the verdict.
pub const PEAK_FLOOR: f64 = 1e-9;

/// Lead-vehicle acceleration `A sin(ω (t - t_on) + φ)` on `[t_on, t_off)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disturbance {
    pub amplitude: f64,
    pub frequency: f64,
    pub t_on: f64,
    pub t_off: f64,
    pub phase: f64,
}

impl Default for Disturbance {
    fn default() -> Self {
        Self {
            amplitude: 2.0,
            frequency: 1.0,
            t_on: 5.0,
            t_off: 10.0,
            phase: 0.0,
        }
    }
}

impl Disturbance {
    pub fn none() -> Self {
        Self {
            amplitude: 0.0,
            ..Self::default()
        }
    }

    pub fn accel(&self, t: f64) -> f64 {
        self.accel_in_step(t, t)
    }

    /// Acceleration at stage time `t` of an integration step starting at
    /// `t_step`. Whether the window is active is decided by `t_step`, so a step
    /// never straddles the switching instants when they lie on the time grid.
    pub fn accel_in_step(&self, t: f64, t_step: f64) -> f64 {
        if t_step >= self.t_on && t_step < self.t_off {
            self.amplitude * (self.frequency * (t - self.t_on) + self.phase).sin()
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlatoonConfig {
    pub n: usize,
    pub spec: ControllerSpec,
    pub lag: LagSpec,
    pub v_r: f64,
    pub disturbance: Disturbance,
    pub dt: f64,
    pub t_end: f64,
    /// Store every k-th step. Peak errors always use every step.
    pub record_every: usize,
}

impl PlatoonConfig {
    pub fn new(n: usize, spec: ControllerSpec, lag: LagSpec) -> Self {
        Self {
            n,
            spec,
            lag,
            v_r: 20.0,
            disturbance: Disturbance::default(),
            dt: 1e-3,
            t_end: 40.0,
            record_every: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid(format!("platoon needs n >= 2 vehicles (got {})", self.n)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid(format!("dt must be > 0 (got {})", self.dt)));
        }
        let w = &self.disturbance;
        if !(w.t_on < w.t_off && w.t_off <= self.t_end) {
            return Err(Error::invalid(format!(
                "disturbance window needs t_on < t_off <= t_end (got {}, {}, {})",
                w.t_on, w.t_off, self.t_end
            )));
        }
        if !(w.amplitude.is_finite() && w.frequency.is_finite() && w.frequency >= 0.0 && w.phase.is_finite()) {
            return Err(Error::invalid("disturbance amplitude, frequency and phase must be finite, frequency >= 0"));
        }
        if !self.v_r.is_finite() {
            return Err(Error::invalid("v_r must be finite"));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record_every must be >= 1"));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// Equilibrium state `[x_0, v_0, a_0, x_1, v_1, a_1, ...]` with zero spacing errors.
pub fn init_equilibrium(cfg: &PlatoonConfig) -> Vec<f64> {
    let gap = cfg.spec.d() + cfg.spec.h_w() * cfg.v_r;
    let mut s = Vec::with_capacity(3 * cfg.n);
    for i in 0..cfg.n {
        s.extend_from_slice(&[-(i as f64) * gap, cfg.v_r, 0.0]);
    }
    s
}

struct Model<'a> {
    cfg: &'a PlatoonConfig,
    /// Per follower: active `(lag, kp, kv, ka)` taps.
    taps: Vec<Vec<(usize, f64, f64, f64)>>,
}

impl<'a> Model<'a> {
    fn new(cfg: &'a PlatoonConfig) -> Self {
        let taps = (0..cfg.n)
            .map(|i| {
                cfg.spec
                    .taps()
                    .iter()
                    .filter(|t| i > 0 && t.lag <= i)
                    .map(|t| (t.lag, t.kp, t.kv, t.ka))
                    .collect()
            })
            .collect();
        Self { cfg, taps }
    }

    /// Fills `acc` (realised accelerations) and `u` (commands) for state `s` at `t`.
    fn controls(&self, t: f64, t_step: f64, s: &[f64], acc: &mut [f64], u: &mut [f64]) {
        let (d, hw) = (self.cfg.spec.d(), self.cfg.spec.h_w());
        let lagged = self.cfg.lag.tau > 0.0;
        acc[0] = self.cfg.disturbance.accel_in_step(t, t_step);
        u[0] = acc[0];
        for i in 1..self.cfg.n {
            let (xi, vi) = (s[3 * i], s[3 * i + 1]);
            let mut ui = 0.0;
            for &(l, kp, kv, ka) in &self.taps[i] {
                let j = i - l;
                let lf = l as f64;
                ui += ka * acc[j] - kv * (vi - s[3 * j + 1]) - kp * (xi - s[3 * j] + lf * d + lf * hw * vi);
            }
            u[i] = ui;
            acc[i] = if lagged { s[3 * i + 2] } else { ui };
        }
    }

    fn deriv(&self, t: f64, t_step: f64, s: &[f64], out: &mut [f64], acc: &mut [f64], u: &mut [f64]) {
        self.controls(t, t_step, s, acc, u);
        let tau = self.cfg.lag.tau;
        for i in 0..self.cfg.n {
            out[3 * i] = s[3 * i + 1];
            out[3 * i + 1] = acc[i];
            out[3 * i + 2] = if i > 0 && tau > 0.0 { (u[i] - s[3 * i + 2]) / tau } else { 0.0 };
        }
    }
}

/// Recorded trajectories, indexed `[vehicle][sample]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub a: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    /// Spacing errors; `e[0]` is empty because the leader has no predecessor.
    pub e: Vec<Vec<f64>>,
    /// `max |e_i(t)|` over every integration step; entry `k` belongs to vehicle `k + 1`.
    pub peak_abs_error: Vec<f64>,
}

impl SimResult {
    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Long-format CSV with header `t,vehicle,x,v,a,u,e`. The leader's `e` is blank.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.t.len() * self.n() * 64);
        out.push_str("t,vehicle,x,v,a,u,e\n");
        for (k, &t) in self.t.iter().enumerate() {
            for i in 0..self.n() {
                let e = if i == 0 { String::new() } else { sig9(self.e[i][k]) };
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    sig9(t),
                    i,
                    sig9(self.x[i][k]),
                    sig9(self.v[i][k]),
                    sig9(self.a[i][k]),
                    sig9(self.u[i][k]),
                    e
                );
            }
        }
        out
    }

    /// Per-vehicle peak errors and the verdict as `key = value` lines.
    pub fn summary(&self, tol: f64) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "vehicles = {}", self.n());
        for (k, p) in self.peak_abs_error.iter().enumerate() {
            let _ = writeln!(out, "peak_abs_error.{} = {}", k + 1, sig9(*p));
        }
        let _ = writeln!(out, "trend_ratio = {}", sig9(trend_ratio(self)));
        let _ = writeln!(out, "verdict = {}", amplification_verdict(self, tol));
        out
    }
}

fn record(model: &Model, t: f64, s: &[f64], acc: &mut [f64], u: &mut [f64], res: &mut SimResult) {
    model.controls(t, t, s, acc, u);
    let hw = model.cfg.spec.h_w();
    let d = model.cfg.spec.d();
    res.t.push(t);
    for i in 0..model.cfg.n {
        res.x[i].push(s[3 * i]);
        res.v[i].push(s[3 * i + 1]);
        res.a[i].push(acc[i]);
        res.u[i].push(u[i]);
        if i > 0 {
            res.e[i].push(s[3 * i] - s[3 * (i - 1)] + d + hw * s[3 * i + 1]);
        }
    }
}

/// Integrates the platoon with classical RK4. A zero lag switches to the
/// algebraic `a_i = u_i` form.
pub fn simulate(cfg: &PlatoonConfig) -> Result<SimResult> {
    cfg.validate()?;
    let n = cfg.n;
    let model = Model::new(cfg);
    let mut s = init_equilibrium(cfg);
    let dim = s.len();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let (mut acc, mut u) = (vec![0.0; n], vec![0.0; n]);
    let steps = cfg.steps();
    let samples = steps / cfg.record_every + 2;
    let series = || vec![Vec::with_capacity(samples); n];
    let mut res = SimResult {
        t: Vec::with_capacity(samples),
        x: series(),
        v: series(),
        a: series(),
        u: series(),
        e: series(),
        peak_abs_error: vec![0.0; n - 1],
    };
    res.e[0] = Vec::new();
    record(&model, 0.0, &s, &mut acc, &mut u, &mut res);

    let h = cfg.dt;
    let (d, hw) = (cfg.spec.d(), cfg.spec.h_w());
    for step in 1..=steps {
        let t = (step - 1) as f64 * h;
        model.deriv(t, t, &s, &mut k1, &mut acc, &mut u);
        for j in 0..dim {
            tmp[j] = s[j] + 0.5 * h * k1[j];
        }
        model.deriv(t + 0.5 * h, t, &tmp, &mut k2, &mut acc, &mut u);
        for j in 0..dim {
            tmp[j] = s[j] + 0.5 * h * k2[j];
        }
        model.deriv(t + 0.5 * h, t, &tmp, &mut k3, &mut acc, &mut u);
        for j in 0..dim {
            tmp[j] = s[j] + h * k3[j];
        }
        model.deriv(t + h, t, &tmp, &mut k4, &mut acc, &mut u);
        for j in 0..dim {
            s[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        let t_new = step as f64 * h;
        if s.iter().any(|z| !z.is_finite() || z.abs() > DIVERGENCE_LIMIT) {
            return Err(Error::Divergence { step, time: t_new });
        }
        for i in 1..n {
            let e = s[3 * i] - s[3 * (i - 1)] + d + hw * s[3 * i + 1];
            let p = &mut res.peak_abs_error[i - 1];
            *p = p.max(e.abs());
        }
        if step % cfg.record_every == 0 || step == steps {
            record(&model, t_new, &s, &mut acc, &mut u, &mut res);
        }
    }
    Ok(res)
}

/// Lag-free simulation (`a_i ≡ u_i`). Rejects configurations with `τ ≠ 0`.
pub fn tau_zero_dynamics(cfg: &PlatoonConfig) -> Result<SimResult> {
    if cfg.lag.tau != 0.0 {
        return Err(Error::invalid(format!("lag-free dynamics need tau = 0 (got {})", cfg.lag.tau)));
    }
    simulate(cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Amplification {
    Attenuating,
    Amplifying,
    Mixed,
}

impl std::fmt::Display for Amplification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Attenuating => "Attenuating",
            Self::Amplifying => "Amplifying",
            Self::Mixed => "Mixed",
        })
    }
}

/// Classifies the follower peak sequence: attenuating if no peak exceeds its
/// predecessor's by more than `tol`, amplifying if no peak drops below its
/// successor's by more than `tol`.
pub fn amplification_verdict(result: &SimResult, tol: f64) -> Amplification {
    let p: Vec<f64> = result.peak_abs_error.iter().map(|p| p.max(PEAK_FLOOR)).collect();
    if p.windows(2).all(|w| w[1] <= (1.0 + tol) * w[0]) {
        Amplification::Attenuating
    } else if p.windows(2).all(|w| w[0] <= (1.0 + tol) * w[1]) {
        Amplification::Amplifying
    } else {
        Amplification::Mixed
    }
}

/// Last follower's peak error over the first follower's.
pub fn trend_ratio(result: &SimResult) -> f64 {
    let p = &result.peak_abs_error;
    match (p.first(), p.last()) {
        (Some(&first), Some(&last)) if first > 0.0 => last / first,
        (Some(_), Some(&last)) if last > 0.0 => f64::INFINITY,
        _ => 1.0,
    }
}

/// Amplitude of `y ≈ c + a cos(ωt) + b sin(ωt)` fitted by least squares over
/// samples with `t ≥ t_from`. For `ω = 0` this is `|mean(y)|`.
pub fn steady_state_amplitude(t: &[f64], y: &[f64], omega: f64, t_from: f64) -> Result<f64> {
    let idx: Vec<usize> = (0..t.len().min(y.len())).filter(|&k| t[k] >= t_from).collect();
    if idx.len() < 4 {
        return Err(Error::invalid("too few samples in the fitting window"));
    }
    if omega == 0.0 {
        let mean = idx.iter().map(|&k| y[k]).sum::<f64>() / idx.len() as f64;
        return Ok(mean.abs());
    }
    let mut m = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for &k in &idx {
        let row = [1.0, (omega * t[k]).cos(), (omega * t[k]).sin()];
        for i in 0..3 {
            rhs[i] += row[i] * y[k];
            for j in 0..3 {
                m[i][j] += row[i] * row[j];
            }
        }
    }
    let coef = solve3(m, rhs).ok_or_else(|| Error::invalid("fitting window does not resolve the frequency"))?;
    Ok(coef[1].hypot(coef[2]))
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for c in 0..3 {
        let p = (c..3).max_by(|&i, &j| m[i][c].abs().partial_cmp(&m[j][c].abs()).unwrap())?;
        if m[p][c].abs() < 1e-12 * m[c][c].abs().max(1e-300) || m[p][c] == 0.0 {
            return None;
        }
        m.swap(c, p);
        b.swap(c, p);
        for r in c + 1..3 {
            let f = m[r][c] / m[c][c];
            for k in c..3 {
                m[r][k] -= f * m[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = [0.0; 3];
    for c in (0..3).rev() {
        let s: f64 = (c + 1..3).map(|k| m[c][k] * x[k]).sum();
        x[c] = (b[c] - s) / m[c][c];
    }
    Some(x)
}

/// Reference gains and platoon parameters used by the headway scenarios.
pub mod reference {
    pub const N: usize = 15;
    pub const D: f64 = 5.0;
    pub const TAU0: f64 = 0.5;
    pub const KP: f64 = 45.0;
    pub const KV: f64 = 0.8;
    pub const KA: f64 = 0.25;
    pub const V_R: f64 = 20.0;
}

/// One headway comparison: `hw_above` respects the bound, `hw_below` violates it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadwayScenario {
    pub label: &'static str,
    pub arch: Architecture,
    pub ka: f64,
    /// Bound as tabulated (two decimals).
    pub h_min_rounded: f64,
    pub hw_above: f64,
    pub hw_below: f64,
}

pub const HEADWAY_SCENARIOS: [HeadwayScenario; 5] = [
    HeadwayScenario { label: "r1-ka0.25", arch: Architecture::Pf, ka: 0.25, h_min_rounded: 0.8, hw_above: 0.88, hw_below: 0.68 },
    HeadwayScenario { label: "r2-ka0", arch: Architecture::Rpf(2), ka: 0.0, h_min_rounded: 0.66, hw_above: 0.8, hw_below: 0.63 },
    HeadwayScenario { label: "r2-ka0.25", arch: Architecture::Rpf(2), ka: 0.25, h_min_rounded: 0.44, hw_above: 0.68, hw_below: 0.4 },
    HeadwayScenario { label: "r3-ka0", arch: Architecture::Rpf(3), ka: 0.0, h_min_rounded: 0.5, hw_above: 0.6, hw_below: 0.47 },
    HeadwayScenario { label: "r3-ka0.25", arch: Architecture::Rpf(3), ka: 0.25, h_min_rounded: 0.28, hw_above: 0.5, hw_below: 0.27 },
];

impl HeadwayScenario {
    /// Platoon at the reference parameters with the given headway and `τ = τ0`.
    pub fn config(&self, h_w: f64) -> Result<PlatoonConfig> {
        use reference::*;
        let spec = ControllerSpec::equal_gains(self.arch, KP, KV, self.ka, h_w, D)?;
        let mut cfg = PlatoonConfig::new(N, spec, LagSpec::at_bound(TAU0)?);
        cfg.v_r = V_R;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pf_cfg(h_w: f64, tau: f64, n: usize) -> PlatoonConfig {
        let spec = ControllerSpec::pf(45.0, 0.8, 0.25, h_w, 5.0).unwrap();
        let mut cfg = PlatoonConfig::new(n, spec, LagSpec::new(tau, 0.5).unwrap());
        cfg.t_end = 20.0;
        cfg
    }

    #[test]
    fn equilibrium_positions() {
        let cfg = pf_cfg(0.88, 0.5, 2);
        let s = init_equilibrium(&cfg);
        assert!((s[3] + 22.6).abs() < 1e-12);
        let mut standstill = cfg.clone();
        standstill.v_r = 0.0;
        assert_eq!(init_equilibrium(&standstill)[3], -5.0);
    }

    #[test]
    fn no_disturbance_keeps_equilibrium() {
        let mut cfg = pf_cfg(0.88, 0.5, 6);
        cfg.disturbance = Disturbance::none();
        let r = simulate(&cfg).unwrap();
        for i in 1..6 {
            assert!(r.e[i].iter().all(|e| e.abs() < 1e-9));
        }
        assert_eq!(amplification_verdict(&r, VERDICT_TOL), Amplification::Attenuating);
    }

    #[test]
    fn series_lengths_match() {
        let r = simulate(&pf_cfg(0.88, 0.5, 4)).unwrap();
        let len = r.t.len();
        assert_eq!(len, 20_000 / 10 + 1);
        for i in 0..4 {
            assert_eq!(r.x[i].len(), len);
            assert_eq!(r.u[i].len(), len);
        }
        assert!(r.e[0].is_empty());
        assert_eq!(r.e[3].len(), len);
        assert_eq!(r.peak_abs_error.len(), 3);
    }

    #[test]
    fn lead_follows_reference_outside_window() {
        let r = simulate(&pf_cfg(0.88, 0.5, 3)).unwrap();
        // integral of 2 sin over [5, 10) with ω = 1
        let dv = 2.0 * (1.0 - 5f64.cos());
        let last = *r.v[0].last().unwrap();
        assert!((last - (20.0 + dv)).abs() < 1e-6, "{last}");
    }

    #[test]
    fn attenuation_above_bound() {
        let cfg = pf_cfg(0.88, 0.5, 8);
        let r = simulate(&cfg).unwrap();
        assert_eq!(amplification_verdict(&r, VERDICT_TOL), Amplification::Attenuating);
    }

    #[test]
    fn amplification_below_bound() {
        let mut cfg = pf_cfg(0.68, 0.5, 8);
        cfg.disturbance.frequency = 8.0;
        let r = simulate(&cfg).unwrap();
        assert_eq!(amplification_verdict(&r, VERDICT_TOL), Amplification::Amplifying);
        assert!(trend_ratio(&r) > 1.1);
    }

    #[test]
    fn lag_free_matches_tiny_lag() {
        let mut a = pf_cfg(0.88, 0.0, 4);
        a.t_end = 15.0;
        let mut b = a.clone();
        b.lag = LagSpec::new(1e-6, 0.5).unwrap();
        b.dt = 2e-6;
        b.record_every = 5000;
        let ra = tau_zero_dynamics(&a).unwrap();
        let rb = simulate(&b).unwrap();
        assert_eq!(ra.t.len(), rb.t.len());
        for i in 0..4 {
            for k in 0..ra.t.len() {
                assert!((ra.x[i][k] - rb.x[i][k]).abs() < 1e-3);
                assert!((ra.v[i][k] - rb.v[i][k]).abs() < 1e-3);
            }
        }
        assert!(tau_zero_dynamics(&b).is_err());
    }

    #[test]
    fn lag_free_above_nominal_bound_attenuates() {
        let mut cfg = pf_cfg(0.5, 0.0, 6);
        cfg.disturbance.frequency = 3.0;
        let r = tau_zero_dynamics(&cfg).unwrap();
        assert_eq!(amplification_verdict(&r, VERDICT_TOL), Amplification::Attenuating);
    }

    #[test]
    fn unstable_loop_reports_divergence() {
        // huge position gain with lag: non-Hurwitz, grows without bound
        let spec = ControllerSpec::pf(5000.0, 0.01, 0.0, 0.01, 5.0).unwrap();
        let mut cfg = PlatoonConfig::new(3, spec, LagSpec::new(0.5, 0.5).unwrap());
        cfg.t_end = 400.0;
        cfg.dt = 1e-3;
        match simulate(&cfg) {
            Err(Error::Divergence { step, time }) => assert!(step > 0 && time > 5.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = pf_cfg(0.88, 0.5, 1);
        assert!(simulate(&cfg).is_err());
        cfg.n = 3;
        cfg.disturbance.t_off = 50.0;
        assert!(simulate(&cfg).is_err());
        cfg.disturbance.t_off = 10.0;
        cfg.dt = 0.0;
        assert!(simulate(&cfg).is_err());
    }

    #[test]
    fn rpf_boundary_vehicle_uses_available_taps_only() {
        let spec = ControllerSpec::equal_gains(Architecture::Rpf(3), 45.0, 0.8, 0.0, 0.6, 5.0).unwrap();
        let m_cfg = PlatoonConfig::new(5, spec, LagSpec::new(0.5, 0.5).unwrap());
        let m = Model::new(&m_cfg);
        let lags: Vec<Vec<usize>> = m.taps.iter().map(|t| t.iter().map(|x| x.0).collect()).collect();
        assert_eq!(lags, vec![vec![], vec![1], vec![1, 2], vec![1, 2, 3], vec![1, 2, 3]]);
    }

    #[test]
    fn verdict_classification() {
        let mk = |p: Vec<f64>| SimResult {
            t: vec![],
            x: vec![],
            v: vec![],
            a: vec![],
            u: vec![],
            e: vec![],
            peak_abs_error: p,
        };
        assert_eq!(amplification_verdict(&mk(vec![1.0, 0.9, 0.91]), 0.02), Amplification::Attenuating);
        assert_eq!(amplification_verdict(&mk(vec![1.0, 1.2, 1.5]), 0.02), Amplification::Amplifying);
        assert_eq!(amplification_verdict(&mk(vec![1.0, 1.5, 1.0]), 0.02), Amplification::Mixed);
        assert!((trend_ratio(&mk(vec![2.0, 1.0, 3.0])) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn sinusoid_fit_recovers_amplitude() {
        let t: Vec<f64> = (0..4000).map(|k| k as f64 * 0.01).collect();
        let y: Vec<f64> = t.iter().map(|t| 0.3 + 1.7 * (2.0 * t + 0.4).sin()).collect();
        let a = steady_state_amplitude(&t, &y, 2.0, 10.0).unwrap();
        assert!((a - 1.7).abs() < 1e-10);
        let c = vec![0.3; t.len()];
        assert!((steady_state_amplitude(&t, &c, 0.0, 10.0).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let mut cfg = pf_cfg(0.88, 0.5, 2);
        cfg.t_end = 0.02;
        cfg.disturbance.t_on = 0.0;
        cfg.disturbance.t_off = 0.01;
        let csv = simulate(&cfg).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,vehicle,x,v,a,u,e");
        assert_eq!(lines.len(), 1 + 2 * 3);
        assert!(lines[1].ends_with(','));
        assert_eq!(lines[2], "0,1,-22.6,20,0,0,0");
    }

    #[test]
    fn scenario_headways_bracket_bound() {
        for s in HEADWAY_SCENARIOS {
            assert!(s.hw_below < s.h_min_rounded && s.h_min_rounded < s.hw_above, "{}", s.label);
            let cfg = s.config(s.hw_above).unwrap();
            assert_eq!(cfg.n, 15);
            assert_eq!(cfg.lag.tau, 0.5);
        }
    }
}
