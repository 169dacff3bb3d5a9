//! Non-negativity of the spacing-error impulse response.
//!
//! Works on the time-scaled form obtained with `s = s'/tau0`, where the lag
//! ranges over `[0, 1]`:
//!
//! ```text
//! H̃(s') = (k_a s'^2 + k̃_v s' + k̃_p) / (τ̃ s'^3 + s'^2 + (k̃_v + k̃_p h̃_w) s' + k̃_p)
//! ```
//!
//! Two closed-form sufficient conditions are checked (one for `τ̃ = 0`, one on
//! the partial-fraction residues for `τ̃ > 0`), and the impulse response can
//! also be evaluated directly.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::freqstab::is_hurwitz_any;
use crate::poly;
use crate::tf::{ControllerSpec, RationalTF};

/// Relative threshold below which a residue counts as zero for sign tests.
pub const RESIDUE_TOL: f64 = 1e-14;

/// Gains and lag after time scaling by `tau0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledTF {
    pub ka: f64,
    pub kp: f64,
    pub kv: f64,
    pub hw: f64,
    pub tau: f64,
}

impl ScaledTF {
    pub fn new(ka: f64, kp: f64, kv: f64, hw: f64, tau: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::invalid(format!("scaled lag must lie in [0, 1] (got {tau})")));
        }
        Ok(Self { ka, kp, kv, hw, tau })
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Self::new(self.ka, self.kp, self.kv, self.hw, tau)
    }

    /// Unscaled `(k_p, k_v, k_a, h_w, tau)` for lag bound `tau0`.
    pub fn unscale(&self, tau0: f64) -> (f64, f64, f64, f64, f64) {
        (
            self.kp / (tau0 * tau0),
            self.kv / tau0,
            self.ka,
            self.hw * tau0,
            self.tau * tau0,
        )
    }

    /// Denominator `[k̃_p, k̃_v + k̃_p h̃_w, 1, τ̃]` (ascending).
    pub fn den(&self) -> [f64; 4] {
        [self.kp, self.kv + self.kp * self.hw, 1.0, self.tau]
    }

    pub fn num(&self) -> [f64; 3] {
        [self.kp, self.kv, self.ka]
    }

    pub fn tf(&self) -> Result<RationalTF> {
        RationalTF::new(self.num().to_vec(), self.den().to_vec())
    }
}

/// Scales a PF controller with lag `tau` by the lag bound `tau0`.
pub fn time_scale(spec: &ControllerSpec, tau: f64, tau0: f64) -> Result<ScaledTF> {
    let tap = spec
        .single_tap()
        .ok_or_else(|| Error::invalid(format!("time scaling needs a single-tap controller, got {}", spec.arch())))?;
    if !(tau0.is_finite() && tau0 > 0.0) {
        return Err(Error::invalid(format!("tau0 must be > 0 (got {tau0})")));
    }
    if !(0.0..=tau0).contains(&tau) {
        return Err(Error::invalid(format!("tau must lie in [0, {tau0}] (got {tau})")));
    }
    ScaledTF::new(
        tap.ka,
        tap.kp * tau0 * tau0,
        tap.kv * tau0,
        spec.h_w() / tau0,
        tau / tau0,
    )
}

/// Pole set of the cubic denominator: `p1 < p2 < p3` with poles at `-p_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CubicPoles {
    RealDistinct([f64; 3]),
    NotRealDistinct,
}

/// Roots of `d0 + d1 s + d2 s^2 + d3 s^3` (ascending) by the trigonometric form
/// of Cardano's method, polished with Newton steps.
pub fn cubic_poles(den: &[f64]) -> Result<CubicPoles> {
    let c = poly::trim(den);
    if c.len() != 4 {
        return Err(Error::UnsupportedDegree(c.len() - 1));
    }
    let (d, cc, b, a) = (c[0], c[1], c[2], c[3]);
    let disc = 18.0 * a * b * cc * d - 4.0 * b.powi(3) * d + b * b * cc * cc
        - 4.0 * a * cc.powi(3)
        - 27.0 * a * a * d * d;
    if !(disc > 0.0) {
        return Ok(CubicPoles::NotRealDistinct);
    }
    // depressed cubic t^3 + p t + q with s = t - b/(3a)
    let p = (3.0 * a * cc - b * b) / (3.0 * a * a);
    let q = (2.0 * b.powi(3) - 9.0 * a * b * cc + 27.0 * a * a * d) / (27.0 * a.powi(3));
    let m = 2.0 * (-p / 3.0).sqrt();
    let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
    let theta = arg.acos() / 3.0;
    let shift = b / (3.0 * a);
    let dc = poly::derivative(&c);
    let mut roots: Vec<f64> = (0..3)
        .map(|k| {
            let mut s = m * (theta - 2.0 * PI * k as f64 / 3.0).cos() - shift;
            for _ in 0..3 {
                let fp = poly::eval_real(&dc, s);
                if fp == 0.0 {
                    break;
                }
                let step = poly::eval_real(&c, s) / fp;
                if !step.is_finite() {
                    break;
                }
                s -= step;
            }
            s
        })
        .collect();
    roots.sort_by(|x, y| y.partial_cmp(x).unwrap());
    if roots[0] == roots[1] || roots[1] == roots[2] {
        return Ok(CubicPoles::NotRealDistinct);
    }
    Ok(CubicPoles::RealDistinct([-roots[0], -roots[1], -roots[2]]))
}

/// Real distinct roots of `c0 + c1 s + c2 s^2` as ascending magnitudes `(z1, z2)`
/// of the locations `-z_i`.
fn quadratic_negated_roots(c0: f64, c1: f64, c2: f64) -> Option<(f64, f64)> {
    if c2 == 0.0 {
        return None;
    }
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if !(disc > 0.0) {
        return None;
    }
    // stable form avoiding cancellation
    let qq = -0.5 * (c1 + c1.signum() * disc.sqrt());
    let r1 = qq / c2;
    let r2 = c0 / qq;
    let (a, b) = (-r1, -r2);
    Some(if a < b { (a, b) } else { (b, a) })
}

/// Condition for the lag-free case: real distinct poles and zeros, and
/// `p1 ≤ h̃_w k̃_p / (1 - k_a) ≤ p1 + p2`. The lag field of `scaled` is ignored.
pub fn nnir_tau_zero(scaled: &ScaledTF) -> bool {
    if scaled.ka >= 1.0 {
        return false;
    }
    let Some((p1, p2)) = quadratic_negated_roots(scaled.kp, scaled.kv + scaled.kp * scaled.hw, 1.0) else {
        return false;
    };
    if scaled.ka > 0.0 && quadratic_negated_roots(scaled.kp, scaled.kv, scaled.ka).is_none() {
        return false;
    }
    let mid = scaled.hw * scaled.kp / (1.0 - scaled.ka);
    p1 <= mid && mid <= p1 + p2
}

/// `h̃(t) = Σ c_i exp(-p_i t)` for the strictly proper lagged case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleResidueForm {
    pub poles: [f64; 3],
    pub residues: [f64; 3],
}

impl PoleResidueForm {
    pub fn eval(&self, t: f64) -> f64 {
        self.poles
            .iter()
            .zip(&self.residues)
            .map(|(p, c)| c * (-p * t).exp())
            .sum()
    }

    /// Equals `k_a / τ̃` (initial value of the impulse response).
    pub fn residue_sum(&self) -> f64 {
        self.residues.iter().sum()
    }
}

pub fn pole_residue(scaled: &ScaledTF) -> Result<PoleResidueForm> {
    if !(scaled.tau > 0.0) {
        return Err(Error::invalid("residue form needs a strictly positive scaled lag"));
    }
    let den = scaled.den();
    let poles = match cubic_poles(&den)? {
        CubicPoles::RealDistinct(p) => p,
        CubicPoles::NotRealDistinct => return Err(Error::NotRealDistinct),
    };
    let num = scaled.num();
    let dden = poly::derivative(&den);
    let residues = poles.map(|p| poly::eval_real(&num, -p) / poly::eval_real(&dden, -p));
    Ok(PoleResidueForm { poles, residues })
}

/// How the lagged case decides non-negativity from the residues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResidueTest {
    /// Minimum of `c1 + c2 u + c3 u^α` over `u ∈ [0, 1]`, with
    /// `u = exp(-(p2 - p1) t)` and `α = (p3 - p1)/(p2 - p1)`. Necessary and sufficient.
    #[default]
    Exact,
    /// `c1 ≥ 0, c2 < 0, c3 > (p2 - p1)/(p3 - p1) c2`, also accepting all
    /// non-negative residues. Not sufficient in general.
    Published,
}

impl ResidueTest {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Published => "published",
        }
    }
}

impl std::str::FromStr for ResidueTest {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "published" => Ok(Self::Published),
            other => Err(Error::invalid(format!("unknown residue test '{other}' (expected exact or published)"))),
        }
    }
}

/// Non-negativity of the lagged impulse response for `τ̃ ∈ (0, 1]` by the exact test.
pub fn nnir_tau_positive(scaled: &ScaledTF) -> Result<bool> {
    residue_test(scaled, ResidueTest::Exact)
}

/// Lagged-case test selected by `test`. Unstable pole sets fail.
pub fn residue_test(scaled: &ScaledTF, test: ResidueTest) -> Result<bool> {
    let form = pole_residue(scaled)?;
    let [p1, p2, p3] = form.poles;
    if p1 <= 0.0 {
        return Ok(false);
    }
    let [c1, c2, c3] = form.residues;
    let tol = RESIDUE_TOL * c1.abs().max(c2.abs()).max(c3.abs());
    match test {
        ResidueTest::Published => {
            if c2 < -tol {
                Ok(c1 >= -tol && c3 > (p2 - p1) / (p3 - p1) * c2)
            } else {
                Ok(c1 >= -tol && c3 >= -tol)
            }
        }
        ResidueTest::Exact => Ok(scaled_minimum(&form) >= -tol),
    }
}

/// `min_{t ≥ 0} h(t) e^{p1 t}`, which has the sign of `min h`.
fn scaled_minimum(form: &PoleResidueForm) -> f64 {
    let [p1, p2, p3] = form.poles;
    let [c1, c2, c3] = form.residues;
    let alpha = (p3 - p1) / (p2 - p1);
    let g = |u: f64| c1 + c2 * u + c3 * u.powf(alpha);
    // g' = c2 + α c3 u^(α-1) is monotone in u, so at most one interior critical point
    let mut m = g(0.0).min(g(1.0));
    let ratio = -c2 / (alpha * c3);
    if ratio > 0.0 && ratio.is_finite() {
        let u = ratio.powf(1.0 / (alpha - 1.0));
        if u > 0.0 && u < 1.0 {
            m = m.min(g(u));
        }
    }
    m
}

/// Real and distinct poles at one scaled lag (quadratic when `τ̃ = 0`).
pub fn has_real_distinct_poles(scaled: &ScaledTF) -> bool {
    if scaled.tau == 0.0 {
        quadratic_negated_roots(scaled.kp, scaled.kv + scaled.kp * scaled.hw, 1.0).is_some()
    } else {
        matches!(cubic_poles(&scaled.den()), Ok(CubicPoles::RealDistinct(_)))
    }
}

/// `{0, 0.05, ..., 1}`.
pub fn default_tau_samples() -> Vec<f64> {
    (0..=20).map(|k| k as f64 / 20.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisRange {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl AxisRange {
    pub fn new(lo: f64, hi: f64, points: usize) -> Self {
        Self { lo, hi, points }
    }

    /// Log-spaced samples; empty when the range is empty or not positive.
    pub fn samples(&self) -> Vec<f64> {
        if self.points == 0 || !(self.lo > 0.0) || self.hi < self.lo {
            return vec![];
        }
        if self.points == 1 {
            return vec![self.lo];
        }
        let (l, h) = (self.lo.ln(), self.hi.ln());
        let n = (self.points - 1) as f64;
        (0..self.points)
            .map(|k| match k {
                0 => self.lo,
                k if k == self.points - 1 => self.hi,
                k => (l + (h - l) * k as f64 / n).exp(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanGrid {
    pub kp: AxisRange,
    pub kv: AxisRange,
}

impl Default for ScanGrid {
    /// Brackets the admissible point `(k̃_p, k̃_v) = (0.001, 0.082)` for `k_a = 0.95`.
    fn default() -> Self {
        Self {
            kp: AxisRange::new(1e-4, 1e-2, 41),
            kv: AxisRange::new(0.01, 0.3, 41),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionCell {
    pub kp: f64,
    pub kv: f64,
    /// Lag-free condition.
    pub cond_tau0: bool,
    /// Real distinct poles at every lag sample.
    pub real_distinct: bool,
    /// Residue condition at every positive lag sample.
    pub cond_tau_pos: bool,
}

impl RegionCell {
    /// All three conditions: the admissible set.
    pub fn admissible(&self) -> bool {
        self.cond_tau0 && self.real_distinct && self.cond_tau_pos
    }
}

/// Row-major scan result: rows over `k̃_p`, columns over `k̃_v`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionGrid {
    pub ka: f64,
    pub hw: f64,
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<RegionCell>,
}

impl RegionGrid {
    pub fn admissible(&self) -> impl Iterator<Item = &RegionCell> {
        self.cells.iter().filter(|c| c.admissible())
    }

    /// Cell closest to `(kp, kv)` in log coordinates.
    pub fn nearest(&self, kp: f64, kv: f64) -> Option<&RegionCell> {
        let dist = |c: &RegionCell| (c.kp / kp).ln().powi(2) + (c.kv / kv).ln().powi(2);
        self.cells
            .iter()
            .min_by(|a, b| dist(a).partial_cmp(&dist(b)).unwrap())
    }

    pub const CSV_HEADER: &'static str = "k_tilde_p,k_tilde_v,cond_tau0,real_distinct,cond_tau_pos";

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.cells.len() + 1));
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                crate::fmt::sig9(c.kp),
                crate::fmt::sig9(c.kv),
                c.cond_tau0 as u8,
                c.real_distinct as u8,
                c.cond_tau_pos as u8
            );
        }
        out
    }
}

fn classify(ka: f64, hw: f64, kp: f64, kv: f64, taus: &[f64], test: ResidueTest) -> RegionCell {
    let base = ScaledTF { ka, kp, kv, hw, tau: 0.0 };
    let cond_tau0 = nnir_tau_zero(&base);
    let real_distinct = taus.iter().all(|&t| has_real_distinct_poles(&ScaledTF { tau: t, ..base }));
    let cond_tau_pos = taus
        .iter()
        .filter(|&&t| t > 0.0)
        .all(|&t| residue_test(&ScaledTF { tau: t, ..base }, test).unwrap_or(false));
    RegionCell {
        kp,
        kv,
        cond_tau0,
        real_distinct,
        cond_tau_pos,
    }
}

/// Labels every `(k̃_p, k̃_v)` cell with the three non-negativity conditions,
/// using the exact residue test.
pub fn region_scan(ka: f64, hw: f64, grid: &ScanGrid, taus: &[f64]) -> RegionGrid {
    region_scan_with(ka, hw, grid, taus, ResidueTest::Exact)
}

pub fn region_scan_with(ka: f64, hw: f64, grid: &ScanGrid, taus: &[f64], test: ResidueTest) -> RegionGrid {
    let kps = grid.kp.samples();
    let kvs = grid.kv.samples();
    let cells: Vec<RegionCell> = kps
        .par_iter()
        .flat_map_iter(|&kp| kvs.iter().map(move |&kv| classify(ka, hw, kp, kv, taus, test)))
        .collect();
    RegionGrid {
        ka,
        hw,
        rows: kps.len(),
        cols: kvs.len(),
        cells,
    }
}

/// Sampled impulse response. A biproper system also has an impulse of weight
/// `direct` at `t = 0`, which is not part of `values`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponse {
    pub dt: f64,
    pub values: Vec<f64>,
    pub min_value: f64,
    pub direct: f64,
}

impl ImpulseResponse {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |k| k as f64 * self.dt)
    }

    /// `∫ h dt` over the sampled window (composite Simpson) plus the direct term.
    pub fn area(&self) -> f64 {
        self.direct + simpson(&self.values, self.dt)
    }

    /// `∫ |h| dt` over the sampled window plus `|direct|`.
    pub fn l1_norm(&self) -> f64 {
        let abs: Vec<f64> = self.values.iter().map(|v| v.abs()).collect();
        self.direct.abs() + simpson(&abs, self.dt)
    }
}

fn simpson(v: &[f64], dt: f64) -> f64 {
    let n = v.len();
    if n < 2 {
        return 0.0;
    }
    let intervals = n - 1;
    let even = intervals - intervals % 2;
    let mut s = 0.0;
    if even >= 2 {
        s += v[0] + v[even];
        for (k, &y) in v.iter().enumerate().take(even).skip(1) {
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * y;
        }
        s *= dt / 3.0;
    }
    if even < intervals {
        s += 0.5 * dt * (v[even] + v[intervals]);
    }
    s
}

/// Impulse response on `[0, t_max]` sampled every `dt`.
///
/// Uses the pole/residue form when the poles are real and distinct, and RK4
/// integration of the controllable canonical realisation otherwise.
pub fn impulse_numeric(tf: &RationalTF, t_max: f64, dt: f64) -> Result<ImpulseResponse> {
    if !(dt > 0.0 && t_max >= 0.0) {
        return Err(Error::invalid("impulse sampling needs dt > 0 and t_max >= 0"));
    }
    if !is_hurwitz_any(tf.den())? {
        return Err(Error::NonHurwitz { tau: None });
    }
    let n = tf.den_degree();
    let den: Vec<f64> = tf.den()[..=n].iter().map(|c| c / tf.den()[n]).collect();
    let mut num: Vec<f64> = tf.num().iter().map(|c| c / tf.den()[n]).collect();
    num.resize(n + 1, 0.0);
    // split off the direct feedthrough
    let direct = num[n];
    let sp: Vec<f64> = (0..n).map(|k| num[k] - direct * den[k]).collect();
    let steps = (t_max / dt).round() as usize;

    if n == 0 {
        return Ok(ImpulseResponse {
            dt,
            values: vec![0.0; steps + 1],
            min_value: 0.0,
            direct,
        });
    }

    let roots = poly::real_roots_c(&den, 1e-15, 500)?;
    let real_distinct = roots.iter().all(|z| z.im.abs() <= 1e-9 * (1.0 + z.norm())) && {
        let mut re: Vec<f64> = roots.iter().map(|z| z.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        re.windows(2).all(|w| (w[1] - w[0]).abs() > 1e-6 * (1.0 + w[0].abs()))
    };

    let values: Vec<f64> = if real_distinct {
        let dden = poly::derivative(&den);
        let terms: Vec<(f64, f64)> = roots
            .iter()
            .map(|z| {
                let s = z.re;
                (s, poly::eval_real(&sp, s) / poly::eval_real(&dden, s))
            })
            .collect();
        (0..=steps)
            .map(|k| {
                let t = k as f64 * dt;
                terms.iter().map(|(s, c)| c * (s * t).exp()).sum()
            })
            .collect()
    } else {
        integrate_impulse(&den, &sp, &roots, dt, steps)
    };
    let min_value = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ImpulseResponse {
        dt,
        values,
        min_value,
        direct,
    })
}

/// RK4 on `ẋ = A x`, `x(0) = B`, `y = C x` in controllable canonical form.
fn integrate_impulse(den: &[f64], sp: &[f64], roots: &[Complex64], dt: f64, steps: usize) -> Vec<f64> {
    let n = den.len() - 1;
    let fastest = roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let sub = ((dt * fastest / 0.05).ceil() as usize).max(1);
    let h = dt / sub as f64;
    let deriv = |x: &[f64], out: &mut [f64]| {
        out[..n - 1].copy_from_slice(&x[1..n]);
        out[n - 1] = -(0..n).map(|k| den[k] * x[k]).sum::<f64>();
    };
    let mut x = vec![0.0; n];
    x[n - 1] = 1.0;
    let output = |x: &[f64]| (0..n).map(|k| sp[k] * x[k]).sum::<f64>();
    let mut values = Vec::with_capacity(steps + 1);
    values.push(output(&x));
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for _ in 0..steps {
        for _ in 0..sub {
            deriv(&x, &mut k1);
            for i in 0..n {
                tmp[i] = x[i] + 0.5 * h * k1[i];
            }
            deriv(&tmp, &mut k2);
            for i in 0..n {
                tmp[i] = x[i] + 0.5 * h * k2[i];
            }
            deriv(&tmp, &mut k3);
            for i in 0..n {
                tmp[i] = x[i] + h * k3[i];
            }
            deriv(&tmp, &mut k4);
            for i in 0..n {
                x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        values.push(output(&x));
    }
    values
}
