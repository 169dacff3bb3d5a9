//! Real and complex polynomial helpers. Coefficients are stored in ascending
//! powers: `[a0, a1, a2, ...]` is `a0 + a1 x + a2 x^2 + ...`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Drops trailing (highest-power) zero coefficients, keeping at least one entry.
pub fn trim(coeffs: &[f64]) -> Vec<f64> {
    let len = coeffs
        .iter()
        .rposition(|c| *c != 0.0)
        .map_or(1, |i| i + 1);
    let mut out = coeffs[..len.min(coeffs.len())].to_vec();
    if out.is_empty() {
        out.push(0.0);
    }
    out
}

pub fn degree(coeffs: &[f64]) -> usize {
    coeffs.iter().rposition(|c| *c != 0.0).unwrap_or(0)
}

pub fn eval_real(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

pub fn eval_complex(coeffs: &[f64], s: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
}

fn eval_cc(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

pub fn derivative(coeffs: &[f64]) -> Vec<f64> {
    if coeffs.len() <= 1 {
        return vec![0.0];
    }
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| k as f64 * c)
        .collect()
}

fn derivative_c(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * k as f64)
        .collect()
}

/// Cauchy bounds `(lower, upper)` on the moduli of the nonzero roots.
///
/// Zero roots (vanishing low-order coefficients) are ignored for the lower bound.
pub fn root_modulus_bounds(coeffs: &[f64]) -> Option<(f64, f64)> {
    let c = trim(coeffs);
    let n = c.len() - 1;
    if n == 0 {
        return None;
    }
    let lead = c[n];
    let upper = 1.0 + c[..n].iter().map(|a| (a / lead).abs()).fold(0.0, f64::max);
    let first = c.iter().position(|a| *a != 0.0)?;
    if first == n {
        return None;
    }
    // reciprocal polynomial bound for the smallest nonzero root
    let low = c[first];
    let recip = 1.0
        + c[first + 1..]
            .iter()
            .map(|a| (a / low).abs())
            .fold(0.0, f64::max);
    Some((1.0 / recip, upper))
}

/// Outcome of the simultaneous root iteration.
#[derive(Debug, Clone)]
pub struct RootsReport {
    pub roots: Vec<Complex64>,
    pub iterations: u32,
}

/// All roots of a complex polynomial (ascending coefficients) by Aberth–Ehrlich
/// iteration. Stops once every correction is below `tol * (1 + |z|)`.
pub fn aberth(coeffs: &[Complex64], tol: f64, max_iter: u32) -> Result<RootsReport> {
    let len = coeffs
        .iter()
        .rposition(|c| c.norm() != 0.0)
        .map_or(0, |i| i + 1);
    if len == 0 {
        return Err(Error::invalid("zero polynomial has no well-defined roots"));
    }
    let lead = coeffs[len - 1];
    let monic: Vec<Complex64> = coeffs[..len].iter().map(|c| c / lead).collect();
    let n = len - 1;
    match n {
        0 => {
            return Ok(RootsReport {
                roots: vec![],
                iterations: 0,
            })
        }
        1 => {
            return Ok(RootsReport {
                roots: vec![-monic[0]],
                iterations: 0,
            })
        }
        _ => {}
    }
    let dmonic = derivative_c(&monic);

    // initial guesses on a circle of radius given by the mean root modulus,
    // rotated off the real axis to avoid symmetric stalls
    let radius = monic[0].norm().powf(1.0 / n as f64).max(1e-8);
    let center = -monic[n - 1] / n as f64;
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            center + Complex64::from_polar(radius, theta)
        })
        .collect();

    for iter in 1..=max_iter {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let p = eval_cc(&monic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let dp = eval_cc(&dmonic, z[i]);
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let diff = z[i] - z[j];
                    if diff.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        diff.inv()
                    }
                })
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                continue;
            }
            z[i] -= step;
            max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
        }
        if max_step <= tol {
            return Ok(RootsReport {
                roots: z,
                iterations: iter,
            });
        }
    }
    let residual = z
        .iter()
        .map(|zi| eval_cc(&monic, *zi).norm())
        .fold(0.0, f64::max);
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual,
    })
}

/// Roots of a real polynomial, as complex numbers.
pub fn real_roots_c(coeffs: &[f64], tol: f64, max_iter: u32) -> Result<Vec<Complex64>> {
    let c: Vec<Complex64> = coeffs.iter().map(|&a| Complex64::new(a, 0.0)).collect();
    aberth(&c, tol, max_iter).map(|r| r.roots)
}

/// Product of two real polynomials.
pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}
