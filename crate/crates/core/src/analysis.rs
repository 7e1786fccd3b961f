//! Post-hoc checks on recorded traces: the geometric envelope implied by the
//! comparison matrix and log-linear fits of the squared error.

use serde::{Deserialize, Serialize};

use crate::dynamics::IterationTrace;
use crate::error::{Error, Result};
use crate::theory::BoundInputs;

/// Squared errors below this fraction of the initial squared error are
/// treated as rounding noise and excluded from fits.
pub const FIT_FLOOR: f64 = 1e-24;

/// Constant `C` of the envelope `||x(t) - x*||_F^2 <= C q^t`.
///
/// Unrolling `z(t) <= Z^t z(0)` and bounding each entry of `Z^t` by
/// `2 Z_ij lambda1^t / (lambda1 - lambda2)` gives
/// `C = 4 / (lambda1 - lambda2) * [(Z11 + Z21) a0 + (Z12 + Z22) c0]` with
/// `a0 = ||xbar(0) - x*||^2` and `c0 = ||x(0) - xbar(0)||^2`.
pub fn envelope_constant(inputs: &BoundInputs, alpha: f64, first: &IterationTrace) -> Result<f64> {
    let z = inputs.z_matrix(alpha)?;
    let rate = inputs.rate_bound(alpha)?;
    let a0 = first.avg_distance_to_ne.powi(2);
    let c0 = first.consensus_violation.powi(2);
    let spread = rate.lambda1 - rate.lambda2;
    Ok(4.0 / spread * ((z[(0, 0)] + z[(1, 0)]) * a0 + (z[(0, 1)] + z[(1, 1)]) * c0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeCheck {
    pub constant: f64,
    pub q: f64,
    /// Largest `||x(t) - x*||^2 / (C q^t)` over `t >= 1`.
    pub worst_ratio: f64,
    pub violations: Vec<usize>,
}

impl EnvelopeCheck {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `||x(t) - x*||^2 <= C q^t` at every recorded `t >= 1`.
pub fn check_envelope(trace: &[IterationTrace], constant: f64, q: f64) -> EnvelopeCheck {
    let mut worst_ratio: f64 = 0.0;
    let mut violations = Vec::new();
    let log_q = q.ln();
    for e in trace.iter().filter(|e| e.t >= 1) {
        let bound = constant * (e.t as f64 * log_q).exp();
        let ratio = e.squared_distance() / bound;
        worst_ratio = worst_ratio.max(ratio);
        if ratio > 1.0 {
            violations.push(e.t);
        }
    }
    EnvelopeCheck {
        constant,
        q,
        worst_ratio,
        violations,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Ordinary least squares `y = intercept + slope x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::input("a linear fit needs at least two paired points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::input("abscissae are all equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
        points: xs.len(),
    })
}

/// Fits `ln ||x(t) - x*||^2` against `t` over entries with `t >= from`,
/// skipping squared errors below `FIT_FLOOR` times the initial one. The
/// slope estimates the log of the per-step contraction of the squared error.
pub fn tail_fit(trace: &[IterationTrace], from: usize) -> Result<LinearFit> {
    let first = trace
        .first()
        .ok_or_else(|| Error::input("empty trace"))?
        .squared_distance();
    let floor = FIT_FLOOR * first;
    let (xs, ys): (Vec<f64>, Vec<f64>) = trace
        .iter()
        .filter(|e| e.t >= from && e.squared_distance() > floor)
        .map(|e| (e.t as f64, e.squared_distance().ln()))
        .unzip();
    linear_fit(&xs, &ys)
}

/// Tail fit over the second half of the usable trace.
pub fn tail_fit_half(trace: &[IterationTrace]) -> Result<LinearFit> {
    let first = trace.first().map(|e| e.squared_distance()).unwrap_or(0.0);
    let usable = trace
        .iter()
        .filter(|e| e.squared_distance() > FIT_FLOOR * first)
        .count();
    let from = trace.first().map(|e| e.t).unwrap_or(0) + usable / 2;
    tail_fit(trace, from)
}

/// `||x(t) - x*|| / ||x(0) - x*||` for each entry.
pub fn relative_errors(trace: &[IterationTrace]) -> Vec<f64> {
    let Some(first) = trace.first() else {
        return Vec::new();
    };
    let d0 = first.distance_to_ne;
    trace
        .iter()
        .map(|e| if d0 == 0.0 { 0.0 } else { e.distance_to_ne / d0 })
        .collect()
}

/// First `t` after which the relative error never increases again, if any.
pub fn monotone_from(trace: &[IterationTrace]) -> Option<usize> {
    let mut start = trace.first()?.t;
    for pair in trace.windows(2) {
        if pair[1].distance_to_ne > pair[0].distance_to_ne {
            start = pair[1].t;
        }
    }
    Some(start)
}
