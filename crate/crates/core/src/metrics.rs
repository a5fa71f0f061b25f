//! Coverage probability and average rate of the tagged terrestrial user.
//!
//! With gamma serving fading of integer shape `m`, `P(SINR > T | r0)` is the
//! incomplete-gamma expansion
//! `e^{-s sigma^2} sum_k (1/k!) sum_l C(k,l) (s sigma^2)^l (-s)^{k-l} L^{(k-l)}(s)`
//! at `s = m T r0^alpha / (p G)`, where `L` is the Laplace transform of the
//! total interference. The serving distance is then integrated out.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Case, Scenario};
use crate::error::{Error, Result};
use crate::geometry::{PiecewiseDistribution, ServingDistance};
use crate::interference::{laplace_total, Jet, INNER_TOLERANCE};
use crate::quadrature::{integrate, panel_points, Tolerance};

/// Upper limit of the rate integral in bit/s/Hz.
pub const RATE_T_MAX: f64 = 40.0;
/// Stop extending the rate integral once `P_c(2^t - 1) (t_max - t)` is below this.
pub const RATE_TAIL: f64 = 1e-8;

pub const COVERAGE_TOLERANCE: Tolerance = Tolerance::new(1e-8, 1e-12);
pub const RATE_TOLERANCE: Tolerance = Tolerance::new(1e-6, 1e-9);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Coverage,
    Rate,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Coverage => "coverage",
            Metric::Rate => "rate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub metric: Metric,
    pub case: Case,
    /// Linear SINR threshold, for coverage.
    pub threshold: Option<f64>,
    pub value: f64,
    pub abs_error_estimate: f64,
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// `e^{-x} x^l / l!` for `l = 0..n`, evaluated in log space.
fn poisson_weights(x: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|l| {
            if x == 0.0 {
                return if l == 0 { 1.0 } else { 0.0 };
            }
            (-x + l as f64 * x.ln() - ln_factorial(l)).exp()
        })
        .collect()
}

/// Conditional coverage `P(SINR > T | r0)` from the interference jet at `s`.
///
/// `jet` must be expanded at `s` and carry at least `m - 1` derivatives.
pub fn coverage_kernel(jet: &Jet, s: f64, noise: f64, m: u32) -> Result<f64> {
    let m = m as usize;
    if m == 0 {
        return Err(Error::Domain("serving m must be >= 1".into()));
    }
    if jet.order() + 1 < m {
        return Err(Error::OrderMismatch {
            have: jet.order(),
            need: m - 1,
        });
    }
    // (-s)^j L^(j) / j!, from the scaled coefficients.
    let ratio = -s / jet.scale();
    let mut q = Vec::with_capacity(m);
    let mut factor = 1.0;
    for (j, c) in jet.scaled_coeffs()[..m].iter().enumerate() {
        if j > 0 {
            factor *= ratio / j as f64;
        }
        q.push(if factor == 0.0 { 0.0 } else { factor * c });
    }
    // Regroup the double sum as sum_j q_j * P(Poisson(x) <= m - 1 - j).
    let weights = poisson_weights(s * noise, m);
    let mut cumulative = Vec::with_capacity(m);
    let mut acc = 0.0;
    for w in &weights {
        acc += w;
        cumulative.push(acc);
    }
    let value: f64 = q.iter().enumerate().map(|(j, qj)| qj * cumulative[m - 1 - j]).sum();
    Ok(value.clamp(0.0, 1.0))
}

/// `s = m T r0^alpha / (p G)`.
pub fn evaluation_point(scenario: &Scenario, threshold: f64, r0: f64) -> f64 {
    scenario.chan.serving_m as f64 * threshold * r0.powf(scenario.tn.pathloss_exp)
        / scenario.serving_power_gain()
}

/// `P(SINR > T | R_0 = r0)`.
pub fn conditional_coverage(scenario: &Scenario, threshold: f64, r0: f64) -> Result<f64> {
    let m = scenario.chan.serving_m;
    let s = evaluation_point(scenario, threshold, r0);
    let jet = laplace_total(s, m as usize - 1, r0, scenario)?;
    coverage_kernel(&jet, s, scenario.chan.noise_power, m)
}

fn check_threshold(threshold: f64) -> Result<()> {
    if !(threshold.is_finite() && threshold >= 0.0) {
        return Err(Error::Domain(format!("SINR threshold must be finite and >= 0, got {threshold}")));
    }
    Ok(())
}

/// Coverage probability at linear SINR threshold `threshold`.
pub fn coverage(scenario: &Scenario, threshold: f64) -> Result<MetricResult> {
    coverage_with(scenario, threshold, COVERAGE_TOLERANCE)
}

pub fn coverage_with(scenario: &Scenario, threshold: f64, tol: Tolerance) -> Result<MetricResult> {
    scenario.validate()?;
    check_threshold(threshold)?;
    let serving = ServingDistance::new(scenario.tn.ue_offset, scenario.tn.cluster_radius, scenario.tn.num_bs)?;
    let (lo, hi) = serving.support();
    let points = panel_points(lo, hi, &serving.breakpoints());
    let mut failure = None;
    let est = integrate(
        |r0| {
            if failure.is_some() {
                return 0.0;
            }
            let weight = serving.pdf(r0);
            if weight <= 0.0 {
                return 0.0;
            }
            match conditional_coverage(scenario, threshold, r0) {
                Ok(p) => weight * p,
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        },
        &points,
        tol,
        "serving distance integral",
    );
    let context = format!("coverage at T = {threshold:e}");
    if let Some(e) = failure {
        return Err(e.within(&context));
    }
    let est = est.map_err(|e| e.within(&context))?;
    Ok(MetricResult {
        metric: Metric::Coverage,
        case: scenario.case,
        threshold: Some(threshold),
        value: est.value.clamp(0.0, 1.0),
        abs_error_estimate: est.abs_error + INNER_TOLERANCE.rel * est.value.abs(),
    })
}

/// Coverage at several thresholds, evaluated in parallel.
pub fn coverage_curve(scenario: &Scenario, thresholds: &[f64]) -> Result<Vec<MetricResult>> {
    thresholds.par_iter().map(|&t| coverage(scenario, t)).collect()
}

/// Smallest integer `t_end <= RATE_T_MAX` with `P_c(2^t_end - 1) (t_max - t_end) < RATE_TAIL`.
///
/// The tail bound decreases in `t`, so a bisection over integers suffices.
fn rate_cutoff(scenario: &Scenario) -> Result<f64> {
    let tail = |k: u32| -> Result<f64> {
        let t = k as f64;
        Ok(coverage(scenario, t.exp2() - 1.0)?.value * (RATE_T_MAX - t))
    };
    let (mut lo, mut hi) = (0u32, RATE_T_MAX as u32);
    if tail(lo)? < RATE_TAIL {
        return Ok(0.0);
    }
    // Invariant: tail(lo) >= RATE_TAIL, tail(hi) < RATE_TAIL.
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if tail(mid)? < RATE_TAIL {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi as f64)
}

/// Average achievable rate `E[log2(1 + SINR)] = ∫ P_c(2^t - 1) dt` in bit/s/Hz.
pub fn rate(scenario: &Scenario) -> Result<MetricResult> {
    rate_with(scenario, RATE_TOLERANCE)
}

pub fn rate_with(scenario: &Scenario, tol: Tolerance) -> Result<MetricResult> {
    scenario.validate()?;
    let t_end = rate_cutoff(scenario).map_err(|e| e.within("rate cutoff"))?;
    if t_end == 0.0 {
        return Ok(MetricResult {
            metric: Metric::Rate,
            case: scenario.case,
            threshold: None,
            value: 0.0,
            abs_error_estimate: 0.0,
        });
    }
    // P_c(2^t - 1) is smooth in t, so one starting panel is enough.
    let points = [0.0, t_end];
    let mut failure = None;
    let est = integrate(
        |t| {
            if failure.is_some() {
                return 0.0;
            }
            match coverage(scenario, t.exp2() - 1.0) {
                Ok(r) => r.value,
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        },
        &points,
        tol,
        "rate integrand",
    );
    if let Some(e) = failure {
        return Err(e.within("rate"));
    }
    let est = est.map_err(|e| e.within("rate"))?;
    Ok(MetricResult {
        metric: Metric::Rate,
        case: scenario.case,
        threshold: None,
        value: est.value,
        // The truncated tail is bounded by the stopping rule.
        abs_error_estimate: est.abs_error + RATE_TAIL,
    })
}
