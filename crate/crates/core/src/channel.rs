//! Small-scale fading of the power gain `H`, always normalized to `E[H] = 1`.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FadingModel {
    /// Nakagami-m amplitude, so the power gain is `Gamma(m, 1/m)`.
    GammaNakagami { m: u32 },
    /// Rician amplitude with LOS-to-scatter ratio `k`.
    Rician { k: f64 },
    /// Unit gain.
    Deterministic,
}

impl fmt::Display for FadingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FadingModel::GammaNakagami { m } => write!(f, "nakagami-{m}"),
            FadingModel::Rician { k } => write!(f, "rician-{k}"),
            FadingModel::Deterministic => f.write_str("deterministic"),
        }
    }
}

impl FadingModel {
    /// Nakagami model; the analytic kernels need an integer `m >= 1`.
    pub fn nakagami(m: f64) -> Result<Self> {
        if m.fract() != 0.0 || m < 1.0 || !m.is_finite() || m > u32::MAX as f64 {
            return Err(Error::Domain(format!(
                "Nakagami m must be an integer >= 1, got {m}"
            )));
        }
        Ok(FadingModel::GammaNakagami { m: m as u32 })
    }

    pub fn rician(k: f64) -> Result<Self> {
        if !(k.is_finite() && k >= 0.0) {
            return Err(Error::Domain(format!("Rician K must be >= 0, got {k}")));
        }
        Ok(FadingModel::Rician { k })
    }

    pub fn mean(&self) -> f64 {
        1.0
    }

    /// `E[H^2]` of the unit-mean power gain.
    pub fn second_moment(&self) -> f64 {
        match *self {
            FadingModel::GammaNakagami { m } => 1.0 + 1.0 / m as f64,
            FadingModel::Rician { k } => (k * k + 4.0 * k + 2.0) / ((k + 1.0) * (k + 1.0)),
            FadingModel::Deterministic => 1.0,
        }
    }

    /// `E[exp(-z H)]`.
    pub fn laplace(&self, z: f64) -> f64 {
        match *self {
            FadingModel::GammaNakagami { m } => {
                let m = m as f64;
                (-m * (z / m).ln_1p()).exp()
            }
            FadingModel::Rician { k } => {
                let theta = 1.0 / (1.0 + k);
                let d = 1.0 + theta * z;
                (-k * theta * z / d).exp() / d
            }
            FadingModel::Deterministic => (-z).exp(),
        }
    }

    /// Derivatives `d^j/ds^j E[exp(-s c H)]` at `s`, for `j = 0..=order`.
    pub fn laplace_derivatives(&self, s: f64, c: f64, order: usize) -> Vec<f64> {
        let mut out = vec![0.0; order + 1];
        self.scaled_laplace_derivatives(s, c, 1.0, &mut out);
        out
    }

    /// Writes `lambda^j d^j/ds^j E[exp(-s c H)]` into `out[j]`.
    ///
    /// Scaling by `lambda` (typically `s`) keeps high orders in range.
    pub fn scaled_laplace_derivatives(&self, s: f64, c: f64, lambda: f64, out: &mut [f64]) {
        match *self {
            FadingModel::GammaNakagami { m } => gamma_scaled_derivatives(m as f64, s, c, lambda, out),
            FadingModel::Deterministic => {
                let base = (-s * c).exp();
                let step = -c * lambda;
                let mut term = base;
                for o in out.iter_mut() {
                    *o = term;
                    term *= step;
                }
            }
            FadingModel::Rician { k } => rician_scaled_derivatives(k, s, c, lambda, out),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            FadingModel::GammaNakagami { m } => {
                let m = m as f64;
                Gamma::new(m, 1.0 / m).expect("valid gamma").sample(rng)
            }
            FadingModel::Rician { k } => {
                let los = (k / (k + 1.0)).sqrt();
                let sigma = (0.5 / (k + 1.0)).sqrt();
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                let x = los + sigma * re;
                let y = sigma * im;
                x * x + y * y
            }
            FadingModel::Deterministic => 1.0,
        }
    }
}

// d^j/ds^j (1 + s c/m)^{-m} = (-c/m)^j (m)_j (1 + s c/m)^{-m-j}
fn gamma_scaled_derivatives(m: f64, s: f64, c: f64, lambda: f64, out: &mut [f64]) {
    let base = 1.0 + s * c / m;
    if !base.is_finite() {
        out.iter_mut().for_each(|o| *o = 0.0);
        return;
    }
    let log_base = (s * c / m).ln_1p();
    // ratio between successive orders: -(c lambda / m) (m + j) / base
    let mut log_mag = -m * log_base;
    let log_step = (c * lambda / m).ln() - log_base;
    for (j, o) in out.iter_mut().enumerate() {
        if j > 0 {
            log_mag += log_step + (m + (j - 1) as f64).ln();
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        *o = if j > 0 && c * lambda == 0.0 {
            0.0
        } else {
            sign * log_mag.exp()
        };
    }
}

// Rician power is a Poisson(K) mixture of Gamma(n + 1, 1/(K + 1)) laws.
fn rician_scaled_derivatives(k: f64, s: f64, c: f64, lambda: f64, out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    let theta = 1.0 / (1.0 + k);
    let log_base = (theta * s * c).ln_1p();
    let log_step = (theta * c * lambda).ln() - log_base;
    let n_max = (k + 12.0 * k.sqrt() + 40.0).ceil() as u64;
    let mut log_weight = -k;
    for n in 0..=n_max {
        if n > 0 {
            log_weight += k.ln() - (n as f64).ln();
        }
        if log_weight < -745.0 {
            continue;
        }
        let shape = (n + 1) as f64;
        let mut log_mag = log_weight - shape * log_base;
        for (j, o) in out.iter_mut().enumerate() {
            if j > 0 {
                if c * lambda == 0.0 {
                    break;
                }
                log_mag += log_step + (shape + (j - 1) as f64).ln();
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            *o += sign * log_mag.exp();
        }
    }
}

/// Nakagami `m` matching the first two moments of a Rician amplitude,
/// `(K + 1)^2 / (2K + 1)`, rounded to the nearest integer and at least 1.
pub fn match_rician_to_nakagami(k: f64) -> u32 {
    let m = (k * k + 2.0 * k + 1.0) / (2.0 * k + 1.0);
    (m.round() as u32).max(1)
}
