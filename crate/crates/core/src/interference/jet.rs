//! Truncated derivative jets of a function of `s`.
//!
//! A [`Jet`] at center `s` holds `f(s), f'(s), ..., f^(n)(s)`. Internally
//! entry `j` is stored multiplied by `scale^j`, which keeps high orders of
//! Laplace transforms (whose `j`-th derivative behaves like `s^-j`) inside the
//! floating-point range. Products follow the general Leibniz rule, which is
//! invariant under that scaling.

use std::ops::Mul;

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    center: f64,
    scale: f64,
    scaled: Vec<f64>,
}

fn binomial_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0; n + 1];
    for k in 1..n {
        row[k] = row[k - 1] * (n - k + 1) as f64 / k as f64;
    }
    row
}

impl Jet {
    /// Jet from plain derivatives `coeffs[j] = f^(j)(center)`.
    pub fn from_derivatives(center: f64, coeffs: Vec<f64>) -> Self {
        Self {
            center,
            scale: 1.0,
            scaled: coeffs,
        }
    }

    /// Jet from `scaled[j] = scale^j f^(j)(center)`.
    pub fn from_scaled(center: f64, scale: f64, scaled: Vec<f64>) -> Self {
        assert!(scale > 0.0 && scale.is_finite(), "jet scale must be positive");
        Self {
            center,
            scale,
            scaled,
        }
    }

    /// The constant function 1.
    pub fn identity(center: f64, order: usize) -> Self {
        let mut scaled = vec![0.0; order + 1];
        scaled[0] = 1.0;
        Self {
            center,
            scale: 1.0,
            scaled,
        }
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn order(&self) -> usize {
        self.scaled.len() - 1
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn value(&self) -> f64 {
        self.scaled[0]
    }

    /// `scale^j f^(j)(center)`.
    pub fn scaled_coeffs(&self) -> &[f64] {
        &self.scaled
    }

    /// `f^(j)(center)` for `j = 0..=order`. High orders may under- or
    /// overflow when the scale is far from 1.
    pub fn coeffs(&self) -> Vec<f64> {
        let mut factor = 1.0;
        self.scaled
            .iter()
            .map(|c| {
                let v = c / factor;
                factor *= self.scale;
                v
            })
            .collect()
    }

    pub fn derivative(&self, j: usize) -> f64 {
        self.scaled[j] / self.scale.powi(j as i32)
    }

    /// Re-expresses the jet with a different scale.
    pub fn rescaled(&self, scale: f64) -> Self {
        let ratio = scale / self.scale;
        let mut factor = 1.0;
        let scaled = self
            .scaled
            .iter()
            .map(|c| {
                let v = c * factor;
                factor *= ratio;
                v
            })
            .collect();
        Self::from_scaled(self.center, scale, scaled)
    }

    pub fn truncated(&self, order: usize) -> Self {
        let mut out = self.clone();
        out.scaled.truncate(order + 1);
        out
    }

    /// Leibniz rule: `(ab)^(j) = sum_l C(j, l) a^(l) b^(j - l)`.
    pub fn mul(&self, other: &Jet) -> Jet {
        debug_assert!(
            (self.center - other.center).abs() <= 1e-12 * self.center.abs().max(other.center.abs()).max(1e-300),
            "jets expanded at different points"
        );
        let other = if other.scale == self.scale {
            std::borrow::Cow::Borrowed(other)
        } else {
            std::borrow::Cow::Owned(other.rescaled(self.scale))
        };
        let order = self.order().min(other.order());
        let scaled = (0..=order)
            .map(|j| {
                let row = binomial_row(j);
                (0..=j)
                    .map(|l| row[l] * self.scaled[l] * other.scaled[j - l])
                    .sum()
            })
            .collect();
        Jet {
            center: self.center,
            scale: self.scale,
            scaled,
        }
    }

    /// `a^n` by binary exponentiation; `n = 0` gives the identity jet.
    pub fn pow(&self, n: u64) -> Jet {
        let mut result = Jet::identity(self.center, self.order()).rescaled(self.scale);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// `(1 - p) + p a`: a factor that is present with probability `p`.
    pub fn thinned(&self, p: f64) -> Jet {
        let mut out = self.clone();
        for (j, c) in out.scaled.iter_mut().enumerate() {
            *c *= p;
            if j == 0 {
                *c += 1.0 - p;
            }
        }
        out
    }
}

impl Mul for &Jet {
    type Output = Jet;

    fn mul(self, rhs: &Jet) -> Jet {
        Jet::mul(self, rhs)
    }
}

pub fn jet_mul(a: &Jet, b: &Jet) -> Jet {
    a.mul(b)
}

pub fn jet_pow(a: &Jet, n: u64) -> Jet {
    a.pow(n)
}
