//! Distance laws seen from the tagged user at `(x_0, 0)`.
//!
//! Base stations form a binomial point process on the cluster disc of radius
//! `r_TN` centered at the origin; NTN user terminals form one on the annulus
//! `[w, r_NTN]` with `w = r_TN + d_iso`. Every law is piecewise smooth and
//! exposes its breakpoints so integrals can be split where the density kinks.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A distance distribution on a bounded support.
pub trait PiecewiseDistribution {
    fn support(&self) -> (f64, f64);

    /// Interior points where the density is not smooth.
    fn breakpoints(&self) -> Vec<f64>;

    fn cdf(&self, r: f64) -> f64;

    fn pdf(&self, r: f64) -> f64;

    /// `Some(r)` for a degenerate law concentrated at `r`.
    fn point_mass(&self) -> Option<f64> {
        None
    }
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

fn check_offset(x0: f64, r_tn: f64) -> Result<()> {
    if !(r_tn > 0.0) || !(0.0..=r_tn).contains(&x0) {
        return Err(Error::Domain(format!(
            "user offset x_0 = {x0} must lie in [0, r_TN = {r_tn}]"
        )));
    }
    Ok(())
}

/// Half-angle, seen from the user, of the arc of the circle of radius `r`
/// around the user that lies inside the disc of radius `big_r` around the
/// origin. The user sits at distance `x0 <= big_r` from the origin.
fn inner_arc_half_angle(r: f64, x0: f64, big_r: f64) -> f64 {
    if r <= big_r - x0 {
        PI
    } else if r >= big_r + x0 {
        0.0
    } else {
        clamp_unit((r * r + x0 * x0 - big_r * big_r) / (2.0 * x0 * r)).acos()
    }
}

/// Area of the disc of radius `r_n` around the user intersected with the
/// cluster disc of radius `r_tn`.
///
/// In the lens regime the area is `r_n^2 (θ - sin 2θ / 2) + r_TN^2 (φ - sin 2φ / 2)`
/// with `θ` the half-angle at the user and `φ` the half-angle at the cluster
/// center. Past `r_TN + x_0` the disc covers the whole cluster.
pub fn intersection_area(r_n: f64, x0: f64, r_tn: f64) -> Result<f64> {
    check_offset(x0, r_tn)?;
    if !(r_n >= 0.0) {
        return Err(Error::Domain(format!("distance must be >= 0, got {r_n}")));
    }
    Ok(lens_area(r_n, x0, r_tn))
}

fn lens_area(r: f64, x0: f64, big_r: f64) -> f64 {
    if r <= big_r - x0 {
        PI * r * r
    } else if r >= big_r + x0 {
        PI * big_r * big_r
    } else {
        let theta = clamp_unit((r * r + x0 * x0 - big_r * big_r) / (2.0 * x0 * r)).acos();
        let phi = clamp_unit((-r * r + x0 * x0 + big_r * big_r) / (2.0 * x0 * big_r)).acos();
        r * r * (theta - 0.5 * (2.0 * theta).sin()) + big_r * big_r * (phi - 0.5 * (2.0 * phi).sin())
    }
}

/// `dA/dr`: the arc length `2 r θ` of the user-centered circle inside the disc.
fn lens_area_rate(r: f64, x0: f64, big_r: f64) -> f64 {
    2.0 * r * inner_arc_half_angle(r, x0, big_r)
}

/// CDF of the distance from the user to one uniformly placed base station.
pub fn disc_point_cdf(r: f64, x0: f64, r_tn: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    (lens_area(r, x0, r_tn) / (PI * r_tn * r_tn)).min(1.0)
}

pub fn disc_point_pdf(r: f64, x0: f64, r_tn: f64) -> f64 {
    if r <= 0.0 || r >= r_tn + x0 {
        return 0.0;
    }
    lens_area_rate(r, x0, r_tn) / (PI * r_tn * r_tn)
}

/// Distance from the user to the nearest of `n_c` base stations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServingDistance {
    pub x0: f64,
    pub r_tn: f64,
    pub n_c: u32,
}

impl ServingDistance {
    pub fn new(x0: f64, r_tn: f64, n_c: u32) -> Result<Self> {
        check_offset(x0, r_tn)?;
        if n_c < 1 {
            return Err(Error::Domain("N_c must be >= 1".into()));
        }
        Ok(Self { x0, r_tn, n_c })
    }
}

impl PiecewiseDistribution for ServingDistance {
    fn support(&self) -> (f64, f64) {
        (0.0, self.r_tn + self.x0)
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.r_tn - self.x0]
    }

    fn cdf(&self, r: f64) -> f64 {
        let survival = 1.0 - disc_point_cdf(r, self.x0, self.r_tn);
        1.0 - survival.powi(self.n_c as i32)
    }

    fn pdf(&self, r: f64) -> f64 {
        let survival = 1.0 - disc_point_cdf(r, self.x0, self.r_tn);
        self.n_c as f64
            * survival.powi(self.n_c as i32 - 1)
            * disc_point_pdf(r, self.x0, self.r_tn)
    }
}

pub fn serving_cdf(r0: f64, x0: f64, r_tn: f64, n_c: u32) -> Result<f64> {
    Ok(ServingDistance::new(x0, r_tn, n_c)?.cdf(r0))
}

pub fn serving_pdf(r0: f64, x0: f64, r_tn: f64, n_c: u32) -> Result<f64> {
    Ok(ServingDistance::new(x0, r_tn, n_c)?.pdf(r0))
}

/// Distance to a non-serving base station given the serving distance `r0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfererDistance {
    pub r0: f64,
    pub x0: f64,
    pub r_tn: f64,
    /// `1 - F_R(r0)`.
    survival: f64,
    f_r0: f64,
}

impl InterfererDistance {
    pub fn new(r0: f64, x0: f64, r_tn: f64) -> Result<Self> {
        check_offset(x0, r_tn)?;
        if !(r0 >= 0.0) {
            return Err(Error::Domain(format!("serving distance must be >= 0, got {r0}")));
        }
        let f_r0 = disc_point_cdf(r0, x0, r_tn);
        let survival = 1.0 - f_r0;
        if survival <= 0.0 {
            return Err(Error::DegenerateCondition { r0 });
        }
        Ok(Self {
            r0,
            x0,
            r_tn,
            survival,
            f_r0,
        })
    }

    pub fn survival_at_serving(&self) -> f64 {
        self.survival
    }
}

impl PiecewiseDistribution for InterfererDistance {
    fn support(&self) -> (f64, f64) {
        (self.r0, self.r_tn + self.x0)
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.r_tn - self.x0]
    }

    fn cdf(&self, r: f64) -> f64 {
        if r <= self.r0 {
            return 0.0;
        }
        ((disc_point_cdf(r, self.x0, self.r_tn) - self.f_r0) / self.survival).clamp(0.0, 1.0)
    }

    fn pdf(&self, r: f64) -> f64 {
        if r < self.r0 {
            return 0.0;
        }
        disc_point_pdf(r, self.x0, self.r_tn) / self.survival
    }
}

pub fn interferer_cdf_given_serving(r_n: f64, r0: f64, x0: f64, r_tn: f64) -> Result<f64> {
    Ok(InterfererDistance::new(r0, x0, r_tn)?.cdf(r_n))
}

pub fn interferer_pdf_given_serving(r_n: f64, r0: f64, x0: f64, r_tn: f64) -> Result<f64> {
    Ok(InterfererDistance::new(r0, x0, r_tn)?.pdf(r_n))
}

/// `F_{a,b}(y) = (y - b) sqrt(a^2 - (b - y)^2) + a^2 atan((y - b) / sqrt(a^2 - (b - y)^2))`.
///
/// Twice the integral of `sqrt(a^2 - (x - b)^2)` from `b` to `y`: the area of
/// the strip `b <= x <= y` of the disc of radius `a` centered at `(b, 0)`.
/// `y` is clamped to `[b - a, b + a]`.
pub fn strip_area(a: f64, b: f64, y: f64) -> f64 {
    let u = (y - b).clamp(-a, a);
    let h = (a * a - u * u).max(0.0).sqrt();
    u * h + a * a * u.atan2(h)
}

/// Area of the disc of radius `rho` around the user (at `(x0, 0)`, inside the
/// disc) intersected with the origin-centered disc of radius `big_r`.
///
/// Lens regime: the user disc left of the chord `x = x_R` plus the big disc
/// right of it, with `x_R = (R^2 - rho^2 + x_0^2) / (2 x_0)`.
fn overlap_by_strips(rho: f64, x0: f64, big_r: f64) -> f64 {
    if rho <= big_r - x0 {
        PI * rho * rho
    } else if rho >= big_r + x0 {
        PI * big_r * big_r
    } else {
        let chord = (big_r * big_r - rho * rho + x0 * x0) / (2.0 * x0);
        strip_area(rho, x0, chord) - strip_area(rho, x0, x0 - rho) + strip_area(big_r, 0.0, big_r)
            - strip_area(big_r, 0.0, chord)
    }
}

/// Distance from the user to one NTN terminal uniform on the annulus `[w, r_NTN]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusDistance {
    pub x0: f64,
    pub inner: f64,
    pub outer: f64,
}

impl AnnulusDistance {
    pub fn new(x0: f64, r_tn: f64, d_iso: f64, r_ntn: f64) -> Result<Self> {
        check_offset(x0, r_tn)?;
        if !(d_iso >= 0.0) {
            return Err(Error::Domain(format!("d_iso must be >= 0, got {d_iso}")));
        }
        let inner = r_tn + d_iso;
        if !(inner < r_ntn) {
            return Err(Error::InvalidGeometry(format!(
                "r_TN + d_iso = {inner} must be below r_NTN = {r_ntn}"
            )));
        }
        Ok(Self {
            x0,
            inner,
            outer: r_ntn,
        })
    }

    fn area(&self) -> f64 {
        PI * (self.outer * self.outer - self.inner * self.inner)
    }

    /// Area of the user-centered disc of radius `rho` inside the annulus.
    ///
    /// With `w = r_TN + d_iso` and the usual ordering `r_NTN - x_0 <= w + x_0`
    /// this is the five-branch form: zero up to `w - x_0`; the disc minus the
    /// inner-circle lens up to `r_NTN - x_0`; both circles cut until `w + x_0`;
    /// only the outer circle cut until `r_NTN + x_0`; the whole annulus after.
    /// For wide annuli (`r_NTN - x_0 > w + x_0`) the middle regime is the
    /// whole disc minus the inner circle, which the same composition yields.
    pub fn shaded_area(&self, rho: f64) -> f64 {
        let (x0, w, r) = (self.x0, self.inner, self.outer);
        if rho <= w - x0 {
            return 0.0;
        }
        if rho >= r + x0 {
            return self.area();
        }
        let area = overlap_by_strips(rho, x0, r) - overlap_by_strips(rho, x0, w);
        area.clamp(0.0, self.area())
    }
}

impl PiecewiseDistribution for AnnulusDistance {
    fn support(&self) -> (f64, f64) {
        (self.inner - self.x0, self.outer + self.x0)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b = vec![self.inner + self.x0, self.outer - self.x0];
        b.sort_by(|a, b| a.partial_cmp(b).unwrap());
        b
    }

    fn cdf(&self, rho: f64) -> f64 {
        self.shaded_area(rho) / self.area()
    }

    fn pdf(&self, rho: f64) -> f64 {
        let (lo, hi) = self.support();
        if rho <= lo || rho >= hi {
            return 0.0;
        }
        let arc = lens_area_rate(rho, self.x0, self.outer) - lens_area_rate(rho, self.x0, self.inner);
        (arc / self.area()).max(0.0)
    }
}

pub fn annulus_intersection_cdf(rho: f64, x0: f64, r_tn: f64, d_iso: f64, r_ntn: f64) -> Result<f64> {
    Ok(AnnulusDistance::new(x0, r_tn, d_iso, r_ntn)?.cdf(rho))
}

pub fn annulus_pdf(rho: f64, x0: f64, r_tn: f64, d_iso: f64, r_ntn: f64) -> Result<f64> {
    Ok(AnnulusDistance::new(x0, r_tn, d_iso, r_ntn)?.pdf(rho))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SatelliteModel {
    /// Satellite directly overhead; slant range equals the altitude.
    Zenith,
    /// One satellite uniform over the part of its orbital sphere above the
    /// user's horizon.
    UniformCap,
}

/// Slant range to a satellite on the user's horizon, `sqrt(2 r_E a + a^2)`.
pub fn max_slant_range(altitude: f64, earth_radius: f64) -> f64 {
    (2.0 * earth_radius * altitude + altitude * altitude).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatelliteDistance {
    pub model: SatelliteModel,
    pub altitude: f64,
    pub max_range: f64,
}

impl PiecewiseDistribution for SatelliteDistance {
    fn support(&self) -> (f64, f64) {
        match self.model {
            SatelliteModel::Zenith => (self.altitude, self.altitude),
            SatelliteModel::UniformCap => (self.altitude, self.max_range),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn cdf(&self, r: f64) -> f64 {
        let a = self.altitude;
        match self.model {
            SatelliteModel::Zenith => {
                if r >= a {
                    1.0
                } else {
                    0.0
                }
            }
            // Uniform on the cap makes the squared range uniform on [a^2, r_max^2].
            SatelliteModel::UniformCap => {
                ((r * r - a * a) / (self.max_range * self.max_range - a * a)).clamp(0.0, 1.0)
            }
        }
    }

    /// Zero everywhere for the zenith model; see [`PiecewiseDistribution::point_mass`].
    fn pdf(&self, r: f64) -> f64 {
        let a = self.altitude;
        match self.model {
            SatelliteModel::Zenith => 0.0,
            SatelliteModel::UniformCap => {
                if r < a || r > self.max_range {
                    0.0
                } else {
                    2.0 * r / (self.max_range * self.max_range - a * a)
                }
            }
        }
    }

    fn point_mass(&self) -> Option<f64> {
        match self.model {
            SatelliteModel::Zenith => Some(self.altitude),
            SatelliteModel::UniformCap => None,
        }
    }
}

pub fn satellite_distance(model: SatelliteModel, altitude: f64, earth_radius: f64) -> Result<SatelliteDistance> {
    if !(altitude > 0.0 && earth_radius > 0.0) {
        return Err(Error::Domain(format!(
            "altitude and earth radius must be > 0, got {altitude}, {earth_radius}"
        )));
    }
    Ok(SatelliteDistance {
        model,
        altitude,
        max_range: max_slant_range(altitude, earth_radius),
    })
}
