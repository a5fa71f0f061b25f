//! Laplace transforms of the aggregate interference and their `s`-derivatives.
//!
//! Every transform is a product of i.i.d. per-interferer factors
//! `A(s) = E[L_H(s p G R^-alpha)]`, so each is computed as one quadrature of
//! the fading transform's derivative jet against a distance density, then
//! raised to the number of interferers. Derivatives are taken under the
//! integral sign with the closed-form fading derivatives.

mod jet;

pub use jet::{jet_mul, jet_pow, Jet};

use crate::channel::FadingModel;
use crate::config::{Case, Scenario};
use crate::error::Result;
use crate::geometry::{satellite_distance, AnnulusDistance, InterfererDistance, PiecewiseDistribution};
use crate::quadrature::{integrate_vec, panel_points, Tolerance};

pub const INNER_TOLERANCE: Tolerance = Tolerance::new(1e-9, 1e-13);

/// `N` i.i.d. interferers, each active with probability `activity`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceField {
    pub factor: Jet,
    pub count: u64,
    pub activity: f64,
}

impl InterferenceField {
    pub fn laplace(&self) -> Jet {
        self.factor.thinned(self.activity).pow(self.count)
    }
}

fn jet_scale(s: f64, typical_c: f64) -> f64 {
    if s > 0.0 {
        s
    } else if typical_c > 0.0 && typical_c.is_finite() {
        1.0 / typical_c
    } else {
        1.0
    }
}

/// Per-interferer factor `A(s) = ∫ L_H(s c r^-alpha) f(r) dr` as a jet.
pub fn link_factor(
    fading: &FadingModel,
    s: f64,
    power_gain: f64,
    alpha: f64,
    dist: &dyn PiecewiseDistribution,
    order: usize,
    context: &str,
) -> Result<Jet> {
    let (lo, hi) = dist.support();
    if let Some(r) = dist.point_mass() {
        let c = power_gain * r.powf(-alpha);
        let scale = jet_scale(s, c);
        let mut out = vec![0.0; order + 1];
        fading.scaled_laplace_derivatives(s, c, scale, &mut out);
        return Ok(Jet::from_scaled(s, scale, out));
    }

    let typical_c = power_gain * (0.5 * (lo + hi)).powf(-alpha);
    let scale = jet_scale(s, typical_c);
    // Path loss concentrates 1 - L_H near the lower limit; geometric panels
    // starting there let the adaptive rule skip most of the refinement.
    let mut interior = dist.breakpoints();
    if lo > 0.0 {
        let mut r = 2.0 * lo;
        while r < hi {
            interior.push(r);
            r *= 2.0;
        }
    }
    let points = panel_points(lo, hi, &interior);
    // Component 0 integrates 1 - L_H so weak interference keeps its relative accuracy.
    let est = integrate_vec(
        order + 1,
        |r, out| {
            let density = dist.pdf(r);
            if density == 0.0 {
                out.iter_mut().for_each(|o| *o = 0.0);
                return;
            }
            let c = power_gain * r.powf(-alpha);
            fading.scaled_laplace_derivatives(s, c, scale, out);
            out[0] = 1.0 - out[0];
            out.iter_mut().for_each(|o| *o *= density);
        },
        &points,
        INNER_TOLERANCE,
        context,
    )?;
    let mut scaled = est.value;
    scaled[0] = 1.0 - scaled[0];
    Ok(Jet::from_scaled(s, scale, scaled))
}

/// Jet of `L_{I_TN}(s)` given the serving distance `r0`.
///
/// The `N_c - 1` non-serving base stations are each active with probability
/// equal to the load.
pub fn laplace_tn(s: f64, order: usize, r0: f64, scenario: &Scenario) -> Result<Jet> {
    let count = scenario.num_tn_interferers() as u64;
    let load = scenario.tn.load;
    if count == 0 || load == 0.0 {
        return Ok(Jet::identity(s, order));
    }
    let dist = InterfererDistance::new(r0, scenario.tn.ue_offset, scenario.tn.cluster_radius)?;
    let factor = link_factor(
        &scenario.chan.tn_interf_fading,
        s,
        scenario.tn_interferer_power_gain(),
        scenario.tn.pathloss_exp,
        &dist,
        order,
        "TN interferer distance integral",
    )?;
    Ok(InterferenceField {
        factor,
        count,
        activity: load,
    }
    .laplace())
}

/// Jet of `L_{I_DL}(s)` for the single interfering satellite.
pub fn laplace_ntn_dl(s: f64, order: usize, scenario: &Scenario) -> Result<Jet> {
    let ntn = &scenario.ntn;
    let dist = satellite_distance(ntn.satellite_model, ntn.altitude, ntn.earth_radius)?;
    link_factor(
        &scenario.chan.ntn_interf_fading,
        s,
        scenario.with_case(Case::CaseINtnDl).ntn_interferer_power_gain(),
        ntn.pathloss_exp,
        &dist,
        order,
        "satellite distance integral",
    )
}

/// Jet of `L_{I_UL}(s)` for `N_u` NTN terminals on the annulus.
///
/// Terminal-to-user links are ground-level, so they use the TN path-loss
/// exponent rather than the satellite one.
pub fn laplace_ntn_ul(s: f64, order: usize, scenario: &Scenario) -> Result<Jet> {
    let count = scenario.ntn.num_ues as u64;
    if count == 0 {
        return Ok(Jet::identity(s, order));
    }
    let dist = AnnulusDistance::new(
        scenario.tn.ue_offset,
        scenario.tn.cluster_radius,
        scenario.ntn.isolation,
        scenario.ntn.outer_radius,
    )?;
    let factor = link_factor(
        &scenario.chan.ntn_interf_fading,
        s,
        scenario.with_case(Case::CaseIINtnUl).ntn_interferer_power_gain(),
        scenario.tn.pathloss_exp,
        &dist,
        order,
        "NTN terminal annulus integral",
    )?;
    Ok(InterferenceField {
        factor,
        count,
        activity: 1.0,
    }
    .laplace())
}

/// NTN interference jet for the scenario's case; identity for the baseline.
pub fn laplace_ntn(s: f64, order: usize, scenario: &Scenario) -> Result<Jet> {
    match scenario.case {
        Case::CaseINtnDl => laplace_ntn_dl(s, order, scenario),
        Case::CaseIINtnUl => laplace_ntn_ul(s, order, scenario),
        Case::NoNtnBaseline => Ok(Jet::identity(s, order)),
    }
}

/// `L_{I_TN}(s) L_{I_NTN}(s)`: the two fields are independent.
pub fn laplace_total(s: f64, order: usize, r0: f64, scenario: &Scenario) -> Result<Jet> {
    let tn = laplace_tn(s, order, r0, scenario)?;
    let ntn = laplace_ntn(s, order, scenario)?;
    Ok(tn.mul(&ntn))
}
