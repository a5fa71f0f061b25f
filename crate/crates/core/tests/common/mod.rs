//! Oracles shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use tnntn::channel::FadingModel;
use tnntn::config::{Case, Scenario};
use tnntn::config::RawScenario;
use tnntn::geometry::SatelliteModel;
use tnntn::interference::{laplace_ntn, laplace_tn};
use tnntn::metrics::evaluation_point;
use tnntn::geometry::{satellite_distance, AnnulusDistance, InterfererDistance, PiecewiseDistribution, ServingDistance};
use tnntn::montecarlo::{
    draw_samples, empirical_cdf, sample_annulus_distance, sample_interferer_distance, sample_serving_distance,
};
use tnntn::quadrature::{integrate, panel_points, Tolerance};

const TIGHT: Tolerance = Tolerance::new(1e-13, 0.0);

/// `ln E[exp(-z H)]`.
fn fading_log(fading: &FadingModel, z: f64) -> f64 {
    match *fading {
        FadingModel::GammaNakagami { m } => -(m as f64) * (z / m as f64).ln_1p(),
        FadingModel::Rician { k } => {
            let theta = 1.0 / (1.0 + k);
            -(theta * z).ln_1p() - k * theta * z / (1.0 + theta * z)
        }
        FadingModel::Deterministic => -z,
    }
}

/// `1 - E[exp(-z H)]`, accurate for small `z`.
fn fading_deficit(fading: &FadingModel, z: f64) -> f64 {
    -fading_log(fading, z).exp_m1()
}

/// The distribution's breakpoints plus a geometric grid from the lower limit.
fn cuts(dist: &dyn PiecewiseDistribution) -> Vec<f64> {
    let (lo, hi) = dist.support();
    let mut cuts = dist.breakpoints();
    let mut r = lo * 1.5;
    while lo > 0.0 && r < hi {
        cuts.push(r);
        r *= 1.5;
    }
    panel_points(lo, hi, &cuts)
}

/// `∫ (1 - L_H(s c r^-alpha)) f(r) dr` with the closed-form fading transform only.
fn deficit(fading: &FadingModel, s: f64, c: f64, alpha: f64, dist: &dyn PiecewiseDistribution) -> f64 {
    if let Some(r) = dist.point_mass() {
        return fading_deficit(fading, s * c * r.powf(-alpha));
    }
    integrate(
        |r| {
            let density = dist.pdf(r);
            if density == 0.0 {
                return 0.0;
            }
            fading_deficit(fading, s * c * r.powf(-alpha)) * density
        },
        &cuts(dist),
        TIGHT,
        "oracle",
    )
    .expect("oracle quadrature")
    .value
}

/// `∫ L_H(s c r^-alpha) f(r) dr`, for when the transform itself is small.
fn direct(fading: &FadingModel, s: f64, c: f64, alpha: f64, dist: &dyn PiecewiseDistribution) -> f64 {
    let l = |r: f64| fading_log(fading, s * c * r.powf(-alpha)).exp();
    if let Some(r) = dist.point_mass() {
        return l(r);
    }
    integrate(
        |r| {
            let density = dist.pdf(r);
            if density == 0.0 {
                0.0
            } else {
                l(r) * density
            }
        },
        &cuts(dist),
        TIGHT,
        "oracle",
    )
    .expect("oracle quadrature")
    .value
}

/// `1 - (1 - eps)^n` without cancellation.
fn power_deficit(eps: f64, n: f64) -> f64 {
    -(n * (-eps).ln_1p()).exp_m1()
}

/// `1 - L_{I_TN}(s)` given `r0`.
pub fn tn_deficit(s: f64, r0: f64, sc: &Scenario) -> f64 {
    let n = sc.num_tn_interferers() as f64;
    if n == 0.0 {
        return 0.0;
    }
    let d = InterfererDistance::new(r0, sc.tn.ue_offset, sc.tn.cluster_radius).unwrap();
    let eps = deficit(&sc.chan.tn_interf_fading, s, sc.tn_interferer_power_gain(), sc.tn.pathloss_exp, &d);
    power_deficit(sc.tn.load * eps, n)
}

/// `1 - L_{I_NTN}(s)` for the scenario's case.
pub fn ntn_deficit(s: f64, sc: &Scenario) -> f64 {
    let fading = &sc.chan.ntn_interf_fading;
    let pg = sc.ntn_interferer_power_gain();
    match sc.case {
        Case::NoNtnBaseline => 0.0,
        Case::CaseINtnDl => {
            let d = satellite_distance(sc.ntn.satellite_model, sc.ntn.altitude, sc.ntn.earth_radius).unwrap();
            deficit(fading, s, pg, sc.ntn.pathloss_exp, &d)
        }
        Case::CaseIINtnUl => {
            let d = AnnulusDistance::new(sc.tn.ue_offset, sc.tn.cluster_radius, sc.ntn.isolation, sc.ntn.outer_radius)
                .unwrap();
            power_deficit(deficit(fading, s, pg, sc.tn.pathloss_exp, &d), sc.ntn.num_ues as f64)
        }
    }
}

/// `L_{I_TN}(s)` given `r0`, accurate when it is far below 1.
pub fn tn_laplace(s: f64, r0: f64, sc: &Scenario) -> f64 {
    let n = sc.num_tn_interferers() as i32;
    let d = InterfererDistance::new(r0, sc.tn.ue_offset, sc.tn.cluster_radius).unwrap();
    let a = direct(&sc.chan.tn_interf_fading, s, sc.tn_interferer_power_gain(), sc.tn.pathloss_exp, &d);
    let rho = sc.tn.load;
    (1.0 - rho + rho * a).powi(n)
}

/// `L_{I_NTN}(s)`, accurate when it is far below 1.
pub fn ntn_laplace(s: f64, sc: &Scenario) -> f64 {
    let fading = &sc.chan.ntn_interf_fading;
    let pg = sc.ntn_interferer_power_gain();
    match sc.case {
        Case::NoNtnBaseline => 1.0,
        Case::CaseINtnDl => {
            let d = satellite_distance(sc.ntn.satellite_model, sc.ntn.altitude, sc.ntn.earth_radius).unwrap();
            direct(fading, s, pg, sc.ntn.pathloss_exp, &d)
        }
        Case::CaseIINtnUl => {
            let d = AnnulusDistance::new(sc.tn.ue_offset, sc.tn.cluster_radius, sc.ntn.isolation, sc.ntn.outer_radius)
                .unwrap();
            direct(fading, s, pg, sc.tn.pathloss_exp, &d).powi(sc.ntn.num_ues as i32)
        }
    }
}

/// Derivatives of orders 0..=3 of `f` at `x` from central differences with
/// two levels of Richardson extrapolation (error `O(h^6)`).
///
/// Requires `x - 2h > 0` when `f` is only defined for positive arguments.
pub fn richardson(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> [f64; 4] {
    let central = |h: f64| -> [f64; 3] {
        let p1 = f(x + h);
        let m1 = f(x - h);
        let p2 = f(x + 2.0 * h);
        let m2 = f(x - 2.0 * h);
        let f0 = f(x);
        [
            (p1 - m1) / (2.0 * h),
            (p1 - 2.0 * f0 + m1) / (h * h),
            (p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2.0 * h * h * h),
        ]
    };
    let d = [central(h), central(h / 2.0), central(h / 4.0)];
    let mut out = [f(x), 0.0, 0.0, 0.0];
    for k in 0..3 {
        let a1 = (4.0 * d[1][k] - d[0][k]) / 3.0;
        let a2 = (4.0 * d[2][k] - d[1][k]) / 3.0;
        out[k + 1] = (16.0 * a2 - a1) / 15.0;
    }
    out
}

/// Largest relative gap between a jet's derivatives of orders 1..=3 and the
/// Richardson derivatives of the transform.
///
/// Differences are taken of `-deficit` while the transform is near 1 and of
/// the directly computed `value` once it is small, so neither loses digits.
pub fn jet_vs_fd(
    jet: &tnntn::interference::Jet,
    deficit: &dyn Fn(f64) -> f64,
    value: &dyn Fn(f64) -> f64,
    s: f64,
) -> f64 {
    let fd = if deficit(s) > 0.5 {
        richardson(value, s, s / 32.0)
    } else {
        richardson(&|x| -deficit(x), s, s / 32.0)
    };
    (1..=3)
        .map(|j| {
            let got = jet.derivative(j);
            (got - fd[j]).abs() / fd[j].abs()
        })
        .fold(0.0, f64::max)
}

/// `r` with `F_R(r) = 1/2` for the scenario's serving distance.
pub fn median_serving_distance(sc: &Scenario) -> f64 {
    let d = ServingDistance::new(sc.tn.ue_offset, sc.tn.cluster_radius, sc.tn.num_bs).unwrap();
    let (mut lo, mut hi) = d.support();
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if d.cdf(mid) < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// KS distances between sampled and analytic serving, interferer and
/// annulus distances for both presets and `x_0 / r_TN` in {0, 0.5, 1}.
///
/// Interferer laws are conditioned on the median serving distance.
pub fn distance_ks_suite(samples: u64, seed: u64) -> Vec<(String, f64)> {
    let mut out = Vec::new();
    for (name, raw) in [("urban", RawScenario::urban()), ("rural", RawScenario::rural())] {
        for frac in [0.0, 0.5, 1.0] {
            let mut raw = raw.clone();
            raw.ue_offset_frac = frac;
            let sc = raw.to_scenario().unwrap();
            let (x0, r_tn, n_c) = (sc.tn.ue_offset, sc.tn.cluster_radius, sc.tn.num_bs);
            let label = |law: &str| format!("{name} x0={frac}r_TN {law}");

            let serving = ServingDistance::new(x0, r_tn, n_c).unwrap();
            let draws = draw_samples(samples, seed, |rng| sample_serving_distance(x0, r_tn, n_c as usize, rng));
            out.push((label("serving"), empirical_cdf(draws).ks_distance(|r| serving.cdf(r))));

            let r0 = median_serving_distance(&sc);
            let interferer = InterfererDistance::new(r0, x0, r_tn).unwrap();
            let draws = draw_samples(samples, seed + 1, |rng| sample_interferer_distance(r0, x0, r_tn, rng));
            out.push((label("interferer"), empirical_cdf(draws).ks_distance(|r| interferer.cdf(r))));

            let annulus = AnnulusDistance::new(x0, r_tn, sc.ntn.isolation, sc.ntn.outer_radius).unwrap();
            let (w, r_ntn) = (annulus.inner, annulus.outer);
            let draws = draw_samples(samples, seed + 2, |rng| sample_annulus_distance(x0, w, r_ntn, rng));
            out.push((label("annulus"), empirical_cdf(draws).ks_distance(|r| annulus.cdf(r))));
        }
    }
    out
}

/// Coverage of a lone base station at the cluster center, user at the
/// center, Rayleigh serving link: `∫ exp(-T r^alpha sigma^2 / (p G)) 2r / r_TN^2 dr`.
pub fn lone_cell_coverage(sc: &Scenario, threshold: f64) -> f64 {
    let r_tn = sc.tn.cluster_radius;
    let k = threshold * sc.chan.noise_power / sc.serving_power_gain();
    integrate(
        |r| (-k * r.powf(sc.tn.pathloss_exp)).exp() * 2.0 * r / (r_tn * r_tn),
        &[0.0, 0.5 * r_tn, r_tn],
        TIGHT,
        "lone cell",
    )
    .expect("oracle quadrature")
    .value
}

/// `∫ P_c(2^t - 1) dt` over unit panels, truncated by a linear scan for the
/// first integer where the remaining tail is below `tail`.
pub fn rate_by_unit_panels(sc: &Scenario, tol: Tolerance, t_max: f64, tail: f64) -> f64 {
    let pc = |t: f64| tnntn::metrics::coverage(sc, t.exp2() - 1.0).unwrap().value;
    let mut end = 0.0;
    while end < t_max && pc(end) * (t_max - end) >= tail {
        end += 1.0;
    }
    let points: Vec<f64> = (0..=end as usize).map(|k| k as f64).collect();
    if points.len() < 2 {
        return 0.0;
    }
    integrate(pc, &points, tol, "rate oracle").expect("oracle quadrature").value
}

/// Case II with NTN terminals packed into a band right outside the cluster,
/// so their interference is not negligible.
pub fn crowded_uplink() -> Scenario {
    let mut raw = RawScenario::urban().with_case(Case::CaseIINtnUl);
    raw.num_ntn_ues = 30;
    raw.isolation_km = 0.0;
    raw.ue_offset_frac = 1.0;
    raw.ntn_outer_radius_km = 2.5 * raw.isd_km + 0.5 * raw.isd_km;
    raw.to_scenario().unwrap()
}

/// A Laplace-transform evaluation point for derivative checks.
#[derive(Debug, Clone)]
pub struct GridPoint {
    pub name: String,
    pub scenario: Scenario,
    pub r0: f64,
    pub s: f64,
}

impl GridPoint {
    fn new(name: impl Into<String>, scenario: Scenario, r0: f64, s: f64) -> Self {
        Self {
            name: name.into(),
            scenario,
            r0,
            s,
        }
    }
}

/// TN and NTN interference transforms over urban and rural presets, both
/// satellite models, a crowded uplink annulus and non-gamma fading.
pub fn derivative_grid() -> Vec<GridPoint> {
    let mut grid = Vec::new();
    let urban = RawScenario::urban().to_scenario().unwrap();
    let r_tn = urban.tn.cluster_radius;
    for (r0_frac, t) in [(0.02, 0.1), (0.05, 1.0), (0.1, 1.0), (0.2, 3.0), (0.3, 1.0), (0.6, 10.0), (0.9, 100.0), (1.2, 1.0)] {
        let r0 = r0_frac * r_tn;
        grid.push(GridPoint::new(format!("TN r0={r0:.0}"), urban.with_case(Case::NoNtnBaseline), r0, evaluation_point(&urban, t, r0)));
    }
    let mut rural = RawScenario::rural();
    rural.satellite_model = SatelliteModel::UniformCap;
    for alt in [200.0, 600.0, 1200.0] {
        rural.altitude_km = alt;
        let sc = rural.to_scenario().unwrap();
        let r0 = 0.3 * sc.tn.cluster_radius;
        for t in [1.0, 10.0] {
            grid.push(GridPoint::new(format!("DL cap a={alt}"), sc, r0, evaluation_point(&sc, t, r0)));
        }
    }
    for alt in [200.0, 1200.0] {
        let mut raw = RawScenario::rural();
        raw.altitude_km = alt;
        let sc = raw.to_scenario().unwrap();
        let r0 = 0.2 * sc.tn.cluster_radius;
        grid.push(GridPoint::new(format!("DL zenith a={alt}"), sc, r0, evaluation_point(&sc, 0.3, r0)));
    }
    let crowded = crowded_uplink();
    for (r0_frac, t) in [(0.1, 1.0), (0.3, 10.0), (0.5, 100.0), (0.8, 3.0)] {
        let r0 = r0_frac * crowded.tn.cluster_radius;
        grid.push(GridPoint::new("UL crowded", crowded, r0, evaluation_point(&crowded, t, r0)));
    }
    let mut rayleigh = crowded;
    rayleigh.chan.ntn_interf_fading = FadingModel::GammaNakagami { m: 1 };
    grid.push(GridPoint::new("UL rayleigh", rayleigh, 100.0, evaluation_point(&rayleigh, 1.0, 100.0)));
    let mut rician_k = urban;
    rician_k.chan.tn_interf_fading = FadingModel::Rician { k: 3.0 };
    grid.push(GridPoint::new("TN rician", rician_k.with_case(Case::NoNtnBaseline), 300.0, evaluation_point(&urban, 1.0, 300.0)));
    grid
}

pub struct JetCheck {
    /// Worst relative error of orders 1..=3 over the TN and NTN jets.
    pub max_rel_error: f64,
    /// Orders 0..=4 alternate in sign and the value lies in (0, 1].
    pub signs_ok: bool,
}

pub fn check_jets(p: &GridPoint) -> JetCheck {
    let (sc, r0, s) = (&p.scenario, p.r0, p.s);
    let tn = laplace_tn(s, 4, r0, sc).unwrap();
    let ntn = laplace_ntn(s, 4, sc).unwrap();
    let mut err = jet_vs_fd(&tn, &|x| tn_deficit(x, r0, sc), &|x| tn_laplace(x, r0, sc), s);
    if sc.case != Case::NoNtnBaseline {
        err = err.max(jet_vs_fd(&ntn, &|x| ntn_deficit(x, sc), &|x| ntn_laplace(x, sc), s));
    }
    let signs_ok = [&tn, &ntn].iter().all(|jet| {
        jet.value() > 0.0
            && jet.value() <= 1.0
            && jet
                .scaled_coeffs()
                .iter()
                .enumerate()
                .all(|(j, c)| if j % 2 == 0 { *c >= 0.0 } else { *c <= 0.0 })
    });
    JetCheck {
        max_rel_error: err,
        signs_ok,
    }
}
