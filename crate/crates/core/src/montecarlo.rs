//! Monte Carlo simulation of the SINR of the tagged user.
//!
//! Each trial draws its own geometry, fading and activity from a ChaCha
//! stream selected by the trial index, so an estimate depends only on
//! `(scenario, trials, seed)` and not on how trials are spread over threads.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::FadingModel;
use crate::config::{Case, Scenario};
use crate::error::{Error, Result};
use crate::geometry::SatelliteModel;

const CHUNK: u64 = 4096;
const Z_95: f64 = 1.96;

/// Which fading laws the simulator draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimFading {
    /// Rician with the scenario's K for each link class.
    #[default]
    Rician,
    /// The same gamma models the analytic engine uses.
    Matched,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub sinr: f64,
    pub serving_distance: f64,
    pub signal: f64,
    pub i_tn: f64,
    pub i_ntn: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub mean: f64,
    pub half_width_95: f64,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub case: Case,
    /// Linear SINR thresholds, in the order given.
    pub thresholds: Vec<f64>,
    pub coverage: Vec<SimEstimate>,
    /// Mean of `log2(1 + SINR)` in bit/s/Hz.
    pub rate: SimEstimate,
}

pub type Point = [f64; 2];

fn distance(p: Point, q: Point) -> f64 {
    (p[0] - q[0]).hypot(p[1] - q[1])
}

fn uniform_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    2.0 * PI * rng.random::<f64>()
}

/// `n` points uniform in the origin-centered disc of radius `radius`.
pub fn sample_disc_bpp<R: Rng + ?Sized>(n: usize, radius: f64, rng: &mut R) -> Vec<Point> {
    sample_annulus_bpp(n, 0.0, radius, rng)
}

/// `n` points uniform in the annulus `r_in <= |p| <= r_out`.
pub fn sample_annulus_bpp<R: Rng + ?Sized>(n: usize, r_in: f64, r_out: f64, rng: &mut R) -> Vec<Point> {
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let r = (r_in * r_in + u * (r_out * r_out - r_in * r_in)).sqrt();
            let phi = uniform_angle(rng);
            [r * phi.cos(), r * phi.sin()]
        })
        .collect()
}

/// Nearest-of-`n_c` distance from `(x0, 0)` to a BPP in the disc.
pub fn sample_serving_distance<R: Rng + ?Sized>(x0: f64, r_tn: f64, n_c: usize, rng: &mut R) -> f64 {
    sample_disc_bpp(n_c, r_tn, rng)
        .into_iter()
        .map(|p| distance(p, [x0, 0.0]))
        .fold(f64::INFINITY, f64::min)
}

/// Distance to a uniform disc point, conditioned on being at least `r0`, by rejection.
pub fn sample_interferer_distance<R: Rng + ?Sized>(r0: f64, x0: f64, r_tn: f64, rng: &mut R) -> f64 {
    loop {
        let d = distance(sample_disc_bpp(1, r_tn, rng)[0], [x0, 0.0]);
        if d >= r0 {
            return d;
        }
    }
}

pub fn sample_annulus_distance<R: Rng + ?Sized>(x0: f64, r_in: f64, r_out: f64, rng: &mut R) -> f64 {
    distance(sample_annulus_bpp(1, r_in, r_out, rng)[0], [x0, 0.0])
}

/// Slant range to the satellite. The cap model places the satellite
/// uniformly on the visible part of its orbital sphere and measures the
/// straight-line distance in three dimensions.
pub fn sample_satellite_distance<R: Rng + ?Sized>(
    model: SatelliteModel,
    altitude: f64,
    earth_radius: f64,
    rng: &mut R,
) -> f64 {
    match model {
        SatelliteModel::Zenith => altitude,
        SatelliteModel::UniformCap => {
            let orbit = earth_radius + altitude;
            // Area on a sphere is uniform in the polar cosine.
            let cos_min = earth_radius / orbit;
            let cos_psi = cos_min + (1.0 - cos_min) * rng.random::<f64>();
            let sin_psi = (1.0 - cos_psi * cos_psi).max(0.0).sqrt();
            let sat = [orbit * sin_psi, 0.0, orbit * cos_psi];
            let user = [0.0, 0.0, earth_radius];
            ((sat[0] - user[0]).powi(2) + (sat[1] - user[1]).powi(2) + (sat[2] - user[2]).powi(2)).sqrt()
        }
    }
}

struct LinkModels {
    serving: FadingModel,
    tn: FadingModel,
    ntn: FadingModel,
}

fn link_models(scenario: &Scenario, fading: SimFading) -> LinkModels {
    match fading {
        SimFading::Rician => LinkModels {
            serving: FadingModel::Rician { k: scenario.chan.rician_k_tn },
            tn: FadingModel::Rician { k: scenario.chan.rician_k_tn },
            ntn: FadingModel::Rician { k: scenario.chan.rician_k_ntn },
        },
        SimFading::Matched => LinkModels {
            serving: scenario.serving_fading(),
            tn: scenario.chan.tn_interf_fading,
            ntn: scenario.chan.ntn_interf_fading,
        },
    }
}

/// Aggregate TN interference from `N_c - 1` base stations beyond `r0`.
pub fn sample_tn_interference<R: Rng + ?Sized>(
    scenario: &Scenario,
    r0: f64,
    fading: &FadingModel,
    rng: &mut R,
) -> f64 {
    let tn = &scenario.tn;
    let pg = scenario.tn_interferer_power_gain();
    (0..scenario.num_tn_interferers())
        .map(|_| {
            let d = sample_interferer_distance(r0, tn.ue_offset, tn.cluster_radius, rng);
            let active = rng.random::<f64>() < tn.load;
            let h = fading.sample(rng);
            if active {
                pg * h * d.powf(-tn.pathloss_exp)
            } else {
                0.0
            }
        })
        .sum()
}

/// NTN interference for the scenario's case (zero for the baseline).
pub fn sample_ntn_interference<R: Rng + ?Sized>(scenario: &Scenario, fading: &FadingModel, rng: &mut R) -> f64 {
    let tn = &scenario.tn;
    let ntn = &scenario.ntn;
    let pg = scenario.ntn_interferer_power_gain();
    match scenario.case {
        Case::NoNtnBaseline => 0.0,
        Case::CaseINtnDl => {
            let d = sample_satellite_distance(ntn.satellite_model, ntn.altitude, ntn.earth_radius, rng);
            pg * fading.sample(rng) * d.powf(-ntn.pathloss_exp)
        }
        Case::CaseIINtnUl => {
            let w = ntn.inner_radius(tn.cluster_radius);
            sample_annulus_bpp(ntn.num_ues as usize, w, ntn.outer_radius, rng)
                .into_iter()
                .map(|p| {
                    let d = distance(p, [tn.ue_offset, 0.0]);
                    pg * fading.sample(rng) * d.powf(-tn.pathloss_exp)
                })
                .sum()
        }
    }
}

fn trial_with<R: Rng + ?Sized>(scenario: &Scenario, links: &LinkModels, rng: &mut R) -> TrialOutcome {
    let tn = &scenario.tn;
    let user = [tn.ue_offset, 0.0];
    let mut dists: Vec<f64> = sample_disc_bpp(tn.num_bs as usize, tn.cluster_radius, rng)
        .into_iter()
        .map(|p| distance(p, user))
        .collect();
    let (serving_idx, _) = dists
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, d)| if *d < acc.1 { (i, *d) } else { acc });
    let r0 = dists.swap_remove(serving_idx);

    let signal = scenario.serving_power_gain() * links.serving.sample(rng) * r0.powf(-tn.pathloss_exp);
    let pg = scenario.tn_interferer_power_gain();
    let mut i_tn = 0.0;
    for d in dists {
        // Both draws happen for every interferer so the stream layout does not depend on activity.
        let active = rng.random::<f64>() < tn.load;
        let h = links.tn.sample(rng);
        if active {
            i_tn += pg * h * d.powf(-tn.pathloss_exp);
        }
    }
    let i_ntn = sample_ntn_interference(scenario, &links.ntn, rng);
    TrialOutcome {
        sinr: signal / (i_tn + i_ntn + scenario.chan.noise_power),
        serving_distance: r0,
        signal,
        i_tn,
        i_ntn,
    }
}

/// One realization of the network.
pub fn simulate_trial<R: Rng + ?Sized>(scenario: &Scenario, fading: SimFading, rng: &mut R) -> TrialOutcome {
    trial_with(scenario, &link_models(scenario, fading), rng)
}

/// Generator for trial `index` under `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

#[derive(Debug, Clone)]
struct Tally {
    covered: Vec<u64>,
    rate: NeumaierSum,
    rate_sq: NeumaierSum,
}

impl Tally {
    fn new(n: usize) -> Self {
        Self {
            covered: vec![0; n],
            rate: NeumaierSum::default(),
            rate_sq: NeumaierSum::default(),
        }
    }
}

/// Runs a map over trials `0..trials` in fixed chunks; chunk results come back in order.
fn map_chunks<T, F>(trials: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<u64>) -> T + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| f(c * CHUNK..((c + 1) * CHUNK).min(trials)))
        .collect()
}

fn proportion(count: u64, trials: u64, seed: u64) -> SimEstimate {
    let n = trials as f64;
    let p = count as f64 / n;
    SimEstimate {
        mean: p,
        half_width_95: Z_95 * (p * (1.0 - p) / n).sqrt(),
        trials,
        seed,
    }
}

/// Coverage at each linear threshold and the mean rate, from `trials` independent trials.
pub fn run_case(scenario: &Scenario, thresholds: &[f64], trials: u64, seed: u64) -> Result<SimReport> {
    run_case_with(scenario, thresholds, trials, seed, SimFading::Rician)
}

pub fn run_case_with(
    scenario: &Scenario,
    thresholds: &[f64],
    trials: u64,
    seed: u64,
    fading: SimFading,
) -> Result<SimReport> {
    if trials == 0 {
        return Err(Error::Domain("trials must be >= 1".into()));
    }
    scenario.validate()?;
    let links = link_models(scenario, fading);
    let tallies = map_chunks(trials, |range| {
        let mut tally = Tally::new(thresholds.len());
        for i in range {
            let mut rng = trial_rng(seed, i);
            let out = trial_with(scenario, &links, &mut rng);
            for (c, t) in tally.covered.iter_mut().zip(thresholds) {
                if out.sinr > *t {
                    *c += 1;
                }
            }
            let r = out.sinr.ln_1p() / std::f64::consts::LN_2;
            tally.rate.add(r);
            tally.rate_sq.add(r * r);
        }
        tally
    });
    let mut total = Tally::new(thresholds.len());
    for t in &tallies {
        for (a, b) in total.covered.iter_mut().zip(&t.covered) {
            *a += b;
        }
        total.rate.add(t.rate.total());
        total.rate_sq.add(t.rate_sq.total());
    }
    let n = trials as f64;
    let mean = total.rate.total() / n;
    let var = if trials > 1 {
        ((total.rate_sq.total() - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(SimReport {
        case: scenario.case,
        thresholds: thresholds.to_vec(),
        coverage: total.covered.iter().map(|c| proportion(*c, trials, seed)).collect(),
        rate: SimEstimate {
            mean,
            half_width_95: Z_95 * (var / n).sqrt(),
            trials,
            seed,
        },
    })
}

/// Mean of `f(rng)` over `trials` seeded draws, with its 95% half-width.
pub fn estimate_mean<F>(trials: u64, seed: u64, f: F) -> SimEstimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let parts = map_chunks(trials, |range| {
        let mut sum = NeumaierSum::default();
        let mut sq = NeumaierSum::default();
        for i in range {
            let x = f(&mut trial_rng(seed, i));
            sum.add(x);
            sq.add(x * x);
        }
        (sum.total(), sq.total())
    });
    let mut sum = NeumaierSum::default();
    let mut sq = NeumaierSum::default();
    for (s, q) in parts {
        sum.add(s);
        sq.add(q);
    }
    let n = trials as f64;
    let mean = sum.total() / n;
    let var = if trials > 1 {
        ((sq.total() - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    SimEstimate {
        mean,
        half_width_95: Z_95 * (var / n).sqrt(),
        trials,
        seed,
    }
}

/// `trials` seeded draws of `f`, in trial order.
pub fn draw_samples<F>(trials: u64, seed: u64, f: F) -> Vec<f64>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    map_chunks(trials, |range| range.map(|i| f(&mut trial_rng(seed, i))).collect::<Vec<_>>())
        .into_iter()
        .flatten()
        .collect()
}

/// Step-function CDF of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut samples: Vec<f64>) -> Self {
        samples.retain(|x| !x.is_nan());
        samples.sort_by(f64::total_cmp);
        Self { sorted: samples }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of samples `<= x`.
    pub fn cdf(&self, x: f64) -> f64 {
        if self.sorted.is_empty() {
            return 0.0;
        }
        self.sorted.partition_point(|s| *s <= x) as f64 / self.sorted.len() as f64
    }

    /// Kolmogorov-Smirnov distance to a CDF. Atoms in either law are
    /// handled by comparing left limits at each distinct sample value.
    pub fn ks_distance(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        let n = self.sorted.len() as f64;
        let mut worst: f64 = 0.0;
        let mut i = 0;
        while i < self.sorted.len() {
            let x = self.sorted[i];
            let j = i + self.sorted[i..].partition_point(|s| *s == x);
            let below = (i as f64 / n - cdf(x.next_down())).abs();
            let at = (j as f64 / n - cdf(x)).abs();
            worst = worst.max(below).max(at);
            i = j;
        }
        worst
    }

    /// `(x, F_n(x))` at `points` evenly spaced quantiles, for dumping.
    pub fn table(&self, points: usize) -> Vec<(f64, f64)> {
        if self.sorted.is_empty() || points == 0 {
            return Vec::new();
        }
        let n = self.sorted.len();
        (1..=points)
            .map(|k| {
                let idx = (k * n / points).clamp(1, n) - 1;
                (self.sorted[idx], (idx + 1) as f64 / n as f64)
            })
            .collect()
    }
}

pub fn empirical_cdf(samples: Vec<f64>) -> EmpiricalCdf {
    EmpiricalCdf::new(samples)
}
