//! Scenario parameters.
//!
//! Scenario files are written in the dB domain with explicit unit suffixes
//! (`bs_power_dbm`, `altitude_km`, ...). [`from_db_domain`] converts them to
//! the linear SI [`Scenario`] used by both engines and checks feasibility.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{match_rician_to_nakagami, FadingModel};
use crate::error::{Error, Result};
use crate::geometry::SatelliteModel;

pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const REFERENCE_TEMPERATURE_K: f64 = 290.0;
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;
/// Two hexagonal rings of ISD-spaced sites (19 sites) fit inside this many ISDs.
pub const CLUSTER_RADIUS_PER_ISD: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Case {
    /// Satellite downlink interferes with the terrestrial downlink.
    #[serde(rename = "case1")]
    CaseINtnDl,
    /// NTN user uplinks interfere with the terrestrial downlink.
    #[serde(rename = "case2")]
    CaseIINtnUl,
    /// No spectrum sharing; terrestrial interference only.
    #[serde(rename = "baseline")]
    NoNtnBaseline,
}

impl Case {
    pub const ALL: [Case; 3] = [Case::CaseINtnDl, Case::CaseIINtnUl, Case::NoNtnBaseline];

    pub fn as_str(self) -> &'static str {
        match self {
            Case::CaseINtnDl => "case1",
            Case::CaseIINtnUl => "case2",
            Case::NoNtnBaseline => "baseline",
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "case1" | "casei" | "i" | "1" | "dl" => Ok(Case::CaseINtnDl),
            "case2" | "caseii" | "ii" | "2" | "ul" => Ok(Case::CaseIINtnUl),
            "baseline" | "none" | "no-ntn" => Ok(Case::NoNtnBaseline),
            other => Err(Error::Parse(format!("unknown case `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TnConfig {
    pub cluster_radius: f64,
    /// Distance of the tagged user from the cluster center.
    pub ue_offset: f64,
    pub num_bs: u32,
    pub inter_site_distance: f64,
    pub bs_power: f64,
    pub bs_gain: f64,
    pub pathloss_exp: f64,
    /// Fraction of interfering base stations active.
    pub load: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NtnConfig {
    pub altitude: f64,
    pub sat_power: f64,
    pub ue_power: f64,
    pub sat_gain: f64,
    pub ue_gain: f64,
    pub num_ues: u32,
    pub isolation: f64,
    pub outer_radius: f64,
    pub pathloss_exp: f64,
    pub earth_radius: f64,
    pub satellite_model: SatelliteModel,
}

impl NtnConfig {
    /// Inner radius of the NTN user annulus, `r_TN + d_iso`.
    pub fn inner_radius(&self, cluster_radius: f64) -> f64 {
        cluster_radius + self.isolation
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub serving_m: u32,
    pub tn_interf_fading: FadingModel,
    pub ntn_interf_fading: FadingModel,
    pub rician_k_tn: f64,
    pub rician_k_ntn: f64,
    pub ue_gain: f64,
    pub side_lobe_ratio: f64,
    /// Apply `side_lobe_ratio` to every interfering link.
    pub side_lobe_interferers: bool,
    pub noise_power: f64,
    pub bandwidth: f64,
    pub carrier: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub tn: TnConfig,
    pub ntn: NtnConfig,
    pub chan: ChannelConfig,
    pub case: Case,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let tn = &self.tn;
        let ntn = &self.ntn;
        let chan = &self.chan;
        let positive = [
            ("cluster_radius", tn.cluster_radius),
            ("bs_power", tn.bs_power),
            ("bs_gain", tn.bs_gain),
            ("altitude", ntn.altitude),
            ("sat_power", ntn.sat_power),
            ("ue_power", ntn.ue_power),
            ("sat_gain", ntn.sat_gain),
            ("ntn ue_gain", ntn.ue_gain),
            ("earth_radius", ntn.earth_radius),
            ("ue_gain", chan.ue_gain),
            ("side_lobe_ratio", chan.side_lobe_ratio),
            ("noise_power", chan.noise_power),
            ("bandwidth", chan.bandwidth),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if !(tn.inter_site_distance.is_finite() && tn.inter_site_distance >= 0.0) {
            return Err(Error::Domain("inter_site_distance must be >= 0".into()));
        }
        if !(0.0..=tn.cluster_radius).contains(&tn.ue_offset) {
            return Err(Error::InvalidGeometry(format!(
                "ue offset x_0 = {} must lie in [0, r_TN = {}]",
                tn.ue_offset, tn.cluster_radius
            )));
        }
        if tn.num_bs < 1 {
            return Err(Error::Domain("num_bs must be >= 1".into()));
        }
        if !(tn.pathloss_exp > 2.0) {
            return Err(Error::Domain(format!("TN path-loss exponent must exceed 2, got {}", tn.pathloss_exp)));
        }
        if !(ntn.pathloss_exp >= 2.0) {
            return Err(Error::Domain(format!("NTN path-loss exponent must be >= 2, got {}", ntn.pathloss_exp)));
        }
        if !(0.0..=1.0).contains(&tn.load) {
            return Err(Error::Domain(format!("load must lie in [0, 1], got {}", tn.load)));
        }
        if !(ntn.isolation.is_finite() && ntn.isolation >= 0.0) {
            return Err(Error::Domain("isolation distance must be >= 0".into()));
        }
        let w = ntn.inner_radius(tn.cluster_radius);
        if !(w < ntn.outer_radius) {
            return Err(Error::InvalidGeometry(format!(
                "r_TN + d_iso = {w} m must be below r_NTN = {} m",
                ntn.outer_radius
            )));
        }
        if chan.serving_m < 1 {
            return Err(Error::Domain("serving_m must be >= 1".into()));
        }
        for k in [chan.rician_k_tn, chan.rician_k_ntn] {
            if !(k.is_finite() && k >= 0.0) {
                return Err(Error::Domain(format!("Rician K must be >= 0, got {k}")));
            }
        }
        Ok(())
    }

    /// Boresight gains `(G_TN, G_NTN)` of the terrestrial and NTN links.
    pub fn effective_gains(&self) -> (f64, f64) {
        effective_gains(self)
    }

    fn interferer_factor(&self) -> f64 {
        if self.chan.side_lobe_interferers {
            self.chan.side_lobe_ratio
        } else {
            1.0
        }
    }

    /// `p_TN G_TN` on the serving link.
    pub fn serving_power_gain(&self) -> f64 {
        self.tn.bs_power * self.effective_gains().0
    }

    /// `p_TN G_TN` towards the user from an interfering base station.
    pub fn tn_interferer_power_gain(&self) -> f64 {
        self.serving_power_gain() * self.interferer_factor()
    }

    /// `p_NTN G_NTN` of the NTN aggressor for the configured case (zero for the baseline).
    pub fn ntn_interferer_power_gain(&self) -> f64 {
        let (_, g_ntn) = self.effective_gains();
        let p = match self.case {
            Case::CaseINtnDl => self.ntn.sat_power,
            Case::CaseIINtnUl => self.ntn.ue_power,
            Case::NoNtnBaseline => return 0.0,
        };
        p * g_ntn * self.interferer_factor()
    }

    /// Number of potentially interfering base stations, `N_c - 1`.
    pub fn num_tn_interferers(&self) -> u32 {
        self.tn.num_bs - 1
    }

    /// Largest possible serving distance, `r_TN + x_0`.
    pub fn max_serving_distance(&self) -> f64 {
        self.tn.cluster_radius + self.tn.ue_offset
    }

    pub fn with_case(mut self, case: Case) -> Self {
        self.case = case;
        self
    }

    pub fn serving_fading(&self) -> FadingModel {
        FadingModel::GammaNakagami { m: self.chan.serving_m }
    }

    /// Back-conversion into the dB-domain file representation.
    pub fn to_db_domain(&self) -> RawScenario {
        let tn = &self.tn;
        let ntn = &self.ntn;
        let chan = &self.chan;
        RawScenario {
            case: self.case,
            num_bs: tn.num_bs as i64,
            isd_km: tn.inter_site_distance / 1e3,
            cluster_radius_km: Some(tn.cluster_radius / 1e3),
            ue_offset_frac: tn.ue_offset / tn.cluster_radius,
            bs_power_dbm: watts_to_dbm(tn.bs_power),
            bs_gain_dbi: linear_to_db(tn.bs_gain),
            pathloss_exp_tn: tn.pathloss_exp,
            load: tn.load,
            altitude_km: ntn.altitude / 1e3,
            sat_power_dbm: watts_to_dbm(ntn.sat_power),
            sat_gain_dbi: linear_to_db(ntn.sat_gain),
            ntn_ue_power_dbm: watts_to_dbm(ntn.ue_power),
            ntn_ue_gain_dbi: linear_to_db(ntn.ue_gain),
            num_ntn_ues: ntn.num_ues as i64,
            isolation_km: ntn.isolation / 1e3,
            ntn_outer_radius_km: ntn.outer_radius / 1e3,
            pathloss_exp_ntn: ntn.pathloss_exp,
            earth_radius_km: ntn.earth_radius / 1e3,
            satellite_model: ntn.satellite_model,
            rician_k_tn: chan.rician_k_tn,
            rician_k_ntn: chan.rician_k_ntn,
            serving_m: Some(chan.serving_m as i64),
            tn_interf_fading: chan.tn_interf_fading.to_string(),
            ntn_interf_fading: chan.ntn_interf_fading.to_string(),
            ue_gain_dbi: linear_to_db(chan.ue_gain),
            side_lobe_db: linear_to_db(chan.side_lobe_ratio),
            side_lobe_interferers: chan.side_lobe_interferers,
            noise_figure_db: DEFAULT_NOISE_FIGURE_DB,
            noise_power_dbm: Some(watts_to_dbm(chan.noise_power)),
            bandwidth_mhz: chan.bandwidth / 1e6,
            carrier_ghz: chan.carrier / 1e9,
        }
    }
}

/// `G_TN = G_BS G_u`; `G_NTN = G_sat G_u` for the satellite downlink and
/// `G_u,NTN G_u` when NTN user terminals are the aggressors.
pub fn effective_gains(s: &Scenario) -> (f64, f64) {
    let g_tn = s.tn.bs_gain * s.chan.ue_gain;
    let g_ntn = match s.case {
        Case::CaseIINtnUl => s.ntn.ue_gain * s.chan.ue_gain,
        Case::CaseINtnDl | Case::NoNtnBaseline => s.ntn.sat_gain * s.chan.ue_gain,
    };
    (g_tn, g_ntn)
}

pub const DEFAULT_NOISE_FIGURE_DB: f64 = 7.0;

/// Thermal noise `k_B T_0 B` at 290 K scaled by the receiver noise figure.
pub fn default_noise_power(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    BOLTZMANN * REFERENCE_TEMPERATURE_K * bandwidth_hz * db_to_linear(noise_figure_db)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

/// Scenario as written in files: powers in dBm, gains in dBi, lengths in km.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawScenario {
    pub case: Case,
    pub num_bs: i64,
    pub isd_km: f64,
    /// Defaults to `2.5 * isd_km` when absent.
    pub cluster_radius_km: Option<f64>,
    pub ue_offset_frac: f64,
    pub bs_power_dbm: f64,
    pub bs_gain_dbi: f64,
    pub pathloss_exp_tn: f64,
    pub load: f64,
    pub altitude_km: f64,
    pub sat_power_dbm: f64,
    pub sat_gain_dbi: f64,
    pub ntn_ue_power_dbm: f64,
    pub ntn_ue_gain_dbi: f64,
    pub num_ntn_ues: i64,
    pub isolation_km: f64,
    pub ntn_outer_radius_km: f64,
    pub pathloss_exp_ntn: f64,
    pub earth_radius_km: f64,
    pub satellite_model: SatelliteModel,
    pub rician_k_tn: f64,
    pub rician_k_ntn: f64,
    /// Defaults to the moment match of `rician_k_tn`.
    pub serving_m: Option<i64>,
    /// `matched`, `rayleigh`, `deterministic`, `rician`, `rician-<K>` or `nakagami-<m>`.
    pub tn_interf_fading: String,
    pub ntn_interf_fading: String,
    pub ue_gain_dbi: f64,
    pub side_lobe_db: f64,
    pub side_lobe_interferers: bool,
    pub noise_figure_db: f64,
    /// Overrides the kTB + noise figure default when present.
    pub noise_power_dbm: Option<f64>,
    pub bandwidth_mhz: f64,
    pub carrier_ghz: f64,
}

impl Default for RawScenario {
    fn default() -> Self {
        Self::urban()
    }
}

impl RawScenario {
    /// Urban preset: ISD 0.75 km, satellite at 600 km, Case I.
    pub fn urban() -> Self {
        Self {
            case: Case::CaseINtnDl,
            num_bs: 19,
            isd_km: 0.75,
            cluster_radius_km: None,
            ue_offset_frac: 0.5,
            bs_power_dbm: 46.0,
            bs_gain_dbi: 17.0,
            pathloss_exp_tn: 3.0,
            load: 1.0,
            altitude_km: 600.0,
            sat_power_dbm: 46.0,
            sat_gain_dbi: 30.0,
            ntn_ue_power_dbm: watts_to_dbm(0.2),
            ntn_ue_gain_dbi: 1.0,
            num_ntn_ues: 3,
            isolation_km: 0.75,
            ntn_outer_radius_km: 25.0,
            pathloss_exp_ntn: 2.0,
            earth_radius_km: EARTH_RADIUS_M / 1e3,
            satellite_model: SatelliteModel::Zenith,
            rician_k_tn: 0.0,
            rician_k_ntn: 200.0,
            serving_m: None,
            tn_interf_fading: "matched".into(),
            ntn_interf_fading: "matched".into(),
            ue_gain_dbi: 0.0,
            side_lobe_db: -13.0,
            side_lobe_interferers: false,
            noise_figure_db: DEFAULT_NOISE_FIGURE_DB,
            noise_power_dbm: None,
            bandwidth_mhz: 20.0,
            carrier_ghz: 2.0,
        }
    }

    /// Rural preset: ISD 7.5 km; the NTN annulus reaches 60 km so that
    /// isolation distances up to `2 * ISD` stay feasible.
    pub fn rural() -> Self {
        Self {
            isd_km: 7.5,
            isolation_km: 7.5,
            ntn_outer_radius_km: 60.0,
            ..Self::urban()
        }
    }

    pub fn with_case(mut self, case: Case) -> Self {
        self.case = case;
        self
    }

    pub fn to_scenario(&self) -> Result<Scenario> {
        from_db_domain(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Applies `key=value` overrides. Values are read as JSON when they
    /// parse as such, otherwise as bare strings.
    pub fn with_overrides<K, V>(&self, overrides: &[(K, V)]) -> Result<Self>
    where
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut value = serde_json::to_value(self).map_err(|e| Error::Parse(e.to_string()))?;
        let map = value.as_object_mut().expect("scenario is a JSON object");
        for (k, v) in overrides {
            let key = k.as_ref().trim();
            if !map.contains_key(key) {
                return Err(Error::Parse(format!("unknown scenario key `{key}`")));
            }
            let raw = v.as_ref().trim();
            let parsed = serde_json::from_str(raw)
                .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
            map.insert(key.to_string(), parsed);
        }
        serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn parse_fading(name: &str, matched_k: f64) -> Result<FadingModel> {
    let s = name.trim().to_ascii_lowercase();
    match s.as_str() {
        "matched" => Ok(FadingModel::GammaNakagami {
            m: match_rician_to_nakagami(matched_k),
        }),
        "rayleigh" => Ok(FadingModel::GammaNakagami { m: 1 }),
        "deterministic" | "none" => Ok(FadingModel::Deterministic),
        "rician" => Ok(FadingModel::Rician { k: matched_k }),
        _ => {
            if let Some(m) = s.strip_prefix("nakagami-") {
                let m: f64 = m
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad Nakagami parameter in `{name}`")))?;
                FadingModel::nakagami(m)
            } else if let Some(k) = s.strip_prefix("rician-") {
                let k: f64 = k
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad Rician K in `{name}`")))?;
                FadingModel::rician(k)
            } else {
                Err(Error::Parse(format!("unknown fading model `{name}`")))
            }
        }
    }
}

fn count(name: &str, v: i64) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::Domain(format!("{name} must be a non-negative count, got {v}")))
}

/// Converts a dB-domain scenario into linear SI units and validates it.
pub fn from_db_domain(raw: &RawScenario) -> Result<Scenario> {
    let finite = [
        ("isd_km", raw.isd_km),
        ("ue_offset_frac", raw.ue_offset_frac),
        ("bs_power_dbm", raw.bs_power_dbm),
        ("bs_gain_dbi", raw.bs_gain_dbi),
        ("altitude_km", raw.altitude_km),
        ("sat_power_dbm", raw.sat_power_dbm),
        ("sat_gain_dbi", raw.sat_gain_dbi),
        ("ntn_ue_power_dbm", raw.ntn_ue_power_dbm),
        ("ntn_ue_gain_dbi", raw.ntn_ue_gain_dbi),
        ("isolation_km", raw.isolation_km),
        ("ntn_outer_radius_km", raw.ntn_outer_radius_km),
        ("ue_gain_dbi", raw.ue_gain_dbi),
        ("side_lobe_db", raw.side_lobe_db),
        ("noise_figure_db", raw.noise_figure_db),
        ("bandwidth_mhz", raw.bandwidth_mhz),
        ("carrier_ghz", raw.carrier_ghz),
    ];
    for (name, v) in finite {
        if !v.is_finite() {
            return Err(Error::Domain(format!("{name} must be finite, got {v}")));
        }
    }
    let num_bs = count("num_bs", raw.num_bs)?;
    let num_ues = count("num_ntn_ues", raw.num_ntn_ues)?;

    let isd = raw.isd_km * 1e3;
    let cluster_radius = raw
        .cluster_radius_km
        .map(|r| r * 1e3)
        .unwrap_or(CLUSTER_RADIUS_PER_ISD * isd);
    if !(0.0..=1.0).contains(&raw.ue_offset_frac) {
        return Err(Error::InvalidGeometry(format!(
            "ue_offset_frac must lie in [0, 1], got {}",
            raw.ue_offset_frac
        )));
    }

    let serving_m = match raw.serving_m {
        Some(m) => count("serving_m", m)?,
        None => match_rician_to_nakagami(raw.rician_k_tn),
    };
    let bandwidth = raw.bandwidth_mhz * 1e6;
    let noise_power = match raw.noise_power_dbm {
        Some(dbm) => dbm_to_watts(dbm),
        None => default_noise_power(bandwidth, raw.noise_figure_db),
    };

    let scenario = Scenario {
        tn: TnConfig {
            cluster_radius,
            ue_offset: raw.ue_offset_frac * cluster_radius,
            num_bs,
            inter_site_distance: isd,
            bs_power: dbm_to_watts(raw.bs_power_dbm),
            bs_gain: db_to_linear(raw.bs_gain_dbi),
            pathloss_exp: raw.pathloss_exp_tn,
            load: raw.load,
        },
        ntn: NtnConfig {
            altitude: raw.altitude_km * 1e3,
            sat_power: dbm_to_watts(raw.sat_power_dbm),
            ue_power: dbm_to_watts(raw.ntn_ue_power_dbm),
            sat_gain: db_to_linear(raw.sat_gain_dbi),
            ue_gain: db_to_linear(raw.ntn_ue_gain_dbi),
            num_ues,
            isolation: raw.isolation_km * 1e3,
            outer_radius: raw.ntn_outer_radius_km * 1e3,
            pathloss_exp: raw.pathloss_exp_ntn,
            earth_radius: raw.earth_radius_km * 1e3,
            satellite_model: raw.satellite_model,
        },
        chan: ChannelConfig {
            serving_m,
            tn_interf_fading: parse_fading(&raw.tn_interf_fading, raw.rician_k_tn)?,
            ntn_interf_fading: parse_fading(&raw.ntn_interf_fading, raw.rician_k_ntn)?,
            rician_k_tn: raw.rician_k_tn,
            rician_k_ntn: raw.rician_k_ntn,
            ue_gain: db_to_linear(raw.ue_gain_dbi),
            side_lobe_ratio: db_to_linear(raw.side_lobe_db),
            side_lobe_interferers: raw.side_lobe_interferers,
            noise_power,
            bandwidth,
            carrier: raw.carrier_ghz * 1e9,
        },
        case: raw.case,
    };
    scenario.validate()?;
    Ok(scenario)
}
