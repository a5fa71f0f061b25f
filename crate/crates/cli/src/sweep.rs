use anyhow::{bail, Context, Result};
use tnntn::config::{db_to_linear, Case, RawScenario, Scenario};

/// Sweep axes and the scenario keys they drive. Lengths are in km.
const AXES: &[(&str, &str)] = &[
    ("altitude", "altitude_km"),
    ("p_tn_dbm", "bs_power_dbm"),
    ("d_isd", "isd_km"),
    ("d_iso", "isolation_km"),
    ("n_u", "num_ntn_ues"),
    ("load", "load"),
    ("x_0_frac", "ue_offset_frac"),
];

pub const THRESHOLD_AXIS: &str = "T_db";
pub const NO_AXIS: &str = "none";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: String,
    pub values: Vec<f64>,
}

impl SweepSpec {
    /// `axis=v1,v2,...` or `axis=start:stop:step`.
    pub fn parse(text: &str) -> Result<Self> {
        let (axis, values) = text
            .split_once('=')
            .with_context(|| format!("sweep `{text}` is not of the form axis=values"))?;
        let axis = axis.trim().to_string();
        if axis != THRESHOLD_AXIS && scenario_key(&axis).is_none() {
            let known: Vec<&str> = std::iter::once(THRESHOLD_AXIS).chain(AXES.iter().map(|a| a.0)).collect();
            bail!("unknown sweep axis `{axis}`; expected one of {}", known.join(", "));
        }
        let values = parse_values(values)?;
        if values.is_empty() {
            bail!("sweep `{text}` has no values");
        }
        Ok(Self { axis, values })
    }
}

fn scenario_key(axis: &str) -> Option<&'static str> {
    AXES.iter().find(|(a, _)| *a == axis).map(|(_, k)| *k)
}

/// A comma list of numbers, or an inclusive `start:stop:step` range.
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.contains(':') {
        return parse_range(text);
    }
    text.split(',')
        .filter(|v| !v.trim().is_empty())
        .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad number `{v}`")))
        .collect()
}

pub fn parse_range(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, step] = parts.as_slice() else {
        bail!("range `{text}` is not start:stop:step");
    };
    let num = |s: &str| s.trim().parse::<f64>().with_context(|| format!("bad number `{s}` in `{text}`"));
    let (a, b, step) = (num(a)?, num(b)?, num(step)?);
    if !(step > 0.0) || b < a {
        bail!("range `{text}` needs start <= stop and a positive step");
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| a + k as f64 * step).collect())
}

/// One scenario to evaluate at a list of thresholds.
#[derive(Debug, Clone)]
pub struct Point {
    pub case: Case,
    pub axis: String,
    pub axis_value: Option<f64>,
    pub scenario: Scenario,
    pub thresholds_db: Vec<f64>,
}

impl Point {
    pub fn thresholds(&self) -> Vec<f64> {
        self.thresholds_db.iter().map(|t| db_to_linear(*t)).collect()
    }

    /// `axis_value` for a coverage row at threshold `t_db`.
    pub fn row_axis_value(&self, t_db: f64) -> Option<f64> {
        if self.axis == THRESHOLD_AXIS {
            Some(t_db)
        } else {
            self.axis_value
        }
    }
}

/// Expands cases and an optional sweep into evaluation points.
pub fn expand(raw: &RawScenario, cases: &[Case], sweep: Option<&SweepSpec>, t_db: &[f64]) -> Result<Vec<Point>> {
    let mut points = Vec::new();
    for &case in cases {
        let base = raw.clone().with_case(case);
        match sweep {
            None => points.push(Point {
                case,
                axis: NO_AXIS.into(),
                axis_value: None,
                scenario: base.to_scenario().with_context(|| format!("scenario for {case}"))?,
                thresholds_db: t_db.to_vec(),
            }),
            Some(s) if s.axis == THRESHOLD_AXIS => points.push(Point {
                case,
                axis: s.axis.clone(),
                axis_value: None,
                scenario: base.to_scenario().with_context(|| format!("scenario for {case}"))?,
                thresholds_db: s.values.clone(),
            }),
            Some(s) => {
                let key = scenario_key(&s.axis).expect("axis checked at parse time");
                for &v in &s.values {
                    let swept = base
                        .with_overrides(&[(key, v.to_string())])
                        .and_then(|r| r.to_scenario())
                        .with_context(|| format!("{case} with {}={v}", s.axis))?;
                    points.push(Point {
                        case,
                        axis: s.axis.clone(),
                        axis_value: Some(v),
                        scenario: swept,
                        thresholds_db: t_db.to_vec(),
                    });
                }
            }
        }
    }
    Ok(points)
}
