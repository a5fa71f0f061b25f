use std::cmp::Ordering;
use std::fmt::Write as _;

use serde_json::{json, Value};
use tnntn::config::Case;
use tnntn::metrics::Metric;
use tnntn::montecarlo::SimEstimate;

pub const HEADER: &str = "case,axis,axis_value,T_db,metric,value,err";
pub const SIM_HEADER: &str = ",half_width,seed,trials";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimColumns {
    pub half_width: f64,
    pub seed: u64,
    pub trials: u64,
}

impl SimColumns {
    pub fn from_estimate(e: &SimEstimate) -> Self {
        Self {
            half_width: e.half_width_95,
            seed: e.seed,
            trials: e.trials,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub case: Case,
    pub axis: String,
    pub axis_value: Option<f64>,
    pub t_db: Option<f64>,
    pub metric: Metric,
    pub value: f64,
    pub err: f64,
    pub sim: Option<SimColumns>,
}

/// `None` sorts after every number.
fn cmp_opt(a: Option<f64>, b: Option<f64>) -> Ordering {
    match (a, b) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}

/// Orders by case, axis value and threshold; rate rows follow the coverage rows.
pub fn sort_rows(rows: &mut [Row]) {
    rows.sort_by(|a, b| {
        a.case
            .cmp(&b.case)
            .then(cmp_opt(a.axis_value, b.axis_value))
            .then(cmp_opt(a.t_db, b.t_db))
            .then(a.metric.cmp(&b.metric))
    });
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn to_csv(rows: &[Row], simulated: bool) -> String {
    let mut out = String::from(HEADER);
    if simulated {
        out.push_str(SIM_HEADER);
    }
    out.push('\n');
    for r in rows {
        write!(
            out,
            "{},{},{},{},{},{},{}",
            r.case,
            r.axis,
            opt(r.axis_value),
            opt(r.t_db),
            r.metric.as_str(),
            r.value,
            r.err
        )
        .unwrap();
        if simulated {
            let s = r.sim.expect("simulated rows carry MC columns");
            write!(out, ",{},{},{}", s.half_width, s.seed, s.trials).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn to_json(rows: &[Row]) -> String {
    let items: Vec<Value> = rows
        .iter()
        .map(|r| {
            let mut v = json!({
                "case": r.case.as_str(),
                "axis": r.axis,
                "axis_value": r.axis_value,
                "T_db": r.t_db,
                "metric": r.metric.as_str(),
                "value": r.value,
                "err": r.err,
            });
            if let Some(s) = r.sim {
                let map = v.as_object_mut().unwrap();
                map.insert("half_width".into(), json!(s.half_width));
                map.insert("seed".into(), json!(s.seed));
                map.insert("trials".into(), json!(s.trials));
            }
            v
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&items).expect("rows serialize");
    text.push('\n');
    text
}

/// One analytic-versus-simulated comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub analytic: Row,
    pub simulated: f64,
    pub half_width: f64,
    /// Absolute for coverage, relative to the analytic value for rate.
    pub delta: f64,
    pub limit: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.delta <= self.limit
    }
}

pub fn compare(analytic: &Row, simulated: &Row, coverage_tol: f64, rate_tol: f64) -> Check {
    let diff = (analytic.value - simulated.value).abs();
    let (delta, limit) = match analytic.metric {
        Metric::Coverage => (diff, coverage_tol),
        Metric::Rate => (diff / analytic.value.abs().max(f64::MIN_POSITIVE), rate_tol),
    };
    Check {
        analytic: analytic.clone(),
        simulated: simulated.value,
        half_width: simulated.sim.map(|s| s.half_width).unwrap_or(0.0),
        delta,
        limit,
    }
}

pub const CHECK_HEADER: &str = "case,axis,axis_value,T_db,metric,analytic,simulated,half_width,delta,limit,status";

pub fn checks_to_csv(checks: &[Check]) -> String {
    let mut out = format!("{CHECK_HEADER}\n");
    for c in checks {
        let r = &c.analytic;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.case,
            r.axis,
            opt(r.axis_value),
            opt(r.t_db),
            r.metric.as_str(),
            r.value,
            c.simulated,
            c.half_width,
            c.delta,
            c.limit,
            if c.passed() { "PASS" } else { "FAIL" }
        )
        .unwrap();
    }
    out
}

pub fn checks_to_json(checks: &[Check]) -> String {
    let items: Vec<Value> = checks
        .iter()
        .map(|c| {
            let r = &c.analytic;
            json!({
                "case": r.case.as_str(),
                "axis": r.axis,
                "axis_value": r.axis_value,
                "T_db": r.t_db,
                "metric": r.metric.as_str(),
                "analytic": r.value,
                "simulated": c.simulated,
                "half_width": c.half_width,
                "delta": c.delta,
                "limit": c.limit,
                "passed": c.passed(),
            })
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&items).expect("checks serialize");
    text.push('\n');
    text
}
