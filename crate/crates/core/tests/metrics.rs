mod common;

use common::{lone_cell_coverage, rate_by_unit_panels};
use tnntn::config::{db_to_linear, Case, RawScenario, Scenario};
use tnntn::metrics::{coverage, coverage_curve, rate, RATE_TAIL, RATE_TOLERANCE, RATE_T_MAX};

fn scenario(raw: &RawScenario, case: Case) -> Scenario {
    raw.clone().with_case(case).to_scenario().unwrap()
}

fn pc(sc: &Scenario, t_db: f64) -> f64 {
    coverage(sc, db_to_linear(t_db)).unwrap().value
}

#[test]
fn lone_cell_matches_direct_quadrature() {
    let mut raw = RawScenario::urban().with_case(Case::NoNtnBaseline);
    raw.num_bs = 1;
    raw.ue_offset_frac = 0.0;
    let mut sc = raw.to_scenario().unwrap();
    // Noise equal to the cell-edge signal keeps the curve away from 0 and 1.
    sc.chan.noise_power = sc.serving_power_gain() * sc.tn.cluster_radius.powf(-sc.tn.pathloss_exp);
    for t_db in [-10.0, 0.0, 10.0, 20.0] {
        let expected = lone_cell_coverage(&sc, db_to_linear(t_db));
        let got = pc(&sc, t_db);
        assert!((got - expected).abs() < 1e-6, "T={t_db}: {got} vs {expected}");
        assert!(expected > 1e-3 && expected < 0.999, "T={t_db}: {expected}");
    }
}

#[test]
fn no_terminals_reproduces_baseline() {
    let mut raw = RawScenario::rural();
    raw.num_ntn_ues = 0;
    let base = scenario(&raw, Case::NoNtnBaseline);
    let empty = scenario(&raw, Case::CaseIINtnUl);
    for t_db in [-5.0, 5.0, 15.0] {
        assert_eq!(pc(&base, t_db), pc(&empty, t_db));
    }
}

#[test]
fn sharing_never_helps() {
    for raw in [RawScenario::urban(), RawScenario::rural()] {
        let base = scenario(&raw, Case::NoNtnBaseline);
        let dl = scenario(&raw, Case::CaseINtnDl);
        let ul = scenario(&raw, Case::CaseIINtnUl);
        for t_db in [-10.0, 0.0, 10.0, 20.0] {
            let b = pc(&base, t_db);
            assert!(pc(&dl, t_db) <= b + 1e-12);
            assert!(pc(&ul, t_db) <= b + 1e-12);
        }
    }
}

#[test]
fn curves_decrease_in_threshold() {
    let sc = scenario(&RawScenario::rural(), Case::CaseINtnDl);
    let thresholds: Vec<f64> = (-10..=30).step_by(5).map(|d| db_to_linear(d as f64)).collect();
    let curve = coverage_curve(&sc, &thresholds).unwrap();
    for w in curve.windows(2) {
        assert!(w[1].value <= w[0].value + 1e-12);
    }
    assert!(curve[0].value > curve.last().unwrap().value + 0.1);
}

#[test]
fn higher_satellites_hurt_less() {
    let mut raw = RawScenario::rural();
    let mut prev = 0.0;
    for a in [200.0, 600.0, 1200.0] {
        raw.altitude_km = a;
        let v = pc(&scenario(&raw, Case::CaseINtnDl), 0.0);
        assert!(v > prev, "altitude {a}: {v} <= {prev}");
        prev = v;
    }
}

#[test]
fn lighter_load_helps() {
    let mut raw = RawScenario::urban();
    let mut prev = 1.0;
    for load in [0.25, 0.5, 1.0] {
        raw.load = load;
        let v = pc(&scenario(&raw, Case::NoNtnBaseline), 0.0);
        assert!(v < prev, "load {load}");
        prev = v;
    }
}

#[test]
fn distant_terminals_vanish() {
    let mut raw = RawScenario::urban();
    raw.num_ntn_ues = 30;
    raw.ue_offset_frac = 1.0;
    raw.load = 0.25;
    let base = pc(&scenario(&raw, Case::NoNtnBaseline), 10.0);
    raw.isolation_km = 0.0;
    raw.ntn_outer_radius_km = 2.5 * raw.isd_km + 0.5 * raw.isd_km;
    let near = pc(&scenario(&raw, Case::CaseIINtnUl), 10.0);
    raw.isolation_km = 20.0 * raw.isd_km;
    raw.ntn_outer_radius_km = 2.5 * raw.isd_km + raw.isolation_km + 0.5 * raw.isd_km;
    let far = pc(&scenario(&raw, Case::CaseIINtnUl), 10.0);
    assert!(base - near > 0.01, "{base} {near}");
    assert!(base - far < 0.005, "{base} {far}");
}

#[test]
fn more_tn_power_saturates() {
    let mut raw = RawScenario::urban().with_case(Case::CaseINtnDl);
    let mut prev = 0.0;
    let mut last_step = f64::INFINITY;
    for p in [10.0, 30.0, 50.0, 70.0, 90.0] {
        raw.bs_power_dbm = p;
        let v = pc(&raw.to_scenario().unwrap(), 0.0);
        assert!(v >= prev - 1e-12);
        last_step = v - prev;
        prev = v;
    }
    assert!(last_step < 1e-4, "{last_step}");
}

#[test]
fn rate_agrees_with_panelwise_integral() {
    let sc = scenario(&RawScenario::rural(), Case::CaseINtnDl);
    let r = rate(&sc).unwrap();
    let reference = rate_by_unit_panels(&sc, RATE_TOLERANCE, RATE_T_MAX, RATE_TAIL);
    let tol = 2.0 * (RATE_TOLERANCE.rel * r.value + RATE_TAIL);
    assert!((r.value - reference).abs() <= tol, "{} vs {reference}", r.value);
}
