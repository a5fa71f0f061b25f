//! `tn-ntn`: analytic and simulated coverage and rate for TN/NTN spectrum sharing.

mod report;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;
use tnntn::config::{Case, RawScenario, Scenario};
use tnntn::geometry::{satellite_distance, AnnulusDistance, InterfererDistance, PiecewiseDistribution, ServingDistance};
use tnntn::metrics::{coverage_curve, rate, Metric};
use tnntn::montecarlo::{
    draw_samples, empirical_cdf, run_case_with, sample_annulus_distance, sample_interferer_distance,
    sample_satellite_distance, sample_serving_distance, SimFading,
};

use report::{Row, SimColumns};
use sweep::{Point, SweepSpec};

const URBAN: &str = include_str!("../../../scenarios/urban.json");
const RURAL: &str = include_str!("../../../scenarios/rural.json");

#[derive(Parser)]
#[command(name = "tn-ntn", version, about = "Coverage and rate of a terrestrial network sharing spectrum with a LEO satellite network")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic coverage and rate.
    Analyze(AnalyzeArgs),
    /// Monte Carlo estimates of the same quantities.
    Simulate(SimulateArgs),
    /// Compare analytic and simulated results point by point.
    Validate(ValidateArgs),
    /// Distance-distribution utilities.
    Geometry {
        #[command(subcommand)]
        command: GeometryCommand,
    },
}

#[derive(Subcommand)]
enum GeometryCommand {
    /// Analytic and empirical CDF of one distance law.
    DumpCdf(DumpCdfArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Urban,
    Rural,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fading {
    Rician,
    Matched,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario JSON file. Defaults to the built-in urban preset.
    #[arg(long, conflicts_with = "preset")]
    scenario: Option<PathBuf>,
    /// Built-in preset to start from.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Override a scenario key, e.g. `--set load=0.25`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<RawScenario> {
        let text = match (&self.scenario, self.preset) {
            (Some(path), _) => {
                std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
            }
            (None, Some(Preset::Rural)) => RURAL.to_string(),
            (None, _) => URBAN.to_string(),
        };
        let raw = RawScenario::from_json(&text).context("parsing scenario")?;
        let overrides = self
            .set
            .iter()
            .map(|kv| {
                kv.split_once('=')
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .with_context(|| format!("`--set {kv}` is not KEY=VALUE"))
            })
            .collect::<Result<Vec<_>>>()?;
        let raw = raw.with_overrides(&overrides)?;
        raw.to_scenario().context("invalid scenario")?;
        Ok(raw)
    }
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// `axis=v1,v2,...` or `axis=start:stop:step`. Axes: T_db, altitude,
    /// p_tn_dbm, d_isd, d_iso, n_u, load, x_0_frac (lengths in km).
    #[arg(long)]
    sweep: Option<String>,
    /// SINR thresholds in dB as `start:stop:step` or a comma list.
    #[arg(long = "t-db", default_value = "-10:20:5", allow_hyphen_values = true)]
    t_db: String,
    /// Comma-separated cases (case1, case2, baseline). Defaults to the scenario's case.
    #[arg(long, value_delimiter = ',')]
    cases: Vec<String>,
    /// Skip the average rate.
    #[arg(long)]
    no_rate: bool,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl GridArgs {
    fn points(&self) -> Result<Vec<Point>> {
        let raw = self.scenario.load()?;
        let cases = if self.cases.is_empty() {
            vec![raw.case]
        } else if self.cases.iter().any(|c| c == "all") {
            Case::ALL.to_vec()
        } else {
            self.cases
                .iter()
                .map(|c| c.parse::<Case>().map_err(anyhow::Error::from))
                .collect::<Result<Vec<_>>>()?
        };
        let sweep = self.sweep.as_deref().map(SweepSpec::parse).transpose()?;
        let t_db = sweep::parse_values(&self.t_db).context("--t-db")?;
        if t_db.is_empty() {
            bail!("--t-db has no thresholds");
        }
        sweep::expand(&raw, &cases, sweep.as_ref(), &t_db)
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

#[derive(Args)]
struct McArgs {
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Fading drawn in simulation: Rician with the scenario's K, or the analytic gamma models.
    #[arg(long, value_enum, default_value = "rician")]
    fading: Fading,
}

impl McArgs {
    fn fading(&self) -> SimFading {
        match self.fading {
            Fading::Rician => SimFading::Rician,
            Fading::Matched => SimFading::Matched,
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    mc: McArgs,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    mc: McArgs,
    /// Largest allowed absolute coverage difference.
    #[arg(long, default_value_t = 0.02)]
    tolerance: f64,
    /// Largest allowed relative rate difference.
    #[arg(long, default_value_t = 0.02)]
    rate_tolerance: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Law {
    Serving,
    Interferer,
    Annulus,
    Satellite,
}

#[derive(Args)]
struct DumpCdfArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, value_enum, default_value = "serving")]
    law: Law,
    /// Serving distance in km that conditions the interferer law. Defaults to the median.
    #[arg(long)]
    r0_km: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Number of evenly spaced distances in the table.
    #[arg(long, default_value_t = 101)]
    points: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn analytic_rows(points: &[Point], with_rate: bool) -> Result<Vec<Row>> {
    let per_point: Vec<Vec<Row>> = points
        .par_iter()
        .map(|p| -> Result<Vec<Row>> {
            let curve = coverage_curve(&p.scenario, &p.thresholds())
                .with_context(|| format!("coverage for {} {}={:?}", p.case, p.axis, p.axis_value))?;
            let mut rows: Vec<Row> = curve
                .iter()
                .zip(&p.thresholds_db)
                .map(|(r, &t)| Row {
                    case: p.case,
                    axis: p.axis.clone(),
                    axis_value: p.row_axis_value(t),
                    t_db: Some(t),
                    metric: Metric::Coverage,
                    value: r.value,
                    err: r.abs_error_estimate,
                    sim: None,
                })
                .collect();
            if with_rate {
                let r = rate(&p.scenario).with_context(|| format!("rate for {} {}={:?}", p.case, p.axis, p.axis_value))?;
                rows.push(Row {
                    case: p.case,
                    axis: p.axis.clone(),
                    axis_value: p.axis_value,
                    t_db: None,
                    metric: Metric::Rate,
                    value: r.value,
                    err: r.abs_error_estimate,
                    sim: None,
                });
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<Row> = per_point.into_iter().flatten().collect();
    report::sort_rows(&mut rows);
    Ok(rows)
}

fn simulated_rows(points: &[Point], with_rate: bool, mc: &McArgs) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    // Each point is already parallel across trials.
    for p in points {
        let rep = run_case_with(&p.scenario, &p.thresholds(), mc.trials, mc.seed, mc.fading())
            .with_context(|| format!("simulation for {} {}={:?}", p.case, p.axis, p.axis_value))?;
        for (e, &t) in rep.coverage.iter().zip(&p.thresholds_db) {
            rows.push(Row {
                case: p.case,
                axis: p.axis.clone(),
                axis_value: p.row_axis_value(t),
                t_db: Some(t),
                metric: Metric::Coverage,
                value: e.mean,
                err: e.half_width_95 / 1.96,
                sim: Some(SimColumns::from_estimate(e)),
            });
        }
        if with_rate {
            rows.push(Row {
                case: p.case,
                axis: p.axis.clone(),
                axis_value: p.axis_value,
                t_db: None,
                metric: Metric::Rate,
                value: rep.rate.mean,
                err: rep.rate.half_width_95 / 1.96,
                sim: Some(SimColumns::from_estimate(&rep.rate)),
            });
        }
    }
    report::sort_rows(&mut rows);
    Ok(rows)
}

fn render(rows: &[Row], format: Format, simulated: bool) -> String {
    match format {
        Format::Csv => report::to_csv(rows, simulated),
        Format::Json => report::to_json(rows),
    }
}

fn analyze(args: &AnalyzeArgs) -> Result<ExitCode> {
    let g = &args.grid;
    let rows = analytic_rows(&g.points()?, !g.no_rate)?;
    g.emit(&render(&rows, g.format, false))?;
    Ok(ExitCode::SUCCESS)
}

fn simulate(args: &SimulateArgs) -> Result<ExitCode> {
    let g = &args.grid;
    if args.mc.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let rows = simulated_rows(&g.points()?, !g.no_rate, &args.mc)?;
    g.emit(&render(&rows, g.format, true))?;
    Ok(ExitCode::SUCCESS)
}

fn validate(args: &ValidateArgs) -> Result<ExitCode> {
    let g = &args.grid;
    if args.mc.trials == 0 {
        bail!("--trials must be at least 1");
    }
    if !(args.tolerance >= 0.0 && args.rate_tolerance >= 0.0) {
        bail!("tolerances must be non-negative");
    }
    let points = g.points()?;
    let analytic = analytic_rows(&points, !g.no_rate)?;
    let simulated = simulated_rows(&points, !g.no_rate, &args.mc)?;
    assert_eq!(analytic.len(), simulated.len(), "both engines cover the same grid");
    let checks: Vec<_> = analytic
        .iter()
        .zip(&simulated)
        .map(|(a, s)| report::compare(a, s, args.tolerance, args.rate_tolerance))
        .collect();
    let text = match g.format {
        Format::Csv => report::checks_to_csv(&checks),
        Format::Json => report::checks_to_json(&checks),
    };
    g.emit(&text)?;
    let failed = checks.iter().filter(|c| !c.passed()).count();
    let worst_cov = checks
        .iter()
        .filter(|c| c.analytic.metric == Metric::Coverage)
        .map(|c| c.delta)
        .fold(0.0, f64::max);
    let worst_rate = checks
        .iter()
        .filter(|c| c.analytic.metric == Metric::Rate)
        .map(|c| c.delta)
        .fold(0.0, f64::max);
    eprintln!(
        "{} of {} points within tolerance; worst coverage |delta| {worst_cov:.4}, worst rate relative delta {worst_rate:.4}",
        checks.len() - failed,
        checks.len()
    );
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn median(d: &dyn PiecewiseDistribution) -> f64 {
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

fn dump_cdf(args: &DumpCdfArgs) -> Result<ExitCode> {
    if args.samples == 0 || args.points < 2 {
        bail!("need at least one sample and two table points");
    }
    let sc: Scenario = args.scenario.load()?.to_scenario()?;
    let (x0, r_tn, n_c) = (sc.tn.ue_offset, sc.tn.cluster_radius, sc.tn.num_bs);
    let serving = ServingDistance::new(x0, r_tn, n_c)?;
    let r0 = args.r0_km.map(|r| r * 1e3).unwrap_or_else(|| median(&serving));
    let (law, name): (Box<dyn PiecewiseDistribution>, &str) = match args.law {
        Law::Serving => (Box::new(serving), "serving"),
        Law::Interferer => (Box::new(InterfererDistance::new(r0, x0, r_tn)?), "interferer"),
        Law::Annulus => (
            Box::new(AnnulusDistance::new(x0, r_tn, sc.ntn.isolation, sc.ntn.outer_radius)?),
            "annulus",
        ),
        Law::Satellite => (
            Box::new(satellite_distance(sc.ntn.satellite_model, sc.ntn.altitude, sc.ntn.earth_radius)?),
            "satellite",
        ),
    };
    let draws = match args.law {
        Law::Serving => draw_samples(args.samples, args.seed, |rng| sample_serving_distance(x0, r_tn, n_c as usize, rng)),
        Law::Interferer => draw_samples(args.samples, args.seed, |rng| sample_interferer_distance(r0, x0, r_tn, rng)),
        Law::Annulus => {
            let (w, r) = (sc.ntn.inner_radius(r_tn), sc.ntn.outer_radius);
            draw_samples(args.samples, args.seed, |rng| sample_annulus_distance(x0, w, r, rng))
        }
        Law::Satellite => draw_samples(args.samples, args.seed, |rng| {
            sample_satellite_distance(sc.ntn.satellite_model, sc.ntn.altitude, sc.ntn.earth_radius, rng)
        }),
    };
    let emp = empirical_cdf(draws);
    let ks = emp.ks_distance(|r| law.cdf(r));
    let (lo, hi) = law.support();
    let table: Vec<(f64, f64, f64)> = (0..args.points)
        .map(|k| {
            let r = lo + (hi - lo) * k as f64 / (args.points - 1) as f64;
            (r, law.cdf(r), emp.cdf(r))
        })
        .collect();
    let text = match args.format {
        Format::Csv => {
            let mut s = String::from("law,r_m,analytic_cdf,empirical_cdf\n");
            for (r, a, e) in &table {
                s.push_str(&format!("{name},{r},{a},{e}\n"));
            }
            s
        }
        Format::Json => {
            let rows: Vec<_> = table
                .iter()
                .map(|(r, a, e)| json!({"r_m": r, "analytic_cdf": a, "empirical_cdf": e}))
                .collect();
            let mut s = serde_json::to_string_pretty(&json!({
                "law": name,
                "samples": args.samples,
                "seed": args.seed,
                "ks_distance": ks,
                "table": rows,
            }))?;
            s.push('\n');
            s
        }
    };
    match &args.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    eprintln!("{name}: KS distance {ks:.5} over {} samples", args.samples);
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Simulate(a) => simulate(a),
        Command::Validate(a) => validate(a),
        Command::Geometry {
            command: GeometryCommand::DumpCdf(a),
        } => dump_cdf(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
