//! Experiment dispatch, CSV output and run manifests.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use brwlab_core::brw::{
    critical_offspring, many_to_one_batch, simulate_brw, OffspringDist, Retention, RunConfig, TraceRecord,
};
use brwlab_core::rng::replication_seed;
use brwlab_core::spectral::{
    classify_regime, criticality_sum, dirichlet_rho, fit_spectral, numerical_rho, return_series, two_walk_sum,
    ConditionReport, DEFAULT_SUPPORT_CAP,
};
use brwlab_core::topology::{
    embedded_gw_stats, ends_profile, fiber_hit_stats, lazy_tree_kernel, min_supercritical_lag, purple_experiment,
    EmbeddedLine, GwConfig,
};
use brwlab_core::{ArithmeticMode, Error as CoreError, GraphFamily, Kernel, KernelSpec, VertexAddr};
use num_rational::Rational64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{CliError, EXIT_OK, EXIT_RESOURCE};
use crate::grammar::{LineSpec, OffspringSpec};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const AGGREGATE_FILE: &str = "aggregate.json";

const DEFAULT_POPULATION_CAP: u64 = 5_000_000;
const DIRICHLET_ITERATIONS: usize = 200_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoRecord {
    pub value: f64,
    pub method: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationEvent {
    pub replication: u64,
    /// Last complete generation, when known.
    pub generation: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub kind: String,
    pub message: String,
}

/// Everything needed to rerun an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub experiment: String,
    /// Canonical config text.
    pub config: String,
    pub seed: u64,
    pub mode: String,
    pub started_unix_seconds: u64,
    pub wall_clock_seconds: f64,
    pub status: String,
    pub exit_code: i32,
    pub truncations: Vec<TruncationEvent>,
    pub rho: Option<RhoRecord>,
    pub offspring: Option<String>,
    pub files: Vec<String>,
    pub error: Option<ErrorRecord>,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("bad manifest {}: {e}", path.display())))
    }

    pub fn config(&self) -> Result<ExperimentConfig, CliError> {
        ExperimentConfig::parse(&self.config)
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub exit_code: i32,
}

/// One CSV file.
struct Table {
    name: &'static str,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &'static str, header: &[&'static str]) -> Self {
        Table {
            name,
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn write(&self, dir: &Path) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(dir.join(self.name))?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush().map_err(|e| CliError::io(dir.join(self.name), e))?;
        Ok(())
    }
}

fn f(x: f64) -> String {
    x.to_string()
}

/// State accumulated while an experiment runs.
#[derive(Default)]
struct Run {
    tables: Vec<Table>,
    aggregate: Map<String, Value>,
    truncations: Vec<TruncationEvent>,
    rho: Option<RhoRecord>,
    offspring: Option<String>,
}

impl Run {
    fn put(&mut self, key: &str, value: impl Serialize) -> Result<(), CliError> {
        self.aggregate.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    fn rho(&mut self, cfg: &ExperimentConfig, kernel: &Kernel) -> Result<f64, CliError> {
        if let Some(r) = &self.rho {
            return Ok(r.value);
        }
        let record = match cfg.rho {
            Some(value) => RhoRecord {
                value,
                method: "supplied".into(),
                detail: "set in the config".into(),
            },
            None => {
                let est = numerical_rho(kernel)?;
                let method = serde_json::to_value(est.method)?.as_str().unwrap_or_default().to_string();
                RhoRecord {
                    value: est.rho,
                    method,
                    detail: est.detail,
                }
            }
        };
        let value = record.value;
        self.rho = Some(record);
        Ok(value)
    }

    fn offspring(&mut self, cfg: &ExperimentConfig, kernel: &Kernel) -> Result<OffspringDist, CliError> {
        let dist = match &cfg.offspring {
            None => return Err(CliError::Config(format!("{} needs `offspring`", cfg.experiment))),
            Some(OffspringSpec::Critical) => critical_offspring(self.rho(cfg, kernel)?)?,
            Some(OffspringSpec::Explicit(pairs)) => {
                OffspringDist::new(pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect())?
            }
        };
        self.offspring = Some(dist.to_string());
        Ok(dist)
    }
}

/// Output directory used when none is given: `$BRWLAB_OUT/<label>-seed<seed>`,
/// with `brwlab-out` in place of an unset variable. The label is the preset
/// name if there is one, else the experiment kind.
pub fn default_out_dir(cfg: &ExperimentConfig, preset: Option<&str>) -> PathBuf {
    let base = std::env::var_os("BRWLAB_OUT").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("brwlab-out"));
    let label = preset.unwrap_or(cfg.experiment.name());
    base.join(format!("{label}-seed{}", cfg.seed))
}

/// Runs `cfg` and writes its files under `out`.
///
/// Invalid configs fail before anything is written. Failures after that point
/// are recorded in the manifest and reflected in [`RunOutcome::exit_code`].
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome, CliError> {
    let kernel = cfg.validate()?;
    let started_unix_seconds = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();
    let mut run = Run::default();
    let result = dispatch(cfg, &kernel, &mut run);

    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut files = Vec::new();
    if result.is_ok() {
        for table in &run.tables {
            table.write(out)?;
            files.push(table.name.to_string());
        }
        let text = serde_json::to_string_pretty(&Value::Object(run.aggregate.clone()))?;
        fs::write(out.join(AGGREGATE_FILE), text + "\n").map_err(|e| CliError::io(out.join(AGGREGATE_FILE), e))?;
        files.push(AGGREGATE_FILE.to_string());
    }
    let (status, exit_code, error) = match &result {
        Ok(()) if run.truncations.is_empty() => ("ok", EXIT_OK, None),
        Ok(()) => ("truncated", EXIT_RESOURCE, None),
        Err(e) => (
            "error",
            e.exit_code(),
            Some(ErrorRecord {
                kind: e.kind().to_string(),
                message: e.to_string(),
            }),
        ),
    };
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        experiment: cfg.experiment.to_string(),
        config: cfg.to_text(),
        seed: cfg.seed,
        mode: cfg.mode.to_string(),
        started_unix_seconds,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        status: status.to_string(),
        exit_code,
        truncations: run.truncations,
        rho: run.rho,
        offspring: run.offspring,
        files,
        error,
    };
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(out.join(MANIFEST_FILE), text + "\n").map_err(|e| CliError::io(out.join(MANIFEST_FILE), e))?;
    Ok(RunOutcome {
        dir: out.to_path_buf(),
        manifest,
        exit_code,
    })
}

/// Reruns the config stored in a manifest.
pub fn replay(manifest: &Path, out: &Path) -> Result<RunOutcome, CliError> {
    run_experiment(&RunManifest::read(manifest)?.config()?, out)
}

fn dispatch(cfg: &ExperimentConfig, kernel: &Kernel, run: &mut Run) -> Result<(), CliError> {
    match cfg.experiment {
        ExperimentKind::ReturnSeries => return_series_run(cfg, kernel, run),
        ExperimentKind::SpectralFit => spectral_fit_run(cfg, kernel, run),
        ExperimentKind::CriticalitySum => {
            let rho = run.rho(cfg, kernel)?;
            let horizon = cfg.horizon.unwrap_or(4000);
            let series = return_series(kernel, horizon, ArithmeticMode::Float)?;
            let report = criticality_sum(&series, rho, horizon)?;
            sums(run, &report)
        }
        ExperimentKind::TwoWalkSum => {
            let m = match cfg.m {
                Some(m) => m,
                None => 1.0 / run.rho(cfg, kernel)?,
            };
            if run.rho.is_some() || cfg.rho.is_some() {
                let rho = run.rho(cfg, kernel)?;
                run.put("regime", classify_regime(m, rho)?)?;
            }
            let origin = kernel.origin();
            let i = cfg.source.clone().unwrap_or_else(|| origin.clone());
            let j = cfg.target.clone().unwrap_or(origin);
            let report = two_walk_sum(kernel, &i, &j, m, cfg.horizon.unwrap_or(200), DEFAULT_SUPPORT_CAP)?;
            run.put("m", m)?;
            run.put("source", i.to_string())?;
            run.put("target", j.to_string())?;
            sums(run, &report)
        }
        ExperimentKind::Simulate => simulate_run(cfg, kernel, run),
        ExperimentKind::ManyToOne => many_to_one_run(cfg, kernel, run),
        ExperimentKind::Purple => purple_run(cfg, kernel, run),
        ExperimentKind::Ends => ends_run(cfg, kernel, run),
        ExperimentKind::Fiber => fiber_run(cfg, kernel, run),
        ExperimentKind::EmbeddedGw => gw_run(cfg, kernel, run),
    }
}

fn return_series_run(cfg: &ExperimentConfig, kernel: &Kernel, run: &mut Run) -> Result<(), CliError> {
    let horizon = cfg.horizon.unwrap_or(200);
    let series = return_series(kernel, horizon, cfg.mode)?;
    let mut table = Table::new("series.csv", &["n", "p", "log_p", "exact"]);
    for n in 0..=series.horizon() {
        let exact = series.exact.as_ref().and_then(|e| e.get(n)).map(ToString::to_string).unwrap_or_default();
        table.push(vec![n.to_string(), f(series.p(n)), f(series.log_p[n]), exact]);
    }
    run.tables.push(table);
    run.put("horizon", horizon)?;
    run.put("strategy", series.strategy)?;
    run.put("period", series.period)?;
    run.put("analytic_rho", kernel.analytic_rho())
}

fn spectral_fit_run(cfg: &ExperimentConfig, kernel: &Kernel, run: &mut Run) -> Result<(), CliError> {
    let horizon = cfg.horizon.unwrap_or(4000);
    let series = return_series(kernel, horizon, ArithmeticMode::Float)?;
    let mut fits = vec![("free", fit_spectral(&series, None)?)];
    if let Some(rho) = kernel.analytic_rho() {
        fits.push(("known-rho", fit_spectral(&series, Some(rho))?));
    }
    let mut table = Table::new(
        "fit.csv",
        &[
            "fit", "method", "rho_hat", "a_hat", "c_hat", "window_start", "window_end", "points", "r_squared",
            "rms_residual", "max_residual",
        ],
    );
    for (label, fit) in &fits {
        let method = serde_json::to_value(fit.method)?.as_str().unwrap_or_default().to_string();
        table.push(vec![
            label.to_string(),
            method,
            f(fit.rho_hat),
            f(fit.a_hat),
            f(fit.c_hat),
            fit.window.0.to_string(),
            fit.window.1.to_string(),
            fit.points.to_string(),
            f(fit.r_squared),
            f(fit.rms_residual),
            f(fit.max_residual),
        ]);
    }
    run.tables.push(table);
    run.put("horizon", horizon)?;
    run.put("analytic_rho", kernel.analytic_rho())?;
    run.put("fits", fits.iter().map(|(l, fit)| json!({ "fit": l, "result": fit })).collect::<Vec<_>>())?;

    if let Some(radii) = &cfg.dirichlet_radii {
        let mut table = Table::new(
            "dirichlet.csv",
            &["radius", "rho", "lower", "upper", "iterations", "converged", "states"],
        );
        let mut estimates = Vec::new();
        for &r in radii {
            let est = dirichlet_rho(kernel, r, DIRICHLET_ITERATIONS)?;
            table.push(vec![
                r.to_string(),
                f(est.rho),
                f(est.lower),
                f(est.upper),
                est.iterations.to_string(),
                est.converged.to_string(),
                est.states.to_string(),
            ]);
            estimates.push(est);
        }
        run.tables.push(table);
        run.put("dirichlet", estimates)?;
    }
    Ok(())
}

fn sums(run: &mut Run, report: &ConditionReport) -> Result<(), CliError> {
    let mut table = Table::new("sums.csv", &["n", "term", "partial_sum"]);
    for (n, (t, s)) in report.terms.iter().zip(&report.partial_sums).enumerate() {
        table.push(vec![n.to_string(), f(*t), f(*s)]);
    }
    run.tables.push(table);
    let Value::Object(mut summary) = serde_json::to_value(report)? else {
        unreachable!("reports serialize to objects")
    };
    summary.remove("terms");
    summary.remove("partial_sums");
    for (k, v) in summary {
        run.aggregate.insert(k, v);
    }
    Ok(())
}

fn base_run(cfg: &ExperimentConfig, kernel: &Kernel, mu: &OffspringDist, generations: u32) -> RunConfig {
    let mut rc = RunConfig::new(kernel.clone(), mu.clone(), generations, cfg.seed);
    rc.start = cfg.source.clone();
    if let Some(cap) = cfg.population_cap {
        rc.population_cap = cap;
        rc.allow_small_cap = true;
    } else {
        rc.population_cap = DEFAULT_POPULATION_CAP;
    }
    rc
}

/// Runs every replication, keeping partial traces of truncated ones.
fn replicate(base: &RunConfig, replications: u64) -> Result<Vec<(TraceRecord, Option<u32>)>, CliError> {
    (0..replications)
        .into_par_iter()
        .map(|rep| {
            let mut rc = base.clone();
            rc.replication = rep;
            match simulate_brw(&rc) {
                Ok(trace) => Ok((trace, None)),
                Err(CoreError::Truncated { generation, trace }) => Ok((*trace, Some(generation))),
                Err(e) => Err(e.into()),
            }
        })
        .collect()
}

fn note_truncations(run: &mut Run, traces: &[(TraceRecord, Option<u32>)]) {
    for (rep, (_, cut)) in traces.iter().enumerate() {
        if let Some(generation) = cut {
            run.truncations.push(TruncationEvent {
                replication: rep as u64,
                generation: Some(*generation),
            });
        }
    }
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 { values[n / 2] } else { 0.5 * (values[n / 2 - 1] + values[n / 2]) })
}

fn simulate_run(cfg: &ExperimentConfig, kernel: &Kernel, run: &mut Run) -> Result<(), CliError> {
    let mu = run.offspring(cfg, kernel)?;
    let generations = cfg.generations.unwrap_or(30);
    let base = base_run(cfg, kernel, &mu, generations);
    base.validate()?;
    let traces = replicate(&base, cfg.replications.unwrap_or(1))?;
    note_truncations(run, &traces);

    let mut populations = Table::new("populations.csv", &["replication", "generation", "population"]);
    let mut visited = Table::new("visited.csv", &["replication", "vertex", "first_generation"]);
    let mut edges = Table::new("edges.csv", &["replication", "from", "to"]);
    let mut finals = Table::new("final.csv", &["replication", "vertex", "count"]);
    for (rep, (trace, _)) in traces.iter().enumerate() {
        let rep = rep.to_string();
        for (n, p) in trace.populations.iter().enumerate() {
            populations.push(vec![rep.clone(), n.to_string(), p.to_string()]);
        }
        for (v, g) in &trace.visited {
            visited.push(vec![rep.clone(), v.to_string(), g.to_string()]);
        }
        for (a, b) in &trace.edges {
            edges.push(vec![rep.clone(), a.to_string(), b.to_string()]);
        }
        for (v, c) in &trace.last.counts {
            finals.push(vec![rep.clone(), v.to_string(), c.to_string()]);
        }
    }
    run.tables.extend([populations, visited, edges, finals]);
    let totals: Vec<f64> = traces.iter().map(|(t, _)| t.last.total as f64).collect();
    run.put("generations", generations)?;
    run.put("replications", traces.len())?;
    run.put("mean_final_population", totals.iter().sum::<f64>() / totals.len() as f64)?;
    run.put("expected_final_population", base.expected_population())
}

fn many_to_one_run(cfg: &ExperimentConfig, kernel: &Kernel, run: &mut Run) -> Result<(), CliError> {
    let mu = run.offspring(cfg, kernel)?;
    let max_n = cfg.generations.unwrap_or(8);
    let targets = cfg.targets.clone().unwrap_or_else(|| vec![kernel.origin()]);
    let base = base_run(cfg, kernel, &mu, max_n.max(1));
    let reports = many_to_one_batch(&base, max_n, &targets, cfg.replications.unwrap_or(10_000))?;
    let mut table = Table::new(
        "many_to_one.csv",
        &["n", "target", "replications", "mc_mean", "std_error", "exact", "z"],
    );
    for r in &reports {
        table.push(vec![
            r.n.to_string(),
            r.target.clone(),
            r.replications.to_string(),
            f(r.mc_mean),
            f(r.std_error),
            f(r.exact),
            f(r.z),
        ]);
    }
    run.tables.push(table);
    let max_z = reports.iter().filter(|r| r.n > 0).map(|r| r.z.abs()).fold(0.0, f64::max);
    run.put("max_abs_z", max_z)?;
    run.put("generations", max_n)
}

fn purple_run(cfg: &ExperimentConfig, kernel: &Kernel, run: &mut Run) -> Result<(), CliError> {
    let mu = run.offspring(cfg, kernel)?;
    let horizons = cfg.horizons.clone().unwrap_or_else(|| vec![cfg.generations.unwrap_or(30)]);
    let generations = *horizons.iter().max().expect("non-empty budgets");
    let origin = kernel.origin();
    let red = cfg.source.clone().unwrap_or_else(|| origin.clone());
    let blue = cfg.target.clone().unwrap_or(origin);
    let cap = cfg.population_cap.unwrap_or(DEFAULT_POPULATION_CAP);
    let pairs = cfg.replications.unwrap_or(50);
    let results = (0..pairs)
        .into_par_iter()
        .map(|rep| purple_experiment(kernel, &mu, &red, &blue, generations, replication_seed(cfg.seed, rep), cap))
        .collect::<Result<Vec<_>, _>>()?;

    let mut table = Table::new("purple.csv", &["replication", "horizon", "purple", "red_visited", "blue_visited"]);
    for (rep, c) in results.iter().enumerate() {
        if c.truncated {
            run.truncations.push(TruncationEvent {
                replication: rep as u64,
                generation: None,
            });
        }
        for &h in &horizons {
            table.push(vec![
                rep.to_string(),
                h.to_string(),
                c.purple_at(h).to_string(),
                c.red.len().to_string(),
                c.blue.len().to_string(),
            ]);
        }
    }
    run.tables.push(table);
    let medians: Vec<Value> = horizons
        .iter()
        .map(|&h| {
            let mut v: Vec<f64> = results.iter().map(|c| c.purple_at(h) as f64).collect();
            json!({ "horizon": h, "median_purple": median(&mut v) })
        })
        .collect();
    run.put("red", red.to_string())?;
    run.put("blue", blue.to_string())?;
    run.put("pairs", pairs)?;
    run.put("medians", medians)?;
    if let (Some(&first), Some(&last)) = (horizons.first(), horizons.last()) {
        let grew = results.iter().filter(|c| c.purple_at(last) > c.purple_at(first)).count();
        run.put("fraction_growing", grew as f64 / results.len() as f64)?;
    }
    Ok(())
}

fn ends_run(cfg: &ExperimentConfig, kernel: &Kernel, run: &mut Run) -> Result<(), CliError> {
    let mu = run.offspring(cfg, kernel)?;
    let generations = cfg.generations.unwrap_or(60);
    let radii = cfg.radii.clone().unwrap_or_else(|| vec![6]);
    let base = base_run(cfg, kernel, &mu, generations);
    let traces = replicate(&base, cfg.replications.unwrap_or(50))?;
    note_truncations(run, &traces);
    let mut table = Table::new("ends.csv", &["replication", "radius", "components", "final_population"]);
    let mut per_radius: Vec<Vec<f64>> = vec![Vec::new(); radii.len()];
    for (rep, (trace, cut)) in traces.iter().enumerate() {
        if cut.is_some() {
            continue;
        }
        let profile = ends_profile(kernel.graph(), trace, &radii)?;
        for (i, (r, c)) in radii.iter().zip(&profile.components).enumerate() {
            table.push(vec![rep.to_string(), r.to_string(), c.to_string(), trace.last.total.to_string()]);
            per_radius[i].push(*c as f64);
        }
    }
    run.tables.push(table);
    let medians: Vec<Value> = radii
        .iter()
        .zip(per_radius.iter_mut())
        .map(|(r, v)| json!({ "radius": r, "median_components": median(v) }))
        .collect();
    run.put("generations", generations)?;
    run.put("medians", medians)
}

fn fiber_run(cfg: &ExperimentConfig, kernel: &Kernel, run: &mut Run) -> Result<(), CliError> {
    let mu = run.offspring(cfg, kernel)?;
    let (factor, vertex) = match &cfg.fiber {
        Some(LineSpec::Fiber { factor, vertex }) => (*factor, vertex.clone()),
        _ => {
            let origin = kernel.origin();
            let v = origin
                .coordinate(0)
                .cloned()
                .ok_or_else(|| CliError::Config("fiber experiments need a product graph".into()))?;
            (1, v)
        }
    };
    let generations = cfg.generations.unwrap_or(50);
    let mut base = base_run(cfg, kernel, &mu, generations);
    base.retention = Retention::All;
    let traces = replicate(&base, cfg.replications.unwrap_or(20))?;
    note_truncations(run, &traces);
    let mut summary = Table::new("fiber.csv", &["replication", "hits", "last_hit"]);
    let mut hits = Table::new("fiber_hits.csv", &["replication", "generation"]);
    let mut last = Vec::new();
    for (rep, (trace, _)) in traces.iter().enumerate() {
        let stats = fiber_hit_stats(trace, factor - 1, &vertex)?;
        summary.push(vec![
            rep.to_string(),
            stats.hits.len().to_string(),
            stats.last_hit.map(|g| g.to_string()).unwrap_or_default(),
        ]);
        for g in &stats.hits {
            hits.push(vec![rep.to_string(), g.to_string()]);
        }
        if let Some(g) = stats.last_hit {
            last.push(f64::from(g));
        }
    }
    run.tables.extend([summary, hits]);
    run.put("fiber", LineSpec::Fiber { factor, vertex }.to_string())?;
    run.put("generations", generations)?;
    run.put("median_last_hit", median(&mut last))
}

/// Drift of `product(1/2: simple@1, 1/2: biasedline(p)@2)` on `product(t(3), z)`.
fn line_drift(kernel: &Kernel) -> Option<Rational64> {
    let half = Rational64::new(1, 2);
    let tree = GraphFamily::hom_tree(3).ok()?;
    match (kernel.spec(), kernel.graph().factors()) {
        (KernelSpec::Product(parts), Some([g1, GraphFamily::Line])) if *g1 == tree => match parts.as_slice() {
            [(KernelSpec::Simple, a), (KernelSpec::BiasedLine { right }, b)] if *a == half && *b == half => Some(*right),
            _ => None,
        },
        _ => None,
    }
}

fn gw_run(cfg: &ExperimentConfig, kernel: &Kernel, run: &mut Run) -> Result<(), CliError> {
    let mu = run.offspring(cfg, kernel)?;
    let line = match cfg.line.clone() {
        Some(LineSpec::Fiber { factor, vertex }) => EmbeddedLine::Fiber {
            factor: factor - 1,
            vertex,
        },
        Some(LineSpec::SpineFiber {
            factor,
            vertex,
            spine_factor,
        }) => EmbeddedLine::SpineFiber {
            factor: factor - 1,
            vertex,
            spine_factor: spine_factor - 1,
        },
        None => EmbeddedLine::Fiber {
            factor: 0,
            vertex: kernel
                .origin()
                .coordinate(0)
                .cloned()
                .unwrap_or_else(|| VertexAddr::word(&[])),
        },
    };
    let lag = match cfg.lag {
        Some(k) => k,
        None => {
            let p = line_drift(kernel).ok_or_else(|| {
                CliError::Config("`lag` must be set unless the kernel is product(1/2: simple@1, 1/2: biasedline(p)@2)".into())
            })?;
            let series = return_series(&lazy_tree_kernel(), cfg.horizon.unwrap_or(1500), ArithmeticMode::Float)?;
            let report = min_supercritical_lag(p, &series)?;
            run.put("lag_report", &report)?;
            report.k
        }
    };
    let mut gw = GwConfig::new(kernel.clone(), mu, line, lag, cfg.replications.unwrap_or(1000) as usize, cfg.seed);
    if let Some(g) = cfg.generations {
        gw.generations = g;
    }
    if let Some(k) = cfg.observed_lags {
        gw.observed_lags = k;
    }
    if let Some(cap) = cfg.population_cap {
        gw.population_cap = cap;
    }
    let stats = embedded_gw_stats(&gw)?;
    let mut table = Table::new("gw.csv", &["replication", "j", "y"]);
    for (rep, seq) in stats.sequences.iter().enumerate() {
        for (j, y) in seq.iter().enumerate() {
            table.push(vec![rep.to_string(), j.to_string(), y.to_string()]);
        }
    }
    run.tables.push(table);
    let Value::Object(mut summary) = serde_json::to_value(&stats)? else {
        unreachable!("stats serialize to objects")
    };
    summary.remove("sequences");
    run.aggregate.extend(summary);
    Ok(())
}
