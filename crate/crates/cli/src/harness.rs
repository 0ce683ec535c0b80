//! Strategy matrices over datasets, per-run records and grouped reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use qsat_core::handoff::ControllerError;
use qsat_core::ossp::{decode_schedule, encode_crawford_baker, lower_bound, validate_schedule};
use qsat_core::{
    Controller, ControllerStats, GraphMode, Hyper, OsspInstance, PolicyWeights, QModel, Restarts, Solver,
    SolverConfig, SolverStats, Status, Strategy,
};

use crate::dataset::{DatasetSpec, Instance, Problem};
use crate::HarnessError;

pub const CSV_HEADER: &str = "instance,strategy,trial,status,wall_time_s,decisions,conflicts,propagations,model_invocations,model_decisions,released_at";

#[derive(Clone, Debug)]
pub struct BenchSpec {
    pub datasets: Vec<DatasetSpec>,
    pub strategies: Vec<Strategy>,
    /// Network for variable-clause observations.
    pub sat_weights: Option<Arc<PolicyWeights>>,
    /// Network for operation-graph observations.
    pub ossp_weights: Option<Arc<PolicyWeights>>,
    pub trials: u32,
    pub timeout: Duration,
    pub restarts: bool,
}

impl BenchSpec {
    pub fn new(datasets: Vec<DatasetSpec>, strategies: Vec<Strategy>) -> Self {
        BenchSpec {
            datasets,
            strategies,
            sat_weights: None,
            ossp_weights: None,
            trials: 3,
            timeout: Duration::from_secs(60),
            restarts: true,
        }
    }

    fn solver_config(&self, deadline: Instant) -> SolverConfig {
        SolverConfig {
            restarts: if self.restarts {
                SolverConfig::default().restarts
            } else {
                Restarts::Off
            },
            deadline: Some(deadline),
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum RunStatus {
    Sat,
    Unsat,
    Timeout,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Sat => "SAT",
            RunStatus::Unsat => "UNSAT",
            RunStatus::Timeout => "TIMEOUT",
        }
    }

    fn from_status(s: Status) -> Self {
        match s {
            Status::Sat => RunStatus::Sat,
            Status::Unsat => RunStatus::Unsat,
            Status::Unknown => RunStatus::Timeout,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    /// Dataset label; groups rows in the table, not part of the CSV.
    pub dataset: String,
    pub instance: String,
    pub strategy: String,
    /// 1-based.
    pub trial: u32,
    pub status: RunStatus,
    pub wall_time_s: f64,
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
    pub model_invocations: u64,
    pub model_decisions: u64,
    pub released_at: Option<u64>,
    /// Open-shop runs: status of each probed horizon, in probe order.
    pub horizons: Vec<(u32, RunStatus)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupRow {
    pub dataset: String,
    pub strategy: String,
    pub runs: usize,
    pub completed: usize,
    pub timeouts: usize,
    /// Over completed runs; `None` when every run timed out.
    pub mean_time_s: Option<f64>,
    pub mean_decisions: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub records: Vec<RunRecord>,
    pub groups: Vec<GroupRow>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Table,
}

struct Task<'a> {
    label: &'a str,
    instance: &'a Instance,
    strategy: Strategy,
    trial: u32,
}

/// Checks that `w` reads the observation layout of `ossp` or SAT graphs.
pub fn check_weights(w: &PolicyWeights, ossp: bool) -> Result<(), HarnessError> {
    let want = if ossp { Hyper::ossp() } else { Hyper::sat() };
    let h = &w.hyper;
    let shape = |x: &Hyper| (x.node_in, x.edge_in, x.global_in, x.node_out, x.edge_out);
    if shape(h) != shape(&want) {
        return Err(HarnessError::Weights(format!(
            "weights expect (node_in, edge_in, global_in, node_out, edge_out) = {:?}, {} graphs need {:?}",
            shape(h),
            if ossp { "operation" } else { "variable-clause" },
            shape(&want)
        )));
    }
    Ok(())
}

fn model_for(spec: &BenchSpec, strategy: Strategy, ossp: bool) -> Option<Arc<dyn QModel>> {
    if !strategy.uses_model() {
        return None;
    }
    let w = if ossp { &spec.ossp_weights } else { &spec.sat_weights };
    w.clone().map(|w| w as Arc<dyn QModel>)
}

fn add_stats(total: &mut SolverStats, s: &SolverStats) {
    total.decisions += s.decisions;
    total.conflicts += s.conflicts;
    total.propagations += s.propagations;
}

/// Status, solve seconds, summed solver and controller counters, probes.
type RunOutcome = (RunStatus, f64, SolverStats, ControllerStats, Vec<(u32, RunStatus)>);

fn run_sat(
    spec: &BenchSpec,
    formula: &qsat_core::Formula,
    strategy: Strategy,
) -> Result<RunOutcome, HarnessError> {
    let mut controller = Controller::new(strategy, model_for(spec, strategy, false), GraphMode::Sat)?;
    let start = Instant::now();
    let mut solver = Solver::new(formula, spec.solver_config(start + spec.timeout))?;
    let result = solver.solve(&mut controller)?;
    let elapsed = start.elapsed().as_secs_f64();
    if let Some(m) = &result.model {
        if !formula.is_satisfied_by(m) {
            return Err(HarnessError::Internal("model does not satisfy formula".into()));
        }
    }
    let stats = controller.finish(&result);
    Ok((RunStatus::from_status(result.status), elapsed, result.stats, stats, Vec::new()))
}

/// Linear probe upward from the lower bound until a horizon is SAT; every
/// probe gets a fresh controller and the remaining time budget. Counters
/// are summed over probes; `released_at` is that of the last probe.
fn run_ossp(
    spec: &BenchSpec,
    instance: &Arc<OsspInstance>,
    strategy: Strategy,
) -> Result<RunOutcome, HarnessError> {
    let model = model_for(spec, strategy, true);
    let mut total = SolverStats::default();
    let mut ctl_total = ControllerStats::default();
    let mut horizons = Vec::new();
    let mut elapsed = 0.0;
    let deadline = Instant::now() + spec.timeout;
    let mut horizon = lower_bound(instance);
    loop {
        let (formula, varmap) = encode_crawford_baker(instance, horizon);
        let mode = GraphMode::Ossp {
            instance: instance.clone(),
            varmap: Arc::new(varmap.clone()),
        };
        let mut controller = Controller::new(strategy, model.clone(), mode)?;
        let start = Instant::now();
        let mut solver = Solver::new(&formula, spec.solver_config(deadline))?;
        let result = solver.solve(&mut controller)?;
        elapsed += start.elapsed().as_secs_f64();
        add_stats(&mut total, &result.stats);
        let c = controller.finish(&result);
        ctl_total.released_at = c.released_at;
        ctl_total.model_invocations += c.model_invocations;
        ctl_total.model_decisions += c.model_decisions;
        ctl_total.vsids_decisions += c.vsids_decisions;
        ctl_total.pool_skips += c.pool_skips;
        let status = RunStatus::from_status(result.status);
        horizons.push((horizon, status));
        match status {
            RunStatus::Sat => {
                let schedule = decode_schedule(result.model.as_deref().unwrap_or_default(), &varmap)
                    .map_err(|e| HarnessError::Internal(e.to_string()))?;
                if !validate_schedule(&schedule, instance, horizon) {
                    return Err(HarnessError::Internal("decoded schedule is invalid".into()));
                }
                return Ok((status, elapsed, total, ctl_total, horizons));
            }
            RunStatus::Timeout => return Ok((status, elapsed, total, ctl_total, horizons)),
            RunStatus::Unsat if horizon >= instance.total_time() => {
                return Err(HarnessError::Internal("no feasible horizon up to total time".into()));
            }
            RunStatus::Unsat => horizon += 1,
        }
    }
}

fn run_task(spec: &BenchSpec, task: &Task<'_>) -> Result<RunRecord, HarnessError> {
    let (status, wall, stats, ctl, horizons) = match &task.instance.problem {
        Problem::Sat(f) => run_sat(spec, f, task.strategy)?,
        Problem::Ossp(inst) => run_ossp(spec, inst, task.strategy)?,
    };
    Ok(RunRecord {
        dataset: task.label.to_string(),
        instance: task.instance.id.clone(),
        strategy: task.strategy.to_string(),
        trial: task.trial,
        status,
        wall_time_s: wall,
        decisions: stats.decisions,
        conflicts: stats.conflicts,
        propagations: stats.propagations,
        model_invocations: ctl.model_invocations,
        model_decisions: ctl.model_decisions,
        released_at: ctl.released_at,
        horizons,
    })
}

/// Runs every (instance, strategy, trial) in parallel; records come back in
/// (dataset, instance, strategy, trial) order.
pub fn run_benchmark(spec: &BenchSpec) -> Result<Report, HarnessError> {
    if spec.datasets.is_empty() {
        return Err(HarnessError::Spec("no datasets".into()));
    }
    if spec.strategies.is_empty() {
        return Err(HarnessError::Spec("no strategies".into()));
    }
    if spec.trials == 0 {
        return Err(HarnessError::Spec("trials must be >= 1".into()));
    }
    for (w, ossp) in [(&spec.sat_weights, false), (&spec.ossp_weights, true)] {
        if let Some(w) = w {
            check_weights(w, ossp)?;
        }
    }
    for ds in &spec.datasets {
        let model = if ds.is_ossp() { &spec.ossp_weights } else { &spec.sat_weights };
        for &s in &spec.strategies {
            let m = if s.uses_model() { model.clone().map(|w| w as Arc<dyn QModel>) } else { None };
            Controller::new(s, m, GraphMode::Sat)?;
        }
    }

    let labels: Vec<String> = spec.datasets.iter().map(|d| d.to_string()).collect();
    let loaded: Vec<Vec<Instance>> = spec
        .datasets
        .iter()
        .map(|d| d.load())
        .collect::<Result<_, _>>()?;
    let mut tasks = Vec::new();
    for (d, instances) in loaded.iter().enumerate() {
        for instance in instances {
            for &strategy in &spec.strategies {
                for trial in 1..=spec.trials {
                    tasks.push((
                        (d, instance.id.as_str(), strategy.to_string(), trial),
                        Task { label: &labels[d], instance, strategy, trial },
                    ));
                }
            }
        }
    }
    tasks.sort_by(|a, b| a.0.cmp(&b.0));
    let records: Vec<RunRecord> = tasks
        .par_iter()
        .map(|(_, t)| {
            log::debug!("{} {} trial {}", t.instance.id, t.strategy, t.trial);
            run_task(spec, t)
        })
        .collect::<Result<_, _>>()?;
    let groups = group(&records);
    Ok(Report { records, groups })
}

/// Groups by (dataset, strategy) in first-appearance order.
pub fn group(records: &[RunRecord]) -> Vec<GroupRow> {
    let mut order: Vec<(String, String)> = Vec::new();
    let mut acc: BTreeMap<(String, String), (usize, usize, f64, f64)> = BTreeMap::new();
    for r in records {
        let key = (r.dataset.clone(), r.strategy.clone());
        let e = acc.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            (0, 0, 0.0, 0.0)
        });
        e.0 += 1;
        if r.status != RunStatus::Timeout {
            e.1 += 1;
            e.2 += r.wall_time_s;
            e.3 += r.decisions as f64;
        }
    }
    order
        .into_iter()
        .map(|key| {
            let (runs, completed, time, decisions) = acc[&key];
            let mean = |x: f64| (completed > 0).then(|| x / completed as f64);
            GroupRow {
                dataset: key.0,
                strategy: key.1,
                runs,
                completed,
                timeouts: runs - completed,
                mean_time_s: mean(time),
                mean_decisions: mean(decisions),
            }
        })
        .collect()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn emit_report(records: &[RunRecord], format: Format) -> Result<String, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::EmptyReport);
    }
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str(CSV_HEADER);
            out.push('\n');
            for r in records {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{:.6},{},{},{},{},{},{}",
                    csv_field(&r.instance),
                    csv_field(&r.strategy),
                    r.trial,
                    r.status.as_str(),
                    r.wall_time_s,
                    r.decisions,
                    r.conflicts,
                    r.propagations,
                    r.model_invocations,
                    r.model_decisions,
                    r.released_at.map(|x| x.to_string()).unwrap_or_default(),
                );
            }
        }
        Format::Table => {
            let rows: Vec<[String; 6]> = group(records)
                .into_iter()
                .map(|g| {
                    let opt = |x: Option<f64>, p: usize| {
                        x.map_or_else(|| "-".to_string(), |v| format!("{v:.p$}"))
                    };
                    [
                        g.dataset,
                        g.strategy,
                        g.runs.to_string(),
                        g.timeouts.to_string(),
                        opt(g.mean_time_s, 4),
                        opt(g.mean_decisions, 1),
                    ]
                })
                .collect();
            let header = ["dataset", "strategy", "runs", "timeouts", "mean_time_s", "mean_decisions"];
            let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
            for row in &rows {
                for (w, c) in width.iter_mut().zip(row) {
                    *w = (*w).max(c.len());
                }
            }
            let line = |out: &mut String, cells: &[&str]| {
                for (i, c) in cells.iter().enumerate() {
                    if i < 2 {
                        let _ = write!(out, "{c:<w$}", w = width[i]);
                    } else {
                        let _ = write!(out, "{c:>w$}", w = width[i]);
                    }
                    out.push_str(if i + 1 == cells.len() { "\n" } else { "  " });
                }
            };
            line(&mut out, &header);
            for row in &rows {
                line(&mut out, &row.iter().map(String::as_str).collect::<Vec<_>>());
            }
            let probes: Vec<&RunRecord> = records.iter().filter(|r| !r.horizons.is_empty()).collect();
            if !probes.is_empty() {
                out.push_str("\nhorizon probes\n");
                for r in probes {
                    let hs: Vec<String> = r
                        .horizons
                        .iter()
                        .map(|(t, s)| format!("T={t}:{}", s.as_str()))
                        .collect();
                    let _ = writeln!(out, "{} {} #{}  {}", r.instance, r.strategy, r.trial, hs.join(" "));
                }
            }
        }
    }
    Ok(out)
}

impl From<ControllerError> for HarnessError {
    fn from(e: ControllerError) -> Self {
        HarnessError::Strategy(e.to_string())
    }
}
