//! Open shop scheduling: instances, the Crawford-Baker CNF encoding,
//! schedule decoding and validation, makespan search, and the compact
//! operation graph used as a network observation.
//!
//! Time is 0-based: an operation started at `s` occupies `[s, s + p)`, and a
//! schedule fits horizon `T` when every operation completes by `T`.

mod encode;
mod graph;

use std::fmt::Write as _;

use thiserror::Error;

use crate::rng::SplitMix64;
use crate::solver::{BranchingOracle, SolveError, Solver, SolverConfig, Status, VsidsOnly};

pub use encode::{encode_crawford_baker, CbVarMap};
pub use graph::{
    apply_edge_action, build_op_graph, decided_pairs, derive_windows, OpGraph, OpLabel, Window,
};

#[derive(Debug, Error, PartialEq)]
pub enum OsspError {
    #[error("malformed instance: {0}")]
    Parse(String),
    #[error("processing times must be positive")]
    NonPositiveTime,
    #[error("model does not match the variable map: {0}")]
    InconsistentModel(String),
    #[error("operations {0} and {1} share neither job nor machine")]
    NoPrecedenceVar(usize, usize),
    #[error("solver returned without a verdict at horizon {0}")]
    Undecided(u32),
    #[error(transparent)]
    Solver(#[from] SolveError),
}

/// One job's work on one machine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OperationId {
    pub job: usize,
    pub machine: usize,
}

/// `jobs x machines` processing times, row-major by job.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OsspInstance {
    jobs: usize,
    machines: usize,
    p: Vec<u32>,
}

impl OsspInstance {
    pub fn new(p: Vec<Vec<u32>>) -> Result<Self, OsspError> {
        let jobs = p.len();
        let machines = p.first().map_or(0, Vec::len);
        if jobs == 0 || machines == 0 {
            return Err(OsspError::Parse("empty processing-time matrix".into()));
        }
        if p.iter().any(|row| row.len() != machines) {
            return Err(OsspError::Parse("ragged processing-time matrix".into()));
        }
        let flat: Vec<u32> = p.into_iter().flatten().collect();
        if flat.contains(&0) {
            return Err(OsspError::NonPositiveTime);
        }
        Ok(OsspInstance {
            jobs,
            machines,
            p: flat,
        })
    }

    pub fn jobs(&self) -> usize {
        self.jobs
    }

    pub fn machines(&self) -> usize {
        self.machines
    }

    pub fn num_ops(&self) -> usize {
        self.jobs * self.machines
    }

    /// Dense operation index `job * machines + machine`.
    pub fn op_index(&self, op: OperationId) -> usize {
        op.job * self.machines + op.machine
    }

    pub fn op_id(&self, index: usize) -> OperationId {
        OperationId {
            job: index / self.machines,
            machine: index % self.machines,
        }
    }

    /// Processing time of operation `index`.
    pub fn duration(&self, index: usize) -> u32 {
        self.p[index]
    }

    pub fn p(&self, job: usize, machine: usize) -> u32 {
        self.p[job * self.machines + machine]
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        self.p.chunks(self.machines).map(<[u32]>::to_vec).collect()
    }

    /// Operations that cannot overlap: same job or same machine.
    pub fn conflicting(&self, a: usize, b: usize) -> bool {
        if a == b {
            return false;
        }
        let (x, y) = (self.op_id(a), self.op_id(b));
        x.job == y.job || x.machine == y.machine
    }

    pub fn total_time(&self) -> u32 {
        self.p.iter().sum()
    }

    /// Parses `j m` followed by `j` rows of `m` integers.
    pub fn parse(text: &str) -> Result<Self, OsspError> {
        let mut nums = text.split_whitespace().map(|t| {
            t.parse::<u32>()
                .map_err(|_| OsspError::Parse(format!("bad integer `{t}`")))
        });
        let mut next = |what: &str| {
            nums.next()
                .unwrap_or_else(|| Err(OsspError::Parse(format!("missing {what}"))))
        };
        let jobs = next("job count")? as usize;
        let machines = next("machine count")? as usize;
        let mut rows = Vec::with_capacity(jobs);
        for _ in 0..jobs {
            let row = (0..machines)
                .map(|_| next("processing time"))
                .collect::<Result<Vec<u32>, _>>()?;
            rows.push(row);
        }
        if nums.next().is_some() {
            return Err(OsspError::Parse("trailing data".into()));
        }
        OsspInstance::new(rows)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.jobs, self.machines);
        for row in self.p.chunks(self.machines) {
            let line: Vec<String> = row.iter().map(u32::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Processing times uniform in `[1, 99]`, drawn row by row.
pub fn gen_taillard_like(jobs: usize, machines: usize, seed: u64) -> OsspInstance {
    assert!(jobs >= 1 && machines >= 1);
    let mut rng = SplitMix64::new(seed);
    let rows = (0..jobs)
        .map(|_| {
            (0..machines)
                .map(|_| rng.range_inclusive(1, 99) as u32)
                .collect()
        })
        .collect();
    OsspInstance::new(rows).expect("positive entries")
}

/// Largest job or machine load.
pub fn lower_bound(instance: &OsspInstance) -> u32 {
    let rows = instance.rows();
    let job_max = rows.iter().map(|r| r.iter().sum::<u32>()).max().unwrap_or(0);
    let machine_max = (0..instance.machines)
        .map(|m| rows.iter().map(|r| r[m]).sum::<u32>())
        .max()
        .unwrap_or(0);
    job_max.max(machine_max)
}

/// Start time per operation, indexed like [`OsspInstance::op_index`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub start: Vec<u32>,
}

impl Schedule {
    pub fn makespan(&self, instance: &OsspInstance) -> u32 {
        self.start
            .iter()
            .enumerate()
            .map(|(i, &s)| s + instance.duration(i))
            .max()
            .unwrap_or(0)
    }

    /// One `job machine start` line per operation.
    pub fn to_text(&self, instance: &OsspInstance) -> String {
        let mut out = String::new();
        for (i, s) in self.start.iter().enumerate() {
            let op = instance.op_id(i);
            let _ = writeln!(out, "{} {} {}", op.job, op.machine, s);
        }
        out
    }
}

/// True iff intervals are disjoint per job and per machine and every
/// operation completes by `horizon`.
pub fn validate_schedule(schedule: &Schedule, instance: &OsspInstance, horizon: u32) -> bool {
    let n = instance.num_ops();
    if schedule.start.len() != n {
        return false;
    }
    let end = |i: usize| schedule.start[i] + instance.duration(i);
    if (0..n).any(|i| end(i) > horizon) {
        return false;
    }
    for a in 0..n {
        for b in a + 1..n {
            if instance.conflicting(a, b) && schedule.start[a] < end(b) && schedule.start[b] < end(a)
            {
                return false;
            }
        }
    }
    true
}

/// Start of each operation: the greatest `t` with `sa(i, t)` true.
pub fn decode_schedule(model: &[bool], varmap: &CbVarMap) -> Result<Schedule, OsspError> {
    if model.len() != varmap.num_vars() {
        return Err(OsspError::InconsistentModel(format!(
            "model has {} variables, map expects {}",
            model.len(),
            varmap.num_vars()
        )));
    }
    let start = (0..varmap.num_ops())
        .map(|i| {
            (0..=varmap.horizon())
                .rev()
                .find(|&t| model[varmap.sa(i, t).index()])
                .ok_or_else(|| {
                    OsspError::InconsistentModel(format!("operation {i} has no start"))
                })
        })
        .collect::<Result<Vec<u32>, _>>()?;
    Ok(Schedule { start })
}

/// Outcome of one horizon probe.
#[derive(Clone, Debug, PartialEq)]
pub struct Probe {
    pub horizon: u32,
    pub status: Status,
    pub schedule: Option<Schedule>,
    pub stats: crate::solver::SolverStats,
}

/// Encodes at `horizon` and solves with `oracle`; SAT models are decoded.
pub fn probe_horizon(
    instance: &OsspInstance,
    horizon: u32,
    config: SolverConfig,
    oracle: &mut dyn BranchingOracle,
) -> Result<Probe, OsspError> {
    let (formula, varmap) = encode_crawford_baker(instance, horizon);
    let result = Solver::new(&formula, config)?.solve(oracle)?;
    let schedule = match &result.model {
        Some(m) => Some(decode_schedule(m, &varmap)?),
        None => None,
    };
    Ok(Probe {
        horizon,
        status: result.status,
        schedule,
        stats: result.stats,
    })
}

/// Least feasible horizon by binary search over
/// `[lower_bound, total processing time]`, with a validating schedule.
pub fn solve_makespan(
    instance: &OsspInstance,
    config: &SolverConfig,
) -> Result<(u32, Schedule), OsspError> {
    let mut lo = lower_bound(instance);
    let mut hi = instance.total_time();
    let mut best: Option<Schedule> = None;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        let probe = probe_horizon(instance, mid, config.clone(), &mut VsidsOnly)?;
        match probe.status {
            Status::Sat => {
                hi = mid;
                best = probe.schedule;
            }
            Status::Unsat => lo = mid + 1,
            Status::Unknown => return Err(OsspError::Undecided(mid)),
        }
    }
    let schedule = match best {
        Some(s) if s.makespan(instance) <= lo => s,
        _ => {
            let probe = probe_horizon(instance, lo, config.clone(), &mut VsidsOnly)?;
            probe.schedule.ok_or(OsspError::Undecided(lo))?
        }
    };
    debug_assert!(validate_schedule(&schedule, instance, lo));
    Ok((lo, schedule))
}
