//! Conflict-driven clause learning solver.
//!
//! Two watched literals per clause, 1UIP conflict analysis with
//! non-chronological backjumping, exponential VSIDS with phase saving, Luby
//! restarts and optional activity-based learned-clause deletion. Decisions
//! are delegated to a [`BranchingOracle`] until it answers
//! [`OracleDecision::Release`]; from then on VSIDS alone picks literals.

mod heap;
mod luby;

use std::collections::BTreeMap;
use std::time::Instant;

use thiserror::Error;

use crate::cnf::{Clause, Formula, Lit, Var};
use crate::rng::SplitMix64;
use heap::VarHeap;
pub use luby::luby;

const TRUE: i8 = 1;
const FALSE: i8 = -1;
const UNDEF: i8 = 0;

const VAR_RESCALE_LIMIT: f64 = 1e100;
const CLAUSE_RESCALE_LIMIT: f64 = 1e20;

/// Index of a clause in the solver's clause arena.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ClauseRef(u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Restarts {
    /// Restart after `base * luby(k)` conflicts, `k = 1, 2, ...`.
    Luby { base: u64 },
    Off,
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub restarts: Restarts,
    /// VSIDS decay factor in `(0, 1)`; the bump increment is divided by it
    /// after every conflict.
    pub var_decay: f64,
    /// Initial VSIDS bump increment.
    pub var_bump: f64,
    pub clause_deletion: bool,
    pub clause_decay: f64,
    /// Initial learned-clause cap as a fraction of the original clause count.
    pub learnt_size_factor: f64,
    /// Cap multiplier applied after every reduction.
    pub learnt_size_growth: f64,
    /// Default polarity is `false`; when set, unassigned-before variables get
    /// a random initial phase drawn from `seed`.
    pub random_polarity: bool,
    pub seed: u64,
    pub conflict_limit: Option<u64>,
    pub deadline: Option<Instant>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            restarts: Restarts::Luby { base: 100 },
            var_decay: 0.95,
            var_bump: 1.0,
            clause_deletion: false,
            clause_decay: 0.999,
            learnt_size_factor: 1.0 / 3.0,
            learnt_size_growth: 1.1,
            random_polarity: false,
            seed: 0,
            conflict_limit: None,
            deadline: None,
        }
    }
}

impl SolverConfig {
    pub fn without_restarts() -> Self {
        SolverConfig {
            restarts: Restarts::Off,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<(), SolveError> {
        if !(self.var_decay > 0.0 && self.var_decay < 1.0) {
            return Err(SolveError::InvalidConfig(format!(
                "var_decay {} not in (0, 1)",
                self.var_decay
            )));
        }
        if !(self.clause_decay > 0.0 && self.clause_decay < 1.0) {
            return Err(SolveError::InvalidConfig(format!(
                "clause_decay {} not in (0, 1)",
                self.clause_decay
            )));
        }
        if !(self.var_bump > 0.0) {
            return Err(SolveError::InvalidConfig("var_bump must be positive".into()));
        }
        if let Restarts::Luby { base: 0 } = self.restarts {
            return Err(SolveError::InvalidConfig("luby base must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Sat,
    Unsat,
    /// Conflict limit or deadline reached first.
    Unknown,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub decisions: u64,
    pub oracle_decisions: u64,
    pub vsids_decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub restarts: u64,
    pub model_invocations: u64,
    pub learned_clauses: u64,
    pub deleted_clauses: u64,
}

impl SolverStats {
    /// Flat name → counter view for reporting.
    pub fn to_map(&self) -> BTreeMap<&'static str, u64> {
        BTreeMap::from([
            ("decisions", self.decisions),
            ("oracle_decisions", self.oracle_decisions),
            ("vsids_decisions", self.vsids_decisions),
            ("propagations", self.propagations),
            ("conflicts", self.conflicts),
            ("restarts", self.restarts),
            ("model_invocations", self.model_invocations),
            ("learned_clauses", self.learned_clauses),
            ("deleted_clauses", self.deleted_clauses),
        ])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub status: Status,
    /// Present iff `status == Sat`; indexed by variable.
    pub model: Option<Vec<bool>>,
    pub stats: SolverStats,
}

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("oracle chose literal {literal}, whose variable is already assigned")]
    OracleAssignedLiteral { literal: i32 },
    #[error("oracle chose literal {literal}, outside the formula's {num_vars} variables")]
    OracleUnknownLiteral { literal: i32, num_vars: usize },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown variable index {0}")]
    UnknownVariable(usize),
    #[error("every variable is assigned")]
    AllAssigned,
    #[error("a reduced clause is empty: resolve the pending conflict first")]
    PendingConflict,
    #[error("branching oracle failed: {0}")]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{0}")]
pub struct OracleError(pub String);

/// What the branching oracle wants at a decision point.
#[derive(Clone, Debug, PartialEq)]
pub enum OracleDecision {
    Decide(Lit),
    /// Hand control to VSIDS for the rest of the solve. The listed
    /// activities are installed before the first VSIDS pick.
    Release { activity_seed: Vec<(Var, f64)> },
}

impl OracleDecision {
    pub fn release() -> Self {
        OracleDecision::Release {
            activity_seed: Vec::new(),
        }
    }
}

/// Consulted only at decision points, never during propagation or analysis.
pub trait BranchingOracle {
    fn decide(&mut self, solver: &Solver) -> Result<OracleDecision, OracleError>;

    /// Network evaluations performed so far, for statistics.
    fn model_invocations(&self) -> u64 {
        0
    }
}

/// Releases immediately: plain VSIDS.
#[derive(Clone, Copy, Debug, Default)]
pub struct VsidsOnly;

impl BranchingOracle for VsidsOnly {
    fn decide(&mut self, _solver: &Solver) -> Result<OracleDecision, OracleError> {
        Ok(OracleDecision::release())
    }
}

/// The solver-side view of an MDP state: unassigned variables and the
/// reduced unsatisfied clauses (originals first, then learned clauses).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MdpState {
    pub variables: Vec<Var>,
    pub clauses: Vec<Vec<Lit>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Propagation {
    NoConflict,
    Conflict(ClauseRef),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConflictAnalysis {
    /// Asserting 1UIP clause; `clause[0]` is the literal from the conflict
    /// level.
    Learned {
        clause: Vec<Lit>,
        backjump_level: u32,
    },
    Unsat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrailEntry {
    pub lit: Lit,
    pub level: u32,
    /// `None` for decisions and level-0 facts.
    pub reason: Option<ClauseRef>,
}

#[derive(Clone, Debug)]
struct ClauseData {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

#[derive(Clone, Copy, Debug)]
struct Watcher {
    cref: u32,
    blocker: Lit,
}

pub struct Solver {
    num_vars: usize,
    config: SolverConfig,
    clauses: Vec<ClauseData>,
    watches: Vec<Vec<Watcher>>,
    /// Per-literal truth value.
    lit_val: Vec<i8>,
    levels: Vec<u32>,
    reasons: Vec<Option<ClauseRef>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    heap: VarHeap,
    phase: Vec<bool>,
    seen: Vec<bool>,
    learned_units: Vec<Lit>,
    max_learnts: f64,
    num_learnts: usize,
    /// False once a level-0 contradiction is known.
    ok: bool,
    released: bool,
    stats: SolverStats,
}

impl Solver {
    pub fn new(formula: &Formula, config: SolverConfig) -> Result<Solver, SolveError> {
        config.validate()?;
        let n = formula.num_vars();
        let activity = vec![0.0; n];
        let mut phase = vec![false; n];
        if config.random_polarity {
            let mut rng = SplitMix64::new(config.seed);
            for p in phase.iter_mut() {
                *p = rng.bernoulli(0.5);
            }
        }
        let mut s = Solver {
            num_vars: n,
            heap: VarHeap::with_all(n, &activity),
            max_learnts: (formula.num_clauses() as f64 * config.learnt_size_factor).max(100.0),
            var_inc: config.var_bump,
            config,
            clauses: Vec::with_capacity(formula.num_clauses()),
            watches: vec![Vec::new(); 2 * n],
            lit_val: vec![UNDEF; 2 * n],
            levels: vec![0; n],
            reasons: vec![None; n],
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            activity,
            cla_inc: 1.0,
            phase,
            seen: vec![false; n],
            learned_units: Vec::new(),
            num_learnts: 0,
            ok: true,
            released: false,
            stats: SolverStats::default(),
        };
        for clause in formula.clauses() {
            s.add_original(clause);
        }
        Ok(s)
    }

    fn add_original(&mut self, clause: &Clause) {
        match clause.lits() {
            [] => self.ok = false,
            [unit] => match self.lit_val[unit.code()] {
                TRUE => {}
                FALSE => self.ok = false,
                _ => self.enqueue(*unit, None),
            },
            lits => {
                self.attach(lits.to_vec(), false);
            }
        }
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool) -> ClauseRef {
        debug_assert!(lits.len() >= 2);
        let cref = self.clauses.len() as u32;
        self.watches[lits[0].code()].push(Watcher {
            cref,
            blocker: lits[1],
        });
        self.watches[lits[1].code()].push(Watcher {
            cref,
            blocker: lits[0],
        });
        self.clauses.push(ClauseData {
            lits,
            learnt,
            deleted: false,
            activity: 0.0,
        });
        if learnt {
            self.num_learnts += 1;
        }
        ClauseRef(cref)
    }

    // ----- read-only view -------------------------------------------------

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn value(&self, var: Var) -> Option<bool> {
        match self.lit_val[var.pos().code()] {
            TRUE => Some(true),
            FALSE => Some(false),
            _ => None,
        }
    }

    pub fn lit_value(&self, lit: Lit) -> Option<bool> {
        match self.lit_val[lit.code()] {
            TRUE => Some(true),
            FALSE => Some(false),
            _ => None,
        }
    }

    pub fn is_assigned(&self, var: Var) -> bool {
        self.lit_val[var.pos().code()] != UNDEF
    }

    pub fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    pub fn stats(&self) -> &SolverStats {
        &self.stats
    }

    pub fn activity(&self, var: Var) -> f64 {
        self.activity[var.index()]
    }

    pub fn is_released(&self) -> bool {
        self.released
    }

    pub fn trail(&self) -> impl Iterator<Item = TrailEntry> + '_ {
        self.trail.iter().map(|&lit| TrailEntry {
            lit,
            level: self.levels[lit.var().index()],
            reason: self.reasons[lit.var().index()],
        })
    }

    pub fn clause_lits(&self, cref: ClauseRef) -> &[Lit] {
        &self.clauses[cref.0 as usize].lits
    }

    /// Live learned clauses, including learned units.
    pub fn learned_clauses(&self) -> Vec<Vec<Lit>> {
        self.learned_units
            .iter()
            .map(|&l| vec![l])
            .chain(
                self.clauses
                    .iter()
                    .filter(|c| c.learnt && !c.deleted)
                    .map(|c| c.lits.clone()),
            )
            .collect()
    }

    pub fn unassigned_vars(&self) -> impl Iterator<Item = Var> + '_ {
        (0..self.num_vars as u32)
            .map(Var)
            .filter(|&v| !self.is_assigned(v))
    }

    /// Reduced view of the current state: satisfied clauses dropped, false
    /// literals removed, learned clauses included.
    pub fn extract_mdp_state(&self) -> Result<MdpState, SolveError> {
        let variables: Vec<Var> = self.unassigned_vars().collect();
        let mut clauses = Vec::new();
        for c in self.clauses.iter().filter(|c| !c.deleted) {
            if c.lits.iter().any(|l| self.lit_val[l.code()] == TRUE) {
                continue;
            }
            let reduced: Vec<Lit> = c
                .lits
                .iter()
                .copied()
                .filter(|l| self.lit_val[l.code()] == UNDEF)
                .collect();
            if reduced.is_empty() {
                return Err(SolveError::PendingConflict);
            }
            clauses.push(reduced);
        }
        Ok(MdpState { variables, clauses })
    }

    // ----- core operations ----------------------------------------------

    fn enqueue(&mut self, lit: Lit, reason: Option<ClauseRef>) {
        debug_assert_eq!(self.lit_val[lit.code()], UNDEF);
        self.lit_val[lit.code()] = TRUE;
        self.lit_val[(!lit).code()] = FALSE;
        let v = lit.var().index();
        self.levels[v] = self.decision_level();
        self.reasons[v] = reason;
        self.trail.push(lit);
    }

    /// Opens a new decision level and assigns `lit` as its decision.
    pub fn decide(&mut self, lit: Lit) -> Result<(), SolveError> {
        if lit.var().index() >= self.num_vars {
            return Err(SolveError::OracleUnknownLiteral {
                literal: lit.to_dimacs(),
                num_vars: self.num_vars,
            });
        }
        if self.is_assigned(lit.var()) {
            return Err(SolveError::OracleAssignedLiteral {
                literal: lit.to_dimacs(),
            });
        }
        self.trail_lim.push(self.trail.len());
        self.enqueue(lit, None);
        Ok(())
    }

    /// Boolean constraint propagation to fixpoint over the watch lists.
    pub fn unit_propagate(&mut self) -> Propagation {
        if !self.ok && self.decision_level() == 0 {
            // A contradiction found while loading; report it as a conflict on
            // any clause is impossible, so expose it via `Unsat` in analysis.
            return Propagation::Conflict(ClauseRef(u32::MAX));
        }
        let result = match self.propagate() {
            Some(c) => Propagation::Conflict(c),
            None => Propagation::NoConflict,
        };
        self.debug_check_trail();
        result
    }

    fn propagate(&mut self) -> Option<ClauseRef> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let (mut i, mut j) = (0, 0);
            let mut conflict = None;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.lit_val[w.blocker.code()] == TRUE {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let lits = &mut self.clauses[w.cref as usize].lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                let watcher = Watcher {
                    cref: w.cref,
                    blocker: first,
                };
                if first != w.blocker && self.lit_val[first.code()] == TRUE {
                    ws[j] = watcher;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..lits.len() {
                    if self.lit_val[lits[k].code()] != FALSE {
                        lits.swap(1, k);
                        self.watches[lits[1].code()].push(watcher);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = watcher;
                j += 1;
                if self.lit_val[first.code()] == FALSE {
                    conflict = Some(ClauseRef(w.cref));
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, Some(ClauseRef(w.cref)));
                }
            }
            ws.truncate(j);
            self.watches[false_lit.code()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    /// First-UIP analysis of `conflict`. Bumps the activities of every
    /// variable seen on the conflict side.
    pub fn analyze_conflict(&mut self, conflict: ClauseRef) -> ConflictAnalysis {
        if self.decision_level() == 0 || conflict.0 == u32::MAX {
            return ConflictAnalysis::Unsat;
        }
        let level = self.decision_level();
        let mut learnt: Vec<Lit> = vec![Lit::from_code(0)];
        let mut path = 0usize;
        let mut pivot: Option<Lit> = None;
        let mut idx = self.trail.len();
        let mut confl = conflict.0 as usize;
        loop {
            if self.clauses[confl].learnt {
                self.bump_clause(confl);
            }
            let start = usize::from(pivot.is_some());
            for k in start..self.clauses[confl].lits.len() {
                let q = self.clauses[confl].lits[k];
                let v = q.var().index();
                if !self.seen[v] && self.levels[v] > 0 {
                    self.bump_var(v);
                    self.seen[v] = true;
                    if self.levels[v] >= level {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var().index()] {
                    break;
                }
            }
            let p = self.trail[idx];
            self.seen[p.var().index()] = false;
            path -= 1;
            pivot = Some(p);
            if path == 0 {
                break;
            }
            confl = self.reasons[p.var().index()]
                .expect("implied literal carries a reason")
                .0 as usize;
        }
        learnt[0] = !pivot.expect("at least one resolution step");

        // Drop literals whose reason is subsumed by the rest of the clause.
        let full = learnt.clone();
        let mut kept = 1;
        for i in 1..learnt.len() {
            let l = learnt[i];
            let redundant = match self.reasons[l.var().index()] {
                None => false,
                Some(r) => self.clauses[r.0 as usize].lits[1..].iter().all(|q| {
                    let v = q.var().index();
                    self.seen[v] || self.levels[v] == 0
                }),
            };
            if !redundant {
                learnt[kept] = l;
                kept += 1;
            }
        }
        learnt.truncate(kept);
        for l in &full {
            self.seen[l.var().index()] = false;
        }

        let backjump_level = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.levels[learnt[i].var().index()] > self.levels[learnt[max_i].var().index()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            self.levels[learnt[1].var().index()]
        };
        ConflictAnalysis::Learned {
            clause: learnt,
            backjump_level,
        }
    }

    /// Undoes every assignment above `level`, saving phases.
    pub fn backjump(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for k in (lim..self.trail.len()).rev() {
            let lit = self.trail[k];
            let v = lit.var().index();
            self.lit_val[lit.code()] = UNDEF;
            self.lit_val[(!lit).code()] = UNDEF;
            self.reasons[v] = None;
            self.phase[v] = lit.is_positive();
            self.heap.insert(v as u32, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level as usize);
        self.qhead = lim;
        self.debug_check_trail();
    }

    /// Adds a learned clause after backjumping and asserts its first literal.
    pub fn learn(&mut self, clause: Vec<Lit>) {
        self.stats.learned_clauses += 1;
        if clause.len() == 1 {
            debug_assert_eq!(self.decision_level(), 0);
            self.learned_units.push(clause[0]);
            self.enqueue(clause[0], None);
        } else {
            let first = clause[0];
            let cref = self.attach(clause, true);
            self.bump_clause(cref.0 as usize);
            self.enqueue(first, Some(cref));
        }
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > VAR_RESCALE_LIMIT {
            for a in self.activity.iter_mut() {
                *a *= 1.0 / VAR_RESCALE_LIMIT;
            }
            self.var_inc *= 1.0 / VAR_RESCALE_LIMIT;
        }
        self.heap.increased(v as u32, &self.activity);
    }

    fn decay_activities(&mut self) {
        self.var_inc /= self.config.var_decay;
        if self.var_inc > VAR_RESCALE_LIMIT {
            for a in self.activity.iter_mut() {
                *a *= 1.0 / VAR_RESCALE_LIMIT;
            }
            self.var_inc *= 1.0 / VAR_RESCALE_LIMIT;
        }
        self.cla_inc /= self.config.clause_decay;
    }

    fn bump_clause(&mut self, c: usize) {
        self.clauses[c].activity += self.cla_inc;
        if self.clauses[c].activity > CLAUSE_RESCALE_LIMIT {
            for cl in self.clauses.iter_mut().filter(|cl| cl.learnt) {
                cl.activity *= 1.0 / CLAUSE_RESCALE_LIMIT;
            }
            self.cla_inc *= 1.0 / CLAUSE_RESCALE_LIMIT;
        }
    }

    /// Unassigned variable of maximal activity (lowest index on ties), with
    /// its saved phase.
    pub fn vsids_pick(&mut self) -> Result<Lit, SolveError> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if !self.is_assigned(Var(v)) {
                // Stays eligible until actually assigned.
                self.heap.insert(v, &self.activity);
                return Ok(Var(v).lit(self.phase[v as usize]));
            }
        }
        Err(SolveError::AllAssigned)
    }

    /// Overwrites activities; later bumps and decays proceed as usual.
    pub fn seed_activities(&mut self, scores: &[(Var, f64)]) -> Result<(), SolveError> {
        if let Some((v, _)) = scores.iter().find(|(v, _)| v.index() >= self.num_vars) {
            return Err(SolveError::UnknownVariable(v.index()));
        }
        if scores.is_empty() {
            return Ok(());
        }
        for &(v, s) in scores {
            self.activity[v.index()] = s;
        }
        self.heap.rebuild(&self.activity);
        Ok(())
    }

    fn reduce_db(&mut self) {
        let mut candidates: Vec<usize> = (0..self.clauses.len())
            .filter(|&i| {
                let c = &self.clauses[i];
                c.learnt && !c.deleted && c.lits.len() > 2 && !self.is_locked(i)
            })
            .collect();
        candidates.sort_by(|&a, &b| {
            self.clauses[a]
                .activity
                .total_cmp(&self.clauses[b].activity)
                .then(a.cmp(&b))
        });
        let remove = candidates.len() / 2;
        for &i in &candidates[..remove] {
            self.clauses[i].deleted = true;
            self.clauses[i].lits.shrink_to_fit();
            self.num_learnts -= 1;
            self.stats.deleted_clauses += 1;
        }
        if remove > 0 {
            let clauses = &self.clauses;
            for ws in self.watches.iter_mut() {
                ws.retain(|w| !clauses[w.cref as usize].deleted);
            }
        }
        self.max_learnts *= self.config.learnt_size_growth;
    }

    fn is_locked(&self, c: usize) -> bool {
        let first = self.clauses[c].lits[0];
        self.lit_val[first.code()] == TRUE
            && self.reasons[first.var().index()] == Some(ClauseRef(c as u32))
    }

    fn out_of_budget(&self) -> bool {
        if let Some(limit) = self.config.conflict_limit {
            if self.stats.conflicts >= limit {
                return true;
            }
        }
        matches!(self.config.deadline, Some(d) if Instant::now() >= d)
    }

    /// Runs the CDCL loop to completion (or until the configured budget).
    pub fn solve(&mut self, oracle: &mut dyn BranchingOracle) -> Result<SolveResult, SolveError> {
        let status = self.search(oracle)?;
        self.stats.model_invocations = oracle.model_invocations();
        let model = (status == Status::Sat).then(|| {
            (0..self.num_vars)
                .map(|v| self.lit_val[Var(v as u32).pos().code()] == TRUE)
                .collect::<Vec<bool>>()
        });
        if let Some(m) = &model {
            debug_assert!(self.clauses.iter().filter(|c| !c.learnt).all(|c| c
                .lits
                .iter()
                .any(|l| m[l.var().index()] == l.is_positive())));
        }
        Ok(SolveResult {
            status,
            model,
            stats: self.stats,
        })
    }

    fn search(&mut self, oracle: &mut dyn BranchingOracle) -> Result<Status, SolveError> {
        if !self.ok {
            return Ok(Status::Unsat);
        }
        let mut restart_round = 1u64;
        let mut conflicts_since_restart = 0u64;
        let mut ticks = 0u64;
        loop {
            match self.unit_propagate() {
                Propagation::Conflict(c) => {
                    self.stats.conflicts += 1;
                    conflicts_since_restart += 1;
                    match self.analyze_conflict(c) {
                        ConflictAnalysis::Unsat => {
                            self.ok = false;
                            return Ok(Status::Unsat);
                        }
                        ConflictAnalysis::Learned {
                            clause,
                            backjump_level,
                        } => {
                            self.backjump(backjump_level);
                            self.learn(clause);
                        }
                    }
                    self.decay_activities();
                    if self.out_of_budget() {
                        return Ok(Status::Unknown);
                    }
                }
                Propagation::NoConflict => {
                    if let Restarts::Luby { base } = self.config.restarts {
                        if conflicts_since_restart >= base * luby(restart_round) {
                            restart_round += 1;
                            conflicts_since_restart = 0;
                            self.stats.restarts += 1;
                            self.backjump(0);
                        }
                    }
                    if self.config.clause_deletion
                        && self.num_learnts as f64 >= self.max_learnts + self.trail.len() as f64
                    {
                        self.reduce_db();
                    }
                    if self.trail.len() == self.num_vars {
                        return Ok(Status::Sat);
                    }
                    ticks += 1;
                    if ticks % 64 == 0 && self.out_of_budget() {
                        return Ok(Status::Unknown);
                    }
                    let lit = self.pick_branch(oracle)?;
                    self.stats.decisions += 1;
                    self.decide(lit)?;
                }
            }
        }
    }

    fn pick_branch(&mut self, oracle: &mut dyn BranchingOracle) -> Result<Lit, SolveError> {
        if !self.released {
            match oracle.decide(self)? {
                OracleDecision::Decide(lit) => {
                    if lit.var().index() >= self.num_vars {
                        return Err(SolveError::OracleUnknownLiteral {
                            literal: lit.to_dimacs(),
                            num_vars: self.num_vars,
                        });
                    }
                    if self.is_assigned(lit.var()) {
                        return Err(SolveError::OracleAssignedLiteral {
                            literal: lit.to_dimacs(),
                        });
                    }
                    self.stats.oracle_decisions += 1;
                    return Ok(lit);
                }
                OracleDecision::Release { activity_seed } => {
                    self.released = true;
                    self.seed_activities(&activity_seed)?;
                }
            }
        }
        self.stats.vsids_decisions += 1;
        self.vsids_pick()
    }

    /// Trail consistency checks, active in debug builds on small instances.
    fn debug_check_trail(&self) {
        if !cfg!(debug_assertions) || self.num_vars > 300 {
            return;
        }
        let mut pos = vec![usize::MAX; self.num_vars];
        for (i, l) in self.trail.iter().enumerate() {
            let v = l.var().index();
            assert_eq!(pos[v], usize::MAX, "variable {v} twice on trail");
            pos[v] = i;
            assert_eq!(self.lit_val[l.code()], TRUE);
        }
        for (d, &lim) in self.trail_lim.iter().enumerate() {
            let lit = self.trail[lim];
            assert!(self.reasons[lit.var().index()].is_none());
            assert_eq!(self.levels[lit.var().index()] as usize, d + 1);
        }
        let decisions = self
            .trail
            .iter()
            .filter(|l| {
                let v = l.var().index();
                self.reasons[v].is_none() && self.levels[v] > 0
            })
            .count();
        assert_eq!(decisions, self.trail_lim.len());
        for (i, l) in self.trail.iter().enumerate().take(self.qhead) {
            if let Some(r) = self.reasons[l.var().index()] {
                let c = &self.clauses[r.0 as usize].lits;
                assert!(c.contains(l));
                for q in c.iter().filter(|q| *q != l) {
                    let qv = q.var().index();
                    assert_eq!(self.lit_val[q.code()], FALSE);
                    assert!(pos[qv] < i, "antecedent literal assigned later");
                }
            }
        }
    }
}

/// Solves `formula` from scratch.
pub fn solve(
    formula: &Formula,
    config: SolverConfig,
    oracle: &mut dyn BranchingOracle,
) -> Result<SolveResult, SolveError> {
    Solver::new(formula, config)?.solve(oracle)
}
