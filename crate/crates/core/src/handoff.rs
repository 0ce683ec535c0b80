//! Branching oracles that start with the learned Q-function and hand
//! control to VSIDS.
//!
//! A [`Controller`] runs one [`Strategy`]:
//!
//! * `vsids`: release at the first decision.
//! * `fixed:n`: argmax-Q for the first `n` decisions, then release.
//! * `release:min=n,max=m`: argmax-Q with the release pseudo-action masked
//!   for the first `n` decisions; afterwards release as soon as the release
//!   head outscores every action, and unconditionally after `m` decisions.
//! * `pool:k=K,r=R`: each network run fills a queue with its top `K`
//!   actions, consumed across decisions while skipping entries invalidated
//!   since; release once the queue is empty after `R` runs.
//!
//! With `+qact`, the last Q-values seed VSIDS at release: each unassigned
//! variable `x` gets activity `-1 / max(Q(x), Q(¬x))`.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::cnf::{Lit, Var};
use crate::gnn::{build_ossp_graph, build_sat_graph, Action, GraphObservation, QModel, QOutput};
use crate::ossp::{
    apply_edge_action, build_op_graph, decided_pairs, derive_windows, CbVarMap, OsspInstance,
};
use crate::solver::{BranchingOracle, OracleDecision, OracleError, SolveResult, Solver};

/// Smallest magnitude allowed in the Q-activity denominator.
pub const Q_ACTIVITY_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrategyKind {
    PureVsids,
    FixedSteps { n: u64 },
    ReleaseAction { min_steps: u64, max_steps: u64 },
    ActionPool { pool_size: usize, max_model_runs: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Strategy {
    pub kind: StrategyKind,
    pub q_activity: bool,
}

impl Strategy {
    pub fn new(kind: StrategyKind) -> Self {
        Strategy {
            kind,
            q_activity: false,
        }
    }

    pub fn with_q_activity(self) -> Self {
        Strategy {
            q_activity: true,
            ..self
        }
    }

    pub fn uses_model(&self) -> bool {
        !matches!(self.kind, StrategyKind::PureVsids)
    }

    pub fn validate(&self) -> Result<(), ControllerError> {
        let bad = |m: &str| Err(ControllerError::InvalidStrategy(m.to_string()));
        match self.kind {
            StrategyKind::ActionPool { pool_size: 0, .. } => bad("pool size k must be >= 1"),
            StrategyKind::ActionPool {
                max_model_runs: 0, ..
            } => bad("model runs r must be >= 1"),
            StrategyKind::ReleaseAction {
                min_steps,
                max_steps,
            } if max_steps < min_steps => bad("release max must be >= min"),
            StrategyKind::PureVsids if self.q_activity => {
                bad("q-activity needs a model-based strategy")
            }
            _ => Ok(()),
        }
    }
}

/// Canonical descriptors: `vsids`, `fixed:3`, `release:min=2,max=4`,
/// `pool:k=20,r=2`, each optionally suffixed with `+qact`.
impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            StrategyKind::PureVsids => write!(f, "vsids")?,
            StrategyKind::FixedSteps { n } => write!(f, "fixed:{n}")?,
            StrategyKind::ReleaseAction {
                min_steps,
                max_steps,
            } => write!(f, "release:min={min_steps},max={max_steps}")?,
            StrategyKind::ActionPool {
                pool_size,
                max_model_runs,
            } => write!(f, "pool:k={pool_size},r={max_model_runs}")?,
        }
        if self.q_activity {
            write!(f, "+qact")?;
        }
        Ok(())
    }
}

impl FromStr for Strategy {
    type Err = ControllerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ControllerError::InvalidStrategy(s.to_string());
        let (body, q_activity) = match s.strip_suffix("+qact") {
            Some(b) => (b, true),
            None => (s, false),
        };
        let (name, args) = body.split_once(':').unwrap_or((body, ""));
        let mut kv = BTreeMap::new();
        let mut positional = Vec::new();
        for part in args.split(',').filter(|p| !p.is_empty()) {
            match part.split_once('=') {
                Some((k, v)) => {
                    kv.insert(k, v.parse::<u64>().map_err(|_| bad())?);
                }
                None => positional.push(part.parse::<u64>().map_err(|_| bad())?),
            }
        }
        let kind = match (name, positional.as_slice()) {
            ("vsids", []) if kv.is_empty() => StrategyKind::PureVsids,
            ("fixed", [n]) if kv.is_empty() => StrategyKind::FixedSteps { n: *n },
            ("release", pos) if pos.len() <= 1 => {
                let min_steps = pos.first().copied().or(kv.get("min").copied()).ok_or_else(bad)?;
                let max_steps = kv.get("max").copied().unwrap_or(2 * min_steps);
                StrategyKind::ReleaseAction {
                    min_steps,
                    max_steps,
                }
            }
            ("pool", []) => StrategyKind::ActionPool {
                pool_size: *kv.get("k").ok_or_else(bad)? as usize,
                max_model_runs: kv.get("r").copied().unwrap_or(1),
            },
            _ => return Err(bad()),
        };
        let strategy = Strategy { kind, q_activity };
        strategy.validate()?;
        Ok(strategy)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ControllerError {
    #[error("invalid strategy `{0}`")]
    InvalidStrategy(String),
    #[error("strategy {0} needs network weights")]
    MissingWeights(String),
    #[error("strategy {0} needs a network with a release head")]
    MissingReleaseHead(String),
}

/// Which observation the network sees.
#[derive(Clone, Debug)]
pub enum GraphMode {
    /// Variable-clause graph of the solver's reduced formula.
    Sat,
    /// Operation graph of an open-shop instance encoded with `varmap`.
    Ossp {
        instance: Arc<OsspInstance>,
        varmap: Arc<CbVarMap>,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ControllerStats {
    pub model_invocations: u64,
    pub model_decisions: u64,
    /// Filled in by [`Controller::finish`].
    pub vsids_decisions: u64,
    /// 1-based index of the first decision not taken by the model.
    pub released_at: Option<u64>,
    pub pool_skips: u64,
}

pub struct Controller {
    strategy: Strategy,
    model: Option<Arc<dyn QModel>>,
    mode: GraphMode,
    pool: VecDeque<Action>,
    last_q: Option<QOutput>,
    stats: ControllerStats,
    released: bool,
}

impl Controller {
    pub fn new(
        strategy: Strategy,
        model: Option<Arc<dyn QModel>>,
        mode: GraphMode,
    ) -> Result<Self, ControllerError> {
        strategy.validate()?;
        if strategy.uses_model() {
            let Some(m) = &model else {
                return Err(ControllerError::MissingWeights(strategy.to_string()));
            };
            if matches!(strategy.kind, StrategyKind::ReleaseAction { .. }) && !m.has_release_head() {
                return Err(ControllerError::MissingReleaseHead(strategy.to_string()));
            }
        }
        Ok(Controller {
            strategy,
            model,
            mode,
            pool: VecDeque::new(),
            last_q: None,
            stats: ControllerStats::default(),
            released: false,
        })
    }

    pub fn stats(&self) -> ControllerStats {
        self.stats
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn last_q(&self) -> Option<&QOutput> {
        self.last_q.as_ref()
    }

    /// Copies the VSIDS decision count from the finished solve.
    pub fn finish(&mut self, result: &SolveResult) -> ControllerStats {
        self.stats.vsids_decisions = result.stats.vsids_decisions;
        self.stats
    }

    pub fn observe(&self, solver: &Solver) -> Result<GraphObservation, OracleError> {
        match &self.mode {
            GraphMode::Sat => {
                let state = solver
                    .extract_mdp_state()
                    .map_err(|e| OracleError(e.to_string()))?;
                Ok(build_sat_graph(&state))
            }
            GraphMode::Ossp { instance, varmap } => {
                let value = |v: Var| solver.value(v);
                let windows = derive_windows(&value, varmap);
                let decided = decided_pairs(&value, varmap);
                let graph = build_op_graph(instance, varmap.horizon(), &decided, &windows);
                Ok(build_ossp_graph(&graph))
            }
        }
    }

    fn action_lit(&self, action: Action) -> Option<Lit> {
        match (action, &self.mode) {
            (Action::Literal(l), _) => Some(l),
            (Action::Edge(i, j), GraphMode::Ossp { varmap, .. }) => apply_edge_action((i, j), varmap).ok(),
            (Action::Edge(..), GraphMode::Sat) => None,
        }
    }

    fn still_valid(&self, action: Action, solver: &Solver) -> bool {
        match (action, &self.mode) {
            (Action::Literal(l), _) => !solver.is_assigned(l.var()),
            (Action::Edge(i, j), GraphMode::Ossp { varmap, .. }) => {
                [varmap.pr(i, j), varmap.pr(j, i)]
                    .into_iter()
                    .all(|v| v.is_some_and(|v| !solver.is_assigned(v)))
            }
            (Action::Edge(..), GraphMode::Sat) => false,
        }
    }

    fn evaluate(&mut self, solver: &Solver) -> Result<QOutput, OracleError> {
        let obs = self.observe(solver)?;
        let model = self.model.as_ref().expect("checked at construction");
        let q = model
            .evaluate(&obs)
            .map_err(|e| OracleError(e.to_string()))?;
        self.stats.model_invocations += 1;
        self.last_q = Some(q.clone());
        Ok(q)
    }

    fn take(&mut self, action: Action) -> Result<OracleDecision, OracleError> {
        let lit = self
            .action_lit(action)
            .ok_or_else(|| OracleError(format!("action {action:?} has no literal")))?;
        self.stats.model_decisions += 1;
        Ok(OracleDecision::Decide(lit))
    }

    fn release(&mut self, solver: &Solver) -> OracleDecision {
        self.released = true;
        self.stats.released_at = Some(self.stats.model_decisions + 1);
        self.pool.clear();
        let activity_seed = match (&self.last_q, self.strategy.q_activity) {
            (Some(q), true) => q_activity_seed(
                q,
                &|a| self.action_lit(a),
                &|v| !solver.is_assigned(v),
            ),
            _ => Vec::new(),
        };
        OracleDecision::Release { activity_seed }
    }
}

impl BranchingOracle for Controller {
    fn decide(&mut self, solver: &Solver) -> Result<OracleDecision, OracleError> {
        if self.released {
            return Ok(OracleDecision::release());
        }
        let done = self.stats.model_decisions;
        match self.strategy.kind {
            StrategyKind::PureVsids => Ok(self.release(solver)),
            StrategyKind::FixedSteps { n } => {
                if done >= n {
                    return Ok(self.release(solver));
                }
                match self.evaluate(solver)?.argmax() {
                    Some((a, _)) => self.take(a),
                    None => Ok(self.release(solver)),
                }
            }
            StrategyKind::ReleaseAction {
                min_steps,
                max_steps,
            } => {
                if done >= max_steps {
                    return Ok(self.release(solver));
                }
                let q = self.evaluate(solver)?;
                match q.argmax() {
                    None => Ok(self.release(solver)),
                    Some((_, best)) if done >= min_steps && q.q_release.is_some_and(|r| r > best) => {
                        Ok(self.release(solver))
                    }
                    Some((a, _)) => self.take(a),
                }
            }
            StrategyKind::ActionPool {
                pool_size,
                max_model_runs,
            } => loop {
                while let Some(a) = self.pool.pop_front() {
                    if self.still_valid(a, solver) {
                        return self.take(a);
                    }
                    self.stats.pool_skips += 1;
                }
                if self.stats.model_invocations >= max_model_runs {
                    return Ok(self.release(solver));
                }
                let q = self.evaluate(solver)?;
                if q.q.is_empty() {
                    return Ok(self.release(solver));
                }
                self.pool = q.top_k(pool_size).into();
            },
        }
    }

    fn model_invocations(&self) -> u64 {
        self.stats.model_invocations
    }
}

/// Per-variable maximum Q over the literal actions on that variable.
fn max_q_per_var(q: &QOutput, to_lit: &dyn Fn(Action) -> Option<Lit>) -> BTreeMap<Var, f64> {
    let mut out: BTreeMap<Var, f64> = BTreeMap::new();
    for &(a, value) in &q.q {
        if let Some(l) = to_lit(a) {
            out.entry(l.var())
                .and_modify(|m| *m = m.max(value))
                .or_insert(value);
        }
    }
    out
}

/// `-1 / M` with `|M|` clamped to at least [`Q_ACTIVITY_EPS`], keeping the
/// sign (zero counts as positive).
pub fn q_activity_value(max_q: f64) -> f64 {
    let denom = if max_q < 0.0 {
        max_q.min(-Q_ACTIVITY_EPS)
    } else {
        max_q.max(Q_ACTIVITY_EPS)
    };
    -1.0 / denom
}

/// Activity seeds for the variables accepted by `keep`.
pub fn q_activity_seed(
    q: &QOutput,
    to_lit: &dyn Fn(Action) -> Option<Lit>,
    keep: &dyn Fn(Var) -> bool,
) -> Vec<(Var, f64)> {
    max_q_per_var(q, to_lit)
        .into_iter()
        .filter(|(v, _)| keep(*v))
        .map(|(v, m)| (v, q_activity_value(m)))
        .collect()
}

/// Seeds `solver` from `last_q` when `q_activity` is set; literal actions
/// only. The solver then runs on VSIDS alone.
pub fn release_to_vsids(
    solver: &mut Solver,
    last_q: Option<&QOutput>,
    q_activity: bool,
) -> Result<(), crate::solver::SolveError> {
    if let (Some(q), true) = (last_q, q_activity) {
        let lit_of = |a: Action| match a {
            Action::Literal(l) => Some(l),
            Action::Edge(..) => None,
        };
        let unassigned: Vec<bool> = (0..solver.num_vars() as u32)
            .map(|v| !solver.is_assigned(Var(v)))
            .collect();
        let seed = q_activity_seed(q, &lit_of, &|v| unassigned[v.index()]);
        solver.seed_activities(&seed)?;
    }
    Ok(())
}

#[derive(Debug, Error, PartialEq)]
pub enum QActivityError {
    #[error("max-Q values change sign ({negative} negative, {nonnegative} non-negative); -1/M does not preserve their order")]
    MixedSign { negative: usize, nonnegative: usize },
    #[error("no literal actions")]
    Empty,
    #[error("seeded argmax {seeded:?} differs from Q argmax {q:?}")]
    OrderViolated { seeded: Var, q: Var },
}

/// Checks that the variable ranked first by seeded activity is the one
/// ranked first by max-Q. Requires every max-Q to share one sign.
pub fn q_activity_argmax_check(q: &QOutput) -> Result<Var, QActivityError> {
    let lit_of = |a: Action| match a {
        Action::Literal(l) => Some(l),
        Action::Edge(..) => None,
    };
    let max_q = max_q_per_var(q, &lit_of);
    if max_q.is_empty() {
        return Err(QActivityError::Empty);
    }
    let negative = max_q.values().filter(|&&m| m < 0.0).count();
    let nonnegative = max_q.len() - negative;
    if negative > 0 && nonnegative > 0 {
        return Err(QActivityError::MixedSign {
            negative,
            nonnegative,
        });
    }
    let argmax = |it: &mut dyn Iterator<Item = (Var, f64)>| {
        let mut best: Option<(Var, f64)> = None;
        for (v, x) in it {
            if best.is_none_or(|(_, b)| x > b) {
                best = Some((v, x));
            }
        }
        best.expect("nonempty").0
    };
    let by_q = argmax(&mut max_q.iter().map(|(&v, &m)| (v, m)));
    let by_seed = argmax(&mut max_q.iter().map(|(&v, &m)| (v, q_activity_value(m))));
    if by_q != by_seed {
        return Err(QActivityError::OrderViolated {
            seeded: by_seed,
            q: by_q,
        });
    }
    Ok(by_q)
}
