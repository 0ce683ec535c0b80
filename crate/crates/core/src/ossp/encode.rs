//! Crawford-Baker encoding.
//!
//! * `sa(i, t)`, `t in [0, T]`: operation `i` starts at `t` or later.
//! * `eb(i, t)`, `t in [1, T]`: operation `i` ends by `t`.
//! * `pr(i, j)`: `i` precedes `j`; only for pairs sharing a job or machine.

use crate::cnf::{Clause, Formula, Lit, Var};

use super::OsspInstance;

/// Bijection between encoding atoms and CNF variables.
///
/// Layout: all `sa` variables (operation-major), then all `eb`, then `pr`
/// in `(i, j)` lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CbVarMap {
    ops: usize,
    horizon: u32,
    pr: Vec<Option<Var>>,
    /// Inverse of `pr` for decoding actions.
    pr_pairs: Vec<(usize, usize)>,
    num_vars: usize,
}

impl CbVarMap {
    fn new(instance: &OsspInstance, horizon: u32) -> Self {
        let ops = instance.num_ops();
        let t = horizon as usize;
        let mut next = ops * (t + 1) + ops * t;
        let mut pr = vec![None; ops * ops];
        let mut pr_pairs = Vec::new();
        for i in 0..ops {
            for j in 0..ops {
                if instance.conflicting(i, j) {
                    pr[i * ops + j] = Some(Var(next as u32));
                    pr_pairs.push((i, j));
                    next += 1;
                }
            }
        }
        CbVarMap {
            ops,
            horizon,
            pr,
            pr_pairs,
            num_vars: next,
        }
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn num_ops(&self) -> usize {
        self.ops
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn sa(&self, op: usize, t: u32) -> Var {
        debug_assert!(op < self.ops && t <= self.horizon);
        Var((op * (self.horizon as usize + 1) + t as usize) as u32)
    }

    pub fn eb(&self, op: usize, t: u32) -> Var {
        debug_assert!(op < self.ops && t >= 1 && t <= self.horizon);
        let base = self.ops * (self.horizon as usize + 1);
        Var((base + op * self.horizon as usize + t as usize - 1) as u32)
    }

    pub fn pr(&self, i: usize, j: usize) -> Option<Var> {
        self.pr.get(i * self.ops + j).copied().flatten()
    }

    /// Ordered pairs that own a `pr` variable.
    pub fn pr_pairs(&self) -> &[(usize, usize)] {
        &self.pr_pairs
    }

    /// The `(i, j)` whose `pr` variable is `var`, if any.
    pub fn pair_of(&self, var: Var) -> Option<(usize, usize)> {
        let first = self.ops * (2 * self.horizon as usize + 1);
        var.index()
            .checked_sub(first)
            .and_then(|k| self.pr_pairs.get(k).copied())
    }
}

fn clause(lits: impl IntoIterator<Item = Lit>) -> Clause {
    Clause::new(lits).expect("encoding never emits tautologies")
}

/// Encodes "a schedule of makespan `<= horizon` exists".
///
/// Clause families, per operation `i` with duration `p`:
/// (a) `∨_t sa(i,t)`; (b) `∨_{t>=1} eb(i,t)`; (d) `sa(i,t) → sa(i,t-1)`;
/// (e) `eb(i,t) → eb(i,t+1)`; (f) `sa(i,t) → ¬eb(i,t+p-1)` whenever
/// `1 <= t+p-1 <= T`, and `¬sa(i,t)` for every `t > T - p` so each
/// operation fits the horizon. Per conflicting pair: (c) `pr(i,j) ∨ pr(j,i)`
/// and (g) `sa(i,t) ∧ pr(i,j) → sa(j,t+p_i)` for `t + p_i <= T`.
pub fn encode_crawford_baker(instance: &OsspInstance, horizon: u32) -> (Formula, CbVarMap) {
    let map = CbVarMap::new(instance, horizon);
    let ops = instance.num_ops();
    let big_t = horizon;
    let mut clauses = Vec::new();

    for i in 0..ops {
        let p = instance.duration(i);
        clauses.push(clause((0..=big_t).map(|t| map.sa(i, t).pos())));
        clauses.push(clause((1..=big_t).map(|t| map.eb(i, t).pos())));
        for t in 1..=big_t {
            clauses.push(clause([map.sa(i, t).neg(), map.sa(i, t - 1).pos()]));
        }
        for t in 1..big_t {
            clauses.push(clause([map.eb(i, t).neg(), map.eb(i, t + 1).pos()]));
        }
        for t in 0..=big_t {
            let end = t + p - 1;
            if end >= 1 && end <= big_t {
                clauses.push(clause([map.sa(i, t).neg(), map.eb(i, end).neg()]));
            }
        }
        let last_start = big_t.checked_sub(p);
        let first_bad = last_start.map_or(0, |s| s + 1);
        for t in first_bad..=big_t {
            clauses.push(clause([map.sa(i, t).neg()]));
        }
    }

    for &(i, j) in map.pr_pairs() {
        if i < j {
            let a = map.pr(i, j).expect("pair");
            let b = map.pr(j, i).expect("pair");
            clauses.push(clause([a.pos(), b.pos()]));
        }
    }

    for &(i, j) in map.pr_pairs() {
        let p = instance.duration(i);
        let pr = map.pr(i, j).expect("pair");
        for t in 0..=big_t {
            if t + p > big_t {
                break;
            }
            clauses.push(clause([
                map.sa(i, t).neg(),
                pr.neg(),
                map.sa(j, t + p).pos(),
            ]));
        }
    }

    let formula = Formula::new(map.num_vars(), clauses).expect("variables in range");
    (formula, map)
}
