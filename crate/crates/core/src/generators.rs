//! Seeded instance generators: SR(n) pairs, uniform random 3-SAT and random
//! graph coloring. Every generator is a pure function of its parameters and
//! seed; random draws go through [`SplitMix64`] in the order documented on
//! each function.

use thiserror::Error;

use crate::cnf::{Clause, Formula, Lit, Var};
use crate::rng::SplitMix64;
use crate::solver::{SolveError, Solver, SolverConfig, Status, VsidsOnly};

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("need at least {min} variables, got {got}")]
    TooFewVariables { min: usize, got: usize },
    #[error("{edges} edges do not fit a simple graph on {vertices} vertices")]
    TooManyEdges { vertices: usize, edges: usize },
    #[error("no unsatisfiable prefix within {cap} clauses")]
    ClauseCap { cap: usize },
    #[error(transparent)]
    Solver(#[from] SolveError),
}

/// An SR(n) pair: identical formulas except for one literal of the last
/// clause, whose polarity is flipped in `sat`.
#[derive(Clone, Debug, PartialEq)]
pub struct SrPair {
    pub n: usize,
    pub unsat: Formula,
    pub sat: Formula,
    /// Position of the flipped literal in the last clause.
    pub flipped: usize,
}

/// `1 + Bernoulli(0.7) + Geometric(0.4)`, the geometric part on `{1, 2, ...}`.
pub fn sample_clause_len(rng: &mut SplitMix64) -> usize {
    let b = usize::from(rng.bernoulli(0.7));
    1 + b + rng.geometric(0.4) as usize
}

fn random_clause(rng: &mut SplitMix64, k: usize, n: usize) -> Clause {
    let vars = rng.distinct(k, n);
    let lits: Vec<Lit> = vars
        .into_iter()
        .map(|v| Var(v as u32).lit(!rng.bernoulli(0.5)))
        .collect();
    Clause::new(lits).expect("distinct variables never form a tautology")
}

fn model_satisfies(model: &[bool], clause: &Clause) -> bool {
    clause
        .lits()
        .iter()
        .any(|l| model[l.var().index()] == l.is_positive())
}

fn sat_model(formula: &Formula) -> Result<Option<Vec<bool>>, GenError> {
    let mut solver = Solver::new(formula, SolverConfig::default())?;
    let r = solver.solve(&mut VsidsOnly)?;
    match r.status {
        Status::Sat => Ok(r.model),
        Status::Unsat => Ok(None),
        Status::Unknown => unreachable!("no budget configured"),
    }
}

/// SR(n) with the default clause cap of `100 * n`.
pub fn gen_sr_pair(n: usize, seed: u64) -> Result<SrPair, GenError> {
    gen_sr_pair_capped(n, seed, 100 * n)
}

/// Adds random clauses until the formula turns UNSAT.
///
/// Per clause: draw `k` ([`sample_clause_len`], clamped to `n`), then `k`
/// distinct variables, then one negation coin per variable. After the
/// UNSAT-making clause, one more `below(k)` selects the literal to flip.
pub fn gen_sr_pair_capped(n: usize, seed: u64, cap: usize) -> Result<SrPair, GenError> {
    if n < 2 {
        return Err(GenError::TooFewVariables { min: 2, got: n });
    }
    let mut rng = SplitMix64::new(seed);
    let mut formula = Formula::new(n, Vec::new()).expect("empty formula");
    // Any model of the current prefix; when it satisfies the new clause too
    // the prefix stays SAT without another solver call.
    let mut model = vec![false; n];
    loop {
        if formula.num_clauses() >= cap {
            return Err(GenError::ClauseCap { cap });
        }
        let k = sample_clause_len(&mut rng).min(n);
        let clause = random_clause(&mut rng, k, n);
        let still_sat = model_satisfies(&model, &clause);
        formula = formula.with_clause(clause);
        if still_sat {
            continue;
        }
        match sat_model(&formula)? {
            Some(m) => model = m,
            None => break,
        }
    }
    let last = formula.clauses().last().expect("at least one clause").clone();
    let flipped = rng.below(last.len() as u64) as usize;
    let mut lits = last.lits().to_vec();
    lits[flipped] = !lits[flipped];
    let mut clauses = formula.clauses().to_vec();
    *clauses.last_mut().expect("nonempty") = Clause::new(lits).expect("still distinct");
    let sat = Formula::new(n, clauses).expect("same variables");
    Ok(SrPair {
        n,
        unsat: formula,
        sat,
        flipped,
    })
}

/// Uniform random 3-SAT: per clause, 3 distinct variables then 3 sign coins.
pub fn gen_random_3sat(nvars: usize, nclauses: usize, seed: u64) -> Result<Formula, GenError> {
    if nvars < 3 {
        return Err(GenError::TooFewVariables { min: 3, got: nvars });
    }
    let mut rng = SplitMix64::new(seed);
    let clauses = (0..nclauses)
        .map(|_| random_clause(&mut rng, 3, nvars))
        .collect();
    Ok(Formula::new(nvars, clauses).expect("variables in range"))
}

/// A uniformly random simple graph with exactly `nedges` edges: all pairs
/// `(i, j), i < j` in lexicographic order are shuffled and the first
/// `nedges` kept (then sorted).
pub fn random_graph(nvertices: usize, nedges: usize, seed: u64) -> Result<Vec<(usize, usize)>, GenError> {
    let max = nvertices * nvertices.saturating_sub(1) / 2;
    if nedges > max {
        return Err(GenError::TooManyEdges {
            vertices: nvertices,
            edges: nedges,
        });
    }
    let mut pairs: Vec<(usize, usize)> = (0..nvertices)
        .flat_map(|i| (i + 1..nvertices).map(move |j| (i, j)))
        .collect();
    SplitMix64::new(seed).shuffle(&mut pairs);
    pairs.truncate(nedges);
    pairs.sort_unstable();
    Ok(pairs)
}

/// Variable for "vertex `v` has color `c`".
pub fn color_var(v: usize, c: usize, ncolors: usize) -> Var {
    Var((v * ncolors + c) as u32)
}

/// Direct encoding: one at-least-one-color clause per vertex and one
/// `¬x(i,c) ∨ ¬x(j,c)` clause per edge and color.
pub fn coloring_cnf(nvertices: usize, edges: &[(usize, usize)], ncolors: usize) -> Formula {
    let mut clauses = Vec::with_capacity(nvertices + edges.len() * ncolors);
    for v in 0..nvertices {
        clauses.push(
            Clause::new((0..ncolors).map(|c| color_var(v, c, ncolors).pos())).expect("distinct"),
        );
    }
    for &(i, j) in edges {
        for c in 0..ncolors {
            clauses.push(
                Clause::new([color_var(i, c, ncolors).neg(), color_var(j, c, ncolors).neg()])
                    .expect("distinct"),
            );
        }
    }
    Formula::new(nvertices * ncolors, clauses).expect("variables in range")
}

pub fn gen_coloring(
    nvertices: usize,
    nedges: usize,
    ncolors: usize,
    seed: u64,
) -> Result<Formula, GenError> {
    let edges = random_graph(nvertices, nedges, seed)?;
    Ok(coloring_cnf(nvertices, &edges, ncolors))
}
