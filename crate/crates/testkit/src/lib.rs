//! Brute-force reference oracles.
//!
//! Everything here works on plain data (DIMACS-style signed integers,
//! processing-time matrices) and shares no code with the solver, so the
//! test suites can check the solver against something that cannot inherit
//! its bugs.

/// A clause compiled to a pair of bit masks over at most 32 variables.
#[derive(Clone, Copy, Debug)]
struct MaskClause {
    pos: u32,
    neg: u32,
}

fn compile(num_vars: usize, clauses: &[Vec<i32>]) -> Vec<MaskClause> {
    assert!(num_vars <= 24, "truth-table oracle limited to 24 variables");
    clauses
        .iter()
        .map(|c| {
            let mut m = MaskClause { pos: 0, neg: 0 };
            for &l in c {
                assert!(l != 0 && (l.unsigned_abs() as usize) <= num_vars);
                let bit = 1u32 << (l.unsigned_abs() - 1);
                if l > 0 {
                    m.pos |= bit;
                } else {
                    m.neg |= bit;
                }
            }
            m
        })
        .collect()
}

#[inline]
fn satisfies(assignment: u32, clauses: &[MaskClause]) -> bool {
    clauses
        .iter()
        .all(|c| (assignment & c.pos) | (!assignment & c.neg) != 0)
}

/// Enumerates all `2^num_vars` assignments. Returns the first satisfying
/// one (bit `i` = variable `i + 1`), or `None` if the formula is UNSAT.
pub fn truth_table_model(num_vars: usize, clauses: &[Vec<i32>]) -> Option<u32> {
    let compiled = compile(num_vars, clauses);
    let limit: u64 = 1u64 << num_vars;
    (0..limit).map(|a| a as u32).find(|&a| satisfies(a, &compiled))
}

pub fn truth_table_sat(num_vars: usize, clauses: &[Vec<i32>]) -> bool {
    truth_table_model(num_vars, clauses).is_some()
}

/// True iff every model of `clauses` also satisfies `implied`.
pub fn entails(num_vars: usize, clauses: &[Vec<i32>], implied: &[i32]) -> bool {
    let compiled = compile(num_vars, clauses);
    let target = compile(num_vars, &[implied.to_vec()])[0];
    let limit: u64 = 1u64 << num_vars;
    (0..limit)
        .map(|a| a as u32)
        .filter(|&a| satisfies(a, &compiled))
        .all(|a| (a & target.pos) | (!a & target.neg) != 0)
}

/// Checks a DIMACS-signed model (index `v - 1` holds variable `v`).
pub fn model_satisfies(model: &[bool], clauses: &[Vec<i32>]) -> bool {
    clauses.iter().all(|c| {
        c.iter().any(|&l| {
            let v = model[(l.unsigned_abs() - 1) as usize];
            if l > 0 {
                v
            } else {
                !v
            }
        })
    })
}

/// Optimal open-shop makespan by exhaustive search.
///
/// `p[job][machine]` are processing times. Every order of the `j * m`
/// operations is scheduled greedily (each operation starts as soon as its
/// job and machine are free); sorting any optimal schedule by start time
/// and replaying it greedily never delays an operation, so the minimum over
/// all orders is the optimum. Depth-first with a branch-and-bound cut.
pub fn optimal_makespan(p: &[Vec<u32>]) -> u32 {
    let jobs = p.len();
    let machines = p[0].len();
    let ops = jobs * machines;
    assert!(ops <= 16, "exhaustive schedule oracle limited to 16 operations");
    let mut best = p.iter().flatten().sum::<u32>();
    let mut job_free = vec![0u32; jobs];
    let mut mach_free = vec![0u32; machines];
    dfs(p, 0, 0, &mut job_free, &mut mach_free, 0, &mut best, ops);
    best
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    p: &[Vec<u32>],
    used: u32,
    depth: usize,
    job_free: &mut [u32],
    mach_free: &mut [u32],
    span: u32,
    best: &mut u32,
    ops: usize,
) {
    if span >= *best {
        return;
    }
    if depth == ops {
        *best = span;
        return;
    }
    let machines = mach_free.len();
    for op in 0..ops {
        if used & (1 << op) != 0 {
            continue;
        }
        let (j, m) = (op / machines, op % machines);
        let start = job_free[j].max(mach_free[m]);
        let end = start + p[j][m];
        let (oj, om) = (job_free[j], mach_free[m]);
        job_free[j] = end;
        mach_free[m] = end;
        dfs(
            p,
            used | (1 << op),
            depth + 1,
            job_free,
            mach_free,
            span.max(end),
            best,
            ops,
        );
        job_free[j] = oj;
        mach_free[m] = om;
    }
}

/// Whether any schedule with makespan `<= horizon` exists.
pub fn schedule_exists(p: &[Vec<u32>], horizon: u32) -> bool {
    optimal_makespan(p) <= horizon
}

/// Enumerates every start-time vector (each op starting in `0..=horizon - p`)
/// that is free of overlaps per job and per machine. Only for tiny inputs.
pub fn all_valid_schedules(p: &[Vec<u32>], horizon: u32) -> Vec<Vec<u32>> {
    let machines = p[0].len();
    let flat: Vec<u32> = p.iter().flatten().copied().collect();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(flat.len());
    fn rec(
        flat: &[u32],
        machines: usize,
        horizon: u32,
        cur: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        let i = cur.len();
        if i == flat.len() {
            out.push(cur.clone());
            return;
        }
        if flat[i] > horizon {
            return;
        }
        for s in 0..=horizon - flat[i] {
            let ok = (0..i).all(|k| {
                let share = k / machines == i / machines || k % machines == i % machines;
                !share || s + flat[i] <= cur[k] || cur[k] + flat[k] <= s
            });
            if ok {
                cur.push(s);
                rec(flat, machines, horizon, cur, out);
                cur.pop();
            }
        }
    }
    rec(&flat, machines, horizon, &mut cur, &mut out);
    out
}
