//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p qsat-cli --test acceptance`.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use qsat_cli::{emit_report, run_benchmark, BenchSpec, DatasetSpec, Format, RunRecord, RunStatus};
use qsat_core::generators::{gen_random_3sat, gen_sr_pair, sample_clause_len};
use qsat_core::gnn::{forward, load_weights, save_weights, ActionSlot, ActionTarget};
use qsat_core::handoff::{q_activity_argmax_check, release_to_vsids, QActivityError};
use qsat_core::ossp::{
    build_op_graph, decided_pairs, derive_windows, encode_crawford_baker, gen_taillard_like,
    lower_bound, probe_horizon, solve_makespan, validate_schedule,
};
use qsat_core::rng::derive_seed;
use qsat_core::solver::{Propagation, VsidsOnly};
use qsat_core::{
    build_ossp_graph, build_sat_graph, random_init, solve, Action, Formula, GraphObservation,
    Hyper, Lit, QOutput, Solver, SolverConfig, SplitMix64, Status, Var,
};
use qsat_testkit::{model_satisfies, optimal_makespan, truth_table_sat};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_solver_correctness() -> Outcome {
    let start = Instant::now();
    let mut formulas: Vec<(String, usize, Formula)> = Vec::new();
    for k in 0..500u64 {
        let mut rng = SplitMix64::new(derive_seed(101, k));
        let n = rng.range_inclusive(5, 20) as usize;
        let ratio = 3.0 + 3.0 * rng.unit();
        let m = (ratio * n as f64).round() as usize;
        let f = gen_random_3sat(n, m, derive_seed(102, k)).map_err(|e| e.to_string())?;
        formulas.push((format!("3sat n={n} m={m} k={k}"), n, f));
    }
    for k in 0..500u64 {
        let n = 10 + (k % 11) as usize;
        let pair = gen_sr_pair(n, derive_seed(103, k)).map_err(|e| e.to_string())?;
        let f = if k % 2 == 0 { pair.unsat } else { pair.sat };
        formulas.push((format!("sr n={n} k={k}"), n, f));
    }
    let (mut sat, mut unsat) = (0, 0);
    for (name, n, f) in &formulas {
        let clauses = f.to_dimacs_clauses();
        let expect = truth_table_sat(*n, &clauses);
        let r = solve(f, SolverConfig::default(), &mut VsidsOnly).map_err(|e| e.to_string())?;
        ensure((r.status == Status::Sat) == expect && r.status != Status::Unknown, || {
            format!("{name}: solver {:?}, oracle sat={expect}", r.status)
        })?;
        if let Some(m) = &r.model {
            ensure(model_satisfies(m, &clauses), || format!("{name}: bad model"))?;
            sat += 1;
        } else {
            unsat += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 300.0, || format!("took {secs:.1}s"))?;
    Ok(format!(
        "{} formulas ({sat} SAT, {unsat} UNSAT) agree with the truth table in {secs:.1}s",
        formulas.len()
    ))
}

fn c2_sr_pairs() -> Outcome {
    for k in 0..100u64 {
        let pair = gen_sr_pair(40, derive_seed(201, k)).map_err(|e| e.to_string())?;
        let u = solve(&pair.unsat, SolverConfig::default(), &mut VsidsOnly).map_err(|e| e.to_string())?;
        let s = solve(&pair.sat, SolverConfig::default(), &mut VsidsOnly).map_err(|e| e.to_string())?;
        ensure(u.status == Status::Unsat && s.status == Status::Sat, || {
            format!("pair {k}: {:?}/{:?}", u.status, s.status)
        })?;
    }
    let mut rng = SplitMix64::new(202);
    let total: usize = (0..10_000).map(|_| sample_clause_len(&mut rng)).sum();
    let mean = total as f64 / 10_000.0;
    ensure((mean - 4.2).abs() <= 0.1, || format!("clause length mean {mean:.4}"))?;
    Ok(format!("100 SR(40) pairs UNSAT/SAT; clause length mean {mean:.4}"))
}

fn c3_crawford_baker() -> Outcome {
    let config = SolverConfig::default();
    let mut checked = 0;
    for (j, m, count) in [(2usize, 2usize, 50u64), (3, 3, 20)] {
        for k in 0..count {
            let inst = gen_taillard_like(j, m, derive_seed(300 + j as u64, k));
            let opt = optimal_makespan(&inst.rows());
            let (t, sched) = solve_makespan(&inst, &config).map_err(|e| e.to_string())?;
            ensure(t == opt, || format!("{j}x{m} #{k}: makespan {t}, oracle {opt}"))?;
            ensure(validate_schedule(&sched, &inst, t), || format!("{j}x{m} #{k}: invalid schedule"))?;
            let at = probe_horizon(&inst, opt, config.clone(), &mut VsidsOnly).map_err(|e| e.to_string())?;
            let decoded = at.schedule.ok_or_else(|| format!("{j}x{m} #{k}: UNSAT at optimum"))?;
            ensure(validate_schedule(&decoded, &inst, opt), || format!("{j}x{m} #{k}: decode invalid"))?;
            let below = probe_horizon(&inst, opt - 1, config.clone(), &mut VsidsOnly).map_err(|e| e.to_string())?;
            ensure(below.status == Status::Unsat, || format!("{j}x{m} #{k}: SAT at optimum-1"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} instances: makespan exact, models decode, optimum-1 UNSAT"))
}

fn c4_op_graph_shape() -> Outcome {
    let mut at_7x7 = 0;
    for j in 1..=7usize {
        for m in 1..=7usize {
            let inst = gen_taillard_like(j, m, derive_seed(400, (j * 8 + m) as u64));
            let t = lower_bound(&inst);
            let (f, map) = encode_crawford_baker(&inst, t);
            let mut s = Solver::new(&f, SolverConfig::default()).map_err(|e| e.to_string())?;
            ensure(s.unit_propagate() == Propagation::NoConflict, || format!("{j}x{m}: root conflict"))?;
            let value = |v: Var| s.value(v);
            let g = build_op_graph(&inst, t, &decided_pairs(&value, &map), &derive_windows(&value, &map));
            ensure(g.vertices.len() == j * m, || format!("{j}x{m}: {} vertices", g.vertices.len()))?;
            if j == 7 && m == 7 {
                at_7x7 = g.vertices.len();
            }
            for (i, v) in g.vertices.iter().enumerate() {
                let want = (inst.duration(i), 1, t);
                ensure(v.reported() == want, || {
                    format!("{j}x{m} op {i}: label {:?}, want {want:?}", v.reported())
                })?;
            }
        }
    }
    ensure(at_7x7 == 49, || format!("7x7 has {at_7x7} vertices"))?;
    Ok("j*m vertices for all shapes up to 7x7 (49 at 7x7); root labels (p, 1, T)".into())
}

fn permute(obs: &GraphObservation, pn: &[usize], pe: &[usize]) -> GraphObservation {
    let (nd, ed) = (obs.node_dim, obs.edge_dim);
    let mut node_features = vec![0.0; obs.node_features.len()];
    for (i, &to) in pn.iter().enumerate() {
        node_features[to * nd..(to + 1) * nd].copy_from_slice(obs.node(i));
    }
    let mut edges = vec![(0, 0); obs.edges.len()];
    let mut edge_features = vec![0.0; obs.edge_features.len()];
    for (k, &to) in pe.iter().enumerate() {
        let (a, b) = obs.edges[k];
        edges[to] = (pn[a], pn[b]);
        edge_features[to * ed..(to + 1) * ed].copy_from_slice(obs.edge(k));
    }
    let actions = obs
        .actions
        .iter()
        .map(|s| ActionSlot {
            action: s.action,
            target: match s.target {
                ActionTarget::Node { node, slot } => ActionTarget::Node { node: pn[node], slot },
                ActionTarget::Edge(k) => ActionTarget::Edge(pe[k]),
            },
        })
        .collect();
    GraphObservation { node_features, edges, edge_features, actions, ..obs.clone() }
}

/// A SAT observation after a few random decisions, or an operation graph
/// of a random small open-shop instance.
fn sample_observation(k: u64, rng: &mut SplitMix64) -> Result<(GraphObservation, Hyper), String> {
    if k % 2 == 0 {
        let n = 8 + (k % 13) as usize;
        let pair = gen_sr_pair(n, derive_seed(500, k)).map_err(|e| e.to_string())?;
        let mut s = Solver::new(&pair.sat, SolverConfig::default()).map_err(|e| e.to_string())?;
        for _ in 0..rng.below(3) {
            let free: Vec<Var> = s.unassigned_vars().collect();
            if free.len() < 2 {
                break;
            }
            let v = free[rng.below(free.len() as u64) as usize];
            s.decide(v.lit(rng.bernoulli(0.5))).map_err(|e| e.to_string())?;
            if s.unit_propagate() != Propagation::NoConflict {
                s.backjump(s.decision_level() - 1);
                break;
            }
        }
        let state = s.extract_mdp_state().map_err(|e| e.to_string())?;
        Ok((build_sat_graph(&state), Hyper::sat()))
    } else {
        let (j, m) = (2 + (k % 3) as usize, 2 + (k % 4) as usize);
        let inst = gen_taillard_like(j, m, derive_seed(501, k));
        let t = lower_bound(&inst) + rng.below(20) as u32;
        let (f, map) = encode_crawford_baker(&inst, t);
        let mut s = Solver::new(&f, SolverConfig::default()).map_err(|e| e.to_string())?;
        s.unit_propagate();
        if let Some(&(a, b)) = map.pr_pairs().get(rng.below(map.pr_pairs().len() as u64) as usize) {
            s.decide(map.pr(a, b).unwrap().pos()).map_err(|e| e.to_string())?;
            if s.unit_propagate() != Propagation::NoConflict {
                s.backjump(0);
            }
        }
        let value = |v: Var| s.value(v);
        let g = build_op_graph(&inst, t, &decided_pairs(&value, &map), &derive_windows(&value, &map));
        Ok((build_ossp_graph(&g), Hyper::ossp()))
    }
}

fn c5_gnn_equivariance() -> Outcome {
    let mut rng = SplitMix64::new(505);
    let mut worst: f64 = 0.0;
    let mut actions = 0;
    for k in 0..100u64 {
        let (obs, hyper) = sample_observation(k, &mut rng)?;
        let hyper = if k % 5 == 4 { hyper.extended() } else { hyper };
        let w = random_init(hyper.with_hidden(8 + (k % 3) as usize * 8), derive_seed(506, k));
        let mut pn: Vec<usize> = (0..obs.num_nodes()).collect();
        rng.shuffle(&mut pn);
        let mut pe: Vec<usize> = (0..obs.num_edges()).collect();
        rng.shuffle(&mut pe);
        let q = forward(&obs, &w).map_err(|e| e.to_string())?;
        let qp = forward(&permute(&obs, &pn, &pe), &w).map_err(|e| e.to_string())?;
        ensure(q.q.len() == qp.q.len(), || format!("graph {k}: action count differs"))?;
        for &(a, x) in &q.q {
            let y = qp.get(a).ok_or_else(|| format!("graph {k}: {a:?} missing"))?;
            worst = worst.max((x - y).abs());
        }
        if let (Some(a), Some(b)) = (q.q_release, qp.q_release) {
            worst = worst.max((a - b).abs());
        }
        actions += q.q.len();
        let again = forward(&obs, &w).map_err(|e| e.to_string())?;
        let bits = |q: &QOutput| q.q.iter().map(|(_, x)| x.to_bits()).collect::<Vec<_>>();
        ensure(bits(&q) == bits(&again), || format!("graph {k}: forward not bitwise repeatable"))?;
        let threaded = std::thread::scope(|s| s.spawn(|| forward(&obs, &w)).join().unwrap())
            .map_err(|e| e.to_string())?;
        ensure(bits(&q) == bits(&threaded), || format!("graph {k}: differs across threads"))?;
        ensure(load_weights(&save_weights(&w)).as_ref() == Ok(&w), || format!("graph {k}: weight round trip"))?;
    }
    ensure(worst <= 1e-9, || format!("max |dQ| = {worst:e}"))?;
    Ok(format!("100 graphs, {actions} actions, max |dQ| under permutation {worst:.1e}; bitwise repeatable; weights round-trip"))
}

fn c6_handoff_budgets() -> Outcome {
    let fixed = [1u64, 3, 10];
    let pools: Vec<(usize, u64)> = [20usize, 30].iter().flat_map(|&k| [1u64, 2, 3].map(|r| (k, r))).collect();
    let mut strategies: Vec<qsat_core::Strategy> = fixed.iter().map(|n| format!("fixed:{n}").parse().unwrap()).collect();
    strategies.extend(pools.iter().map(|(k, r)| format!("pool:k={k},r={r}").parse::<qsat_core::Strategy>().unwrap()));
    let mut spec = BenchSpec::new(vec![DatasetSpec::Sr { n: 50, count: 100, seed: 600 }], strategies);
    spec.sat_weights = Some(Arc::new(random_init(Hyper::sat().with_hidden(16), 601)));
    spec.trials = 1;
    spec.timeout = Duration::from_secs(120);
    let report = run_benchmark(&spec).map_err(|e| e.to_string())?;
    let mut amortized = 0;
    let mut instances = std::collections::BTreeSet::new();
    for r in &report.records {
        instances.insert(r.instance.clone());
        ensure(r.status != RunStatus::Timeout, || format!("{} {} timed out", r.instance, r.strategy))?;
        let ctx = || format!("{} {}: {r:?}", r.instance, r.strategy);
        if let Some(n) = r.strategy.strip_prefix("fixed:") {
            let n: u64 = n.parse().unwrap();
            ensure(r.model_invocations <= n, ctx)?;
            match r.released_at {
                Some(at) => ensure(at == n + 1 && r.model_decisions == n, ctx)?,
                None => ensure(r.model_decisions == r.decisions && r.decisions <= n, ctx)?,
            }
        } else {
            let (k, rr) = pools
                .iter()
                .find(|(k, rr)| r.strategy == format!("pool:k={k},r={rr}"))
                .copied()
                .ok_or_else(ctx)?;
            ensure(r.model_invocations <= rr, ctx)?;
            ensure(r.model_decisions <= k as u64 * rr, ctx)?;
            if r.model_decisions > rr {
                ensure(r.model_invocations < r.model_decisions, ctx)?;
                amortized += 1;
            }
        }
    }
    ensure(instances.len() >= 100, || format!("only {} instances", instances.len()))?;
    ensure(amortized > 0, || "no pool run took more decisions than model runs".into())?;
    Ok(format!(
        "{} runs on {} SR(50) instances; fixed budgets hold; {amortized} pool runs amortize forwards",
        report.records.len(),
        instances.len()
    ))
}

fn c7_strategy_neutrality() -> Outcome {
    let datasets = vec![
        DatasetSpec::Sr { n: 10, count: 10, seed: 700 },
        DatasetSpec::Sr { n: 20, count: 10, seed: 701 },
        DatasetSpec::Sr { n: 40, count: 10, seed: 702 },
        DatasetSpec::ThreeSat { vars: 50, clauses: 213, count: 10, seed: 703 },
        DatasetSpec::Color { vertices: 20, edges: 45, colors: 3, count: 10, seed: 704 },
        DatasetSpec::OsspGen { jobs: 2, machines: 2, count: 5, seed: 705 },
        DatasetSpec::OsspGen { jobs: 3, machines: 3, count: 3, seed: 706 },
    ];
    let strategies: Vec<qsat_core::Strategy> = [
        "vsids",
        "fixed:3",
        "fixed:3+qact",
        "release:min=2,max=4",
        "release:min=1,max=8+qact",
        "pool:k=20,r=2",
        "pool:k=30,r=1+qact",
    ]
    .iter()
    .map(|s| s.parse().unwrap())
    .collect();
    let mut outcome: BTreeMap<String, (RunStatus, Option<u32>)> = BTreeMap::new();
    let mut runs = 0;
    for restarts in [true, false] {
        let mut spec = BenchSpec::new(datasets.clone(), strategies.clone());
        spec.sat_weights = Some(Arc::new(random_init(Hyper::sat().with_hidden(16), 707)));
        spec.ossp_weights = Some(Arc::new(random_init(Hyper::ossp().with_hidden(16), 708)));
        spec.trials = 1;
        spec.restarts = restarts;
        let report = run_benchmark(&spec).map_err(|e| e.to_string())?;
        for r in &report.records {
            ensure(r.status != RunStatus::Timeout, || format!("{} {} timed out", r.instance, r.strategy))?;
            let key = (r.status, r.horizons.last().map(|h| h.0));
            let prev = outcome.entry(r.instance.clone()).or_insert(key);
            ensure(*prev == key, || {
                format!("{}: {:?} under {} (restarts {restarts}), {:?} before", r.instance, key, r.strategy, prev)
            })?;
            runs += 1;
        }
    }
    Ok(format!(
        "{} instances x {} strategies x restarts on/off: {runs} runs, identical status",
        outcome.len(),
        strategies.len()
    ))
}

fn q_map(values: &[f64]) -> QOutput {
    QOutput {
        q: values
            .iter()
            .enumerate()
            .flat_map(|(i, &m)| {
                let v = Var(i as u32);
                // Positive literal holds the max on even variables.
                let other = m - 0.5 - (i as f64 * 0.01);
                let (p, n) = if i % 2 == 0 { (m, other) } else { (other, m) };
                [(Action::Literal(v.pos()), p), (Action::Literal(v.neg()), n)]
            })
            .collect(),
        q_release: None,
    }
}

fn c8_q_activity() -> Outcome {
    let mut rng = SplitMix64::new(800);
    for k in 0..1000 {
        let n = 1 + rng.below(40) as usize;
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        let values: Vec<f64> = (0..n).map(|_| sign * (1e-6 + 100.0 * rng.unit())).collect();
        let q = q_map(&values);
        let best = (0..n).fold(0, |b, i| if values[i] > values[b] { i } else { b });
        let checked = q_activity_argmax_check(&q).map_err(|e| format!("map {k}: {e}"))?;
        ensure(checked == Var(best as u32), || format!("map {k}: check says {checked:?}, argmax x{best}"))?;
        let mut s = Solver::new(&Formula::new(n, vec![]).unwrap(), SolverConfig::default()).map_err(|e| e.to_string())?;
        release_to_vsids(&mut s, Some(&q), true).map_err(|e| e.to_string())?;
        let pick: Lit = s.vsids_pick().map_err(|e| e.to_string())?;
        ensure(pick.var() == Var(best as u32), || format!("map {k}: VSIDS picks {:?}, argmax x{best}", pick.var()))?;
    }
    let mut flagged = 0;
    let mut would_misorder = 0;
    for k in 0..200 {
        let n = 2 + rng.below(20) as usize;
        let mut values: Vec<f64> = (0..n).map(|_| 200.0 * rng.unit() - 100.0).collect();
        values[0] = -values[0].abs() - 1e-3;
        values[1] = values[1].abs() + 1e-3;
        match q_activity_argmax_check(&q_map(&values)) {
            Err(QActivityError::MixedSign { .. }) => flagged += 1,
            other => return Err(format!("mixed map {k} not flagged: {other:?}")),
        }
        // Raw -1/M ranks a negative maximum above every positive one.
        let seeded = |m: f64| -1.0 / m;
        let best_q = (0..n).fold(0, |b, i| if values[i] > values[b] { i } else { b });
        let best_seed = (0..n).fold(0, |b, i| if seeded(values[i]) > seeded(values[b]) { i } else { b });
        if best_q != best_seed {
            would_misorder += 1;
        }
    }
    Ok(format!(
        "1000 single-sign maps: check and first VSIDS pick match argmax; {flagged}/200 mixed-sign maps flagged ({would_misorder} would mis-order)"
    ))
}

fn c9_harness_determinism() -> Outcome {
    const HEADER: &str = "instance,strategy,trial,status,wall_time_s,decisions,conflicts,propagations,model_invocations,model_decisions,released_at";
    let mut spec = BenchSpec::new(
        vec![
            DatasetSpec::Sr { n: 30, count: 6, seed: 900 },
            DatasetSpec::OsspGen { jobs: 2, machines: 3, count: 2, seed: 901 },
        ],
        ["vsids", "fixed:3+qact", "pool:k=20,r=2"].iter().map(|s| s.parse().unwrap()).collect(),
    );
    spec.sat_weights = Some(Arc::new(random_init(Hyper::sat().with_hidden(16), 902)));
    spec.ossp_weights = Some(Arc::new(random_init(Hyper::ossp().with_hidden(16), 903)));
    spec.trials = 2;
    let a = run_benchmark(&spec).map_err(|e| e.to_string())?;
    let b = run_benchmark(&spec).map_err(|e| e.to_string())?;
    let key = |r: &RunRecord| {
        (
            r.instance.clone(),
            r.strategy.clone(),
            r.trial,
            r.status,
            r.decisions,
            r.conflicts,
            r.propagations,
            r.model_invocations,
            r.model_decisions,
            r.released_at,
            r.horizons.clone(),
        )
    };
    ensure(a.records.len() == b.records.len(), || "record counts differ".into())?;
    for (x, y) in a.records.iter().zip(&b.records) {
        ensure(key(x) == key(y), || format!("{} {} #{} differs between runs", x.instance, x.strategy, x.trial))?;
    }
    for recs in [&a.records, &b.records] {
        let mut seen = BTreeMap::new();
        for r in recs.iter() {
            let prev = seen.entry((r.instance.clone(), r.strategy.clone())).or_insert(r.decisions);
            ensure(*prev == r.decisions, || format!("{} {}: trials differ", r.instance, r.strategy))?;
        }
    }
    let csv = emit_report(&a.records, Format::Csv).map_err(|e| e.to_string())?;
    let first = csv.lines().next().unwrap_or_default();
    ensure(first.as_bytes() == HEADER.as_bytes(), || format!("header `{first}`"))?;
    ensure(csv.lines().count() == a.records.len() + 1, || "row count".into())?;
    Ok(format!("{} records identical across two runs; CSV header exact", a.records.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("solver correctness", c1_solver_correctness),
        ("SR(n) pair property", c2_sr_pairs),
        ("Crawford-Baker soundness/completeness", c3_crawford_baker),
        ("operation graph shape", c4_op_graph_shape),
        ("GNN equivariance", c5_gnn_equivariance),
        ("handoff budgets", c6_handoff_budgets),
        ("strategy neutrality", c7_strategy_neutrality),
        ("Q-activity ordering", c8_q_activity),
        ("harness determinism", c9_harness_determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({secs:.1}s) {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({secs:.1}s) {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
