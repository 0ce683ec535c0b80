use proptest::prelude::*;
use qsat_core::ossp::{
    build_op_graph, decode_schedule, derive_windows, encode_crawford_baker, gen_taillard_like,
    lower_bound, solve_makespan, validate_schedule, Window,
};
use qsat_core::solver::{Propagation, VsidsOnly};
use qsat_core::{Lit, OsspInstance, Solver, SolverConfig, SplitMix64, Status};
use qsat_testkit::{all_valid_schedules, optimal_makespan};

fn small_instance(jobs: usize, machines: usize, max_p: u64, seed: u64) -> OsspInstance {
    let mut rng = SplitMix64::new(seed);
    let rows = (0..jobs)
        .map(|_| (0..machines).map(|_| rng.range_inclusive(1, max_p) as u32).collect())
        .collect();
    OsspInstance::new(rows).unwrap()
}

#[test]
fn makespan_matches_exhaustive_search() {
    for (j, m, count) in [(2, 2, 30), (2, 3, 10), (3, 3, 8)] {
        for seed in 0..count {
            let a = small_instance(j, m, 4, seed);
            let opt = optimal_makespan(&a.rows());
            let (t, sched) = solve_makespan(&a, &SolverConfig::default()).unwrap();
            assert_eq!(t, opt, "{j}x{m} seed {seed}");
            assert!(validate_schedule(&sched, &a, t));
            assert_eq!(sched.makespan(&a), t);
            let (f, _) = encode_crawford_baker(&a, t - 1);
            let r = qsat_core::solve(&f, SolverConfig::default(), &mut VsidsOnly).unwrap();
            assert_eq!(r.status, Status::Unsat);
        }
    }
}

/// Enumerates models by blocking each decoded schedule; the decoded set must
/// equal the oracle's set of valid start vectors.
#[test]
fn models_decode_to_exactly_the_valid_schedules() {
    for seed in 0..6 {
        let a = small_instance(2, 2, 2, seed);
        let t = optimal_makespan(&a.rows()) + 1;
        let mut expected = all_valid_schedules(&a.rows(), t);
        expected.sort();
        let (mut f, map) = encode_crawford_baker(&a, t);
        let mut found = Vec::new();
        loop {
            let r = qsat_core::solve(&f, SolverConfig::default(), &mut VsidsOnly).unwrap();
            let Some(model) = r.model else { break };
            let s = decode_schedule(&model, &map).unwrap();
            assert!(validate_schedule(&s, &a, t));
            // Block every model with these start times.
            let mut block = Vec::new();
            for (i, &st) in s.start.iter().enumerate() {
                block.push(map.sa(i, st).neg());
                if st < t {
                    block.push(map.sa(i, st + 1).pos());
                }
            }
            f = f.with_clause(qsat_core::Clause::new(block).unwrap());
            found.push(s.start);
            assert!(found.len() <= expected.len(), "seed {seed}: duplicate decode");
        }
        found.sort();
        assert_eq!(found, expected, "seed {seed}");
    }
}

#[test]
fn op_graph_vertex_counts() {
    for j in 1..=7 {
        for m in 1..=7 {
            let a = gen_taillard_like(j, m, (j * 10 + m) as u64);
            let t = lower_bound(&a);
            let g = build_op_graph(&a, t, &vec![false; j * m * j * m], &vec![Window { est: 0, lct: t }; j * m]);
            assert_eq!(g.vertices.len(), j * m);
            for (i, v) in g.vertices.iter().enumerate() {
                assert_eq!(v.reported(), (a.duration(i), 1, t));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Windows only shrink as decisions accumulate.
    #[test]
    fn windows_shrink_monotonically(seed in any::<u64>(), picks in prop::collection::vec(any::<u32>(), 1..12)) {
        let a = small_instance(2, 3, 5, seed);
        let t = optimal_makespan(&a.rows()) + 2;
        let (f, map) = encode_crawford_baker(&a, t);
        let mut s = Solver::new(&f, SolverConfig::default()).unwrap();
        prop_assume!(s.unit_propagate() == Propagation::NoConflict);
        let mut prev = derive_windows(&|v| s.value(v), &map);
        for p in picks {
            let free: Vec<_> = s.unassigned_vars().collect();
            if free.is_empty() {
                break;
            }
            let v = free[p as usize % free.len()];
            s.decide(Lit::from_code(2 * v.index() + (p as usize / 7) % 2)).unwrap();
            if s.unit_propagate() != Propagation::NoConflict {
                break;
            }
            let w = derive_windows(&|v| s.value(v), &map);
            for (a, b) in prev.iter().zip(&w) {
                prop_assert!(b.est >= a.est && b.lct <= a.lct);
            }
            prev = w;
        }
    }
}
