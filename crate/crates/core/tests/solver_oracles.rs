use proptest::prelude::*;
use qsat_core::generators::{gen_random_3sat, gen_sr_pair};
use qsat_core::solver::{ConflictAnalysis, Propagation, VsidsOnly};
use qsat_core::{
    parse_dimacs, solve, write_dimacs, BranchingOracle, Formula, OracleDecision, OracleError,
    Restarts, Solver, SolverConfig, SplitMix64, Status, Var,
};
use qsat_testkit::{entails, model_satisfies, truth_table_sat};

fn small_formula() -> impl Strategy<Value = (usize, Vec<Vec<i32>>)> {
    (1usize..=10).prop_flat_map(|n| {
        let lit = (1..=n as i32, any::<bool>()).prop_map(|(v, s)| if s { v } else { -v });
        let clause = prop::collection::vec(lit, 1..=4);
        (Just(n), prop::collection::vec(clause, 0..=40))
    })
}

/// Decides a random unassigned literal for its first `budget` calls.
struct RandomOracle {
    rng: SplitMix64,
    budget: u32,
}

impl BranchingOracle for RandomOracle {
    fn decide(&mut self, solver: &Solver) -> Result<OracleDecision, OracleError> {
        if self.budget == 0 {
            return Ok(OracleDecision::release());
        }
        self.budget -= 1;
        let free: Vec<Var> = solver.unassigned_vars().collect();
        let v = free[self.rng.below(free.len() as u64) as usize];
        Ok(OracleDecision::Decide(v.lit(self.rng.bernoulli(0.5))))
    }
}

fn configs() -> Vec<SolverConfig> {
    vec![
        SolverConfig::default(),
        SolverConfig::without_restarts(),
        SolverConfig {
            restarts: Restarts::Luby { base: 1 },
            clause_deletion: true,
            learnt_size_factor: 0.05,
            ..Default::default()
        },
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn status_matches_truth_table((n, clauses) in small_formula()) {
        let f = Formula::from_dimacs_clauses(n, &clauses).unwrap();
        let expect = truth_table_sat(n, &clauses);
        for config in configs() {
            let r = solve(&f, config, &mut VsidsOnly).unwrap();
            prop_assert_eq!(r.status == Status::Sat, expect);
            if let Some(m) = &r.model {
                prop_assert!(model_satisfies(m, &clauses));
            }
        }
    }

    #[test]
    fn learned_clauses_are_implied((n, clauses) in small_formula()) {
        let f = Formula::from_dimacs_clauses(n, &clauses).unwrap();
        let mut s = Solver::new(&f, SolverConfig::without_restarts()).unwrap();
        s.solve(&mut VsidsOnly).unwrap();
        for c in s.learned_clauses() {
            let c: Vec<i32> = c.iter().map(|l| l.to_dimacs()).collect();
            prop_assert!(entails(n, &clauses, &c), "{:?}", c);
        }
    }

    #[test]
    fn oracle_choice_never_changes_status((n, clauses) in small_formula(), seed in any::<u64>(), budget in 0u32..8) {
        let f = Formula::from_dimacs_clauses(n, &clauses).unwrap();
        let base = solve(&f, SolverConfig::default(), &mut VsidsOnly).unwrap().status;
        for config in configs() {
            let mut oracle = RandomOracle { rng: SplitMix64::new(seed), budget };
            let r = solve(&f, config, &mut oracle).unwrap();
            prop_assert_eq!(r.status, base);
            prop_assert!(r.stats.oracle_decisions <= u64::from(budget));
        }
    }

    #[test]
    fn dimacs_round_trip(seed in any::<u64>()) {
        let pair = gen_sr_pair(10, seed).unwrap();
        for f in [&pair.unsat, &pair.sat] {
            let text = write_dimacs(f);
            prop_assert_eq!(&parse_dimacs(&text).unwrap(), f);
        }
    }

    #[test]
    fn learned_clauses_assert_one_literal((n, clauses) in small_formula(), seed in any::<u64>()) {
        let f = Formula::from_dimacs_clauses(n, &clauses).unwrap();
        let mut s = Solver::new(&f, SolverConfig::default()).unwrap();
        let mut rng = SplitMix64::new(seed);
        if s.unit_propagate() != Propagation::NoConflict {
            return Ok(());
        }
        for _ in 0..50 {
            let free: Vec<Var> = s.unassigned_vars().collect();
            if free.is_empty() {
                break;
            }
            let v = free[rng.below(free.len() as u64) as usize];
            s.decide(v.lit(rng.bernoulli(0.5))).unwrap();
            while let Propagation::Conflict(c) = s.unit_propagate() {
                let mut level = vec![None; n];
                for e in s.trail() {
                    level[e.lit.var().index()] = Some(e.level);
                }
                let current = s.decision_level();
                match s.analyze_conflict(c) {
                    ConflictAnalysis::Unsat => return Ok(()),
                    ConflictAnalysis::Learned { clause, backjump_level } => {
                        let levels_before: Vec<Option<u32>> =
                            clause.iter().map(|l| level[l.var().index()]).collect();
                        for &l in &clause {
                            prop_assert_eq!(s.lit_value(l), Some(false));
                        }
                        let at_current = levels_before.iter().filter(|&&x| x == Some(current)).count();
                        prop_assert_eq!(at_current, 1);
                        prop_assert_eq!(levels_before[0], Some(current));
                        let rest = levels_before[1..].iter().map(|x| x.unwrap()).max().unwrap_or(0);
                        prop_assert_eq!(rest, backjump_level);
                        let lits: Vec<i32> = clause.iter().map(|l| l.to_dimacs()).collect();
                        prop_assert!(entails(n, &clauses, &lits));
                        s.backjump(backjump_level);
                        s.learn(clause);
                    }
                }
            }
        }
    }
}

#[test]
fn random_3sat_around_threshold_matches_truth_table() {
    for seed in 0..200u64 {
        let n = 8 + (seed % 10) as usize;
        let f = gen_random_3sat(n, (4.26 * n as f64).round() as usize, seed).unwrap();
        let clauses = f.to_dimacs_clauses();
        let expect = truth_table_sat(n, &clauses);
        let got = solve(&f, SolverConfig::default(), &mut VsidsOnly).unwrap().status;
        assert_eq!(got == Status::Sat, expect, "seed {seed}");
    }
}
