//! Core algorithms: CNF model and DIMACS I/O, a CDCL solver with a pluggable
//! branching oracle, instance generators, open-shop scheduling encodings,
//! a graph-network Q-function and the controllers that hand branching
//! control from the network over to VSIDS.

pub mod cnf;
pub mod generators;
pub mod gnn;
pub mod handoff;
pub mod ossp;
pub mod rng;
pub mod solver;

pub use cnf::{parse_dimacs, write_dimacs, Clause, DimacsError, Formula, Lit, Var};
pub use gnn::{
    build_ossp_graph, build_sat_graph, forward, random_init, Action, GraphObservation, Hyper,
    PolicyWeights, QModel, QOutput,
};
pub use handoff::{Controller, ControllerStats, GraphMode, Strategy, StrategyKind};
pub use ossp::{OsspInstance, Schedule};
pub use rng::SplitMix64;
pub use solver::{
    luby, solve, BranchingOracle, MdpState, OracleDecision, OracleError, Restarts, SolveError, SolveResult,
    Solver, SolverConfig, SolverStats, Status,
};
