use crate::cnf::Lit;
use crate::ossp::OpGraph;
use crate::solver::MdpState;

/// A branching action the network can score.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    /// Assign this literal true.
    Literal(Lit),
    /// Operation `.0` before operation `.1`.
    Edge(usize, usize),
}

/// Where an action's Q-value is read from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionTarget {
    /// Output `slot` of the node decoder at `node`.
    Node { node: usize, slot: usize },
    /// The edge decoder output of edge `index`.
    Edge(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ActionSlot {
    pub action: Action,
    pub target: ActionTarget,
}

/// Attributed graph with row-major feature matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphObservation {
    pub node_dim: usize,
    pub edge_dim: usize,
    pub node_features: Vec<f64>,
    pub edges: Vec<(usize, usize)>,
    pub edge_features: Vec<f64>,
    pub global_features: Vec<f64>,
    /// Undirected edges feed aggregation at both endpoints; directed ones
    /// only at their target.
    pub undirected: bool,
    pub actions: Vec<ActionSlot>,
}

impl GraphObservation {
    pub fn num_nodes(&self) -> usize {
        if self.node_dim == 0 {
            0
        } else {
            self.node_features.len() / self.node_dim
        }
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.node_features[i * self.node_dim..(i + 1) * self.node_dim]
    }

    pub fn edge(&self, k: usize) -> &[f64] {
        &self.edge_features[k * self.edge_dim..(k + 1) * self.edge_dim]
    }
}

const VAR_ROLE: [f64; 2] = [1.0, 0.0];
const CLAUSE_ROLE: [f64; 2] = [0.0, 1.0];
const POSITIVE: [f64; 2] = [0.0, 1.0];
const NEGATED: [f64; 2] = [1.0, 0.0];

/// Variable-clause graph: variable nodes (ascending) then clause nodes, one
/// undirected edge per literal occurrence labeled `[0, 1]` if positive and
/// `[1, 0]` if negated. Each variable node carries two actions: slot 0 sets
/// the variable true, slot 1 false.
pub fn build_sat_graph(state: &MdpState) -> GraphObservation {
    let nv = state.variables.len();
    let max_var = state
        .variables
        .iter()
        .map(|v| v.index() + 1)
        .max()
        .unwrap_or(0);
    let mut node_of = vec![usize::MAX; max_var];
    for (i, v) in state.variables.iter().enumerate() {
        node_of[v.index()] = i;
    }

    let mut node_features = Vec::with_capacity(2 * (nv + state.clauses.len()));
    for _ in 0..nv {
        node_features.extend_from_slice(&VAR_ROLE);
    }
    for _ in &state.clauses {
        node_features.extend_from_slice(&CLAUSE_ROLE);
    }

    let mut edges = Vec::new();
    let mut edge_features = Vec::new();
    for (c, clause) in state.clauses.iter().enumerate() {
        for l in clause {
            let var_node = node_of[l.var().index()];
            debug_assert_ne!(var_node, usize::MAX, "literal over an assigned variable");
            edges.push((var_node, nv + c));
            edge_features.extend_from_slice(if l.is_positive() { &POSITIVE } else { &NEGATED });
        }
    }

    let mut actions = Vec::with_capacity(2 * nv);
    for (i, v) in state.variables.iter().enumerate() {
        actions.push(ActionSlot {
            action: Action::Literal(v.pos()),
            target: ActionTarget::Node { node: i, slot: 0 },
        });
        actions.push(ActionSlot {
            action: Action::Literal(v.neg()),
            target: ActionTarget::Node { node: i, slot: 1 },
        });
    }

    GraphObservation {
        node_dim: 2,
        edge_dim: 2,
        node_features,
        edges,
        edge_features,
        global_features: vec![0.0],
        undirected: true,
        actions,
    }
}

/// Operation graph observation: node features `(p, est, lct) / T`, a
/// constant edge feature, one action per directed edge.
pub fn build_ossp_graph(graph: &OpGraph) -> GraphObservation {
    let scale = 1.0 / graph.horizon.max(1) as f64;
    let mut node_features = Vec::with_capacity(3 * graph.vertices.len());
    for v in &graph.vertices {
        let (p, est, lct) = v.reported();
        node_features.extend_from_slice(&[p as f64 * scale, est as f64 * scale, lct as f64 * scale]);
    }
    let actions = graph
        .edges
        .iter()
        .enumerate()
        .map(|(k, &(i, j))| ActionSlot {
            action: Action::Edge(i, j),
            target: ActionTarget::Edge(k),
        })
        .collect();
    GraphObservation {
        node_dim: 3,
        edge_dim: 1,
        node_features,
        edges: graph.edges.clone(),
        edge_features: vec![1.0; graph.edges.len()],
        global_features: vec![0.0],
        undirected: false,
        actions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{Formula, Var};
    use crate::ossp::{build_op_graph, gen_taillard_like, OpLabel, Window};
    use crate::solver::{Solver, SolverConfig};

    fn lits(v: &[i32]) -> Vec<Lit> {
        v.iter().map(|&x| Lit::from_dimacs(x).unwrap()).collect()
    }

    #[test]
    fn figure_formula_graph() {
        // (x1 ∨ x2 ∨ ¬x3) ∧ (¬x2 ∨ x3 ∨ x4)
        let state = MdpState {
            variables: (0..4).map(Var).collect(),
            clauses: vec![lits(&[1, 2, -3]), lits(&[-2, 3, 4])],
        };
        let g = build_sat_graph(&state);
        assert_eq!(g.num_nodes(), 6);
        assert_eq!(g.num_edges(), 6);
        assert_eq!(g.node(0), &VAR_ROLE);
        assert_eq!(g.node(4), &CLAUSE_ROLE);
        let expected = [
            ((0, 4), POSITIVE),
            ((1, 4), POSITIVE),
            ((2, 4), NEGATED),
            ((1, 5), NEGATED),
            ((2, 5), POSITIVE),
            ((3, 5), POSITIVE),
        ];
        for (k, (e, label)) in expected.iter().enumerate() {
            assert_eq!(g.edges[k], *e);
            assert_eq!(g.edge(k), label);
        }
        assert_eq!(g.global_features, vec![0.0]);
        assert_eq!(g.actions.len(), 8);
    }

    #[test]
    fn unit_clause_graph() {
        let state = MdpState {
            variables: vec![Var(0)],
            clauses: vec![lits(&[1])],
        };
        let g = build_sat_graph(&state);
        assert_eq!((g.num_nodes(), g.num_edges()), (2, 1));
        assert_eq!(g.edge(0), &POSITIVE);
    }

    #[test]
    fn assigned_variable_removed() {
        let f = Formula::from_dimacs_clauses(4, &[vec![1, 2, -3], vec![-2, 3, 4]]).unwrap();
        let mut s = Solver::new(&f, SolverConfig::default()).unwrap();
        s.decide(Lit::from_dimacs(-3).unwrap()).unwrap();
        let g = build_sat_graph(&s.extract_mdp_state().unwrap());
        // First clause satisfied by ¬x3 and dropped; second keeps ¬x2, x4.
        assert_eq!(g.num_nodes(), 3 + 1);
        assert_eq!(g.edges, vec![(1, 3), (2, 3)]);

        let mut s = Solver::new(&f, SolverConfig::default()).unwrap();
        s.decide(Lit::from_dimacs(3).unwrap()).unwrap();
        let g = build_sat_graph(&s.extract_mdp_state().unwrap());
        // x3 true: first clause keeps (x1, x2), second is satisfied.
        assert_eq!(g.num_nodes(), 3 + 1);
        assert_eq!(g.edges, vec![(0, 3), (1, 3)]);
        assert!(g
            .actions
            .iter()
            .all(|a| a.action != Action::Literal(Var(2).pos())));
    }

    #[test]
    fn ossp_observation() {
        let a = gen_taillard_like(7, 7, 2);
        let t = 700;
        let g = build_op_graph(&a, t, &vec![false; 49 * 49], &vec![Window { est: 0, lct: t }; 49]);
        let obs = build_ossp_graph(&g);
        assert_eq!(obs.num_nodes(), 49);
        for i in 0..49 {
            let expect = [a.duration(i) as f64 / t as f64, 1.0 / t as f64, 1.0];
            assert_eq!(obs.node(i), &expect);
        }
        assert_eq!(obs.actions.len(), obs.num_edges());

        let single = OpGraph {
            horizon: 5,
            vertices: vec![OpLabel { p: 5, est: 0, lct: 5 }],
            edges: vec![],
        };
        let obs = build_ossp_graph(&single);
        assert_eq!((obs.num_nodes(), obs.num_edges(), obs.actions.len()), (1, 0, 0));
    }
}
