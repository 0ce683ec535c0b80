//! Encoder-core-decoder graph network producing Q-values over branching
//! actions.
//!
//! Observations come from either the solver's variable-clause graph or the
//! open-shop operation graph. The core runs `L` message-passing layers, each
//! updating edges, then nodes, then the global vector:
//!
//! ```text
//! e_ij := phi_e(u, e_ij, v_i, v_j)
//! v_i  := phi_v(u, v_i, mean{e_ki})
//! u    := phi_u(u, mean{e}, mean{v})
//! ```

mod io;
mod net;
mod obs;

pub use io::{load_weights, save_weights, WeightsError};
pub use net::{
    forward, forward_with_stats, random_init, ForwardStats, Hyper, Linear, Mlp, PolicyWeights,
};
pub use obs::{
    build_ossp_graph, build_sat_graph, Action, ActionSlot, ActionTarget, GraphObservation,
};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GnnError {
    #[error("{what}: expected dimension {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("edge {edge} references node {node} of {nodes}")]
    DanglingEdge { edge: usize, node: usize, nodes: usize },
    #[error("observation has {0} actions but the network has no matching decoder")]
    NoDecoder(&'static str),
}

/// Q-values for every valid action of one observation, in action order.
#[derive(Clone, Debug, PartialEq)]
pub struct QOutput {
    pub q: Vec<(Action, f64)>,
    /// Present only when the network has a release head.
    pub q_release: Option<f64>,
}

impl QOutput {
    /// Highest-Q action; ties go to the lowest action index.
    pub fn argmax(&self) -> Option<(Action, f64)> {
        let mut best: Option<(Action, f64)> = None;
        for &(a, q) in &self.q {
            if best.is_none_or(|(_, b)| q > b) {
                best = Some((a, q));
            }
        }
        best
    }

    /// The `k` best actions by descending Q, ties by action index.
    pub fn top_k(&self, k: usize) -> Vec<Action> {
        let mut order: Vec<usize> = (0..self.q.len()).collect();
        order.sort_by(|&a, &b| self.q[b].1.total_cmp(&self.q[a].1).then(a.cmp(&b)));
        order.into_iter().take(k).map(|i| self.q[i].0).collect()
    }

    pub fn get(&self, action: Action) -> Option<f64> {
        self.q.iter().find(|(a, _)| *a == action).map(|&(_, q)| q)
    }
}

/// Anything that scores the actions of an observation.
pub trait QModel: Send + Sync {
    fn evaluate(&self, obs: &GraphObservation) -> Result<QOutput, GnnError>;

    fn has_release_head(&self) -> bool;
}

impl QModel for PolicyWeights {
    fn evaluate(&self, obs: &GraphObservation) -> Result<QOutput, GnnError> {
        forward(obs, self)
    }

    fn has_release_head(&self) -> bool {
        self.hyper.release_head
    }
}
