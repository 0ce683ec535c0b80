//! Operation graph: one vertex per operation, one directed edge per
//! still-open precedence choice.

use crate::cnf::{Lit, Var};

use super::{CbVarMap, OsspError, OsspInstance};

/// Time window of an operation, 0-based: earliest start and latest
/// completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub est: u32,
    pub lct: u32,
}

/// Vertex label `(p, est, lct)` in the internal 0-based convention.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OpLabel {
    pub p: u32,
    pub est: u32,
    pub lct: u32,
}

impl OpLabel {
    /// Label with a 1-based earliest start, as reported to users; the
    /// initial state reads `(p, 1, T)`.
    pub fn reported(&self) -> (u32, u32, u32) {
        (self.p, self.est + 1, self.lct)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpGraph {
    pub horizon: u32,
    pub vertices: Vec<OpLabel>,
    /// `(i, j)`: "operation `i` before `j`", sorted.
    pub edges: Vec<(usize, usize)>,
}

/// Windows from the current partial assignment: `est` is the greatest `t`
/// with `sa(i, t)` true (0 if none), `lct` the least `t` with `eb(i, t)` true
/// (`T` if none).
pub fn derive_windows(value: &dyn Fn(Var) -> Option<bool>, map: &CbVarMap) -> Vec<Window> {
    let big_t = map.horizon();
    (0..map.num_ops())
        .map(|i| {
            let est = (0..=big_t)
                .rev()
                .find(|&t| value(map.sa(i, t)) == Some(true))
                .unwrap_or(0);
            let lct = (1..=big_t)
                .find(|&t| value(map.eb(i, t)) == Some(true))
                .unwrap_or(big_t);
            Window { est, lct }
        })
        .collect()
}

/// `ops x ops` matrix; entry `(i, j)` is set when `pr(i, j)` is assigned.
pub fn decided_pairs(value: &dyn Fn(Var) -> Option<bool>, map: &CbVarMap) -> Vec<bool> {
    let ops = map.num_ops();
    let mut out = vec![false; ops * ops];
    for &(i, j) in map.pr_pairs() {
        let v = map.pr(i, j).expect("pair");
        out[i * ops + j] = value(v).is_some();
    }
    out
}

/// Builds the graph. Edge `(i, j)` exists iff `i` and `j` conflict, neither
/// orientation is decided, and `j`'s window admits `i` first:
/// `est(i) + p_i + p_j <= lct(j)`.
pub fn build_op_graph(
    instance: &OsspInstance,
    horizon: u32,
    decided: &[bool],
    windows: &[Window],
) -> OpGraph {
    let ops = instance.num_ops();
    assert_eq!(windows.len(), ops);
    assert_eq!(decided.len(), ops * ops);
    let vertices = (0..ops)
        .map(|i| OpLabel {
            p: instance.duration(i),
            est: windows[i].est,
            lct: windows[i].lct,
        })
        .collect();
    let mut edges = Vec::new();
    for i in 0..ops {
        for j in 0..ops {
            if !instance.conflicting(i, j) || decided[i * ops + j] || decided[j * ops + i] {
                continue;
            }
            let finish = windows[i].est as u64 + instance.duration(i) as u64 + instance.duration(j) as u64;
            if finish <= windows[j].lct as u64 {
                edges.push((i, j));
            }
        }
    }
    OpGraph {
        horizon,
        vertices,
        edges,
    }
}

/// The decision literal for edge `(i, j)`: `pr(i, j)` asserted true.
pub fn apply_edge_action(edge: (usize, usize), map: &CbVarMap) -> Result<Lit, OsspError> {
    map.pr(edge.0, edge.1)
        .map(Var::pos)
        .ok_or(OsspError::NoPrecedenceVar(edge.0, edge.1))
}
