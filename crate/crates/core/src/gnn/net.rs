use crate::rng::SplitMix64;

use super::obs::{ActionTarget, GraphObservation};
use super::{GnnError, QOutput};

/// Network shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hyper {
    pub node_in: usize,
    pub edge_in: usize,
    pub global_in: usize,
    /// Embedding width for nodes, edges and the global vector.
    pub hidden: usize,
    pub core_layers: usize,
    /// Linear+ReLU layers inside each of phi_e, phi_v, phi_u.
    pub mlp_depth: usize,
    /// Linear+ReLU layers per encoder role, and hidden layers per decoder.
    pub io_depth: usize,
    /// Reuse one set of core weights for every iteration.
    pub shared_core: bool,
    /// Node decoder outputs (2 for literal Q-values, 0 for none).
    pub node_out: usize,
    /// Edge decoder outputs (1 for edge actions, 0 for none).
    pub edge_out: usize,
    pub release_head: bool,
}

impl Hyper {
    /// Variable-clause graphs: 4 core layers of depth 1.
    pub fn sat() -> Self {
        Hyper {
            node_in: 2,
            edge_in: 2,
            global_in: 1,
            hidden: 64,
            core_layers: 4,
            mlp_depth: 1,
            io_depth: 1,
            shared_core: false,
            node_out: 2,
            edge_out: 0,
            release_head: true,
        }
    }

    /// Operation graphs: edge-scored actions.
    pub fn ossp() -> Self {
        Hyper {
            node_in: 3,
            edge_in: 1,
            node_out: 0,
            edge_out: 1,
            ..Hyper::sat()
        }
    }

    /// 13 core layers, each MLP two layers deep.
    pub fn extended(self) -> Self {
        Hyper {
            core_layers: 13,
            mlp_depth: 2,
            ..self
        }
    }

    pub fn with_hidden(self, hidden: usize) -> Self {
        Hyper { hidden, ..self }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.hidden == 0 || self.core_layers == 0 || self.mlp_depth == 0 || self.io_depth == 0 {
            return Err("hidden, core_layers, mlp_depth and io_depth must be positive".into());
        }
        if self.node_in == 0 || self.edge_in == 0 || self.global_in == 0 {
            return Err("input dimensions must be positive".into());
        }
        Ok(())
    }
}

/// `y = W x + b` with `W` row-major `rows x cols`.
#[derive(Clone, Debug, PartialEq)]
pub struct Linear {
    pub rows: usize,
    pub cols: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Linear {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Linear {
            rows,
            cols,
            weight: vec![0.0; rows * cols],
            bias: vec![0.0; rows],
        }
    }

    /// `out = b + W x`.
    fn apply(&self, x: &[f64], out: &mut [f64], macs: &mut u64) {
        out.copy_from_slice(&self.bias);
        self.add_block(0, x, out, macs);
    }

    /// `out += W[:, offset..offset + x.len()] x`, for inputs that are
    /// concatenations of blocks.
    fn add_block(&self, offset: usize, x: &[f64], out: &mut [f64], macs: &mut u64) {
        debug_assert!(offset + x.len() <= self.cols);
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.weight[r * self.cols + offset..r * self.cols + offset + x.len()];
            let mut acc = 0.0;
            for (w, xi) in row.iter().zip(x) {
                acc += w * xi;
            }
            *o += acc;
        }
        *macs += (self.rows * x.len()) as u64;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Linear>,
}

impl Mlp {
    /// `depth` layers mapping `input -> width -> ... -> width`.
    fn stack(input: usize, width: usize, depth: usize) -> Self {
        let mut layers = vec![Linear::zeros(width, input)];
        for _ in 1..depth {
            layers.push(Linear::zeros(width, width));
        }
        Mlp { layers }
    }

    /// Runs layers `from..` on `x`; ReLU after each unless it is the last
    /// layer and `linear_last`.
    fn run_from(&self, from: usize, mut x: Vec<f64>, linear_last: bool, macs: &mut u64) -> Vec<f64> {
        let n = self.layers.len();
        for (k, layer) in self.layers.iter().enumerate().skip(from) {
            let mut y = vec![0.0; layer.rows];
            layer.apply(&x, &mut y, macs);
            if !(linear_last && k + 1 == n) {
                relu(&mut y);
            }
            x = y;
        }
        x
    }

    fn first(&self) -> &Linear {
        &self.layers[0]
    }
}

#[inline]
fn relu(x: &mut [f64]) {
    for v in x {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoreLayer {
    pub phi_e: Mlp,
    pub phi_v: Mlp,
    pub phi_u: Mlp,
}

/// Parameters of the encoder-core-decoder network.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyWeights {
    pub hyper: Hyper,
    pub node_enc: Mlp,
    pub edge_enc: Mlp,
    pub global_enc: Mlp,
    pub core: Vec<CoreLayer>,
    pub node_dec: Option<Mlp>,
    pub edge_dec: Option<Mlp>,
    pub release: Option<Mlp>,
}

fn decoder(hidden: usize, hidden_layers: usize, out: usize) -> Mlp {
    let mut layers: Vec<Linear> = (0..hidden_layers).map(|_| Linear::zeros(hidden, hidden)).collect();
    layers.push(Linear::zeros(out, hidden));
    Mlp { layers }
}

impl PolicyWeights {
    /// All-zero parameters of the given shape.
    pub fn zeros(hyper: Hyper) -> Self {
        let h = hyper.hidden;
        let core_count = if hyper.shared_core { 1 } else { hyper.core_layers };
        let core = (0..core_count)
            .map(|_| CoreLayer {
                phi_e: Mlp::stack(4 * h, h, hyper.mlp_depth),
                phi_v: Mlp::stack(3 * h, h, hyper.mlp_depth),
                phi_u: Mlp::stack(3 * h, h, hyper.mlp_depth),
            })
            .collect();
        PolicyWeights {
            node_enc: Mlp::stack(hyper.node_in, h, hyper.io_depth),
            edge_enc: Mlp::stack(hyper.edge_in, h, hyper.io_depth),
            global_enc: Mlp::stack(hyper.global_in, h, hyper.io_depth),
            core,
            node_dec: (hyper.node_out > 0).then(|| decoder(h, hyper.io_depth, hyper.node_out)),
            edge_dec: (hyper.edge_out > 0).then(|| decoder(h, hyper.io_depth, hyper.edge_out)),
            release: hyper.release_head.then(|| decoder(h, 1, 1)),
            hyper,
        }
    }

    fn core_layer(&self, l: usize) -> &CoreLayer {
        if self.hyper.shared_core {
            &self.core[0]
        } else {
            &self.core[l]
        }
    }

    /// Every linear map with its stable name, in serialization order.
    pub fn named_linears(&self) -> Vec<(String, &Linear)> {
        let mut out = Vec::new();
        fn push<'a>(out: &mut Vec<(String, &'a Linear)>, prefix: &str, mlp: &'a Mlp) {
            for (k, l) in mlp.layers.iter().enumerate() {
                out.push((format!("{prefix}.{k}"), l));
            }
        }
        push(&mut out, "encoder.node", &self.node_enc);
        push(&mut out, "encoder.edge", &self.edge_enc);
        push(&mut out, "encoder.global", &self.global_enc);
        for (l, c) in self.core.iter().enumerate() {
            push(&mut out, &format!("core.{l}.edge"), &c.phi_e);
            push(&mut out, &format!("core.{l}.node"), &c.phi_v);
            push(&mut out, &format!("core.{l}.global"), &c.phi_u);
        }
        if let Some(m) = &self.node_dec {
            push(&mut out, "decoder.node", m);
        }
        if let Some(m) = &self.edge_dec {
            push(&mut out, "decoder.edge", m);
        }
        if let Some(m) = &self.release {
            push(&mut out, "release", m);
        }
        out
    }

    pub fn named_linears_mut(&mut self) -> Vec<(String, &mut Linear)> {
        let mut out = Vec::new();
        fn push<'a>(out: &mut Vec<(String, &'a mut Linear)>, prefix: &str, mlp: &'a mut Mlp) {
            for (k, l) in mlp.layers.iter_mut().enumerate() {
                out.push((format!("{prefix}.{k}"), l));
            }
        }
        push(&mut out, "encoder.node", &mut self.node_enc);
        push(&mut out, "encoder.edge", &mut self.edge_enc);
        push(&mut out, "encoder.global", &mut self.global_enc);
        for (l, c) in self.core.iter_mut().enumerate() {
            push(&mut out, &format!("core.{l}.edge"), &mut c.phi_e);
            push(&mut out, &format!("core.{l}.node"), &mut c.phi_v);
            push(&mut out, &format!("core.{l}.global"), &mut c.phi_u);
        }
        if let Some(m) = &mut self.node_dec {
            push(&mut out, "decoder.node", m);
        }
        if let Some(m) = &mut self.edge_dec {
            push(&mut out, "decoder.edge", m);
        }
        if let Some(m) = &mut self.release {
            push(&mut out, "release", m);
        }
        out
    }
}

/// Uniform `(-s, s)` entries, `s = 1 / sqrt(fan_in)`, drawn tensor by tensor
/// in serialization order (weight, then bias).
pub fn random_init(hyper: Hyper, seed: u64) -> PolicyWeights {
    let mut w = PolicyWeights::zeros(hyper);
    let mut rng = SplitMix64::new(seed);
    for (_, lin) in w.named_linears_mut() {
        let s = 1.0 / (lin.cols as f64).sqrt();
        for x in lin.weight.iter_mut().chain(lin.bias.iter_mut()) {
            *x = s * (2.0 * rng.unit() - 1.0);
        }
    }
    w
}

/// Multiply-accumulate count of one forward pass.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ForwardStats {
    pub macs: u64,
}

pub fn forward(obs: &GraphObservation, weights: &PolicyWeights) -> Result<QOutput, GnnError> {
    forward_with_stats(obs, weights).map(|(q, _)| q)
}

fn check(obs: &GraphObservation, hy: &Hyper) -> Result<(), GnnError> {
    let dim = |what, expected, got| {
        if expected == got {
            Ok(())
        } else {
            Err(GnnError::Dimension {
                what,
                expected,
                got,
            })
        }
    };
    dim("node features", hy.node_in, obs.node_dim)?;
    dim("edge features", hy.edge_in, obs.edge_dim)?;
    dim("global features", hy.global_in, obs.global_features.len())?;
    dim(
        "node feature matrix",
        obs.num_nodes() * obs.node_dim,
        obs.node_features.len(),
    )?;
    dim(
        "edge feature matrix",
        obs.num_edges() * obs.edge_dim,
        obs.edge_features.len(),
    )?;
    let n = obs.num_nodes();
    for (k, &(a, b)) in obs.edges.iter().enumerate() {
        for node in [a, b] {
            if node >= n {
                return Err(GnnError::DanglingEdge { edge: k, node, nodes: n });
            }
        }
    }
    for slot in &obs.actions {
        match slot.target {
            ActionTarget::Node { node, slot } => {
                if hy.node_out == 0 {
                    return Err(GnnError::NoDecoder("node"));
                }
                dim("node decoder slot", hy.node_out, hy.node_out.max(slot + 1))?;
                if node >= n {
                    return Err(GnnError::DanglingEdge { edge: usize::MAX, node, nodes: n });
                }
            }
            ActionTarget::Edge(k) => {
                if hy.edge_out == 0 {
                    return Err(GnnError::NoDecoder("edge"));
                }
                dim("edge index", obs.num_edges(), obs.num_edges().max(k + 1))?;
            }
        }
    }
    Ok(())
}

fn mean_into(out: &mut [f64], rows: &[f64], count: usize) {
    if count > 0 {
        let inv = 1.0 / count as f64;
        for (o, r) in out.iter_mut().zip(rows) {
            *o = r * inv;
        }
    }
}

/// Forward pass. Summation runs in node/edge index order, so equal inputs
/// give bitwise-equal outputs.
pub fn forward_with_stats(
    obs: &GraphObservation,
    weights: &PolicyWeights,
) -> Result<(QOutput, ForwardStats), GnnError> {
    let hy = &weights.hyper;
    check(obs, hy)?;
    let h = hy.hidden;
    let n = obs.num_nodes();
    let m = obs.num_edges();
    let mut macs = 0u64;

    let encode = |mlp: &Mlp, x: &[f64], macs: &mut u64| mlp.run_from(0, x.to_vec(), false, macs);
    let mut v: Vec<f64> = Vec::with_capacity(n * h);
    for i in 0..n {
        v.extend(encode(&weights.node_enc, obs.node(i), &mut macs));
    }
    let mut e: Vec<f64> = Vec::with_capacity(m * h);
    for k in 0..m {
        e.extend(encode(&weights.edge_enc, obs.edge(k), &mut macs));
    }
    let mut u = encode(&weights.global_enc, &obs.global_features, &mut macs);

    // Aggregation targets and their in-degrees.
    let mut degree = vec![0usize; n];
    for &(a, b) in &obs.edges {
        degree[b] += 1;
        if obs.undirected {
            degree[a] += 1;
        }
    }

    let mut node_a = vec![0.0; n * h];
    let mut node_b = vec![0.0; n * h];
    let mut pre = vec![0.0; h];
    for l in 0..hy.core_layers {
        let layer = weights.core_layer(l);

        // Edges: phi_e(u, e_ij, v_i, v_j), first layer split by input block.
        let first = layer.phi_e.first();
        let mut base = vec![0.0; h];
        first.apply(&[], &mut base, &mut macs);
        first.add_block(0, &u, &mut base, &mut macs);
        for i in 0..n {
            let vi = &v[i * h..(i + 1) * h];
            let (a, b) = (&mut node_a[i * h..(i + 1) * h], &mut node_b[i * h..(i + 1) * h]);
            a.fill(0.0);
            b.fill(0.0);
            first.add_block(2 * h, vi, a, &mut macs);
            first.add_block(3 * h, vi, b, &mut macs);
        }
        let mut e_next = Vec::with_capacity(m * h);
        for (k, &(src, dst)) in obs.edges.iter().enumerate() {
            pre.copy_from_slice(&base);
            first.add_block(h, &e[k * h..(k + 1) * h], &mut pre, &mut macs);
            for r in 0..h {
                pre[r] += node_a[src * h + r] + node_b[dst * h + r];
            }
            relu(&mut pre);
            e_next.extend(layer.phi_e.run_from(1, pre.clone(), false, &mut macs));
        }
        e = e_next;

        // Nodes: phi_v(u, v_i, mean of incident edges).
        let mut agg = vec![0.0; n * h];
        for (k, &(a, b)) in obs.edges.iter().enumerate() {
            let ek = &e[k * h..(k + 1) * h];
            for r in 0..h {
                agg[b * h + r] += ek[r];
            }
            if obs.undirected {
                for r in 0..h {
                    agg[a * h + r] += ek[r];
                }
            }
        }
        let first = layer.phi_v.first();
        let mut base = vec![0.0; h];
        first.apply(&[], &mut base, &mut macs);
        first.add_block(0, &u, &mut base, &mut macs);
        let mut v_next = Vec::with_capacity(n * h);
        let mut mean = vec![0.0; h];
        for i in 0..n {
            pre.copy_from_slice(&base);
            first.add_block(h, &v[i * h..(i + 1) * h], &mut pre, &mut macs);
            mean.fill(0.0);
            mean_into(&mut mean, &agg[i * h..(i + 1) * h], degree[i]);
            first.add_block(2 * h, &mean, &mut pre, &mut macs);
            relu(&mut pre);
            v_next.extend(layer.phi_v.run_from(1, pre.clone(), false, &mut macs));
        }
        v = v_next;

        // Global: phi_u(u, mean e, mean v).
        let mut sum_e = vec![0.0; h];
        for k in 0..m {
            for r in 0..h {
                sum_e[r] += e[k * h + r];
            }
        }
        let mut sum_v = vec![0.0; h];
        for i in 0..n {
            for r in 0..h {
                sum_v[r] += v[i * h + r];
            }
        }
        let mut mean_e = vec![0.0; h];
        mean_into(&mut mean_e, &sum_e, m);
        let mut mean_v = vec![0.0; h];
        mean_into(&mut mean_v, &sum_v, n);
        let mut x = Vec::with_capacity(3 * h);
        x.extend_from_slice(&u);
        x.extend_from_slice(&mean_e);
        x.extend_from_slice(&mean_v);
        u = layer.phi_u.run_from(0, x, false, &mut macs);
    }

    // Decode only what the actions read.
    let mut node_cache: Vec<Option<Vec<f64>>> = vec![None; n];
    let mut q = Vec::with_capacity(obs.actions.len());
    for slot in &obs.actions {
        let value = match slot.target {
            ActionTarget::Node { node, slot: s } => {
                let dec = weights.node_dec.as_ref().expect("checked");
                let out = node_cache[node].get_or_insert_with(|| {
                    dec.run_from(0, v[node * h..(node + 1) * h].to_vec(), true, &mut macs)
                });
                out[s]
            }
            ActionTarget::Edge(k) => {
                let dec = weights.edge_dec.as_ref().expect("checked");
                dec.run_from(0, e[k * h..(k + 1) * h].to_vec(), true, &mut macs)[0]
            }
        };
        q.push((slot.action, value));
    }
    let q_release = weights
        .release
        .as_ref()
        .map(|head| head.run_from(0, u.clone(), true, &mut macs)[0]);

    Ok((QOutput { q, q_release }, ForwardStats { macs }))
}
