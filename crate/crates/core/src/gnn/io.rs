//! Versioned text format for [`PolicyWeights`].
//!
//! ```text
//! GQW 1
//! hyper node_in=2 edge_in=2 global_in=1 hidden=64 core_layers=4 mlp_depth=1 io_depth=1 shared_core=0 node_out=2 edge_out=0 release_head=1
//! encoder.node.0.weight 64 2
//! <128 floats, row-major>
//! encoder.node.0.bias 64
//! <64 floats>
//! ...
//! ```
//!
//! Floats use Rust's shortest round-trip rendering, so `load(save(w)) == w`
//! bit for bit. Tensors appear in [`PolicyWeights::named_linears`] order.

use std::fmt::Write as _;

use thiserror::Error;

use super::net::{Hyper, PolicyWeights};

const MAGIC: &str = "GQW";
const VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WeightsError {
    #[error("unsupported weight file version {0} (expected {VERSION})")]
    Version(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("tensor {name}: expected shape {expected:?}, found {found:?}")]
    Shape {
        name: String,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("invalid hyperparameters: {0}")]
    Hyper(String),
}

fn hyper_line(h: &Hyper) -> String {
    format!(
        "hyper node_in={} edge_in={} global_in={} hidden={} core_layers={} mlp_depth={} io_depth={} shared_core={} node_out={} edge_out={} release_head={}",
        h.node_in,
        h.edge_in,
        h.global_in,
        h.hidden,
        h.core_layers,
        h.mlp_depth,
        h.io_depth,
        u8::from(h.shared_core),
        h.node_out,
        h.edge_out,
        u8::from(h.release_head),
    )
}

pub fn save_weights(weights: &PolicyWeights) -> String {
    let mut out = format!("{MAGIC} {VERSION}\n{}\n", hyper_line(&weights.hyper));
    let floats = |out: &mut String, xs: &[f64]| {
        let mut first = true;
        for x in xs {
            if !first {
                out.push(' ');
            }
            first = false;
            let _ = write!(out, "{x:e}");
        }
        out.push('\n');
    };
    for (name, lin) in weights.named_linears() {
        let _ = writeln!(out, "{name}.weight {} {}", lin.rows, lin.cols);
        floats(&mut out, &lin.weight);
        let _ = writeln!(out, "{name}.bias {}", lin.rows);
        floats(&mut out, &lin.bias);
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<&'a str, WeightsError> {
        match self.inner.next() {
            Some((i, l)) => {
                self.last = i + 1;
                Ok(l.trim())
            }
            None => Err(WeightsError::Parse {
                line: self.last + 1,
                msg: format!("unexpected end of input, expected {what}"),
            }),
        }
    }

    fn err(&self, msg: impl Into<String>) -> WeightsError {
        WeightsError::Parse {
            line: self.last,
            msg: msg.into(),
        }
    }
}

fn parse_hyper(line: &str, lines: &Lines<'_>) -> Result<Hyper, WeightsError> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some("hyper") {
        return Err(lines.err("expected `hyper` line"));
    }
    let mut h = Hyper::sat();
    let mut seen = 0;
    for kv in parts {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| lines.err(format!("bad field `{kv}`")))?;
        let n: usize = v
            .parse()
            .map_err(|_| lines.err(format!("bad value in `{kv}`")))?;
        match k {
            "node_in" => h.node_in = n,
            "edge_in" => h.edge_in = n,
            "global_in" => h.global_in = n,
            "hidden" => h.hidden = n,
            "core_layers" => h.core_layers = n,
            "mlp_depth" => h.mlp_depth = n,
            "io_depth" => h.io_depth = n,
            "shared_core" => h.shared_core = n != 0,
            "node_out" => h.node_out = n,
            "edge_out" => h.edge_out = n,
            "release_head" => h.release_head = n != 0,
            _ => return Err(lines.err(format!("unknown field `{k}`"))),
        }
        seen += 1;
    }
    if seen != 11 {
        return Err(lines.err("hyper line must set all 11 fields"));
    }
    h.validate().map_err(WeightsError::Hyper)?;
    Ok(h)
}

fn read_tensor(
    lines: &mut Lines<'_>,
    name: &str,
    dims: &[usize],
    dest: &mut [f64],
) -> Result<(), WeightsError> {
    let header = lines.next(name)?;
    let mut parts = header.split_whitespace();
    let got_name = parts.next().unwrap_or("");
    if got_name != name {
        return Err(lines.err(format!("expected tensor `{name}`, found `{got_name}`")));
    }
    let found: Vec<usize> = parts
        .map(|d| d.parse().map_err(|_| lines.err(format!("bad dimension `{d}`"))))
        .collect::<Result<_, _>>()?;
    if found != dims {
        return Err(WeightsError::Shape {
            name: name.to_string(),
            expected: dims.to_vec(),
            found,
        });
    }
    let body = lines.next("tensor values")?;
    let mut count = 0;
    for tok in body.split_whitespace() {
        if count == dest.len() {
            return Err(lines.err(format!("too many values for `{name}`")));
        }
        dest[count] = tok
            .parse()
            .map_err(|_| lines.err(format!("bad float `{tok}`")))?;
        count += 1;
    }
    if count != dest.len() {
        return Err(lines.err(format!(
            "`{name}` has {count} values, expected {}",
            dest.len()
        )));
    }
    Ok(())
}

pub fn load_weights(text: &str) -> Result<PolicyWeights, WeightsError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let magic = lines.next("header")?;
    match magic.split_whitespace().collect::<Vec<_>>().as_slice() {
        [MAGIC, v] if *v == VERSION.to_string() => {}
        [MAGIC, v] => return Err(WeightsError::Version(v.to_string())),
        _ => return Err(lines.err("missing `GQW <version>` header")),
    }
    let hyper = parse_hyper(lines.next("hyper line")?, &lines)?;
    let mut weights = PolicyWeights::zeros(hyper);
    for (name, lin) in weights.named_linears_mut() {
        let (rows, cols) = (lin.rows, lin.cols);
        read_tensor(&mut lines, &format!("{name}.weight"), &[rows, cols], &mut lin.weight)?;
        read_tensor(&mut lines, &format!("{name}.bias"), &[rows], &mut lin.bias)?;
    }
    if let Some((i, l)) = lines.inner.find(|(_, l)| !l.trim().is_empty()) {
        return Err(WeightsError::Parse {
            line: i + 1,
            msg: format!("trailing content `{}`", l.trim()),
        });
    }
    Ok(weights)
}
