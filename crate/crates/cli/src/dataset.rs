//! Benchmark datasets: DIMACS directories, seeded generators and open-shop
//! instances.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use qsat_core::generators::{gen_coloring, gen_random_3sat, gen_sr_pair, GenError};
use qsat_core::ossp::gen_taillard_like;
use qsat_core::rng::derive_seed;
use qsat_core::{parse_dimacs, Formula, OsspInstance};

use crate::HarnessError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DatasetSpec {
    /// Every `*.cnf` file in a directory, by file name.
    Dir(PathBuf),
    /// `count` instances alternating UNSAT/SAT members of successive SR(n)
    /// pairs.
    Sr { n: usize, count: usize, seed: u64 },
    ThreeSat { vars: usize, clauses: usize, count: usize, seed: u64 },
    Color { vertices: usize, edges: usize, colors: usize, count: usize, seed: u64 },
    /// One instance file, or every file in a directory.
    OsspFile(PathBuf),
    OsspGen { jobs: usize, machines: usize, count: usize, seed: u64 },
}

impl DatasetSpec {
    /// Parses a `--gen` value: `sr:n:count:seed`, `3sat:v:c:count:seed` or
    /// `color:v:e:k:count:seed`.
    pub fn parse_gen(s: &str) -> Result<Self, HarnessError> {
        let bad = || HarnessError::Spec(format!("bad generator `{s}`"));
        let mut parts = s.split(':');
        let kind = parts.next().ok_or_else(bad)?;
        let nums: Vec<u64> = parts
            .map(|p| p.parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        let u = |i: usize| nums[i] as usize;
        match (kind, nums.len()) {
            ("sr", 3) => Ok(DatasetSpec::Sr { n: u(0), count: u(1), seed: nums[2] }),
            ("3sat", 4) => Ok(DatasetSpec::ThreeSat {
                vars: u(0),
                clauses: u(1),
                count: u(2),
                seed: nums[3],
            }),
            ("color", 5) => Ok(DatasetSpec::Color {
                vertices: u(0),
                edges: u(1),
                colors: u(2),
                count: u(3),
                seed: nums[4],
            }),
            _ => Err(bad()),
        }
    }

    /// Parses an `--ossp-gen` value: `<j>x<m>:count:seed`.
    pub fn parse_ossp_gen(s: &str) -> Result<Self, HarnessError> {
        let bad = || HarnessError::Spec(format!("bad open-shop generator `{s}`"));
        let mut parts = s.split(':');
        let shape = parts.next().ok_or_else(bad)?;
        let (j, m) = shape.split_once('x').ok_or_else(bad)?;
        let rest: Vec<u64> = parts
            .map(|p| p.parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        let [count, seed] = rest[..] else { return Err(bad()) };
        let jobs: usize = j.parse().map_err(|_| bad())?;
        let machines: usize = m.parse().map_err(|_| bad())?;
        if jobs == 0 || machines == 0 {
            return Err(bad());
        }
        Ok(DatasetSpec::OsspGen { jobs, machines, count: count as usize, seed })
    }

    pub fn is_ossp(&self) -> bool {
        matches!(self, DatasetSpec::OsspFile(_) | DatasetSpec::OsspGen { .. })
    }

    pub fn load(&self) -> Result<Vec<Instance>, HarnessError> {
        let gen = |e: GenError| HarnessError::Generator(e.to_string());
        let mut out = Vec::new();
        match self {
            DatasetSpec::Dir(dir) => {
                for path in sorted_files(dir, Some("cnf"))? {
                    let text = read(&path)?;
                    let formula = parse_dimacs(&text).map_err(|e| HarnessError::Dataset {
                        path: path.clone(),
                        msg: e.to_string(),
                    })?;
                    out.push(Instance::sat(file_name(&path), formula));
                }
            }
            &DatasetSpec::Sr { n, count, seed } => {
                for k in 0..count {
                    let pair = gen_sr_pair(n, derive_seed(seed, k as u64)).map_err(gen)?;
                    let (formula, tag) = if k % 2 == 0 {
                        (pair.unsat, "unsat")
                    } else {
                        (pair.sat, "sat")
                    };
                    out.push(Instance::sat(format!("sr{n}-{seed}-{k:04}-{tag}"), formula));
                }
            }
            &DatasetSpec::ThreeSat { vars, clauses, count, seed } => {
                for k in 0..count {
                    let f = gen_random_3sat(vars, clauses, derive_seed(seed, k as u64)).map_err(gen)?;
                    out.push(Instance::sat(format!("3sat-{vars}-{clauses}-{seed}-{k:04}"), f));
                }
            }
            &DatasetSpec::Color { vertices, edges, colors, count, seed } => {
                for k in 0..count {
                    let f = gen_coloring(vertices, edges, colors, derive_seed(seed, k as u64))
                        .map_err(gen)?;
                    out.push(Instance::sat(
                        format!("color-{vertices}-{edges}-{colors}-{seed}-{k:04}"),
                        f,
                    ));
                }
            }
            DatasetSpec::OsspFile(path) => {
                let files = if path.is_dir() {
                    sorted_files(path, None)?
                } else {
                    vec![path.clone()]
                };
                for f in files {
                    let inst = OsspInstance::parse(&read(&f)?).map_err(|e| HarnessError::Dataset {
                        path: f.clone(),
                        msg: e.to_string(),
                    })?;
                    out.push(Instance::ossp(file_name(&f), inst));
                }
            }
            &DatasetSpec::OsspGen { jobs, machines, count, seed } => {
                for k in 0..count {
                    let inst = gen_taillard_like(jobs, machines, derive_seed(seed, k as u64));
                    out.push(Instance::ossp(format!("ossp{jobs}x{machines}-{seed}-{k:04}"), inst));
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for DatasetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetSpec::Dir(p) => write!(f, "{}", p.display()),
            DatasetSpec::Sr { n, count, seed } => write!(f, "sr:{n}:{count}:{seed}"),
            DatasetSpec::ThreeSat { vars, clauses, count, seed } => {
                write!(f, "3sat:{vars}:{clauses}:{count}:{seed}")
            }
            DatasetSpec::Color { vertices, edges, colors, count, seed } => {
                write!(f, "color:{vertices}:{edges}:{colors}:{count}:{seed}")
            }
            DatasetSpec::OsspFile(p) => write!(f, "{}", p.display()),
            DatasetSpec::OsspGen { jobs, machines, count, seed } => {
                write!(f, "{jobs}x{machines}:{count}:{seed}")
            }
        }
    }
}

impl FromStr for DatasetSpec {
    type Err = HarnessError;

    /// Generator syntax first, then open-shop generator syntax.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DatasetSpec::parse_gen(s).or_else(|_| DatasetSpec::parse_ossp_gen(s))
    }
}

#[derive(Clone, Debug)]
pub enum Problem {
    Sat(Arc<Formula>),
    Ossp(Arc<OsspInstance>),
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub id: String,
    pub problem: Problem,
}

impl Instance {
    pub fn sat(id: String, formula: Formula) -> Self {
        Instance { id, problem: Problem::Sat(Arc::new(formula)) }
    }

    pub fn ossp(id: String, instance: OsspInstance) -> Self {
        Instance { id, problem: Problem::Ossp(Arc::new(instance)) }
    }
}

fn read(path: &Path) -> Result<String, HarnessError> {
    fs::read_to_string(path).map_err(|e| HarnessError::Dataset {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn sorted_files(dir: &Path, ext: Option<&str>) -> Result<Vec<PathBuf>, HarnessError> {
    let entries = fs::read_dir(dir).map_err(|e| HarnessError::Dataset {
        path: dir.to_path_buf(),
        msg: e.to_string(),
    })?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry
            .map_err(|e| HarnessError::Dataset { path: dir.to_path_buf(), msg: e.to_string() })?
            .path();
        if path.is_file() && ext.is_none_or(|x| path.extension().is_some_and(|e| e == x)) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}
