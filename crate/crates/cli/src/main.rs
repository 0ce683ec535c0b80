use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use qsat_cli::{check_weights, emit_report, run_benchmark, BenchSpec, DatasetSpec, Format, Problem};
use qsat_core::gnn::{load_weights, save_weights};
use qsat_core::ossp::solve_makespan;
use qsat_core::{
    parse_dimacs, random_init, Controller, GraphMode, Hyper, PolicyWeights, QModel,
    Restarts, Solver, SolverConfig, Status, Strategy,
};

#[derive(Parser)]
#[command(name = "qsat", version, about = "CDCL solving with learned branching and VSIDS handoff")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a strategy matrix over datasets and report times and step counts.
    Bench(BenchArgs),
    /// Write generated instances to a directory.
    Gen(GenArgs),
    /// Solve one DIMACS file.
    Solve(SolveArgs),
    /// Minimal makespan and a schedule for one open-shop instance.
    Ossp(OsspArgs),
    /// Write randomly initialized network weights.
    InitWeights(InitArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Args)]
struct NetArgs {
    /// Weights for variable-clause graphs (random init if absent).
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Weights for operation graphs (random init if absent).
    #[arg(long)]
    ossp_weights: Option<PathBuf>,
    /// Seed for random initialization.
    #[arg(long, default_value_t = 0)]
    init_seed: u64,
    /// Hidden width for random initialization.
    #[arg(long, default_value_t = 64)]
    hidden: usize,
}

impl NetArgs {
    fn load(&self, ossp: bool) -> Result<Arc<PolicyWeights>> {
        let path = if ossp { &self.ossp_weights } else { &self.weights };
        let w = match path {
            Some(p) => {
                let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                load_weights(&text).with_context(|| format!("loading {}", p.display()))?
            }
            None => {
                let hy = if ossp { Hyper::ossp() } else { Hyper::sat() };
                log::warn!("no {} weights given; using random init", if ossp { "open-shop" } else { "SAT" });
                random_init(hy.with_hidden(self.hidden), self.init_seed)
            }
        };
        check_weights(&w, ossp)?;
        Ok(Arc::new(w))
    }
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of DIMACS files (repeatable).
    #[arg(long)]
    dataset: Vec<PathBuf>,
    /// `sr:n:count:seed`, `3sat:v:c:count:seed` or `color:v:e:k:count:seed` (repeatable).
    #[arg(long)]
    gen: Vec<String>,
    /// Open-shop instance file or directory (repeatable).
    #[arg(long)]
    ossp: Vec<PathBuf>,
    /// `<j>x<m>:count:seed` (repeatable).
    #[arg(long)]
    ossp_gen: Vec<String>,
    /// Strategy descriptor such as `vsids`, `fixed:3+qact`, `pool:k=20,r=2` (repeatable).
    #[arg(long, required = true)]
    strategy: Vec<String>,
    #[command(flatten)]
    net: NetArgs,
    #[arg(long, default_value_t = 3)]
    trials: u32,
    /// Per-run timeout in seconds.
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
    #[arg(long, value_enum, default_value = "on")]
    restarts: OnOff,
    /// CSV output path; the table always goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// Generator spec, as for `bench --gen`.
    #[arg(long, conflicts_with = "ossp_gen")]
    gen: Option<String>,
    /// Open-shop generator spec, as for `bench --ossp-gen`.
    #[arg(long)]
    ossp_gen: Option<String>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    #[arg(long, default_value = "vsids")]
    strategy: String,
    #[command(flatten)]
    net: NetArgs,
    #[arg(long, value_enum, default_value = "on")]
    restarts: OnOff,
    /// Seconds before giving up.
    #[arg(long)]
    timeout: Option<f64>,
}

#[derive(Args)]
struct OsspArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "on")]
    restarts: OnOff,
}

#[derive(Clone, Copy, ValueEnum)]
enum NetKind {
    Sat,
    Ossp,
}

#[derive(Args)]
struct InitArgs {
    #[arg(long, value_enum)]
    kind: NetKind,
    #[arg(long, default_value_t = 64)]
    hidden: usize,
    /// Deeper variant: 13 core layers of depth 2.
    #[arg(long)]
    extended: bool,
    #[arg(long)]
    no_release_head: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn restarts(r: OnOff) -> Restarts {
    match r {
        OnOff::On => SolverConfig::default().restarts,
        OnOff::Off => Restarts::Off,
    }
}

fn timeout(secs: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(secs).map_err(|_| anyhow::anyhow!("bad timeout {secs}"))
}

fn bench(args: BenchArgs) -> Result<()> {
    let mut datasets: Vec<DatasetSpec> = args.dataset.into_iter().map(DatasetSpec::Dir).collect();
    for g in &args.gen {
        datasets.push(DatasetSpec::parse_gen(g)?);
    }
    datasets.extend(args.ossp.into_iter().map(DatasetSpec::OsspFile));
    for g in &args.ossp_gen {
        datasets.push(DatasetSpec::parse_ossp_gen(g)?);
    }
    if datasets.is_empty() {
        bail!("give at least one of --dataset, --gen, --ossp, --ossp-gen");
    }
    let strategies: Vec<Strategy> = args
        .strategy
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_, _>>()?;
    let mut spec = BenchSpec::new(datasets, strategies);
    if spec.strategies.iter().any(|s| s.uses_model()) {
        if spec.datasets.iter().any(|d| !d.is_ossp()) {
            spec.sat_weights = Some(args.net.load(false)?);
        }
        if spec.datasets.iter().any(|d| d.is_ossp()) {
            spec.ossp_weights = Some(args.net.load(true)?);
        }
    }
    spec.trials = args.trials;
    spec.timeout = timeout(args.timeout)?;
    spec.restarts = matches!(args.restarts, OnOff::On);

    let report = run_benchmark(&spec)?;
    let csv = emit_report(&report.records, Format::Csv)?;
    match &args.out {
        Some(p) => fs::write(p, &csv).with_context(|| format!("writing {}", p.display()))?,
        None => println!("{csv}"),
    }
    print!("{}", emit_report(&report.records, Format::Table)?);
    Ok(())
}

fn gen(args: GenArgs) -> Result<()> {
    let spec = match (&args.gen, &args.ossp_gen) {
        (Some(g), None) => DatasetSpec::parse_gen(g)?,
        (None, Some(g)) => DatasetSpec::parse_ossp_gen(g)?,
        _ => bail!("give exactly one of --gen, --ossp-gen"),
    };
    fs::create_dir_all(&args.out_dir)?;
    for inst in spec.load()? {
        let (name, text) = match &inst.problem {
            Problem::Sat(f) => {
                let comments = vec![format!("generator {spec} instance {}", inst.id)];
                (format!("{}.cnf", inst.id), qsat_core::cnf::write_dimacs_with_comments(f, &comments))
            }
            Problem::Ossp(o) => (format!("{}.ossp", inst.id), o.to_text()),
        };
        let path = args.out_dir.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        println!("{}", path.display());
    }
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn solve(args: SolveArgs) -> Result<()> {
    let formula = parse_dimacs(&read(&args.file)?).with_context(|| args.file.display().to_string())?;
    let strategy: Strategy = args.strategy.parse()?;
    let model: Option<Arc<dyn QModel>> = if strategy.uses_model() {
        Some(args.net.load(false)?)
    } else {
        None
    };
    let mut controller = Controller::new(strategy, model, GraphMode::Sat)?;
    let start = Instant::now();
    let config = SolverConfig {
        restarts: restarts(args.restarts),
        deadline: args.timeout.map(timeout).transpose()?.map(|t| start + t),
        ..Default::default()
    };
    let result = Solver::new(&formula, config)?.solve(&mut controller)?;
    let elapsed = start.elapsed();
    let stats = controller.finish(&result);
    println!("c time {:.6}s", elapsed.as_secs_f64());
    for (k, v) in result.stats.to_map() {
        println!("c {k} {v}");
    }
    println!("c model_decisions {}", stats.model_decisions);
    match stats.released_at {
        Some(r) => println!("c released_at {r}"),
        None => println!("c released_at never"),
    }
    match result.status {
        Status::Sat => {
            println!("s SATISFIABLE");
            let model = result.model.expect("SAT carries a model");
            let lits: Vec<String> = model
                .iter()
                .enumerate()
                .map(|(i, &b)| if b { format!("{}", i + 1) } else { format!("-{}", i + 1) })
                .collect();
            println!("v {} 0", lits.join(" "));
        }
        Status::Unsat => println!("s UNSATISFIABLE"),
        Status::Unknown => println!("s UNKNOWN"),
    }
    Ok(())
}

fn ossp(args: OsspArgs) -> Result<()> {
    let instance = qsat_core::OsspInstance::parse(&read(&args.file)?)?;
    let config = SolverConfig {
        restarts: restarts(args.restarts),
        ..Default::default()
    };
    let (makespan, schedule) = solve_makespan(&instance, &config)?;
    println!("makespan {makespan}");
    print!("{}", schedule.to_text(&instance));
    Ok(())
}

fn init_weights(args: InitArgs) -> Result<()> {
    let mut hy = match args.kind {
        NetKind::Sat => Hyper::sat(),
        NetKind::Ossp => Hyper::ossp(),
    };
    if args.extended {
        hy = hy.extended();
    }
    hy.release_head = !args.no_release_head;
    let hy = hy.with_hidden(args.hidden);
    hy.validate().map_err(anyhow::Error::msg)?;
    let w = random_init(hy, args.seed);
    fs::write(&args.out, save_weights(&w)).with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    match cli.command {
        Command::Bench(a) => bench(a),
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Ossp(a) => ossp(a),
        Command::InitWeights(a) => init_weights(a),
    }
}
