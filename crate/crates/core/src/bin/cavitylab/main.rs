//! `cavitylab` command-line entry point.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use cavitylab::cavity::{ce_decide_all, BoundaryCondition, Depth};
use cavitylab::exact::{solve_brute, solve_tree};
use cavitylab::experiments::{
    measure_decay, measure_misclassification, measure_moment_identity, measure_mwis_ratio, measure_suboptimality,
    DecayConfig, ExperimentReport, MomentConfig, MwisRatioConfig, SweepConfig,
};
use cavitylab::graph::{load_weighted, WeightedGraph};
use cavitylab::models::{check_conditions, decode_mwis, generate, GraphKind, GraphSpec, ModelKind, ModelSpec};
use cavitylab::mwis::{run_two_phase, suggested_depth};
use cavitylab::network::{load_instance, save_instance, DecisionNetwork};
use cavitylab::Error;

const DEFAULT_SEED: u64 = 0;

#[derive(Parser, Debug)]
#[command(name = "cavitylab", version, about = "Cavity expansion toolkit for decision networks")]
struct Cli {
    /// Worker threads (0 = logical cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Master seed. Falls back to CAVITYLAB_SEED, then 0.
    #[arg(long, global = true, env = "CAVITYLAB_SEED")]
    seed: Option<u64>,

    /// Output file (default: stdout).
    #[arg(short = 'o', long, global = true)]
    output: Option<PathBuf>,

    /// Output format (default: json, csv for experiments).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a random instance and write it as instance JSON.
    Gen {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        graph: GraphArgs,
    },
    /// Exact optimum by enumeration or tree dynamic programming.
    SolveExact {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Brute)]
        method: Method,
    },
    /// Depth-bounded cavity expansion decisions for every node.
    Ce {
        input: PathBuf,
        /// Recursion depth r.
        #[arg(long, conflicts_with = "full", required_unless_present = "full")]
        depth: Option<usize>,
        /// Recurse without truncation.
        #[arg(long)]
        full: bool,
        /// Boundary condition: zero, gap, const:C or uniform:LO:HI:SEED.
        #[arg(long, default_value = "zero")]
        bc: BoundaryCondition,
    },
    /// Two-phase MWIS algorithm on an MWIS instance.
    Mwis {
        input: PathBuf,
        #[arg(long, default_value_t = 0.15)]
        epsilon: f64,
        /// Even depth (default: suggested depth for epsilon).
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Correlation decay between two boundary conditions.
    Decay {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long, default_value = "zero")]
        bc: BoundaryCondition,
        #[arg(long, default_value = "gap")]
        bc2: BoundaryCondition,
    },
    /// Misclassification rate against brute-force labels.
    Misclass {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long, default_value = "zero")]
        bc: BoundaryCondition,
    },
    /// Suboptimality gap J − F(x^r).
    Subopt {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long, default_value = "zero")]
        bc: BoundaryCondition,
    },
    /// Ratio of the expected MWIS weight to the maximum independent set size.
    MwisRatio {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Monte-Carlo check of the cavity moment identity.
    MomentCheck {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 0)]
        node: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
    },
    /// Decay conditions for a model at maximum degree delta.
    CheckConditions {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        delta: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Method {
    Brute,
    Tree,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModelName {
    Uniform,
    Gaussian,
    GaussianCorrelated,
    MwisExp,
    MwisMixture,
    Map,
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModelName::Uniform)]
    model: ModelName,
    #[arg(long, default_value_t = 1.0)]
    i1: f64,
    #[arg(long, default_value_t = 0.04)]
    i2: f64,
    #[arg(long, default_value_t = 0.1)]
    sigma_e: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma_p: f64,
    /// Edge mean (00,01,10,11).
    #[arg(long, value_delimiter = ',', num_args = 4, default_values_t = [0.0; 4])]
    mu: Vec<f64>,
    /// Row-major 4×4 edge covariance (default: identity).
    #[arg(long, value_delimiter = ',', num_args = 16)]
    cov: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.0)]
    mu_p: f64,
    #[arg(long, default_value_t = 26.0)]
    rho: f64,
    /// Number of mixture components.
    #[arg(long, default_value_t = 3)]
    mix_delta: usize,
    /// Prior probability of a hidden cause.
    #[arg(long, default_value_t = 0.5)]
    prior: f64,
    /// Observation noise.
    #[arg(long, default_value_t = 0.5)]
    noise: f64,
}

impl ModelArgs {
    fn kind(&self) -> ModelKind {
        match self.model {
            ModelName::Uniform => ModelKind::Uniform { i1: self.i1, i2: self.i2 },
            ModelName::Gaussian => ModelKind::Gaussian {
                sigma_e: self.sigma_e,
                sigma_p: self.sigma_p,
            },
            ModelName::GaussianCorrelated => {
                let cov = self
                    .cov
                    .clone()
                    .unwrap_or_else(|| (0..16).map(|k| if k % 5 == 0 { 1.0 } else { 0.0 }).collect());
                ModelKind::GaussianCorrelated {
                    mu: std::array::from_fn(|i| self.mu[i]),
                    s: std::array::from_fn(|i| std::array::from_fn(|j| cov[4 * i + j])),
                    mu_p: self.mu_p,
                    sigma_p: self.sigma_p,
                }
            }
            ModelName::MwisExp => ModelKind::MwisExp,
            ModelName::MwisMixture => ModelKind::MwisMixture {
                rho: self.rho,
                delta: self.mix_delta,
            },
            ModelName::Map => ModelKind::MapEstimation {
                p: self.prior,
                sigma: self.noise,
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum GraphName {
    Empty,
    Path,
    Cycle,
    Star,
    Complete,
    Grid,
    CycleWithChords,
    Circulant,
    RandomRegular,
    ErdosRenyi,
    Tree,
}

#[derive(Args, Debug)]
struct GraphArgs {
    #[arg(long, value_enum, default_value_t = GraphName::Cycle)]
    graph: GraphName,
    /// Node count.
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Degree for regular ensembles.
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value_t = 3)]
    rows: usize,
    #[arg(long, default_value_t = 3)]
    cols: usize,
    #[arg(long, default_value_t = 0.5)]
    edge_prob: f64,
    #[arg(long, default_value_t = 3)]
    dmax: usize,
}

impl GraphArgs {
    fn kind(&self) -> GraphKind {
        let n = self.n;
        match self.graph {
            GraphName::Empty => GraphKind::Empty { n },
            GraphName::Path => GraphKind::Path { n },
            GraphName::Cycle => GraphKind::Cycle { n },
            GraphName::Star => GraphKind::Star {
                leaves: n.saturating_sub(1),
            },
            GraphName::Complete => GraphKind::Complete { n },
            GraphName::Grid => GraphKind::Grid {
                rows: self.rows,
                cols: self.cols,
            },
            GraphName::CycleWithChords => GraphKind::CycleWithChords { n },
            GraphName::Circulant => GraphKind::Circulant { n, d: self.d },
            GraphName::RandomRegular => GraphKind::RandomRegular { n, d: self.d },
            GraphName::ErdosRenyi => GraphKind::ErdosRenyiBoundedDegree {
                n,
                p: self.edge_prob,
                dmax: self.dmax,
            },
            GraphName::Tree => GraphKind::Tree { n },
        }
    }
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Comma-separated depths.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 4, 6])]
    depths: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    trials: usize,
}

/// A failure reported as `{"error", "message", "parameter"}`.
struct Failure {
    kind: String,
    message: String,
    parameter: String,
}

impl Failure {
    fn domain(e: Error, parameter: &str) -> Failure {
        let parameter = match &e {
            Error::InvalidParams { param, .. } => param.clone(),
            Error::Parse { location, .. } => format!("{parameter}: {location}"),
            _ => parameter.to_string(),
        };
        Failure {
            kind: e.kind().to_string(),
            message: e.to_string(),
            parameter,
        }
    }

    fn io(e: io::Error, path: &Path, parameter: &str) -> Failure {
        Failure {
            kind: "IoError".into(),
            message: format!("{}: {e}", path.display()),
            parameter: parameter.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

trait Param<T> {
    fn param(self, name: &str) -> CliResult<T>;
}

impl<T> Param<T> for cavitylab::Result<T> {
    fn param(self, name: &str) -> CliResult<T> {
        self.map_err(|e| Failure::domain(e, name))
    }
}

struct Output {
    path: Option<PathBuf>,
    format: Format,
}

impl Output {
    fn write(&self, bytes: &[u8]) -> CliResult<()> {
        match &self.path {
            Some(p) => fs::write(p, bytes).map_err(|e| Failure::io(e, p, "output")),
            None => {
                let mut out = io::stdout().lock();
                out.write_all(bytes)
                    .and_then(|_| out.flush())
                    .map_err(|e| Failure::io(e, Path::new("<stdout>"), "output"))
            }
        }
    }

    fn json(&self, value: &Value) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
        text.push('\n');
        self.write(text.as_bytes())
    }

    fn report(&self, report: &ExperimentReport) -> CliResult<()> {
        match self.format {
            Format::Csv => {
                eprintln!("config: {}", report.config);
                self.write(report.to_csv().as_bytes())
            }
            Format::Json => self.json(&serde_json::to_value(report).expect("reports serialize")),
        }
    }
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| Failure::io(e, path, "input"))
}

fn read_network(path: &Path) -> CliResult<DecisionNetwork> {
    load_instance(&read(path)?).param("input")
}

/// Instance JSON encoding an MWIS problem, or the weighted-graph format.
fn read_mwis(path: &Path) -> CliResult<WeightedGraph> {
    let bytes = read(path)?;
    match load_instance(&bytes) {
        Ok(net) => decode_mwis(&net).param("input"),
        Err(instance_err) => load_weighted(&bytes).map_err(|_| Failure::domain(instance_err, "input")),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let experiment = matches!(
        cli.command,
        Command::Decay { .. }
            | Command::Misclass { .. }
            | Command::Subopt { .. }
            | Command::MwisRatio { .. }
            | Command::MomentCheck { .. }
    );
    let misclass = matches!(cli.command, Command::Misclass { .. });
    let format = cli.format.unwrap_or(if experiment { Format::Csv } else { Format::Json });
    let out = Output {
        path: cli.output.clone(),
        format,
    };
    let common = json!({
        "seed": seed,
        "threads": cli.threads,
        "format": format,
        "output": cli.output.as_ref().map(|p| p.display().to_string()),
    });
    let with_common = |mut config: Value| {
        if let (Value::Object(c), Value::Object(extra)) = (&mut config, &common) {
            for (k, v) in extra {
                c.insert(k.clone(), v.clone());
            }
        }
        config
    };

    match cli.command {
        Command::Gen { model, graph } => {
            let spec = ModelSpec {
                model: model.kind(),
                graph: GraphSpec::new(graph.kind(), seed),
                seed,
            };
            let net = generate(&spec).param("model")?.into_network().param("model")?;
            if format == Format::Csv {
                return Err(Failure::domain(Error::invalid_params("format", "gen writes instance JSON only"), "format"));
            }
            eprintln!("config: {}", with_common(serde_json::to_value(&spec).expect("specs serialize")));
            let mut bytes = save_instance(&net);
            bytes.push(b'\n');
            out.write(&bytes)
        }
        Command::SolveExact { input, method } => {
            let net = read_network(&input)?;
            let config = with_common(json!({
                "command": "solve-exact",
                "input": input.display().to_string(),
                "method": method,
            }));
            let solution = match method {
                Method::Brute => solve_brute(&net).param("input")?,
                Method::Tree => solve_tree(&net).param("input")?.solution,
            };
            out.json(&json!({
                "config": config,
                "optimum": solution.optimum,
                "argmax": solution.argmax,
                "unique": solution.unique,
            }))
        }
        Command::Ce { input, depth, full, bc } => {
            let net = read_network(&input)?;
            let depth = match depth {
                Some(r) if !full => Depth::Bounded(r),
                _ => Depth::Full,
            };
            let config = with_common(json!({
                "command": "ce",
                "input": input.display().to_string(),
                "depth": match depth { Depth::Bounded(r) => json!(r), Depth::Full => json!("full") },
                "bc": bc.to_string(),
            }));
            let d = ce_decide_all(&net, depth, &bc);
            let nodes: Vec<Value> = d
                .results
                .iter()
                .enumerate()
                .map(|(u, r)| match r {
                    Ok(c) => json!({"node": u, "estimates": c.estimates, "decision": c.decision}),
                    Err(e) => json!({"node": u, "error": e.kind(), "message": e.to_string()}),
                })
                .collect();
            out.json(&json!({
                "config": config,
                "decisions": d.decisions,
                "total": d.total,
                "failures": d.failures(),
                "nodes": nodes,
            }))
        }
        Command::Mwis { input, epsilon, depth } => {
            let g = read_mwis(&input)?;
            if !(epsilon > 0.0 && epsilon < 1.0) {
                return Err(Failure::domain(
                    Error::invalid_params("epsilon", format!("must lie in (0, 1), got {epsilon}")),
                    "epsilon",
                ));
            }
            let r = depth.unwrap_or_else(|| suggested_depth(epsilon));
            let config = with_common(json!({
                "command": "mwis",
                "input": input.display().to_string(),
                "epsilon": epsilon,
                "depth": r,
            }));
            let run = run_two_phase(&g, epsilon, r, seed).param("depth")?;
            let mut value = serde_json::to_value(&run).expect("runs serialize");
            value["config"] = config;
            out.json(&value)
        }
        Command::Decay { model, graph, sweep, bc, bc2 } => {
            let cfg = DecayConfig {
                model: model.kind(),
                graph: graph.kind(),
                depths: sweep.depths,
                trials: sweep.trials,
                bc: (bc, bc2),
                seed,
            };
            let mut rep = measure_decay(&cfg).param("model")?;
            rep.config = with_common(rep.config);
            out.report(&rep)
        }
        Command::Misclass { model, graph, sweep, bc } | Command::Subopt { model, graph, sweep, bc } => {
            let cfg = SweepConfig {
                model: model.kind(),
                graph: graph.kind(),
                depths: sweep.depths,
                trials: sweep.trials,
                bc,
                seed,
            };
            let mut rep = if misclass {
                measure_misclassification(&cfg)
            } else {
                measure_suboptimality(&cfg)
            }
            .param("model")?;
            rep.config = with_common(rep.config);
            out.report(&rep)
        }
        Command::MwisRatio { graph, trials } => {
            let cfg = MwisRatioConfig {
                graph: graph.kind(),
                trials,
                seed,
            };
            let mut rep = measure_mwis_ratio(&cfg).param("graph")?;
            rep.config = with_common(rep.config);
            out.report(&rep)
        }
        Command::MomentCheck { graph, node, trials } => {
            let cfg = MomentConfig {
                graph: graph.kind(),
                node,
                trials,
                seed,
            };
            let mut rep = measure_moment_identity(&cfg).param("graph")?;
            rep.config = with_common(rep.config);
            out.report(&rep)
        }
        Command::CheckConditions { model, delta } => {
            let kind = model.kind();
            let report = check_conditions(&kind, delta).param("model")?;
            let mut value = serde_json::to_value(&report).expect("reports serialize");
            value["config"] = with_common(json!({"command": "check-conditions", "model": kind, "delta": delta}));
            out.json(&value)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("cannot start worker pool: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!(
                "{}",
                json!({"error": f.kind, "message": f.message, "parameter": f.parameter})
            );
            ExitCode::from(2)
        }
    }
}
