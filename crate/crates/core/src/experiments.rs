//! Monte-Carlo measurements of decay, misclassification, suboptimality,
//! the MWIS weight/cardinality ratio and the cavity moment identity.
//!
//! Trial `t` of an experiment draws everything from the stream keyed by
//! `(master seed, experiment id, t)`, and aggregation folds in trial order,
//! so reports do not depend on the thread count.

use std::fmt::Write as _;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cavity::{ce_decide_all, ce_vector, BoundaryCondition, Depth};
use crate::error::{Error, Result};
use crate::exact::{solve_brute, solve_mwis_bnb, MwisSolver};
use crate::graph::WeightedGraph;
use crate::models::{generate, GraphKind, GraphSpec, ModelKind, ModelSpec};
use crate::mwis::{c_exact_in, neighbor_cavity_sum, sample_weights, WeightDist};
use crate::network::DecisionNetwork;
use crate::rng::{self, tag, Stream};
use crate::view::SubnetworkView;

pub mod id {
    pub const DECAY: u64 = 1;
    pub const MISCLASS: u64 = 2;
    pub const SUBOPT: u64 = 3;
    pub const MWIS_RATIO: u64 = 4;
    pub const MOMENT: u64 = 5;
}

pub const CSV_HEADER: &str = "experiment,model,graph,n,delta,r,trials,estimate,stderr,excluded,seed";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub experiment: String,
    pub model: String,
    pub graph: String,
    pub n: usize,
    pub delta: usize,
    pub r: Option<usize>,
    pub trials: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub excluded: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: serde_json::Value,
    pub rows: Vec<Row>,
    /// Extra derived quantities such as z-scores.
    pub summary: serde_json::Value,
    pub wall_time_secs: f64,
    pub seed: u64,
}

impl ExperimentReport {
    pub fn to_csv(&self) -> String {
        rows_to_csv(&self.rows)
    }

    pub fn row(&self, experiment: &str, r: Option<usize>) -> Option<&Row> {
        self.rows.iter().find(|row| row.experiment == experiment && row.r == r)
    }
}

pub fn rows_to_csv(rows: &[Row]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        debug_assert!(!row.model.contains(',') && !row.graph.contains(','));
        let r = row.r.map(|r| r.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            row.experiment,
            row.model,
            row.graph,
            row.n,
            row.delta,
            r,
            row.trials,
            row.estimate,
            row.stderr,
            row.excluded,
            row.seed
        )
        .expect("writing to a string cannot fail");
    }
    out
}

/// Mean and standard error (sample standard deviation over √n).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn trial_stream(seed: u64, experiment: u64, t: usize) -> Stream {
    rng::stream(seed, &[tag::TRIAL, experiment, t as u64])
}

fn run_trials<T: Send>(trials: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..trials).into_par_iter().map(f).collect()
}

/// Maximum degree the ensemble can produce.
pub fn degree_bound(kind: &GraphKind) -> usize {
    match *kind {
        GraphKind::Empty { .. } => 0,
        GraphKind::Path { n } => n.saturating_sub(1).min(2),
        GraphKind::Cycle { .. } => 2,
        GraphKind::Star { leaves } => leaves,
        GraphKind::Complete { n } | GraphKind::Tree { n } => n.saturating_sub(1),
        GraphKind::Grid { rows, cols } => {
            let axis = |k: usize| k.saturating_sub(1).min(2);
            axis(rows) + axis(cols)
        }
        GraphKind::CycleWithChords { .. } => 3,
        GraphKind::Circulant { d, .. } | GraphKind::RandomRegular { d, .. } => d,
        GraphKind::ErdosRenyiBoundedDegree { n, dmax, .. } => dmax.min(n.saturating_sub(1)),
    }
}

fn validate_sweep(depths: &[usize], trials: usize) -> Result<()> {
    if depths.is_empty() {
        return Err(Error::invalid_params("depths", "at least one depth is required"));
    }
    if trials == 0 {
        return Err(Error::invalid_params("trials", "must be at least 1"));
    }
    Ok(())
}

/// A fresh instance for one trial.
fn trial_network(model: &ModelKind, graph: &GraphKind, rng: &mut Stream) -> Result<DecisionNetwork> {
    let spec = ModelSpec {
        model: model.clone(),
        graph: GraphSpec::new(*graph, rng.random()),
        seed: rng.random(),
    };
    generate(&spec)?.into_network()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayConfig {
    pub model: ModelKind,
    pub graph: GraphKind,
    pub depths: Vec<usize>,
    pub trials: usize,
    pub bc: (BoundaryCondition, BoundaryCondition),
    pub seed: u64,
}

struct Sweep<'a> {
    experiment: &'a str,
    model: String,
    graph: &'a GraphKind,
    trials: usize,
    seed: u64,
}

impl Sweep<'_> {
    fn row(&self, r: Option<usize>, values: &[f64], excluded: usize) -> Row {
        let (estimate, stderr) = mean_stderr(values);
        Row {
            experiment: self.experiment.to_string(),
            model: self.model.clone(),
            graph: self.graph.to_string(),
            n: self.graph.num_nodes(),
            delta: degree_bound(self.graph),
            r,
            trials: self.trials,
            estimate,
            stderr,
            excluded,
            seed: self.seed,
        }
    }
}

fn report(experiment: &str, config: &impl Serialize, rows: Vec<Row>, summary: serde_json::Value, seed: u64, start: Instant) -> ExperimentReport {
    ExperimentReport {
        experiment: experiment.to_string(),
        config: serde_json::to_value(config).expect("configs serialize"),
        rows,
        summary,
        wall_time_secs: start.elapsed().as_secs_f64(),
        seed,
    }
}

/// E|CE(𝒢, u, r, 1, 𝒞) − CE(𝒢, u, r, 1, 𝒞′)| at a uniformly random root.
/// Each trial uses one instance and root for every depth.
pub fn measure_decay(cfg: &DecayConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    validate_sweep(&cfg.depths, cfg.trials)?;
    cfg.model.validate()?;
    let results = run_trials(cfg.trials, |t| -> Result<Vec<Option<f64>>> {
        let mut rng = trial_stream(cfg.seed, id::DECAY, t);
        let net = trial_network(&cfg.model, &cfg.graph, &mut rng)?;
        if net.num_nodes() == 0 {
            return Err(Error::invalid_params("n", "graph has no nodes"));
        }
        let root = rng.random_range(0..net.num_nodes());
        let view = SubnetworkView::new(&net);
        Ok(cfg
            .depths
            .iter()
            .map(|&r| {
                let a = ce_vector(&view, root, Depth::Bounded(r), &cfg.bc.0).ok()?;
                let b = ce_vector(&view, root, Depth::Bounded(r), &cfg.bc.1).ok()?;
                a.estimates[1].finite_diff(b.estimates[1]).map(f64::abs)
            })
            .collect())
    });
    let results: Vec<Vec<Option<f64>>> = results.into_iter().collect::<Result<_>>()?;
    let sweep = Sweep {
        experiment: "decay",
        model: cfg.model.to_string(),
        graph: &cfg.graph,
        trials: cfg.trials,
        seed: cfg.seed,
    };
    let rows = cfg
        .depths
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let values: Vec<f64> = results.iter().filter_map(|v| v[k]).collect();
            sweep.row(Some(r), &values, cfg.trials - values.len())
        })
        .collect();
    Ok(report("decay", cfg, rows, serde_json::Value::Null, cfg.seed, start))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub model: ModelKind,
    pub graph: GraphKind,
    pub depths: Vec<usize>,
    pub trials: usize,
    pub bc: BoundaryCondition,
    pub seed: u64,
}

/// Fraction of nodes whose depth-r decision differs from the unique
/// optimum. Instances with tied optima are excluded.
pub fn measure_misclassification(cfg: &SweepConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    validate_sweep(&cfg.depths, cfg.trials)?;
    cfg.model.validate()?;
    let results = run_trials(cfg.trials, |t| -> Result<Option<Vec<f64>>> {
        let mut rng = trial_stream(cfg.seed, id::MISCLASS, t);
        let net = trial_network(&cfg.model, &cfg.graph, &mut rng)?;
        let exact = match solve_brute(&net) {
            Ok(s) if s.unique => s,
            Ok(_) | Err(Error::Infeasible) => return Ok(None),
            Err(e) => return Err(e),
        };
        let n = net.num_nodes().max(1) as f64;
        Ok(Some(
            cfg.depths
                .iter()
                .map(|&r| {
                    let d = ce_decide_all(&net, Depth::Bounded(r), &cfg.bc);
                    let wrong = d.decisions.iter().zip(&exact.argmax).filter(|(a, b)| a != b).count();
                    wrong as f64 / n
                })
                .collect(),
        ))
    });
    let results: Vec<Option<Vec<f64>>> = results.into_iter().collect::<Result<_>>()?;
    let kept: Vec<&Vec<f64>> = results.iter().flatten().collect();
    let excluded = cfg.trials - kept.len();
    let sweep = Sweep {
        experiment: "misclass",
        model: cfg.model.to_string(),
        graph: &cfg.graph,
        trials: cfg.trials,
        seed: cfg.seed,
    };
    let rows = cfg
        .depths
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let values: Vec<f64> = kept.iter().map(|v| v[k]).collect();
            sweep.row(Some(r), &values, excluded)
        })
        .collect();
    Ok(report("misclass", cfg, rows, serde_json::Value::Null, cfg.seed, start))
}

/// J − F(x^r). Trials whose decisions violate a hard constraint are
/// counted in `excluded` rather than averaged.
pub fn measure_suboptimality(cfg: &SweepConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    validate_sweep(&cfg.depths, cfg.trials)?;
    cfg.model.validate()?;
    let results = run_trials(cfg.trials, |t| -> Result<Option<Vec<Option<f64>>>> {
        let mut rng = trial_stream(cfg.seed, id::SUBOPT, t);
        let net = trial_network(&cfg.model, &cfg.graph, &mut rng)?;
        let exact = match solve_brute(&net) {
            Ok(s) => s,
            Err(Error::Infeasible) => return Ok(None),
            Err(e) => return Err(e),
        };
        Ok(Some(
            cfg.depths
                .iter()
                .map(|&r| {
                    let d = ce_decide_all(&net, Depth::Bounded(r), &cfg.bc);
                    let value = net.evaluate(&d.decisions).expect("decisions are in range");
                    exact.optimum.finite_diff(value)
                })
                .collect(),
        ))
    });
    let results: Vec<Option<Vec<Option<f64>>>> = results.into_iter().collect::<Result<_>>()?;
    let sweep = Sweep {
        experiment: "subopt",
        model: cfg.model.to_string(),
        graph: &cfg.graph,
        trials: cfg.trials,
        seed: cfg.seed,
    };
    let rows = cfg
        .depths
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let values: Vec<f64> = results.iter().flatten().filter_map(|v| v[k]).collect();
            sweep.row(Some(r), &values, cfg.trials - values.len())
        })
        .collect();
    Ok(report("subopt", cfg, rows, serde_json::Value::Null, cfg.seed, start))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MwisRatioConfig {
    pub graph: GraphKind,
    pub trials: usize,
    pub seed: u64,
}

/// Per trial: a fresh graph and Exp(1) weights, W(I*) by branch and bound
/// and |I^M| as the unit-weight optimum. Rows `mwis_weight`,
/// `mwis_cardinality` and `mwis_ratio`.
pub fn measure_mwis_ratio(cfg: &MwisRatioConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    validate_sweep(&[0], cfg.trials)?;
    let results = run_trials(cfg.trials, |t| -> Result<(f64, f64)> {
        let mut rng = trial_stream(cfg.seed, id::MWIS_RATIO, t);
        let graph = GraphSpec::new(cfg.graph, rng.random()).generate()?;
        let n = graph.num_nodes();
        let weights = sample_weights(n, WeightDist::Exp1, rng.random())?;
        let weighted = WeightedGraph::new(graph, weights)?;
        let best = solve_mwis_bnb(&weighted)?.optimum.value();
        let unit = weighted.with_weights(vec![1.0; n])?;
        let card = solve_mwis_bnb(&unit)?.optimum.value();
        Ok((best, card))
    });
    let results: Vec<(f64, f64)> = results.into_iter().collect::<Result<_>>()?;
    let weights: Vec<f64> = results.iter().map(|r| r.0).collect();
    let cards: Vec<f64> = results.iter().map(|r| r.1).collect();
    let ratios: Vec<f64> = results.iter().map(|r| if r.1 > 0.0 { r.0 / r.1 } else { 1.0 }).collect();
    let sweep = Sweep {
        experiment: "",
        model: ModelKind::MwisExp.to_string(),
        graph: &cfg.graph,
        trials: cfg.trials,
        seed: cfg.seed,
    };
    let named = |name: &str, values: &[f64]| Row {
        experiment: name.to_string(),
        ..sweep.row(None, values, 0)
    };
    let ratio_row = named("mwis_ratio", &ratios);
    let delta = degree_bound(&cfg.graph);
    let upper = if delta >= 2 { 10.0 * (delta as f64).ln() } else { f64::INFINITY };
    let summary = serde_json::json!({
        "ratio": ratio_row.estimate,
        "stderr": ratio_row.stderr,
        "lower_bound_ok": ratio_row.estimate >= 1.0 - 4.0 * ratio_row.stderr,
        "upper_bound": if upper.is_finite() { serde_json::json!(upper) } else { serde_json::Value::Null },
        "upper_bound_ok": ratio_row.estimate <= upper,
    });
    let rows = vec![named("mwis_weight", &weights), named("mwis_cardinality", &cards), ratio_row];
    Ok(report("mwis_ratio", cfg, rows, summary, cfg.seed, start))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentConfig {
    pub graph: GraphKind,
    pub node: usize,
    pub trials: usize,
    pub seed: u64,
}

/// Compares E[exp(−C(i))] with 1 − ½·E[exp(−Σ_l C(i_l))] under Exp(1)
/// weights. Rows `moment_lhs`, `moment_rhs` and their per-trial
/// difference `moment_diff`.
pub fn measure_moment_identity(cfg: &MomentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    validate_sweep(&[0], cfg.trials)?;
    let graph = GraphSpec::new(cfg.graph, cfg.seed).generate()?;
    if cfg.node >= graph.num_nodes() {
        return Err(Error::invalid_params("node", format!("node {} outside [0, {})", cfg.node, graph.num_nodes())));
    }
    let results = run_trials(cfg.trials, |t| -> Result<(f64, f64)> {
        let mut rng = trial_stream(cfg.seed, id::MOMENT, t);
        let weights = sample_weights(graph.num_nodes(), WeightDist::Exp1, rng.random())?;
        let weighted = WeightedGraph::new(graph.clone(), weights)?;
        let solver = MwisSolver::new(&weighted)?;
        let c = c_exact_in(&solver, solver.all(), cfg.node)?;
        let s = neighbor_cavity_sum(&solver, solver.all(), cfg.node)?;
        Ok(((-c).exp(), 1.0 - 0.5 * (-s).exp()))
    });
    let results: Vec<(f64, f64)> = results.into_iter().collect::<Result<_>>()?;
    let lhs: Vec<f64> = results.iter().map(|r| r.0).collect();
    let rhs: Vec<f64> = results.iter().map(|r| r.1).collect();
    let diff: Vec<f64> = results.iter().map(|r| r.0 - r.1).collect();
    let sweep = Sweep {
        experiment: "",
        model: ModelKind::MwisExp.to_string(),
        graph: &cfg.graph,
        trials: cfg.trials,
        seed: cfg.seed,
    };
    let named = |name: &str, values: &[f64]| Row {
        experiment: name.to_string(),
        ..sweep.row(None, values, 0)
    };
    let diff_row = named("moment_diff", &diff);
    let z = if diff_row.stderr > 0.0 {
        diff_row.estimate / diff_row.stderr
    } else if diff_row.estimate == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(diff_row.estimate)
    };
    let lhs_row = named("moment_lhs", &lhs);
    let rhs_row = named("moment_rhs", &rhs);
    let summary = serde_json::json!({
        "lhs": lhs_row.estimate,
        "rhs": rhs_row.estimate,
        "z_score": z,
    });
    Ok(report("moment_identity", cfg, vec![lhs_row, rhs_row, diff_row], summary, cfg.seed, start))
}

/// z-score of the moment identity from a report.
pub fn moment_z(report: &ExperimentReport) -> Option<f64> {
    report.summary.get("z_score")?.as_f64()
}
