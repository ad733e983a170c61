//! Random graph ensembles, random potential models, problem encoders,
//! closed-form coupling parameters and decay-condition checks.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{Matrix4, Vector4};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::graph::{Graph, WeightedGraph};
use crate::mwis::{mixture_matrix_check, sample_weights, WeightDist};
use crate::network::DecisionNetwork;
use crate::rng::{self, tag};

const REGULAR_RETRIES: u64 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphKind {
    Empty { n: usize },
    Path { n: usize },
    Cycle { n: usize },
    Star { leaves: usize },
    Complete { n: usize },
    Grid { rows: usize, cols: usize },
    /// Cycle plus the chords i ↔ i + n/2 (3-regular, n even).
    CycleWithChords { n: usize },
    /// Deterministic d-regular graph on Z_n.
    Circulant { n: usize, d: usize },
    RandomRegular { n: usize, d: usize },
    ErdosRenyiBoundedDegree { n: usize, p: f64, dmax: usize },
    /// Random recursive tree.
    Tree { n: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    #[serde(flatten)]
    pub kind: GraphKind,
    pub seed: u64,
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GraphKind::Empty { n } => write!(f, "empty:n={n}"),
            GraphKind::Path { n } => write!(f, "path:n={n}"),
            GraphKind::Cycle { n } => write!(f, "cycle:n={n}"),
            GraphKind::Star { leaves } => write!(f, "star:leaves={leaves}"),
            GraphKind::Complete { n } => write!(f, "complete:n={n}"),
            GraphKind::Grid { rows, cols } => write!(f, "grid:rows={rows}:cols={cols}"),
            GraphKind::CycleWithChords { n } => write!(f, "cycle_with_chords:n={n}"),
            GraphKind::Circulant { n, d } => write!(f, "circulant:n={n}:d={d}"),
            GraphKind::RandomRegular { n, d } => write!(f, "random_regular:n={n}:d={d}"),
            GraphKind::ErdosRenyiBoundedDegree { n, p, dmax } => {
                write!(f, "erdos_renyi:n={n}:p={p}:dmax={dmax}")
            }
            GraphKind::Tree { n } => write!(f, "tree:n={n}"),
        }
    }
}

impl GraphKind {
    pub fn num_nodes(&self) -> usize {
        match *self {
            GraphKind::Empty { n }
            | GraphKind::Path { n }
            | GraphKind::Cycle { n }
            | GraphKind::Complete { n }
            | GraphKind::CycleWithChords { n }
            | GraphKind::Circulant { n, .. }
            | GraphKind::RandomRegular { n, .. }
            | GraphKind::ErdosRenyiBoundedDegree { n, .. }
            | GraphKind::Tree { n } => n,
            GraphKind::Star { leaves } => leaves + 1,
            GraphKind::Grid { rows, cols } => rows * cols,
        }
    }
}

impl GraphSpec {
    pub fn new(kind: GraphKind, seed: u64) -> Self {
        GraphSpec { kind, seed }
    }

    pub fn generate(&self) -> Result<Graph> {
        let seed = self.seed;
        match self.kind {
            GraphKind::Empty { n } => Ok(Graph::empty(n)),
            GraphKind::Path { n } => Graph::new(n, (1..n).map(|i| (i - 1, i))),
            GraphKind::Cycle { n } => {
                if n < 3 {
                    return Err(Error::invalid_params("n", format!("a cycle needs at least 3 nodes, got {n}")));
                }
                Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)))
            }
            GraphKind::Star { leaves } => Graph::new(leaves + 1, (1..=leaves).map(|i| (0, i))),
            GraphKind::Complete { n } => Graph::new(n, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)))),
            GraphKind::Grid { rows, cols } => {
                let id = |r: usize, c: usize| r * cols + c;
                let mut edges = Vec::new();
                for r in 0..rows {
                    for c in 0..cols {
                        if c + 1 < cols {
                            edges.push((id(r, c), id(r, c + 1)));
                        }
                        if r + 1 < rows {
                            edges.push((id(r, c), id(r + 1, c)));
                        }
                    }
                }
                Graph::new(rows * cols, edges)
            }
            GraphKind::CycleWithChords { n } => {
                if n < 4 || n % 2 == 1 {
                    return Err(Error::invalid_params("n", format!("must be even and at least 4, got {n}")));
                }
                let cycle = (0..n).map(|i| (i, (i + 1) % n));
                let chords = (0..n / 2).map(|i| (i, i + n / 2));
                Graph::new(n, cycle.chain(chords))
            }
            GraphKind::Circulant { n, d } => circulant(n, d),
            GraphKind::RandomRegular { n, d } => random_regular(n, d, seed),
            GraphKind::ErdosRenyiBoundedDegree { n, p, dmax } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::invalid_params("p", format!("must lie in [0, 1], got {p}")));
                }
                let mut degree = vec![0usize; n];
                let mut edges = Vec::new();
                for u in 0..n {
                    for v in u + 1..n {
                        if rng::unit(seed, &[tag::GRAPH, u as u64, v as u64]) < p
                            && degree[u] < dmax
                            && degree[v] < dmax
                        {
                            degree[u] += 1;
                            degree[v] += 1;
                            edges.push((u, v));
                        }
                    }
                }
                Graph::new(n, edges)
            }
            GraphKind::Tree { n } => Graph::new(
                n,
                (1..n).map(|i| {
                    let parent = (rng::unit(seed, &[tag::GRAPH, i as u64]) * i as f64) as usize;
                    (parent.min(i - 1), i)
                }),
            ),
        }
    }
}

fn circulant(n: usize, d: usize) -> Result<Graph> {
    if d >= n || (d % 2 == 1 && n % 2 == 1) {
        return Err(Error::invalid_params(
            "d",
            format!("no {d}-regular circulant on {n} nodes"),
        ));
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for k in 1..=d / 2 {
            edges.push((i, (i + k) % n));
        }
        if d % 2 == 1 && i < n / 2 {
            edges.push((i, i + n / 2));
        }
    }
    Graph::new(n, edges)
}

/// Pairing model with rejection of loops and multi-edges.
fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if d >= n.max(1) || (n * d) % 2 == 1 {
        return Err(Error::invalid_params("d", format!("no {d}-regular graph on {n} nodes")));
    }
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    'attempt: for attempt in 0..REGULAR_RETRIES {
        let mut rng = rng::stream(seed, &[tag::GRAPH, attempt]);
        points.shuffle(&mut rng);
        let mut seen = vec![Vec::new(); n];
        let mut edges = Vec::with_capacity(n * d / 2);
        for pair in points.chunks(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || seen[u].contains(&v) {
                continue 'attempt;
            }
            seen[u].push(v);
            edges.push((u, v));
        }
        return Graph::new(n, edges);
    }
    Err(Error::invalid_params(
        "d",
        format!("pairing model rejected {REGULAR_RETRIES} attempts for n={n} d={d}"),
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    /// Φ_u(1) ~ U[−I₁, I₁], edge entries i.i.d. U[−I₂, I₂].
    Uniform { i1: f64, i2: f64 },
    /// Φ_v(0) ~ N(0, σ_p²), edge entries i.i.d. N(0, σ_e²).
    Gaussian { sigma_e: f64, sigma_p: f64 },
    /// Edge 4-vectors (00, 01, 10, 11) ~ N(μ, S), Φ_v(0) ~ N(μ_p, σ_p²).
    GaussianCorrelated {
        mu: [f64; 4],
        s: [[f64; 4]; 4],
        mu_p: f64,
        sigma_p: f64,
    },
    MwisExp,
    MwisMixture { rho: f64, delta: usize },
    /// Hidden causes c_i ~ Bern(p), observations o_ij ~ N(c_i + c_j, σ²).
    MapEstimation { p: f64, sigma: f64 },
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::Uniform { i1, i2 } => write!(f, "uniform:i1={i1}:i2={i2}"),
            ModelKind::Gaussian { sigma_e, sigma_p } => write!(f, "gaussian:sigma_e={sigma_e}:sigma_p={sigma_p}"),
            ModelKind::GaussianCorrelated { mu, s, mu_p, sigma_p } => {
                let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(" ");
                let flat: Vec<f64> = s.iter().flatten().copied().collect();
                write!(
                    f,
                    "gaussian_correlated:mu={}:s={}:mu_p={mu_p}:sigma_p={sigma_p}",
                    join(mu),
                    join(&flat)
                )
            }
            ModelKind::MwisExp => write!(f, "mwis_exp"),
            ModelKind::MwisMixture { rho, delta } => write!(f, "mwis_mixture:rho={rho}:delta={delta}"),
            ModelKind::MapEstimation { p, sigma } => write!(f, "map:p={p}:sigma={sigma}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub model: ModelKind,
    pub graph: GraphSpec,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instance {
    Network(DecisionNetwork),
    Weighted(WeightedGraph),
}

impl Instance {
    pub fn into_network(self) -> Result<DecisionNetwork> {
        match self {
            Instance::Network(net) => Ok(net),
            Instance::Weighted(g) => Ok(encode_mwis(&g)),
        }
    }
}

fn check(param: &str, ok: bool, message: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::invalid_params(param, message()))
    }
}

impl ModelKind {
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelKind::Uniform { i1, i2 } => {
                check("i1", i1.is_finite() && *i1 > 0.0, || format!("must be finite and > 0, got {i1}"))?;
                check("i2", i2.is_finite() && *i2 >= 0.0, || format!("must be finite and >= 0, got {i2}"))
            }
            ModelKind::Gaussian { sigma_e, sigma_p } => {
                check("sigma_e", sigma_e.is_finite() && *sigma_e >= 0.0, || {
                    format!("must be finite and >= 0, got {sigma_e}")
                })?;
                check("sigma_p", sigma_p.is_finite() && *sigma_p >= 0.0, || {
                    format!("must be finite and >= 0, got {sigma_p}")
                })
            }
            ModelKind::GaussianCorrelated { mu, s, mu_p, sigma_p } => {
                check("mu", mu.iter().all(|m| m.is_finite()), || "entries must be finite".into())?;
                check("mu_p", mu_p.is_finite(), || "must be finite".into())?;
                check("sigma_p", sigma_p.is_finite() && *sigma_p >= 0.0, || {
                    format!("must be finite and >= 0, got {sigma_p}")
                })?;
                covariance_factor(s).map(|_| ())
            }
            ModelKind::MwisExp => Ok(()),
            ModelKind::MwisMixture { rho, delta } => WeightDist::Mixture { rho: *rho, delta: *delta }.validate(),
            ModelKind::MapEstimation { p, sigma } => {
                check("p", *p > 0.0 && *p < 1.0, || format!("must lie in (0, 1), got {p}"))?;
                check("sigma", sigma.is_finite() && *sigma > 0.0, || format!("must be finite and > 0, got {sigma}"))
            }
        }
    }
}

/// L with S = LLᵀ. Falls back to an eigendecomposition with eigenvalues
/// below 1e−12 clipped to zero when S is only semidefinite.
fn covariance_factor(s: &[[f64; 4]; 4]) -> Result<Matrix4<f64>> {
    let m = Matrix4::from_fn(|i, j| s[i][j]);
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid_params("s", "entries must be finite"));
    }
    let scale = m.amax().max(1.0);
    if (m - m.transpose()).amax() > 1e-12 * scale {
        return Err(Error::invalid_params("s", "covariance must be symmetric"));
    }
    if let Some(ch) = m.cholesky() {
        return Ok(ch.l());
    }
    let eig = m.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l < -1e-9 * scale) {
        return Err(Error::invalid_params("s", "covariance must be positive semidefinite"));
    }
    let roots = eig.eigenvalues.map(|l| if l < 1e-12 { 0.0 } else { l.sqrt() });
    Ok(eig.eigenvectors * Matrix4::from_diagonal(&roots))
}

fn normal(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn uniform(rng: &mut impl Rng, half_width: f64) -> f64 {
    half_width * (2.0 * rng.random::<f64>() - 1.0)
}

fn table2(v: [f64; 4]) -> Vec<Vec<ExtReal>> {
    vec![
        vec![ExtReal::finite(v[0]), ExtReal::finite(v[1])],
        vec![ExtReal::finite(v[2]), ExtReal::finite(v[3])],
    ]
}

/// Samples an instance. Node and edge values come from streams keyed by
/// node id and endpoint pair.
pub fn generate(spec: &ModelSpec) -> Result<Instance> {
    spec.model.validate()?;
    let graph = spec.graph.generate()?;
    let n = graph.num_nodes();
    let seed = spec.seed;
    let node_rng = |v: usize| rng::stream(seed, &[tag::NODE, v as u64]);
    let edge_rng = |u: usize, v: usize| rng::stream(seed, &[tag::EDGE, u as u64, v as u64]);
    let build = |node: &dyn Fn(usize) -> Vec<f64>, edge: &dyn Fn(usize, usize) -> Vec<Vec<ExtReal>>| {
        let potentials = (0..n).map(node).collect();
        let edges = graph.edges().iter().map(|&(u, v)| (u, v, edge(u, v))).collect();
        DecisionNetwork::new(2, potentials, edges).map(Instance::Network)
    };
    match spec.model {
        ModelKind::Uniform { i1, i2 } => build(
            &|v| vec![0.0, uniform(&mut node_rng(v), i1)],
            &|u, v| {
                let mut r = edge_rng(u, v);
                table2(std::array::from_fn(|_| uniform(&mut r, i2)))
            },
        ),
        ModelKind::Gaussian { sigma_e, sigma_p } => build(
            &|v| vec![sigma_p * normal(&mut node_rng(v)), 0.0],
            &|u, v| {
                let mut r = edge_rng(u, v);
                table2(std::array::from_fn(|_| sigma_e * normal(&mut r)))
            },
        ),
        ModelKind::GaussianCorrelated { mu, ref s, mu_p, sigma_p } => {
            let l = covariance_factor(s)?;
            let mean = Vector4::from(mu);
            build(
                &|v| vec![mu_p + sigma_p * normal(&mut node_rng(v)), 0.0],
                &|u, v| {
                    let mut r = edge_rng(u, v);
                    let z = Vector4::from_fn(|_, _| normal(&mut r));
                    let x = mean + l * z;
                    table2([x[0], x[1], x[2], x[3]])
                },
            )
        }
        ModelKind::MwisExp => {
            WeightedGraph::new(graph.clone(), sample_weights(n, WeightDist::Exp1, seed)?).map(Instance::Weighted)
        }
        ModelKind::MwisMixture { rho, delta } => WeightedGraph::new(
            graph.clone(),
            sample_weights(n, WeightDist::Mixture { rho, delta }, seed)?,
        )
        .map(Instance::Weighted),
        ModelKind::MapEstimation { p, sigma } => {
            let cause = |v: usize| u64::from(rng::unit(seed, &[tag::NODE, v as u64]) < p);
            let log_norm = -(sigma * (2.0 * PI).sqrt()).ln();
            let logit = (p / (1.0 - p)).ln();
            build(&|_| vec![0.0, logit], &|u, v| {
                let o = (cause(u) + cause(v)) as f64 + sigma * normal(&mut edge_rng(u, v));
                let ll = |s: f64| log_norm - (o - s).powi(2) / (2.0 * sigma * sigma);
                table2([ll(0.0), ll(1.0), ll(1.0), ll(2.0)])
            })
        }
    }
}

/// Φ_v = (0, W_v) and Φ_e(1,1) = −∞.
pub fn encode_mwis(g: &WeightedGraph) -> DecisionNetwork {
    let table = || {
        vec![
            vec![ExtReal::ZERO, ExtReal::ZERO],
            vec![ExtReal::ZERO, ExtReal::NEG_INF],
        ]
    };
    let potentials = g.weights().iter().map(|&w| vec![0.0, w]).collect();
    let edges = g.graph().edges().iter().map(|&(u, v)| (u, v, table())).collect();
    DecisionNetwork::new(2, potentials, edges).expect("weighted graphs encode to valid networks")
}

/// Inverse of [`encode_mwis`].
pub fn decode_mwis(net: &DecisionNetwork) -> Result<WeightedGraph> {
    if net.num_actions() != 2 {
        return Err(Error::Encode("MWIS networks have two actions".into()));
    }
    let mut weights = Vec::with_capacity(net.num_nodes());
    for v in 0..net.num_nodes() {
        let p = net.potential(v);
        if p[0] != 0.0 || p[1] < 0.0 {
            return Err(Error::Encode(format!("node {v} potential is not of the form (0, W) with W >= 0")));
        }
        weights.push(p[1]);
    }
    let expected = [ExtReal::ZERO, ExtReal::ZERO, ExtReal::ZERO, ExtReal::NEG_INF];
    let mut edges = Vec::with_capacity(net.edges().len());
    for e in net.edges() {
        if e.table() != expected {
            return Err(Error::Encode(format!("edge ({},{}) is not an independence constraint", e.u, e.v)));
        }
        edges.push((e.u, e.v));
    }
    WeightedGraph::from_edges(weights, &edges)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Literal {
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Literal { var, negated: false }
    }

    pub fn neg(var: usize) -> Self {
        Literal { var, negated: true }
    }

    /// Literal value under action `x` (1 = true).
    pub fn holds(&self, x: usize) -> bool {
        (x == 1) != self.negated
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Problem {
    Mwis { graph: WeightedGraph },
    /// `weights[v][x]` is the reward of giving node v color x.
    Coloring { graph: Graph, q: usize, weights: Vec<Vec<f64>> },
    Max2Sat { num_vars: usize, clauses: Vec<(Literal, Literal)> },
}

/// Clause counts indexed by the actions of the lower and higher variable.
type Table2 = [[f64; 2]; 2];

pub fn encode_problem(problem: &Problem) -> Result<DecisionNetwork> {
    let encode = |e: Error| match e {
        Error::InvalidNetwork(m) => Error::Encode(m),
        other => other,
    };
    match problem {
        Problem::Mwis { graph } => Ok(encode_mwis(graph)),
        Problem::Coloring { graph, q, weights } => {
            let q = *q;
            if q < 2 {
                return Err(Error::Encode(format!("coloring needs q >= 2, got {q}")));
            }
            if weights.len() != graph.num_nodes() || weights.iter().any(|w| w.len() != q) {
                return Err(Error::Encode(format!("weights must be {} x {q}", graph.num_nodes())));
            }
            let table: Vec<Vec<ExtReal>> = (0..q)
                .map(|x| (0..q).map(|y| if x == y { ExtReal::NEG_INF } else { ExtReal::ZERO }).collect())
                .collect();
            let edges = graph.edges().iter().map(|&(u, v)| (u, v, table.clone())).collect();
            DecisionNetwork::new(q, weights.clone(), edges).map_err(encode)
        }
        Problem::Max2Sat { num_vars, clauses } => {
            let n = *num_vars;
            let mut pairs: Vec<((usize, usize), Table2)> = Vec::new();
            for (k, &(a, b)) in clauses.iter().enumerate() {
                if a.var >= n || b.var >= n {
                    return Err(Error::Encode(format!("clause {k} references a variable outside [0, {n})")));
                }
                if a.var == b.var {
                    return Err(Error::Encode(format!("clause {k} uses variable {} twice", a.var)));
                }
                let (lo, hi) = if a.var < b.var { (a, b) } else { (b, a) };
                let idx = match pairs.iter().position(|(key, _)| *key == (lo.var, hi.var)) {
                    Some(i) => i,
                    None => {
                        pairs.push(((lo.var, hi.var), [[0.0; 2]; 2]));
                        pairs.len() - 1
                    }
                };
                for x in 0..2 {
                    for y in 0..2 {
                        if lo.holds(x) || hi.holds(y) {
                            pairs[idx].1[x][y] += 1.0;
                        }
                    }
                }
            }
            let edges = pairs
                .into_iter()
                .map(|((u, v), t)| (u, v, table2([t[0][0], t[0][1], t[1][0], t[1][1]])))
                .collect();
            DecisionNetwork::new(2, vec![vec![0.0, 0.0]; n], edges).map_err(encode)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingParams {
    pub a: f64,
    pub b: f64,
    pub k_y: Option<f64>,
    pub k_phi: f64,
}

/// σ₁, σ₂, ρ, C, σ_X, σ_Y of the correlated Gaussian model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianMoments {
    pub sigma1: f64,
    pub sigma2: f64,
    pub rho: f64,
    pub c: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
}

/// Index of 00, 01, 10, 11.
const I00: usize = 0;
const I01: usize = 1;
const I10: usize = 2;
const I11: usize = 3;

pub fn gaussian_moments(s: &[[f64; 4]; 4], sigma_p: f64) -> Result<GaussianMoments> {
    let sp2 = sigma_p * sigma_p;
    let s1sq = s[I10][I10] - 2.0 * s[I10][I11] + s[I11][I11] + sp2;
    let s2sq = s[I00][I00] - 2.0 * s[I00][I01] + s[I01][I01] + sp2;
    let (sigma1, sigma2) = (s1sq.max(0.0).sqrt(), s2sq.max(0.0).sqrt());
    let cross = s[I00][I10] - s[I00][I11] - s[I01][I10] + s[I01][I11] + sp2;
    if sigma1 == 0.0 || sigma2 == 0.0 {
        return Err(Error::invalid_params("s", "degenerate covariance: Φ¹ or Φ² has zero variance"));
    }
    let rho = cross / (sigma1 * sigma2);
    let denom = ((s1sq + s2sq).powi(2) - 4.0 * rho * rho * s1sq * s2sq).sqrt();
    let c = (s2sq - s1sq) / denom;
    if !c.is_finite() || c.abs() >= 1.0 {
        return Err(Error::UnsupportedCorrelation(c));
    }
    let sigma_x = (s1sq + s2sq + 2.0 * rho * sigma1 * sigma2).max(0.0).sqrt();
    let sigma_y = (s1sq + s2sq - 2.0 * rho * sigma1 * sigma2).max(0.0).sqrt();
    if sigma_x == 0.0 {
        return Err(Error::invalid_params("s", "degenerate covariance: X has zero variance"));
    }
    Ok(GaussianMoments { sigma1, sigma2, rho, c, sigma_x, sigma_y })
}

fn iid_covariance(sigma_e: f64) -> [[f64; 4]; 4] {
    std::array::from_fn(|i| std::array::from_fn(|j| if i == j { sigma_e * sigma_e } else { 0.0 }))
}

pub fn coupling_params(model: &ModelKind) -> Result<CouplingParams> {
    model.validate()?;
    let gaussian = |mu: &[f64; 4], s: &[[f64; 4]; 4], sigma_p: f64| -> Result<CouplingParams> {
        let m = gaussian_moments(s, sigma_p)?;
        let shift = (mu[I00] + mu[I11] - mu[I10] - mu[I01]).abs();
        let a = (1.0 / PI) * ((1.0 / (1.0 - m.c * m.c)).sqrt() * m.sigma_y / m.sigma_x).atan()
            + (2.0 / PI).sqrt() * shift / m.sigma_x;
        let b = (2.0 / PI).sqrt() / m.sigma_x;
        let k_phi = (0..4).map(|i| s[i][i] + mu[i] * mu[i]).sum::<f64>().sqrt();
        Ok(CouplingParams { a, b, k_y: None, k_phi })
    };
    match model {
        ModelKind::Uniform { i1, i2 } => Ok(CouplingParams {
            a: i2 / (2.0 * i1),
            b: 1.0 / (2.0 * i1),
            k_y: Some(4.0 * i2),
            k_phi: 2.0 * i2 / 3f64.sqrt(),
        }),
        ModelKind::Gaussian { sigma_e, sigma_p } => gaussian(&[0.0; 4], &iid_covariance(*sigma_e), *sigma_p),
        ModelKind::GaussianCorrelated { mu, s, sigma_p, .. } => gaussian(mu, s, *sigma_p),
        _ => Err(Error::invalid_params(
            "model",
            "coupling parameters exist for uniform and gaussian models only",
        )),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub thm1: Option<bool>,
    pub thm2: Option<bool>,
    pub cond_first: Option<bool>,
    pub cond_third: Option<bool>,
    pub mixture_ok: Option<bool>,
    pub delta: usize,
    pub beta: Option<f64>,
    pub params: Option<CouplingParams>,
    pub theta: Option<f64>,
}

/// Evaluates every decay condition that applies to the model at degree Δ.
pub fn check_conditions(model: &ModelKind, delta: usize) -> Result<ConditionReport> {
    if delta < 2 {
        return Err(Error::invalid_params("delta", format!("must be at least 2, got {delta}")));
    }
    model.validate()?;
    let d = (delta - 1) as f64;
    let mut report = ConditionReport {
        thm1: None,
        thm2: None,
        cond_first: None,
        cond_third: None,
        mixture_ok: None,
        delta,
        beta: None,
        params: None,
        theta: None,
    };
    match model {
        ModelKind::MwisMixture { rho, delta: mix_delta } => {
            let c = mixture_matrix_check(*rho, *mix_delta);
            report.mixture_ok = Some(c.holds);
            report.theta = Some(c.theta);
            return Ok(report);
        }
        ModelKind::MwisExp | ModelKind::MapEstimation { .. } => return Ok(report),
        _ => {}
    }
    let p = coupling_params(model)?;
    report.cond_first = Some(p.a * d + (p.b * p.k_phi).sqrt() * d.powf(1.5) < 1.0);
    report.cond_third = p.k_y.map(|ky| p.a * d + p.b * ky * d * d < 1.0);
    report.params = Some(p);
    match *model {
        ModelKind::Uniform { i1, i2 } => {
            let beta = 5.0 * i2 / (2.0 * i1);
            report.beta = Some(beta);
            report.thm1 = Some(beta * d * d < 1.0);
        }
        ModelKind::Gaussian { sigma_e, sigma_p } => {
            let beta = (sigma_e * sigma_e / (sigma_e * sigma_e + sigma_p * sigma_p)).sqrt();
            report.beta = Some(beta);
            report.thm2 = Some(beta * d + (beta * d.powi(3)).sqrt() < 1.0);
        }
        _ => {}
    }
    Ok(report)
}
