#![allow(dead_code)]

use cavitylab::graph::{Graph, WeightedGraph};
use cavitylab::models::{encode_problem, Literal, Problem};
use cavitylab::{DecisionNetwork, ExtReal};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdős–Rényi edges on `n` nodes, skipping edges that would exceed `dmax`.
pub fn bounded_edges(rng: &mut impl RngCore, n: usize, p: f64, dmax: usize) -> Vec<(usize, usize)> {
    let mut deg = vec![0; n];
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) && deg[u] < dmax && deg[v] < dmax {
                deg[u] += 1;
                deg[v] += 1;
                edges.push((u, v));
            }
        }
    }
    edges
}

/// Random forest: a recursive tree with each edge kept with probability 0.8.
pub fn forest_edges(rng: &mut impl RngCore, n: usize) -> Vec<(usize, usize)> {
    (1..n)
        .filter_map(|v| {
            let parent = rng.random_range(0..v);
            rng.random_bool(0.8).then_some((parent, v))
        })
        .collect()
}

fn table(rng: &mut impl RngCore, t: usize, scale: f64, inf_prob: f64) -> Vec<Vec<ExtReal>> {
    (0..t)
        .map(|_| {
            (0..t)
                .map(|_| {
                    if rng.random_bool(inf_prob) {
                        ExtReal::NEG_INF
                    } else {
                        ExtReal::finite(rng.random_range(-scale..scale))
                    }
                })
                .collect()
        })
        .collect()
}

/// Network on the given edges with uniform potentials in [-1, 1) and edge
/// entries in [-scale, scale), each entry `-inf` with probability `inf_prob`.
pub fn network_on(
    rng: &mut impl RngCore,
    n: usize,
    t: usize,
    edges: &[(usize, usize)],
    scale: f64,
    inf_prob: f64,
) -> DecisionNetwork {
    let potentials = (0..n).map(|_| (0..t).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let edges = edges.iter().map(|&(u, v)| (u, v, table(rng, t, scale, inf_prob))).collect();
    DecisionNetwork::new(t, potentials, edges).expect("valid random network")
}

pub fn random_network(seed: u64, n: usize, t: usize, inf_prob: f64) -> DecisionNetwork {
    let mut r = rng(seed);
    let edges = bounded_edges(&mut r, n, 0.4, 4);
    network_on(&mut r, n, t, &edges, 1.0, inf_prob)
}

pub fn random_weighted(rng: &mut impl RngCore, n: usize, p: f64, dmax: usize) -> WeightedGraph {
    let edges = bounded_edges(rng, n, p, dmax);
    let weights = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    WeightedGraph::from_edges(weights, &edges).expect("valid weighted graph")
}

pub fn random_coloring(rng: &mut impl RngCore, n: usize, q: usize, dmax: usize) -> (Graph, Vec<Vec<f64>>) {
    let graph = Graph::new(n, bounded_edges(rng, n, 0.4, dmax)).expect("valid graph");
    let weights = (0..n).map(|_| (0..q).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
    (graph, weights)
}

pub fn random_clauses(rng: &mut impl RngCore, n: usize, dmax: usize) -> Vec<(Literal, Literal)> {
    let edges = bounded_edges(rng, n, 0.5, dmax);
    let lit = |rng: &mut dyn RngCore, v: usize| Literal { var: v, negated: rng.random_bool(0.5) };
    edges.iter().map(|&(u, v)| (lit(rng, u), lit(rng, v))).collect()
}

pub fn coloring_network(graph: Graph, q: usize, weights: Vec<Vec<f64>>) -> DecisionNetwork {
    encode_problem(&Problem::Coloring { graph, q, weights }).expect("valid coloring")
}

/// All assignments of `n` variables over `t` actions in lexicographic order.
pub fn assignments(n: usize, t: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = t.pow(n as u32);
    (0..total).map(move |mut k| {
        let mut a = vec![0; n];
        for slot in a.iter_mut().rev() {
            *slot = k % t;
            k /= t;
        }
        a
    })
}

pub fn close(a: ExtReal, b: ExtReal, tol: f64) -> bool {
    a.approx_eq(b, tol)
}

pub fn vec_close(a: &[ExtReal], b: &[ExtReal], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(&x, &y)| close(x, y, tol))
}
