//! Cavity recursion for maximum-weight independent sets: exact C values,
//! the truncated bounds C⁻/C⁺, the two-phase deletion algorithm and the
//! greedy baseline.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::MwisSolver;
use crate::graph::WeightedGraph;
use crate::rng;

/// C(i) = J_𝒢 − J_{𝒢∖i}.
pub fn c_exact(graph: &WeightedGraph, i: usize) -> Result<f64> {
    let solver = MwisSolver::new(graph)?;
    c_exact_in(&solver, solver.all(), i)
}

/// C(i) within the subgraph induced by `live`.
pub fn c_exact_in(solver: &MwisSolver<'_>, live: u128, i: usize) -> Result<f64> {
    let bit = 1u128 << i;
    debug_assert!(live & bit != 0);
    let with = solver.solve(live)?;
    if with.set & bit == 0 {
        return Ok(0.0);
    }
    let without = solver.optimum(live & !bit)?;
    Ok((with.weight - without).max(0.0))
}

/// Σ_l C_{𝒢∖{i,i₁,…,i_{l−1}}}(i_l) over the neighbors of `i` in ascending
/// order, computed exactly.
pub fn neighbor_cavity_sum(solver: &MwisSolver<'_>, live: u128, i: usize) -> Result<f64> {
    let mut rest = live & !(1u128 << i);
    let mut sum = 0.0;
    let mut nbrs = solver.neighbor_mask(i) & live;
    while nbrs != 0 {
        let l = nbrs.trailing_zeros() as usize;
        nbrs &= nbrs - 1;
        sum += c_exact_in(solver, rest, l)?;
        rest &= !(1u128 << l);
    }
    Ok(sum)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    /// Depth-zero value 0.
    Minus,
    /// Depth-zero value W_i.
    Plus,
}

/// Memoized evaluation of the truncated recursion. The value at `(H, i, r)`
/// only depends on the component of `i` in `H`, and equals the exact C once
/// `r` reaches the component size, where branch and bound takes over.
struct Bounds<'g> {
    graph: &'g WeightedGraph,
    sign: Sign,
    exact: Option<MwisSolver<'g>>,
    memo: HashMap<(FixedBitSet, usize, usize), f64>,
}

impl<'g> Bounds<'g> {
    fn new(graph: &'g WeightedGraph, sign: Sign) -> Self {
        Bounds {
            graph,
            sign,
            exact: MwisSolver::new(graph).ok(),
            memo: HashMap::new(),
        }
    }

    fn component(&self, live: &FixedBitSet, i: usize) -> FixedBitSet {
        let mut comp = FixedBitSet::with_capacity(live.len());
        comp.insert(i);
        let mut stack = vec![i];
        while let Some(v) = stack.pop() {
            for &w in self.graph.graph().neighbors(v) {
                if live.contains(w) && !comp.contains(w) {
                    comp.insert(w);
                    stack.push(w);
                }
            }
        }
        comp
    }

    fn eval(&mut self, live: &FixedBitSet, i: usize, r: usize) -> f64 {
        let w = self.graph.weight(i);
        if r == 0 {
            return match self.sign {
                Sign::Minus => 0.0,
                Sign::Plus => w,
            };
        }
        let comp = self.component(live, i);
        let size = comp.count_ones(..);
        if r >= size {
            if let Some(solver) = &self.exact {
                let mask = comp.ones().fold(0u128, |m, v| m | 1u128 << v);
                if let Ok(c) = c_exact_in(solver, mask, i) {
                    return c;
                }
            }
        }
        let r = r.min(size);
        let key = (comp, i, r);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let mut rest = key.0.clone();
        rest.set(i, false);
        let mut sum = 0.0;
        for &l in self.graph.graph().neighbors(i) {
            if rest.contains(l) {
                sum += self.eval(&rest, l, r - 1);
                rest.set(l, false);
            }
        }
        let value = (w - sum).max(0.0);
        self.memo.insert(key, value);
        value
    }
}

fn full_set(n: usize) -> FixedBitSet {
    let mut s = FixedBitSet::with_capacity(n);
    s.insert_range(..);
    s
}

/// C⁻(i, r) or C⁺(i, r) in the subgraph induced by `live`.
pub fn c_bound(graph: &WeightedGraph, live: &FixedBitSet, i: usize, r: usize, sign: Sign) -> f64 {
    assert!(live.contains(i), "node {i} is not live");
    Bounds::new(graph, sign).eval(live, i, r)
}

/// Bounds for every live node, computed in parallel. Entries for nodes
/// outside `live` are `None`.
pub fn c_bound_all(graph: &WeightedGraph, live: &FixedBitSet, r: usize, sign: Sign) -> Vec<Option<f64>> {
    (0..graph.num_nodes())
        .into_par_iter()
        .map_init(
            || Bounds::new(graph, sign),
            |b, i| live.contains(i).then(|| b.eval(live, i, r)),
        )
        .collect()
}

pub fn c_bound_full(graph: &WeightedGraph, i: usize, r: usize, sign: Sign) -> f64 {
    c_bound(graph, &full_set(graph.num_nodes()), i, r, sign)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MwisRun {
    pub epsilon: f64,
    pub depth: usize,
    pub seed: u64,
    pub kept_nodes: Vec<usize>,
    pub chosen_set: Vec<usize>,
    pub weight: f64,
}

/// Deletion probability of the first phase.
pub fn deletion_probability(epsilon: f64) -> f64 {
    epsilon * epsilon / 16.0
}

/// Nodes surviving the first phase, keyed by `(seed, node)`.
pub fn kept_nodes(n: usize, epsilon: f64, seed: u64) -> Vec<usize> {
    let p = deletion_probability(epsilon);
    (0..n)
        .filter(|&i| rng::unit(seed, &[rng::tag::DELETE, i as u64]) >= p)
        .collect()
}

/// Deletes each node with probability ε²/16, then keeps the nodes with
/// C⁻(i, r) > 0 in the remaining graph.
pub fn run_two_phase(graph: &WeightedGraph, epsilon: f64, r: usize, seed: u64) -> Result<MwisRun> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid_params("epsilon", format!("must lie in (0, 1), got {epsilon}")));
    }
    if r % 2 == 1 {
        return Err(Error::InvalidDepth(r));
    }
    let n = graph.num_nodes();
    let kept = kept_nodes(n, epsilon, seed);
    let mut live = FixedBitSet::with_capacity(n);
    for &i in &kept {
        live.insert(i);
    }
    let bounds = c_bound_all(graph, &live, r, Sign::Minus);
    let chosen: Vec<usize> = kept.iter().copied().filter(|&i| bounds[i].is_some_and(|c| c > 0.0)).collect();
    if !graph.graph().is_independent(&chosen) {
        return Err(Error::Invariant("two-phase output is not an independent set".into()));
    }
    let weight = graph.total_weight(&chosen);
    Ok(MwisRun {
        epsilon,
        depth: r,
        seed,
        kept_nodes: kept,
        chosen_set: chosen,
        weight,
    })
}

/// Ceil(32·ln(3/ε)/ε²), rounded up to even.
pub fn suggested_depth(epsilon: f64) -> usize {
    let r = (32.0 * (3.0 / epsilon).ln() / (epsilon * epsilon)).ceil() as usize;
    r + r % 2
}

/// Repeatedly takes the smallest remaining node and drops its neighbors.
pub fn greedy_mis(graph: &WeightedGraph) -> Vec<usize> {
    let g = graph.graph();
    let n = g.num_nodes();
    let mut blocked = vec![false; n];
    let mut set = Vec::new();
    for v in 0..n {
        if blocked[v] {
            continue;
        }
        set.push(v);
        blocked[v] = true;
        for &w in g.neighbors(v) {
            blocked[w] = true;
        }
    }
    if g.max_degree() <= 3 {
        assert!(4 * set.len() >= n, "greedy set below n/4 on a graph of degree at most 3");
    }
    set
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightDist {
    Exp1,
    /// P(W > t) = (1/Δ)·Σ_j exp(−ρ^j t).
    Mixture { rho: f64, delta: usize },
}

impl WeightDist {
    pub fn validate(&self) -> Result<()> {
        if let WeightDist::Mixture { rho, delta } = *self {
            if !(rho.is_finite() && rho > 1.0) {
                return Err(Error::invalid_params("rho", format!("must be finite and > 1, got {rho}")));
            }
            if delta < 1 {
                return Err(Error::invalid_params("delta", "must be at least 1"));
            }
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        let e: f64 = Exp1.sample(rng);
        match *self {
            WeightDist::Exp1 => e,
            WeightDist::Mixture { rho, delta } => {
                let j = rng.random_range(1..=delta);
                e / rho.powi(j as i32)
            }
        }
    }
}

/// i.i.d. weights, one stream per node.
pub fn sample_weights(n: usize, dist: WeightDist, seed: u64) -> Result<Vec<f64>> {
    dist.validate()?;
    Ok((0..n)
        .map(|i| dist.sample(&mut rng::stream(seed, &[rng::tag::WEIGHT, i as u64])))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureCheck {
    pub theta: f64,
    pub holds: bool,
}

/// Builds M_Δ and checks M′x ≤ θx for x_k = ρ^{−k/2}.
pub fn mixture_matrix_check(rho: f64, delta: usize) -> MixtureCheck {
    let eps = 1.0 / rho;
    let s = eps.sqrt();
    let theta = 0.5 + 2.0 * s / (1.0 - s);
    let m = |j: usize, k: usize| -> f64 {
        match j.cmp(&k) {
            std::cmp::Ordering::Equal => 0.5,
            std::cmp::Ordering::Greater => 1.0,
            std::cmp::Ordering::Less => eps.powi((k - j) as i32),
        }
    };
    let x: Vec<f64> = (1..=delta).map(|k| eps.powf(k as f64 / 2.0)).collect();
    let componentwise = (0..delta).all(|j| {
        let mx: f64 = (0..delta).map(|k| m(k, j) * x[k]).sum();
        mx <= theta * x[j]
    });
    MixtureCheck {
        theta,
        holds: theta < 1.0 && componentwise,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn path3() -> WeightedGraph {
        WeightedGraph::from_edges(vec![1.0; 3], &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn c_exact_examples() {
        let iso = WeightedGraph::new(Graph::empty(1), vec![0.8]).unwrap();
        assert_eq!(c_exact(&iso, 0).unwrap(), 0.8);
        let k2 = WeightedGraph::from_edges(vec![2.0, 3.0], &[(0, 1)]).unwrap();
        assert_eq!(c_exact(&k2, 0).unwrap(), 0.0);
        assert_eq!(c_exact(&k2, 1).unwrap(), 1.0);
        let star = WeightedGraph::from_edges(vec![2.0, 1.0, 1.0, 1.0], &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(c_exact(&star, 0).unwrap(), 0.0);
    }

    #[test]
    fn bound_examples() {
        let g = path3();
        assert_eq!(c_bound_full(&g, 1, 0, Sign::Minus), 0.0);
        assert_eq!(c_bound_full(&g, 1, 0, Sign::Plus), 1.0);
        assert_eq!(c_bound_full(&g, 1, 2, Sign::Minus), 0.0);
        let iso = WeightedGraph::new(Graph::empty(1), vec![0.3]).unwrap();
        for r in 1..4 {
            assert_eq!(c_bound_full(&iso, 0, r, Sign::Minus), 0.3);
            assert_eq!(c_bound_full(&iso, 0, r, Sign::Plus), 0.3);
        }
    }

    #[test]
    fn two_phase_examples() {
        let k2 = WeightedGraph::from_edges(vec![2.0, 3.0], &[(0, 1)]).unwrap();
        let run = run_two_phase(&k2, 0.1, 2, 1).unwrap();
        assert_eq!(run.kept_nodes, vec![0, 1]);
        assert_eq!(run.chosen_set, vec![1]);
        assert_eq!(run.weight, 3.0);
        assert_eq!(run_two_phase(&k2, 0.1, 3, 1), Err(Error::InvalidDepth(3)));
        assert!(run_two_phase(&k2, 1.5, 2, 1).is_err());

        let iso = WeightedGraph::new(Graph::empty(4), vec![1.0, 0.0, 2.0, 0.5]).unwrap();
        let run = run_two_phase(&iso, 0.01, 2, 3).unwrap();
        assert_eq!(run.kept_nodes.len(), 4);
        assert_eq!(run.chosen_set, vec![0, 2, 3]);
    }

    #[test]
    fn greedy_examples() {
        let empty = WeightedGraph::new(Graph::empty(5), vec![1.0; 5]).unwrap();
        assert_eq!(greedy_mis(&empty).len(), 5);
        let k4_edges: Vec<_> = (0..4).flat_map(|a| (a + 1..4).map(move |b| (a, b))).collect();
        let k4 = WeightedGraph::from_edges(vec![1.0; 4], &k4_edges).unwrap();
        assert_eq!(greedy_mis(&k4), vec![0]);
    }

    #[test]
    fn suggested_depth_is_even() {
        assert_eq!(suggested_depth(0.15), 4262);
        for eps in [0.05, 0.1, 0.3, 0.5, 0.9] {
            let r = suggested_depth(eps);
            assert_eq!(r % 2, 0);
            assert!(r as f64 >= 32.0 * (3.0 / eps).ln() / (eps * eps));
        }
    }

    #[test]
    fn weights_are_deterministic() {
        let a = sample_weights(50, WeightDist::Exp1, 42).unwrap();
        assert_eq!(a, sample_weights(50, WeightDist::Exp1, 42).unwrap());
        assert_ne!(a, sample_weights(50, WeightDist::Exp1, 43).unwrap());
        assert!(a.iter().all(|&w| w >= 0.0));
        assert!(sample_weights(3, WeightDist::Mixture { rho: 1.0, delta: 2 }, 0).is_err());
    }

    #[test]
    fn mixture_examples() {
        let c = mixture_matrix_check(26.0, 10);
        assert!((c.theta - 0.98792).abs() < 5e-6 && c.holds);
        let c = mixture_matrix_check(4.0, 5);
        assert!((c.theta - 2.5).abs() < 1e-12 && !c.holds);
        let c = mixture_matrix_check(1e6, 3);
        assert!((c.theta - 0.502).abs() < 1e-5 && c.holds);
    }
}
