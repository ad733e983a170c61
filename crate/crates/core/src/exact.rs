//! Ground-truth solvers: full enumeration, forest dynamic programming and
//! maximum-weight independent set branch-and-bound.

use std::collections::VecDeque;

use crate::cavity::CavityVector;
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::graph::WeightedGraph;
use crate::network::{Assignment, DecisionNetwork, EdgeTable};
use crate::view::SubnetworkView;

/// Default cap on the number of assignments enumerated.
pub const BRUTE_LIMIT: u64 = 1 << 26;

/// Default cap on branch-and-bound search nodes.
pub const BNB_LIMIT: u64 = 200_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct ExactSolution {
    pub optimum: ExtReal,
    pub argmax: Assignment,
    pub unique: bool,
}

/// Present nodes of a view in ascending id order with their effective
/// potentials and the edges back to earlier nodes.
struct Dense<'a> {
    t: usize,
    nodes: Vec<usize>,
    potentials: Vec<ExtReal>,
    back_edges: Vec<Vec<(usize, EdgeTable<'a>)>>,
}

impl<'a> Dense<'a> {
    fn new(view: &SubnetworkView<'a>, limit: u64) -> Result<Dense<'a>> {
        let t = view.num_actions();
        let nodes = view.live_nodes();
        let size = (t as u64).checked_pow(nodes.len() as u32);
        if size.is_none_or(|s| s > limit) {
            return Err(Error::RefusedTooLarge {
                what: format!("enumeration of {t}^{} assignments", nodes.len()),
                limit,
            });
        }
        let mut local = vec![usize::MAX; view.base().num_nodes()];
        for (k, &v) in nodes.iter().enumerate() {
            local[v] = k;
        }
        let mut potentials = Vec::with_capacity(nodes.len() * t);
        let mut back_edges = Vec::with_capacity(nodes.len());
        for &v in &nodes {
            potentials.extend(view.potential_vector(v));
            back_edges.push(
                view.neighbors(v)
                    .filter(|&(w, _)| w < v)
                    .map(|(w, table)| (local[w], table))
                    .collect(),
            );
        }
        Ok(Dense {
            t,
            nodes,
            potentials,
            back_edges,
        })
    }

    /// Calls `visit` on every assignment with a finite value, in
    /// lexicographic order. Branches that reach `-inf` are skipped.
    fn enumerate(&self, mut visit: impl FnMut(&[usize], f64)) {
        let m = self.nodes.len();
        let mut actions = vec![0usize; m];
        let mut partial = vec![0.0f64; m + 1];
        if m == 0 {
            visit(&actions, 0.0);
            return;
        }
        let mut k = 0usize;
        actions[0] = 0;
        loop {
            if actions[k] == self.t {
                if k == 0 {
                    return;
                }
                k -= 1;
                actions[k] += 1;
                continue;
            }
            let x = actions[k];
            let mut value = partial[k] + self.potentials[k * self.t + x].value();
            for &(j, table) in &self.back_edges[k] {
                value += table.raw(x, actions[j]);
            }
            if value == f64::NEG_INFINITY {
                actions[k] += 1;
                continue;
            }
            partial[k + 1] = value;
            if k + 1 == m {
                visit(&actions, value);
                actions[k] += 1;
            } else {
                k += 1;
                actions[k] = 0;
            }
        }
    }

    fn to_assignment(&self, base_n: usize, local: &[usize]) -> Assignment {
        let mut a = vec![0; base_n];
        for (k, &v) in self.nodes.iter().enumerate() {
            a[v] = local[k];
        }
        a
    }
}

pub fn solve_brute<'a>(net: impl Into<SubnetworkView<'a>>) -> Result<ExactSolution> {
    solve_brute_with(net, BRUTE_LIMIT)
}

/// Full enumeration. Ties resolve to the lexicographically smallest
/// optimal assignment and clear `unique`.
pub fn solve_brute_with<'a>(net: impl Into<SubnetworkView<'a>>, limit: u64) -> Result<ExactSolution> {
    let view = net.into();
    let dense = Dense::new(&view, limit)?;
    let mut best = f64::NEG_INFINITY;
    let mut best_local: Vec<usize> = Vec::new();
    let mut ties = 0u64;
    dense.enumerate(|a, value| {
        if value > best {
            best = value;
            best_local.clear();
            best_local.extend_from_slice(a);
            ties = 1;
        } else if value == best {
            ties += 1;
        }
    });
    if ties == 0 {
        return Err(Error::Infeasible);
    }
    Ok(ExactSolution {
        optimum: ExtReal::finite(best),
        argmax: dense.to_assignment(view.base().num_nodes(), &best_local),
        unique: ties == 1,
    })
}

/// Conditional optima J(x_v = x) for every action of `v`.
pub fn conditional_optima<'a>(net: impl Into<SubnetworkView<'a>>, v: usize, limit: u64) -> Result<Vec<ExtReal>> {
    let view = net.into();
    if !view.contains(v) {
        return Err(Error::InvalidView(format!("node {v} is not present in the view")));
    }
    let dense = Dense::new(&view, limit)?;
    let k = dense.nodes.binary_search(&v).expect("present node is listed");
    let mut best = vec![f64::NEG_INFINITY; dense.t];
    dense.enumerate(|a, value| {
        if value > best[a[k]] {
            best[a[k]] = value;
        }
    });
    Ok(best.into_iter().map(|b| ExtReal::new(b).expect("finite or -inf")).collect())
}

pub fn cavity_exact<'a>(net: impl Into<SubnetworkView<'a>>, v: usize) -> Result<CavityVector> {
    cavity_exact_with(net, v, BRUTE_LIMIT)
}

/// B(x) = J(x_v = x) − J(x_v = 0) by enumeration.
pub fn cavity_exact_with<'a>(net: impl Into<SubnetworkView<'a>>, v: usize, limit: u64) -> Result<CavityVector> {
    let j = conditional_optima(net, v, limit)?;
    cavity_from_optima(&j)
}

pub(crate) fn cavity_from_optima(j: &[ExtReal]) -> Result<CavityVector> {
    if j.iter().all(|x| x.is_neg_inf()) {
        return Err(Error::Infeasible);
    }
    if j[0].is_neg_inf() {
        return Err(Error::InfeasibleReference);
    }
    j.iter().map(|&x| x.checked_sub(j[0])).collect()
}

#[derive(Clone, Debug)]
pub struct TreeSolution {
    /// Per node; a node whose reference action is infeasible gets an error.
    pub cavities: Vec<std::result::Result<CavityVector, Error>>,
    pub solution: ExactSolution,
}

fn max_row(table: EdgeTable<'_>, x: usize, values: &[ExtReal]) -> ExtReal {
    (0..values.len()).fold(ExtReal::NEG_INF, |m, y| m.max(table.get(x, y) + values[y]))
}

/// Exact dynamic programming on a forest in O(n·T²): an upward pass of
/// subtree optima followed by a downward pass of outside messages.
pub fn solve_tree(net: &DecisionNetwork) -> Result<TreeSolution> {
    let n = net.num_nodes();
    let t = net.num_actions();
    let mut parent = vec![usize::MAX; n];
    let mut parent_edge = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut roots = Vec::new();
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        roots.push(root);
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for inc in net.neighbors(v) {
                if inc.edge == parent_edge[v] {
                    continue;
                }
                if seen[inc.neighbor] {
                    return Err(Error::NotATree);
                }
                seen[inc.neighbor] = true;
                parent[inc.neighbor] = v;
                parent_edge[inc.neighbor] = inc.edge;
                queue.push_back(inc.neighbor);
            }
        }
    }
    let children: Vec<Vec<usize>> = (0..n)
        .map(|v| net.neighbors(v).iter().map(|i| i.neighbor).filter(|&c| parent[c] == v).collect())
        .collect();
    let pot = |v: usize| net.potential(v).iter().map(|&p| ExtReal::finite(p));

    // Subtree optima with the subtree root pinned, and tie counts.
    let mut up = vec![vec![ExtReal::ZERO; t]; n];
    let mut up_msg = vec![vec![ExtReal::NEG_INF; t]; n];
    let mut count = vec![vec![1.0f64; t]; n];
    for &v in order.iter().rev() {
        let mut acc: Vec<ExtReal> = pot(v).collect();
        let mut cnt = vec![1.0f64; t];
        for &c in &children[v] {
            let table = net.oriented(parent_edge[c], v);
            for x in 0..t {
                acc[x] = acc[x] + up_msg[c][x];
                let ways: f64 = (0..t)
                    .filter(|&y| up_msg[c][x].is_finite() && table.get(x, y) + up[c][y] == up_msg[c][x])
                    .map(|y| count[c][y])
                    .sum();
                cnt[x] *= ways;
            }
        }
        if parent[v] != usize::MAX {
            let table = net.oriented(parent_edge[v], parent[v]);
            up_msg[v] = (0..t).map(|x| max_row(table, x, &acc)).collect();
        }
        up[v] = acc;
        count[v] = cnt;
    }

    // Messages from the parent side.
    let mut down = vec![vec![ExtReal::ZERO; t]; n];
    for &p in &order {
        let kids = &children[p];
        let mut prefix = vec![vec![ExtReal::ZERO; t]; kids.len() + 1];
        for (k, &c) in kids.iter().enumerate() {
            for x in 0..t {
                prefix[k + 1][x] = prefix[k][x] + up_msg[c][x];
            }
        }
        let mut suffix = vec![ExtReal::ZERO; t];
        let base: Vec<ExtReal> = pot(p).zip(&down[p]).map(|(a, &b)| a + b).collect();
        for (k, &c) in kids.iter().enumerate().rev() {
            let outside: Vec<ExtReal> = (0..t).map(|x| base[x] + prefix[k][x] + suffix[x]).collect();
            let table = net.oriented(parent_edge[c], c);
            down[c] = (0..t).map(|y| max_row(table, y, &outside)).collect();
            for x in 0..t {
                suffix[x] = suffix[x] + up_msg[c][x];
            }
        }
    }

    let mut optimum = ExtReal::ZERO;
    let mut ways = 1.0f64;
    let mut argmax = vec![0; n];
    for &root in &roots {
        let best = up[root].iter().fold(ExtReal::NEG_INF, |m, &x| m.max(x));
        if best.is_neg_inf() {
            return Err(Error::Infeasible);
        }
        optimum = optimum + best;
        ways *= (0..t).filter(|&x| up[root][x] == best).map(|x| count[root][x]).sum::<f64>();
        argmax[root] = (0..t).find(|&x| up[root][x] == best).expect("maximum is attained");
    }
    for &v in &order {
        if parent[v] == usize::MAX {
            continue;
        }
        let table = net.oriented(parent_edge[v], parent[v]);
        let x = argmax[parent[v]];
        let target = up_msg[v][x];
        argmax[v] = (0..t).find(|&y| table.get(x, y) + up[v][y] == target).expect("maximum is attained");
    }

    let cavities = (0..n)
        .map(|v| {
            let full: Vec<ExtReal> = (0..t).map(|x| up[v][x] + down[v][x]).collect();
            cavity_from_optima(&full)
        })
        .collect();
    Ok(TreeSolution {
        cavities,
        solution: ExactSolution {
            optimum,
            argmax,
            unique: ways == 1.0,
        },
    })
}

/// Branch-and-bound for maximum-weight independent sets on up to 128
/// nodes, over bitmask candidate sets with a weight-sum bound.
pub struct MwisSolver<'g> {
    graph: &'g WeightedGraph,
    neighbors: Vec<u128>,
    budget: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MwisOptimum {
    pub weight: f64,
    pub set: u128,
    pub unique: bool,
}

struct Search<'s> {
    weights: &'s [f64],
    neighbors: &'s [u128],
    best: f64,
    best_set: u128,
    ties: u32,
    visited: u64,
    budget: u64,
}

fn bits(mut mask: u128) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        (mask != 0).then(|| {
            let v = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            v
        })
    })
}

impl Search<'_> {
    fn record(&mut self, value: f64, set: u128, extra_ties: u32) {
        if value > self.best {
            self.best = value;
            self.best_set = set;
            self.ties = 1 + extra_ties;
        } else if value == self.best {
            self.ties += 1 + extra_ties;
        }
    }

    fn run(&mut self, cand: u128, cur: f64, chosen: u128) -> bool {
        self.visited += 1;
        if self.visited > self.budget {
            return false;
        }
        if cand == 0 {
            self.record(cur, chosen, 0);
            return true;
        }
        let bound = cur + bits(cand).map(|v| self.weights[v]).sum::<f64>();
        if bound < self.best || (bound == self.best && self.ties >= 2) {
            return true;
        }
        let mut pick = usize::MAX;
        let mut pick_deg = 0u32;
        for v in bits(cand) {
            let d = (self.neighbors[v] & cand).count_ones();
            if pick == usize::MAX || d > pick_deg {
                pick = v;
                pick_deg = d;
            }
        }
        if pick_deg == 0 {
            let zeros = bits(cand).filter(|&v| self.weights[v] == 0.0).count() as u32;
            self.record(bound, chosen | cand, zeros.min(1));
            return true;
        }
        let bit = 1u128 << pick;
        self.run(cand & !bit & !self.neighbors[pick], cur + self.weights[pick], chosen | bit)
            && self.run(cand & !bit, cur, chosen)
    }
}

impl<'g> MwisSolver<'g> {
    pub fn new(graph: &'g WeightedGraph) -> Result<MwisSolver<'g>> {
        MwisSolver::with_budget(graph, BNB_LIMIT)
    }

    pub fn with_budget(graph: &'g WeightedGraph, budget: u64) -> Result<MwisSolver<'g>> {
        let n = graph.num_nodes();
        if n > 128 {
            return Err(Error::RefusedTooLarge {
                what: format!("branch-and-bound on {n} nodes"),
                limit: 128,
            });
        }
        let neighbors = (0..n)
            .map(|v| graph.graph().neighbors(v).iter().fold(0u128, |m, &w| m | (1u128 << w)))
            .collect();
        Ok(MwisSolver {
            graph,
            neighbors,
            budget,
        })
    }

    pub fn all(&self) -> u128 {
        let n = self.graph.num_nodes();
        if n == 128 {
            u128::MAX
        } else {
            (1u128 << n) - 1
        }
    }

    pub fn neighbor_mask(&self, v: usize) -> u128 {
        self.neighbors[v]
    }

    /// Optimum of the subgraph induced by `live`.
    pub fn solve(&self, live: u128) -> Result<MwisOptimum> {
        let mut search = Search {
            weights: self.graph.weights(),
            neighbors: &self.neighbors,
            best: -1.0,
            best_set: 0,
            ties: 0,
            visited: 0,
            budget: self.budget,
        };
        if !search.run(live, 0.0, 0) {
            return Err(Error::RefusedTooLarge {
                what: "branch-and-bound search nodes".into(),
                limit: self.budget,
            });
        }
        Ok(MwisOptimum {
            weight: self.set_weight(search.best_set),
            set: search.best_set,
            unique: search.ties == 1,
        })
    }

    /// Weight of `set`, summed in ascending node order.
    pub fn set_weight(&self, set: u128) -> f64 {
        bits(set).map(|v| self.graph.weight(v)).sum()
    }

    pub fn optimum(&self, live: u128) -> Result<f64> {
        self.solve(live).map(|o| o.weight)
    }
}

pub fn mask_to_set(mask: u128) -> Vec<usize> {
    bits(mask).collect()
}

/// Exact maximum-weight independent set.
pub fn solve_mwis_bnb(graph: &WeightedGraph) -> Result<ExactSolution> {
    let solver = MwisSolver::new(graph)?;
    let opt = solver.solve(solver.all())?;
    let mut argmax = vec![0; graph.num_nodes()];
    for v in bits(opt.set) {
        argmax[v] = 1;
    }
    Ok(ExactSolution {
        optimum: ExtReal::finite(opt.weight),
        argmax,
        unique: opt.unique,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::models::encode_mwis;

    fn k2(w0: f64, w1: f64) -> DecisionNetwork {
        encode_mwis(&WeightedGraph::from_edges(vec![w0, w1], &[(0, 1)]).unwrap())
    }

    fn star_mwis(center: f64, leaves: usize) -> WeightedGraph {
        let mut w = vec![center];
        w.extend(std::iter::repeat_n(1.0, leaves));
        let edges: Vec<_> = (1..=leaves).map(|l| (0, l)).collect();
        WeightedGraph::from_edges(w, &edges).unwrap()
    }

    #[test]
    fn brute_k2() {
        let sol = solve_brute(&k2(2.0, 3.0)).unwrap();
        assert_eq!(sol.optimum, ExtReal::finite(3.0));
        assert_eq!(sol.argmax, vec![0, 1]);
        assert!(sol.unique);
    }

    #[test]
    fn brute_separable_and_ties() {
        let net = DecisionNetwork::new(2, vec![vec![0.0, 1.0]; 3], vec![]).unwrap();
        assert_eq!(solve_brute(&net).unwrap().optimum, ExtReal::finite(3.0));
        let flat = DecisionNetwork::new(2, vec![vec![0.0, 0.0]; 2], vec![]).unwrap();
        let sol = solve_brute(&flat).unwrap();
        assert_eq!(sol.argmax, vec![0, 0]);
        assert!(!sol.unique);
    }

    #[test]
    fn brute_triangle_two_coloring_is_infeasible() {
        let neg = ExtReal::NEG_INF;
        let zero = ExtReal::ZERO;
        let table = vec![vec![neg, zero], vec![zero, neg]];
        let net = DecisionNetwork::new(
            2,
            vec![vec![0.0, 0.0]; 3],
            vec![(0, 1, table.clone()), (1, 2, table.clone()), (0, 2, table)],
        )
        .unwrap();
        assert_eq!(solve_brute(&net), Err(Error::Infeasible));
        assert_eq!(cavity_exact(&net, 0), Err(Error::Infeasible));
    }

    #[test]
    fn brute_refuses_large_instances() {
        let net = DecisionNetwork::new(2, vec![vec![0.0, 1.0]; 30], vec![]).unwrap();
        assert!(matches!(solve_brute(&net), Err(Error::RefusedTooLarge { .. })));
        assert!(solve_brute_with(&net, 1 << 30).is_ok());
    }

    #[test]
    fn cavity_examples() {
        let iso = DecisionNetwork::new(2, vec![vec![0.0, 0.75]], vec![]).unwrap();
        assert_eq!(cavity_exact(&iso, 0).unwrap(), vec![ExtReal::ZERO, ExtReal::finite(0.75)]);
        assert_eq!(cavity_exact(&k2(2.0, 3.0), 0).unwrap()[1], ExtReal::finite(-1.0));
        let star = encode_mwis(&star_mwis(2.0, 3));
        assert_eq!(cavity_exact(&star, 0).unwrap()[1], ExtReal::finite(-1.0));
    }

    #[test]
    fn tree_examples() {
        let path = encode_mwis(&WeightedGraph::from_edges(vec![1.0; 3], &[(0, 1), (1, 2)]).unwrap());
        let sol = solve_tree(&path).unwrap();
        assert_eq!(sol.solution.optimum, ExtReal::finite(2.0));
        assert_eq!(sol.solution.argmax, vec![1, 0, 1]);
        assert!(sol.solution.unique);
        assert_eq!(sol.cavities[1].clone().unwrap()[1], ExtReal::finite(-1.0));

        let zero = vec![vec![ExtReal::ZERO; 3]; 3];
        let net = DecisionNetwork::new(3, vec![vec![0.5, -1.0, 2.0], vec![0.0, 3.0, 1.0]], vec![(0, 1, zero)]).unwrap();
        let sol = solve_tree(&net).unwrap();
        for v in 0..2 {
            let p = net.potential(v);
            let expect: Vec<ExtReal> = p.iter().map(|&x| ExtReal::finite(x - p[0])).collect();
            assert_eq!(sol.cavities[v].clone().unwrap(), expect);
        }
    }

    #[test]
    fn tree_rejects_cycles() {
        let table = vec![vec![ExtReal::ZERO; 2]; 2];
        let net = DecisionNetwork::new(
            2,
            vec![vec![0.0, 0.0]; 3],
            vec![(0, 1, table.clone()), (1, 2, table.clone()), (0, 2, table)],
        )
        .unwrap();
        assert!(matches!(solve_tree(&net), Err(Error::NotATree)));
    }

    #[test]
    fn bnb_examples() {
        let c5 = WeightedGraph::from_edges(vec![1.0; 5], &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]).unwrap();
        let sol = solve_mwis_bnb(&c5).unwrap();
        assert_eq!(sol.optimum, ExtReal::finite(2.0));
        assert!(!sol.unique);
        assert_eq!(solve_mwis_bnb(&star_mwis(5.0, 4)).unwrap().optimum, ExtReal::finite(5.0));
        let empty = WeightedGraph::new(Graph::empty(3), vec![0.5, 1.25, 2.0]).unwrap();
        let sol = solve_mwis_bnb(&empty).unwrap();
        assert_eq!(sol.optimum, ExtReal::finite(3.75));
        assert_eq!(sol.argmax, vec![1, 1, 1]);
        assert!(sol.unique);
        let with_zero = WeightedGraph::new(Graph::empty(2), vec![0.0, 1.0]).unwrap();
        assert!(!solve_mwis_bnb(&with_zero).unwrap().unique);
    }

    #[test]
    fn bnb_budget() {
        let g = WeightedGraph::from_edges(vec![1.0; 6], &[(0, 1), (2, 3), (4, 5)]).unwrap();
        let solver = MwisSolver::with_budget(&g, 3).unwrap();
        assert!(matches!(solver.solve(solver.all()), Err(Error::RefusedTooLarge { .. })));
    }
}
