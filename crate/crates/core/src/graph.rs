//! Plain and node-weighted simple undirected graphs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Graph> {
        let mut adjacency = vec![Vec::new(); n];
        let mut list = Vec::new();
        for (a, b) in edges {
            let (u, v) = (a.min(b), a.max(b));
            if u == v {
                return Err(Error::InvalidNetwork(format!("self-loop at node {u}")));
            }
            if v >= n {
                return Err(Error::InvalidNetwork(format!(
                    "edge ({a},{b}) references a node outside [0, {n})"
                )));
            }
            if adjacency[u].contains(&v) {
                return Err(Error::InvalidNetwork(format!("duplicate edge ({u},{v})")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
            list.push((u, v));
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        Ok(Graph { adjacency, edges: list })
    }

    pub fn empty(n: usize) -> Graph {
        Graph {
            adjacency: vec![Vec::new(); n],
            edges: Vec::new(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.adjacency.len()
    }

    /// Edges as `(u, v)` with `u < v`, in insertion order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Neighbors in ascending order.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edge scan: no edge has both endpoints in `set`.
    pub fn is_independent(&self, set: &[usize]) -> bool {
        let mut member = vec![false; self.num_nodes()];
        for &v in set {
            member[v] = true;
        }
        self.edges.iter().all(|&(u, v)| !(member[u] && member[v]))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    graph: Graph,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct WeightedFile {
    nodes: Vec<WeightedNode>,
    edges: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct WeightedNode {
    id: usize,
    w: f64,
}

impl WeightedGraph {
    pub fn new(graph: Graph, weights: Vec<f64>) -> Result<WeightedGraph> {
        if weights.len() != graph.num_nodes() {
            return Err(Error::invalid_params(
                "weights",
                format!("{} weights for {} nodes", weights.len(), graph.num_nodes()),
            ));
        }
        if let Some((v, w)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::invalid_params(
                "weights",
                format!("weight of node {v} must be finite and nonnegative, got {w}"),
            ));
        }
        Ok(WeightedGraph { graph, weights })
    }

    pub fn from_edges(weights: Vec<f64>, edges: &[(usize, usize)]) -> Result<WeightedGraph> {
        WeightedGraph::new(Graph::new(weights.len(), edges.iter().copied())?, weights)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, v: usize) -> f64 {
        self.weights[v]
    }

    pub fn num_nodes(&self) -> usize {
        self.graph.num_nodes()
    }

    pub fn total_weight(&self, set: &[usize]) -> f64 {
        set.iter().map(|&v| self.weights[v]).sum()
    }

    pub fn with_weights(&self, weights: Vec<f64>) -> Result<WeightedGraph> {
        WeightedGraph::new(self.graph.clone(), weights)
    }
}

/// Parses `{"nodes":[{"id":int,"w":num}],"edges":[[u,v],...]}`.
pub fn load_weighted(bytes: &[u8]) -> Result<WeightedGraph> {
    let file: WeightedFile = serde_json::from_slice(bytes).map_err(|e| {
        Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string())
    })?;
    let n = file.nodes.len();
    let mut weights = vec![None; n];
    for (k, node) in file.nodes.iter().enumerate() {
        if node.id >= n || weights[node.id].is_some() {
            return Err(Error::parse(
                format!("nodes[{k}].id"),
                format!("id {} is duplicate or outside [0, {n})", node.id),
            ));
        }
        if !(node.w.is_finite() && node.w >= 0.0) {
            return Err(Error::parse(format!("nodes[{k}].w"), "weight must be finite and nonnegative"));
        }
        weights[node.id] = Some(node.w);
    }
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, &(a, b)) in file.edges.iter().enumerate() {
        let (u, v) = (a.min(b), a.max(b));
        if u == v || v >= n || adjacency[u].contains(&v) {
            return Err(Error::parse(format!("edges[{k}]"), format!("invalid or duplicate edge ({a},{b})")));
        }
        adjacency[u].push(v);
    }
    let graph = Graph::new(n, file.edges.iter().copied())?;
    WeightedGraph::new(graph, weights.into_iter().map(Option::unwrap).collect())
}

pub fn save_weighted(g: &WeightedGraph) -> Vec<u8> {
    let file = WeightedFile {
        nodes: g
            .weights
            .iter()
            .enumerate()
            .map(|(id, &w)| WeightedNode { id, w })
            .collect(),
        edges: g.graph.edges.clone(),
    };
    serde_json::to_vec(&file).expect("weighted graph serialization cannot fail")
}
