//! Decision networks and the instance file format.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtReal;

/// One action per node, indexed by node id.
pub type Assignment = Vec<usize>;

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    table: Vec<ExtReal>,
}

impl Edge {
    /// Φ_{u,v}(x, y) with `x` the action of `u`.
    pub fn value(&self, t: usize, x: usize, y: usize) -> ExtReal {
        self.table[x * t + y]
    }

    pub fn table(&self) -> &[ExtReal] {
        &self.table
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Incidence {
    pub neighbor: usize,
    pub edge: usize,
}

/// An edge table read from one endpoint: `get(x, y)` is the interaction when
/// the reading endpoint plays `x` and the other endpoint plays `y`.
#[derive(Clone, Copy, Debug)]
pub struct EdgeTable<'a> {
    table: &'a [ExtReal],
    t: usize,
    reversed: bool,
}

impl<'a> EdgeTable<'a> {
    pub fn new(table: &'a [ExtReal], t: usize, reversed: bool) -> Self {
        assert_eq!(table.len(), t * t, "edge table must be T x T");
        EdgeTable { table, t, reversed }
    }

    pub fn num_actions(&self) -> usize {
        self.t
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> ExtReal {
        if self.reversed {
            self.table[y * self.t + x]
        } else {
            self.table[x * self.t + y]
        }
    }

    /// Plain float view of an entry, `-inf` included.
    #[inline]
    pub fn raw(&self, x: usize, y: usize) -> f64 {
        self.get(x, y).value()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecisionNetwork {
    num_actions: usize,
    potentials: Vec<f64>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<Incidence>>,
}

impl DecisionNetwork {
    /// Builds a network from per-node potentials and `(u, v, table)` triples
    /// where `table[x][y] = Φ_{u,v}(x, y)`. Edges given with `u > v` are
    /// stored transposed.
    pub fn new(
        num_actions: usize,
        potentials: Vec<Vec<f64>>,
        edges: Vec<(usize, usize, Vec<Vec<ExtReal>>)>,
    ) -> Result<Self> {
        let t = num_actions;
        if t < 2 {
            return Err(Error::InvalidNetwork(format!(
                "num_actions must be at least 2, got {t}"
            )));
        }
        let n = potentials.len();
        let mut flat = Vec::with_capacity(n * t);
        for (v, p) in potentials.iter().enumerate() {
            if p.len() != t {
                return Err(Error::InvalidNetwork(format!(
                    "node {v} has {} potential entries, expected {t}",
                    p.len()
                )));
            }
            if let Some(bad) = p.iter().find(|x| !x.is_finite()) {
                return Err(Error::InvalidNetwork(format!(
                    "node {v} has non-finite potential {bad}"
                )));
            }
            flat.extend_from_slice(p);
        }
        let mut net = DecisionNetwork {
            num_actions: t,
            potentials: flat,
            edges: Vec::with_capacity(edges.len()),
            adjacency: vec![Vec::new(); n],
        };
        for (u, v, rows) in edges {
            if rows.len() != t || rows.iter().any(|r| r.len() != t) {
                return Err(Error::InvalidNetwork(format!(
                    "edge ({u},{v}) table must be {t} x {t}"
                )));
            }
            let table: Vec<ExtReal> = if u <= v {
                rows.into_iter().flatten().collect()
            } else {
                (0..t * t).map(|k| rows[k % t][k / t]).collect()
            };
            net.push_edge(u.min(v), u.max(v), table)
                .map_err(Error::InvalidNetwork)?;
        }
        net.sort_adjacency();
        Ok(net)
    }

    fn push_edge(&mut self, u: usize, v: usize, table: Vec<ExtReal>) -> std::result::Result<(), String> {
        let n = self.num_nodes();
        if u == v {
            return Err(format!("self-loop at node {u}"));
        }
        if v >= n {
            return Err(format!("edge ({u},{v}) references a node outside [0, {n})"));
        }
        if self.adjacency[u].iter().any(|inc| inc.neighbor == v) {
            return Err(format!("duplicate edge ({u},{v})"));
        }
        let idx = self.edges.len();
        self.edges.push(Edge { u, v, table });
        self.adjacency[u].push(Incidence { neighbor: v, edge: idx });
        self.adjacency[v].push(Incidence { neighbor: u, edge: idx });
        Ok(())
    }

    fn sort_adjacency(&mut self) {
        for list in &mut self.adjacency {
            list.sort_by_key(|inc| inc.neighbor);
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn potential(&self, v: usize) -> &[f64] {
        &self.potentials[v * self.num_actions..(v + 1) * self.num_actions]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Incident edges of `v` in ascending neighbor order.
    pub fn neighbors(&self, v: usize) -> &[Incidence] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Table of edge `edge` read from endpoint `from`.
    pub fn oriented(&self, edge: usize, from: usize) -> EdgeTable<'_> {
        let e = &self.edges[edge];
        debug_assert!(from == e.u || from == e.v);
        EdgeTable::new(&e.table, self.num_actions, from != e.u)
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a]
            .binary_search_by_key(&b, |inc| inc.neighbor)
            .ok()
            .map(|k| self.adjacency[a][k].edge)
    }

    pub fn check_assignment(&self, a: &[usize]) -> Result<()> {
        if a.len() != self.num_nodes() {
            return Err(Error::InvalidAssignment(format!(
                "assignment has length {}, network has {} nodes",
                a.len(),
                self.num_nodes()
            )));
        }
        if let Some((v, &x)) = a.iter().enumerate().find(|(_, &x)| x >= self.num_actions) {
            return Err(Error::InvalidAssignment(format!(
                "action {x} at node {v} is outside [0, {})",
                self.num_actions
            )));
        }
        Ok(())
    }

    /// F(a): the sum of every node and edge term.
    pub fn evaluate(&self, a: &[usize]) -> Result<ExtReal> {
        self.check_assignment(a)?;
        let t = self.num_actions;
        let mut total = ExtReal::ZERO;
        for (v, &x) in a.iter().enumerate() {
            total = total + self.potentials[v * t + x];
        }
        for e in &self.edges {
            total = total + e.value(t, a[e.u], a[e.v]);
        }
        Ok(total)
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    num_actions: usize,
    nodes: Vec<NodeRecord>,
    edges: Vec<EdgeRecord>,
}

#[derive(Serialize, Deserialize)]
struct NodeRecord {
    id: usize,
    potential: Vec<ExtReal>,
}

#[derive(Serialize, Deserialize)]
struct EdgeRecord {
    u: usize,
    v: usize,
    table: Vec<Vec<ExtReal>>,
}

fn json_error(e: serde_json::Error) -> Error {
    Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string())
}

/// Parses the instance JSON format.
pub fn load_instance(bytes: &[u8]) -> Result<DecisionNetwork> {
    let file: InstanceFile = serde_json::from_slice(bytes).map_err(json_error)?;
    let t = file.num_actions;
    if t < 2 {
        return Err(Error::parse("num_actions", format!("must be at least 2, got {t}")));
    }
    let n = file.nodes.len();
    let mut potentials: Vec<Option<Vec<f64>>> = vec![None; n];
    for (k, node) in file.nodes.into_iter().enumerate() {
        let loc = format!("nodes[{k}]");
        if node.id >= n {
            return Err(Error::parse(
                format!("{loc}.id"),
                format!("id {} outside [0, {n})", node.id),
            ));
        }
        if potentials[node.id].is_some() {
            return Err(Error::parse(format!("{loc}.id"), format!("duplicate id {}", node.id)));
        }
        if node.potential.len() != t {
            return Err(Error::parse(
                format!("{loc}.potential"),
                format!("expected {t} entries, got {}", node.potential.len()),
            ));
        }
        if node.potential.iter().any(|p| !p.is_finite()) {
            return Err(Error::parse(
                format!("{loc}.potential"),
                "node potentials must be finite",
            ));
        }
        potentials[node.id] = Some(node.potential.into_iter().map(ExtReal::value).collect());
    }
    let potentials: Vec<Vec<f64>> = potentials.into_iter().map(Option::unwrap).collect();
    let mut flat = Vec::with_capacity(n * t);
    for p in &potentials {
        flat.extend_from_slice(p);
    }
    let mut net = DecisionNetwork {
        num_actions: t,
        potentials: flat,
        edges: Vec::with_capacity(file.edges.len()),
        adjacency: vec![Vec::new(); n],
    };
    for (k, e) in file.edges.into_iter().enumerate() {
        let loc = format!("edges[{k}]");
        if e.u >= e.v {
            return Err(Error::parse(loc, format!("requires u < v, got ({},{})", e.u, e.v)));
        }
        if e.table.len() != t || e.table.iter().any(|r| r.len() != t) {
            return Err(Error::parse(format!("{loc}.table"), format!("must be {t} x {t}")));
        }
        let table = e.table.into_iter().flatten().collect();
        net.push_edge(e.u, e.v, table).map_err(|m| Error::parse(loc, m))?;
    }
    net.sort_adjacency();
    Ok(net)
}

/// Serializes to the instance JSON format: nodes by id, edges in stored order.
pub fn save_instance(net: &DecisionNetwork) -> Vec<u8> {
    let t = net.num_actions;
    let file = InstanceFile {
        num_actions: t,
        nodes: (0..net.num_nodes())
            .map(|v| NodeRecord {
                id: v,
                potential: net.potential(v).iter().map(|&p| ExtReal::finite(p)).collect(),
            })
            .collect(),
        edges: net
            .edges
            .iter()
            .map(|e| EdgeRecord {
                u: e.u,
                v: e.v,
                table: e.table.chunks(t).map(<[ExtReal]>::to_vec).collect(),
            })
            .collect(),
    };
    serde_json::to_vec(&file).expect("instance serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;

    const NEG: ExtReal = ExtReal::NEG_INF;

    fn mwis_table() -> Vec<Vec<ExtReal>> {
        vec![vec![0.0.into(), 0.0.into()], vec![0.0.into(), NEG]]
    }

    fn path3() -> DecisionNetwork {
        DecisionNetwork::new(
            2,
            vec![vec![0.0, 1.0]; 3],
            vec![(0, 1, mwis_table()), (1, 2, mwis_table())],
        )
        .unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let single = DecisionNetwork::new(2, vec![vec![0.0, 2.5]], vec![]).unwrap();
        assert_eq!(single.evaluate(&[1]).unwrap(), ExtReal::finite(2.5));

        let k2 = DecisionNetwork::new(2, vec![vec![0.0, 1.0]; 2], vec![(0, 1, mwis_table())]).unwrap();
        assert!(k2.evaluate(&[1, 1]).unwrap().is_neg_inf());

        assert_eq!(path3().evaluate(&[1, 0, 1]).unwrap(), ExtReal::finite(2.0));
    }

    #[test]
    fn evaluate_rejects_bad_assignments() {
        let net = path3();
        assert!(matches!(net.evaluate(&[1, 0]), Err(Error::InvalidAssignment(_))));
        assert!(matches!(net.evaluate(&[0, 2, 0]), Err(Error::InvalidAssignment(_))));
    }

    #[test]
    fn reversed_edges_are_transposed() {
        let rows = vec![
            vec![ExtReal::finite(1.0), ExtReal::finite(2.0)],
            vec![ExtReal::finite(3.0), ExtReal::finite(4.0)],
        ];
        let net = DecisionNetwork::new(2, vec![vec![0.0, 0.0]; 2], vec![(1, 0, rows)]).unwrap();
        // Φ_{1,0}(x1=0, x0=1) = 2 means Φ_{0,1}(1, 0) = 2
        assert_eq!(net.edges()[0].value(2, 1, 0), ExtReal::finite(2.0));
        assert_eq!(net.oriented(0, 1).get(0, 1), ExtReal::finite(2.0));
        assert_eq!(net.oriented(0, 0).get(1, 0), ExtReal::finite(2.0));
    }

    #[test]
    fn constructor_rejects_invalid_graphs() {
        let t = mwis_table;
        assert!(DecisionNetwork::new(2, vec![vec![0.0, 0.0]; 2], vec![(0, 0, t())]).is_err());
        assert!(DecisionNetwork::new(2, vec![vec![0.0, 0.0]; 2], vec![(0, 1, t()), (1, 0, t())]).is_err());
        assert!(DecisionNetwork::new(2, vec![vec![0.0, 0.0]; 2], vec![(0, 2, t())]).is_err());
        assert!(DecisionNetwork::new(2, vec![vec![0.0, f64::NEG_INFINITY]], vec![]).is_err());
        assert!(DecisionNetwork::new(1, vec![vec![0.0]], vec![]).is_err());
    }

    #[test]
    fn load_minimal() {
        let net = load_instance(br#"{"num_actions":2,"nodes":[{"id":0,"potential":[0,1]}],"edges":[]}"#).unwrap();
        assert_eq!(net.num_nodes(), 1);
        assert_eq!(net.potential(0), &[0.0, 1.0]);
    }

    #[test]
    fn load_neg_inf_entry() {
        let text = br#"{"num_actions":2,"nodes":[{"id":1,"potential":[0,1]},{"id":0,"potential":[0,2]}],
            "edges":[{"u":0,"v":1,"table":[[0,0],[0,"-inf"]]}]}"#;
        let net = load_instance(text).unwrap();
        assert!(net.edges()[0].value(2, 1, 1).is_neg_inf());
        assert_eq!(net.potential(0), &[0.0, 2.0]);
    }

    fn parse_location(text: &str) -> String {
        match load_instance(text.as_bytes()) {
            Err(Error::Parse { location, .. }) => location,
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn load_errors_carry_locations() {
        let node = |id: i32| format!(r#"{{"id":{id},"potential":[0,1]}}"#);
        let two = format!("{},{}", node(0), node(1));
        let edge = r#"{"u":0,"v":1,"table":[[0,0],[0,0]]}"#;
        assert_eq!(
            parse_location(&format!(r#"{{"num_actions":2,"nodes":[{two}],"edges":[{edge},{edge}]}}"#)),
            "edges[1]"
        );
        assert_eq!(
            parse_location(&format!(r#"{{"num_actions":2,"nodes":[{},{}],"edges":[]}}"#, node(0), node(5))),
            "nodes[1].id"
        );
        assert_eq!(
            parse_location(r#"{"num_actions":2,"nodes":[{"id":0,"potential":[0,"-inf"]}],"edges":[]}"#),
            "nodes[0].potential"
        );
        assert_eq!(
            parse_location(&format!(r#"{{"num_actions":2,"nodes":[{two}],"edges":[{{"u":1,"v":0,"table":[[0,0],[0,0]]}}]}}"#)),
            "edges[0]"
        );
        assert!(parse_location("{\"num_actions\":2,\n\"nodes\":[").starts_with("line 2"));
    }

    #[test]
    fn save_load_round_trip() {
        let net = path3();
        let bytes = save_instance(&net);
        let back = load_instance(&bytes).unwrap();
        assert_eq!(back, net);
        assert_eq!(save_instance(&back), bytes);
    }
}
