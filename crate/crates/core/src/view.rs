//! Persistent subnetwork views: a base network plus removed nodes and
//! additive potential corrections, stored as a shared chain of layers.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::network::{DecisionNetwork, EdgeTable};

struct Layer {
    parent: Option<Arc<Layer>>,
    removed: Option<usize>,
    delta_nodes: Vec<usize>,
    /// `num_actions` entries per node in `delta_nodes`.
    deltas: Vec<ExtReal>,
}

#[derive(Clone)]
pub struct SubnetworkView<'a> {
    base: &'a DecisionNetwork,
    top: Option<Arc<Layer>>,
    live: usize,
}

impl<'a> From<&'a DecisionNetwork> for SubnetworkView<'a> {
    fn from(base: &'a DecisionNetwork) -> Self {
        SubnetworkView::new(base)
    }
}

impl<'a> SubnetworkView<'a> {
    pub fn new(base: &'a DecisionNetwork) -> Self {
        SubnetworkView {
            base,
            top: None,
            live: base.num_nodes(),
        }
    }

    pub fn base(&self) -> &'a DecisionNetwork {
        self.base
    }

    pub fn num_actions(&self) -> usize {
        self.base.num_actions()
    }

    /// Number of nodes still present.
    pub fn num_live(&self) -> usize {
        self.live
    }

    fn layers(&self) -> impl Iterator<Item = &Layer> {
        std::iter::successors(self.top.as_deref(), |l| l.parent.as_deref())
    }

    pub fn is_removed(&self, v: usize) -> bool {
        self.layers().any(|l| l.removed == Some(v))
    }

    pub fn contains(&self, v: usize) -> bool {
        v < self.base.num_nodes() && !self.is_removed(v)
    }

    fn require(&self, v: usize) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::InvalidView(format!("node {v} is not present in the view")))
        }
    }

    pub(crate) fn push_layer(
        &self,
        removed: Option<usize>,
        delta_nodes: Vec<usize>,
        deltas: Vec<ExtReal>,
    ) -> SubnetworkView<'a> {
        debug_assert_eq!(deltas.len(), delta_nodes.len() * self.num_actions());
        SubnetworkView {
            base: self.base,
            top: Some(Arc::new(Layer {
                parent: self.top.clone(),
                removed,
                delta_nodes,
                deltas,
            })),
            live: self.live - usize::from(removed.is_some()),
        }
    }

    pub fn view_remove(&self, v: usize) -> Result<SubnetworkView<'a>> {
        self.require(v)?;
        Ok(self.push_layer(Some(v), Vec::new(), Vec::new()))
    }

    pub fn view_add_delta(&self, v: usize, delta: &[ExtReal]) -> Result<SubnetworkView<'a>> {
        self.require(v)?;
        if delta.len() != self.num_actions() {
            return Err(Error::InvalidView(format!(
                "delta for node {v} has {} entries, expected {}",
                delta.len(),
                self.num_actions()
            )));
        }
        Ok(self.push_layer(None, vec![v], delta.to_vec()))
    }

    pub fn effective_potential(&self, v: usize, x: usize) -> ExtReal {
        let t = self.num_actions();
        let mut value = ExtReal::finite(self.base.potential(v)[x]);
        for layer in self.layers() {
            for (k, &node) in layer.delta_nodes.iter().enumerate() {
                if node == v {
                    value = value + layer.deltas[k * t + x];
                }
            }
        }
        value
    }

    /// Writes the effective potential of `v` into `out`.
    pub fn fill_potential(&self, v: usize, out: &mut [ExtReal]) {
        let t = self.num_actions();
        for (o, &p) in out.iter_mut().zip(self.base.potential(v)) {
            *o = ExtReal::finite(p);
        }
        for layer in self.layers() {
            for (k, &node) in layer.delta_nodes.iter().enumerate() {
                if node == v {
                    for (o, &d) in out.iter_mut().zip(&layer.deltas[k * t..(k + 1) * t]) {
                        *o = *o + d;
                    }
                }
            }
        }
    }

    pub fn potential_vector(&self, v: usize) -> Vec<ExtReal> {
        let mut out = vec![ExtReal::ZERO; self.num_actions()];
        self.fill_potential(v, &mut out);
        out
    }

    /// Present neighbors of `v` in ascending id order, each with the edge
    /// table read from `v`.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, EdgeTable<'a>)> + '_ {
        let base = self.base;
        base.neighbors(v)
            .iter()
            .filter(move |inc| !self.is_removed(inc.neighbor))
            .map(move |inc| (inc.neighbor, base.oriented(inc.edge, v)))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors(v).count()
    }

    pub fn live_nodes(&self) -> Vec<usize> {
        let mut removed = vec![false; self.base.num_nodes()];
        for layer in self.layers() {
            if let Some(r) = layer.removed {
                removed[r] = true;
            }
        }
        (0..removed.len()).filter(|&v| !removed[v]).collect()
    }

    /// Indices of base edges whose endpoints are both present.
    pub fn live_edges(&self) -> Vec<usize> {
        let live = self.live_mask();
        self.base
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, e)| live[e.u] && live[e.v])
            .map(|(k, _)| k)
            .collect()
    }

    fn live_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.base.num_nodes()];
        for v in self.live_nodes() {
            mask[v] = true;
        }
        mask
    }

    /// F over present nodes and edges. The assignment is indexed by base
    /// node id; entries of removed nodes are ignored.
    pub fn evaluate(&self, a: &[usize]) -> Result<ExtReal> {
        self.base.check_assignment(a)?;
        let t = self.num_actions();
        let mut total = ExtReal::ZERO;
        for v in self.live_nodes() {
            total = total + self.effective_potential(v, a[v]);
        }
        for k in self.live_edges() {
            let e = &self.base.edges()[k];
            total = total + e.value(t, a[e.u], a[e.v]);
        }
        Ok(total)
    }

    /// Copies the view into a standalone network. Present nodes are
    /// relabeled in ascending order; the returned vector maps new ids to
    /// base ids. Fails when an effective potential is `-inf`.
    pub fn materialize(&self) -> Result<(DecisionNetwork, Vec<usize>)> {
        let t = self.num_actions();
        let nodes = self.live_nodes();
        let mut index = vec![usize::MAX; self.base.num_nodes()];
        for (k, &v) in nodes.iter().enumerate() {
            index[v] = k;
        }
        let mut potentials = Vec::with_capacity(nodes.len());
        for &v in &nodes {
            let p = self.potential_vector(v);
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidView(format!(
                    "node {v} has a -inf effective potential"
                )));
            }
            potentials.push(p.into_iter().map(ExtReal::value).collect());
        }
        let edges = self
            .live_edges()
            .into_iter()
            .map(|k| {
                let e = &self.base.edges()[k];
                let rows = e.table().chunks(t).map(<[ExtReal]>::to_vec).collect();
                (index[e.u], index[e.v], rows)
            })
            .collect();
        Ok((DecisionNetwork::new(t, potentials, edges)?, nodes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star() -> DecisionNetwork {
        let table = vec![vec![ExtReal::ZERO; 2]; 2];
        DecisionNetwork::new(
            2,
            vec![vec![0.0, 1.0]; 4],
            (1..4).map(|l| (0, l, table.clone())).collect(),
        )
        .unwrap()
    }

    #[test]
    fn removing_star_center_isolates_leaves() {
        let net = star();
        let view = SubnetworkView::new(&net).view_remove(0).unwrap();
        assert_eq!(view.num_live(), 3);
        for leaf in 1..4 {
            assert_eq!(view.degree(leaf), 0);
            assert!(view.neighbors(leaf).all(|(w, _)| w != 0));
        }
        assert!(view.live_edges().is_empty());
    }

    #[test]
    fn stacked_deltas_add() {
        let net = star();
        let view = SubnetworkView::new(&net)
            .view_add_delta(2, &[1.0.into(), 0.0.into()])
            .unwrap()
            .view_add_delta(2, &[2.0.into(), 0.0.into()])
            .unwrap();
        assert_eq!(view.effective_potential(2, 0), ExtReal::finite(3.0));
        assert_eq!(view.effective_potential(2, 1), ExtReal::finite(1.0));
    }

    #[test]
    fn views_are_persistent() {
        let net = star();
        let root = SubnetworkView::new(&net);
        let a = root.view_remove(1).unwrap();
        let b = a.view_add_delta(2, &[5.0.into(), 0.0.into()]).unwrap();
        let _c = a.view_remove(3).unwrap();
        assert!(root.contains(1));
        assert_eq!(a.effective_potential(2, 0), ExtReal::ZERO);
        assert_eq!(b.effective_potential(2, 0), ExtReal::finite(5.0));
        assert!(a.contains(3));
        assert_eq!(a.degree(0), 2);
    }

    #[test]
    fn invalid_operations() {
        let net = star();
        let view = SubnetworkView::new(&net).view_remove(1).unwrap();
        assert!(matches!(view.view_remove(1), Err(Error::InvalidView(_))));
        assert!(matches!(view.view_remove(9), Err(Error::InvalidView(_))));
        assert!(matches!(
            view.view_add_delta(1, &[ExtReal::ZERO; 2]),
            Err(Error::InvalidView(_))
        ));
        assert!(view.view_add_delta(2, &[ExtReal::ZERO; 3]).is_err());
    }

    #[test]
    fn materialize_relabels() {
        let net = star();
        let view = SubnetworkView::new(&net).view_remove(2).unwrap();
        let (copy, map) = view.materialize().unwrap();
        assert_eq!(map, vec![0, 1, 3]);
        assert_eq!(copy.num_nodes(), 3);
        assert_eq!(copy.edges().len(), 2);
        assert_eq!(copy.degree(0), 2);
    }
}
