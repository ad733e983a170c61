//! Partial cavity functions, modified networks and the cavity expansion.
//!
//! Two evaluators share the recursion. [`ce`] follows the scalar definition
//! literally, one call per `(subnetwork, node, action)`, and reports call
//! counts. The vector evaluator behind [`ce_vector`], [`ce_full`] and
//! [`ce_decide_all`] computes all actions of a node at once and reuses the
//! subnetworks that do not depend on the action.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::network::{DecisionNetwork, EdgeTable};
use crate::rng;
use crate::view::SubnetworkView;

/// B(x) for every action, with B(0) = 0.
pub type CavityVector = Vec<ExtReal>;

/// Default cap on recursive calls.
pub const CALL_LIMIT: u64 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryCondition {
    Zero,
    PotentialGap,
    /// `c` at every nonzero action.
    Constant { c: f64 },
    /// Uniform on `[lo, hi)` at every nonzero action, keyed by
    /// `(seed, node, action)`.
    SeededUniform { lo: f64, hi: f64, seed: u64 },
}

impl BoundaryCondition {
    /// Depth-zero value at `(v, x)` under the view's effective potentials.
    pub fn value(&self, view: &SubnetworkView<'_>, v: usize, x: usize) -> Result<ExtReal> {
        if x == 0 {
            return Ok(ExtReal::ZERO);
        }
        Ok(match *self {
            BoundaryCondition::Zero => ExtReal::ZERO,
            BoundaryCondition::PotentialGap => potential_gap(view, v, x)?,
            BoundaryCondition::Constant { c } => ExtReal::finite(c),
            BoundaryCondition::SeededUniform { lo, hi, seed } => {
                let u = rng::unit(seed, &[rng::tag::BOUNDARY, v as u64, x as u64]);
                ExtReal::finite(lo + (hi - lo) * u)
            }
        })
    }

    /// Depth-zero values for every action, up to an additive constant.
    fn relative(&self, view: &SubnetworkView<'_>, v: usize) -> Result<Vec<ExtReal>> {
        match self {
            BoundaryCondition::PotentialGap => Ok(view.potential_vector(v)),
            _ => (0..view.num_actions()).map(|x| self.value(view, v, x)).collect(),
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryCondition::Zero => f.write_str("zero"),
            BoundaryCondition::PotentialGap => f.write_str("gap"),
            BoundaryCondition::Constant { c } => write!(f, "const:{c}"),
            BoundaryCondition::SeededUniform { lo, hi, seed } => write!(f, "uniform:{lo}:{hi}:{seed}"),
        }
    }
}

/// Parses `zero`, `gap`, `const:C` or `uniform:LO:HI:SEED`.
impl FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid_params("bc", format!("cannot parse boundary condition {s:?}"));
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| p.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad);
        match parts.as_slice() {
            ["zero"] => Ok(BoundaryCondition::Zero),
            ["gap"] => Ok(BoundaryCondition::PotentialGap),
            ["const", c] => Ok(BoundaryCondition::Constant { c: num(c)? }),
            ["uniform", lo, hi, seed] => Ok(BoundaryCondition::SeededUniform {
                lo: num(lo)?,
                hi: num(hi)?,
                seed: seed.parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}

fn potential_gap(view: &SubnetworkView<'_>, v: usize, x: usize) -> Result<ExtReal> {
    view.effective_potential(v, x)
        .checked_sub(view.effective_potential(v, 0))
        .map_err(|_| Error::InfeasibleReference)
}

fn row_max(edge: EdgeTable<'_>, x: usize, b: &[ExtReal]) -> ExtReal {
    b.iter()
        .enumerate()
        .fold(ExtReal::NEG_INF, |m, (y, &by)| m.max(edge.get(x, y) + by))
}

/// μ(x, B) = max_y(Φ(x,y) + B(y)) − max_y(Φ(0,y) + B(y)), with `edge` read
/// from the node whose cavity is being formed.
pub fn mu(edge: EdgeTable<'_>, x: usize, b: &[ExtReal]) -> Result<ExtReal> {
    mu_from(edge, x, b, 0)
}

/// μ with action `x0` in place of 0 as the reference row.
fn mu_from(edge: EdgeTable<'_>, x: usize, b: &[ExtReal], x0: usize) -> Result<ExtReal> {
    let reference = row_max(edge, x0, b);
    if reference.is_neg_inf() {
        return Err(Error::InfeasibleReference);
    }
    Ok(ExtReal::new(row_max(edge, x, b).value() - reference.value()).expect("finite reference"))
}

/// Φ¹ = Φ(1,0) − Φ(1,1).
pub fn phi1(edge: EdgeTable<'_>) -> f64 {
    edge.raw(1, 0) - edge.raw(1, 1)
}

/// Φ² = Φ(0,0) − Φ(0,1).
pub fn phi2(edge: EdgeTable<'_>) -> f64 {
    edge.raw(0, 0) - edge.raw(0, 1)
}

/// Φ³ = Φ(1,1) − Φ(0,1).
pub fn phi3(edge: EdgeTable<'_>) -> f64 {
    edge.raw(1, 1) - edge.raw(0, 1)
}

/// X = Φ¹ + Φ².
pub fn x_coupling(edge: EdgeTable<'_>) -> f64 {
    phi1(edge) + phi2(edge)
}

/// Y = Φ(1,1) − Φ(1,0) − Φ(0,1) + Φ(0,0) = Φ² − Φ¹.
pub fn y_coupling(edge: EdgeTable<'_>) -> f64 {
    edge.raw(1, 1) - edge.raw(1, 0) - edge.raw(0, 1) + edge.raw(0, 0)
}

/// Binary μ(1, ·) at B(1) = z: Φ³ + max(Φ¹, z) − max(Φ², z).
pub fn mu_binary(phi1: f64, phi2: f64, phi3: f64, z: f64) -> f64 {
    phi3 + phi1.max(z) - phi2.max(z)
}

fn build_modified<'a>(
    view: &SubnetworkView<'a>,
    u: usize,
    nbrs: &[(usize, EdgeTable<'a>)],
    j: usize,
    x: usize,
    reference: usize,
) -> SubnetworkView<'a> {
    let t = view.num_actions();
    let mut nodes = Vec::with_capacity(nbrs.len().saturating_sub(1));
    let mut deltas = Vec::with_capacity(nodes.capacity() * t);
    for (k, &(v, table)) in nbrs.iter().enumerate() {
        if k == j {
            continue;
        }
        let row = if k < j { x } else { reference };
        nodes.push(v);
        deltas.extend((0..t).map(|y| table.get(row, y)));
    }
    view.push_layer(Some(u), nodes, deltas)
}

/// 𝒢(u, j, x) for 1-based `j`: `u` removed, the neighbors before `v_j`
/// shifted by Φ_{u,v}(x, ·), the neighbors after it by Φ_{u,v}(0, ·).
pub fn modified_network<'a>(view: &SubnetworkView<'a>, u: usize, j: usize, x: usize) -> Result<SubnetworkView<'a>> {
    if !view.contains(u) {
        return Err(Error::InvalidView(format!("node {u} is not present in the view")));
    }
    let nbrs: Vec<_> = view.neighbors(u).collect();
    if j == 0 || j > nbrs.len() {
        return Err(Error::InvalidView(format!(
            "neighbor index {j} outside [1, {}] for node {u}",
            nbrs.len()
        )));
    }
    if x >= view.num_actions() {
        return Err(Error::InvalidView(format!("action {x} outside [0, {})", view.num_actions())));
    }
    Ok(build_modified(view, u, &nbrs, j - 1, x, 0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CeOptions {
    pub max_calls: u64,
}

impl Default for CeOptions {
    fn default() -> Self {
        CeOptions { max_calls: CALL_LIMIT }
    }
}

struct Ctx<'b> {
    bc: &'b BoundaryCondition,
    calls: u64,
    max_calls: u64,
}

impl Ctx<'_> {
    #[inline]
    fn tick(&mut self) -> Result<()> {
        self.calls += 1;
        if self.calls > self.max_calls {
            return Err(Error::RefusedTooLarge {
                what: "cavity expansion recursive calls".into(),
                limit: self.max_calls,
            });
        }
        Ok(())
    }
}

fn require_node(view: &SubnetworkView<'_>, u: usize) -> Result<()> {
    if view.contains(u) {
        Ok(())
    } else {
        Err(Error::InvalidView(format!("node {u} is not present in the view")))
    }
}

/// CE[𝒢, u, r, x]: the cavity recursion truncated at depth `r`.
pub fn ce(view: &SubnetworkView<'_>, u: usize, r: usize, x: usize, bc: &BoundaryCondition) -> Result<ExtReal> {
    ce_counted(view, u, r, x, bc, &CeOptions::default()).map(|(v, _)| v)
}

/// As [`ce`], also returning the number of recursive calls made.
pub fn ce_counted(
    view: &SubnetworkView<'_>,
    u: usize,
    r: usize,
    x: usize,
    bc: &BoundaryCondition,
    opts: &CeOptions,
) -> Result<(ExtReal, u64)> {
    require_node(view, u)?;
    if x >= view.num_actions() {
        return Err(Error::invalid_params("x", format!("action {x} outside [0, {})", view.num_actions())));
    }
    let mut ctx = Ctx {
        bc,
        calls: 0,
        max_calls: opts.max_calls,
    };
    let value = scalar(&mut ctx, view, u, r, x)?;
    Ok((value, ctx.calls))
}

fn scalar(ctx: &mut Ctx<'_>, view: &SubnetworkView<'_>, u: usize, r: usize, x: usize) -> Result<ExtReal> {
    ctx.tick()?;
    if r == 0 {
        return ctx.bc.value(view, u, x);
    }
    let mut total = potential_gap(view, u, x)?;
    let nbrs: Vec<_> = view.neighbors(u).collect();
    let t = view.num_actions();
    let mut b = vec![ExtReal::ZERO; t];
    for (j, &(v, table)) in nbrs.iter().enumerate() {
        if r == 1 {
            // v's own potential is the same in 𝒢(u,j,x) as here
            for (y, by) in b.iter_mut().enumerate() {
                ctx.tick()?;
                *by = ctx.bc.value(view, v, y)?;
            }
        } else {
            let child = build_modified(view, u, &nbrs, j, x, 0);
            for (y, by) in b.iter_mut().enumerate() {
                *by = scalar(ctx, &child, v, r - 1, y)?;
            }
        }
        total = total + mu(table, x, &b)?;
    }
    Ok(total)
}

/// Shifts a vector so that entry 0 is zero, or the maximum when entry 0
/// is `-inf`.
fn normalize(mut v: Vec<ExtReal>) -> Result<Vec<ExtReal>> {
    let shift = if v[0].is_finite() {
        v[0].value()
    } else {
        let m = v.iter().fold(ExtReal::NEG_INF, |m, &x| m.max(x));
        if m.is_neg_inf() {
            return Err(Error::InfeasibleReference);
        }
        m.value()
    };
    for e in &mut v {
        *e = ExtReal::new(e.value() - shift).expect("finite shift");
    }
    Ok(v)
}

/// All actions of `u` at once. Returns J(·) up to an additive constant,
/// which is all μ needs, so subnetworks whose reference action is
/// infeasible are still handled. The untruncated expansion does not depend
/// on which action telescopes as the reference, so when action 0 leaves a
/// μ undefined it is retried with the next action.
fn vector(ctx: &mut Ctx<'_>, view: &SubnetworkView<'_>, u: usize, depth: Option<usize>) -> Result<Vec<ExtReal>> {
    let first = vector_from(ctx, view, u, depth, 0);
    if depth.is_some() || !matches!(first, Err(Error::InfeasibleReference)) {
        return first;
    }
    for x0 in 1..view.num_actions() {
        match vector_from(ctx, view, u, depth, x0) {
            Err(Error::InfeasibleReference) => continue,
            other => return other,
        }
    }
    first
}

fn vector_from(
    ctx: &mut Ctx<'_>,
    view: &SubnetworkView<'_>,
    u: usize,
    depth: Option<usize>,
    x0: usize,
) -> Result<Vec<ExtReal>> {
    ctx.tick()?;
    if depth == Some(0) {
        return ctx.bc.relative(view, u);
    }
    let mut out = view.potential_vector(u);
    let nbrs: Vec<_> = view.neighbors(u).collect();
    if nbrs.is_empty() {
        return Ok(out);
    }
    let next = depth.map(|d| d - 1);
    let t = view.num_actions();
    let mut first = None;
    for x in (0..t).filter(|&x| x != x0) {
        if out[x].is_neg_inf() {
            continue;
        }
        let mut acc = out[x];
        for (j, &(v, table)) in nbrs.iter().enumerate() {
            let b = if j == 0 {
                if first.is_none() {
                    let child = build_modified(view, u, &nbrs, 0, x, x0);
                    first = Some(normalize(vector(ctx, &child, v, next)?)?);
                }
                first.clone().expect("computed above")
            } else {
                let child = build_modified(view, u, &nbrs, j, x, x0);
                normalize(vector(ctx, &child, v, next)?)?
            };
            acc = acc + mu_from(table, x, &b, x0)?;
        }
        out[x] = acc;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Depth {
    Bounded(usize),
    /// Recurse until subnetworks have no neighbors.
    Full,
}

impl Depth {
    fn as_option(self) -> Option<usize> {
        match self {
            Depth::Bounded(r) => Some(r),
            Depth::Full => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CeResult {
    pub node: usize,
    pub estimates: CavityVector,
    /// `None` for the full expansion.
    pub depth: Option<usize>,
    pub decision: usize,
}

/// Smallest action attaining the maximum.
pub fn argmax(values: &[ExtReal]) -> usize {
    let mut best = 0;
    for (x, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = x;
        }
    }
    best
}

pub fn ce_vector(view: &SubnetworkView<'_>, u: usize, depth: Depth, bc: &BoundaryCondition) -> Result<CeResult> {
    ce_vector_with(view, u, depth, bc, &CeOptions::default()).map(|(r, _)| r)
}

/// CE[𝒢, u, r, ·] for every action, with the number of vector calls.
pub fn ce_vector_with(
    view: &SubnetworkView<'_>,
    u: usize,
    depth: Depth,
    bc: &BoundaryCondition,
    opts: &CeOptions,
) -> Result<(CeResult, u64)> {
    require_node(view, u)?;
    let mut ctx = Ctx {
        bc,
        calls: 0,
        max_calls: opts.max_calls,
    };
    let raw = vector(&mut ctx, view, u, depth.as_option())?;
    if raw.iter().all(|v| v.is_neg_inf()) {
        return Err(Error::Infeasible);
    }
    if raw[0].is_neg_inf() {
        return Err(Error::InfeasibleReference);
    }
    let estimates = normalize(raw)?;
    let decision = argmax(&estimates);
    Ok((
        CeResult {
            node: u,
            estimates,
            depth: depth.as_option(),
            decision,
        },
        ctx.calls,
    ))
}

/// The untruncated expansion. Boundary values are never reached.
pub fn ce_full(view: &SubnetworkView<'_>, u: usize) -> Result<CavityVector> {
    ce_vector(view, u, Depth::Full, &BoundaryCondition::Zero).map(|r| r.estimates)
}

#[derive(Clone, Debug)]
pub struct Decisions {
    pub results: Vec<std::result::Result<CeResult, Error>>,
    /// Failed nodes default to action 0.
    pub decisions: Vec<usize>,
    /// F(decisions), present when every node succeeded.
    pub total: Option<ExtReal>,
}

impl Decisions {
    pub fn failures(&self) -> usize {
        self.results.iter().filter(|r| r.is_err()).count()
    }
}

/// Independent root computations for every node, in parallel.
pub fn ce_decide_all(net: &DecisionNetwork, depth: Depth, bc: &BoundaryCondition) -> Decisions {
    ce_decide_all_with(net, depth, bc, &CeOptions::default())
}

pub fn ce_decide_all_with(net: &DecisionNetwork, depth: Depth, bc: &BoundaryCondition, opts: &CeOptions) -> Decisions {
    let results: Vec<_> = (0..net.num_nodes())
        .into_par_iter()
        .map(|u| ce_vector_with(&SubnetworkView::new(net), u, depth, bc, opts).map(|(r, _)| r))
        .collect();
    let decisions: Vec<usize> = results.iter().map(|r| r.as_ref().map_or(0, |c| c.decision)).collect();
    let total = results
        .iter()
        .all(Result::is_ok)
        .then(|| net.evaluate(&decisions).expect("decisions are in range"));
    Decisions {
        results,
        decisions,
        total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::cavity_exact;
    use crate::graph::WeightedGraph;
    use crate::models::encode_mwis;

    fn table(rows: [[f64; 2]; 2]) -> Vec<ExtReal> {
        rows.iter().flatten().map(|&v| ExtReal::new(v).unwrap()).collect()
    }

    fn k2(w0: f64, w1: f64) -> DecisionNetwork {
        encode_mwis(&WeightedGraph::from_edges(vec![w0, w1], &[(0, 1)]).unwrap())
    }

    #[test]
    fn mu_examples() {
        let zero = table([[0.0, 0.0], [0.0, 0.0]]);
        let b = [ExtReal::ZERO, ExtReal::finite(3.7)];
        assert_eq!(mu(EdgeTable::new(&zero, 2, false), 1, &b).unwrap(), ExtReal::ZERO);

        let mwis = table([[0.0, 0.0], [0.0, f64::NEG_INFINITY]]);
        let b = [ExtReal::ZERO, ExtReal::finite(0.7)];
        assert_eq!(mu(EdgeTable::new(&mwis, 2, false), 1, &b).unwrap(), ExtReal::finite(-0.7));

        let t = table([[0.0, 1.0], [2.0, -3.0]]);
        let b = [ExtReal::ZERO, ExtReal::finite(0.5)];
        assert_eq!(mu(EdgeTable::new(&t, 2, false), 1, &b).unwrap(), ExtReal::finite(0.5));
    }

    #[test]
    fn mu_reference_must_be_feasible() {
        let t = table([[f64::NEG_INFINITY, 0.0], [0.0, 0.0]]);
        let b = [ExtReal::ZERO, ExtReal::NEG_INF];
        assert_eq!(mu(EdgeTable::new(&t, 2, false), 1, &b), Err(Error::InfeasibleReference));
        let t = table([[0.0, 0.0], [f64::NEG_INFINITY, f64::NEG_INFINITY]]);
        let b = [ExtReal::ZERO, ExtReal::ZERO];
        assert!(mu(EdgeTable::new(&t, 2, false), 1, &b).unwrap().is_neg_inf());
    }

    #[test]
    fn nicer_form_matches_mu() {
        let t = table([[0.3, -1.1], [0.9, 0.25]]);
        let e = EdgeTable::new(&t, 2, false);
        for z in [-3.0, -0.4, 0.0, 0.8, 2.5] {
            let direct = mu(e, 1, &[ExtReal::ZERO, ExtReal::finite(z)]).unwrap().value();
            assert!((direct - mu_binary(phi1(e), phi2(e), phi3(e), z)).abs() < 1e-12);
        }
        assert!((y_coupling(e) - (phi2(e) - phi1(e))).abs() < 1e-12);
    }

    #[test]
    fn modified_network_examples() {
        let rows = |a: f64, b: f64, c: f64, d: f64| {
            vec![vec![ExtReal::finite(a), ExtReal::finite(b)], vec![ExtReal::finite(c), ExtReal::finite(d)]]
        };
        let net = DecisionNetwork::new(
            2,
            vec![vec![0.0, 1.0]; 4],
            vec![(0, 1, rows(1.0, 2.0, 3.0, 4.0)), (0, 2, rows(5.0, 6.0, 7.0, 8.0)), (0, 3, rows(9.0, 10.0, 11.0, 12.0))],
        )
        .unwrap();
        let view = SubnetworkView::new(&net);
        let m = modified_network(&view, 0, 2, 1).unwrap();
        assert!(!m.contains(0));
        assert_eq!(m.potential_vector(1), vec![ExtReal::finite(3.0), ExtReal::finite(5.0)]);
        assert_eq!(m.potential_vector(2), vec![ExtReal::finite(0.0), ExtReal::finite(1.0)]);
        assert_eq!(m.potential_vector(3), vec![ExtReal::finite(9.0), ExtReal::finite(11.0)]);

        let leaf = DecisionNetwork::new(2, vec![vec![0.0, 1.0]; 2], vec![(0, 1, rows(1.0, 2.0, 3.0, 4.0))]).unwrap();
        let m = modified_network(&SubnetworkView::new(&leaf), 0, 1, 1).unwrap();
        assert_eq!(m.potential_vector(1), vec![ExtReal::finite(0.0), ExtReal::finite(1.0)]);
        assert!(modified_network(&SubnetworkView::new(&leaf), 0, 2, 1).is_err());
        assert!(modified_network(&m, 0, 1, 1).is_err());
    }

    #[test]
    fn ce_examples() {
        let net = k2(2.0, 3.0);
        let view = SubnetworkView::new(&net);
        assert_eq!(ce(&view, 0, 0, 1, &BoundaryCondition::Zero).unwrap(), ExtReal::ZERO);
        assert_eq!(ce(&view, 0, 2, 1, &BoundaryCondition::Zero).unwrap(), ExtReal::finite(-1.0));

        let iso = DecisionNetwork::new(2, vec![vec![0.0, 1.25]], vec![]).unwrap();
        assert_eq!(ce(&SubnetworkView::new(&iso), 0, 1, 1, &BoundaryCondition::Zero).unwrap(), ExtReal::finite(1.25));
    }

    #[test]
    fn vector_and_scalar_agree_on_k2() {
        let net = k2(2.0, 3.0);
        let view = SubnetworkView::new(&net);
        for r in 0..4 {
            for bc in [BoundaryCondition::Zero, BoundaryCondition::PotentialGap, BoundaryCondition::Constant { c: 0.4 }] {
                let v = ce_vector(&view, 0, Depth::Bounded(r), &bc).unwrap();
                assert_eq!(v.estimates[1], ce(&view, 0, r, 1, &bc).unwrap());
            }
        }
    }

    #[test]
    fn ce_full_on_c4() {
        let c4 = encode_mwis(&WeightedGraph::from_edges(vec![1.0; 4], &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap());
        let view = SubnetworkView::new(&c4);
        for u in 0..4 {
            assert_eq!(ce_full(&view, u).unwrap(), vec![ExtReal::ZERO, ExtReal::ZERO]);
            assert_eq!(cavity_exact(&c4, u).unwrap(), vec![ExtReal::ZERO, ExtReal::ZERO]);
        }
    }

    #[test]
    fn decide_all_examples() {
        let d = ce_decide_all(&k2(2.0, 3.0), Depth::Bounded(2), &BoundaryCondition::Zero);
        assert_eq!(d.decisions, vec![0, 1]);
        assert_eq!(d.total, Some(ExtReal::finite(3.0)));

        let sep = DecisionNetwork::new(3, vec![vec![0.0, 2.0, 1.0], vec![0.0, -1.0, -2.0]], vec![]).unwrap();
        let d = ce_decide_all(&sep, Depth::Bounded(1), &BoundaryCondition::Zero);
        assert_eq!(d.decisions, vec![1, 0]);
        assert_eq!(d.total, Some(ExtReal::finite(2.0)));
    }

    #[test]
    fn budget_is_enforced() {
        let net = k2(2.0, 3.0);
        let view = SubnetworkView::new(&net);
        let opts = CeOptions { max_calls: 2 };
        assert!(matches!(
            ce_counted(&view, 0, 3, 1, &BoundaryCondition::Zero, &opts),
            Err(Error::RefusedTooLarge { .. })
        ));
    }

    #[test]
    fn call_counts_follow_the_recursion() {
        // K2 at r=1: root call plus T leaf calls for the single neighbor
        let net = k2(2.0, 3.0);
        let view = SubnetworkView::new(&net);
        let (_, calls) = ce_counted(&view, 0, 1, 1, &BoundaryCondition::Zero, &CeOptions::default()).unwrap();
        assert_eq!(calls, 3);
    }

    #[test]
    fn boundary_condition_parsing() {
        for s in ["zero", "gap", "const:0.5", "uniform:-1:1:7"] {
            let bc: BoundaryCondition = s.parse().unwrap();
            assert_eq!(bc.to_string(), s);
        }
        assert!("const:x".parse::<BoundaryCondition>().is_err());
        assert!("nope".parse::<BoundaryCondition>().is_err());
    }

    #[test]
    fn seeded_boundary_is_keyed() {
        let net = k2(1.0, 1.0);
        let view = SubnetworkView::new(&net);
        let bc = BoundaryCondition::SeededUniform { lo: -1.0, hi: 1.0, seed: 4 };
        let a = bc.value(&view, 1, 1).unwrap();
        let b = bc.value(&view.view_remove(0).unwrap(), 1, 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(bc.value(&view, 1, 0).unwrap(), ExtReal::ZERO);
        assert!((-1.0..1.0).contains(&a.value()));
    }
}
