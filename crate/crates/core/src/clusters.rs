//! Nullifier algebra and cluster-graph compilation.
//!
//! A dual-frequency structured pump squeezes, for every comb index n with
//! both partners in range, the pair of combinations
//!
//! ```text
//!   X_h(n) = Q_h^n - [ a Q_h^{p1-n} + b Q_v^{p1-n} + c Q_h^{p2-n} + d Q_v^{p2-n} ]
//!   X_v(n) = Q_v^n - [ b Q_h^{p1-n} - a Q_v^{p1-n} + d Q_h^{p2-n} - c Q_v^{p2-n} ]
//! ```
//!
//! with coefficients read off `edge_weights`. These are approximate
//! nullifiers of a dual-rail quantum wire; compiling "anchor minus weighted
//! neighbors" forms into an undirected weighted graph, and measuring their
//! variances on the actual covariance, are the two consumers.
//!
//! Coefficients are plain floats built from closed forms only; terms that
//! come out exactly zero are never stored, so special pump angles yield
//! exactly the thinned graphs the captions describe.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DVector;
use thiserror::Error;

use crate::gaussian::CovarianceState;
use crate::hamiltonian::FreqWindow;
use crate::modes::{ModeId, PumpSpec};
use crate::trig::cos_sin_2theta;

/// Weights agreeing within this bound are treated as the same edge.
pub const RECIPROCITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum ClustersError {
    #[error("dual-rail nullifiers need exactly two pump components with distinct indices")]
    NotDualFrequency,
    #[error("nullifier has no unit-coefficient anchor")]
    MissingAnchor,
    #[error("nullifier has more than one unit-coefficient term")]
    AmbiguousAnchor,
    #[error("nullifier for anchor {0} appears twice")]
    DuplicateAnchor(ModeId),
    #[error("graph compilation takes Q-only forms, found a P component on {0}")]
    MomentumTerm(ModeId),
    #[error("edge ({u}, {v}) carries weights {w1} and {w2}, outside tolerance")]
    InconsistentGraph { u: ModeId, v: ModeId, w1: f64, w2: f64 },
    #[error("edge list mentions {0} which is not in the node list")]
    UnknownNode(ModeId),
    #[error("self-loop on {0}")]
    SelfLoop(ModeId),
    #[error("zero-weight edge ({u}, {v})")]
    ZeroWeight { u: ModeId, v: ModeId },
    #[error("duplicate edge ({u}, {v})")]
    DuplicateEdge { u: ModeId, v: ModeId },
    #[error("form references {0} which is outside the state's mode set")]
    ModeMismatch(ModeId),
    #[error("form has no terms")]
    EmptyForm,
}

/// Which quadrature of a mode a term multiplies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Component {
    Q,
    P,
}

/// Real linear combination of quadratures, keyed by (mode, Q|P).
///
/// Zero coefficients are never stored: adding a term that cancels an
/// existing one removes the entry, so term counts reflect the support.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QuadratureForm {
    terms: BTreeMap<(ModeId, Component), f64>,
}

impl QuadratureForm {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_term(&mut self, mode: ModeId, component: Component, coefficient: f64) {
        if coefficient == 0.0 {
            return;
        }
        let entry = self.terms.entry((mode, component)).or_insert(0.0);
        *entry += coefficient;
        if *entry == 0.0 {
            self.terms.remove(&(mode, component));
        }
    }

    pub fn add_q(&mut self, mode: ModeId, coefficient: f64) {
        self.add_term(mode, Component::Q, coefficient);
    }

    pub fn add_p(&mut self, mode: ModeId, coefficient: f64) {
        self.add_term(mode, Component::P, coefficient);
    }

    pub fn coefficient(&self, mode: ModeId, component: Component) -> f64 {
        self.terms.get(&(mode, component)).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (ModeId, Component, f64)> + '_ {
        self.terms.iter().map(|(&(m, c), &w)| (m, c, w))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_q_only(&self) -> bool {
        self.terms.keys().all(|&(_, c)| c == Component::Q)
    }

    pub fn scale(&mut self, factor: f64) {
        if factor == 0.0 {
            self.terms.clear();
            return;
        }
        for w in self.terms.values_mut() {
            *w *= factor;
        }
    }

    pub fn add_scaled(&mut self, other: &QuadratureForm, factor: f64) {
        for (m, c, w) in other.terms() {
            self.add_term(m, c, w * factor);
        }
    }

    pub fn norm(&self) -> f64 {
        self.terms.values().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &QuadratureForm) -> f64 {
        self.terms()
            .map(|(m, c, w)| w * other.coefficient(m, c))
            .sum()
    }

    /// Largest absolute coefficient difference against `other`, over the
    /// union of supports.
    pub fn max_coefficient_diff(&self, other: &QuadratureForm) -> f64 {
        let mut keys: BTreeSet<(ModeId, Component)> = self.terms.keys().copied().collect();
        keys.extend(other.terms.keys().copied());
        keys.into_iter()
            .map(|(m, c)| (self.coefficient(m, c) - other.coefficient(m, c)).abs())
            .fold(0.0, f64::max)
    }

    /// Coefficient vector over `basis` (Q block then P block).
    pub fn to_vector(
        &self,
        basis: &crate::gaussian::QuadratureBasis,
    ) -> Result<DVector<f64>, ClustersError> {
        let mut v = DVector::zeros(basis.dim());
        for (mode, component, w) in self.terms() {
            let index = match component {
                Component::Q => basis.q_index(mode),
                Component::P => basis.p_index(mode),
            }
            .ok_or(ClustersError::ModeMismatch(mode))?;
            v[index] = w;
        }
        Ok(v)
    }
}

/// The four coupling strengths of the dual-rail wire, plus the common
/// normalization r that makes (a, b, c, d) a unit vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeWeights {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub r: f64,
    pub theta1: f64,
    pub theta2: f64,
}

/// a = cos2t1/(2r), b = sin2t1/(sqrt2 r), c = cos2t2/(2r),
/// d = sin2t2/(sqrt2 r), with 4r^2 = 4 - cos^2(2t1) - cos^2(2t2).
///
/// r never vanishes (4r^2 >= 2), and multiples of pi/4 produce exact
/// zeros in a/b/c/d, so the special-angle graphs thin out exactly.
pub fn edge_weights(theta1: f64, theta2: f64) -> EdgeWeights {
    let (c1, s1) = cos_sin_2theta(theta1);
    let (c2, s2) = cos_sin_2theta(theta2);
    let r = (4.0 - c1 * c1 - c2 * c2).sqrt() / 2.0;
    EdgeWeights {
        a: c1 / (2.0 * r),
        b: s1 * std::f64::consts::FRAC_1_SQRT_2 / r,
        c: c2 / (2.0 * r),
        d: s2 * std::f64::consts::FRAC_1_SQRT_2 / r,
        r,
        theta1,
        theta2,
    }
}

/// Why a frequency emitted no nullifier pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkipReason {
    /// Some referenced partner index falls outside the window.
    PartnerOutsideWindow,
    /// The index pairs with itself (n = p/2).
    SelfPaired,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SkippedNullifier {
    pub freq: i32,
    pub reason: SkipReason,
}

/// Nullifier list plus the in-window frequencies that could not host one.
/// An empty `forms` with nonempty `skipped` is the "window too small"
/// warning shape.
#[derive(Clone, Debug, PartialEq)]
pub struct NullifierSet {
    pub forms: Vec<QuadratureForm>,
    pub skipped: Vec<SkippedNullifier>,
}

fn dual_components(pump: &PumpSpec) -> Result<(i32, f64, i32, f64), ClustersError> {
    match pump.pair() {
        Some((one, two)) if one.p != two.p => Ok((one.p, one.theta, two.p, two.theta)),
        _ => Err(ClustersError::NotDualFrequency),
    }
}

/// The squeezed combinations X_h(n), X_v(n) for every complete in-window n.
///
/// Anchors carry coefficient exactly +1; nullifiers whose partner indices
/// stick out of the window are dropped whole, never truncated.
pub fn dual_rail_nullifiers(
    pump: &PumpSpec,
    window: FreqWindow,
) -> Result<NullifierSet, ClustersError> {
    let (p1, theta1, p2, theta2) = dual_components(pump)?;
    let w = edge_weights(theta1, theta2);
    let mut forms = Vec::new();
    let mut skipped = Vec::new();
    for n in window.iter() {
        if p1 - n == n || p2 - n == n {
            skipped.push(SkippedNullifier { freq: n, reason: SkipReason::SelfPaired });
            continue;
        }
        if !window.contains(p1 - n) || !window.contains(p2 - n) {
            skipped.push(SkippedNullifier { freq: n, reason: SkipReason::PartnerOutsideWindow });
            continue;
        }
        forms.push(rail_nullifier(Rail::H, n, p1, p2, &w, 0));
        forms.push(rail_nullifier(Rail::V, n, p1, p2, &w, 0));
    }
    Ok(NullifierSet { forms, skipped })
}

/// Which of the two B3 lines to build.
#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Rail {
    H,
    V,
}

/// One B3 line at frequency n, all modes tagged with time bin `bin`.
pub(crate) fn rail_nullifier(
    rail: Rail,
    n: i32,
    p1: i32,
    p2: i32,
    w: &EdgeWeights,
    bin: i32,
) -> QuadratureForm {
    use crate::modes::Spatial::{H, V};
    let mut form = QuadratureForm::new();
    let at = |s, f| ModeId::at_bin(s, f, bin);
    match rail {
        Rail::H => {
            form.add_q(at(H, n), 1.0);
            form.add_q(at(H, p1 - n), -w.a);
            form.add_q(at(V, p1 - n), -w.b);
            form.add_q(at(H, p2 - n), -w.c);
            form.add_q(at(V, p2 - n), -w.d);
        }
        Rail::V => {
            form.add_q(at(V, n), 1.0);
            form.add_q(at(H, p1 - n), -w.b);
            form.add_q(at(V, p1 - n), w.a);
            form.add_q(at(H, p2 - n), -w.d);
            form.add_q(at(V, p2 - n), w.c);
        }
    }
    form
}

/// Undirected weighted graph with canonical (u < v) edges.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterGraph {
    nodes: Vec<ModeId>,
    edges: Vec<ClusterEdge>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClusterEdge {
    pub u: ModeId,
    pub v: ModeId,
    pub weight: f64,
}

impl ClusterGraph {
    pub fn new(
        mut nodes: Vec<ModeId>,
        edges: Vec<ClusterEdge>,
    ) -> Result<Self, ClustersError> {
        nodes.sort();
        nodes.dedup();
        let node_set: BTreeSet<ModeId> = nodes.iter().copied().collect();
        let mut canonical = Vec::with_capacity(edges.len());
        let mut seen = BTreeSet::new();
        for e in edges {
            if e.u == e.v {
                return Err(ClustersError::SelfLoop(e.u));
            }
            if e.weight == 0.0 {
                return Err(ClustersError::ZeroWeight { u: e.u, v: e.v });
            }
            for m in [e.u, e.v] {
                if !node_set.contains(&m) {
                    return Err(ClustersError::UnknownNode(m));
                }
            }
            let (u, v) = if e.u < e.v { (e.u, e.v) } else { (e.v, e.u) };
            if !seen.insert((u, v)) {
                return Err(ClustersError::DuplicateEdge { u, v });
            }
            canonical.push(ClusterEdge { u, v, weight: e.weight });
        }
        canonical.sort_by_key(|e| (e.u, e.v));
        Ok(Self { nodes, edges: canonical })
    }

    pub fn nodes(&self) -> &[ModeId] {
        &self.nodes
    }

    pub fn edges(&self) -> &[ClusterEdge] {
        &self.edges
    }

    pub fn weight(&self, a: ModeId, b: ModeId) -> Option<f64> {
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        self.edges
            .binary_search_by_key(&(u, v), |e| (e.u, e.v))
            .ok()
            .map(|i| self.edges[i].weight)
    }

    pub fn degree(&self, node: ModeId) -> usize {
        self.edges.iter().filter(|e| e.u == node || e.v == node).count()
    }

    pub fn neighbors(&self, node: ModeId) -> Vec<(ModeId, f64)> {
        let mut out: Vec<(ModeId, f64)> = self
            .edges
            .iter()
            .filter_map(|e| {
                if e.u == node {
                    Some((e.v, e.weight))
                } else if e.v == node {
                    Some((e.u, e.weight))
                } else {
                    None
                }
            })
            .collect();
        out.sort_by_key(|&(m, _)| m);
        out
    }

    /// Connected components as sorted node lists, ordered by their
    /// smallest member. Isolated nodes count as singleton components.
    pub fn connected_components(&self) -> Vec<Vec<ModeId>> {
        let mut adjacency: BTreeMap<ModeId, Vec<ModeId>> =
            self.nodes.iter().map(|&n| (n, Vec::new())).collect();
        for e in &self.edges {
            adjacency.get_mut(&e.u).unwrap().push(e.v);
            adjacency.get_mut(&e.v).unwrap().push(e.u);
        }
        let mut seen = BTreeSet::new();
        let mut components = Vec::new();
        for &start in &self.nodes {
            if !seen.insert(start) {
                continue;
            }
            let mut component = vec![start];
            let mut queue = vec![start];
            while let Some(node) = queue.pop() {
                for &next in &adjacency[&node] {
                    if seen.insert(next) {
                        component.push(next);
                        queue.push(next);
                    }
                }
            }
            component.sort();
            components.push(component);
        }
        components
    }

    /// Subgraph on the retained nodes and the edges within them.
    pub fn induced(&self, keep: &BTreeSet<ModeId>) -> ClusterGraph {
        let nodes: Vec<ModeId> = self.nodes.iter().copied().filter(|n| keep.contains(n)).collect();
        let edges: Vec<ClusterEdge> = self
            .edges
            .iter()
            .copied()
            .filter(|e| keep.contains(&e.u) && keep.contains(&e.v))
            .collect();
        ClusterGraph { nodes, edges }
    }
}

/// Compile standard-form nullifiers (anchor coefficient exactly +1, all
/// other terms on other modes) into a graph: edge (anchor, j) with weight
/// equal to minus the coefficient of Q_j. When two nullifiers both cover a
/// pair, their weights must agree to `RECIPROCITY_TOLERANCE`.
pub fn graph_from_nullifiers(
    nullifiers: &[QuadratureForm],
) -> Result<ClusterGraph, ClustersError> {
    let mut nodes = BTreeSet::new();
    let mut anchors = BTreeSet::new();
    let mut weights: BTreeMap<(ModeId, ModeId), f64> = BTreeMap::new();
    for form in nullifiers {
        let mut anchor = None;
        for (mode, component, w) in form.terms() {
            if component == Component::P {
                return Err(ClustersError::MomentumTerm(mode));
            }
            nodes.insert(mode);
            if w == 1.0 && anchor.replace(mode).is_some() {
                return Err(ClustersError::AmbiguousAnchor);
            }
        }
        let anchor = anchor.ok_or(ClustersError::MissingAnchor)?;
        if !anchors.insert(anchor) {
            return Err(ClustersError::DuplicateAnchor(anchor));
        }
        for (mode, _, w) in form.terms() {
            if mode == anchor {
                continue;
            }
            let key = if anchor < mode { (anchor, mode) } else { (mode, anchor) };
            let weight = -w;
            if let Some(&existing) = weights.get(&key) {
                if (existing - weight).abs() > RECIPROCITY_TOLERANCE {
                    return Err(ClustersError::InconsistentGraph {
                        u: key.0,
                        v: key.1,
                        w1: existing,
                        w2: weight,
                    });
                }
            } else {
                weights.insert(key, weight);
            }
        }
    }
    let edges = weights
        .into_iter()
        .map(|((u, v), weight)| ClusterEdge { u, v, weight })
        .collect();
    ClusterGraph::new(nodes.into_iter().collect(), edges)
}

/// Variance of each nullifier (normalized to a unit vector first) on the
/// given state. Values below 1 certify squeezing of that combination.
pub fn nullifier_variances(
    state: &CovarianceState,
    nullifiers: &[QuadratureForm],
) -> Result<Vec<f64>, ClustersError> {
    nullifiers
        .iter()
        .map(|form| {
            if form.is_empty() {
                return Err(ClustersError::EmptyForm);
            }
            let v = form.to_vector(state.basis())?;
            let norm_sqr = v.norm_squared();
            let raw = state
                .quadratic_form(&v)
                .expect("vector built from the state's own basis");
            Ok(raw / norm_sqr)
        })
        .collect()
}
