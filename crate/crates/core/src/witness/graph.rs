//! The labeled graph and its round-by-round expansion.
//!
//! Every node stands for a point of the seed model and every edge `(x, y)` is
//! labeled by the seed form of `(point(x), point(y))` at the edge's depth. The
//! seed model is thus the witnessing algebra for every labeling step.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::WitnessError;
use crate::model::{Model, PointedModel, Relation};
use crate::normal_form::{EdgeForms, Form};
use crate::term::Signature;

pub type NodeId = usize;
pub type EdgeKey = (NodeId, NodeId);

/// The seed pointed model together with its forms up to degree `q`.
#[derive(Debug)]
pub struct Seed {
    pub pm: PointedModel,
    pub sig: Signature,
    pub q: usize,
    pub forms: EdgeForms,
}

impl Seed {
    pub fn new(pm: PointedModel, sig: Signature, q: usize) -> Seed {
        let forms = EdgeForms::compute(&pm.model, q);
        Seed { pm, sig, q, forms }
    }

    pub fn has(&self, r: usize, s: usize) -> bool {
        self.pm.model.has_edge(r, s)
    }

    pub fn form(&self, anchor: (usize, usize), degree: usize) -> Option<&Form> {
        self.forms.get(anchor, degree)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Node {
    pub point: usize,
    /// The depth the construction assigns to the node's loop position,
    /// whether or not the loop is an edge.
    pub depth: usize,
    pub round: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeData {
    pub label: Form,
    pub depth: usize,
    pub anchor: (usize, usize),
    pub round: usize,
}

/// Which case of the expansion produced a fresh node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionCase {
    /// Reverse edge one lower, source loop at `k`.
    ReverseBelow,
    /// Reverse edge one lower, target loop at `k`.
    ReverseBelowMirror,
    /// No lower reverse, no loop above.
    Plain,
    /// No lower reverse, source loop at `k+1`.
    SourceLoopAbove,
    /// No lower reverse, target loop at `k+1`.
    TargetLoopAbove,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Middle {
    pub node: NodeId,
    pub case: ExpansionCase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GraphBudget {
    pub max_nodes: usize,
    pub max_edges: usize,
}

impl Default for GraphBudget {
    fn default() -> Self {
        GraphBudget { max_nodes: 200_000, max_edges: 2_000_000 }
    }
}

#[derive(Debug, Clone)]
pub struct LabeledGraph {
    pub(crate) seed: Arc<Seed>,
    pub(crate) nodes: Vec<Node>,
    pub(crate) edges: BTreeMap<EdgeKey, EdgeData>,
    /// Fresh nodes created while processing an edge, in creation order.
    pub(crate) middles: BTreeMap<EdgeKey, Vec<Middle>>,
    pub(crate) rounds: usize,
}

impl LabeledGraph {
    pub fn seed(&self) -> &Seed {
        &self.seed
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeMap<EdgeKey, EdgeData> {
        &self.edges
    }

    pub fn edge(&self, e: EdgeKey) -> Option<&EdgeData> {
        self.edges.get(&e)
    }

    pub fn has_edge(&self, e: EdgeKey) -> bool {
        self.edges.contains_key(&e)
    }

    pub fn middles(&self, e: EdgeKey) -> &[Middle] {
        self.middles.get(&e).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Completed expansion rounds.
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn node_depth(&self, x: NodeId) -> usize {
        self.nodes[x].depth
    }

    /// The graph as a model: unit = edges, `x_i` = edges whose label color has `x_i`.
    pub fn to_model(&self) -> Model {
        let n = self.nodes.len();
        let mut unit = Relation::empty(n);
        let mut valuation = vec![Relation::empty(n); self.seed.sig.m];
        for (&(x, y), data) in &self.edges {
            unit.insert(x, y);
            for (i, rel) in valuation.iter_mut().enumerate() {
                if data.label.color().has_var(i) {
                    rel.insert(x, y);
                }
            }
        }
        Model::new_unchecked(unit, valuation)
    }

    /// The graph as it stood after `round` rounds.
    pub fn truncate(&self, round: usize) -> LabeledGraph {
        let nodes: Vec<Node> = self.nodes.iter().take_while(|n| n.round <= round).cloned().collect();
        let edges = self.edges.iter().filter(|(_, d)| d.round <= round).map(|(k, d)| (*k, d.clone())).collect();
        let middles = self
            .middles
            .iter()
            .map(|(k, ms)| (*k, ms.iter().filter(|m| self.nodes[m.node].round <= round).cloned().collect::<Vec<_>>()))
            .filter(|(_, ms)| !ms.is_empty())
            .collect();
        LabeledGraph { seed: self.seed.clone(), nodes, edges, middles, rounds: round.min(self.rounds) }
    }

    pub(crate) fn from_parts(
        seed: Arc<Seed>,
        nodes: Vec<Node>,
        edges: BTreeMap<EdgeKey, EdgeData>,
        middles: BTreeMap<EdgeKey, Vec<Middle>>,
        rounds: usize,
    ) -> LabeledGraph {
        LabeledGraph { seed, nodes, edges, middles, rounds }
    }

    pub(crate) fn all_middles(&self) -> &BTreeMap<EdgeKey, Vec<Middle>> {
        &self.middles
    }

    pub(crate) fn add_node(&mut self, point: usize, depth: usize, round: usize) -> NodeId {
        self.nodes.push(Node { point, depth, round });
        self.nodes.len() - 1
    }

    /// Inserts `(x, y)` labeled by the seed form at its anchor. Re-inserting an
    /// edge must agree with the existing data.
    pub(crate) fn add_edge(&mut self, x: NodeId, y: NodeId, depth: usize, round: usize) -> Result<(), WitnessError> {
        let anchor = (self.nodes[x].point, self.nodes[y].point);
        let label = self
            .seed
            .form(anchor, depth)
            .ok_or_else(|| WitnessError::Internal(format!("anchor {anchor:?} for edge ({x},{y}) is not a seed edge")))?
            .clone();
        let data = EdgeData { label, depth, anchor, round };
        match self.edges.get(&(x, y)) {
            Some(old) if old.label == data.label && old.depth == data.depth => Ok(()),
            Some(old) => Err(WitnessError::Internal(format!(
                "edge ({x},{y}) added twice with depths {} and {depth}",
                old.depth
            ))),
            None => {
                self.edges.insert((x, y), data);
                Ok(())
            }
        }
    }

    /// Two nodes for the seed edge `(r, s)`, joined in both directions, with
    /// loops where the seed has them.
    pub fn round0(seed: Arc<Seed>) -> Result<LabeledGraph, WitnessError> {
        let q = seed.q;
        if q == 0 {
            return Err(WitnessError::ZeroQ);
        }
        let (r, s) = seed.pm.edge;
        let mut g = LabeledGraph { seed: seed.clone(), nodes: Vec::new(), edges: BTreeMap::new(), middles: BTreeMap::new(), rounds: 0 };
        let u = g.add_node(r, q, 0);
        let v = g.add_node(s, q - 1, 0);
        g.add_edge(u, v, q, 0)?;
        if !seed.has(s, r) {
            return Err(WitnessError::NoConverse);
        }
        g.add_edge(v, u, q - 1, 0)?;
        if seed.has(r, r) {
            g.add_edge(u, u, q, 0)?;
        }
        if seed.has(s, s) {
            g.add_edge(v, v, q - 1, 0)?;
        }
        Ok(g)
    }

    /// Runs one more round of decompositions.
    pub fn expand_round(&mut self, budget: &GraphBudget) -> Result<(), WitnessError> {
        let n = self.rounds;
        let round = n + 1;
        let work: Vec<EdgeKey> = self.edges.iter().filter(|(_, d)| d.round == n && d.depth >= 1).map(|(k, _)| *k).collect();
        let h = self.seed.sig.h;
        // Under symmetry every added edge comes with its reverse, so a degree-0
        // factor is as good as one with a converse entry.
        let has_converse = |f: &Form| f.conv_f().is_some() || (f.degree() == 0 && h.symmetric);
        for (a, b) in work {
            let data = self.edges[&(a, b)].clone();
            let k = data.depth;
            let (r, s) = data.anchor;
            let reverse = self.edges.get(&(b, a)).map(|d| d.depth);
            let in_y = reverse.is_none_or(|rd| k >= rd);
            let da = self.node_depth(a);
            let db = self.node_depth(b);
            let case = if a != b && reverse == Some(k - 1) {
                if da == k && db == k - 1 {
                    ExpansionCase::ReverseBelow
                } else if da == k - 1 && db == k {
                    ExpansionCase::ReverseBelowMirror
                } else {
                    return Err(WitnessError::Internal(format!(
                        "edge ({a},{b}) of depth {k} has a reverse of depth {} but loop depths {da},{db}",
                        k - 1
                    )));
                }
            } else if da == k + 1 {
                ExpansionCase::SourceLoopAbove
            } else if db == k + 1 {
                ExpansionCase::TargetLoopAbove
            } else {
                ExpansionCase::Plain
            };

            let pairs: Vec<(Form, Form)> = data
                .label
                .sub()
                .iter()
                .filter(|(x, y)| !x.is_white() && !y.is_white())
                .filter(|(x, y)| in_y || !has_converse(x) || !has_converse(y))
                .cloned()
                .collect();
            for (s1, s2) in pairs {
                let p = self.middle_point((r, s), k - 1, &s1, &s2)?;
                let seed = self.seed.clone();
                let has = |x: usize, y: usize| seed.has(x, y);
                let low = k.saturating_sub(2);
                let deep = k >= 2;
                let wa = deep && has(p, r) || h.symmetric;
                let bw = deep && has(s, p) || h.symmetric;
                let lp = deep && has(p, p) || h.reflexive;
                // (depth, present) for (a,w), (w,b), (w,a), (b,w), (w,w), then the node depth.
                let (plan, node_depth): ([(usize, bool); 5], usize) = match case {
                    ExpansionCase::ReverseBelow => {
                        ([(k - 1, true), (k - 1, true), (k - 1, wa), (low, bw), (low, lp)], low)
                    }
                    ExpansionCase::ReverseBelowMirror => {
                        ([(k - 1, true), (k - 1, true), (low, wa), (k - 1, bw), (low, lp)], low)
                    }
                    ExpansionCase::Plain => ([(k - 1, true), (k - 1, true), (k - 1, wa), (k - 1, bw), (low, lp)], low),
                    ExpansionCase::SourceLoopAbove => {
                        ([(k, true), (k - 1, true), (k, has(p, r)), (k - 1, bw), (k - 1, has(p, p))], k - 1)
                    }
                    ExpansionCase::TargetLoopAbove => {
                        ([(k - 1, true), (k, true), (k - 1, wa), (k, has(s, p)), (k - 1, has(p, p))], k - 1)
                    }
                };
                let w = self.add_node(p, node_depth, round);
                let ends = [(a, w), (w, b), (w, a), (b, w), (w, w)];
                for (&(x, y), &(depth, present)) in ends.iter().zip(&plan) {
                    if present {
                        self.add_edge(x, y, depth, round)?;
                    }
                }
                self.middles.entry((a, b)).or_default().push(Middle { node: w, case });
                if self.nodes.len() > budget.max_nodes || self.edges.len() > budget.max_edges {
                    return Err(WitnessError::GraphBudget { nodes: self.nodes.len(), edges: self.edges.len(), budget: *budget });
                }
            }
        }
        self.rounds = round;
        Ok(())
    }

    /// The smallest seed point `p` with `(r,p)` realizing `s1` and `(p,s)`
    /// realizing `s2` at degree `degree`.
    fn middle_point(&self, (r, s): (usize, usize), degree: usize, s1: &Form, s2: &Form) -> Result<usize, WitnessError> {
        let seed = &self.seed;
        (0..seed.pm.model.base())
            .find(|&p| {
                seed.has(r, p)
                    && seed.has(p, s)
                    && seed.form((r, p), degree) == Some(s1)
                    && seed.form((p, s), degree) == Some(s2)
            })
            .ok_or_else(|| WitnessError::Internal(format!("no seed point decomposes ({r},{s}) as {s1} ; {s2}")))
    }

    pub fn expand(&mut self, rounds: usize, budget: &GraphBudget) -> Result<(), WitnessError> {
        for _ in 0..rounds {
            self.expand_round(budget)?;
        }
        Ok(())
    }
}
