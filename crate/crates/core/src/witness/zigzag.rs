//! Zigzag selection, the one-step extension and son/daughter forms.

use serde::{Deserialize, Serialize};

use super::graph::{EdgeKey, LabeledGraph, NodeId};
use super::WitnessError;
use crate::model::{Model, Relation};
use crate::normal_form::{Color, EdgeForms, Form};
use crate::term::Signature;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Zigzag {
    /// `e_q, .., e_0`.
    pub edges: Vec<EdgeKey>,
    /// `w_q, .., w_1`.
    pub middles: Vec<NodeId>,
    /// Alternative decomposition nodes found for `e_k` (property (c)).
    pub alternatives: Vec<Alternative>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alternative {
    pub level: usize,
    pub node: NodeId,
}

impl Zigzag {
    pub fn q(&self) -> usize {
        self.edges.len() - 1
    }

    /// `e_j`.
    pub fn edge(&self, j: usize) -> EdgeKey {
        self.edges[self.q() - j]
    }

    /// `w_j` for `j >= 1`.
    pub fn middle(&self, j: usize) -> NodeId {
        self.middles[self.q() - j]
    }

    pub fn property_c_holds(&self) -> bool {
        self.alternatives.is_empty()
    }
}

fn depth(g: &LabeledGraph, e: EdgeKey) -> Option<usize> {
    g.edge(e).map(|d| d.depth)
}

/// Reverse present and lower, and either the top edge or an edge with exactly
/// one node `w` joined to both ends in both directions at no lower depth.
pub fn is_useful(g: &LabeledGraph, (a, b): EdgeKey) -> bool {
    let Some(k) = depth(g, (a, b)) else { return false };
    if a == b || !depth(g, (b, a)).is_some_and(|d| d < k) {
        return false;
    }
    if k == g.seed.q {
        return true;
    }
    let mut found = 0;
    for w in 0..g.nodes.len() {
        if w == a || w == b {
            continue;
        }
        let all = [(a, w), (w, b), (w, a), (b, w)].iter().all(|&e| depth(g, e).is_some_and(|d| d >= k));
        if all {
            found += 1;
        }
    }
    found == 1
}

/// Depth 0, reverse present iff symmetric, both loops present iff reflexive,
/// both loop depths 0.
pub fn is_side(g: &LabeledGraph, (a, b): EdgeKey) -> bool {
    let h = g.seed.sig.h;
    depth(g, (a, b)) == Some(0)
        && a != b
        && g.has_edge((b, a)) == h.symmetric
        && (g.has_edge((a, a)) && g.has_edge((b, b))) == h.reflexive
        && g.node_depth(a) == 0
        && g.node_depth(b) == 0
}

/// Descends from the top edge through recorded middle nodes, taking the first
/// useful (finally: side) edge of the right depth at each level.
pub fn select_zigzag(g: &LabeledGraph) -> Result<Zigzag, WitnessError> {
    let q = g.seed.q;
    let top: Vec<EdgeKey> = g.edges.iter().filter(|((x, y), d)| x != y && d.depth == q).map(|(k, _)| *k).collect();
    let [mut current] = top[..] else {
        return Err(WitnessError::NoDescent { level: q, detail: format!("{} non-loop edges of depth {q}", top.len()) });
    };
    let mut edges = vec![current];
    let mut middles = Vec::new();
    for k in (1..=q).rev() {
        let (a, b) = current;
        let want = |e: EdgeKey| depth(g, e) == Some(k - 1) && if k - 1 == 0 { is_side(g, e) } else { is_useful(g, e) };
        let next = g.middles(current).iter().find_map(|m| {
            [(a, m.node), (m.node, b)].into_iter().find(|&e| want(e)).map(|e| (m.node, e))
        });
        let Some((w, e)) = next else {
            return Err(WitnessError::NoDescent {
                level: k,
                detail: format!("none of the {} middles of {current:?} gives a suitable edge", g.middles(current).len()),
            });
        };
        middles.push(w);
        edges.push(e);
        current = e;
    }
    let mut alternatives = Vec::new();
    for (i, k) in (1..=q).rev().enumerate() {
        let (u, v) = edges[i];
        let w = middles[i];
        let (Some(l1), Some(l2)) = (g.edge((u, w)), g.edge((w, v))) else { continue };
        for y in 0..g.nodes.len() {
            if y == w {
                continue;
            }
            if let (Some(m1), Some(m2)) = (g.edge((u, y)), g.edge((y, v))) {
                if m1.label.compatible(&l1.label) && m2.label.compatible(&l2.label) {
                    alternatives.push(Alternative { level: k, node: y });
                }
            }
        }
    }
    Ok(Zigzag { edges, middles, alternatives })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionKind {
    /// A fresh node `h` between the ends of `e_0`.
    FreshNode,
    /// The reverse of `e_0`.
    ReverseEdge,
    /// A loop at `w_1`.
    Loop,
}

/// An endpoint of an added edge: an existing node, or `None` for the fresh node.
pub type End = Option<NodeId>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AddedEdge {
    pub from: End,
    pub to: End,
    pub label: Form,
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extension {
    pub kind: ExtensionKind,
    pub edges: Vec<AddedEdge>,
    /// The node joined to both ends of `e_0`, if any.
    pub through: Option<NodeId>,
}

impl Extension {
    pub fn fresh_node(&self) -> bool {
        self.kind == ExtensionKind::FreshNode
    }

    /// The extended graph as a model. The fresh node, if any, gets the next free index.
    pub fn apply(&self, g: &LabeledGraph) -> Model {
        let base = g.nodes.len() + usize::from(self.fresh_node());
        let h = g.nodes.len();
        let m = g.seed.sig.m;
        let mut unit = Relation::empty(base);
        let mut valuation = vec![Relation::empty(base); m];
        let labeled = g
            .edges
            .iter()
            .map(|(&e, d)| (e, d.label.color()))
            .chain(self.edges.iter().map(|a| ((a.from.unwrap_or(h), a.to.unwrap_or(h)), a.label.color())));
        for ((x, y), color) in labeled {
            unit.insert(x, y);
            for (i, rel) in valuation.iter_mut().enumerate() {
                if color.has_var(i) {
                    rel.insert(x, y);
                }
            }
        }
        Model::new_unchecked(unit, valuation)
    }
}

fn empty_color_form(white: bool) -> Form {
    Form::color_form(Color(0).with_identity(white))
}

/// The one-step extension for the signature's case.
pub fn extend_plus(g: &LabeledGraph, z: &Zigzag, sig: &Signature) -> Result<Extension, WitnessError> {
    let (u0, v0) = z.edge(0);
    let black = empty_color_form(false);
    let white = empty_color_form(true);
    let added = |from: End, to: End, label: &Form| AddedEdge { from, to, label: label.clone(), depth: 0 };
    if sig.m >= 1 {
        let through = (0..g.nodes.len())
            .find(|&y| y != u0 && y != v0 && g.has_edge((u0, y)) && g.has_edge((y, v0)));
        let (g1, g2) = match through {
            None => (black.clone(), black.clone()),
            Some(y) => {
                let avoid = |c: Color| {
                    Color::all(sig.m)
                        .find(|&d| !d.white() && d != c)
                        .map(Form::color_form)
                        .expect("at least two black colors when m >= 1")
                };
                (avoid(g.edges[&(u0, y)].label.color()), avoid(g.edges[&(y, v0)].label.color()))
            }
        };
        let mut edges = vec![added(Some(u0), None, &g1), added(None, Some(v0), &g2)];
        if sig.h.reflexive {
            edges.push(added(None, None, &white));
        }
        if sig.h.symmetric {
            edges.push(added(None, Some(u0), &black));
            edges.push(added(Some(v0), None, &black));
        }
        return Ok(Extension { kind: ExtensionKind::FreshNode, edges, through });
    }
    if !sig.h.symmetric {
        if g.has_edge((v0, u0)) {
            return Err(WitnessError::Internal(format!("side edge {:?} already has a reverse", (u0, v0))));
        }
        return Ok(Extension {
            kind: ExtensionKind::ReverseEdge,
            edges: vec![added(Some(v0), Some(u0), &black)],
            through: None,
        });
    }
    if !sig.h.reflexive {
        let w1 = z.middle(1);
        if g.has_edge((w1, w1)) {
            return Err(WitnessError::Internal(format!("node {w1} already has a loop")));
        }
        return Ok(Extension { kind: ExtensionKind::Loop, edges: vec![added(Some(w1), Some(w1), &white)], through: None });
    }
    Err(WitnessError::AtomicCase)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SonDaughter {
    pub j: usize,
    pub edge: EdgeKey,
    pub son: Form,
    pub daughter: Form,
}

impl SonDaughter {
    pub fn disjoint(&self) -> bool {
        self.son != self.daughter
    }

    pub fn common_projection(&self) -> Option<Form> {
        let a = self.son.project().ok()?;
        (self.daughter.project().ok()? == a).then_some(a)
    }
}

/// Degree `j+1` forms of `e_j` in the graph and in its extension.
pub fn son_daughter(g: &LabeledGraph, ext: &Extension, z: &Zigzag) -> Vec<SonDaughter> {
    let q = z.q();
    let son_forms = EdgeForms::compute(&g.to_model(), q + 1);
    let daughter_forms = EdgeForms::compute(&ext.apply(g), q + 1);
    (0..=q)
        .map(|j| {
            let e = z.edge(j);
            SonDaughter {
                j,
                edge: e,
                son: son_forms.get(e, j + 1).expect("zigzag edge in graph").clone(),
                daughter: daughter_forms.get(e, j + 1).expect("zigzag edge in extension").clone(),
            }
        })
        .collect()
}
