//! Consistency conditions on labeled graphs.

use std::fmt;

use serde::Serialize;

use super::graph::{EdgeKey, LabeledGraph};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub condition: u8,
    pub edges: Vec<EdgeKey>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "condition ({}) at {:?}: {}", self.condition, self.edges, self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ConsistencyReport {
    pub nodes: usize,
    pub edges: usize,
    pub violations: Vec<Violation>,
}

impl ConsistencyReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    /// Violated condition numbers, sorted and deduplicated.
    pub fn conditions(&self) -> Vec<u8> {
        let mut c: Vec<u8> = self.violations.iter().map(|v| v.condition).collect();
        c.sort_unstable();
        c.dedup();
        c
    }
}

fn near(d: usize, k: usize) -> bool {
    d + 1 >= k && d <= k + 1
}

/// Checks conditions (0) to (8) on every edge and every triangle.
///
/// (0) is checked for the graph after every round. (7) and (8) are checked
/// through the anchors: every edge must be anchored at the seed edge between
/// the points of its endpoints and carry the seed form there, so any meet the
/// conditions ask about is realized in the seed. The parts of (8) that forbid
/// entries outright (no converse entry without a reverse edge, no white factor
/// without a loop) are also checked on the labels directly.
pub fn check_consistency(g: &LabeledGraph) -> ConsistencyReport {
    let mut out = Vec::new();
    let mut push = |condition: u8, edges: Vec<EdgeKey>, detail: String| out.push(Violation { condition, edges, detail });
    let h = g.seed.sig.h;
    let q = g.seed.q;

    for round in 0..=g.rounds {
        let alive = |x: usize| g.nodes[x].round <= round;
        for &(x, y) in g.edges.iter().filter(|(_, d)| d.round <= round).map(|(k, _)| k) {
            if !alive(x) || !alive(y) {
                push(0, vec![(x, y)], format!("edge present in round {round} before its endpoints"));
            }
            if h.symmetric && g.edges.get(&(y, x)).is_none_or(|r| r.round > round) {
                push(0, vec![(x, y)], format!("reverse missing after round {round}"));
            }
        }
        if h.reflexive {
            for (x, node) in g.nodes.iter().enumerate().filter(|(_, n)| n.round <= round) {
                if g.edges.get(&(x, x)).is_none_or(|l| l.round > round) {
                    push(0, vec![(x, x)], format!("loop of node {x} (point {}) missing after round {round}", node.point));
                }
            }
        }
    }

    let out_edges: Vec<Vec<usize>> = {
        let mut v = vec![Vec::new(); g.nodes.len()];
        for &(x, y) in g.edges.keys() {
            v[x].push(y);
        }
        v
    };

    for (&(u, v), data) in &g.edges {
        let k = data.depth;
        let e = (u, v);
        if k > q {
            push(1, vec![e], format!("depth {k} exceeds {q}"));
        }
        if data.label.degree() != k {
            push(1, vec![e], format!("label degree {} but depth {k}", data.label.degree()));
        }
        if data.label.is_white() != (u == v) {
            push(1, vec![e], "label color disagrees with loop status".into());
        }
        let rev = g.edges.get(&(v, u));
        if let Some(r) = rev {
            if !near(r.depth, k) {
                push(2, vec![e, (v, u)], format!("reverse depth {} vs {k}", r.depth));
            }
        }
        let (du, dv) = (g.nodes[u].depth, g.nodes[v].depth);
        if !near(du, k) || !near(dv, k) {
            push(3, vec![e], format!("loop depths {du},{dv} vs {k}"));
        }
        for &w in &out_edges[u] {
            if let Some(second) = g.edges.get(&(w, v)) {
                let first = &g.edges[&(u, w)];
                if !near(first.depth, k) || !near(second.depth, k) {
                    push(4, vec![e, (u, w), (w, v)], format!("depths {},{} vs {k}", first.depth, second.depth));
                }
            }
        }
        if k >= 1 && rev.is_some_and(|r| r.depth + 1 == k) && !((du == k && dv + 1 == k) || (du + 1 == k && dv == k)) {
            push(5, vec![e], format!("reverse at {} but loop depths {du},{dv}", k - 1));
        }
        if rev.is_none_or(|r| r.depth == k) && du == k + 1 && dv == k + 1 {
            push(6, vec![e], format!("both loop depths are {}", k + 1));
        }

        let (pu, pv) = (g.nodes[u].point, g.nodes[v].point);
        if data.anchor != (pu, pv) {
            push(7, vec![e], format!("anchor {:?} is not ({pu},{pv})", data.anchor));
        }
        match g.seed.form(data.anchor, k) {
            Some(f) if *f == data.label => {}
            _ => push(8, vec![e], "label is not the seed form at the anchor".into()),
        }
        if k >= 1 {
            if rev.is_none() && !data.label.conv().is_empty() {
                push(8, vec![e], "converse entry without a reverse edge".into());
            }
            if !g.edges.contains_key(&(u, u)) && data.label.sub().iter().any(|(a, _)| a.is_white()) {
                push(8, vec![e], "white left factor without a source loop".into());
            }
            if !g.edges.contains_key(&(v, v)) && data.label.sub().iter().any(|(_, b)| b.is_white()) {
                push(8, vec![e], "white right factor without a target loop".into());
            }
        }
    }
    ConsistencyReport { nodes: g.nodes.len(), edges: g.edges.len(), violations: out }
}
