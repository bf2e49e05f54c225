//! Serializable witness certificates and their re-verification.
//!
//! A certificate stores the seed model, the whole expanded graph (every edge
//! with its label hash, depth, anchor and round), the zigzag, the extension
//! and the son/daughter pairs, together with a bundle holding every form it
//! mentions. [`Certificate::verify`] rebuilds everything it can from the seed
//! and the stored graph and compares.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::graph::{EdgeData, EdgeKey, ExpansionCase, LabeledGraph, Middle, Node, Seed};
use super::zigzag::{extend_plus, is_side, is_useful, select_zigzag, AddedEdge, Extension, ExtensionKind, Zigzag};
use super::{check_consistency, pairs_at, seed_tau, Witness, WitnessError};
use crate::model::{validate_model, ModelFile, PointedModel};
use crate::normal_form::{EdgeForms, Form, FormBundle};
use crate::term::Signature;

pub const CERTIFICATE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub from: usize,
    pub to: usize,
    pub label: String,
    pub depth: usize,
    pub anchor: [usize; 2],
    pub round: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub point: usize,
    pub depth: usize,
    pub round: usize,
}

/// A fresh node created while decomposing `(from, to)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiddleRecord {
    pub from: usize,
    pub to: usize,
    pub node: usize,
    pub case: ExpansionCase,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphRecord {
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
    pub middles: Vec<MiddleRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddedEdgeRecord {
    /// `None` stands for the fresh node.
    pub from: Option<usize>,
    pub to: Option<usize>,
    pub label: String,
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionRecord {
    pub kind: ExtensionKind,
    pub through: Option<usize>,
    pub edges: Vec<AddedEdgeRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub j: usize,
    pub edge: [usize; 2],
    pub son: String,
    pub daughter: String,
    pub projection: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub nodes: usize,
    pub edges: usize,
    /// Nodes alive after each round `0..=rounds+1`.
    pub nodes_per_round: Vec<usize>,
    pub edges_per_round: Vec<usize>,
    pub violations: usize,
    pub alternatives: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub version: u32,
    pub signature: Signature,
    pub q: usize,
    /// The truncation round `R`; the stored graph has `R + 1` rounds.
    pub rounds: usize,
    pub stability_round: usize,
    pub seed: ModelFile,
    pub tau: String,
    pub graph: GraphRecord,
    pub zigzag: Zigzag,
    pub extension: ExtensionRecord,
    pub pairs: Vec<PairRecord>,
    pub stats: Stats,
    pub forms: FormBundle,
}

/// One named check of [`Certificate::verify`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertificateCheck {
    pub checks: Vec<Check>,
}

impl CertificateCheck {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.ok).collect()
    }

    pub fn render_text(&self) -> String {
        self.checks
            .iter()
            .map(|c| format!("{:<14} {}  {}\n", c.name, if c.ok { "ok  " } else { "FAIL" }, c.detail))
            .collect()
    }
}

fn key(e: EdgeKey) -> [usize; 2] {
    [e.0, e.1]
}

impl Certificate {
    pub fn from_witness(w: &Witness) -> Certificate {
        let g = &w.graph;
        let mut forms = FormBundle::default();
        let tau = forms.add(&w.tau);
        let nodes = g.nodes().iter().map(|n| NodeRecord { point: n.point, depth: n.depth, round: n.round }).collect();
        let edges = g
            .edges()
            .iter()
            .map(|(&(from, to), d)| EdgeRecord {
                from,
                to,
                label: forms.add(&d.label),
                depth: d.depth,
                anchor: key(d.anchor),
                round: d.round,
            })
            .collect();
        let middles = g
            .all_middles()
            .iter()
            .flat_map(|(&(from, to), ms)| ms.iter().map(move |m| MiddleRecord { from, to, node: m.node, case: m.case }))
            .collect();
        let extension = ExtensionRecord {
            kind: w.extension.kind,
            through: w.extension.through,
            edges: w
                .extension
                .edges
                .iter()
                .map(|a| AddedEdgeRecord { from: a.from, to: a.to, label: forms.add(&a.label), depth: a.depth })
                .collect(),
        };
        let pairs = w
            .pairs
            .iter()
            .map(|p| PairRecord {
                j: p.j,
                edge: key(p.edge),
                son: forms.add(&p.son),
                daughter: forms.add(&p.daughter),
                projection: forms.add(&p.common_projection().expect("pairs are checked before certifying")),
            })
            .collect();
        let per_round = |count: &dyn Fn(usize) -> usize| (0..=g.rounds()).map(count).collect::<Vec<_>>();
        let stats = Stats {
            nodes: g.nodes().len(),
            edges: g.edges().len(),
            nodes_per_round: per_round(&|r| g.nodes().iter().filter(|n| n.round <= r).count()),
            edges_per_round: per_round(&|r| g.edges().values().filter(|d| d.round <= r).count()),
            violations: w.consistency.violations.len(),
            alternatives: w.zigzag.alternatives.len(),
        };
        Certificate {
            version: CERTIFICATE_VERSION,
            signature: w.sig,
            q: w.q,
            rounds: w.rounds,
            stability_round: w.stability_round,
            seed: ModelFile::from_model(&g.seed().pm.model, Some(g.seed().pm.edge)),
            tau,
            graph: GraphRecord { nodes, edges, middles },
            zigzag: w.zigzag.clone(),
            extension,
            pairs,
            stats,
            forms,
        }
    }

    /// Compact JSON with a fixed field order; equal certificates give equal bytes.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("certificate serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Certificate, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn seed_model(&self) -> Result<PointedModel, WitnessError> {
        let (model, edge) = self.seed.clone().into_model()?;
        let edge = edge.ok_or_else(|| WitnessError::InvalidSeed("seed has no designated edge".into()))?;
        Ok(PointedModel::new(model, edge)?)
    }

    /// Re-checks every claim from the serialized data. Stops early only when
    /// a later check cannot even be set up.
    pub fn verify(&self) -> CertificateCheck {
        let mut checks = Vec::new();
        let mut record = |name: &'static str, ok: bool, detail: String| {
            checks.push(Check { name, ok, detail });
            ok
        };
        if !record(
            "version",
            self.version == CERTIFICATE_VERSION,
            format!("version {} (expected {CERTIFICATE_VERSION})", self.version),
        ) {
            return CertificateCheck { checks };
        }

        let pm = match self.seed_model() {
            Ok(pm) => pm,
            Err(e) => {
                record("seed", false, e.to_string());
                return CertificateCheck { checks };
            }
        };
        let problems = validate_model(&pm.model, &self.signature);
        record("seed", problems.is_empty(), format!("base {}, {} problems", pm.model.base(), problems.len()));

        match self.forms.check_all() {
            Ok(n) => record("forms", true, format!("{n} records match their digests")),
            Err(e) => record("forms", false, e.to_string()),
        };
        let resolve = |h: &str| self.forms.get(h).map_err(|e| format!("form {h}: {e}"));
        let tau = match seed_tau(&pm, self.q) {
            Ok(t) => t,
            Err(e) => {
                record("tau", false, e.to_string());
                return CertificateCheck { checks };
            }
        };
        record("tau", tau.hash_hex() == self.tau && resolve(&self.tau).is_ok(), format!("tau {}", tau.short_id()));

        let graph = match self.rebuild(&pm) {
            Ok(g) => g,
            Err(e) => {
                record("graph", false, e);
                return CertificateCheck { checks };
            }
        };
        record(
            "graph",
            graph.rounds() == self.rounds + 1
                && graph.nodes().len() == self.stats.nodes
                && graph.edges().len() == self.stats.edges,
            format!("{} nodes, {} edges, {} rounds", graph.nodes().len(), graph.edges().len(), graph.rounds()),
        );

        let report = check_consistency(&graph);
        record(
            "consistency",
            report.ok() && self.stats.violations == 0,
            match report.violations.first() {
                None => "conditions (0) to (8) hold".into(),
                Some(v) => format!("{} violations, first {v}", report.violations.len()),
            },
        );

        let at_r = graph.truncate(self.rounds);
        let (checked, failed) = satisfaction(&at_r, self.q);
        record("satisfaction", failed.is_empty(), match failed.first() {
            None => format!("{checked} settled edges realize their labels"),
            Some(e) => format!("{} of {checked} settled edges differ, first {e:?}", failed.len()),
        });

        let zigzag_ok = self.check_zigzag(&at_r, &tau);
        record("zigzag", zigzag_ok.is_ok(), zigzag_ok.err().unwrap_or_else(|| format!("ladder {}..0", self.q)));

        let ext = match self.extension(&at_r) {
            Ok(ext) => ext,
            Err(e) => {
                record("extension", false, e);
                return CertificateCheck { checks };
            }
        };
        record("extension", true, format!("{:?} with {} edges", ext.kind, ext.edges.len()));

        let pairs_ok = self.check_pairs(&graph, &ext);
        record("pairs", pairs_ok.is_ok(), pairs_ok.err().unwrap_or_else(|| format!("{} disjoint pairs", self.pairs.len())));

        let mut earliest = self.rounds;
        let last = pairs_at(&graph, self.rounds + 1, &self.zigzag, &ext);
        while earliest > 0 && last.is_some() && pairs_at(&graph, earliest - 1, &self.zigzag, &ext) == last {
            earliest -= 1;
        }
        let stable = last.is_some() && pairs_at(&graph, self.rounds, &self.zigzag, &ext) == last;
        record(
            "stability",
            stable && earliest == self.stability_round,
            format!("stable from round {earliest}, recorded {}", self.stability_round),
        );
        CertificateCheck { checks }
    }

    /// The stored graph, reassembled over the recorded seed.
    pub fn rebuild_graph(&self) -> Result<LabeledGraph, String> {
        let pm = self.seed_model().map_err(|e| e.to_string())?;
        self.rebuild(&pm)
    }

    fn rebuild(&self, pm: &PointedModel) -> Result<LabeledGraph, String> {
        let seed = Arc::new(Seed::new(pm.clone(), self.signature, self.q));
        let nodes: Vec<Node> =
            self.graph.nodes.iter().map(|n| Node { point: n.point, depth: n.depth, round: n.round }).collect();
        if nodes.windows(2).any(|w| w[0].round > w[1].round) {
            return Err("nodes are not listed in round order".into());
        }
        if let Some(n) = nodes.iter().find(|n| n.point >= pm.model.base()) {
            return Err(format!("node point {} outside the seed", n.point));
        }
        let mut edges = BTreeMap::new();
        for e in &self.graph.edges {
            if e.from >= nodes.len() || e.to >= nodes.len() {
                return Err(format!("edge ({},{}) has an unknown endpoint", e.from, e.to));
            }
            let label = self.forms.get(&e.label).map_err(|err| format!("edge ({},{}): {err}", e.from, e.to))?;
            let data = EdgeData { label, depth: e.depth, anchor: (e.anchor[0], e.anchor[1]), round: e.round };
            if edges.insert((e.from, e.to), data).is_some() {
                return Err(format!("edge ({},{}) listed twice", e.from, e.to));
            }
        }
        let mut middles: BTreeMap<EdgeKey, Vec<Middle>> = BTreeMap::new();
        for m in &self.graph.middles {
            if !edges.contains_key(&(m.from, m.to)) || m.node >= nodes.len() {
                return Err(format!("middle {} of ({},{}) does not fit the graph", m.node, m.from, m.to));
            }
            middles.entry((m.from, m.to)).or_default().push(Middle { node: m.node, case: m.case });
        }
        let rounds = nodes.iter().map(|n| n.round).chain(edges.values().map(|d: &EdgeData| d.round)).max().unwrap_or(0);
        Ok(LabeledGraph::from_parts(seed, nodes, edges, middles, rounds.max(self.rounds + 1)))
    }

    fn check_zigzag(&self, g: &LabeledGraph, tau: &Form) -> Result<(), String> {
        let z = &self.zigzag;
        if z.edges.len() != self.q + 1 || z.middles.len() != self.q {
            return Err(format!("{} edges and {} middles for q = {}", z.edges.len(), z.middles.len(), self.q));
        }
        for j in 0..=self.q {
            let e = z.edge(j);
            let d = g.edge(e).ok_or_else(|| format!("e_{j} = {e:?} is not an edge"))?;
            if d.depth != j {
                return Err(format!("e_{j} has depth {}", d.depth));
            }
            let ok = if j == 0 { is_side(g, e) } else { is_useful(g, e) };
            if !ok {
                return Err(format!("e_{j} = {e:?} is not {}", if j == 0 { "a side edge" } else { "useful" }));
            }
            if j < self.q {
                let (u, v) = z.edge(j + 1);
                let w = z.middle(j + 1);
                if e != (u, w) && e != (w, v) {
                    return Err(format!("e_{j} = {e:?} does not pass through w_{} = {w}", j + 1));
                }
                if !g.has_edge((u, w)) || !g.has_edge((w, v)) {
                    return Err(format!("w_{} = {w} does not decompose e_{}", j + 1, j + 1));
                }
            }
        }
        if g.edge(z.edge(self.q)).map(|d| &d.label) != Some(tau) {
            return Err("e_q is not labeled by tau".into());
        }
        let again = select_zigzag(g).map_err(|e| e.to_string())?;
        let found: BTreeSet<_> = again.alternatives.iter().map(|a| (a.level, a.node)).collect();
        let stored: BTreeSet<_> = z.alternatives.iter().map(|a| (a.level, a.node)).collect();
        if found != stored {
            return Err(format!("{} alternatives recorded but {} found", stored.len(), found.len()));
        }
        Ok(())
    }

    fn extension(&self, g: &LabeledGraph) -> Result<Extension, String> {
        let recomputed = extend_plus(g, &self.zigzag, &self.signature).map_err(|e| e.to_string())?;
        let mut edges = Vec::new();
        for a in &self.extension.edges {
            let label = self.forms.get(&a.label).map_err(|e| e.to_string())?;
            edges.push(AddedEdge { from: a.from, to: a.to, label, depth: a.depth });
        }
        let stored = Extension { kind: self.extension.kind, edges, through: self.extension.through };
        if stored != recomputed {
            return Err(format!("stored {:?} extension differs from the recomputed {:?}", stored.kind, recomputed.kind));
        }
        Ok(stored)
    }

    fn check_pairs(&self, g: &LabeledGraph, ext: &Extension) -> Result<(), String> {
        if self.pairs.len() != self.q + 1 {
            return Err(format!("{} pairs for q = {}", self.pairs.len(), self.q));
        }
        let fresh = pairs_at(g, self.rounds, &self.zigzag, ext).ok_or("zigzag missing at the truncation")?;
        let at_r = g.truncate(self.rounds);
        let tainted = unsettled(&at_r, self.q);
        for (rec, p) in self.pairs.iter().zip(&fresh) {
            let j = p.j;
            if rec.j != j || rec.edge != key(p.edge) {
                return Err(format!("pair {j} is recorded for a different edge"));
            }
            if rec.son != p.son.hash_hex() || rec.daughter != p.daughter.hash_hex() {
                return Err(format!("son or daughter of e_{j} differs from the recomputed form"));
            }
            if !p.disjoint() {
                return Err(format!("son and daughter of e_{j} coincide"));
            }
            if p.son.degree() != j + 1 || p.daughter.degree() != j + 1 {
                return Err(format!("pair {j} has degrees {} and {}", p.son.degree(), p.daughter.degree()));
            }
            let proj = p.common_projection().ok_or_else(|| format!("son and daughter of e_{j} project differently"))?;
            if proj.hash_hex() != rec.projection {
                return Err(format!("projection of pair {j} differs from the recorded one"));
            }
            if tainted.get(j).is_some_and(|t| !t.contains(&p.edge)) && g.edge(p.edge).map(|d| &d.label) != Some(&proj) {
                return Err(format!("projection of pair {j} is not the label of the settled edge e_{j}"));
            }
        }
        Ok(())
    }
}

/// For each degree `n <= max_degree`, the edges whose degree-`n` form reaches
/// an edge of the last round that was not yet decomposed.
pub(crate) fn unsettled(g: &LabeledGraph, max_degree: usize) -> Vec<BTreeSet<EdgeKey>> {
    let last = g.rounds();
    let frontier: BTreeSet<EdgeKey> =
        g.edges().iter().filter(|(_, d)| d.round == last && d.depth >= 1).map(|(k, _)| *k).collect();
    let mut succ = vec![Vec::new(); g.nodes().len()];
    for &(x, y) in g.edges().keys() {
        succ[x].push(y);
    }
    let mut tainted = vec![BTreeSet::new()];
    for _ in 1..=max_degree {
        let prev = tainted.last().expect("nonempty");
        let next: BTreeSet<EdgeKey> = g
            .edges()
            .keys()
            .copied()
            .filter(|&(x, y)| {
                frontier.contains(&(x, y))
                    || prev.contains(&(y, x))
                    || succ[x].iter().any(|&z| g.has_edge((z, y)) && (prev.contains(&(x, z)) || prev.contains(&(z, y))))
            })
            .collect();
        tainted.push(next);
    }
    tainted
}

/// Compares each settled edge's form in the graph with its label. Returns the
/// number of edges compared and the mismatches.
pub(crate) fn satisfaction(g: &LabeledGraph, q: usize) -> (usize, Vec<EdgeKey>) {
    let tainted = unsettled(g, q);
    let forms = EdgeForms::compute(&g.to_model(), q);
    let mut checked = 0;
    let mut failed = Vec::new();
    for (&e, d) in g.edges() {
        if tainted.get(d.depth).is_none_or(|t| t.contains(&e)) {
            continue;
        }
        checked += 1;
        if forms.get(e, d.depth) != Some(&d.label) {
            failed.push(e);
        }
    }
    (checked, failed)
}

/// Runs the pipeline and packages the result.
pub fn certify(
    pm: &PointedModel,
    q: usize,
    sig: &Signature,
    opts: &super::WitnessOptions,
) -> Result<Certificate, WitnessError> {
    super::witness_nonatomicity(pm, q, sig, opts).map(|w| Certificate::from_witness(&w))
}
