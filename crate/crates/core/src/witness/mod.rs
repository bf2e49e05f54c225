//! Non-atomicity witnesses.
//!
//! Starting from a seed pointed model whose edge satisfies the term `t`, a
//! labeled graph is grown round by round so that every edge's label records
//! the decompositions it needs. A zigzag of edges `e_q .. e_0` is then picked
//! from the top edge down to a side edge, a small extension of the graph is
//! made next to `e_0`, and for each `j` the degree-`j+1` forms of `e_j` in
//! the graph (the *son*) and in its extension (the *daughter*) are compared.
//! Distinct forms with a common projection split the label of `e_j` into two
//! disjoint nonzero parts.

mod certificate;
mod check;
mod dot;
mod graph;
mod zigzag;

pub use certificate::{
    certify, AddedEdgeRecord, Certificate, CertificateCheck, Check, EdgeRecord, ExtensionRecord, GraphRecord, MiddleRecord,
    NodeRecord,
    PairRecord, Stats, CERTIFICATE_VERSION,
};
pub use check::{check_consistency, ConsistencyReport, Violation};
pub use dot::to_dot;
pub use graph::{EdgeData, EdgeKey, ExpansionCase, GraphBudget, LabeledGraph, Middle, Node, NodeId, Seed};
pub use zigzag::{
    extend_plus, is_side, is_useful, select_zigzag, son_daughter, AddedEdge, Alternative, End, Extension,
    ExtensionKind, SonDaughter, Zigzag,
};

use std::sync::Arc;

use thiserror::Error;

use crate::model::{eval, validate_model, ModelError, PointedModel};
use crate::normal_form::{form_of_edge, Form};
use crate::term::{builtin, Signature};

#[derive(Debug, Error)]
pub enum WitnessError {
    #[error("q must be at least 1")]
    ZeroQ,
    #[error("the seed edge {0:?} does not satisfy t")]
    SeedNotInT((usize, usize)),
    #[error("the seed edge has no reverse, so the top form has no converse entry")]
    NoConverse,
    #[error("seed model is not valid for the signature: {0}")]
    InvalidSeed(String),
    #[error("atomic case: m = 0 and H = {{R,S}} has no non-atomicity witness")]
    AtomicCase,
    #[error("graph budget exceeded: {nodes} nodes, {edges} edges (limits {} / {})", budget.max_nodes, budget.max_edges)]
    GraphBudget { nodes: usize, edges: usize, budget: GraphBudget },
    #[error("no zigzag descent at level {level}: {detail}")]
    NoDescent { level: usize, detail: String },
    #[error("son/daughter forms differ between rounds {round} and {}", round + 1)]
    Unstable { round: usize },
    #[error("consistency violated: {0}")]
    Inconsistent(String),
    #[error("certificate property violated: {0}")]
    Property(String),
    #[error("internal construction error: {0}")]
    Internal(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{stage}: {source}")]
    Stage { stage: &'static str, source: Box<WitnessError> },
}

impl WitnessError {
    fn at(stage: &'static str) -> impl FnOnce(WitnessError) -> WitnessError {
        move |e| match e {
            already @ WitnessError::Stage { .. } => already,
            other => WitnessError::Stage { stage, source: Box::new(other) },
        }
    }

    /// The innermost error, without stage tags.
    pub fn root(&self) -> &WitnessError {
        match self {
            WitnessError::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

/// The degree-`q` form of the seed edge, checked to lie below `t` with a
/// unique converse entry.
pub fn seed_tau(pm: &PointedModel, q: usize) -> Result<Form, WitnessError> {
    if q == 0 {
        return Err(WitnessError::ZeroQ);
    }
    let t = builtin("t").expect("t is a builtin");
    if !eval(&t, &pm.model)?.contains(pm.edge.0, pm.edge.1) {
        return Err(WitnessError::SeedNotInT(pm.edge));
    }
    let tau = form_of_edge(pm, q);
    if tau.conv_f().is_none() {
        return Err(WitnessError::NoConverse);
    }
    Ok(tau)
}

/// The round-0 graph for the seed edge.
pub fn build_round0(pm: &PointedModel, sig: &Signature, q: usize) -> Result<LabeledGraph, WitnessError> {
    seed_tau(pm, q)?;
    LabeledGraph::round0(Arc::new(Seed::new(pm.clone(), *sig, q)))
}

/// Runs `rounds` more rounds of expansion.
pub fn expand(g: &mut LabeledGraph, rounds: usize, budget: &GraphBudget) -> Result<(), WitnessError> {
    g.expand(rounds, budget)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WitnessOptions {
    /// Truncation round `R`; son and daughter must agree between `R` and `R+1`.
    /// Defaults to `q + 3`.
    pub rounds: Option<usize>,
    pub budget: GraphBudget,
}

impl Default for WitnessOptions {
    fn default() -> Self {
        WitnessOptions { rounds: None, budget: GraphBudget::default() }
    }
}

/// Everything the pipeline computed, before serialization.
#[derive(Debug, Clone)]
pub struct Witness {
    pub sig: Signature,
    pub q: usize,
    pub rounds: usize,
    pub tau: Form,
    /// The graph after `rounds + 1` rounds; earlier truncations are prefixes.
    pub graph: LabeledGraph,
    pub consistency: ConsistencyReport,
    pub zigzag: Zigzag,
    pub extension: Extension,
    pub pairs: Vec<SonDaughter>,
    pub stability_round: usize,
}

fn pairs_at(graph: &LabeledGraph, round: usize, z: &Zigzag, ext: &Extension) -> Option<Vec<SonDaughter>> {
    let g = graph.truncate(round);
    let present = z.edges.iter().all(|&e| g.has_edge(e))
        && ext.edges.iter().flat_map(|a| [a.from, a.to]).flatten().all(|x| x < g.nodes.len());
    present.then(|| son_daughter(&g, ext, z))
}

/// Runs the whole construction and checks the resulting pairs.
pub fn witness_nonatomicity(
    pm: &PointedModel,
    q: usize,
    sig: &Signature,
    opts: &WitnessOptions,
) -> Result<Witness, WitnessError> {
    if sig.m == 0 && sig.h.reflexive && sig.h.symmetric {
        return Err(WitnessError::AtomicCase);
    }
    let problems = validate_model(&pm.model, sig);
    if !problems.is_empty() {
        let text: Vec<String> = problems.iter().map(ToString::to_string).collect();
        return Err(WitnessError::InvalidSeed(text.join("; ")));
    }
    let tau = seed_tau(pm, q).map_err(WitnessError::at("seed"))?;
    let rounds = opts.rounds.unwrap_or(q + 3);
    let mut graph = build_round0(pm, sig, q).map_err(WitnessError::at("round 0"))?;
    graph.expand(rounds + 1, &opts.budget).map_err(WitnessError::at("expand"))?;
    let consistency = check_consistency(&graph);
    if !consistency.ok() {
        return Err(WitnessError::Stage {
            stage: "consistency",
            source: Box::new(WitnessError::Inconsistent(consistency.violations[0].to_string())),
        });
    }
    let at_r = graph.truncate(rounds);
    let zigzag = select_zigzag(&at_r).map_err(WitnessError::at("zigzag"))?;
    let extension = extend_plus(&at_r, &zigzag, sig).map_err(WitnessError::at("extend"))?;

    let last = pairs_at(&graph, rounds + 1, &zigzag, &extension).expect("zigzag chosen in an earlier truncation");
    let at_rounds = pairs_at(&graph, rounds, &zigzag, &extension).expect("zigzag chosen at this truncation");
    if at_rounds != last {
        return Err(WitnessError::Stage { stage: "son/daughter", source: Box::new(WitnessError::Unstable { round: rounds }) });
    }
    let mut stability_round = rounds;
    while stability_round > 0 && pairs_at(&graph, stability_round - 1, &zigzag, &extension).as_ref() == Some(&last) {
        stability_round -= 1;
    }
    for p in &last {
        if !p.disjoint() {
            return Err(WitnessError::Stage {
                stage: "son/daughter",
                source: Box::new(WitnessError::Property(format!("son and daughter of e_{} coincide", p.j))),
            });
        }
        if p.common_projection().is_none() {
            return Err(WitnessError::Stage {
                stage: "son/daughter",
                source: Box::new(WitnessError::Property(format!("son and daughter of e_{} project differently", p.j))),
            });
        }
    }
    Ok(Witness { sig: *sig, q, rounds, tau, graph, consistency, zigzag, extension, pairs: last, stability_round })
}
