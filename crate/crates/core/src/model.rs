//! Finite relativized relation set algebras.
//!
//! A [`Model`] is a base `{0, .., n-1}`, a unit `W ⊆ U×U` and one edge set per
//! generator. Composition and converse are relativized to the unit, so every
//! evaluation result is a subset of `W`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::term::{HSet, Signature, Term, TermError};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("variable x{index} used but the model only values {available} variable(s)")]
    VariableOutOfRange { index: usize, available: usize },
    #[error("pair ({0},{1}) is outside the base of size {2}")]
    PairOutOfRange(usize, usize, usize),
    #[error("edge ({0},{1}) is not in the unit")]
    EdgeNotInUnit(usize, usize),
    #[error("base {base} exceeds the configured cap of {cap}")]
    BaseTooLarge { base: usize, cap: usize },
    #[error("budget exceeded: {what} would need {predicted} models, budget is {budget}")]
    BudgetExceeded { what: String, predicted: String, budget: u64 },
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("malformed model file: {0}")]
    Json(#[from] serde_json::Error),
}

/// A binary relation on `{0, .., n-1}` stored as one bit row per point.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

/// Subsets of a unit are plain relations; containment is the caller's invariant.
pub type EdgeSet = Relation;

impl Relation {
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Relation { n, words, bits: vec![0; n * words] }
    }

    pub fn full(n: usize) -> Self {
        let mut rel = Relation::empty(n);
        for r in 0..n {
            for s in 0..n {
                rel.insert(r, s);
            }
        }
        rel
    }

    pub fn identity(n: usize) -> Self {
        let mut rel = Relation::empty(n);
        for r in 0..n {
            rel.insert(r, r);
        }
        rel
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(n: usize, pairs: I) -> Result<Self, ModelError> {
        let mut rel = Relation::empty(n);
        for (r, s) in pairs {
            if r >= n || s >= n {
                return Err(ModelError::PairOutOfRange(r, s, n));
            }
            rel.insert(r, s);
        }
        Ok(rel)
    }

    pub fn base(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn contains(&self, r: usize, s: usize) -> bool {
        r < self.n && s < self.n && (self.bits[r * self.words + s / 64] >> (s % 64)) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, r: usize, s: usize) {
        self.bits[r * self.words + s / 64] |= 1 << (s % 64);
    }

    #[inline]
    pub fn remove(&mut self, r: usize, s: usize) {
        self.bits[r * self.words + s / 64] &= !(1 << (s % 64));
    }

    pub fn set(&mut self, r: usize, s: usize, value: bool) {
        if value {
            self.insert(r, s)
        } else {
            self.remove(r, s)
        }
    }

    fn row(&self, r: usize) -> &[u64] {
        &self.bits[r * self.words..(r + 1) * self.words]
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    /// Pairs in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |r| (0..self.n).filter(move |&s| self.contains(r, s)).map(move |s| (r, s)))
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.iter().collect()
    }

    /// Points `s` with `(r, s)` in the relation.
    pub fn successors(&self, r: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&s| self.contains(r, s))
    }

    fn zip_with(&self, other: &Relation, f: impl Fn(u64, u64) -> u64) -> Relation {
        assert_eq!(self.n, other.n, "relations over different bases");
        Relation {
            n: self.n,
            words: self.words,
            bits: self.bits.iter().zip(&other.bits).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn union(&self, other: &Relation) -> Relation {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &Relation) -> Relation {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &Relation) -> Relation {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &Relation) -> bool {
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| a & b == 0)
    }

    pub fn transpose(&self) -> Relation {
        let mut out = Relation::empty(self.n);
        for (r, s) in self.iter() {
            out.insert(s, r);
        }
        out
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|(r, s)| format!("({r},{s})")).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// A finite relativized frame with a valuation of the generators.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Model {
    unit: Relation,
    valuation: Vec<Relation>,
}

impl Model {
    /// Builds a model; every valuation entry is cut down to the unit.
    pub fn new(unit: Relation, valuation: Vec<Relation>) -> Self {
        let valuation = valuation.into_iter().map(|v| v.intersection(&unit)).collect();
        Model { unit, valuation }
    }

    /// Like [`Model::new`] but keeps valuation pairs outside the unit, so that
    /// [`validate_model`] can report them.
    pub fn new_unchecked(unit: Relation, valuation: Vec<Relation>) -> Self {
        Model { unit, valuation }
    }

    /// `U = {0..n-1}`, `W = U×U`, all generators empty.
    pub fn full(base: usize, m: usize) -> Self {
        Model::new(Relation::full(base), vec![Relation::empty(base); m])
    }

    pub fn from_pairs(
        base: usize,
        unit: &[(usize, usize)],
        valuation: &[Vec<(usize, usize)>],
    ) -> Result<Self, ModelError> {
        let unit = Relation::from_pairs(base, unit.iter().copied())?;
        let valuation = valuation
            .iter()
            .map(|v| Relation::from_pairs(base, v.iter().copied()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Model::new_unchecked(unit, valuation))
    }

    pub fn base(&self) -> usize {
        self.unit.n
    }

    pub fn unit(&self) -> &Relation {
        &self.unit
    }

    pub fn valuation(&self) -> &[Relation] {
        &self.valuation
    }

    pub fn arity(&self) -> usize {
        self.valuation.len()
    }

    pub fn has_edge(&self, r: usize, s: usize) -> bool {
        self.unit.contains(r, s)
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.unit.pairs()
    }

    pub fn pointed(self, edge: (usize, usize)) -> Result<PointedModel, ModelError> {
        PointedModel::new(self, edge)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ModelFile::from_model(self, None)).expect("model serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self, ModelError> {
        let file: ModelFile = serde_json::from_str(text)?;
        Ok(file.into_model()?.0)
    }
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Model")
            .field("base", &self.base())
            .field("unit", &self.unit)
            .field("valuation", &self.valuation)
            .finish()
    }
}

/// A model with a designated edge of its unit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointedModel {
    pub model: Model,
    pub edge: (usize, usize),
}

impl PointedModel {
    pub fn new(model: Model, edge: (usize, usize)) -> Result<Self, ModelError> {
        if !model.has_edge(edge.0, edge.1) {
            return Err(ModelError::EdgeNotInUnit(edge.0, edge.1));
        }
        Ok(PointedModel { model, edge })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ModelFile::from_model(&self.model, Some(self.edge))).expect("model serializes")
    }

    /// Reads a model file; a file without an `"edge"` field is rejected.
    pub fn from_json_str(text: &str) -> Result<Self, ModelError> {
        let file: ModelFile = serde_json::from_str(text)?;
        let (model, edge) = file.into_model()?;
        let edge = edge.ok_or_else(|| {
            ModelError::Json(serde::de::Error::custom("pointed model needs an \"edge\" field"))
        })?;
        PointedModel::new(model, edge)
    }
}

/// On-disk schema: `{"base": n, "unit": [[r,s],..], "valuation": [[[r,s],..],..]}`
/// with an optional designated `"edge": [r,s]`. Pairs are written sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub base: usize,
    pub unit: Vec<[usize; 2]>,
    #[serde(default)]
    pub valuation: Vec<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge: Option<[usize; 2]>,
}

impl ModelFile {
    pub fn from_model(model: &Model, edge: Option<(usize, usize)>) -> Self {
        let pairs = |rel: &Relation| rel.iter().map(|(r, s)| [r, s]).collect::<Vec<_>>();
        ModelFile {
            base: model.base(),
            unit: pairs(&model.unit),
            valuation: model.valuation.iter().map(pairs).collect(),
            edge: edge.map(|(r, s)| [r, s]),
        }
    }

    pub fn into_model(self) -> Result<(Model, Option<(usize, usize)>), ModelError> {
        let conv = |v: &[[usize; 2]]| v.iter().map(|p| (p[0], p[1])).collect::<Vec<_>>();
        let valuation: Vec<_> = self.valuation.iter().map(|v| conv(v)).collect();
        let model = Model::from_pairs(self.base, &conv(&self.unit), &valuation)?;
        if let Some([r, s]) = self.edge {
            if r >= self.base || s >= self.base {
                return Err(ModelError::PairOutOfRange(r, s, self.base));
            }
        }
        Ok((model, self.edge.map(|p| (p[0], p[1]))))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    MissingLoop(usize),
    MissingReverse(usize, usize),
    ValuationOutsideUnit { var: usize, edge: (usize, usize) },
    Arity { expected: usize, found: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingLoop(u) => write!(f, "reflexivity: ({u},{u}) missing from the unit"),
            Violation::MissingReverse(r, s) => {
                write!(f, "symmetry: ({r},{s}) is in the unit but ({s},{r}) is missing")
            }
            Violation::ValuationOutsideUnit { var, edge } => {
                write!(f, "containment: x{var} contains ({},{}) outside the unit", edge.0, edge.1)
            }
            Violation::Arity { expected, found } => {
                write!(f, "arity: signature has {expected} variable(s), model values {found}")
            }
        }
    }
}

/// Every way in which `model` fails to be an `H`-relativized model for `sig`.
pub fn validate_model(model: &Model, sig: &Signature) -> Vec<Violation> {
    let mut out = Vec::new();
    if model.arity() != sig.m {
        out.push(Violation::Arity { expected: sig.m, found: model.arity() });
    }
    if sig.h.reflexive {
        out.extend((0..model.base()).filter(|&u| !model.has_edge(u, u)).map(Violation::MissingLoop));
    }
    if sig.h.symmetric {
        out.extend(
            model
                .unit
                .iter()
                .filter(|&(r, s)| !model.has_edge(s, r))
                .map(|(r, s)| Violation::MissingReverse(r, s)),
        );
    }
    for (var, rel) in model.valuation.iter().enumerate() {
        out.extend(
            rel.iter()
                .filter(|&(r, s)| !model.has_edge(r, s))
                .map(|edge| Violation::ValuationOutsideUnit { var, edge }),
        );
    }
    out
}

/// Relativized composition `{(r,s) ∈ W : ∃u (r,u) ∈ a, (u,s) ∈ b}`.
pub fn compose(unit: &Relation, a: &Relation, b: &Relation) -> Relation {
    let bt = b.transpose();
    let mut out = Relation::empty(unit.n);
    for (r, s) in unit.iter() {
        if a.row(r).iter().zip(bt.row(s)).any(|(&x, &y)| x & y != 0) {
            out.insert(r, s);
        }
    }
    out
}

/// Relativized converse `{(r,s) ∈ W : (s,r) ∈ a}`.
pub fn converse(unit: &Relation, a: &Relation) -> Relation {
    a.transpose().intersection(unit)
}

/// The edge set denoted by `t` in `model`.
pub fn eval(t: &Term, model: &Model) -> Result<EdgeSet, ModelError> {
    let unit = &model.unit;
    Ok(match t {
        Term::Zero => Relation::empty(unit.n),
        Term::One => unit.clone(),
        Term::Identity => Relation::identity(unit.n).intersection(unit),
        Term::Var(i) => model
            .valuation
            .get(*i)
            .ok_or(ModelError::VariableOutOfRange { index: *i, available: model.arity() })?
            .intersection(unit),
        Term::Complement(a) => unit.difference(&eval(a, model)?),
        Term::Sum(a, b) => eval(a, model)?.union(&eval(b, model)?),
        Term::Product(a, b) => eval(a, model)?.intersection(&eval(b, model)?),
        Term::Composition(a, b) => compose(unit, &eval(a, model)?, &eval(b, model)?),
        Term::Converse(a) => converse(unit, &eval(a, model)?),
    })
}

/// Knobs for the exhaustive model streams.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnumConfig {
    /// Largest base the enumerators will touch.
    pub base_cap: usize,
    /// Largest number of models a single enumeration may produce.
    pub max_models: u64,
    /// Random valuations drawn per unit (besides the two extremes) when
    /// exhaustive valuation enumeration is off.
    pub valuation_samples: usize,
    /// Valuations are enumerated exhaustively up to this base.
    pub exhaustive_valuation_base: usize,
    pub rng_seed: u64,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig {
            base_cap: 5,
            max_models: 1 << 22,
            valuation_samples: 6,
            exhaustive_valuation_base: 2,
            rng_seed: 0x5eed,
        }
    }
}

/// The pairs a unit on `base` points may toggle independently under `h`; each
/// entry is switched on or off as a block.
fn free_blocks(base: usize, h: HSet) -> Vec<Vec<(usize, usize)>> {
    let mut blocks = Vec::new();
    for r in 0..base {
        for s in 0..base {
            if r == s {
                if !h.reflexive {
                    blocks.push(vec![(r, r)]);
                }
            } else if h.symmetric {
                if r < s {
                    blocks.push(vec![(r, s), (s, r)]);
                }
            } else {
                blocks.push(vec![(r, s)]);
            }
        }
    }
    blocks
}

fn unit_from_mask(base: usize, h: HSet, blocks: &[Vec<(usize, usize)>], mask: u64) -> Relation {
    let mut unit = if h.reflexive { Relation::identity(base) } else { Relation::empty(base) };
    for (i, block) in blocks.iter().enumerate() {
        if (mask >> i) & 1 == 1 {
            for &(r, s) in block {
                unit.insert(r, s);
            }
        }
    }
    unit
}

/// Number of `H`-units on `base` points.
pub fn unit_count(base: usize, h: HSet) -> u128 {
    let bits = free_blocks(base, h).len() as u32;
    if bits >= 127 {
        u128::MAX
    } else {
        1u128 << bits
    }
}

fn random_subset(rng: &mut ChaCha8Rng, unit: &Relation) -> Relation {
    let mut out = Relation::empty(unit.n);
    for (r, s) in unit.iter() {
        if rng.gen_bool(0.5) {
            out.insert(r, s);
        }
    }
    out
}

fn valuations_for(unit: &Relation, m: usize, base: usize, cfg: &EnumConfig, unit_index: u64) -> Vec<Vec<Relation>> {
    if m == 0 {
        return vec![Vec::new()];
    }
    let edges = unit.pairs();
    if base <= cfg.exhaustive_valuation_base {
        let bits = edges.len() * m;
        return (0..1u64 << bits)
            .map(|code| {
                (0..m)
                    .map(|i| {
                        let mut rel = Relation::empty(base);
                        for (j, &(r, s)) in edges.iter().enumerate() {
                            if (code >> (i * edges.len() + j)) & 1 == 1 {
                                rel.insert(r, s);
                            }
                        }
                        rel
                    })
                    .collect()
            })
            .collect();
    }
    let mut out = vec![vec![Relation::empty(base); m], vec![unit.clone(); m]];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed ^ (base as u64).rotate_left(32) ^ unit_index);
    for _ in 0..cfg.valuation_samples {
        out.push((0..m).map(|_| random_subset(&mut rng, unit)).collect());
    }
    out
}

/// Predicted number of models [`enumerate_units`] yields for one base.
pub fn predicted_models(base: usize, sig: &Signature, cfg: &EnumConfig) -> u128 {
    let units = unit_count(base, sig.h);
    if sig.m == 0 {
        return units;
    }
    if base <= cfg.exhaustive_valuation_base {
        // upper bound: every unit valued as if it were full
        let bits = (base * base * sig.m) as u32;
        units.saturating_mul(1u128.checked_shl(bits).unwrap_or(u128::MAX))
    } else {
        units.saturating_mul(2 + cfg.valuation_samples as u128)
    }
}

/// Every `H`-unit on `base` points, each paired with the configured valuations,
/// in a fixed order.
pub fn enumerate_units(
    base: usize,
    sig: &Signature,
    cfg: &EnumConfig,
) -> Result<impl Iterator<Item = Model>, ModelError> {
    if base > cfg.base_cap {
        return Err(ModelError::BaseTooLarge { base, cap: cfg.base_cap });
    }
    let predicted = predicted_models(base, sig, cfg);
    if predicted > cfg.max_models as u128 {
        return Err(ModelError::BudgetExceeded {
            what: format!("base {base} with {sig}"),
            predicted: predicted.to_string(),
            budget: cfg.max_models,
        });
    }
    let h = sig.h;
    let m = sig.m;
    let blocks = free_blocks(base, h);
    let total = 1u64 << blocks.len();
    let cfg = cfg.clone();
    Ok((0..total).flat_map(move |mask| {
        let unit = unit_from_mask(base, h, &blocks, mask);
        valuations_for(&unit, m, base, &cfg, mask)
            .into_iter()
            .map(move |val| Model::new(unit.clone(), val))
    }))
}

/// A uniformly random `H`-unit on `base` points with a random valuation.
pub fn random_model<R: Rng>(rng: &mut R, base: usize, sig: &Signature) -> Model {
    let mut unit = if sig.h.reflexive { Relation::identity(base) } else { Relation::empty(base) };
    for block in free_blocks(base, sig.h) {
        if rng.gen_bool(0.5) {
            for (r, s) in block {
                unit.insert(r, s);
            }
        }
    }
    let valuation = (0..sig.m)
        .map(|_| {
            let mut rel = Relation::empty(base);
            for (r, s) in unit.iter() {
                if rng.gen_bool(0.5) {
                    rel.insert(r, s);
                }
            }
            rel
        })
        .collect();
    Model::new(unit, valuation)
}

/// The first pointed model, by base and then enumeration order, whose edge
/// satisfies `t`; edges are tried in lexicographic order.
pub fn find_model(
    t: &Term,
    sig: &Signature,
    max_base: usize,
    cfg: &EnumConfig,
) -> Result<Option<PointedModel>, ModelError> {
    sig.check(t)?;
    for base in 1..=max_base {
        for model in enumerate_units(base, sig, cfg)? {
            let value = eval(t, &model)?;
            let first = value.iter().next();
            if let Some(edge) = first {
                return Ok(Some(PointedModel { model, edge }));
            }
        }
    }
    Ok(None)
}

/// Outcome of a bounded validity check.
#[derive(Debug, Clone)]
pub enum Validity {
    /// No counterexample among all models with base up to `max_base`. This is
    /// a bounded claim, not a proof.
    Bounded { max_base: usize, models_checked: u64 },
    Counterexample(PointedModel),
}

impl Validity {
    pub fn is_ok(&self) -> bool {
        matches!(self, Validity::Bounded { .. })
    }
}

/// The first model edge on which `lhs` and `rhs` differ, if any.
pub fn counterexample_in(lhs: &Term, rhs: &Term, model: &Model) -> Result<Option<(usize, usize)>, ModelError> {
    let a = eval(lhs, model)?;
    let b = eval(rhs, model)?;
    let diff = a.difference(&b).union(&b.difference(&a));
    let first = diff.iter().next();
    Ok(first)
}

/// Searches all models up to `max_base` for an edge separating `lhs` and `rhs`.
pub fn check_validity(
    lhs: &Term,
    rhs: &Term,
    sig: &Signature,
    max_base: usize,
    cfg: &EnumConfig,
) -> Result<Validity, ModelError> {
    sig.check(lhs)?;
    sig.check(rhs)?;
    let mut checked = 0u64;
    for base in 1..=max_base {
        for model in enumerate_units(base, sig, cfg)? {
            checked += 1;
            if let Some(edge) = counterexample_in(lhs, rhs, &model)? {
                return Ok(Validity::Counterexample(PointedModel { model, edge }));
            }
        }
    }
    Ok(Validity::Bounded { max_base, models_checked: checked })
}
