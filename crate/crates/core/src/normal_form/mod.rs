//! Normal forms of the relation-algebra signature.
//!
//! A form of degree 0 fixes, for the identity and each generator, whether an
//! edge lies below it or below its complement (its *color*). A form of degree
//! `n+1` additionally fixes which compositions `σ1;σ2` and which converses `σ˘`
//! of degree-`n` forms it lies below. Only the positive entries are stored;
//! every entry not listed is negative.
//!
//! Forms are hash-consed: structurally equal forms share one allocation, so
//! equality is a pointer comparison. Each form also carries a content digest
//! that orders forms reproducibly across runs and names them in serialized
//! artifacts.

mod dnf;
mod edge;
mod universe;

pub use dnf::{dnf, Dnf, FormSet};
pub use edge::{
    check_partition, form_of_edge, neighbors, satisfies, EdgeForms, ExtensionalReport, PartitionReport,
};
pub use universe::{
    enum_forms, predicted_universe_log2, refine, to_term, universes, FormUniverse, DEFAULT_FORM_BUDGET,
};

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, LazyLock, OnceLock};

use dashmap::DashMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};
use thiserror::Error;

use crate::term::Term;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error("a degree-0 form cannot have composition or converse entries")]
    EntriesAtDegreeZero,
    #[error("entry of degree {found} in a form of degree {degree} (expected {})", degree - 1)]
    EntryDegree { degree: usize, found: usize },
    #[error("degree-0 forms have no projection")]
    ProjectDegreeZero,
    #[error("cannot project a form of degree {from} to degree {to}")]
    ProjectUpward { from: usize, to: usize },
    #[error("universe of degree {degree} for m = {m} has about 2^{log2_size:.1} forms, budget is {budget}")]
    BudgetExceeded { m: usize, degree: usize, log2_size: f64, budget: u64 },
    #[error("variable x{index} out of range for m = {m}")]
    VariableOutOfRange { index: usize, m: usize },
    #[error("edge ({0},{1}) is not in the unit")]
    EdgeNotInUnit(usize, usize),
    #[error("color symbol `{0}` not recognised")]
    BadColor(String),
    #[error("form record {0} is missing from the bundle")]
    MissingRecord(String),
    #[error("form record {claimed} hashes to {actual}")]
    DigestMismatch { claimed: String, actual: String },
    #[error(transparent)]
    Model(#[from] ModelErrorWrapper),
}

/// `ModelError` is not `Clone`; forms only need its message.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{0}")]
pub struct ModelErrorWrapper(pub String);

impl From<crate::model::ModelError> for FormError {
    fn from(e: crate::model::ModelError) -> Self {
        FormError::Model(ModelErrorWrapper(e.to_string()))
    }
}

/// Subset of `{1', x0, .., x(m-1)}`: bit 0 is the identity, bit `i+1` is `x_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Color(pub u64);

impl Color {
    pub const MAX_VARS: usize = 63;

    pub fn white(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn has_var(self, i: usize) -> bool {
        (self.0 >> (i + 1)) & 1 == 1
    }

    pub fn with_identity(self, on: bool) -> Color {
        if on {
            Color(self.0 | 1)
        } else {
            Color(self.0 & !1)
        }
    }

    pub fn with_var(self, i: usize, on: bool) -> Color {
        if on {
            Color(self.0 | 1 << (i + 1))
        } else {
            Color(self.0 & !(1 << (i + 1)))
        }
    }

    /// All `2^(m+1)` colors for `m` generators, in increasing bit order.
    pub fn all(m: usize) -> impl Iterator<Item = Color> {
        (0..1u64 << (m + 1)).map(Color)
    }

    pub fn symbols(self) -> Vec<String> {
        let mut out = Vec::new();
        if self.white() {
            out.push("1'".to_string());
        }
        let mut bits = self.0 >> 1;
        let mut i = 0;
        while bits != 0 {
            if bits & 1 == 1 {
                out.push(format!("x{i}"));
            }
            bits >>= 1;
            i += 1;
        }
        out
    }

    pub fn from_symbols<S: AsRef<str>>(symbols: &[S]) -> Result<Color, FormError> {
        let mut c = Color(0);
        for s in symbols {
            let s = s.as_ref();
            if s == "1'" {
                c = c.with_identity(true);
            } else if let Some(i) = s.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
                if i >= Color::MAX_VARS {
                    return Err(FormError::BadColor(s.to_string()));
                }
                c = c.with_var(i, true);
            } else {
                return Err(FormError::BadColor(s.to_string()));
            }
        }
        Ok(c)
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.symbols().join(","))
    }
}

pub type Digest = [u8; 32];

pub struct FormNode {
    degree: usize,
    color: Color,
    sub: Box<[(Form, Form)]>,
    conv: Box<[Form]>,
    digest: Digest,
    projection: OnceLock<Form>,
}

/// An interned normal form.
#[derive(Clone)]
pub struct Form(Arc<FormNode>);

static INTERNER: LazyLock<DashMap<Digest, Form>> = LazyLock::new(DashMap::new);

fn digest_of(degree: usize, color: Color, sub: &[(Form, Form)], conv: &[Form]) -> Digest {
    let mut h = Sha256::new();
    h.update(b"form/v1");
    h.update((degree as u64).to_le_bytes());
    h.update(color.0.to_le_bytes());
    h.update((sub.len() as u64).to_le_bytes());
    for (a, b) in sub {
        h.update(a.digest());
        h.update(b.digest());
    }
    h.update((conv.len() as u64).to_le_bytes());
    for c in conv {
        h.update(c.digest());
    }
    h.finalize().into()
}

impl Form {
    /// Interns the form with the given color and positive entries. Entries are
    /// sorted and deduplicated; they must all have degree `degree - 1`.
    pub fn new<S, C>(degree: usize, color: Color, sub: S, conv: C) -> Result<Form, FormError>
    where
        S: IntoIterator<Item = (Form, Form)>,
        C: IntoIterator<Item = Form>,
    {
        let mut sub: Vec<(Form, Form)> = sub.into_iter().collect();
        let mut conv: Vec<Form> = conv.into_iter().collect();
        if degree == 0 {
            if !sub.is_empty() || !conv.is_empty() {
                return Err(FormError::EntriesAtDegreeZero);
            }
        } else {
            let bad = sub
                .iter()
                .flat_map(|(a, b)| [a, b])
                .chain(conv.iter())
                .find(|f| f.degree() + 1 != degree);
            if let Some(f) = bad {
                return Err(FormError::EntryDegree { degree, found: f.degree() });
            }
        }
        sub.sort();
        sub.dedup();
        conv.sort();
        conv.dedup();
        Ok(Form::intern(degree, color, sub, conv))
    }

    pub fn color_form(color: Color) -> Form {
        Form::intern(0, color, Vec::new(), Vec::new())
    }

    fn intern(degree: usize, color: Color, sub: Vec<(Form, Form)>, conv: Vec<Form>) -> Form {
        let digest = digest_of(degree, color, &sub, &conv);
        if let Some(found) = INTERNER.get(&digest) {
            return found.clone();
        }
        INTERNER
            .entry(digest)
            .or_insert_with(|| {
                Form(Arc::new(FormNode {
                    degree,
                    color,
                    sub: sub.into_boxed_slice(),
                    conv: conv.into_boxed_slice(),
                    digest,
                    projection: OnceLock::new(),
                }))
            })
            .clone()
    }

    pub fn degree(&self) -> usize {
        self.0.degree
    }

    pub fn color(&self) -> Color {
        self.0.color
    }

    pub fn is_white(&self) -> bool {
        self.0.color.white()
    }

    /// Positive composition entries, sorted.
    pub fn sub(&self) -> &[(Form, Form)] {
        &self.0.sub
    }

    /// Positive converse entries, sorted.
    pub fn conv(&self) -> &[Form] {
        &self.0.conv
    }

    pub fn has_pair(&self, a: &Form, b: &Form) -> bool {
        self.0.sub.binary_search_by(|(x, y)| x.cmp(a).then_with(|| y.cmp(b))).is_ok()
    }

    pub fn has_conv(&self, a: &Form) -> bool {
        self.0.conv.binary_search(a).is_ok()
    }

    pub fn digest(&self) -> &Digest {
        &self.0.digest
    }

    pub fn hash_hex(&self) -> String {
        hex::encode(self.0.digest)
    }

    pub fn short_id(&self) -> String {
        hex::encode(&self.0.digest[..6])
    }

    /// The unique converse entry, when there is exactly one.
    pub fn conv_f(&self) -> Option<Form> {
        match &*self.0.conv {
            [only] => Some(only.clone()),
            _ => None,
        }
    }

    /// The unique white form occurring as a right factor of a composition entry.
    pub fn right_r(&self) -> Option<Form> {
        unique(self.0.sub.iter().map(|(_, b)| b).filter(|f| f.is_white()))
    }

    /// The unique white form occurring as a left factor of a composition entry.
    pub fn left_l(&self) -> Option<Form> {
        unique(self.0.sub.iter().map(|(a, _)| a).filter(|f| f.is_white()))
    }

    /// The degree `n-1` form below which a degree-`n` form lies.
    pub fn project(&self) -> Result<Form, FormError> {
        if self.degree() == 0 {
            return Err(FormError::ProjectDegreeZero);
        }
        Ok(self.0.projection.get_or_init(|| self.compute_projection()).clone())
    }

    fn compute_projection(&self) -> Form {
        if self.degree() == 1 {
            return Form::color_form(self.color());
        }
        let sub = self
            .sub()
            .iter()
            .map(|(a, b)| (a.project().expect("degree >= 1"), b.project().expect("degree >= 1")));
        let conv = self.conv().iter().map(|c| c.project().expect("degree >= 1"));
        Form::new(self.degree() - 1, self.color(), sub, conv).expect("projection keeps degrees uniform")
    }

    /// Projects down to degree `to`.
    pub fn project_to(&self, to: usize) -> Result<Form, FormError> {
        if to > self.degree() {
            return Err(FormError::ProjectUpward { from: self.degree(), to });
        }
        let mut f = self.clone();
        while f.degree() > to {
            f = f.project()?;
        }
        Ok(f)
    }

    /// Whether two forms can overlap: one must be a projection of the other.
    pub fn compatible(&self, other: &Form) -> bool {
        let (lo, hi) = if self.degree() <= other.degree() { (self, other) } else { (other, self) };
        hi.project_to(lo.degree()).map(|p| &p == lo).unwrap_or(false)
    }

    /// Nested JSON record with children inline.
    pub fn to_inline_json(&self) -> serde_json::Value {
        serde_json::json!({
            "degree": self.degree(),
            "color": self.color().symbols(),
            "sub": self.sub().iter().map(|(a, b)| vec![a.to_inline_json(), b.to_inline_json()]).collect::<Vec<_>>(),
            "conv": self.conv().iter().map(Form::to_inline_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_inline_json(value: &serde_json::Value) -> Result<Form, FormError> {
        let rec: InlineRecord = serde_json::from_value(value.clone())
            .map_err(|e| FormError::Model(ModelErrorWrapper(e.to_string())))?;
        rec.build()
    }
}

#[derive(Deserialize)]
struct InlineRecord {
    degree: usize,
    color: Vec<String>,
    #[serde(default)]
    sub: Vec<(serde_json::Value, serde_json::Value)>,
    #[serde(default)]
    conv: Vec<serde_json::Value>,
}

impl InlineRecord {
    fn build(self) -> Result<Form, FormError> {
        let sub = self
            .sub
            .iter()
            .map(|(a, b)| Ok((Form::from_inline_json(a)?, Form::from_inline_json(b)?)))
            .collect::<Result<Vec<_>, FormError>>()?;
        let conv = self.conv.iter().map(Form::from_inline_json).collect::<Result<Vec<_>, _>>()?;
        Form::new(self.degree, Color::from_symbols(&self.color)?, sub, conv)
    }
}

fn unique<'a>(mut it: impl Iterator<Item = &'a Form>) -> Option<Form> {
    let first = it.next()?;
    if it.all(|f| f == first) {
        Some(first.clone())
    } else {
        None
    }
}

impl PartialEq for Form {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for Form {}

impl Hash for Form {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write(&self.0.digest[..8]);
    }
}

/// Degree, then color, then content digest.
impl Ord for Form {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.color().cmp(&other.color()))
            .then_with(|| self.0.digest.cmp(&other.0.digest))
    }
}

impl PartialOrd for Form {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{}{}#{}", self.degree(), self.color(), self.short_id())
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One entry of a [`FormBundle`]: children are referenced by digest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormRecord {
    pub degree: usize,
    pub color: Vec<String>,
    pub sub: Vec<[String; 2]>,
    pub conv: Vec<String>,
}

/// A set of forms serialized by content hash, sharing common sub-forms.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormBundle {
    pub forms: BTreeMap<String, FormRecord>,
}

impl FormBundle {
    /// Adds `f` and everything it mentions; returns its hash.
    pub fn add(&mut self, f: &Form) -> String {
        let key = f.hash_hex();
        if !self.forms.contains_key(&key) {
            let sub = f.sub().iter().map(|(a, b)| [self.add(a), self.add(b)]).collect();
            let conv = f.conv().iter().map(|c| self.add(c)).collect();
            self.forms.insert(
                key.clone(),
                FormRecord { degree: f.degree(), color: f.color().symbols(), sub, conv },
            );
        }
        key
    }

    /// Rebuilds the form named `key`, checking every digest on the way.
    pub fn get(&self, key: &str) -> Result<Form, FormError> {
        let mut cache = HashMap::new();
        self.resolve(key, &mut cache)
    }

    /// Rebuilds every record; returns how many there are.
    pub fn check_all(&self) -> Result<usize, FormError> {
        let mut cache = HashMap::new();
        for key in self.forms.keys() {
            self.resolve(key, &mut cache)?;
        }
        Ok(self.forms.len())
    }

    fn resolve(&self, key: &str, cache: &mut HashMap<String, Form>) -> Result<Form, FormError> {
        if let Some(f) = cache.get(key) {
            return Ok(f.clone());
        }
        let rec = self.forms.get(key).ok_or_else(|| FormError::MissingRecord(key.to_string()))?;
        let sub = rec
            .sub
            .iter()
            .map(|[a, b]| Ok((self.resolve(a, cache)?, self.resolve(b, cache)?)))
            .collect::<Result<Vec<_>, FormError>>()?;
        let conv = rec.conv.iter().map(|c| self.resolve(c, cache)).collect::<Result<Vec<_>, _>>()?;
        let f = Form::new(rec.degree, Color::from_symbols(&rec.color)?, sub, conv)?;
        if f.hash_hex() != key {
            return Err(FormError::DigestMismatch { claimed: key.to_string(), actual: f.hash_hex() });
        }
        cache.insert(key.to_string(), f.clone());
        Ok(f)
    }
}

/// Color literal term: the meet over `{1', x0, ..}` of each symbol or its complement.
pub fn color_term(color: Color, m: usize) -> Term {
    let id = if color.white() { Term::Identity } else { Term::diversity() };
    let vars = (0..m).map(|i| if color.has_var(i) { Term::var(i) } else { Term::var(i).not() });
    crate::term::big_product(std::iter::once(id).chain(vars))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn white() -> Form {
        Form::color_form(Color(1))
    }

    fn black() -> Form {
        Form::color_form(Color(0))
    }

    #[test]
    fn interning_gives_pointer_equality() {
        let a = Form::new(1, Color(0), vec![(white(), black())], vec![black()]).unwrap();
        let b = Form::new(1, Color(0), vec![(white(), black()), (white(), black())], vec![black()]).unwrap();
        assert_eq!(a, b);
        assert!(Arc::ptr_eq(&a.0, &b.0));
        assert_ne!(a, black());
    }

    #[test]
    fn degree_invariants() {
        assert_eq!(
            Form::new(0, Color(0), vec![(white(), black())], vec![]),
            Err(FormError::EntriesAtDegreeZero)
        );
        let one = Form::new(1, Color(0), vec![], vec![black()]).unwrap();
        assert_eq!(
            Form::new(1, Color(0), vec![], vec![one]),
            Err(FormError::EntryDegree { degree: 1, found: 1 })
        );
    }

    #[test]
    fn partial_maps_on_degree_zero() {
        for f in [white(), black()] {
            assert!(f.conv_f().is_none());
            assert!(f.right_r().is_none());
            assert!(f.left_l().is_none());
            assert_eq!(f.project(), Err(FormError::ProjectDegreeZero));
        }
    }

    #[test]
    fn right_and_left_factors() {
        let f = Form::new(1, Color(0), vec![(white(), black()), (black(), white()), (black(), black())], vec![])
            .unwrap();
        assert_eq!(f.left_l(), Some(white()));
        assert_eq!(f.right_r(), Some(white()));
        assert_eq!(f.conv_f(), None);
        let g = Form::new(1, Color(0), vec![(black(), black())], vec![white(), black()]).unwrap();
        assert_eq!(g.left_l(), None);
        assert_eq!(g.conv_f(), None);
    }

    #[test]
    fn color_symbols_round_trip() {
        let c = Color(0b1011);
        assert_eq!(c.symbols(), vec!["1'", "x0", "x2"]);
        assert_eq!(Color::from_symbols(&c.symbols()).unwrap(), c);
        assert!(Color::from_symbols(&["y"]).is_err());
    }

    #[test]
    fn bundle_round_trip_checks_digests() {
        let f = Form::new(1, Color(0), vec![(white(), black())], vec![black()]).unwrap();
        let mut bundle = FormBundle::default();
        let key = bundle.add(&f);
        assert_eq!(bundle.forms.len(), 3);
        assert_eq!(bundle.get(&key).unwrap(), f);
        let text = serde_json::to_string(&bundle).unwrap();
        let back: FormBundle = serde_json::from_str(&text).unwrap();
        assert_eq!(back.get(&key).unwrap(), f);

        let mut tampered = bundle.clone();
        tampered.forms.get_mut(&key).unwrap().conv.clear();
        assert!(matches!(tampered.get(&key), Err(FormError::DigestMismatch { .. })));
    }

    #[test]
    fn inline_json_round_trip() {
        let f = Form::new(1, Color(2), vec![(white(), black())], vec![]).unwrap();
        let v = f.to_inline_json();
        assert_eq!(v["color"], serde_json::json!(["x0"]));
        assert_eq!(Form::from_inline_json(&v).unwrap(), f);
    }

    #[test]
    fn color_terms() {
        assert_eq!(color_term(Color(1), 0).render(), "1'");
        assert_eq!(color_term(Color(0), 1).render(), "0' . -x0");
    }
}
