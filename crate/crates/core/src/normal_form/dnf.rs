//! Disjunctive normal forms of terms.
//!
//! The set of forms below a term is kept intensionally, as a membership
//! predicate that follows the structure of the term. Asking whether a given
//! form belongs to it never needs a universe; listing all members does, and
//! is subject to the universe budget.

use std::fmt;

use serde_json::json;

use super::edge::EdgeForms;
use super::{enum_forms, Form, FormError};
use crate::model::{EdgeSet, Model, Relation};
use crate::term::{Signature, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symbol {
    Identity,
    Var(usize),
}

/// A set of forms of one degree, described by its membership test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FormSet {
    Empty,
    All,
    /// Forms whose color contains the symbol.
    Symbol(Symbol),
    Union(Box<FormSet>, Box<FormSet>),
    Intersection(Box<FormSet>, Box<FormSet>),
    Complement(Box<FormSet>),
    /// Forms whose projection to degree `from` lies in `inner`.
    Lift { inner: Box<FormSet>, from: usize },
    /// Forms with a composition entry `(a, b)` where `a` lies in the first set
    /// and `b` in the second.
    Composition(Box<FormSet>, Box<FormSet>),
    /// Forms with a converse entry in the set.
    Converse(Box<FormSet>),
}

impl FormSet {
    pub fn contains(&self, f: &Form) -> bool {
        match self {
            FormSet::Empty => false,
            FormSet::All => true,
            FormSet::Symbol(Symbol::Identity) => f.is_white(),
            FormSet::Symbol(Symbol::Var(i)) => f.color().has_var(*i),
            FormSet::Union(a, b) => a.contains(f) || b.contains(f),
            FormSet::Intersection(a, b) => a.contains(f) && b.contains(f),
            FormSet::Complement(a) => !a.contains(f),
            FormSet::Lift { inner, from } => {
                inner.contains(&f.project_to(*from).expect("lifted sets are queried at a higher degree"))
            }
            FormSet::Composition(a, b) => f.sub().iter().any(|(x, y)| a.contains(x) && b.contains(y)),
            FormSet::Converse(a) => f.conv().iter().any(|x| a.contains(x)),
        }
    }

    /// Sets that only look at colors read the same at every degree.
    fn degree_free(&self) -> bool {
        match self {
            FormSet::Empty | FormSet::All | FormSet::Symbol(_) => true,
            FormSet::Union(a, b) | FormSet::Intersection(a, b) => a.degree_free() && b.degree_free(),
            FormSet::Complement(a) => a.degree_free(),
            _ => false,
        }
    }

    fn lift(self, from: usize, to: usize) -> FormSet {
        if from == to || self.degree_free() {
            self
        } else {
            FormSet::Lift { inner: Box::new(self), from }
        }
    }
}

/// The forms below a term: `t` equals the sum of the degree-`degree` forms in `set`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dnf {
    pub m: usize,
    pub degree: usize,
    pub set: FormSet,
}

impl Dnf {
    pub fn contains(&self, f: &Form) -> bool {
        f.degree() == self.degree && self.set.contains(f)
    }

    /// Lists the members by filtering the universe of the dnf's degree.
    pub fn materialize(&self, budget: u64) -> Result<Vec<Form>, FormError> {
        let universe = enum_forms(self.m, self.degree, budget)?;
        Ok(universe.forms().iter().filter(|f| self.set.contains(f)).cloned().collect())
    }

    /// Edges of `model` whose form of degree `self.degree` is a member.
    pub fn edges_in(&self, model: &Model) -> EdgeSet {
        let table = EdgeForms::compute(model, self.degree);
        let mut out = Relation::empty(model.base());
        for (&(r, s), f) in table.edges().iter().zip(table.level(self.degree)) {
            if self.set.contains(f) {
                out.insert(r, s);
            }
        }
        out
    }

    pub fn to_json(&self, budget: u64) -> Result<serde_json::Value, FormError> {
        let forms = self.materialize(budget)?;
        Ok(json!({
            "degree": self.degree,
            "count": forms.len(),
            "forms": forms.iter().map(Form::to_inline_json).collect::<Vec<_>>(),
        }))
    }
}

impl fmt::Display for Dnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dnf of degree {} over m = {}", self.degree, self.m)
    }
}

/// The degree and form set of `t`, following the structure of the term.
pub fn dnf(t: &Term, sig: &Signature) -> Result<Dnf, FormError> {
    if let Some(i) = t.max_var().filter(|&i| i >= sig.m) {
        return Err(FormError::VariableOutOfRange { index: i, m: sig.m });
    }
    let (degree, set) = build(t);
    Ok(Dnf { m: sig.m, degree, set })
}

fn build(t: &Term) -> (usize, FormSet) {
    match t {
        Term::Zero => (0, FormSet::Empty),
        Term::One => (0, FormSet::All),
        Term::Identity => (0, FormSet::Symbol(Symbol::Identity)),
        Term::Var(i) => (0, FormSet::Symbol(Symbol::Var(*i))),
        Term::Complement(a) => {
            let (d, s) = build(a);
            (d, FormSet::Complement(Box::new(s)))
        }
        Term::Sum(a, b) => binary(a, b, |x, y| FormSet::Union(x, y)),
        Term::Product(a, b) => binary(a, b, |x, y| FormSet::Intersection(x, y)),
        Term::Composition(a, b) => {
            let (d, set) = binary(a, b, |x, y| FormSet::Composition(x, y));
            (d + 1, set)
        }
        Term::Converse(a) => {
            let (d, s) = build(a);
            (d + 1, FormSet::Converse(Box::new(s)))
        }
    }
}

fn binary(a: &Term, b: &Term, op: impl Fn(Box<FormSet>, Box<FormSet>) -> FormSet) -> (usize, FormSet) {
    let (da, sa) = build(a);
    let (db, sb) = build(b);
    let d = da.max(db);
    (d, op(Box::new(sa.lift(da, d)), Box::new(sb.lift(db, d))))
}
