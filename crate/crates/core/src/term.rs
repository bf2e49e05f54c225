//! Terms over the relation-algebra signature.
//!
//! A [`Term`] is a plain tree over the Boolean operations, composition,
//! converse and the identity constant. Diversity `0'` is not a separate node:
//! it is the complement of the identity, and the parser and printer treat the
//! two spellings as the same tree.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::parser;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Zero,
    One,
    Identity,
    Var(usize),
    Complement(Box<Term>),
    Sum(Box<Term>, Box<Term>),
    Product(Box<Term>, Box<Term>),
    Composition(Box<Term>, Box<Term>),
    Converse(Box<Term>),
}

impl Term {
    pub fn var(i: usize) -> Term {
        Term::Var(i)
    }

    /// `0'`, the complement of the identity.
    pub fn diversity() -> Term {
        Term::Identity.not()
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Term {
        Term::Complement(Box::new(self))
    }

    pub fn sum(self, rhs: Term) -> Term {
        Term::Sum(Box::new(self), Box::new(rhs))
    }

    pub fn meet(self, rhs: Term) -> Term {
        Term::Product(Box::new(self), Box::new(rhs))
    }

    pub fn compose(self, rhs: Term) -> Term {
        Term::Composition(Box::new(self), Box::new(rhs))
    }

    pub fn converse(self) -> Term {
        Term::Converse(Box::new(self))
    }

    pub fn parse(text: &str) -> Result<Term, parser::ParseError> {
        parser::parse(text)
    }

    /// Height of the tree; leaves have depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Term::Zero | Term::One | Term::Identity | Term::Var(_) => 1,
            Term::Complement(a) | Term::Converse(a) => 1 + a.depth(),
            Term::Sum(a, b) | Term::Product(a, b) | Term::Composition(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Zero | Term::One | Term::Identity | Term::Var(_) => 1,
            Term::Complement(a) | Term::Converse(a) => 1 + a.size(),
            Term::Sum(a, b) | Term::Product(a, b) | Term::Composition(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    fn kind_rank(&self) -> u8 {
        match self {
            Term::Zero => 0,
            Term::One => 1,
            Term::Identity => 2,
            Term::Var(_) => 3,
            Term::Complement(_) => 4,
            Term::Sum(..) => 5,
            Term::Product(..) => 6,
            Term::Composition(..) => 7,
            Term::Converse(_) => 8,
        }
    }

    /// Largest variable index occurring in the term, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Term::Zero | Term::One | Term::Identity => None,
            Term::Var(i) => Some(*i),
            Term::Complement(a) | Term::Converse(a) => a.max_var(),
            Term::Sum(a, b) | Term::Product(a, b) | Term::Composition(a, b) => {
                a.max_var().max(b.max_var())
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.max_var().is_none()
    }

    pub fn render(&self) -> String {
        self.to_string()
    }
}

// Canonical total order: structural depth, then node kind, then children
// left to right. Used wherever a set of terms has to be turned into a
// sequence reproducibly.
impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        self.depth()
            .cmp(&other.depth())
            .then_with(|| self.kind_rank().cmp(&other.kind_rank()))
            .then_with(|| match (self, other) {
                (Term::Var(a), Term::Var(b)) => a.cmp(b),
                (Term::Complement(a), Term::Complement(b)) | (Term::Converse(a), Term::Converse(b)) => {
                    a.cmp(b)
                }
                (Term::Sum(a1, a2), Term::Sum(b1, b2))
                | (Term::Product(a1, a2), Term::Product(b1, b2))
                | (Term::Composition(a1, a2), Term::Composition(b1, b2)) => {
                    a1.cmp(b1).then_with(|| a2.cmp(b2))
                }
                _ => Ordering::Equal,
            })
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Binding strength used by the printer; higher binds tighter.
fn precedence(t: &Term) -> u8 {
    match t {
        Term::Sum(..) => 1,
        Term::Product(..) => 2,
        // compositions always print their own parentheses
        Term::Composition(..) => 4,
        Term::Complement(a) if **a == Term::Identity => 5,
        Term::Complement(_) => 3,
        _ => 5,
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Zero => write!(f, "0"),
            Term::One => write!(f, "1"),
            Term::Identity => write!(f, "1'"),
            Term::Var(i) => write!(f, "x{i}"),
            Term::Complement(a) if **a == Term::Identity => write!(f, "0'"),
            Term::Complement(a) => {
                // `-` takes a unary operand: complements and atoms print bare
                if precedence(a) >= 3 {
                    write!(f, "-{a}")
                } else {
                    write!(f, "-({a})")
                }
            }
            Term::Converse(a) => {
                if precedence(a) >= 4 {
                    write!(f, "{a}~")
                } else {
                    write!(f, "({a})~")
                }
            }
            Term::Composition(a, b) => {
                write!(f, "(")?;
                write_operand(f, a, 3, false)?;
                write!(f, ";")?;
                write_operand(f, b, 3, false)?;
                write!(f, ")")
            }
            Term::Product(a, b) => {
                write_operand(f, a, 2, false)?;
                write!(f, " . ")?;
                write_operand(f, b, 2, true)
            }
            Term::Sum(a, b) => {
                write_operand(f, a, 1, false)?;
                write!(f, " + ")?;
                write_operand(f, b, 1, true)
            }
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, t: &Term, level: u8, right: bool) -> fmt::Result {
    let p = precedence(t);
    // binary operators associate to the left, so an equal-precedence right
    // operand needs parentheses
    if p < level || (right && p == level) {
        write!(f, "({t})")
    } else {
        write!(f, "{t}")
    }
}

impl FromStr for Term {
    type Err = parser::ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parser::parse(s)
    }
}

impl Serialize for Term {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.render())
    }
}

impl<'de> Deserialize<'de> for Term {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parser::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Product of a finite set of terms in canonical order; the empty product is `1`.
pub fn big_product<I: IntoIterator<Item = Term>>(terms: I) -> Term {
    let set: BTreeSet<Term> = terms.into_iter().collect();
    let mut it = set.into_iter();
    match it.next() {
        None => Term::One,
        Some(first) => it.fold(first, Term::meet),
    }
}

/// Sum of a finite set of terms in canonical order; the empty sum is `0`.
pub fn big_sum<I: IntoIterator<Item = Term>>(terms: I) -> Term {
    let set: BTreeSet<Term> = terms.into_iter().collect();
    let mut it = set.into_iter();
    match it.next() {
        None => Term::Zero,
        Some(first) => it.fold(first, Term::sum),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("unknown builtin term `{0}` (expected one of t, e1, e2, m2, m3, diversity)")]
    UnknownBuiltin(String),
    #[error("variable x{index} out of range for a signature with m = {m}")]
    VariableOutOfRange { index: usize, m: usize },
    #[error("invalid H `{0}` (expected one of \"\", R, S, RS)")]
    InvalidH(String),
}

pub const BUILTIN_NAMES: [&str; 6] = ["t", "e1", "e2", "m2", "m3", "diversity"];

/// The named constants used by the free-algebra and witness modules.
pub fn builtin(name: &str) -> Result<Term, TermError> {
    let div = Term::diversity;
    let div_div = || div().compose(div());
    let t = match name {
        "diversity" => div(),
        "e1" => Term::Identity.meet(div_div().not()),
        "e2" => Term::Identity.meet(div_div()),
        "m2" => div().meet(div_div().not()),
        "m3" => div().meet(div_div()),
        "t" => {
            let sym = || div().meet(div().converse());
            sym().meet(sym().compose(sym()))
        }
        other => return Err(TermError::UnknownBuiltin(other.to_string())),
    };
    Ok(t)
}

/// The subset H of {R, S} of closure properties required of units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct HSet {
    pub reflexive: bool,
    pub symmetric: bool,
}

impl HSet {
    pub const EMPTY: HSet = HSet { reflexive: false, symmetric: false };
    pub const R: HSet = HSet { reflexive: true, symmetric: false };
    pub const S: HSet = HSet { reflexive: false, symmetric: true };
    pub const RS: HSet = HSet { reflexive: true, symmetric: true };
    pub const ALL: [HSet; 4] = [HSet::EMPTY, HSet::R, HSet::S, HSet::RS];
}

impl fmt::Display for HSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.reflexive {
            write!(f, "R")?;
        }
        if self.symmetric {
            write!(f, "S")?;
        }
        Ok(())
    }
}

impl FromStr for HSet {
    type Err = TermError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "" | "{}" | "none" => Ok(HSet::EMPTY),
            "R" => Ok(HSet::R),
            "S" => Ok(HSet::S),
            "RS" | "SR" => Ok(HSet::RS),
            other => Err(TermError::InvalidH(other.to_string())),
        }
    }
}

impl Serialize for HSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for HSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Number of generators together with the unit properties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub m: usize,
    #[serde(rename = "H")]
    pub h: HSet,
}

impl Signature {
    pub fn new(m: usize, h: HSet) -> Self {
        Signature { m, h }
    }

    /// Rejects terms mentioning a variable outside `x0..x{m-1}`.
    pub fn check(&self, t: &Term) -> Result<(), TermError> {
        match t.max_var() {
            Some(index) if index >= self.m => Err(TermError::VariableOutOfRange { index, m: self.m }),
            _ => Ok(()),
        }
    }
}

/// A random term of depth at most `max_depth` over `x0..x{m-1}`.
pub fn random_term<R: rand::Rng>(rng: &mut R, m: usize, max_depth: usize) -> Term {
    let leaf = |rng: &mut R| match rng.gen_range(0..3 + usize::from(m > 0) * 3) {
        0 => Term::Zero,
        1 => Term::One,
        2 => Term::Identity,
        _ => Term::Var(rng.gen_range(0..m.max(1))),
    };
    if max_depth <= 1 || rng.gen_bool(0.25) {
        return leaf(rng);
    }
    let sub = |rng: &mut R| random_term(rng, m, max_depth - 1);
    match rng.gen_range(0..5) {
        0 => sub(rng).not(),
        1 => sub(rng).converse(),
        2 => sub(rng).sum(sub(rng)),
        3 => sub(rng).meet(sub(rng)),
        _ => sub(rng).compose(sub(rng)),
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m={} H={{{}}}", self.m, self.h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_identity_and_composition() {
        assert_eq!(Term::Identity.render(), "1'");
        assert_eq!(Term::Identity.compose(Term::Identity).render(), "(1';1')");
        assert_eq!(Term::diversity().render(), "0'");
    }

    #[test]
    fn builtin_t_renders_as_documented() {
        let t = builtin("t").unwrap();
        assert_eq!(t.render(), "0' . 0'~ . ((0' . 0'~);(0' . 0'~))");
    }

    #[test]
    fn builtin_atoms() {
        assert_eq!(builtin("e1").unwrap().render(), "1' . -(0';0')");
        assert_eq!(builtin("m3").unwrap().render(), "0' . (0';0')");
        assert_eq!(builtin("diversity").unwrap(), Term::Identity.not());
        assert!(matches!(builtin("e7"), Err(TermError::UnknownBuiltin(_))));
    }

    #[test]
    fn right_nested_products_keep_parentheses() {
        let t = Term::var(0).meet(Term::var(1).meet(Term::var(2)));
        assert_eq!(t.render(), "x0 . (x1 . x2)");
        let s = Term::var(0).meet(Term::var(1)).meet(Term::var(2));
        assert_eq!(s.render(), "x0 . x1 . x2");
        assert_eq!(Term::var(0).sum(Term::var(1)).not().render(), "-(x0 + x1)");
        assert_eq!(Term::var(0).not().converse().render(), "(-x0)~");
        assert_eq!(Term::var(0).converse().not().render(), "-x0~");
    }

    #[test]
    fn big_product_empty_and_singleton() {
        assert_eq!(big_product(Vec::new()), Term::One);
        assert_eq!(big_product(vec![Term::Identity]), Term::Identity);
        let a = Term::var(0);
        let b = Term::Identity.not();
        assert_eq!(
            big_product(vec![a.clone(), b.clone()]),
            big_product(vec![b, a])
        );
    }

    #[test]
    fn canonical_order_depth_first() {
        let shallow = Term::var(5);
        let deep = Term::Identity.not();
        assert!(shallow < deep);
        assert!(Term::Identity < Term::var(0));
        assert!(Term::var(0) < Term::var(1));
    }

    #[test]
    fn signature_rejects_out_of_range_variables() {
        let sig = Signature::new(1, HSet::RS);
        assert!(sig.check(&Term::var(0)).is_ok());
        assert_eq!(
            sig.check(&Term::var(1).meet(Term::Identity)),
            Err(TermError::VariableOutOfRange { index: 1, m: 1 })
        );
    }

    #[test]
    fn h_parsing() {
        assert_eq!("".parse::<HSet>().unwrap(), HSet::EMPTY);
        assert_eq!("SR".parse::<HSet>().unwrap(), HSet::RS);
        assert_eq!(HSet::RS.to_string(), "RS");
        assert!("T".parse::<HSet>().is_err());
    }
}
