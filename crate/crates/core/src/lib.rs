//! Computing with relativized relation algebras.
//!
//! * [`term`] and [`parser`]: the term language.
//! * [`model`]: finite `H`-relativized set algebras, evaluation and bounded search.
//! * [`normal_form`]: hash-consed normal forms, the form realized by an edge,
//!   projection, refinement and disjunctive normal forms.
//! * [`free_zero`]: the four-atom description of the 0-generated free algebra of
//!   weakly associative algebras, with semantic verification.
//! * [`witness`]: labeled-graph construction producing non-atomicity certificates.
//! * [`acceptance`]: the end-to-end checks also exposed through the CLI `selftest`.

pub mod parser;
pub mod term;
pub mod model;
pub mod normal_form;
pub mod free_zero;
pub mod witness;
pub mod acceptance;

pub use model::{eval, EdgeSet, Model, PointedModel, Relation};
pub use normal_form::{dnf, form_of_edge, Form};
pub use term::{big_product, builtin, random_term, HSet, Signature, Term};
