//! One line per acceptance criterion. Run with
//! `cargo test -p relfree-core --test acceptance -- --nocapture --test-threads=1`.

use relfree::acceptance::{self, CriterionResult};
use relfree::term::HSet;

fn report(r: CriterionResult) {
    println!("{}", r.line());
    assert!(r.passed, "{}", r.line());
}

#[test]
fn criterion_1_free_algebra_tables() {
    report(acceptance::tables_criterion());
}

#[test]
fn criterion_2_atoms_of_the_zero_generated_algebra() {
    report(acceptance::atoms_criterion());
}

#[test]
fn criterion_3_partition_by_normal_forms() {
    report(acceptance::partition_criterion());
}

#[test]
fn criterion_4_disjunctive_normal_forms() {
    report(acceptance::dnf_criterion());
}

#[test]
fn criterion_5_witness_m0_empty() {
    report(acceptance::witness_criterion(0, HSet::EMPTY));
}

#[test]
fn criterion_5_witness_m0_reflexive() {
    report(acceptance::witness_criterion(0, HSet::R));
}

#[test]
fn criterion_5_witness_m0_symmetric() {
    report(acceptance::witness_criterion(0, HSet::S));
}

#[test]
fn criterion_5_witness_m1_reflexive_symmetric() {
    report(acceptance::witness_criterion(1, HSet::RS));
}

#[test]
fn criterion_6_atomic_case_guard() {
    report(acceptance::atomic_guard_criterion());
}

#[test]
fn criterion_7_satisfiability_of_t() {
    report(acceptance::search_criterion());
}
