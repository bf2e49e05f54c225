//! End-to-end acceptance checks.
//!
//! Each criterion runs with pinned sizes, seeds and time limits and returns a
//! [`CriterionResult`] whose [`line`](CriterionResult::line) is the one-line
//! summary printed by the test suite and by `relfree selftest`.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::free_zero::{is_atomic, tables, verify_tables, Atom, VerifyConfig};
use crate::model::{enumerate_units, eval, find_model, random_model, EnumConfig, Model, PointedModel, Relation};
use crate::normal_form::{check_partition, dnf, enum_forms, refine, to_term, DEFAULT_FORM_BUDGET};
use crate::term::{builtin, random_term, HSet, Signature};
use crate::witness::{certify, witness_nonatomicity, WitnessError, WitnessOptions};

/// Pinned sizes and limits.
pub mod limits {
    pub const SEED: u64 = 0x5eed;

    pub const TABLES_SECS: u64 = 60;
    pub const TABLES_EXHAUSTIVE_UNITS: usize = 75;
    pub const TABLES_RANDOM_UNITS: usize = 1000;

    pub const ATOMS_SECS: u64 = 10;
    pub const ATOMS_MAX_BASE: usize = 4;

    pub const PARTITION_SECS: u64 = 120;
    pub const PARTITION_MODELS: usize = 200;
    pub const PARTITION_MAX_BASE: usize = 5;
    pub const PARTITION_MAX_DEGREE: usize = 3;
    pub const PARTITION_EXTENSIONAL_MAX_BASE: usize = 3;
    pub const PARTITION_EXTENSIONAL_SIZE: usize = 128;

    pub const DNF_SECS: u64 = 300;
    pub const DNF_TERMS: usize = 100;
    pub const DNF_TERM_DEPTH: usize = 3;
    pub const DNF_MODELS_PER_TERM: usize = 20;
    pub const DNF_MAX_BASE: usize = 4;

    pub const WITNESS_SECS: u64 = 600;
    pub const WITNESS_QS: [usize; 2] = [1, 2];

    pub const SEARCH_SECS: u64 = 10;
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_secs: f64,
    pub limit_secs: u64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {} {}: {} ({:.2}s, limit {}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed_secs,
            self.limit_secs
        )
    }
}

fn timed(
    id: u8,
    name: &'static str,
    limit_secs: u64,
    body: impl FnOnce() -> Result<(bool, String), String>,
) -> CriterionResult {
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed();
    let in_time = elapsed <= Duration::from_secs(limit_secs);
    let (passed, mut detail) = match outcome {
        Ok((ok, detail)) => (ok && in_time, detail),
        Err(e) => (false, format!("error: {e}")),
    };
    if !in_time {
        detail.push_str("; over the time limit");
    }
    CriterionResult { id, name, passed, detail, elapsed_secs: elapsed.as_secs_f64(), limit_secs }
}

fn rs() -> Signature {
    Signature::new(0, HSet::RS)
}

/// The published converse table has four fixpoints, the composition table
/// contains `m3;m3 = e2+m3`, and no checked model refutes an entry.
pub fn tables_criterion() -> CriterionResult {
    timed(1, "free-algebra tables", limits::TABLES_SECS, || {
        let fz = tables();
        let fixpoints = Atom::ALL.iter().filter(|a| fz.converse[a.index()] == **a).count();
        let m3m3 = fz.composition[Atom::M3.index()][Atom::M3.index()];
        let m3m3_ok = m3m3.atoms() == [Atom::E2, Atom::M3];
        let cfg = VerifyConfig::default();
        let report = verify_tables(&fz, &cfg).map_err(|e| e.to_string())?;
        let refuted: Vec<String> = report.entries.iter().filter(|e| !e.ok).map(|e| e.entry.to_string()).collect();
        let sizes_ok = report.exhaustive_units == limits::TABLES_EXHAUSTIVE_UNITS
            && report.random_units == limits::TABLES_RANDOM_UNITS;
        let ok = fixpoints == 4 && m3m3_ok && sizes_ok && refuted.is_empty();
        Ok((
            ok,
            format!(
                "{fixpoints} converse fixpoints, m3;m3 = {m3m3}, {}/{} equations hold over {} + {} units{}",
                report.ok_count(),
                report.entries.len(),
                report.exhaustive_units,
                report.random_units,
                if refuted.is_empty() { String::new() } else { format!(", refuted: {}", refuted.join(" ")) }
            ),
        ))
    })
}

/// Exactly the four atoms, which evaluate to a partition of the unit on every
/// reflexive-symmetric model up to base 4.
pub fn atoms_criterion() -> CriterionResult {
    timed(2, "atomicity of the 0-generated algebra", limits::ATOMS_SECS, || {
        let atomicity = is_atomic(&tables());
        let atoms_ok = atomicity.atomic && atomicity.atoms == Atom::ALL;
        let terms = Atom::ALL.map(Atom::term);
        let cfg = EnumConfig::default();
        let mut models = 0;
        let mut bad = 0;
        for base in 1..=limits::ATOMS_MAX_BASE {
            for model in enumerate_units(base, &rs(), &cfg).map_err(|e| e.to_string())? {
                models += 1;
                let values: Vec<Relation> =
                    terms.iter().map(|t| eval(t, &model)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
                let mut seen = Relation::empty(model.base());
                let mut disjoint = true;
                for v in &values {
                    disjoint &= v.is_disjoint(&seen);
                    seen = seen.union(v);
                }
                if !disjoint || &seen != model.unit() {
                    bad += 1;
                }
            }
        }
        Ok((
            atoms_ok && bad == 0,
            format!(
                "atomic = {}, atoms {:?}, partition fails on {bad} of {models} models",
                atomicity.atomic,
                atomicity.atoms.iter().map(|a| a.name()).collect::<Vec<_>>()
            ),
        ))
    })
}

/// Unique forms on random models, and the rendered degree-1 universe for
/// `m = 0` partitions every small unit.
pub fn partition_criterion() -> CriterionResult {
    timed(3, "partition of the unit by normal forms", limits::PARTITION_SECS, || {
        let mut rng = ChaCha8Rng::seed_from_u64(limits::SEED);
        let mut failures = Vec::new();
        for i in 0..limits::PARTITION_MODELS {
            let m = i % 3;
            let h = HSet::ALL[(i / 3) % 4];
            let base = rng.gen_range(1..=limits::PARTITION_MAX_BASE);
            let model = random_model(&mut rng, base, &Signature::new(m, h));
            for n in 0..=limits::PARTITION_MAX_DEGREE {
                let report = check_partition(&model, n, None).map_err(|e| e.to_string())?;
                if !report.ok() {
                    failures.push(format!("model {i} degree {n}"));
                }
            }
        }
        let universe = enum_forms(0, 1, DEFAULT_FORM_BUDGET).map_err(|e| e.to_string())?;
        let cfg = EnumConfig::default();
        let mut units = 0;
        for h in HSet::ALL {
            for base in 1..=limits::PARTITION_EXTENSIONAL_MAX_BASE {
                for model in enumerate_units(base, &Signature::new(0, h), &cfg).map_err(|e| e.to_string())? {
                    units += 1;
                    for n in 0..=1 {
                        let report = check_partition(&model, n, Some(DEFAULT_FORM_BUDGET)).map_err(|e| e.to_string())?;
                        if !report.ok() {
                            failures.push(format!("extensional degree {n} on a base-{base} unit"));
                        }
                    }
                }
            }
        }
        let size_ok = universe.len() == limits::PARTITION_EXTENSIONAL_SIZE;
        Ok((
            failures.is_empty() && size_ok,
            format!(
                "{} random models x degrees 0..={}, {} rendered forms on {units} units, {} failures{}",
                limits::PARTITION_MODELS,
                limits::PARTITION_MAX_DEGREE,
                universe.len(),
                failures.len(),
                failures.first().map(|f| format!(", first {f}")).unwrap_or_default()
            ),
        ))
    })
}

/// Evaluations of the members of `dnf(t)`: rendered terms when the universe
/// is small enough to list, the edges realizing a member otherwise.
fn dnf_agrees(t: &crate::term::Term, sig: &Signature, model: &Model) -> Result<bool, String> {
    let d = dnf(t, sig).map_err(|e| e.to_string())?;
    let value = eval(t, model).map_err(|e| e.to_string())?;
    if sig.m == 0 && d.degree <= 1 {
        let mut seen = Relation::empty(model.base());
        for f in d.materialize(DEFAULT_FORM_BUDGET).map_err(|e| e.to_string())? {
            let part = eval(&to_term(&f, 0, DEFAULT_FORM_BUDGET).map_err(|e| e.to_string())?, model)
                .map_err(|e| e.to_string())?;
            if !part.is_disjoint(&seen) {
                return Ok(false);
            }
            seen = seen.union(&part);
        }
        Ok(seen == value)
    } else {
        Ok(d.edges_in(model) == value)
    }
}

/// `eval(t)` is the disjoint union of the members of `dnf(t)`, and `refine`
/// partitions the degree-1 forms over the degree-0 ones.
pub fn dnf_criterion() -> CriterionResult {
    timed(4, "disjunctive normal forms", limits::DNF_SECS, || {
        let mut rng = ChaCha8Rng::seed_from_u64(limits::SEED);
        let mut failures = Vec::new();
        let mut checks = 0;
        for i in 0..limits::DNF_TERMS {
            let m = i % 2;
            let t = random_term(&mut rng, m, limits::DNF_TERM_DEPTH);
            for _ in 0..limits::DNF_MODELS_PER_TERM {
                let h = HSet::ALL[rng.gen_range(0..4)];
                let sig = Signature::new(m, h);
                let base = rng.gen_range(1..=limits::DNF_MAX_BASE);
                let model = random_model(&mut rng, base, &sig);
                checks += 1;
                if !dnf_agrees(&t, &sig, &model)? {
                    failures.push(t.render());
                    break;
                }
            }
        }
        let f0 = enum_forms(0, 0, DEFAULT_FORM_BUDGET).map_err(|e| e.to_string())?;
        let f1 = enum_forms(0, 1, DEFAULT_FORM_BUDGET).map_err(|e| e.to_string())?;
        let mut refined = Vec::new();
        for f in f0.forms() {
            let parts = refine(f, 0, DEFAULT_FORM_BUDGET).map_err(|e| e.to_string())?;
            refined.extend(parts);
        }
        refined.sort();
        let partition_ok = refined.len() == f1.len() && refined.windows(2).all(|w| w[0] != w[1]) && refined == f1.forms();
        Ok((
            failures.is_empty() && partition_ok,
            format!(
                "{} terms on {checks} model checks, {} disagreements{}; refine splits {} degree-0 forms into {} of {} degree-1 forms",
                limits::DNF_TERMS,
                failures.len(),
                failures.first().map(|t| format!(", first {t}")).unwrap_or_default(),
                f0.len(),
                refined.len(),
                f1.len()
            ),
        ))
    })
}

/// The seed for the witness runs: the full 3-point model pointed at `(0,1)`.
pub fn witness_seed(m: usize) -> PointedModel {
    PointedModel::new(Model::full(3, m), (0, 1)).expect("(0,1) is an edge of the full model")
}

/// The non-atomic configurations.
pub const WITNESS_CONFIGS: [(usize, HSet); 4] = [(0, HSet::EMPTY), (0, HSet::R), (0, HSet::S), (1, HSet::RS)];

/// One certificate per configuration and `q`, each re-verified from its JSON.
pub fn witness_criterion(m: usize, h: HSet) -> CriterionResult {
    let name = match (m, h) {
        (0, HSet::EMPTY) => "witnesses m=0 H={}",
        (0, HSet::R) => "witnesses m=0 H={R}",
        (0, HSet::S) => "witnesses m=0 H={S}",
        (1, HSet::RS) => "witnesses m=1 H={R,S}",
        _ => "witnesses",
    };
    timed(5, name, limits::WITNESS_SECS, || {
        let sig = Signature::new(m, h);
        let mut parts = Vec::new();
        let mut ok = true;
        for q in limits::WITNESS_QS {
            let cert = certify(&witness_seed(m), q, &sig, &WitnessOptions::default()).map_err(|e| e.to_string())?;
            let back = crate::witness::Certificate::from_json_str(&cert.to_canonical_json()).map_err(|e| e.to_string())?;
            let check = back.verify();
            let ladder = (0..=q).all(|j| {
                let (x, y) = back.zigzag.edge(j);
                back.graph.edges.iter().any(|e| (e.from, e.to) == (x, y) && e.depth == j)
            });
            let pairs_ok = back.pairs.len() == q + 1 && back.pairs.iter().all(|p| p.son != p.daughter);
            let this = check.ok() && ladder && pairs_ok && back.stability_round <= q + 3;
            ok &= this;
            parts.push(format!(
                "q={q}: {} nodes, stable at {}, {}",
                back.stats.nodes,
                back.stability_round,
                if this {
                    "verified".to_string()
                } else {
                    check.failures().iter().map(|c| format!("{} failed", c.name)).collect::<Vec<_>>().join(", ")
                }
            ));
        }
        Ok((ok, parts.join("; ")))
    })
}

/// `m = 0`, `H = {R,S}` is refused as the atomic case.
pub fn atomic_guard_criterion() -> CriterionResult {
    timed(6, "atomic-case guard", limits::SEARCH_SECS, || {
        let err = witness_nonatomicity(&witness_seed(0), 1, &rs(), &WitnessOptions::default())
            .err()
            .ok_or("a witness was produced")?;
        let ok = matches!(err.root(), WitnessError::AtomicCase) && err.to_string().contains("atomic case");
        Ok((ok, format!("refused with \"{err}\"")))
    })
}

/// `t` first becomes satisfiable at base 3.
pub fn search_criterion() -> CriterionResult {
    timed(7, "satisfiability of t", limits::SEARCH_SECS, || {
        let t = builtin("t").map_err(|e| e.to_string())?;
        let cfg = EnumConfig::default();
        let small = find_model(&t, &rs(), 2, &cfg).map_err(|e| e.to_string())?;
        let found = find_model(&t, &rs(), 3, &cfg).map_err(|e| e.to_string())?;
        let base = found.as_ref().map(|pm| pm.model.base());
        Ok((
            small.is_none() && base == Some(3),
            format!(
                "no model up to base 2: {}, first model has base {}",
                small.is_none(),
                base.map_or("none".to_string(), |b| b.to_string())
            ),
        ))
    })
}

/// Every criterion, in order.
pub fn run_all() -> Vec<CriterionResult> {
    let mut out = vec![tables_criterion(), atoms_criterion(), partition_criterion(), dnf_criterion()];
    out.extend(WITNESS_CONFIGS.iter().map(|&(m, h)| witness_criterion(m, h)));
    out.push(atomic_guard_criterion());
    out.push(search_criterion());
    out
}
