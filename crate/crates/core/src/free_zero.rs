//! The 0-generated free weakly associative algebra as a 16-element algebra
//! over the atoms `e1 = 1'.-(0';0')`, `e2 = 1'.(0';0')`, `m2 = 0'.-(0';0')`
//! and `m3 = 0'.(0';0')`.
//!
//! [`tables`] returns the converse and composition tables as published.
//! [`verify_tables`] checks every entry against all reflexive-symmetric units
//! up to a base bound plus a seeded sample of larger ones, and reports what
//! it actually observed for each entry.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::model::{compose, converse, enumerate_units, eval, random_model, EnumConfig, Model, ModelError, PointedModel};
use crate::term::{builtin, HSet, Signature, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Atom {
    E1,
    E2,
    M2,
    M3,
}

impl Atom {
    pub const ALL: [Atom; 4] = [Atom::E1, Atom::E2, Atom::M2, Atom::M3];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Atom::E1 => "e1",
            Atom::E2 => "e2",
            Atom::M2 => "m2",
            Atom::M3 => "m3",
        }
    }

    pub fn term(self) -> Term {
        builtin(self.name()).expect("atoms are builtins")
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An element of the algebra: a set of atoms, bit `i` for `Atom::ALL[i]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct AtomSet(pub u8);

impl AtomSet {
    pub const EMPTY: AtomSet = AtomSet(0);
    pub const TOP: AtomSet = AtomSet(0b1111);

    pub fn of(atoms: &[Atom]) -> AtomSet {
        AtomSet(atoms.iter().fold(0, |acc, a| acc | 1 << a.index()))
    }

    pub fn contains(self, a: Atom) -> bool {
        self.0 >> a.index() & 1 == 1
    }

    pub fn atoms(self) -> Vec<Atom> {
        Atom::ALL.into_iter().filter(|&a| self.contains(a)).collect()
    }

    pub fn union(self, o: AtomSet) -> AtomSet {
        AtomSet(self.0 | o.0)
    }

    pub fn intersection(self, o: AtomSet) -> AtomSet {
        AtomSet(self.0 & o.0)
    }

    pub fn complement(self) -> AtomSet {
        AtomSet(!self.0 & 0b1111)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset(self, o: AtomSet) -> bool {
        self.0 & !o.0 == 0
    }

    /// The sum of the atoms' defining terms (`0` when empty).
    pub fn term(self) -> Term {
        crate::term::big_sum(self.atoms().into_iter().map(Atom::term))
    }
}

impl fmt::Display for AtomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("0");
        }
        let names: Vec<_> = self.atoms().iter().map(|a| a.name()).collect();
        f.write_str(&names.join("+"))
    }
}

impl Serialize for AtomSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.atoms())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FreeZero {
    pub converse: [Atom; 4],
    pub composition: [[AtomSet; 4]; 4],
}

/// The published tables.
pub fn tables() -> FreeZero {
    use Atom::*;
    let s = AtomSet::of;
    FreeZero {
        converse: [E1, E2, M2, M3],
        composition: [
            [s(&[E1]), s(&[]), s(&[]), s(&[])],
            [s(&[]), s(&[E2]), s(&[M2]), s(&[M3])],
            [s(&[]), s(&[M2]), s(&[]), s(&[])],
            [s(&[]), s(&[M3]), s(&[]), s(&[E2, M3])],
        ],
    }
}

impl FreeZero {
    pub fn identity(&self) -> AtomSet {
        AtomSet::of(&[Atom::E1, Atom::E2])
    }

    pub fn compose(&self, a: AtomSet, b: AtomSet) -> AtomSet {
        let mut out = AtomSet::EMPTY;
        for x in a.atoms() {
            for y in b.atoms() {
                out = out.union(self.composition[x.index()][y.index()]);
            }
        }
        out
    }

    pub fn converse_of(&self, a: AtomSet) -> AtomSet {
        AtomSet::of(&a.atoms().iter().map(|x| self.converse[x.index()]).collect::<Vec<_>>())
    }

    pub fn elements(&self) -> Vec<AtomSet> {
        (0..16).map(AtomSet).collect()
    }

    /// Aligned text rendering of both tables.
    pub fn render_text(&self) -> String {
        let mut out = String::from("converse\n");
        for a in Atom::ALL {
            out.push_str(&format!("  {a}~ = {}\n", self.converse[a.index()]));
        }
        out.push_str("composition\n");
        out.push_str(&format!("  {:>4}", ";"));
        for b in Atom::ALL {
            out.push_str(&format!(" {:>6}", b.name()));
        }
        out.push('\n');
        for a in Atom::ALL {
            out.push_str(&format!("  {:>4}", a.name()));
            for b in Atom::ALL {
                out.push_str(&format!(" {:>6}", self.composition[a.index()][b.index()].to_string()));
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FreeZeroError {
    #[error("term mentions variable x{0}; only closed terms can be evaluated here")]
    OpenTerm(usize),
}

/// Interprets a closed term in the 16-element algebra.
pub fn eval_in_free0(t: &Term, fz: &FreeZero) -> Result<AtomSet, FreeZeroError> {
    Ok(match t {
        Term::Zero => AtomSet::EMPTY,
        Term::One => AtomSet::TOP,
        Term::Identity => fz.identity(),
        Term::Var(i) => return Err(FreeZeroError::OpenTerm(*i)),
        Term::Complement(a) => eval_in_free0(a, fz)?.complement(),
        Term::Sum(a, b) => eval_in_free0(a, fz)?.union(eval_in_free0(b, fz)?),
        Term::Product(a, b) => eval_in_free0(a, fz)?.intersection(eval_in_free0(b, fz)?),
        Term::Composition(a, b) => fz.compose(eval_in_free0(a, fz)?, eval_in_free0(b, fz)?),
        Term::Converse(a) => fz.converse_of(eval_in_free0(a, fz)?),
    })
}

/// Which table entry an equation comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Entry {
    Composition { left: Atom, right: Atom },
    Converse { atom: Atom },
}

impl Entry {
    /// All 16 composition entries followed by the 4 converse entries.
    pub fn all() -> Vec<Entry> {
        let mut v: Vec<Entry> = Atom::ALL
            .iter()
            .flat_map(|&left| Atom::ALL.iter().map(move |&right| Entry::Composition { left, right }))
            .collect();
        v.extend(Atom::ALL.iter().map(|&atom| Entry::Converse { atom }));
        v
    }

    pub fn lhs(self) -> Term {
        match self {
            Entry::Composition { left, right } => left.term().compose(right.term()),
            Entry::Converse { atom } => atom.term().converse(),
        }
    }

    pub fn table_value(self, fz: &FreeZero) -> AtomSet {
        match self {
            Entry::Composition { left, right } => fz.composition[left.index()][right.index()],
            Entry::Converse { atom } => AtomSet::of(&[fz.converse[atom.index()]]),
        }
    }
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entry::Composition { left, right } => write!(f, "{left};{right}"),
            Entry::Converse { atom } => write!(f, "{atom}~"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VerifyConfig {
    /// Every reflexive-symmetric unit up to this base is checked.
    pub max_base: usize,
    pub random_units: usize,
    pub random_min_base: usize,
    pub random_max_base: usize,
    pub rng_seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { max_base: 4, random_units: 1000, random_min_base: 5, random_max_base: 6, rng_seed: 0x5eed }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EntryReport {
    pub entry: Entry,
    pub equation: String,
    pub table: AtomSet,
    /// Atoms met by the left-hand side in some checked model.
    pub observed: AtomSet,
    /// The equation held in every checked model.
    pub ok: bool,
    /// The atoms met by the left-hand side are exactly the table's atoms.
    pub overlap_ok: bool,
    /// The first model (in checking order) refuting the entry.
    #[serde(serialize_with = "serialize_counterexample")]
    pub counterexample: Option<PointedModel>,
}

fn serialize_counterexample<S: Serializer>(pm: &Option<PointedModel>, s: S) -> Result<S::Ok, S::Error> {
    match pm {
        None => s.serialize_none(),
        Some(pm) => pm.to_json().serialize(s),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TablesReport {
    pub config: VerifyConfig,
    pub exhaustive_units: usize,
    pub random_units: usize,
    pub entries: Vec<EntryReport>,
}

impl TablesReport {
    pub fn ok_count(&self) -> usize {
        self.entries.iter().filter(|e| e.ok).count()
    }

    pub fn all_ok(&self) -> bool {
        self.ok_count() == self.entries.len()
    }

    pub fn overlap_ok_count(&self) -> usize {
        self.entries.iter().filter(|e| e.overlap_ok).count()
    }

    pub fn render_text(&self) -> String {
        let mut out = format!(
            "checked {} exhaustive units (base <= {}) and {} random units (base {}..={})\n",
            self.exhaustive_units,
            self.config.max_base,
            self.random_units,
            self.config.random_min_base,
            self.config.random_max_base
        );
        for e in &self.entries {
            let status = match (e.ok, e.overlap_ok) {
                (true, _) => "ok".to_string(),
                (false, true) => format!("REFUTED as an equation (meets exactly {})", e.observed),
                (false, false) => format!("REFUTED (meets {})", e.observed),
            };
            out.push_str(&format!("  {:<8} = {:<8} {}\n", e.entry.to_string(), e.table.to_string(), status));
            if let Some(pm) = &e.counterexample {
                out.push_str(&format!("           counterexample: {}\n", pm.to_json()));
            }
        }
        out.push_str(&format!(
            "{}/{} equations hold, {}/{} entries meet exactly their listed atoms\n",
            self.ok_count(),
            self.entries.len(),
            self.overlap_ok_count(),
            self.entries.len()
        ));
        out
    }
}

struct Checker<'a> {
    fz: &'a FreeZero,
    atom_terms: [Term; 4],
    entries: Vec<EntryReport>,
}

impl Checker<'_> {
    fn check(&mut self, model: &Model) -> Result<(), ModelError> {
        let unit = model.unit();
        let values = self.atom_terms.clone().map(|t| eval(&t, model));
        let values: Vec<_> = values.into_iter().collect::<Result<_, _>>()?;
        for rep in &mut self.entries {
            let lhs = match rep.entry {
                Entry::Composition { left, right } => compose(unit, &values[left.index()], &values[right.index()]),
                Entry::Converse { atom } => converse(unit, &values[atom.index()]),
            };
            for a in Atom::ALL {
                if !lhs.intersection(&values[a.index()]).is_empty() {
                    rep.observed = rep.observed.union(AtomSet::of(&[a]));
                }
            }
            let table = rep.entry.table_value(self.fz);
            let rhs = table
                .atoms()
                .iter()
                .fold(crate::model::Relation::empty(model.base()), |acc, a| acc.union(&values[a.index()]));
            if lhs != rhs {
                rep.ok = false;
                if rep.counterexample.is_none() {
                    let diff = lhs.difference(&rhs).union(&rhs.difference(&lhs));
                    let edge = diff.iter().next().expect("sets differ");
                    rep.counterexample = Some(PointedModel::new(model.clone(), edge)?);
                }
            }
        }
        Ok(())
    }
}

/// Checks the 20 table equations on reflexive-symmetric units.
pub fn verify_tables(fz: &FreeZero, cfg: &VerifyConfig) -> Result<TablesReport, ModelError> {
    let sig = Signature::new(0, HSet::RS);
    let mut checker = Checker {
        fz,
        atom_terms: Atom::ALL.map(Atom::term),
        entries: Entry::all()
            .into_iter()
            .map(|entry| EntryReport {
                entry,
                equation: format!("{} = {}", entry.lhs().render(), entry.table_value(fz).term().render()),
                table: entry.table_value(fz),
                observed: AtomSet::EMPTY,
                ok: true,
                overlap_ok: false,
                counterexample: None,
            })
            .collect(),
    };
    let enum_cfg = EnumConfig { base_cap: cfg.max_base.max(1), ..EnumConfig::default() };
    let mut exhaustive = 0;
    for base in 1..=cfg.max_base {
        for model in enumerate_units(base, &sig, &enum_cfg)? {
            checker.check(&model)?;
            exhaustive += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    for _ in 0..cfg.random_units {
        let base = rng.gen_range(cfg.random_min_base..=cfg.random_max_base);
        checker.check(&random_model(&mut rng, base, &sig))?;
    }
    for rep in &mut checker.entries {
        rep.overlap_ok = rep.observed == rep.table;
    }
    Ok(TablesReport { config: *cfg, exhaustive_units: exhaustive, random_units: cfg.random_units, entries: checker.entries })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Atomicity {
    pub atomic: bool,
    pub atoms: Vec<Atom>,
}

/// Finds the minimal nonzero elements of the 16-element lattice and checks
/// that every nonzero element lies above one of them.
pub fn is_atomic(fz: &FreeZero) -> Atomicity {
    let elements = fz.elements();
    let nonzero: Vec<AtomSet> = elements.iter().copied().filter(|e| !e.is_empty()).collect();
    let minimal: Vec<AtomSet> = nonzero
        .iter()
        .copied()
        .filter(|&e| !nonzero.iter().any(|&d| d != e && d.is_subset(e)))
        .collect();
    let atomic = nonzero.iter().all(|&e| minimal.iter().any(|&a| a.is_subset(e)));
    let atoms = minimal.iter().filter_map(|a| a.atoms().first().copied().filter(|_| a.len() == 1)).collect();
    Atomicity { atomic, atoms }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_entries() {
        let fz = tables();
        let s = AtomSet::of;
        assert_eq!(fz.composition[0][0], s(&[Atom::E1]));
        assert_eq!(fz.composition[3][3], s(&[Atom::E2, Atom::M3]));
        assert_eq!(fz.converse[Atom::M2.index()], Atom::M2);
    }

    #[test]
    fn evaluation_examples() {
        let fz = tables();
        assert_eq!(eval_in_free0(&Term::One, &fz).unwrap(), AtomSet::TOP);
        let dd = Term::parse("0';0'").unwrap();
        assert_eq!(eval_in_free0(&dd, &fz).unwrap(), AtomSet::of(&[Atom::E2, Atom::M3]));
        assert_eq!(eval_in_free0(&builtin("e2").unwrap(), &fz).unwrap(), AtomSet::of(&[Atom::E2]));
        assert_eq!(eval_in_free0(&Term::var(0), &fz), Err(FreeZeroError::OpenTerm(0)));
    }

    #[test]
    fn atomicity() {
        let a = is_atomic(&tables());
        assert!(a.atomic);
        assert_eq!(a.atoms, Atom::ALL.to_vec());
    }

    #[test]
    fn atom_set_display() {
        assert_eq!(AtomSet::of(&[Atom::E2, Atom::M3]).to_string(), "e2+m3");
        assert_eq!(AtomSet::EMPTY.to_string(), "0");
        assert_eq!(AtomSet::EMPTY.term(), Term::Zero);
    }
}

