//! Forms realized by the edges of a finite model.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use super::{enum_forms, predicted_universe_log2, to_term, Color, Form, FormError};
use crate::model::{eval, EdgeSet, Model, PointedModel, Relation};

/// The forms of every edge of a model, for all degrees up to a bound.
#[derive(Debug, Clone)]
pub struct EdgeForms {
    edges: Vec<(usize, usize)>,
    index: HashMap<(usize, usize), usize>,
    levels: Vec<Vec<Form>>,
}

pub(crate) fn edge_color(model: &Model, r: usize, s: usize) -> Color {
    let mut c = Color(0).with_identity(r == s);
    for (i, rel) in model.valuation().iter().enumerate() {
        if rel.contains(r, s) {
            c = c.with_var(i, true);
        }
    }
    c
}

impl EdgeForms {
    pub fn compute(model: &Model, max_degree: usize) -> EdgeForms {
        let unit = model.unit();
        let edges = unit.pairs();
        let index: HashMap<(usize, usize), usize> = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let out: Vec<Vec<usize>> = (0..model.base()).map(|r| unit.successors(r).collect()).collect();
        // For each edge: (index of (r,w), index of (w,s)) over all middles w.
        let splits: Vec<Vec<(usize, usize)>> = edges
            .iter()
            .map(|&(r, s)| {
                out[r]
                    .iter()
                    .filter(|&&w| unit.contains(w, s))
                    .map(|&w| (index[&(r, w)], index[&(w, s)]))
                    .collect()
            })
            .collect();
        let reverse: Vec<Option<usize>> = edges.iter().map(|&(r, s)| index.get(&(s, r)).copied()).collect();

        let mut levels = Vec::with_capacity(max_degree + 1);
        let colors: Vec<Color> = edges.iter().map(|&(r, s)| edge_color(model, r, s)).collect();
        levels.push(colors.iter().map(|&c| Form::color_form(c)).collect::<Vec<_>>());
        for degree in 1..=max_degree {
            let prev: &Vec<Form> = &levels[degree - 1];
            let next = (0..edges.len())
                .map(|i| {
                    let sub = splits[i].iter().map(|&(a, b)| (prev[a].clone(), prev[b].clone()));
                    let conv = reverse[i].map(|j| prev[j].clone());
                    Form::new(degree, colors[i], sub, conv).expect("entries have uniform degree")
                })
                .collect();
            levels.push(next);
        }
        EdgeForms { edges, index, levels }
    }

    pub fn max_degree(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn get(&self, edge: (usize, usize), degree: usize) -> Option<&Form> {
        let i = *self.index.get(&edge)?;
        self.levels.get(degree).map(|level| &level[i])
    }

    /// Forms of degree `degree`, aligned with [`EdgeForms::edges`].
    pub fn level(&self, degree: usize) -> &[Form] {
        &self.levels[degree]
    }

    pub fn realized(&self, degree: usize) -> BTreeSet<Form> {
        self.levels[degree].iter().cloned().collect()
    }

    /// Edges realizing `form` (at its own degree).
    pub fn edges_with(&self, form: &Form) -> Vec<(usize, usize)> {
        match self.levels.get(form.degree()) {
            None => Vec::new(),
            Some(level) => self
                .edges
                .iter()
                .zip(level)
                .filter(|(_, f)| *f == form)
                .map(|(e, _)| *e)
                .collect(),
        }
    }
}

/// The unique degree-`k` form satisfied at the designated edge.
pub fn form_of_edge(pm: &PointedModel, k: usize) -> Form {
    EdgeForms::compute(&pm.model, k).get(pm.edge, k).expect("pointed edge lies in the unit").clone()
}

/// Unit edges within one step of `(r,s)`: every edge touching `r` or `s`.
pub fn neighbors(model: &Model, edge: (usize, usize)) -> Result<EdgeSet, FormError> {
    let (r, s) = edge;
    if !model.has_edge(r, s) {
        return Err(FormError::EdgeNotInUnit(r, s));
    }
    let unit = model.unit();
    let mut out = Relation::empty(model.base());
    for (a, b) in unit.iter() {
        if a == r || a == s || b == r || b == s {
            out.insert(a, b);
        }
    }
    Ok(out)
}

/// Direct recursive satisfaction check of `form` at `edge`, not going through
/// [`EdgeForms`]. At degree `n+1` every listed pair (converse) must be realized
/// by some middle point (the reverse edge), and every middle point (the
/// reverse edge) must realize some listed pair (converse).
pub fn satisfies(model: &Model, edge: (usize, usize), form: &Form) -> bool {
    let mut memo = HashMap::new();
    sat(model, edge, form, &mut memo)
}

fn sat(model: &Model, (r, s): (usize, usize), form: &Form, memo: &mut HashMap<(usize, usize, Form), bool>) -> bool {
    if let Some(&v) = memo.get(&(r, s, form.clone())) {
        return v;
    }
    let unit = model.unit();
    let mut ok = unit.contains(r, s) && edge_color(model, r, s) == form.color();
    if ok && form.degree() > 0 {
        let middles: Vec<usize> = unit.successors(r).filter(|&w| unit.contains(w, s)).collect();
        ok = middles
            .iter()
            .all(|&w| form.sub().iter().any(|(a, b)| sat(model, (r, w), a, memo) && sat(model, (w, s), b, memo)))
            && form
                .sub()
                .iter()
                .all(|(a, b)| middles.iter().any(|&w| sat(model, (r, w), a, memo) && sat(model, (w, s), b, memo)));
        if ok {
            ok = if unit.contains(s, r) {
                !form.conv().is_empty()
                    && form.conv().iter().all(|c| sat(model, (s, r), c, memo))
                    && form.conv().iter().any(|c| sat(model, (s, r), c, memo))
            } else {
                form.conv().is_empty()
            };
        }
    }
    memo.insert((r, s, form.clone()), ok);
    ok
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtensionalReport {
    pub universe_size: usize,
    /// Forms whose rendered term is nonempty in the model.
    pub nonempty: usize,
    pub disjoint: bool,
    pub covers_unit: bool,
    /// Every rendered form evaluates to exactly the edges realizing it.
    pub agrees_with_edges: bool,
}

impl ExtensionalReport {
    pub fn ok(&self) -> bool {
        self.disjoint && self.covers_unit && self.agrees_with_edges
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionReport {
    pub degree: usize,
    pub edges: usize,
    pub realized_forms: usize,
    pub violations: Vec<String>,
    pub extensional: Option<ExtensionalReport>,
}

impl PartitionReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty() && self.extensional.as_ref().is_none_or(ExtensionalReport::ok)
    }
}

/// Checks that every edge realizes exactly one degree-`n` form. With a budget,
/// also renders the whole degree-`n` universe as terms and checks that their
/// evaluations partition the unit.
pub fn check_partition(model: &Model, n: usize, budget: Option<u64>) -> Result<PartitionReport, FormError> {
    let m = model.arity();
    if let Some(b) = budget {
        let log2 = predicted_universe_log2(m, n);
        if log2 > (b as f64).log2() {
            return Err(FormError::BudgetExceeded { m, degree: n, log2_size: log2, budget: b });
        }
    }
    let table = EdgeForms::compute(model, n);
    let pool = table.realized(n);
    let mut violations = Vec::new();
    for (edge, form) in table.edges().iter().zip(table.level(n)) {
        let satisfied: Vec<&Form> = pool.iter().filter(|f| satisfies(model, *edge, f)).collect();
        match satisfied.as_slice() {
            [only] if *only == form => {}
            [] => violations.push(format!("edge {edge:?} satisfies no realized form")),
            [only] => violations.push(format!("edge {edge:?} satisfies {only} but computes {form}")),
            many => violations.push(format!("edge {edge:?} satisfies {} forms", many.len())),
        }
        if n > 0 && form.project().ok() != table.get(*edge, n - 1).cloned() {
            violations.push(format!("edge {edge:?}: projection differs from the degree {} form", n - 1));
        }
    }

    let extensional = match budget {
        None => None,
        Some(b) => {
            let universe = enum_forms(m, n, b)?;
            let mut seen = Relation::empty(model.base());
            let mut disjoint = true;
            let mut agrees = true;
            let mut nonempty = 0;
            for f in universe.forms() {
                let value = eval(&to_term(f, m, b)?, model)?;
                if !value.is_empty() {
                    nonempty += 1;
                }
                disjoint &= value.is_disjoint(&seen);
                seen = seen.union(&value);
                let expected = Relation::from_pairs(model.base(), table.edges_with(f))?;
                agrees &= value == expected;
            }
            Some(ExtensionalReport {
                universe_size: universe.len(),
                nonempty,
                disjoint,
                covers_unit: &seen == model.unit(),
                agrees_with_edges: agrees,
            })
        }
    };
    Ok(PartitionReport { degree: n, edges: table.edges().len(), realized_forms: pool.len(), violations, extensional })
}
