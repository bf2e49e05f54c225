//! Exhaustive universes of syntactic forms and their rendering as terms.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};

use super::{color_term, Color, Form, FormError};
use crate::term::{big_product, Term};

pub const DEFAULT_FORM_BUDGET: u64 = 1 << 20;

/// Every syntactic form of one degree for `m` generators, in form order.
#[derive(Debug)]
pub struct FormUniverse {
    m: usize,
    degree: usize,
    forms: Vec<Form>,
}

impl FormUniverse {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn forms(&self) -> &[Form] {
        &self.forms
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }
}

/// `log2` of the number of syntactic forms of the given degree.
pub fn predicted_universe_log2(m: usize, degree: usize) -> f64 {
    let colors = (m + 1) as f64;
    let mut log2 = colors;
    for _ in 0..degree {
        let n = log2.exp2();
        log2 = colors + n * n + n;
    }
    log2
}

type UniverseKey = (usize, usize);

static UNIVERSES: LazyLock<Mutex<HashMap<UniverseKey, Arc<FormUniverse>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

/// All syntactic forms of `degree` over `m` generators. Results are cached.
pub fn enum_forms(m: usize, degree: usize, budget: u64) -> Result<Arc<FormUniverse>, FormError> {
    let log2 = predicted_universe_log2(m, degree);
    if m >= Color::MAX_VARS || log2 > (budget as f64).log2() {
        return Err(FormError::BudgetExceeded { m, degree, log2_size: log2, budget });
    }
    if let Some(u) = UNIVERSES.lock().expect("universe cache").get(&(m, degree)) {
        return Ok(u.clone());
    }
    let forms = if degree == 0 {
        Color::all(m).map(Form::color_form).collect()
    } else {
        let prev = enum_forms(m, degree - 1, budget)?;
        let p = prev.forms();
        let pairs: Vec<(Form, Form)> =
            p.iter().flat_map(|a| p.iter().map(move |b| (a.clone(), b.clone()))).collect();
        let mut forms = Vec::with_capacity(log2.exp2() as usize);
        for color in Color::all(m) {
            for conv_mask in 0..1u64 << p.len() {
                let conv: Vec<Form> = select(p, conv_mask);
                for sub_mask in 0..1u64 << pairs.len() {
                    let sub = select(&pairs, sub_mask);
                    forms.push(Form::new(degree, color, sub, conv.clone())?);
                }
            }
        }
        forms.sort();
        forms
    };
    let universe = Arc::new(FormUniverse { m, degree, forms });
    UNIVERSES.lock().expect("universe cache").insert((m, degree), universe.clone());
    Ok(universe)
}

fn select<T: Clone>(items: &[T], mask: u64) -> Vec<T> {
    items.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, x)| x.clone()).collect()
}

/// All universes from degree 0 up to `degree`.
pub fn universes(m: usize, degree: usize, budget: u64) -> Result<Vec<Arc<FormUniverse>>, FormError> {
    (0..=degree).map(|d| enum_forms(m, d, budget)).collect()
}

/// The degree-`n+1` forms projecting onto `f`.
pub fn refine(f: &Form, m: usize, budget: u64) -> Result<Vec<Form>, FormError> {
    let universe = enum_forms(m, f.degree() + 1, budget)?;
    Ok(universe.forms().iter().filter(|g| g.project().as_ref() == Ok(f)).cloned().collect())
}

/// The term denoting `f`: color literals, then a positive or negative literal
/// for every composition and converse over the previous universe.
pub fn to_term(f: &Form, m: usize, budget: u64) -> Result<Term, FormError> {
    if let Some(i) = (0..Color::MAX_VARS).find(|&i| i >= m && f.color().has_var(i)) {
        return Err(FormError::VariableOutOfRange { index: i, m });
    }
    let mut memo = HashMap::new();
    render(f, m, budget, &mut memo)
}

fn render(f: &Form, m: usize, budget: u64, memo: &mut HashMap<Form, Term>) -> Result<Term, FormError> {
    if let Some(t) = memo.get(f) {
        return Ok(t.clone());
    }
    let mut literals = vec![color_term(f.color(), m)];
    if f.degree() > 0 {
        let prev = enum_forms(m, f.degree() - 1, budget)?;
        let terms = prev.forms().iter().map(|g| render(g, m, budget, memo)).collect::<Result<Vec<_>, _>>()?;
        for (a, ta) in prev.forms().iter().zip(&terms) {
            for (b, tb) in prev.forms().iter().zip(&terms) {
                let lit = ta.clone().compose(tb.clone());
                literals.push(if f.has_pair(a, b) { lit } else { lit.not() });
            }
        }
        for (a, ta) in prev.forms().iter().zip(&terms) {
            let lit = ta.clone().converse();
            literals.push(if f.has_conv(a) { lit } else { lit.not() });
        }
    }
    let t = big_product(literals);
    memo.insert(f.clone(), t.clone());
    Ok(t)
}
