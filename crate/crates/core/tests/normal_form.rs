use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use relfree::model::random_model;
use relfree::normal_form::{
    check_partition, enum_forms, neighbors, refine, satisfies, to_term, Color, EdgeForms, FormBundle, FormError,
    DEFAULT_FORM_BUDGET,
};
use relfree::{dnf, eval, form_of_edge, random_term, Form, HSet, Model, PointedModel, Relation, Signature, Term};

const B: u64 = DEFAULT_FORM_BUDGET;

fn full(base: usize) -> Model {
    Model::full(base, 0)
}

fn at(model: &Model, edge: (usize, usize), k: usize) -> Form {
    form_of_edge(&PointedModel::new(model.clone(), edge).unwrap(), k)
}

fn white0() -> Form {
    Form::color_form(Color(0).with_identity(true))
}

fn black0() -> Form {
    Form::color_form(Color(0))
}

fn any_model() -> impl Strategy<Value = Model> {
    (0usize..3, 0usize..4, 1usize..=5, any::<u64>()).prop_map(|(m, h, base, seed)| {
        random_model(&mut ChaCha8Rng::seed_from_u64(seed), base, &Signature::new(m, HSet::ALL[h]))
    })
}

fn any_pointed() -> impl Strategy<Value = PointedModel> {
    (any_model(), any::<prop::sample::Index>()).prop_map(|(model, i)| {
        let edges = model.edges();
        let mut model = model;
        if edges.is_empty() {
            let mut unit = model.unit().clone();
            unit.insert(0, 0);
            model = Model::new_unchecked(unit, model.valuation().to_vec());
            return PointedModel::new(model, (0, 0)).unwrap();
        }
        let e = edges[i.index(edges.len())];
        PointedModel::new(model, e).unwrap()
    })
}

#[test]
fn one_point_identity_edge() {
    let m = Model::from_pairs(1, &[(0, 0)], &[]).unwrap();
    assert_eq!(at(&m, (0, 0), 0), white0());
}

#[test]
fn full_two_point_model_degree_one() {
    let f = at(&full(2), (0, 1), 1);
    assert!(!f.is_white());
    assert_eq!(f.conv(), &[black0()]);
    let sub: BTreeSet<_> = f.sub().iter().cloned().collect();
    assert_eq!(sub, BTreeSet::from([(white0(), black0()), (black0(), white0())]));
    assert_eq!(f.conv_f(), Some(black0()));
    assert_eq!(f.left_l(), Some(white0()));
    assert_eq!(f.right_r(), Some(white0()));
    assert_eq!(f.project().unwrap(), black0());
}

#[test]
fn full_three_point_loop_satisfies_e2() {
    let model = full(3);
    let f = at(&model, (0, 0), 1);
    assert!(f.is_white());
    assert!(f.has_pair(&black0(), &black0()));
    let e2 = relfree::builtin("e2").unwrap();
    assert!(eval(&e2, &model).unwrap().contains(0, 0));
}

#[test]
fn degree_zero_forms_are_outside_every_partial_map() {
    for f in [white0(), black0()] {
        assert_eq!(f.conv_f(), None);
        assert_eq!(f.right_r(), None);
        assert_eq!(f.left_l(), None);
        assert_eq!(f.project(), Err(FormError::ProjectDegreeZero));
    }
}

#[test]
fn neighbor_examples() {
    let one = Model::from_pairs(1, &[(0, 0)], &[]).unwrap();
    assert_eq!(neighbors(&one, (0, 0)).unwrap().pairs(), vec![(0, 0)]);
    assert_eq!(neighbors(&full(2), (0, 1)).unwrap().pairs(), vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
    let chain = Model::from_pairs(3, &[(0, 1), (1, 2)], &[]).unwrap();
    assert_eq!(neighbors(&chain, (0, 1)).unwrap().pairs(), vec![(0, 1), (1, 2)]);
    assert!(neighbors(&chain, (2, 0)).is_err());
}

#[test]
fn universe_sizes() {
    assert_eq!(enum_forms(0, 0, B).unwrap().len(), 2);
    assert_eq!(enum_forms(0, 1, B).unwrap().len(), 128);
    assert_eq!(enum_forms(1, 0, B).unwrap().len(), 4);
    assert!(matches!(enum_forms(1, 1, B), Err(FormError::BudgetExceeded { .. })));
}

#[test]
fn refine_partitions_degree_one_over_degree_zero() {
    let white = refine(&white0(), 0, B).unwrap();
    let black = refine(&black0(), 0, B).unwrap();
    assert_eq!(white.len(), 64);
    assert_eq!(black.len(), 64);
    assert!(white.iter().all(Form::is_white) && black.iter().all(|f| !f.is_white()));
    let mut all: Vec<Form> = white.into_iter().chain(black).collect();
    all.sort();
    all.dedup();
    assert_eq!(all, enum_forms(0, 1, B).unwrap().forms());
}

#[test]
fn to_term_examples() {
    assert_eq!(to_term(&white0(), 0, B).unwrap(), Term::Identity);
    assert_eq!(to_term(&black0(), 1, B).unwrap().render(), "0' . -x0");
    let model = full(2);
    let f = at(&model, (0, 1), 1);
    let value = eval(&to_term(&f, 0, B).unwrap(), &model).unwrap();
    assert_eq!(value.pairs(), vec![(0, 1), (1, 0)]);
}

#[test]
fn dnf_examples() {
    let sig = Signature::new(0, HSet::RS);
    let id = dnf(&Term::Identity, &sig).unwrap();
    assert_eq!((id.degree, id.materialize(B).unwrap()), (0, vec![white0()]));
    let div = dnf(&Term::diversity(), &sig).unwrap();
    assert_eq!((div.degree, div.materialize(B).unwrap()), (0, vec![black0()]));
    let dd = dnf(&Term::parse("0';0'").unwrap(), &sig).unwrap();
    let members = dd.materialize(B).unwrap();
    assert_eq!(dd.degree, 1);
    let expected: Vec<Form> = enum_forms(0, 1, B)
        .unwrap()
        .forms()
        .iter()
        .filter(|f| f.sub().iter().any(|(a, b)| !a.is_white() && !b.is_white()))
        .cloned()
        .collect();
    assert_eq!(members, expected);
    assert!(matches!(dnf(&Term::var(0), &sig), Err(FormError::VariableOutOfRange { .. })));
}

#[test]
fn extensional_partition_on_the_full_three_point_model() {
    let report = check_partition(&full(3), 1, Some(B)).unwrap();
    assert!(report.ok());
    let ext = report.extensional.unwrap();
    assert_eq!(ext.universe_size, 128);
    assert!(ext.disjoint && ext.covers_unit && ext.agrees_with_edges);
}

/// Points reachable from the ends of `edge` in at most `steps` unit steps in either direction.
fn ball(model: &Model, edge: (usize, usize), steps: usize) -> BTreeSet<usize> {
    let mut points = BTreeSet::from([edge.0, edge.1]);
    for _ in 0..steps {
        let more: Vec<usize> = model
            .edges()
            .into_iter()
            .filter(|(x, y)| points.contains(x) || points.contains(y))
            .flat_map(|(x, y)| [x, y])
            .collect();
        points.extend(more);
    }
    points
}

proptest! {
    #[test]
    fn every_edge_realizes_exactly_one_form(model in any_model(), n in 0usize..=3) {
        let report = check_partition(&model, n, None).unwrap();
        prop_assert!(report.ok(), "{:?}", report.violations);
    }

    #[test]
    fn projection_steps_down_one_degree(pm in any_pointed(), k in 0usize..3) {
        let upper = form_of_edge(&pm, k + 1);
        prop_assert_eq!(upper.project().unwrap(), form_of_edge(&pm, k));
        prop_assert_eq!(upper.color(), form_of_edge(&pm, 0).color());
        prop_assert!(upper.compatible(&form_of_edge(&pm, 0)));
    }

    #[test]
    fn converse_entries_are_realized_by_the_reverse(pm in any_pointed(), k in 1usize..3) {
        let f = form_of_edge(&pm, k);
        let (r, s) = pm.edge;
        if let Some(g) = f.conv_f() {
            let rev = PointedModel::new(pm.model.clone(), (s, r)).unwrap();
            prop_assert_eq!(form_of_edge(&rev, k - 1), g);
        } else {
            prop_assert!(!pm.model.has_edge(s, r));
        }
    }

    #[test]
    fn the_realized_form_is_satisfied(pm in any_pointed(), k in 0usize..3) {
        prop_assert!(satisfies(&pm.model, pm.edge, &form_of_edge(&pm, k)));
    }

    #[test]
    fn forms_ignore_mutations_outside_the_ball(pm in any_pointed(), k in 1usize..3, pick in any::<prop::sample::Index>(), var in any::<bool>()) {
        let base = pm.model.base();
        let near = ball(&pm.model, pm.edge, k - 1);
        let far: Vec<usize> = (0..base).filter(|p| !near.contains(p)).collect();
        if far.is_empty() {
            return Ok(());
        }
        let i = pick.index(far.len() * far.len());
        let (x, y) = (far[i / far.len()], far[i % far.len()]);
        let mut unit = pm.model.unit().clone();
        let mut valuation = pm.model.valuation().to_vec();
        if var && !valuation.is_empty() {
            let on = valuation[0].contains(x, y);
            valuation[0].set(x, y, !on);
            unit.insert(x, y);
        } else {
            let on = unit.contains(x, y);
            unit.set(x, y, !on);
            for v in &mut valuation {
                v.remove(x, y);
            }
        }
        let mutated = PointedModel::new(Model::new_unchecked(unit, valuation), pm.edge).unwrap();
        prop_assert_eq!(form_of_edge(&mutated, k), form_of_edge(&pm, k));
    }

    #[test]
    fn dnf_members_split_the_value(seed in any::<u64>(), h in 0usize..4, base in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sig = Signature::new(0, HSet::ALL[h]);
        let t = random_term(&mut rng, 0, 3);
        let model = random_model(&mut rng, base, &sig);
        let d = dnf(&t, &sig).unwrap();
        let value = eval(&t, &model).unwrap();
        prop_assert_eq!(d.edges_in(&model), value.clone());
        if d.degree <= 1 {
            let mut seen = Relation::empty(base);
            for f in d.materialize(B).unwrap() {
                let part = eval(&to_term(&f, 0, B).unwrap(), &model).unwrap();
                prop_assert!(part.is_disjoint(&seen));
                seen = seen.union(&part);
            }
            prop_assert_eq!(seen, value);
        }
    }

    #[test]
    fn dnf_membership_matches_values_with_one_generator(seed in any::<u64>(), h in 0usize..4, base in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sig = Signature::new(1, HSet::ALL[h]);
        let t = random_term(&mut rng, 1, 3);
        let model = random_model(&mut rng, base, &sig);
        let d = dnf(&t, &sig).unwrap();
        prop_assert_eq!(d.edges_in(&model), eval(&t, &model).unwrap());
    }

    #[test]
    fn bundles_round_trip(pm in any_pointed(), k in 0usize..3) {
        let f = form_of_edge(&pm, k);
        let mut bundle = FormBundle::default();
        let key = bundle.add(&f);
        let text = serde_json::to_string(&bundle).unwrap();
        let back: FormBundle = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.get(&key).unwrap(), f.clone());
        prop_assert_eq!(Form::from_inline_json(&f.to_inline_json()).unwrap(), f);
    }
}

#[test]
fn every_edge_of_a_table_agrees_with_form_of_edge() {
    let model = Model::from_pairs(4, &[(0, 1), (1, 2), (2, 0), (1, 1), (3, 3), (2, 1)], &[vec![(0, 1), (1, 1)]]).unwrap();
    let table = EdgeForms::compute(&model, 2);
    for &e in table.edges() {
        for k in 0..=2 {
            assert_eq!(table.get(e, k).unwrap(), &at(&model, e, k));
        }
    }
}
