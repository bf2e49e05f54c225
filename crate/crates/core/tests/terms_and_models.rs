use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use relfree::model::{enumerate_units, find_model, random_model, unit_count, validate_model, EnumConfig, ModelFile};
use relfree::{builtin, eval, HSet, Model, PointedModel, Signature, Term};

fn term_strategy(m: usize) -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        Just(Term::Zero),
        Just(Term::One),
        Just(Term::Identity),
        (0..m.max(1)).prop_map(Term::Var),
    ];
    let leaf = if m == 0 { leaf.prop_filter("closed", |t| t.is_closed()).boxed() } else { leaf.boxed() };
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Term::not),
            inner.clone().prop_map(Term::converse),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.sum(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.meet(b)),
            (inner.clone(), inner).prop_map(|(a, b)| a.compose(b)),
        ]
    })
}

fn model_strategy(m: usize, h: HSet) -> impl Strategy<Value = Model> {
    (1usize..=4, any::<u64>()).prop_map(move |(base, seed)| {
        random_model(&mut ChaCha8Rng::seed_from_u64(seed), base, &Signature::new(m, h))
    })
}

proptest! {
    #[test]
    fn render_then_parse_is_identity(t in term_strategy(2)) {
        prop_assert_eq!(Term::parse(&t.render()).unwrap(), t);
    }

    #[test]
    fn de_morgan_holds_in_every_model(a in term_strategy(1), b in term_strategy(1), model in model_strategy(1, HSet::EMPTY)) {
        let lhs = a.clone().sum(b.clone()).not();
        let rhs = a.not().meet(b.not());
        prop_assert_eq!(eval(&lhs, &model).unwrap(), eval(&rhs, &model).unwrap());
    }

    #[test]
    fn composition_distributes_over_sums(
        a in term_strategy(1), b in term_strategy(1), c in term_strategy(1), model in model_strategy(1, HSet::R)
    ) {
        let lhs = a.clone().sum(b.clone()).compose(c.clone());
        let rhs = a.compose(c.clone()).sum(b.compose(c));
        prop_assert_eq!(eval(&lhs, &model).unwrap(), eval(&rhs, &model).unwrap());
    }

    #[test]
    fn double_converse_is_identity_on_symmetric_units(t in term_strategy(1), model in model_strategy(1, HSet::S)) {
        prop_assert_eq!(eval(&t.clone().converse().converse(), &model).unwrap(), eval(&t, &model).unwrap());
    }

    #[test]
    fn identity_is_a_left_unit_on_reflexive_units(t in term_strategy(1), model in model_strategy(1, HSet::RS)) {
        prop_assert_eq!(eval(&Term::Identity.compose(t.clone()), &model).unwrap(), eval(&t, &model).unwrap());
    }

    #[test]
    fn values_stay_inside_the_unit(t in term_strategy(2), model in model_strategy(2, HSet::EMPTY)) {
        prop_assert!(eval(&t, &model).unwrap().is_subset(model.unit()));
    }

    #[test]
    fn random_models_respect_their_signature(m in 0usize..3, h in 0usize..4, seed in any::<u64>(), base in 1usize..6) {
        let sig = Signature::new(m, HSet::ALL[h]);
        let model = random_model(&mut ChaCha8Rng::seed_from_u64(seed), base, &sig);
        prop_assert!(validate_model(&model, &sig).is_empty());
    }
}

#[test]
fn reflexive_symmetric_units_up_to_base_four() {
    let sig = Signature::new(0, HSet::RS);
    let cfg = EnumConfig::default();
    let counts: Vec<usize> = (1..=4).map(|b| enumerate_units(b, &sig, &cfg).unwrap().count()).collect();
    assert_eq!(counts, vec![1, 2, 8, 64]);
    assert_eq!(counts.iter().sum::<usize>(), 75);
    assert_eq!(unit_count(2, HSet::EMPTY), 16);
    assert_eq!(unit_count(3, HSet::RS), 8);
}

#[test]
fn t_needs_three_points() {
    let t = builtin("t").unwrap();
    let sig = Signature::new(0, HSet::RS);
    let cfg = EnumConfig::default();
    assert!(find_model(&t, &sig, 2, &cfg).unwrap().is_none());
    let pm = find_model(&t, &sig, 3, &cfg).unwrap().unwrap();
    assert_eq!(pm.model.base(), 3);
    assert!(eval(&t, &pm.model).unwrap().contains(pm.edge.0, pm.edge.1));
}

#[test]
fn t_on_the_full_three_point_model_is_the_diversity() {
    let model = Model::full(3, 0);
    let value = eval(&builtin("t").unwrap(), &model).unwrap();
    assert_eq!(value.pairs(), vec![(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]);
}

#[test]
fn model_files_round_trip() {
    let model = Model::from_pairs(3, &[(0, 1), (1, 2), (2, 2)], &[vec![(1, 2)]]).unwrap();
    let pm = PointedModel::new(model, (1, 2)).unwrap();
    let text = pm.to_json().to_string();
    assert_eq!(PointedModel::from_json_str(&text).unwrap(), pm);
    let file: ModelFile = serde_json::from_str(&text).unwrap();
    assert_eq!(file.edge, Some([1, 2]));
    assert!(PointedModel::from_json_str(r#"{"base": 2, "unit": [[0, 1]]}"#).is_err());
    assert!(Model::from_json_str(r#"{"base": 2, "unit": [[0, 5]]}"#).is_err());
}

#[test]
fn open_terms_are_rejected_by_the_signature() {
    let sig = Signature::new(0, HSet::RS);
    let cfg = EnumConfig::default();
    assert!(find_model(&Term::var(0), &sig, 1, &cfg).is_err());
}
