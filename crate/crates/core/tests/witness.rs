use relfree::acceptance::witness_seed;
use relfree::model::{find_model, EnumConfig};
use relfree::witness::{
    build_round0, certify, check_consistency, expand, select_zigzag, to_dot, witness_nonatomicity, Certificate,
    ExtensionKind, GraphBudget, WitnessError, WitnessOptions,
};
use relfree::{builtin, HSet, Model, PointedModel, Signature};

fn sig(m: usize, h: HSet) -> Signature {
    Signature::new(m, h)
}

#[test]
fn round_zero_shape() {
    let pm = witness_seed(0);
    let g = build_round0(&pm, &sig(0, HSet::RS), 1).unwrap();
    assert_eq!(g.nodes().len(), 2);
    let depths: Vec<_> = g.edges().iter().map(|(e, d)| (*e, d.depth)).collect();
    assert_eq!(depths, vec![((0, 0), 1), ((0, 1), 1), ((1, 0), 0), ((1, 1), 0)]);
    let top = g.edge((0, 1)).unwrap();
    assert_eq!(g.edge((1, 0)).unwrap().label, top.label.conv_f().unwrap());
    assert!(g.edge((0, 0)).unwrap().label.is_white());
    assert!(check_consistency(&g).ok());
}

#[test]
fn one_round_adds_a_middle_node_with_four_edges() {
    let pm = witness_seed(0);
    let mut g = build_round0(&pm, &sig(0, HSet::RS), 1).unwrap();
    expand(&mut g, 1, &GraphBudget::default()).unwrap();
    let w = g.middles((0, 1))[0].node;
    let incident = g.edges().keys().filter(|(x, y)| (*x == w) != (*y == w)).count();
    assert_eq!(incident, 4);
    assert!(check_consistency(&g).ok());
    let z = select_zigzag(&g).unwrap();
    assert_eq!(z.edges[0], (0, 1));
    assert!(z.edges[1] == (0, w) || z.edges[1] == (w, 1));
}

#[test]
fn depth_zero_edges_are_never_processed() {
    let pm = witness_seed(0);
    let mut g = build_round0(&pm, &sig(0, HSet::RS), 1).unwrap();
    expand(&mut g, 3, &GraphBudget::default()).unwrap();
    for (e, d) in g.edges() {
        if d.depth == 0 {
            assert!(g.middles(*e).is_empty(), "{e:?}");
        }
    }
}

#[test]
fn q_zero_and_seeds_outside_t_are_rejected() {
    let pm = witness_seed(0);
    assert!(matches!(build_round0(&pm, &sig(0, HSet::S), 0), Err(WitnessError::ZeroQ)));
    let two = PointedModel::new(Model::full(2, 0), (0, 1)).unwrap();
    assert!(matches!(build_round0(&two, &sig(0, HSet::S), 1), Err(WitnessError::SeedNotInT(_))));
}

#[test]
fn atomic_case_is_refused() {
    let err = witness_nonatomicity(&witness_seed(0), 1, &sig(0, HSet::RS), &WitnessOptions::default()).unwrap_err();
    assert!(matches!(err, WitnessError::AtomicCase));
    assert!(err.to_string().contains("atomic case"));
}

#[test]
fn extension_kinds_follow_the_signature() {
    let kind = |m, h| {
        witness_nonatomicity(&witness_seed(m), 1, &sig(m, h), &WitnessOptions::default()).unwrap().extension.kind
    };
    assert_eq!(kind(0, HSet::EMPTY), ExtensionKind::ReverseEdge);
    assert_eq!(kind(0, HSet::R), ExtensionKind::ReverseEdge);
    assert_eq!(kind(0, HSet::S), ExtensionKind::Loop);
    assert_eq!(kind(1, HSet::RS), ExtensionKind::FreshNode);
}

#[test]
fn fresh_node_extension_avoids_the_through_node_colors() {
    let w = witness_nonatomicity(&witness_seed(1), 1, &sig(1, HSet::RS), &WitnessOptions::default()).unwrap();
    assert_eq!(w.extension.edges.len(), 5);
    let (u0, v0) = w.zigzag.edge(0);
    if let Some(z) = w.extension.through {
        let first = &w.extension.edges[0];
        assert_eq!((first.from, first.to), (Some(u0), None));
        assert_ne!(first.label.color(), w.graph.edge((u0, z)).unwrap().label.color());
        let second = &w.extension.edges[1];
        assert_eq!((second.from, second.to), (None, Some(v0)));
        assert_ne!(second.label.color(), w.graph.edge((z, v0)).unwrap().label.color());
    }
}

#[test]
fn symmetric_q1_certificate_has_two_disjoint_pairs() {
    let w = witness_nonatomicity(&witness_seed(0), 1, &sig(0, HSet::S), &WitnessOptions::default()).unwrap();
    assert_eq!(w.pairs.len(), 2);
    for p in &w.pairs {
        assert!(p.disjoint());
        assert_eq!(p.son.degree(), p.j + 1);
        assert_eq!(p.daughter.degree(), p.j + 1);
        assert_eq!(p.common_projection().as_ref(), Some(&w.graph.edge(p.edge).unwrap().label));
    }
}

#[test]
fn certificates_are_deterministic_and_verify() {
    for (m, h) in [(0, HSet::EMPTY), (0, HSet::R), (0, HSet::S), (1, HSet::RS)] {
        for q in [1, 2] {
            let a = certify(&witness_seed(m), q, &sig(m, h), &WitnessOptions::default()).unwrap();
            let b = certify(&witness_seed(m), q, &sig(m, h), &WitnessOptions::default()).unwrap();
            assert_eq!(a.to_canonical_json(), b.to_canonical_json());
            let back = Certificate::from_json_str(&a.to_canonical_json()).unwrap();
            assert_eq!(back, a);
            let check = back.verify();
            assert!(check.ok(), "m={m} H={h} q={q}\n{}", check.render_text());
            let ladder: Vec<usize> = (0..=q).rev().map(|j| {
                let e = back.zigzag.edge(j);
                back.graph.edges.iter().find(|r| (r.from, r.to) == e).unwrap().depth
            }).collect();
            assert_eq!(ladder, (0..=q).rev().collect::<Vec<_>>());
        }
    }
}

#[test]
fn a_seed_found_by_search_also_works() {
    let t = builtin("t").unwrap();
    let s = sig(0, HSet::S);
    let pm = find_model(&t, &s, 3, &EnumConfig::default()).unwrap().unwrap();
    let cert = certify(&pm, 1, &s, &WitnessOptions::default()).unwrap();
    assert!(cert.verify().ok());
}

fn base_certificate() -> Certificate {
    certify(&witness_seed(0), 2, &sig(0, HSet::EMPTY), &WitnessOptions::default()).unwrap()
}

#[test]
fn raising_a_depth_by_two_breaks_condition_two() {
    let mut cert = base_certificate();
    let edge = cert
        .graph
        .edges
        .iter()
        .position(|e| {
            e.from != e.to && cert.graph.edges.iter().any(|r| (r.from, r.to) == (e.to, e.from) && r.depth <= e.depth)
        })
        .unwrap();
    cert.graph.edges[edge].depth += 2;
    let report = check_consistency(&cert.rebuild_graph().unwrap());
    assert!(report.conditions().contains(&2), "{:?}", report.conditions());
    assert!(!cert.verify().ok());
}

#[test]
fn a_black_loop_label_breaks_condition_one() {
    let mut cert = base_certificate();
    let black = cert.graph.edges.iter().find(|e| e.from != e.to && e.depth == 1).unwrap().label.clone();
    let lp = cert.graph.edges.iter().position(|e| e.from == e.to && e.depth == 1).unwrap();
    cert.graph.edges[lp].label = black;
    let report = check_consistency(&cert.rebuild_graph().unwrap());
    assert!(report.conditions().contains(&1), "{:?}", report.conditions());
}

#[test]
fn tampered_certificates_fail_verification() {
    let cert = base_certificate();

    let mut swapped = cert.clone();
    let p = &mut swapped.pairs[0];
    std::mem::swap(&mut p.son, &mut p.daughter);
    assert_eq!(failed(&swapped), vec!["pairs"]);

    let mut stable = cert.clone();
    stable.stability_round += 1;
    assert_eq!(failed(&stable), vec!["stability"]);

    let mut tau = cert.clone();
    tau.tau = tau.pairs[0].son.clone();
    assert_eq!(failed(&tau), vec!["tau"]);

    let mut seed = cert.clone();
    seed.seed.edge = Some([1, 1]);
    assert!(failed(&seed).contains(&"tau"));

    let mut forged = cert.clone();
    let record = forged.forms.forms.values_mut().find(|r| !r.sub.is_empty()).unwrap();
    record.conv.clear();
    record.sub.clear();
    assert!(!forged.verify().ok());
}

fn failed(c: &Certificate) -> Vec<&'static str> {
    c.verify().failures().iter().map(|c| c.name).collect()
}

#[test]
fn graph_budget_is_enforced() {
    let tiny = GraphBudget { max_nodes: 10, max_edges: 1000 };
    let opts = WitnessOptions { rounds: None, budget: tiny };
    let err = witness_nonatomicity(&witness_seed(0), 2, &sig(0, HSet::EMPTY), &opts).unwrap_err();
    assert!(matches!(err.root(), WitnessError::GraphBudget { .. }), "{err}");
}

#[test]
fn dot_export_marks_the_zigzag_and_extension() {
    let w = witness_nonatomicity(&witness_seed(1), 1, &sig(1, HSet::RS), &WitnessOptions::default()).unwrap();
    let dot = to_dot(&w.graph, Some(&w.zigzag), Some(&w.extension));
    assert!(dot.starts_with("digraph witness {"));
    assert_eq!(dot.matches("style=bold").count(), 2);
    assert!(dot.contains("h [label=\"h\", shape=doublecircle]"));
    assert_eq!(dot.matches("style=dashed").count(), 5);
}

mod corrupted {
    use super::*;
    use proptest::prelude::*;
    use std::sync::LazyLock;

    static CERT: LazyLock<Certificate> = LazyLock::new(base_certificate);

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn corrupted_fields_are_rejected_without_panicking(which in 0usize..6, i in any::<prop::sample::Index>(), delta in 1usize..4) {
            let mut c = CERT.clone();
            match which {
                0 => { let n = c.graph.edges.len(); c.graph.edges[i.index(n)].depth += delta; }
                1 => { let n = c.graph.edges.len(); let e = &mut c.graph.edges[i.index(n)]; e.to = (e.to + delta) % c.graph.nodes.len(); }
                2 => { let n = c.graph.nodes.len(); c.graph.nodes[i.index(n)].point = (c.graph.nodes[i.index(n)].point + delta) % 3; }
                3 => { let n = c.graph.edges.len(); c.graph.edges.remove(i.index(n)); }
                4 => { let n = c.zigzag.middles.len(); c.zigzag.middles[i.index(n)] += delta; }
                _ => { c.q += delta; }
            }
            prop_assume!(c != *CERT);
            prop_assert!(!c.verify().ok());
        }
    }
}
