mod common;

use std::collections::BTreeSet;

use bratteli::rep::{build_rep, rep_dimension, verify_ck};
use bratteli::{
    complete, count_paths_from_set, hereditary_saturated_closure, is_unital_case, parse_bd1, to_dot, write_bd1,
    BratteliDiagram, KumjianCompletion, VertexId,
};
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{dfs_path_counts, label_map, random_diagram, sigma_oracle};

fn diagram() -> impl Strategy<Value = BratteliDiagram> {
    any::<u64>().prop_map(|seed| random_diagram(&mut ChaCha8Rng::seed_from_u64(seed)))
}

/// A diagram together with an arbitrary subset of its vertices.
fn diagram_and_subset() -> impl Strategy<Value = (BratteliDiagram, BTreeSet<VertexId>)> {
    (diagram(), any::<u64>()).prop_map(|(d, bits)| {
        let subset = d
            .vertices()
            .enumerate()
            .filter(|(k, _)| bits.rotate_left(*k as u32 * 7) & 1 == 1)
            .map(|(_, v)| v)
            .collect();
        (d, subset)
    })
}

fn is_hereditary(g: &BratteliDiagram, h: &BTreeSet<VertexId>) -> bool {
    h.iter().all(|&v| g.out_edges(v).all(|e| h.contains(&e.range())))
}

fn is_saturated(g: &BratteliDiagram, h: &BTreeSet<VertexId>) -> bool {
    g.vertices()
        .filter(|&v| g.emits(v) && !h.contains(&v))
        .all(|v| g.out_edges(v).any(|e| !h.contains(&e.range())))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn generated_diagrams_are_valid(d in diagram()) {
        let report = d.validate(false);
        prop_assert!(report.ok, "{:?}", report.first_error());
        prop_assert!(d.num_levels() <= common::MAX_LEVELS);
        prop_assert!(d.all_labels().iter().flatten().all(|&x| (1..=common::MAX_LABEL).contains(&x)));
    }

    #[test]
    fn sigma_matches_tables(d in diagram()) {
        let sigma = d.sigma().unwrap();
        let oracle = sigma_oracle(&d);
        for (v, s) in sigma.iter() {
            prop_assert_eq!(s, oracle[&v]);
        }
    }

    #[test]
    fn path_counts_match_enumeration((d, subset) in diagram_and_subset()) {
        let oracle = dfs_path_counts(&d, &subset);
        for v in d.vertices() {
            prop_assert_eq!(count_paths_from_set(&d, &subset, v).unwrap(), BigUint::from(oracle[&v]));
        }
    }

    #[test]
    fn completion_realizes_labels(d in diagram()) {
        let c = complete(&d).unwrap();
        let ke = c.ke();
        prop_assert!(c.check_invariants().ok);
        let labels = label_map(ke);
        let counts = dfs_path_counts(ke, c.s_set());
        prop_assert_eq!(&counts, &labels);
        for v in d.vertices() {
            prop_assert_eq!(ke.label(c.from_original(v)), d.label(v));
        }
        for &w in c.s_set() {
            prop_assert_eq!(ke.label(w), 1);
            prop_assert_eq!(ke.in_edges(w).count(), 0);
        }
        prop_assert_eq!(c.s_set().len() == 1, is_unital_case(&d).unwrap());
        prop_assert_eq!(c.restrict_to_original(), d);
    }

    #[test]
    fn completion_sigma_vanishes_off_s(d in diagram()) {
        let c = complete(&d).unwrap();
        let sigma = c.ke().sigma().unwrap();
        for (v, s) in sigma.iter() {
            if !c.s_set().contains(&v) {
                prop_assert_eq!(s, 0, "at {}", v);
            }
        }
    }

    #[test]
    fn bd1_round_trip(d in diagram()) {
        let c = complete(&d).unwrap();
        for g in [&d, c.ke()] {
            let text = write_bd1(g);
            let back = parse_bd1(&text).unwrap();
            prop_assert_eq!(&back, g);
            prop_assert_eq!(write_bd1(&back), text);
        }
        let reread = KumjianCompletion::from_marked(parse_bd1(&write_bd1(c.ke())).unwrap()).unwrap();
        prop_assert_eq!(reread.original(), &d);
    }

    #[test]
    fn parser_never_panics_on_damaged_documents(d in diagram(), cut in any::<prop::sample::Index>(), junk in "[ 0-9a-z#\n-]{0,8}") {
        let text = write_bd1(&d);
        let at = cut.index(text.len() + 1);
        let damaged = format!("{}{}{}", &text[..at], junk, &text[at..]);
        if let Err(e) = parse_bd1(&damaged) {
            prop_assert!(e.line >= 1 && e.line <= damaged.lines().count() + 1);
            prop_assert!(e.column >= 1);
        }
    }

    #[test]
    fn closure_is_hereditary_saturated_monotone_idempotent((d, a) in diagram_and_subset(), extra in any::<u64>()) {
        let ca = hereditary_saturated_closure(&d, &a).unwrap().closure;
        prop_assert!(a.is_subset(&ca));
        prop_assert!(is_hereditary(&d, &ca));
        prop_assert!(is_saturated(&d, &ca));
        prop_assert_eq!(&hereditary_saturated_closure(&d, &ca).unwrap().closure, &ca);

        let b: BTreeSet<VertexId> = a
            .iter()
            .copied()
            .chain(d.vertices().filter(|v| (extra >> ((v.index + v.level) % 64)) & 1 == 1))
            .collect();
        let cb = hereditary_saturated_closure(&d, &b).unwrap().closure;
        prop_assert!(ca.is_subset(&cb));
    }

    #[test]
    fn completion_is_full_from_both_sides(d in diagram()) {
        let c = complete(&d).unwrap();
        let report = bratteli::fullness_check(&c);
        prop_assert!(report.s_full && report.complement_full);
    }

    #[test]
    fn representation_satisfies_relations(d in diagram()) {
        let c = complete(&d).unwrap();
        let rep = build_rep(c.ke()).unwrap();
        prop_assert_eq!(BigUint::from(rep.dim()), rep_dimension(c.ke()));
        let report = verify_ck(&rep);
        prop_assert!(report.ok, "{:?}", report.first_error());
    }

    #[test]
    fn dot_lists_every_vertex_and_edge(d in diagram()) {
        let c = complete(&d).unwrap();
        let ke = c.ke();
        let dot = to_dot(ke);
        let edges: u64 = ke.matrices().iter().flatten().flatten().sum();
        prop_assert_eq!(dot.matches(" -> ").count() as u64, edges);
        prop_assert_eq!(dot.matches("[label=\"d=").count(), ke.num_vertices());
        prop_assert_eq!(dot.matches("shape=box").count(), c.s_set().len());
        prop_assert_eq!(to_dot(ke), dot);
    }
}
