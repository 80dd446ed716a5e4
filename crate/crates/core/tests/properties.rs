use std::cell::RefCell;
use std::collections::BTreeSet;

use emo_core::engine::{Segmenter, SegmentationConfig};
use emo_core::eval::match_opportunities;
use emo_core::frontend::{translate, FrontendOptions};
use emo_core::ir::{validate, IrProgram, StatementKind};
use emo_core::metrics::{analyze_block, parent_affinity, to_f64};
use emo_core::sdg::{build_sdg, Contraction, Sdg};
use emo_testkit as tk;
use proptest::prelude::*;

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig { cases: n, failure_persistence: None, ..ProptestConfig::default() }
}

fn program(seed: u64) -> IrProgram {
    tk::random_ir(&mut tk::rng(seed), 40)
}

proptest! {
    #![proptest_config(cases(128))]

    #[test]
    fn data_edges_agree_with_rescan(seed in any::<u64>()) {
        let p = program(seed);
        let g = build_sdg(&p).unwrap();
        let edges: BTreeSet<_> = g.data_edges().into_iter().collect();
        prop_assert_eq!(edges, tk::brute_data_edges(&p));
        for (u, v) in g.data_edges() {
            prop_assert!(u < v);
        }
    }

    #[test]
    fn control_parents_agree_with_intervals(seed in any::<u64>()) {
        let p = program(seed);
        let g = build_sdg(&p).unwrap();
        let want = tk::brute_control_parents(&p);
        for (i, parent) in want.iter().enumerate() {
            prop_assert_eq!(g.control_parent(i), *parent);
            prop_assert_eq!(p.control_parent(i), *parent);
            prop_assert_eq!(g.control_region(i), *parent);
        }
        for i in 0..p.len() {
            if let Some(n) = p.statements()[i].block_length {
                prop_assert_eq!(g.control_children(i).len(), n);
            }
        }
    }

    #[test]
    fn sampled_programs_reparse(seed in any::<u64>()) {
        let p = program(seed);
        prop_assert!(validate(&p).is_empty());
        let again = emo_core::ir::parse_ir(&p.to_text()).unwrap();
        prop_assert_eq!(again, p);
    }

    #[test]
    fn relay_shares_agree_with_closure(seed in any::<u64>()) {
        let p = program(seed);
        let g = build_sdg(&p).unwrap();
        for v in g.primary_control_vertices() {
            let a = analyze_block(&g, v).unwrap();
            let allowed: BTreeSet<_> = a.members.union(&a.exclusive_sources).copied().collect();
            let want = tk::brute_relay_share(&g, &allowed, &a.producers, &a.relays);
            prop_assert_eq!(&a.relay_share, &want);
            prop_assert!(a.relays.is_subset(&a.members));
            prop_assert!(a.exclusive_sources.is_disjoint(&a.members));
            let shared: BTreeSet<_> = a.relay_share.values().flatten().copied().collect();
            let rest: BTreeSet<_> = a.producers.difference(&shared).copied().collect();
            prop_assert_eq!(&a.non_relay_share, &rest);
        }
    }

    #[test]
    fn parent_affinity_is_a_fraction(seed in any::<u64>()) {
        let p = program(seed);
        let g = build_sdg(&p).unwrap();
        for v in g.primary_control_vertices() {
            let Some(parent) = g.control_parent(v) else { continue };
            if let Some(pa) = parent_affinity(&g, parent, v) {
                let x = to_f64(pa);
                prop_assert!((0.0..=1.0).contains(&x));
            }
        }
    }

    #[test]
    fn frontend_lowers_sampled_sources(seed in any::<u64>(), split_io in any::<bool>(), reduced_loop in any::<bool>()) {
        let s = tk::random_source(&mut tk::rng(seed), 30);
        let t = translate(&s.text, &FrontendOptions { reduced_loop, split_io }).unwrap();
        prop_assert!(validate(&t.program).is_empty());
        prop_assert_eq!(t.program.len(), s.expected_len(split_io, reduced_loop));
        let loops: Vec<BTreeSet<String>> = t
            .program
            .statements()
            .iter()
            .filter(|st| st.kind == StatementKind::Loop)
            .map(|st| st.used.iter().cloned().collect())
            .collect();
        let want: Vec<BTreeSet<String>> =
            s.loop_conditions.iter().map(|c| c.iter().cloned().collect()).collect();
        prop_assert_eq!(loops, want);
        for i in 0..t.program.len() {
            let (a, b) = t.source_map.get(i).unwrap();
            prop_assert!(a <= b);
        }
    }
}

fn run_observed(g0: &Sdg, cfg: SegmentationConfig) -> (emo_core::engine::Segmentation, Vec<bool>) {
    let seen = RefCell::new(Vec::new());
    let n = g0.len();
    let mut hook = |g: &Sdg, _c: &Contraction| seen.borrow_mut().push(tk::is_partition(g, n));
    let out = Segmenter::new(cfg).observe(&mut hook).run(g0);
    (out, seen.into_inner())
}

proptest! {
    #![proptest_config(cases(96))]

    #[test]
    fn every_step_keeps_a_partition(seed in any::<u64>(), relay_free in any::<bool>()) {
        let p = program(seed);
        let g0 = build_sdg(&p).unwrap();
        let cfg = SegmentationConfig { no_relay_extract: relay_free, ..SegmentationConfig::default() };
        let (out, steps) = run_observed(&g0, cfg);
        prop_assert!(steps.iter().all(|&ok| ok));
        prop_assert!(tk::is_partition(&out.graph, p.len()));
    }

    #[test]
    fn emitted_opportunities_are_segments(seed in any::<u64>(), relay_free in any::<bool>()) {
        let p = program(seed);
        let g0 = build_sdg(&p).unwrap();
        let cfg = SegmentationConfig { no_relay_extract: relay_free, ..SegmentationConfig::default() };
        let out = Segmenter::new(cfg).run(&g0);
        let mut claimed = BTreeSet::new();
        for e in &out.emos {
            prop_assert!(g0.is_control_independent(&e.members));
            prop_assert!(g0.is_data_independent(&e.members));
            prop_assert!(g0.is_weakly_connected(&e.members));
            prop_assert_eq!(e.span, (*e.members.first().unwrap(), *e.members.last().unwrap()));
            // emitted opportunities never overlap
            prop_assert!(claimed.is_disjoint(&e.members));
            claimed.extend(e.members.iter().copied());
            prop_assert!(out.graph.contains(e.root));
            prop_assert_eq!(out.graph.members(e.root), &e.members);
        }
    }

    #[test]
    fn reruns_are_identical(seed in any::<u64>()) {
        let p = program(seed);
        let g0 = build_sdg(&p).unwrap();
        let a = Segmenter::new(SegmentationConfig::default()).snapshots(true).run(&g0);
        let b = Segmenter::new(SegmentationConfig::default()).snapshots(true).run(&g0);
        prop_assert_eq!(a.log(), b.log());
        prop_assert_eq!(&a.emos, &b.emos);
        prop_assert_eq!(a.graph.to_dot(), b.graph.to_dot());
        prop_assert_eq!(&a.phases, &b.phases);
    }

    #[test]
    fn contraction_conserves_members(seed in any::<u64>()) {
        let p = program(seed);
        let mut g = build_sdg(&p).unwrap();
        let edges: Vec<_> = g.control_edges().into_iter().chain(g.data_edges()).collect();
        let mut r = tk::rng(seed ^ 0x5eed);
        use rand::seq::SliceRandom;
        let (u, v) = match edges.choose(&mut r) { Some(e) => *e, None => return Ok(()) };
        let before = g.len();
        let union: BTreeSet<usize> = g.members(u).union(g.members(v)).copied().collect();
        match g.contract_edge(u, v) {
            Ok(c) => {
                prop_assert_eq!(g.len(), before - 1);
                prop_assert!(c.label == u || c.label == v);
                prop_assert_eq!(g.members(c.label), &union);
                prop_assert!(!g.has_data_edge(c.label, c.label));
                prop_assert!(tk::is_partition(&g, p.len()));
            }
            Err(_) => prop_assert_eq!(g.len(), before),
        }
    }

    #[test]
    fn matching_is_optimal(seed in any::<u64>(), tol in 0usize..4) {
        let mut r = tk::rng(seed);
        let methods = ["m", "n"];
        let sugg = tk::random_opportunities(&mut r, 6, &methods);
        let marks = tk::random_opportunities(&mut r, 6, &methods);
        let rep = match_opportunities(&sugg, &marks, tol);
        let (tp, dev) = tk::brute_matching(&sugg, &marks, tol);
        prop_assert_eq!(rep.tp, tp);
        let got: usize = rep
            .pairs
            .iter()
            .map(|&(i, j)| sugg[i].start.abs_diff(marks[j].start) + sugg[i].end.abs_diff(marks[j].end))
            .sum();
        prop_assert_eq!(got, dev);
        let used: BTreeSet<_> = rep.pairs.iter().map(|p| p.1).collect();
        prop_assert_eq!(used.len(), rep.pairs.len());
        prop_assert_eq!(rep.tp + rep.fp, sugg.len());
        prop_assert_eq!(rep.tp + rep.fn_, marks.len());
    }

    #[test]
    fn more_tolerance_never_loses_matches(seed in any::<u64>()) {
        let mut r = tk::rng(seed);
        let sugg = tk::random_opportunities(&mut r, 8, &["m"]);
        let marks = tk::random_opportunities(&mut r, 8, &["m"]);
        let tps: Vec<usize> = (0..6).map(|t| match_opportunities(&sugg, &marks, t).tp).collect();
        prop_assert!(tps.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn suggestion_order_does_not_change_counts(seed in any::<u64>()) {
        let mut r = tk::rng(seed);
        let mut sugg = tk::random_opportunities(&mut r, 7, &["m", "n"]);
        let marks = tk::random_opportunities(&mut r, 7, &["m", "n"]);
        let a = match_opportunities(&sugg, &marks, 2).tp;
        sugg.reverse();
        prop_assert_eq!(match_opportunities(&sugg, &marks, 2).tp, a);
    }
}
