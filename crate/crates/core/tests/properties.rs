mod common;

use common::{
    all_traces, joint_membership, named_cells, oracle_context, random_instance, random_variant,
    reachable_count, trace_discrepancy,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_xoshiro::SplitMix64;

use tsl_core::automaton::{apply_state_order, reachable_trim, sync_product};
use tsl_core::bench::random_order;
use tsl_core::context::build_context;
use tsl_core::cover::Cover;
use tsl_core::equivalence::{check_control_equivalence, Condition};
use tsl_core::format::{parse_automaton, write_automaton};
use tsl_core::localization::{build_local_supervisor, is_control_congruence, is_maximally_reduced, localize};
use tsl_core::transformational::{carry_over_cover, isolate_detailed, tsl_with_context, AgentMapping};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn context_matches_level_set_oracle(seed in any::<u64>()) {
        let inst = random_instance(seed);
        let ctx = build_context(&inst.g, &inst.s, &inst.agents).unwrap();
        let oracle = oracle_context(&inst.g, &inst.s);
        for a in &inst.agents {
            for x in 0..inst.s.num_states() {
                let lib: Vec<usize> = ctx.disabled(a.agent_index, x).unwrap().ones().collect();
                let expect: Vec<usize> = oracle.disabled(a, x).into_iter().collect();
                prop_assert_eq!(lib, expect);
                prop_assert_eq!(ctx.plant_marked_reach(x), oracle.plant_marked[x]);
                for y in 0..inst.s.num_states() {
                    prop_assert_eq!(ctx.agent(a.agent_index).unwrap().consistent(x, y), oracle.consistent(a, x, y));
                }
            }
        }
    }

    #[test]
    fn localization_is_valid_and_maximal(seed in any::<u64>()) {
        let inst = random_instance(seed);
        let ctx = build_context(&inst.g, &inst.s, &inst.agents).unwrap();
        let oracle = oracle_context(&inst.g, &inst.s);
        let mut locs = Vec::new();
        for a in &inst.agents {
            let cover = localize(&inst.s, &ctx, a.agent_index, &Cover::singleton(inst.s.num_states())).unwrap();
            prop_assert!(oracle.is_congruence(&inst.s, a, &cover));
            prop_assert!(oracle.is_maximally_reduced(&inst.s, a, &cover));
            prop_assert!(is_control_congruence(&inst.s, &ctx, a.agent_index, &cover).unwrap());
            prop_assert!(is_maximally_reduced(&inst.s, &ctx, a.agent_index, &cover).unwrap());
            locs.push(build_local_supervisor(&inst.s, &cover, a.agent_index).unwrap().automaton);
        }
        let refs: Vec<_> = locs.iter().collect();
        prop_assert!(check_control_equivalence(&inst.g, &inst.s, &refs).unwrap().equivalent);
    }

    #[test]
    fn isolation_and_tsl_are_valid(seed in any::<u64>()) {
        let base = random_instance(seed);
        let var = random_variant(seed, &base);
        let bctx = build_context(&base.g, &base.s, &base.agents).unwrap();
        let vctx = build_context(&var.g, &var.s, &var.agents).unwrap();
        let oracle = oracle_context(&var.g, &var.s);
        let covers: Vec<Cover> = base.agents.iter()
            .map(|a| localize(&base.s, &bctx, a.agent_index, &Cover::singleton(base.s.num_states())).unwrap())
            .collect();
        for (i, a) in var.agents.iter().enumerate() {
            let iso = isolate_detailed(&covers[i], &base.s, &var.s, &vctx, a.agent_index).unwrap();
            prop_assert!(oracle.is_congruence(&var.s, a, &iso.cover));
            prop_assert!(iso.cover.refines(&iso.initial_guess));
            prop_assert_eq!(iso.cover.num_cells(), iso.initial_guess.num_cells() + iso.isolated.len());
        }
        let out = tsl_with_context(&covers, &base.s, &var.s, &vctx, &AgentMapping::identity(var.agents.len())).unwrap();
        for (a, cover) in var.agents.iter().zip(&out.covers) {
            prop_assert!(oracle.is_congruence(&var.s, a, cover));
            prop_assert!(oracle.is_maximally_reduced(&var.s, a, cover));
        }
        let refs: Vec<_> = out.supervisors.iter().map(|l| &l.automaton).collect();
        prop_assert!(check_control_equivalence(&var.g, &var.s, &refs).unwrap().equivalent);
    }

    #[test]
    fn unchanged_system_isolates_nothing(seed in any::<u64>(), order_seed in any::<u64>()) {
        let inst = random_instance(seed);
        let ctx = build_context(&inst.g, &inst.s, &inst.agents).unwrap();
        let order = random_order(&mut SplitMix64::seed_from_u64(order_seed), inst.s.num_states());
        let s_perm = apply_state_order(&inst.s, &order).unwrap();
        let pctx = build_context(&inst.g, &s_perm, &inst.agents).unwrap();
        for a in &inst.agents {
            let cover = localize(&inst.s, &ctx, a.agent_index, &Cover::singleton(inst.s.num_states())).unwrap();
            let iso = isolate_detailed(&cover, &inst.s, &s_perm, &pctx, a.agent_index).unwrap();
            prop_assert!(iso.isolated.is_empty());
            prop_assert_eq!(&iso.cover, &iso.initial_guess);
            prop_assert_eq!(named_cells(&s_perm, &iso.cover), named_cells(&inst.s, &cover));
        }
    }

    #[test]
    fn joint_search_agrees_with_trace_enumeration(seed in any::<u64>(), drop in any::<prop::sample::Index>()) {
        let inst = random_instance(seed);
        prop_assume!(inst.s.num_states() <= 8 && inst.g.num_states() <= 8);
        let ctx = build_context(&inst.g, &inst.s, &inst.agents).unwrap();
        let mut locs: Vec<_> = inst.agents.iter().map(|a| {
            let c = localize(&inst.s, &ctx, a.agent_index, &Cover::singleton(inst.s.num_states())).unwrap();
            build_local_supervisor(&inst.s, &c, a.agent_index).unwrap().automaton
        }).collect();
        // Sometimes compare against the unrestricted plant instead, which is
        // a mismatch whenever S disables anything or unmarks a plant-marked string.
        if drop.index(2) == 0 {
            locs.clear();
        }
        let refs: Vec<_> = locs.iter().collect();
        let verdict = check_control_equivalence(&inst.g, &inst.s, &refs).unwrap();
        let brute = trace_discrepancy(&inst.g, &inst.s, &refs, 8);
        match &verdict.counterexample {
            None => prop_assert!(brute.is_none()),
            Some(c) => {
                let ev = inst.g.events();
                let trace: Vec<usize> = c.trace.iter().map(|n| ev.lookup(n).unwrap()).collect();
                let mut lhs = vec![&inst.g];
                lhs.extend(refs.iter().copied());
                let a = joint_membership(&lhs, &trace);
                let b = joint_membership(&[&inst.s, &inst.g], &trace);
                match c.condition {
                    Condition::Language => prop_assert_ne!(a.0, b.0),
                    Condition::MarkedLanguage => prop_assert!(a.0 && b.0 && a.1 != b.1),
                }
                if trace.len() <= 8 {
                    prop_assert!(brute.is_some());
                }
            }
        }
    }

    #[test]
    fn format_round_trips(seed in any::<u64>()) {
        let inst = random_instance(seed);
        for a in [&inst.g, &inst.s] {
            let text = write_automaton(a);
            let back = parse_automaton(&text).unwrap();
            prop_assert_eq!(&back, a);
            prop_assert_eq!(write_automaton(&back), text);
        }
    }

    #[test]
    fn product_with_itself_is_isomorphic(seed in any::<u64>()) {
        let inst = random_instance(seed);
        let p = sync_product(&[&inst.g, &inst.g]).unwrap();
        prop_assert_eq!(p.num_states(), reachable_count(&inst.g));
        prop_assert_eq!(p.num_transitions(), reachable_trim(&inst.g).num_transitions());
        for t in all_traces(inst.g.events().len(), 4) {
            prop_assert_eq!(p.run(&t).is_some(), inst.g.run(&t).is_some());
        }
    }

    #[test]
    fn reordering_preserves_language(seed in any::<u64>(), order_seed in any::<u64>()) {
        let inst = random_instance(seed);
        let order = random_order(&mut SplitMix64::seed_from_u64(order_seed), inst.s.num_states());
        let p = apply_state_order(&inst.s, &order).unwrap();
        for t in all_traces(inst.s.events().len(), 4) {
            let (a, b) = (inst.s.run(&t), p.run(&t));
            prop_assert_eq!(a.is_some(), b.is_some());
            if let (Some(x), Some(y)) = (a, b) {
                prop_assert_eq!(inst.s.state_name(x), p.state_name(y));
                prop_assert_eq!(inst.s.is_marked(x), p.is_marked(y));
            }
        }
    }

    #[test]
    fn carry_over_keeps_retained_cells(seed in any::<u64>()) {
        let base = random_instance(seed);
        let var = random_variant(seed, &base);
        let cover = Cover::from_cell_ids((0..base.s.num_states()).map(|x| x % 3).collect());
        let carried = carry_over_cover(&cover, &base.s, &var.s).unwrap();
        for x in 0..var.s.num_states() {
            for y in 0..var.s.num_states() {
                let (bx, by) = (base.s.state_index(var.s.state_name(x)), base.s.state_index(var.s.state_name(y)));
                match (bx, by) {
                    (Some(bx), Some(by)) => prop_assert_eq!(carried.same_cell(x, y), cover.same_cell(bx, by)),
                    _ => prop_assert_eq!(carried.same_cell(x, y), x == y),
                }
            }
        }
    }
}

/// The random corpus exercises merges, isolations, refusals and failing verdicts.
#[test]
fn random_corpus_is_not_degenerate() {
    let (mut merged, mut isolated, mut refusing, mut failing, mut added, mut multi_agent) = (0, 0, 0, 0, 0, 0);
    for seed in 0..200 {
        let base = random_instance(seed);
        let var = random_variant(seed, &base);
        let bctx = build_context(&base.g, &base.s, &base.agents).unwrap();
        let vctx = build_context(&var.g, &var.s, &var.agents).unwrap();
        multi_agent += usize::from(base.agents.len() > 1);
        added += usize::from(var.s.states().iter().any(|n| base.s.state_index(n).is_none()));
        if (0..base.s.num_states()).any(|x| base.agents.iter().any(|a| bctx.disabled(a.agent_index, x).unwrap().count_ones(..) > 0)) {
            refusing += 1;
        }
        if !check_control_equivalence(&base.g, &base.s, &[]).unwrap().equivalent {
            failing += 1;
        }
        for a in &base.agents {
            let c = localize(&base.s, &bctx, a.agent_index, &Cover::singleton(base.s.num_states())).unwrap();
            merged += usize::from(c.num_cells() < base.s.num_states());
            let iso = isolate_detailed(&c, &base.s, &var.s, &vctx, a.agent_index).unwrap();
            isolated += usize::from(!iso.isolated.is_empty());
        }
    }
    println!("merged {merged} isolated {isolated} refusing {refusing} failing {failing} added {added} multi {multi_agent}");
    for (what, n) in [("merged", merged), ("isolated", isolated), ("refusing", refusing), ("failing", failing), ("added", added), ("multi-agent", multi_agent)] {
        assert!(n >= 20, "only {n} instances with {what}");
    }
}
