mod common;

use doxa::autonomy::BestChoiceTable;
use doxa::belief::belief_satisfies;
use doxa::buchi::{resolver, world_satisfies};
use doxa::io::{
    parse_formation, parse_goals, parse_knowledge, parse_strategy, parse_world, write_formation, write_goals,
    write_knowledge, write_strategy, write_world,
};
use doxa::ltl::{parse_bltl, parse_ltl, Bltl};
use doxa::relevance::{conserves_autonomous, conserves_doxastic};
use doxa::synthesis::{max_achievable, verify_strategy, Arena, SynthesisOptions};
use doxa::testgen::*;
use proptest::prelude::*;
use rand::Rng;

fn small_cfg(states: usize) -> WorldConfig {
    WorldConfig { states, ..Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nba_agrees_with_direct_evaluation(seed in any::<u64>()) {
        let t = common::nba_vs_lassos(seed..seed + 4);
        prop_assert!(t.ok(), "{:?}", t.failures);
    }

    #[test]
    fn belief_duality_and_monotonicity(seed in any::<u64>()) {
        let t = common::belief_invariants(seed..seed + 2);
        prop_assert!(t.ok(), "{:?}", t.failures);
    }

    #[test]
    fn formulas_round_trip_through_printer(seed in any::<u64>()) {
        let mut r = rng(seed);
        let atoms = prop_names(3);
        let f = random_ltl(&mut r, &atoms, 4);
        prop_assert_eq!(parse_ltl(&f.to_string()).unwrap(), f);
        let b = random_bltl(&mut r, &atoms, 2);
        prop_assert_eq!(parse_bltl(&b.to_string()).unwrap(), b);
    }

    #[test]
    fn counterexamples_violate(seed in any::<u64>(), states in 2usize..7) {
        let mut r = rng(seed);
        let w = random_world(&mut r, &small_cfg(states));
        let f = random_ltl(&mut r, &prop_names(2), 3);
        let res = resolver(&w);
        match world_satisfies(&w, w.init(), &f) {
            Ok(()) => {
                // every self-looping initial path of length one is a model
                for &s in w.init() {
                    if w.has_edge(s, s) {
                        prop_assert!(f.eval_lasso(&[], &[w.label(s)], &res));
                    }
                }
            }
            Err(l) => {
                prop_assert!(w.init().contains(l.stem.first().unwrap_or(&l.cycle[0])));
                let stem: Vec<_> = l.stem.iter().map(|&s| w.label(s)).collect();
                let cycle: Vec<_> = l.cycle.iter().map(|&s| w.label(s)).collect();
                prop_assert!(!f.eval_lasso(&stem, &cycle, &res));
                let path: Vec<_> = l.stem.iter().chain(&l.cycle).chain(l.cycle.first()).copied().collect();
                prop_assert!(w.check_path(&path).is_ok());
            }
        }
    }

    #[test]
    fn world_files_round_trip(seed in any::<u64>(), states in 1usize..8) {
        let w = random_world(&mut rng(seed), &WorldConfig { unique_labels: seed % 2 == 0, ..small_cfg(states) });
        prop_assert_eq!(parse_world(&write_world(&w)).unwrap(), w);
    }

    #[test]
    fn bundle_parts_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut inst = random_instance(&mut r, &small_cfg(4), 3);
        inst.knowledge.add(0, random_bltl(&mut r, &prop_names(2), 2));
        let g = parse_goals(&write_goals(&inst.goals)).unwrap();
        prop_assert_eq!(g.goals(), inst.goals.goals());
        let f = parse_formation(&write_formation(&inst.formation)).unwrap();
        prop_assert_eq!(f, inst.formation.clone());
        let k = parse_knowledge(&write_knowledge(&inst.knowledge, &inst.world), &inst.world).unwrap();
        prop_assert_eq!(k, inst.knowledge.clone());
        let arena = Arena::with_mask(&inst.world, inst.world.all_props());
        let m = max_achievable(&arena, &inst.goals, &SynthesisOptions::default()).machine;
        prop_assert_eq!(parse_strategy(&write_strategy(&m)).unwrap(), m);
    }

    #[test]
    fn generated_beliefs_are_well_formed(seed in any::<u64>()) {
        let b = random_belief(&mut rng(seed), "B", &small_cfg(4));
        prop_assert!(b.validate(None).is_empty());
        prop_assert!(belief_satisfies(&b, &Bltl::k(doxa::Ltl::True)));
    }

    #[test]
    fn best_strategies_achieve_their_level(seed in any::<u64>(), states in 2usize..7) {
        let mut r = rng(seed);
        let w = random_world(&mut r, &small_cfg(states));
        let goals = random_goals(&mut r, 2);
        let mask = doxa::PropSet::from_bits(r.gen_range(0..4u128) << 1);
        let arena = Arena::with_mask(&w, mask);
        let best = max_achievable(&arena, &goals, &SynthesisOptions::default());
        prop_assert!(verify_strategy(&arena, &goals, best.level, &best.machine).unwrap().holds());
        if best.level + 1 < goals.len() && !best.conditional {
            prop_assert!(!verify_strategy(&arena, &goals, best.level + 1, &best.machine).unwrap().holds());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn autonomous_conservation_implies_doxastic(seed in any::<u64>(), states in 3usize..9) {
        let opts = SynthesisOptions::default();
        let inst = random_instance(&mut rng(seed), &small_cfg(states), 4);
        let table = BestChoiceTable::compute(&inst.catalog, &inst.goals, &opts).unwrap();
        let a = conserves_autonomous(&inst.world, &inst.goals, &inst.knowledge, &inst.catalog, &inst.formation, &table, &opts).unwrap();
        let d = conserves_doxastic(&inst.world, &inst.goals, &inst.knowledge, &inst.catalog, &inst.formation, &opts).unwrap();
        prop_assert!(!a.holds || d.holds || d.conditional);
    }
}
