mod common;

use common::*;
use doxa::autonomy::{truth_level, BestChoiceTable};
use doxa::relevance::{Kob, Lattice, LatticeMode, Vary};
use doxa::synthesis::SynthesisOptions;
use doxa::testgen::{prop_names, random_bltl, random_instance, rng, WorldConfig};
use rand::Rng;

#[test]
fn synthesis_matches_memoryless_enumeration() {
    let t = synthesis_vs_memoryless(0..60);
    assert!(t.ok(), "{:?}", t.failures);
}

#[test]
fn autonomous_conservation_matches_lassos() {
    let t = autonomy_vs_lassos(0..60);
    assert!(t.ok(), "{:?}", t.failures);
}

#[test]
fn autonomous_implies_doxastic() {
    let t = conservation_implication(0..40);
    assert!(t.ok(), "{:?}", t.failures);
}

#[test]
fn weak_relevance_matches_naive_lattice() {
    let opts = SynthesisOptions::default();
    let atoms = prop_names(2);
    let mut compared = 0;
    let mut relevant = 0;
    for seed in 0..40u64 {
        let mut r = rng(1000 + seed);
        let cfg = WorldConfig { states: 3 + (seed % 3) as usize, ..Default::default() };
        let mut inst = random_instance(&mut r, &cfg, 3);
        for _ in 0..r.gen_range(0..=3) {
            let s = r.gen_range(0..inst.world.num_states());
            inst.knowledge.add(s, random_bltl(&mut r, &atoms, 2));
        }
        let table = BestChoiceTable::compute(&inst.catalog, &inst.goals, &opts).unwrap();
        let (target, _) = truth_level(&inst.world, &inst.goals, &opts);
        let observe = inst.formation.observe.clone();
        let beliefs = inst.catalog.ids();
        let lat = Lattice::new(&inst.world, &inst.goals, &inst.catalog, &opts).unwrap();
        let mut q = Kob { knowledge: inst.knowledge.clone(), observe, beliefs };
        // compare at the query and at the minimal tuple below it
        for _ in 0..8 {
            let w = lat.weak_relevance(&q, LatticeMode::Full, Vary::ALL).unwrap();
            let naive = naive_weakly_relevant(
                &inst.world,
                &inst.goals,
                &inst.catalog,
                &table,
                target,
                &q.knowledge,
                &q.observe,
                &q.beliefs,
            );
            if w.conditional || naive.is_none() {
                break;
            }
            compared += 1;
            relevant += usize::from(w.holds);
            assert_eq!(Some(w.holds), naive, "seed {seed}: {}", q.describe());
            match w.smaller {
                Some(s) => {
                    assert_eq!(lat.admits_autonomous(&s).unwrap(), Some(true));
                    q = s;
                }
                None => break,
            }
        }
    }
    assert!(compared >= 30, "only {compared} definitive comparisons");
    assert!(relevant >= 10, "only {relevant} weakly relevant tuples");
}
