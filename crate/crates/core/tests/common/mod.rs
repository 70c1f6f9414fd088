//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use doxa::autonomy::{synthesize_autonomous_with, AutonomyOutcome, BestChoiceTable};
use doxa::belief::{BeliefCatalog, KnowledgeBase, KnowledgeLabeling, SatCache};
use doxa::buchi::resolver;
use doxa::formation::RegularBeliefFormation;
use doxa::goals::GoalList;
use doxa::propset::PropSet;
use doxa::synthesis::{verify_strategy, Arena, StrategyMachine, SynthesisOptions};
use doxa::world::{StateId, World};
use std::collections::HashMap;

/// Whether some memoryless map from observations to actions guarantees all
/// goals up to `n`, by trying every map.
pub fn memoryless_exists(arena: &Arena, goals: &GoalList, n: usize) -> bool {
    let k = arena.obs_names.len();
    let a = arena.actions.len();
    let total = a.pow(k as u32);
    (0..total).any(|code| {
        let mut c = code;
        let choice: Vec<usize> = (0..k)
            .map(|_| {
                let d = c % a;
                c /= a;
                d
            })
            .collect();
        let m = StrategyMachine::memoryless(arena.obs_names.clone(), arena.actions.clone(), &choice, 0);
        verify_strategy(arena, goals, n, &m).unwrap().holds()
    })
}

/// Explicit check that every autonomous system playing decisive best choices
/// reaches `target`: walks all simple paths over (design state, formation
/// state) pairs and evaluates each closing lasso directly. Sufficient for
/// goals made of safety and reachability components.
pub fn autonomous_oracle(
    wd: &World,
    goals: &GoalList,
    f: &RegularBeliefFormation,
    table: &BestChoiceTable,
    target: usize,
) -> bool {
    let mask = wd.resolve_observables_lenient(&f.observe);
    let dfa = f.compile();
    let r = resolver(wd);
    let sink_label = wd.label(wd.sink());
    let ok = |path: &[(StateId, usize)], back: Option<usize>| -> bool {
        let labels: Vec<PropSet> = path.iter().map(|&(s, _)| wd.label(s)).collect();
        match back {
            Some(i) => goals.lasso_satisfies_up_to(&labels[..i], &labels[i..], target, &r),
            None => goals.lasso_satisfies_up_to(&labels, &[sink_label], target, &r),
        }
    };
    type PathCheck<'a> = dyn Fn(&[(StateId, usize)], Option<usize>) -> bool + 'a;
    fn dfs(
        wd: &World,
        f: &RegularBeliefFormation,
        dfa: &doxa::formation::FormationDfa,
        mask: PropSet,
        table: &BestChoiceTable,
        path: &mut Vec<(StateId, usize)>,
        ok: &PathCheck<'_>,
    ) -> bool {
        let (s, q) = *path.last().unwrap();
        let belief = &f.rules[dfa.rule[q].expect("total formation")].belief;
        let decisive = &table.get(belief).expect("catalog belief").decisive;
        if decisive.is_empty() {
            return ok(path, None);
        }
        for a in decisive {
            let ego = wd.ego_action_id(a).unwrap();
            for env in 0..wd.env_actions().len() {
                for &t in wd.successors(s, ego, env) {
                    if t == wd.sink() {
                        if !ok(path, None) {
                            return false;
                        }
                        continue;
                    }
                    let key = (t, dfa.step(q, &wd.obs_token(t, mask)));
                    if let Some(i) = path.iter().position(|&k| k == key) {
                        if !ok(path, Some(i)) {
                            return false;
                        }
                        continue;
                    }
                    path.push(key);
                    let good = dfs(wd, f, dfa, mask, table, path, ok);
                    path.pop();
                    if !good {
                        return false;
                    }
                }
            }
        }
        true
    }
    wd.init().iter().all(|&s0| {
        if s0 == wd.sink() {
            return ok(&[], None);
        }
        let mut path = vec![(s0, dfa.step(dfa.init, &wd.obs_token(s0, mask)))];
        dfs(wd, f, &dfa, mask, table, &mut path, &ok)
    })
}

/// Naive weak relevance: tries every tuple below `(k, observe, beliefs)`
/// with formulas dropped one subset at a time. A tuple counts as strictly
/// smaller when it has fewer observations or beliefs, or when its knowledge
/// admits a different set of beliefs at some state.
#[allow(clippy::too_many_arguments)]
pub fn naive_weakly_relevant(
    wd: &World,
    goals: &GoalList,
    catalog: &BeliefCatalog,
    table: &BestChoiceTable,
    target: usize,
    k: &KnowledgeLabeling,
    observe: &[String],
    beliefs: &[String],
) -> Option<bool> {
    let opts = SynthesisOptions::default();
    let cache = SatCache::new();
    let admits = |k: &KnowledgeLabeling, o: &[String], b: &[String]| -> Option<bool> {
        let cat = catalog.restrict(b);
        let tab = table.restrict(b);
        match synthesize_autonomous_with(wd, goals, k, o, &cat, &tab, target, &opts).unwrap() {
            AutonomyOutcome::Exists(_) => Some(true),
            AutonomyOutcome::Impossible { .. } => Some(false),
            AutonomyOutcome::Inconclusive { .. } => None,
        }
    };
    if !admits(k, observe, beliefs)? {
        return Some(false);
    }
    let admitted = |kb: &KnowledgeBase| -> Vec<bool> {
        catalog.beliefs().iter().map(|b| kb.satisfied_by(b, &cache)).collect()
    };
    let mut slots: Vec<(StateId, usize)> = Vec::new();
    for s in 0..k.num_states() {
        for i in 0..k.at(s).len() {
            slots.push((s, i));
        }
    }
    assert!(slots.len() <= 12, "oracle limited to 12 formulas");
    let subsets = |xs: &[String]| -> Vec<Vec<String>> {
        (0..1u32 << xs.len())
            .map(|m| (0..xs.len()).filter(|i| m & (1 << i) != 0).map(|i| xs[i].clone()).collect())
            .collect()
    };
    let full: HashMap<StateId, Vec<bool>> = (0..k.num_states()).map(|s| (s, admitted(k.at(s)))).collect();
    let mut unknown = false;
    for drop in 0..1u32 << slots.len() {
        let per_state: Vec<KnowledgeBase> = (0..k.num_states())
            .map(|s| {
                KnowledgeBase::new(
                    k.at(s)
                        .formulas()
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| {
                            let slot = slots.iter().position(|&x| x == (s, i)).unwrap();
                            drop & (1 << slot) == 0
                        })
                        .map(|(_, f)| f.clone())
                        .collect(),
                )
            })
            .collect();
        let k2 = KnowledgeLabeling::from_vec(per_state);
        let k_smaller = (0..k.num_states()).any(|s| admitted(k2.at(s)) != full[&s]);
        for o in subsets(observe) {
            for b in subsets(beliefs) {
                let smaller = k_smaller || o.len() < observe.len() || b.len() < beliefs.len();
                if !smaller {
                    continue;
                }
                match admits(&k2, &o, &b) {
                    Some(true) => return Some(false),
                    Some(false) => {}
                    None => unknown = true,
                }
            }
        }
    }
    if unknown {
        None
    } else {
        Some(true)
    }
}

/// Outcome of a randomized suite.
#[derive(Debug, Default)]
pub struct Tally {
    pub checked: usize,
    pub failures: Vec<String>,
    /// Cases skipped because an answer was bound-limited.
    pub skipped: usize,
}

impl Tally {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

fn table_of(inst: &doxa::testgen::Instance, opts: &SynthesisOptions) -> BestChoiceTable {
    BestChoiceTable::compute(&inst.catalog, &inst.goals, opts).unwrap()
}

/// Autonomous conservation implies doxastic conservation on random instances.
pub fn conservation_implication(seeds: std::ops::Range<u64>) -> Tally {
    use doxa::relevance::{conserves_autonomous, conserves_doxastic};
    use doxa::testgen::{random_instance, rng, WorldConfig};
    let opts = SynthesisOptions::default();
    let mut t = Tally::default();
    for seed in seeds {
        let mut r = rng(seed);
        let states = 3 + (seed % 6) as usize;
        let cfg = WorldConfig { states, ..Default::default() };
        let inst = random_instance(&mut r, &cfg, 4);
        let table = table_of(&inst, &opts);
        let a = conserves_autonomous(&inst.world, &inst.goals, &inst.knowledge, &inst.catalog, &inst.formation, &table, &opts)
            .unwrap();
        let d = conserves_doxastic(&inst.world, &inst.goals, &inst.knowledge, &inst.catalog, &inst.formation, &opts).unwrap();
        t.checked += 1;
        if a.conditional || d.conditional {
            t.skipped += 1;
            continue;
        }
        if a.holds && !d.holds {
            t.failures.push(format!("seed {seed}: autonomous conservation without doxastic conservation"));
        }
    }
    t
}

/// Exact synthesis against exhaustive memoryless enumeration on worlds with
/// distinct state labels, where memoryless strategies are complete.
pub fn synthesis_vs_memoryless(seeds: std::ops::Range<u64>) -> Tally {
    use doxa::synthesis::synthesize;
    use doxa::testgen::{random_goals, random_world, rng, WorldConfig};
    let opts = SynthesisOptions::default();
    let mut t = Tally::default();
    for seed in seeds {
        let mut r = rng(seed);
        let states = 2 + (seed % 5) as usize;
        let cfg = WorldConfig { states, unique_labels: true, env: 1 + (seed % 2) as usize, ..Default::default() };
        let w = random_world(&mut r, &cfg);
        let goals = random_goals(&mut r, cfg.props);
        let arena = Arena::with_mask(&w, w.all_props());
        for n in 1..goals.len() {
            t.checked += 1;
            let exact = synthesize(&arena, &goals, n, &opts);
            if let doxa::SynthesisOutcome::Realized(m) = &exact {
                if !verify_strategy(&arena, &goals, n, m).unwrap().holds() {
                    t.failures.push(format!("seed {seed} level {n}: synthesized machine fails"));
                }
            }
            if exact.is_realized() != memoryless_exists(&arena, &goals, n) {
                t.failures.push(format!("seed {seed} level {n}: synthesis and enumeration disagree"));
            }
        }
    }
    t
}

/// The product-based autonomous conservation check against explicit lasso
/// enumeration.
pub fn autonomy_vs_lassos(seeds: std::ops::Range<u64>) -> Tally {
    use doxa::autonomy::truth_level;
    use doxa::relevance::conserves_autonomous;
    use doxa::testgen::{random_instance, rng, WorldConfig};
    let opts = SynthesisOptions::default();
    let mut t = Tally::default();
    for seed in seeds {
        let mut r = rng(seed);
        let states = 3 + (seed % 8) as usize;
        let cfg = WorldConfig { states, ..Default::default() };
        let inst = random_instance(&mut r, &cfg, 3);
        let table = table_of(&inst, &opts);
        let a = conserves_autonomous(&inst.world, &inst.goals, &inst.knowledge, &inst.catalog, &inst.formation, &table, &opts)
            .unwrap();
        let (target, _) = truth_level(&inst.world, &inst.goals, &opts);
        t.checked += 1;
        let oracle = autonomous_oracle(&inst.world, &inst.goals, &inst.formation, &table, target);
        if a.holds != oracle {
            t.failures.push(format!("seed {seed}: product says {}, lassos say {oracle}", a.holds));
        }
        if let Some(w) = &a.witness {
            let labels = |xs: &[doxa::relevance::WitnessStep]| -> Vec<PropSet> {
                xs.iter().map(|s| inst.world.label(inst.world.state_id(&s.state).unwrap())).collect()
            };
            let r = resolver(&inst.world);
            if inst.goals.lasso_satisfies_up_to(&labels(&w.stem), &labels(&w.cycle), target, &r) {
                t.failures.push(format!("seed {seed}: witness satisfies the goals"));
            }
        }
    }
    t
}

/// Büchi translation against direct evaluation on random formulas and words.
pub fn nba_vs_lassos(seeds: std::ops::Range<u64>) -> Tally {
    use doxa::buchi::Nba;
    use doxa::testgen::{prop_names, random_lasso, random_ltl, rng};
    let atoms = prop_names(2);
    let res = |n: &str| atoms.iter().position(|a| a == n);
    let mut t = Tally::default();
    for seed in seeds {
        let mut r = rng(seed);
        let f = random_ltl(&mut r, &atoms, 4);
        let (stem, cycle) = random_lasso(&mut r, 2, 6);
        let nba = Nba::from_ltl(&f, &res);
        t.checked += 1;
        if nba.accepts_lasso(&stem, &cycle) != f.eval_lasso(&stem, &cycle, &res) {
            t.failures.push(format!("seed {seed}: {f} on {stem:?} ({cycle:?})^w"));
        }
    }
    t
}

/// Duality, conjunction and K-monotonicity of belief satisfaction.
pub fn belief_invariants(seeds: std::ops::Range<u64>) -> Tally {
    use doxa::belief::{belief_satisfies, Belief};
    use doxa::ltl::Bltl;
    use doxa::testgen::{prop_names, random_belief, random_bltl, random_ltl, rng, WorldConfig};
    let atoms = prop_names(2);
    let cfg = WorldConfig { states: 4, ..Default::default() };
    let mut t = Tally::default();
    for seed in seeds {
        let mut r = rng(seed);
        let b = random_belief(&mut r, "B", &cfg);
        let phi = random_bltl(&mut r, &atoms, 3);
        let psi = random_bltl(&mut r, &atoms, 3);
        t.checked += 1;
        let v = belief_satisfies(&b, &phi);
        if belief_satisfies(&b, &Bltl::not(phi.clone())) == v {
            t.failures.push(format!("seed {seed}: duality fails for {phi}"));
        }
        let both = belief_satisfies(&b, &Bltl::and(phi.clone(), psi.clone()));
        if both != (v && belief_satisfies(&b, &psi)) {
            t.failures.push(format!("seed {seed}: conjunction fails for {phi} and {psi}"));
        }
        let body = random_ltl(&mut r, &atoms, 3);
        for k in [Bltl::k(body.clone()), Bltl::kc(body)] {
            if belief_satisfies(&b, &k) {
                for i in 0..b.realities.len() {
                    let sub = Belief::new("B'", vec![b.realities[i].clone()]);
                    if !belief_satisfies(&sub, &k) {
                        t.failures.push(format!("seed {seed}: monotonicity fails for {k}"));
                    }
                }
            }
        }
    }
    t
}
