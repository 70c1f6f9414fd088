//! Seeded generators of small random instances for property tests and
//! oracle cross-checks.

use crate::belief::{rooted_copy, Belief, BeliefCatalog, KnowledgeLabeling, Reality};
use crate::formation::RegularBeliefFormation;
use crate::goals::{normalize_goal_list, GoalList};
use crate::ltl::{Bltl, Ltl};
use crate::propset::PropSet;
use crate::world::{ActionPair, StateId, World, WorldBuilder};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Proposition names `p0`, `p1`, ...
pub fn prop_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i}")).collect()
}

/// Random formula of temporal depth at most `depth` over `atoms`.
pub fn random_ltl(rng: &mut TestRng, atoms: &[String], depth: usize) -> Ltl {
    if depth == 0 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..10) {
            0 => Ltl::True,
            1 => Ltl::False,
            _ => Ltl::atom(atoms.choose(rng).expect("atoms")),
        };
    }
    let sub = |rng: &mut TestRng| random_ltl(rng, atoms, depth - 1);
    match rng.gen_range(0..9) {
        0 => Ltl::not(sub(rng)),
        1 => Ltl::and(sub(rng), sub(rng)),
        2 => Ltl::or(sub(rng), sub(rng)),
        3 => Ltl::implies(sub(rng), sub(rng)),
        4 => Ltl::Iff(Box::new(sub(rng)), Box::new(sub(rng))),
        5 => Ltl::next(sub(rng)),
        6 => Ltl::until(sub(rng), sub(rng)),
        7 => Ltl::globally(sub(rng)),
        _ => Ltl::eventually(sub(rng)),
    }
}

/// Random propositional formula.
pub fn random_prop(rng: &mut TestRng, atoms: &[String], depth: usize) -> Ltl {
    if depth == 0 || rng.gen_bool(0.3) {
        let a = Ltl::atom(atoms.choose(rng).expect("atoms"));
        return if rng.gen_bool(0.3) { Ltl::not(a) } else { a };
    }
    match rng.gen_range(0..3) {
        0 => Ltl::not(random_prop(rng, atoms, depth - 1)),
        1 => Ltl::and(random_prop(rng, atoms, depth - 1), random_prop(rng, atoms, depth - 1)),
        _ => Ltl::or(random_prop(rng, atoms, depth - 1), random_prop(rng, atoms, depth - 1)),
    }
}

/// Random ultimately periodic word over props `0..n_props` with
/// `|stem| + |cycle| <= max_len`.
pub fn random_lasso(rng: &mut TestRng, n_props: usize, max_len: usize) -> (Vec<PropSet>, Vec<PropSet>) {
    let total = rng.gen_range(1..=max_len.max(1));
    let stem_len = rng.gen_range(0..total);
    let letter = |rng: &mut TestRng| PropSet::from_bits(rng.gen_range(0..1u128 << n_props));
    let stem = (0..stem_len).map(|_| letter(rng)).collect();
    let cycle = (stem_len..total).map(|_| letter(rng)).collect();
    (stem, cycle)
}

#[derive(Clone, Debug)]
pub struct WorldConfig {
    pub states: usize,
    pub props: usize,
    pub ego: usize,
    pub env: usize,
    /// Maximum number of successors per action pair.
    pub max_succ: usize,
    /// Chance that an action pair leads to the sink.
    pub p_sink: f64,
    /// Adds a family `id` giving every state a distinct label.
    pub unique_labels: bool,
    pub max_init: usize,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig { states: 5, props: 2, ego: 2, env: 1, max_succ: 2, p_sink: 0.1, unique_labels: false, max_init: 2 }
    }
}

fn signature(cfg: &WorldConfig) -> WorldBuilder {
    let mut b = WorldBuilder::new();
    for p in prop_names(cfg.props) {
        b.bool_prop(&p).expect("fresh prop");
    }
    if cfg.unique_labels {
        let ids: Vec<String> = (0..cfg.states).map(|i| i.to_string()).collect();
        b.family("id", &ids).expect("fresh family");
    }
    for a in 0..cfg.ego {
        b.ego_action(&format!("a{a}")).expect("fresh action");
    }
    for e in 0..cfg.env {
        b.env_action(&format!("e{e}")).expect("fresh action");
    }
    b
}

/// Random world with states `q0..`, a sink and every missing action pair
/// routed to the sink.
pub fn random_world(rng: &mut TestRng, cfg: &WorldConfig) -> World {
    let mut b = signature(cfg);
    let props = prop_names(cfg.props);
    let mut ids = Vec::new();
    for i in 0..cfg.states {
        let mut labels: Vec<String> = props.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
        if cfg.unique_labels {
            labels.push(format!("id={i}"));
        }
        ids.push(b.state(&format!("q{i}"), &labels).expect("fresh state"));
    }
    b.sink("sink").expect("fresh sink");
    let n_init = rng.gen_range(1..=cfg.max_init.clamp(1, cfg.states));
    let mut init: Vec<StateId> = ids.choose_multiple(rng, n_init).copied().collect();
    init.sort_unstable();
    b.set_init(init);
    for &s in &ids {
        for ego in 0..cfg.ego {
            for env in 0..cfg.env {
                if rng.gen_bool(cfg.p_sink) {
                    continue;
                }
                let k = rng.gen_range(1..=cfg.max_succ.max(1));
                for &t in ids.choose_multiple(rng, k) {
                    b.edge_ids(s, t, vec![ActionPair { ego, env }]);
                }
            }
        }
    }
    b.totalize(true);
    b.build().expect("generated world is valid")
}

/// A safety goal followed by a reachability goal over the world's props.
pub fn random_goals(rng: &mut TestRng, n_props: usize) -> GoalList {
    let atoms = prop_names(n_props);
    let safe = Ltl::globally(random_prop(rng, &atoms, 2));
    let reach = Ltl::eventually(random_prop(rng, &atoms, 1));
    normalize_goal_list(&[(safe, 1), (reach, 2)]).expect("distinct priorities")
}

/// Random belief with one to three realities, each rooted at a state of a
/// fresh random world with the given signature.
pub fn random_belief(rng: &mut TestRng, id: &str, cfg: &WorldConfig) -> Belief {
    let n = rng.gen_range(1..=3);
    let realities = (0..n)
        .map(|j| {
            let w = random_world(rng, cfg);
            let s = rng.gen_range(0..cfg.states);
            let copy = rooted_copy(&w, s);
            let init = copy.init()[0];
            Reality::new(&format!("{id}w{j}"), Arc::new(copy), vec![init])
        })
        .collect();
    Belief::new(id, realities)
}

/// Random BLTL formula with LTL bodies of depth at most `depth`.
pub fn random_bltl(rng: &mut TestRng, atoms: &[String], depth: usize) -> Bltl {
    match rng.gen_range(0..6) {
        0 => Bltl::not(random_bltl(rng, atoms, depth)),
        1 => Bltl::and(random_bltl(rng, atoms, depth), random_bltl(rng, atoms, depth)),
        2 | 3 => Bltl::k(random_ltl(rng, atoms, depth)),
        _ => Bltl::kc(random_ltl(rng, atoms, depth)),
    }
}

/// A design world with goals, a catalog and a total formation.
#[derive(Clone, Debug)]
pub struct Instance {
    pub world: World,
    pub goals: GoalList,
    pub knowledge: KnowledgeLabeling,
    pub catalog: BeliefCatalog,
    pub formation: RegularBeliefFormation,
}

/// Random instance. Beliefs place the system at design states or at states
/// of unrelated worlds; the formation reacts to the first and the latest
/// observation and falls back to a fixed belief. Knowledge is empty, so
/// every formation is consistent.
pub fn random_instance(rng: &mut TestRng, cfg: &WorldConfig, max_beliefs: usize) -> Instance {
    let world = random_world(rng, cfg);
    let goals = random_goals(rng, cfg.props);
    let reach = world.reachable_from(world.init());
    let live: Vec<StateId> = (0..world.num_states()).filter(|&s| reach[s] && s != world.sink()).collect();
    let mut catalog = BeliefCatalog::new();
    let n_beliefs = rng.gen_range(1..=max_beliefs.max(1));
    let mut ids = Vec::new();
    for i in 0..n_beliefs {
        let id = format!("B{i}");
        let n_real = rng.gen_range(1..=2);
        let mut realities = Vec::new();
        for j in 0..n_real {
            let wid = format!("w{i}_{j}");
            let copy = if rng.gen_bool(0.7) {
                rooted_copy(&world, *live.choose(rng).expect("an initial state is live"))
            } else {
                let other = random_world(rng, cfg);
                rooted_copy(&other, rng.gen_range(0..cfg.states))
            };
            let init = copy.init()[0];
            let copy = Arc::new(copy);
            catalog.add_world(&wid, copy.clone()).expect("fresh world id");
            realities.push(Reality::new(&wid, copy, vec![init]));
        }
        catalog.add_belief(Belief::new(&id, realities)).expect("fresh belief id");
        ids.push(id);
    }
    let props = prop_names(cfg.props);
    let mut observe: Vec<String> = props.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
    if observe.is_empty() {
        observe.push(props[0].clone());
    }
    let mask = world.resolve_observables_lenient(&observe);
    let mut tokens: Vec<String> = live.iter().map(|&s| world.obs_token(s, mask)).collect();
    tokens.sort();
    tokens.dedup();
    let mut rules: Vec<(String, String)> = Vec::new();
    for t in &tokens {
        if rng.gen_bool(0.5) {
            rules.push((t.clone(), ids.choose(rng).expect("beliefs").clone()));
        }
        if rng.gen_bool(0.6) {
            rules.push((format!(".* {t}"), ids.choose(rng).expect("beliefs").clone()));
        }
    }
    rules.push((".*".into(), ids.choose(rng).expect("beliefs").clone()));
    let refs: Vec<(&str, &str)> = rules.iter().map(|(r, b)| (r.as_str(), b.as_str())).collect();
    let formation = RegularBeliefFormation::from_texts(&observe, &refs).expect("generated rules parse");
    let knowledge = KnowledgeLabeling::empty(world.num_states());
    Instance { world, goals, knowledge, catalog, formation }
}
