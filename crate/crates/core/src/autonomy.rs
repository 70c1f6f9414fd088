//! Possible-worlds strategies, best choices of beliefs, and synthesis of
//! autonomous systems.
//!
//! A belief is analysed through the disjoint union of its realities: one
//! copy of each possible world, with a shared sink. Initial states of the
//! union are grouped by their full label; each group gets its own best level,
//! since a strategy can tell groups apart from the first observation.
//!
//! An action is a *best choice* of a belief when forcing it at every current
//! state still lets some strategy reach the best level in every group. Those
//! are exactly the choices of dominant, current-state decisive strategies.

use crate::belief::{Belief, BeliefCatalog, KnowledgeBase, KnowledgeLabeling, SatCache};
use crate::buchi::resolver;
use crate::formation::{check_knowledge_consistency, dfa_to_regexes, Regex, RegularBeliefFormation, Rule};
use crate::goals::GoalList;
use crate::io::EnvScript;
use crate::propset::PropSet;
use crate::synthesis::{max_achievable, synthesize, Arena, StrategyMachine, SynthesisOptions, SynthesisOutcome};
use crate::world::{ActionId, ActionPair, StateId, World, WorldBuilder, WorldError, UNDEF};
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap, VecDeque};
use thiserror::Error;

/// Ego action of the relabeled world taken when no belief justifies a move.
pub const BOT: &str = "⊥";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutonomyError {
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("belief `{0}` is not in the catalog")]
    UnknownBelief(String),
    #[error("no formation rule matches history `{0}`")]
    NoRuleMatches(String),
    #[error("script: {0}")]
    Script(String),
}

/// Disjoint union of a belief's realities.
#[derive(Clone, Debug)]
pub struct UnionWorld {
    pub world: World,
    /// Current states of all realities.
    pub current: Vec<StateId>,
    /// Reality index and original state of each union state; `None` for the sink.
    pub origin: Vec<Option<(usize, StateId)>>,
}

fn family_values(w: &World) -> Vec<(String, Vec<String>)> {
    w.families()
        .iter()
        .map(|f| {
            let vals = f.atoms.iter().map(|&a| w.prop_name(a)[f.name.len() + 1..].to_string()).collect();
            (f.name.clone(), vals)
        })
        .collect()
}

fn push_unique(v: &mut Vec<String>, x: &str) {
    if !v.iter().any(|y| y == x) {
        v.push(x.to_string());
    }
}

pub fn disjoint_union(b: &Belief) -> Result<UnionWorld, WorldError> {
    let mut families: Vec<(String, Vec<String>)> = Vec::new();
    let mut bools: Vec<String> = Vec::new();
    let mut ego: Vec<String> = Vec::new();
    let mut env: Vec<String> = Vec::new();
    for r in &b.realities {
        let w = &r.world;
        for (name, vals) in family_values(w) {
            let idx = match families.iter().position(|(n, _)| *n == name) {
                Some(i) => i,
                None => {
                    families.push((name, Vec::new()));
                    families.len() - 1
                }
            };
            for v in vals {
                push_unique(&mut families[idx].1, &v);
            }
        }
        for (p, name) in w.props().iter().enumerate() {
            if name != UNDEF && !w.families().iter().any(|f| f.atoms.contains(&p)) {
                push_unique(&mut bools, name);
            }
        }
        w.ego_actions().iter().for_each(|a| push_unique(&mut ego, a));
        w.env_actions().iter().for_each(|a| push_unique(&mut env, a));
    }
    let mut bld = WorldBuilder::new();
    for (name, vals) in &families {
        bld.family(name, vals)?;
    }
    for p in &bools {
        if !bld.has_prop(p) {
            bld.bool_prop(p)?;
        }
    }
    for a in &ego {
        bld.ego_action(a)?;
    }
    for a in &env {
        bld.env_action(a)?;
    }
    bld.sink("sink")?;
    let sink = 0;
    let mut origin = vec![None];
    let mut maps: Vec<Vec<StateId>> = Vec::new();
    for (i, r) in b.realities.iter().enumerate() {
        let w = &r.world;
        let mut map = Vec::with_capacity(w.num_states());
        for s in 0..w.num_states() {
            if s == w.sink() {
                map.push(sink);
                continue;
            }
            let labels: Vec<&str> = w.label(s).iter().map(|p| w.prop_name(p)).collect();
            map.push(bld.state(&format!("{i}:{}", w.state_name(s)), &labels)?);
            origin.push(Some((i, s)));
        }
        maps.push(map);
    }
    let mut init = Vec::new();
    let mut current = Vec::new();
    for (i, r) in b.realities.iter().enumerate() {
        let w = &r.world;
        let ego_map: Vec<ActionId> = w.ego_actions().iter().map(|a| ego.iter().position(|x| x == a).expect("collected")).collect();
        let env_map: Vec<ActionId> = w.env_actions().iter().map(|a| env.iter().position(|x| x == a).expect("collected")).collect();
        for e in w.edges() {
            if e.src == w.sink() {
                continue;
            }
            let pairs = e.actions.iter().map(|p| ActionPair { ego: ego_map[p.ego], env: env_map[p.env] }).collect();
            bld.edge_ids(maps[i][e.src], maps[i][e.dst], pairs);
        }
        init.extend(w.init().iter().map(|&s| maps[i][s]));
        current.extend(r.current.iter().map(|&s| maps[i][s]));
    }
    init.sort_unstable();
    init.dedup();
    current.sort_unstable();
    current.dedup();
    bld.set_init(init);
    bld.totalize(true);
    Ok(UnionWorld { world: bld.build()?, current, origin })
}

/// `w` with every ego action other than `action` at the states `at`
/// redirected to the sink.
pub fn pin(w: &World, at: &[StateId], action: ActionId) -> World {
    let mut b = w.to_builder();
    for &s in at {
        let out = b.outgoing(s);
        b.clear_edges_from(s);
        let mut lost = Vec::new();
        for (t, pairs) in out {
            let (keep, drop): (Vec<ActionPair>, Vec<ActionPair>) = pairs.into_iter().partition(|p| p.ego == action);
            if !keep.is_empty() {
                b.edge_ids(s, t, keep);
            }
            lost.extend(drop);
        }
        if !lost.is_empty() {
            b.edge_ids(s, w.sink(), lost);
        }
    }
    b.build().expect("pinning keeps a valid world")
}

/// Initial nodes grouped by observation token, in token order.
fn init_groups(arena: &Arena) -> Vec<(String, Vec<usize>)> {
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for &n in &arena.init {
        groups.entry(arena.obs_names[arena.obs[n]].clone()).or_default().push(n);
    }
    groups.into_iter().collect()
}

fn restricted(arena: &Arena, init: &[usize]) -> Arena {
    let mut a = arena.clone();
    a.init = init.to_vec();
    a
}

/// Best choices of one belief.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BestChoices {
    pub belief: String,
    /// Best level per group of initial states with equal labels.
    pub group_levels: Vec<(String, usize)>,
    /// Actions that can be forced at all current states at once without
    /// losing any group's best level.
    pub decisive: Vec<String>,
    /// Actions that can be forced at some single current state.
    pub choices: Vec<String>,
    /// Some answer relied on a bound-limited search.
    pub conditional: bool,
}

impl BestChoices {
    pub fn is_decisive(&self) -> bool {
        !self.decisive.is_empty()
    }
}

/// Whether every group still reaches its level; second component flags
/// bound-limited answers.
fn reaches(w: &World, groups: &[(String, Vec<usize>)], levels: &[(String, usize)], goals: &GoalList, opts: &SynthesisOptions) -> (bool, bool) {
    let arena = Arena::with_mask(w, w.all_props());
    for ((_, init), (_, lvl)) in groups.iter().zip(levels) {
        match synthesize(&restricted(&arena, init), goals, *lvl, opts) {
            SynthesisOutcome::Realized(_) => {}
            SynthesisOutcome::Unrealizable => return (false, false),
            SynthesisOutcome::BoundExhausted { .. } => return (false, true),
        }
    }
    (true, false)
}

pub fn best_choices(b: &Belief, goals: &GoalList, opts: &SynthesisOptions) -> Result<BestChoices, WorldError> {
    let u = disjoint_union(b)?;
    let arena = Arena::with_mask(&u.world, u.world.all_props());
    let groups = init_groups(&arena);
    let mut conditional = false;
    let mut levels = Vec::new();
    for (tok, init) in &groups {
        let m = max_achievable(&restricted(&arena, init), goals, opts);
        conditional |= m.conditional;
        levels.push((tok.clone(), m.level));
    }
    let mut decisive = Vec::new();
    let mut choices = Vec::new();
    for (a, name) in u.world.ego_actions().iter().enumerate() {
        let (ok, cond) = reaches(&pin(&u.world, &u.current, a), &groups, &levels, goals, opts);
        conditional |= cond;
        if ok {
            decisive.push(name.clone());
            choices.push(name.clone());
            continue;
        }
        for &c in &u.current {
            let (ok, cond) = reaches(&pin(&u.world, &[c], a), &groups, &levels, goals, opts);
            conditional |= cond;
            if ok {
                choices.push(name.clone());
                break;
            }
        }
    }
    Ok(BestChoices { belief: b.id.clone(), group_levels: levels, decisive, choices, conditional })
}

/// Best choices of every catalog belief, computed in parallel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BestChoiceTable {
    pub entries: Vec<BestChoices>,
}

impl BestChoiceTable {
    pub fn compute(catalog: &BeliefCatalog, goals: &GoalList, opts: &SynthesisOptions) -> Result<Self, WorldError> {
        let entries = catalog
            .beliefs()
            .par_iter()
            .map(|b| best_choices(b, goals, opts))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BestChoiceTable { entries })
    }

    pub fn get(&self, id: &str) -> Option<&BestChoices> {
        self.entries.iter().find(|e| e.belief == id)
    }

    pub fn restrict(&self, ids: &[String]) -> BestChoiceTable {
        BestChoiceTable { entries: self.entries.iter().filter(|e| ids.contains(&e.belief)).cloned().collect() }
    }

    /// Beliefs without a decisive dominant strategy.
    pub fn indecisive(&self) -> Vec<String> {
        self.entries.iter().filter(|e| !e.is_decisive()).map(|e| e.belief.clone()).collect()
    }

    pub fn conditional(&self) -> bool {
        self.entries.iter().any(|e| e.conditional)
    }
}

/// A current-state decisive strategy reaching level `n` on all initial states
/// of the belief's union, with the action it plays at the current states.
pub fn synthesize_current_state_decisive(
    b: &Belief,
    goals: &GoalList,
    n: usize,
    opts: &SynthesisOptions,
) -> Result<Option<(String, StrategyMachine)>, WorldError> {
    let u = disjoint_union(b)?;
    for (a, name) in u.world.ego_actions().iter().enumerate() {
        let pinned = pin(&u.world, &u.current, a);
        if let SynthesisOutcome::Realized(m) = synthesize(&Arena::with_mask(&pinned, pinned.all_props()), goals, n, opts) {
            return Ok(Some((name.clone(), m)));
        }
    }
    Ok(None)
}

/// Actions `machine` plays at the end of some initial path of the belief's
/// union that ends in a current state. The machine reads full labels.
pub fn current_state_choices(machine: &StrategyMachine, b: &Belief) -> Result<Vec<String>, WorldError> {
    let u = disjoint_union(b)?;
    let w = &u.world;
    let full = w.all_props();
    let col: Vec<usize> = (0..w.num_states()).map(|s| machine.column(&w.obs_token(s, full))).collect();
    let mut seen = vec![vec![false; machine.memory()]; w.num_states()];
    let mut queue: VecDeque<(StateId, usize)> = w.init().iter().map(|&s| (s, machine.init)).collect();
    let mut out: Vec<String> = Vec::new();
    while let Some((s, m)) = queue.pop_front() {
        if std::mem::replace(&mut seen[s][m], true) {
            continue;
        }
        let c = col[s];
        if u.current.binary_search(&s).is_ok() {
            push_unique(&mut out, &machine.actions[machine.output[m][c]]);
        }
        let m2 = machine.update[m][c];
        for &t in w.post(s) {
            if !seen[t][m2] {
                queue.push_back((t, m2));
            }
        }
    }
    out.sort_by_key(|a| w.ego_action_id(a));
    Ok(out)
}

/// The design world with ego actions replaced by beliefs: a move `(a, e)`
/// from `s` becomes `(B, e)` for every decisive belief `B` that satisfies the
/// knowledge at `s` and has `a` among its best choices.
#[derive(Clone, Debug)]
pub struct RelabeledWorld {
    pub world: World,
    /// Per design state, indices into the table of beliefs satisfying the knowledge there.
    pub eligible: Vec<Vec<usize>>,
    /// Catalog beliefs left out for lack of a decisive dominant strategy.
    pub excluded: Vec<String>,
}

fn eligible_beliefs(
    wd: &World,
    table: &BestChoiceTable,
    k: &KnowledgeLabeling,
    catalog: &BeliefCatalog,
    cache: &SatCache,
) -> Result<Vec<Vec<usize>>, AutonomyError> {
    let beliefs: Vec<&Belief> = table
        .entries
        .iter()
        .map(|e| catalog.get(&e.belief).ok_or_else(|| AutonomyError::UnknownBelief(e.belief.clone())))
        .collect::<Result<_, _>>()?;
    let mut memo: Vec<(&KnowledgeBase, Vec<usize>)> = Vec::new();
    let mut out = Vec::with_capacity(wd.num_states());
    for s in 0..wd.num_states() {
        let kb = k.at(s);
        if let Some((_, v)) = memo.iter().find(|(x, _)| *x == kb) {
            out.push(v.clone());
            continue;
        }
        let v: Vec<usize> = (0..beliefs.len()).filter(|&i| kb.satisfied_by(beliefs[i], cache)).collect();
        memo.push((kb, v.clone()));
        out.push(v);
    }
    Ok(out)
}

pub fn relabel_world(
    wd: &World,
    table: &BestChoiceTable,
    k: &KnowledgeLabeling,
    catalog: &BeliefCatalog,
    cache: &SatCache,
) -> Result<RelabeledWorld, AutonomyError> {
    let eligible = eligible_beliefs(wd, table, k, catalog, cache)?;
    let decisive: Vec<usize> = (0..table.entries.len()).filter(|&i| table.entries[i].is_decisive()).collect();
    let mut names: Vec<String> = decisive.iter().map(|&i| table.entries[i].belief.clone()).collect();
    names.push(BOT.to_string());
    let bot = names.len() - 1;
    let col_of: HashMap<usize, usize> = decisive.iter().enumerate().map(|(c, &i)| (i, c)).collect();
    let mut b = wd.signature_builder();
    b.set_ego_actions(names);
    for s in 0..wd.num_states() {
        b.state_with_label(wd.state_name(s), wd.label(s))?;
    }
    b.sink(wd.state_name(wd.sink()))?;
    b.set_init(wd.init().to_vec());
    for e in wd.edges() {
        let mut moved = Vec::new();
        let mut stuck = Vec::new();
        for p in &e.actions {
            let a = &wd.ego_actions()[p.ego];
            let mut any = false;
            for &i in &eligible[e.src] {
                if let Some(&c) = col_of.get(&i) {
                    if table.entries[i].decisive.contains(a) {
                        moved.push(ActionPair { ego: c, env: p.env });
                        any = true;
                    }
                }
            }
            if !any {
                stuck.push(ActionPair { ego: bot, env: p.env });
            }
        }
        if !moved.is_empty() {
            b.edge_ids(e.src, e.dst, moved);
        }
        if !stuck.is_empty() {
            b.edge_ids(e.src, wd.sink(), stuck);
        }
    }
    b.totalize(true);
    Ok(RelabeledWorld { world: b.build()?, eligible, excluded: table.indecisive() })
}

/// Doxastic strategy of an autonomous system: each belief plays its first
/// decisive best choice, in the design world's action order.
pub fn autonomous_strategy(wd: &World, table: &BestChoiceTable) -> StrategyMachine {
    let alphabet: Vec<String> = table.entries.iter().map(|e| e.belief.clone()).collect();
    let choice: Vec<usize> = table
        .entries
        .iter()
        .map(|e| wd.ego_actions().iter().position(|a| e.decisive.contains(a)).unwrap_or(0))
        .collect();
    StrategyMachine::memoryless(alphabet, wd.ego_actions().to_vec(), &choice, 0)
}

/// A synthesised autonomous system.
#[derive(Clone, Debug)]
pub struct AutonomousSystem {
    pub formation: RegularBeliefFormation,
    pub strategy: StrategyMachine,
    /// Observation-based strategy on the relabeled world that the formation decodes.
    pub selector: StrategyMachine,
    pub target: usize,
    pub relabeled: RelabeledWorld,
    /// Whether the decoded formation passed the knowledge-consistency check.
    pub consistent: bool,
}

#[derive(Clone, Debug)]
pub enum AutonomyOutcome {
    Exists(Box<AutonomousSystem>),
    /// No autonomous system reaches the target level.
    Impossible { target: usize },
    /// The search hit its bounds before deciding.
    Inconclusive { target: usize },
}

impl AutonomyOutcome {
    pub fn exists(&self) -> bool {
        matches!(self, AutonomyOutcome::Exists(_))
    }

    pub fn system(&self) -> Option<&AutonomousSystem> {
        match self {
            AutonomyOutcome::Exists(s) => Some(s),
            _ => None,
        }
    }
}

/// Best level of a truth-observing strategy in `wd`.
pub fn truth_level(wd: &World, goals: &GoalList, opts: &SynthesisOptions) -> (usize, bool) {
    let m = max_achievable(&Arena::with_mask(wd, wd.all_props()), goals, opts);
    (m.level, m.conditional)
}

pub fn synthesize_autonomous(
    wd: &World,
    goals: &GoalList,
    k: &KnowledgeLabeling,
    observe: &[String],
    catalog: &BeliefCatalog,
    opts: &SynthesisOptions,
) -> Result<AutonomyOutcome, AutonomyError> {
    let table = BestChoiceTable::compute(catalog, goals, opts)?;
    let (target, _) = truth_level(wd, goals, opts);
    synthesize_autonomous_with(wd, goals, k, observe, catalog, &table, target, opts)
}

/// As [`synthesize_autonomous`] with precomputed best choices and target level.
#[allow(clippy::too_many_arguments)]
pub fn synthesize_autonomous_with(
    wd: &World,
    goals: &GoalList,
    k: &KnowledgeLabeling,
    observe: &[String],
    catalog: &BeliefCatalog,
    table: &BestChoiceTable,
    target: usize,
    opts: &SynthesisOptions,
) -> Result<AutonomyOutcome, AutonomyError> {
    if table.entries.is_empty() {
        return Ok(AutonomyOutcome::Impossible { target });
    }
    let cache = SatCache::new();
    let relabeled = relabel_world(wd, table, k, catalog, &cache)?;
    let mask = wd.resolve_observables(observe)?;
    let arena = Arena::with_mask(&relabeled.world, mask);
    let selector = match synthesize(&arena, goals, target, opts) {
        SynthesisOutcome::Realized(m) => m,
        SynthesisOutcome::Unrealizable => return Ok(AutonomyOutcome::Impossible { target }),
        SynthesisOutcome::BoundExhausted { .. } => return Ok(AutonomyOutcome::Inconclusive { target }),
    };
    let formation = decode_selector(wd, observe, mask, &selector, &relabeled, table);
    let consistent = check_knowledge_consistency(&formation, wd, k, catalog, &cache).is_ok();
    Ok(AutonomyOutcome::Exists(Box::new(AutonomousSystem {
        formation,
        strategy: autonomous_strategy(wd, table),
        selector,
        target,
        relabeled,
        consistent,
    })))
}

/// Turns the selector into a formation: the belief formed after a history is
/// the belief the selector plays there. Histories the selector does not
/// anticipate get a belief that fits the knowledge at every state the
/// history may end in.
fn decode_selector(
    wd: &World,
    observe: &[String],
    mask: PropSet,
    selector: &StrategyMachine,
    relabeled: &RelabeledWorld,
    table: &BestChoiceTable,
) -> RegularBeliefFormation {
    let tok: Vec<String> = (0..wd.num_states()).map(|s| wd.obs_token(s, mask)).collect();
    let mut tokens = tok.clone();
    tokens.sort();
    tokens.dedup();
    let fits = |i: usize, states: &[StateId]| states.iter().all(|&s| relabeled.eligible[s].contains(&i));
    let pick = |preferred: Option<usize>, states: &[StateId]| -> usize {
        if let Some(p) = preferred {
            if table.entries[p].is_decisive() && fits(p, states) {
                return p;
            }
        }
        let same = |i: usize| preferred.is_some_and(|p| table.entries[i].decisive == table.entries[p].decisive);
        let order = (0..table.entries.len())
            .filter(|&i| same(i))
            .chain((0..table.entries.len()).filter(|&i| table.entries[i].is_decisive()))
            .chain(0..table.entries.len());
        order.into_iter().find(|&i| fits(i, states)).or(preferred).unwrap_or(0)
    };
    type Node = (usize, Option<usize>, Vec<StateId>);
    let mut nodes: Vec<Node> = vec![(selector.init, None, Vec::new())];
    let mut index: HashMap<Node, usize> = HashMap::new();
    index.insert(nodes[0].clone(), 0);
    let mut trans: Vec<Vec<(String, usize)>> = vec![Vec::new()];
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let (m, _, states) = nodes[i].clone();
        for t in &tokens {
            let mut next: Vec<StateId> = if i == 0 {
                wd.init().iter().copied().filter(|&s| tok[s] == *t).collect()
            } else {
                states.iter().flat_map(|&s| wd.post(s).iter().copied()).filter(|&s| tok[s] == *t).collect()
            };
            if next.is_empty() {
                continue;
            }
            next.sort_unstable();
            next.dedup();
            let c = selector.column(t);
            let key = (selector.update[m][c], Some(selector.output[m][c]), next);
            let id = *index.entry(key.clone()).or_insert_with(|| {
                nodes.push(key);
                trans.push(Vec::new());
                queue.push_back(nodes.len() - 1);
                nodes.len() - 1
            });
            trans[i].push((t.clone(), id));
        }
    }
    let output: Vec<Option<String>> = nodes
        .iter()
        .map(|(_, out, states)| {
            let out = (*out)?;
            let name = &selector.actions[out];
            let preferred = table.entries.iter().position(|e| e.belief == *name);
            Some(table.entries[pick(preferred, states)].belief.clone())
        })
        .collect();
    let all: Vec<StateId> = (0..wd.num_states()).collect();
    let fallback = table.entries[pick(None, &all)].belief.clone();
    let mut rules: Vec<Rule> = dfa_to_regexes(0, &trans, &output)
        .into_iter()
        .map(|(belief, regex)| Rule { regex, belief })
        .collect();
    rules.push(Rule { regex: Regex::star(Regex::Any), belief: fallback });
    RegularBeliefFormation::new(observe.to_vec(), rules)
}

/// One simulated run of a doxastic system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Run {
    pub states: Vec<String>,
    pub tokens: Vec<String>,
    pub beliefs: Vec<String>,
    pub actions: Vec<String>,
    /// Goal level of the run, its last state repeated forever.
    pub level: usize,
}

/// Runs formation and strategy against an environment script. Where an action
/// pair has several successors, the first in state order is taken.
pub fn run_doxastic_system(
    wd: &World,
    goals: &GoalList,
    f: &RegularBeliefFormation,
    strategy: &StrategyMachine,
    script: &EnvScript,
) -> Result<Run, AutonomyError> {
    let mask = wd.resolve_observables_lenient(&f.observe);
    let dfa = f.compile();
    let mut s = wd
        .state_id(&script.start)
        .ok_or_else(|| AutonomyError::Script(format!("unknown start state `{}`", script.start)))?;
    let mut q = dfa.init;
    let mut m = strategy.init;
    let mut run = Run { states: Vec::new(), tokens: Vec::new(), beliefs: Vec::new(), actions: Vec::new(), level: 0 };
    let mut path = Vec::new();
    for i in 0..=script.env.len() {
        let t = wd.obs_token(s, mask);
        q = dfa.step(q, &t);
        path.push(s);
        run.states.push(wd.state_name(s).to_string());
        run.tokens.push(t);
        let belief = match dfa.rule[q] {
            Some(r) => f.rules[r].belief.clone(),
            None => return Err(AutonomyError::NoRuleMatches(run.tokens.join(" "))),
        };
        let (m2, a) = strategy.step(m, &belief);
        run.beliefs.push(belief);
        m = m2;
        if i == script.env.len() {
            break;
        }
        run.actions.push(a.to_string());
        let ego = wd.ego_action_id(a).ok_or_else(|| AutonomyError::Script(format!("unknown ego action `{a}`")))?;
        let env_name = &script.env[i];
        let env = wd
            .env_action_id(env_name)
            .ok_or_else(|| AutonomyError::Script(format!("unknown environment action `{env_name}`")))?;
        s = *wd.successors(s, ego, env).first().ok_or_else(|| {
            AutonomyError::Script(format!("no successor of {} under {a}/{env_name}", wd.state_name(s)))
        })?;
    }
    let trace = wd.trace(&path);
    let (stem, last) = trace.split_at(trace.len() - 1);
    run.level = goals.lasso_level(stem, last, &resolver(wd));
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::io::parse_world;

    fn opts() -> SynthesisOptions {
        SynthesisOptions::default()
    }

    #[test]
    fn union_of_two_realities() {
        let b = fixtures::bundle("pu.bundle").unwrap();
        let cat = b.catalog.unwrap();
        let u = disjoint_union(cat.get("B03").unwrap()).unwrap();
        assert_eq!(u.current.len(), 2);
        assert_eq!(u.world.init().len(), 2);
        assert!(u.world.validate().is_empty(), "{:?}", u.world.validate());
        let ws = cat.world("wh").unwrap().num_states() - 1;
        let ws2 = cat.world("wh2").unwrap().num_states() - 1;
        assert_eq!(u.world.num_states(), 1 + ws + ws2);
        for &c in &u.current {
            let (r, s) = u.origin[c].unwrap();
            assert_eq!(cat.get("B03").unwrap().realities[r].current, vec![s]);
        }
    }

    #[test]
    fn pinning_redirects_other_actions() {
        let w = fixtures::bundle("running.bundle").unwrap().world;
        let s2 = w.state_id("s2").unwrap();
        let t = w.ego_action_id("t").unwrap();
        let p = pin(&w, &[s2], t);
        assert_eq!(p.successors(s2, 0, 0), &[p.sink()]);
        assert_eq!(p.successors(s2, t, 0), &[w.state_id("s4").unwrap()]);
    }

    #[test]
    fn best_choices_of_crossing_beliefs() {
        let b = fixtures::bundle("running.bundle").unwrap();
        let cat = b.catalog.unwrap();
        let bc = |id: &str| best_choices(cat.get(id).unwrap(), &b.goals, &opts()).unwrap();
        for (id, want) in [("B01", vec!["f"]), ("B02", vec!["f"]), ("B11", vec!["f"]), ("B12", vec!["t"])] {
            let c = bc(id);
            assert_eq!(c.decisive, want, "{id}");
            assert!(!c.conditional);
        }
        assert_eq!(bc("B12").group_levels[0].1, 4);
        assert_eq!(bc("B11").group_levels[0].1, 3);
        // a belief placed off every dominant play constrains nothing
        assert_eq!(bc("B23").decisive, vec!["f", "t"]);
    }

    #[test]
    fn position_uncertain_beliefs_are_indecisive() {
        let b = fixtures::bundle("pu.bundle").unwrap();
        let cat = b.catalog.unwrap();
        for id in ["B03", "B04"] {
            let c = best_choices(cat.get(id).unwrap(), &b.goals, &opts()).unwrap();
            assert!(!c.is_decisive(), "{id}");
            assert_eq!(c.choices, vec!["f", "t"], "{id}");
        }
        let c = best_choices(cat.get("B13").unwrap(), &b.goals, &opts()).unwrap();
        assert_eq!(c.decisive, vec!["f"]);
    }

    #[test]
    fn two_equally_good_actions() {
        let w = parse_world(
            "prop goal\nact ego left right\nact env e\nstate a\nstate g goal\ninit a\nsink bad\n\
             edge a g left/e right/e\nedge g g left/e right/e\n",
        )
        .unwrap();
        let mut cat = BeliefCatalog::new();
        cat.add_world("w", std::sync::Arc::new(w)).unwrap();
        cat.add("B", &[("w", &["a"])]).unwrap();
        let goals = GoalList::from_user_texts(&["F goal"]).unwrap();
        let c = best_choices(cat.get("B").unwrap(), &goals, &opts()).unwrap();
        assert_eq!(c.decisive, vec!["left", "right"]);
    }

    #[test]
    fn decisive_strategy_goes_straight_first() {
        let b = fixtures::bundle("running.bundle").unwrap();
        let cat = b.catalog.unwrap();
        let b01 = cat.get("B01").unwrap();
        let (a, m) = synthesize_current_state_decisive(b01, &b.goals, 4, &opts()).unwrap().unwrap();
        assert_eq!(a, "f");
        assert_eq!(current_state_choices(&m, b01).unwrap(), vec!["f"]);
    }

    #[test]
    fn choices_of_a_two_reality_belief() {
        let b = fixtures::bundle("running.bundle").unwrap();
        let cat = b.catalog.unwrap();
        let two = Belief::new(
            "B2",
            vec![cat.get("B11").unwrap().realities[0].clone(), cat.get("B12").unwrap().realities[0].clone()],
        );
        let u = disjoint_union(&two).unwrap();
        // turn when the other car is hasty, otherwise go straight
        let alphabet: Vec<String> = (0..u.world.num_states()).map(|s| u.world.obs_token(s, u.world.all_props())).collect();
        let choice: Vec<usize> = (0..alphabet.len())
            .map(|s| {
                let l = u.world.label(s);
                let h = u.world.prop_id("h").unwrap();
                let at2 = u.world.prop_id("xe=2").unwrap();
                let y1 = u.world.prop_id("ye=1").unwrap();
                usize::from(l.contains(h) && l.contains(at2) && l.contains(y1))
            })
            .collect();
        let m = StrategyMachine::memoryless(alphabet, vec!["f".into(), "t".into()], &choice, 0);
        assert_eq!(current_state_choices(&m, &two).unwrap(), vec!["f", "t"]);
    }

    #[test]
    fn autonomous_system_for_the_crossing() {
        let b = fixtures::bundle("running.bundle").unwrap();
        let cat = b.catalog.as_ref().unwrap();
        let obs = b.observables().unwrap();
        let out = synthesize_autonomous(&b.world, &b.goals, &b.knowledge, &obs, cat, &opts()).unwrap();
        let sys = out.system().expect("exists");
        assert_eq!(sys.target, 3);
        assert!(sys.consistent);
        let slow = run_doxastic_system(&b.world, &b.goals, &sys.formation, &sys.strategy, &b.scripts["slow"]).unwrap();
        let hasty = run_doxastic_system(&b.world, &b.goals, &sys.formation, &sys.strategy, &b.scripts["hasty"]).unwrap();
        assert!(!slow.actions.contains(&"t".to_string()));
        assert_eq!(slow.level, 3);
        assert_eq!(hasty.actions[1], "t");
        assert_eq!(hasty.level, 4);
    }

    #[test]
    fn no_autonomous_system_when_initially_uncertain() {
        let b = fixtures::bundle("pu.bundle").unwrap();
        let cat = b.catalog.as_ref().unwrap();
        let out = synthesize_autonomous(&b.world, &b.goals, &b.knowledge, &b.observables().unwrap(), cat, &opts()).unwrap();
        assert!(matches!(out, AutonomyOutcome::Impossible { target: 3 }));
    }

    #[test]
    fn sketch_runs() {
        let b = fixtures::bundle("running.bundle").unwrap();
        let f = b.formation.as_ref().unwrap();
        let s = b.strategy.as_ref().unwrap();
        let slow = run_doxastic_system(&b.world, &b.goals, f, s, &b.scripts["slow"]).unwrap();
        assert_eq!(slow.beliefs[..2], ["B01", "B11"]);
        assert_eq!(slow.level, 3);
        let hasty = run_doxastic_system(&b.world, &b.goals, f, s, &b.scripts["hasty"]).unwrap();
        assert_eq!(hasty.beliefs[..2], ["B02", "B12"]);
        assert_eq!(hasty.states[..3], ["s6", "s7", "s8"]);
        assert_eq!(hasty.level, 4);
        let bad = EnvScript { start: "nowhere".into(), env: vec![] };
        assert!(run_doxastic_system(&b.world, &b.goals, f, s, &bad).is_err());
    }
}
