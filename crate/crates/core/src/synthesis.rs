//! Observation-based strategy synthesis for prioritised goal lists.
//!
//! Goals in the safety/reachability fragment are solved exactly on the
//! knowledge-subset construction of the arena. Other goals fall back to
//! bounded synthesis: a lazy search over finite-state machines of increasing
//! memory, each candidate pruned and finally checked by Büchi model checking.

use crate::buchi::{find_accepting_lasso, resolver, Lasso, Nba};
use crate::formation::RegularBeliefFormation;
use crate::goals::GoalList;
use crate::objective::{Mask, Objective};
use crate::propset::PropSet;
use crate::world::{StateId, World};
use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use thiserror::Error;

/// Observation token emitted when no formation rule matches the history.
pub const UNMATCHED: &str = "?";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SynthError {
    #[error("strategy action `{0}` is not an ego action of the world")]
    UnknownAction(String),
    #[error("strategy table is malformed: {0}")]
    Malformed(String),
}

/// What a strategy sees at each step.
#[derive(Clone, Debug, PartialEq)]
pub enum ObservationFunction {
    /// The state label restricted to a proposition set.
    Mask(PropSet),
    /// The belief a formation forms from the mask-restricted history.
    Formation(RegularBeliefFormation),
}

#[derive(Clone, Debug)]
pub struct SynthesisOptions {
    /// Memory bound for bounded synthesis; `None` uses the default bound.
    pub bound: Option<usize>,
    /// Maximum number of search nodes in bounded synthesis.
    pub budget: usize,
    /// Maximum number of knowledge sets explored by the exact solver.
    pub max_knowledge_sets: usize,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions { bound: None, budget: 200_000, max_knowledge_sets: 500_000 }
    }
}

/// A finite-state transducer from observations to ego actions. Column
/// `alphabet.len()` of `update` and `output` handles every other token.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyMachine {
    pub alphabet: Vec<String>,
    pub actions: Vec<String>,
    pub init: usize,
    pub update: Vec<Vec<usize>>,
    pub output: Vec<Vec<usize>>,
}

impl StrategyMachine {
    pub fn memory(&self) -> usize {
        self.update.len()
    }

    pub fn column(&self, token: &str) -> usize {
        self.alphabet.iter().position(|t| t == token).unwrap_or(self.alphabet.len())
    }

    /// Reads one observation: next memory and the action to play.
    pub fn step(&self, m: usize, token: &str) -> (usize, &str) {
        let c = self.column(token);
        (self.update[m][c], &self.actions[self.output[m][c]])
    }

    /// Action sequence for an observation history.
    pub fn run<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<String> {
        let mut m = self.init;
        let mut out = Vec::new();
        for t in tokens {
            let (m2, a) = self.step(m, t.as_ref());
            out.push(a.to_string());
            m = m2;
        }
        out
    }

    /// A one-state machine playing a fixed action.
    pub fn constant(alphabet: Vec<String>, actions: Vec<String>, action: usize) -> StrategyMachine {
        let cols = alphabet.len() + 1;
        StrategyMachine { alphabet, actions, init: 0, update: vec![vec![0; cols]], output: vec![vec![action; cols]] }
    }

    /// A one-state machine mapping each token to an action.
    pub fn memoryless(alphabet: Vec<String>, actions: Vec<String>, choice: &[usize], other: usize) -> StrategyMachine {
        let mut row: Vec<usize> = choice.to_vec();
        row.push(other);
        StrategyMachine {
            update: vec![vec![0; alphabet.len() + 1]],
            output: vec![row],
            alphabet,
            actions,
            init: 0,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let cols = self.alphabet.len() + 1;
        if self.update.is_empty() || self.update.len() != self.output.len() || self.init >= self.update.len() {
            return Err(SynthError::Malformed("memory size mismatch".into()));
        }
        for (u, o) in self.update.iter().zip(&self.output) {
            if u.len() != cols || o.len() != cols {
                return Err(SynthError::Malformed("row width mismatch".into()));
            }
            if u.iter().any(|&m| m >= self.update.len()) || o.iter().any(|&a| a >= self.actions.len()) {
                return Err(SynthError::Malformed("entry out of range".into()));
            }
        }
        Ok(())
    }
}

/// The game graph a strategy plays on: world states, or world states paired
/// with formation automaton states.
#[derive(Clone, Debug)]
pub struct Arena {
    pub world: World,
    pub actions: Vec<String>,
    pub state: Vec<StateId>,
    pub dfa_state: Vec<Option<usize>>,
    pub obs: Vec<usize>,
    pub obs_names: Vec<String>,
    /// `succ[node][ego]`: successors over all environment actions, sorted.
    pub succ: Vec<Vec<Vec<usize>>>,
    pub init: Vec<usize>,
}

fn intern(names: &mut Vec<String>, index: &mut HashMap<String, usize>, t: String) -> usize {
    if let Some(&i) = index.get(&t) {
        return i;
    }
    names.push(t.clone());
    index.insert(t, names.len() - 1);
    names.len() - 1
}

impl Arena {
    pub fn new(w: &World, obs: &ObservationFunction) -> Arena {
        match obs {
            ObservationFunction::Mask(mask) => Arena::with_mask(w, *mask),
            ObservationFunction::Formation(f) => Arena::with_formation(w, f),
        }
    }

    pub fn with_mask(w: &World, mask: PropSet) -> Arena {
        let n = w.num_states();
        let n_ego = w.ego_actions().len();
        let n_env = w.env_actions().len();
        let mut obs_names = Vec::new();
        let mut index = HashMap::new();
        let obs = (0..n).map(|s| intern(&mut obs_names, &mut index, w.obs_token(s, mask))).collect();
        let succ = (0..n)
            .map(|s| {
                (0..n_ego)
                    .map(|a| {
                        let mut v: Vec<usize> = (0..n_env).flat_map(|e| w.successors(s, a, e).iter().copied()).collect();
                        v.sort_unstable();
                        v.dedup();
                        v
                    })
                    .collect()
            })
            .collect();
        Arena {
            world: w.clone(),
            actions: w.ego_actions().to_vec(),
            state: (0..n).collect(),
            dfa_state: vec![None; n],
            obs,
            obs_names,
            succ,
            init: w.init().to_vec(),
        }
    }

    pub fn with_formation(w: &World, f: &RegularBeliefFormation) -> Arena {
        let mask = w.resolve_observables_lenient(&f.observe);
        let dfa = f.compile();
        let n_ego = w.ego_actions().len();
        let n_env = w.env_actions().len();
        let tok: Vec<usize> = (0..w.num_states()).map(|s| dfa.class(&w.obs_token(s, mask))).collect();
        let mut obs_names: Vec<String> = f.belief_ids();
        let mut obs_index: HashMap<String, usize> = obs_names.iter().enumerate().map(|(i, b)| (b.clone(), i)).collect();
        let mut ids: HashMap<(StateId, usize), usize> = HashMap::new();
        let mut nodes: Vec<(StateId, usize)> = Vec::new();
        let mut queue = VecDeque::new();
        let mut get = |key: (StateId, usize), nodes: &mut Vec<(StateId, usize)>, queue: &mut VecDeque<usize>| {
            *ids.entry(key).or_insert_with(|| {
                nodes.push(key);
                queue.push_back(nodes.len() - 1);
                nodes.len() - 1
            })
        };
        let mut init: Vec<usize> = w.init().iter().map(|&s| get((s, dfa.trans[dfa.init][tok[s]]), &mut nodes, &mut queue)).collect();
        init.dedup();
        let mut succ: Vec<Vec<Vec<usize>>> = Vec::new();
        while let Some(i) = queue.pop_front() {
            let (s, q) = nodes[i];
            let mut row = Vec::with_capacity(n_ego);
            for a in 0..n_ego {
                let mut v: Vec<usize> = Vec::new();
                for e in 0..n_env {
                    for &t in w.successors(s, a, e) {
                        v.push(get((t, dfa.trans[q][tok[t]]), &mut nodes, &mut queue));
                    }
                }
                v.sort_unstable();
                v.dedup();
                row.push(v);
            }
            if succ.len() <= i {
                succ.resize(i + 1, Vec::new());
            }
            succ[i] = row;
        }
        succ.resize(nodes.len(), vec![Vec::new(); n_ego]);
        let obs = nodes
            .iter()
            .map(|&(_, q)| {
                let name = dfa.rule[q].map_or(UNMATCHED.to_string(), |r| f.rules[r].belief.clone());
                intern(&mut obs_names, &mut obs_index, name)
            })
            .collect();
        Arena {
            world: w.clone(),
            actions: w.ego_actions().to_vec(),
            state: nodes.iter().map(|&(s, _)| s).collect(),
            dfa_state: nodes.iter().map(|&(_, q)| Some(q)).collect(),
            obs,
            obs_names,
            succ,
            init,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.state.len()
    }

    pub fn label(&self, n: usize) -> PropSet {
        self.world.label(self.state[n])
    }

    /// Column of each arena observation in the machine table.
    fn columns(&self, m: &StrategyMachine) -> Vec<usize> {
        self.obs_names.iter().map(|o| m.column(o)).collect()
    }

    fn action_map(&self, m: &StrategyMachine) -> Result<Vec<usize>, SynthError> {
        m.actions
            .iter()
            .map(|a| self.actions.iter().position(|x| x == a).ok_or_else(|| SynthError::UnknownAction(a.clone())))
            .collect()
    }
}

/// Outcome of synthesis at one level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SynthesisOutcome {
    Realized(StrategyMachine),
    /// Definitive: no observation-based strategy of any memory exists.
    Unrealizable,
    /// No machine found within the memory bound or search budget.
    BoundExhausted { budget_hit: bool },
}

impl SynthesisOutcome {
    pub fn machine(&self) -> Option<&StrategyMachine> {
        match self {
            SynthesisOutcome::Realized(m) => Some(m),
            _ => None,
        }
    }

    pub fn is_realized(&self) -> bool {
        matches!(self, SynthesisOutcome::Realized(_))
    }
}

/// Knowledge-subset game over an arena with a monotone goal monitor.
struct KnowledgeGame {
    sets: Vec<Vec<(usize, Mask)>>,
    /// `succ[k][a]`: `(obs, successor set)` pairs, one per observation, sorted by obs.
    succ: Vec<Vec<Vec<(usize, usize)>>>,
    init: Vec<(usize, usize)>,
}

impl KnowledgeGame {
    fn build(arena: &Arena, obj: &Objective, limit: usize) -> Option<KnowledgeGame> {
        let r = resolver(&arena.world);
        let bits: Vec<(Mask, Mask)> = (0..arena.num_nodes()).map(|n| obj.letter_bits(arena.label(n), &r)).collect();
        let mut ids: HashMap<Vec<(usize, Mask)>, usize> = HashMap::new();
        let mut sets: Vec<Vec<(usize, Mask)>> = Vec::new();
        let mut queue = VecDeque::new();
        let mut get = |set: Vec<(usize, Mask)>, sets: &mut Vec<Vec<(usize, Mask)>>, queue: &mut VecDeque<usize>| {
            if let Some(&i) = ids.get(&set) {
                return i;
            }
            sets.push(set.clone());
            ids.insert(set, sets.len() - 1);
            queue.push_back(sets.len() - 1);
            sets.len() - 1
        };
        let mut groups: BTreeMap<usize, Vec<(usize, Mask)>> = BTreeMap::new();
        for &n in &arena.init {
            groups.entry(arena.obs[n]).or_default().push((n, bits[n].0 | bits[n].1));
        }
        let mut init = Vec::new();
        for (o, mut set) in groups {
            set.sort_unstable();
            set.dedup();
            init.push((o, get(set, &mut sets, &mut queue)));
        }
        let n_act = arena.actions.len();
        let mut succ: Vec<Vec<Vec<(usize, usize)>>> = Vec::new();
        while let Some(k) = queue.pop_front() {
            if sets.len() > limit {
                return None;
            }
            let mut row = Vec::with_capacity(n_act);
            for a in 0..n_act {
                let mut groups: BTreeMap<usize, Vec<(usize, Mask)>> = BTreeMap::new();
                for &(n, m) in &sets[k] {
                    for &t in &arena.succ[n][a] {
                        groups.entry(arena.obs[t]).or_default().push((t, m | bits[t].0));
                    }
                }
                let mut out = Vec::with_capacity(groups.len());
                for (o, mut set) in groups {
                    set.sort_unstable();
                    set.dedup();
                    out.push((o, get(set, &mut sets, &mut queue)));
                }
                row.push(out);
            }
            if succ.len() <= k {
                succ.resize(k + 1, Vec::new());
            }
            succ[k] = row;
        }
        Some(KnowledgeGame { sets, succ, init })
    }

    /// Winning sets and a winning action for one level.
    fn solve(&self, obj: &Objective, level: usize) -> (Vec<bool>, Vec<usize>) {
        let n = self.sets.len();
        let n_act = self.succ.first().map_or(0, |r| r.len());
        let bad: Vec<bool> = self.sets.iter().map(|s| s.iter().any(|&(_, m)| obj.failed(m, level))).collect();
        let target: Vec<bool> = self.sets.iter().map(|s| s.iter().all(|&(_, m)| obj.done(m, level))).collect();
        // A successor-free action would end the play; the arena is total, so
        // such actions never arise, but treat them as losing.
        let ok = |k: usize, a: usize, good: &[bool]| {
            !self.succ[k][a].is_empty() && self.succ[k][a].iter().all(|&(_, t)| good[t])
        };
        let mut safe: Vec<bool> = bad.iter().map(|b| !b).collect();
        loop {
            let mut changed = false;
            for k in 0..n {
                if safe[k] && !(0..n_act).any(|a| ok(k, a, &safe)) {
                    safe[k] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let mut win = vec![false; n];
        let mut action = vec![0; n];
        for k in 0..n {
            if safe[k] && target[k] {
                win[k] = true;
                action[k] = (0..n_act).find(|&a| ok(k, a, &safe)).unwrap_or(0);
            }
        }
        loop {
            let prev = win.clone();
            let mut changed = false;
            for k in 0..n {
                if safe[k] && !win[k] {
                    if let Some(a) = (0..n_act).find(|&a| ok(k, a, &prev)) {
                        win[k] = true;
                        action[k] = a;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        (win, action)
    }
}

/// Result of the exact solver over all fragment levels.
#[derive(Clone, Debug)]
pub struct ExactAnalysis {
    /// Number of leading goals in the fragment.
    pub levels: usize,
    /// Level guaranteed from every initial observation.
    pub achieved: usize,
    /// Best-effort machine achieving `achieved`, and more where possible.
    pub machine: StrategyMachine,
    /// Guaranteed level per initial observation token.
    pub per_init: Vec<(String, usize)>,
}

/// Solves all fragment levels at once; `None` if the knowledge game is too large.
pub fn exact_analysis(arena: &Arena, goals: &GoalList, opts: &SynthesisOptions) -> Option<ExactAnalysis> {
    let obj = Objective::new(goals);
    let game = KnowledgeGame::build(arena, &obj, opts.max_knowledge_sets)?;
    let n = game.sets.len();
    let mut best_level = vec![0usize; n];
    let mut best_action = vec![0usize; n];
    for level in 1..=obj.levels {
        let (win, action) = game.solve(&obj, level);
        for k in 0..n {
            if win[k] {
                best_level[k] = level;
                best_action[k] = action[k];
            }
        }
    }
    let achieved = game.init.iter().map(|&(_, k)| best_level[k]).min().unwrap_or(obj.levels);
    let per_init = game.init.iter().map(|&(o, k)| (arena.obs_names[o].clone(), best_level[k])).collect();
    let machine = extract_machine(arena, &game, &best_action);
    Some(ExactAnalysis { levels: obj.levels, achieved, machine, per_init })
}

/// Machine whose memory is the current knowledge set under the strategy.
fn extract_machine(arena: &Arena, game: &KnowledgeGame, sigma: &[usize]) -> StrategyMachine {
    let alphabet = arena.obs_names.clone();
    let cols = alphabet.len() + 1;
    let mut mem_of: HashMap<usize, usize> = HashMap::new();
    let mut order: Vec<usize> = Vec::new();
    let mut queue = VecDeque::new();
    for &(_, k) in &game.init {
        if let std::collections::hash_map::Entry::Vacant(e) = mem_of.entry(k) {
            e.insert(order.len() + 1);
            order.push(k);
            queue.push_back(k);
        }
    }
    while let Some(k) = queue.pop_front() {
        for &(_, t) in &game.succ[k][sigma[k]] {
            if let std::collections::hash_map::Entry::Vacant(e) = mem_of.entry(t) {
                e.insert(order.len() + 1);
                order.push(t);
                queue.push_back(t);
            }
        }
    }
    let dead = order.len() + 1;
    let total = dead + 1;
    let mut update = vec![vec![dead; cols]; total];
    let mut output = vec![vec![0; cols]; total];
    for &(o, k) in &game.init {
        update[0][o] = mem_of[&k];
        output[0][o] = sigma[k];
    }
    for &k in &order {
        let m = mem_of[&k];
        for &(o, t) in &game.succ[k][sigma[k]] {
            update[m][o] = mem_of[&t];
            output[m][o] = sigma[t];
        }
    }
    StrategyMachine { alphabet, actions: arena.actions.clone(), init: 0, update, output }
}

/// Default memory bound: arena size times one plus the size of the automaton
/// for the negated objective.
pub fn default_bound(arena: &Arena, goals: &GoalList, n: usize) -> usize {
    let r = resolver(&arena.world);
    let nba = Nba::from_ltl(&crate::ltl::Ltl::not(goals.conjunction_up_to(n)), &r);
    arena.num_nodes() * (1 + nba.num_states())
}

/// Synthesises a machine guaranteeing every goal of priority ≤ `n`.
pub fn synthesize(arena: &Arena, goals: &GoalList, n: usize, opts: &SynthesisOptions) -> SynthesisOutcome {
    let obj = Objective::new(goals);
    if n <= obj.levels {
        if let Some(ex) = exact_analysis(arena, goals, opts) {
            return if ex.achieved >= n { SynthesisOutcome::Realized(ex.machine) } else { SynthesisOutcome::Unrealizable };
        }
    }
    let bound = opts.bound.unwrap_or_else(|| default_bound(arena, goals, n));
    bounded_synthesize(arena, goals, n, bound, opts.budget)
}

/// Best level with a witness; `conditional` when a bound-limited search was
/// involved in the answer.
#[derive(Clone, Debug)]
pub struct MaxAchievable {
    pub level: usize,
    pub machine: StrategyMachine,
    pub conditional: bool,
}

pub fn max_achievable(arena: &Arena, goals: &GoalList, opts: &SynthesisOptions) -> MaxAchievable {
    let exact = exact_analysis(arena, goals, opts);
    let (floor, floor_machine) = match &exact {
        Some(ex) => {
            if ex.achieved < ex.levels || ex.levels == goals.len() {
                return MaxAchievable { level: ex.achieved, machine: ex.machine.clone(), conditional: false };
            }
            (ex.achieved, ex.machine.clone())
        }
        None => (1, StrategyMachine::constant(arena.obs_names.clone(), arena.actions.clone(), 0)),
    };
    let mut conditional = exact.is_none();
    for n in (floor + 1..=goals.len()).rev() {
        let bound = opts.bound.unwrap_or_else(|| default_bound(arena, goals, n));
        match bounded_synthesize(arena, goals, n, bound, opts.budget) {
            SynthesisOutcome::Realized(m) => return MaxAchievable { level: n, machine: m, conditional },
            SynthesisOutcome::BoundExhausted { .. } => conditional = true,
            SynthesisOutcome::Unrealizable => {}
        }
    }
    MaxAchievable { level: floor, machine: floor_machine, conditional }
}

/// `true` iff a strategy achieving level `n1` dominates one achieving `n2`.
pub fn dominates(n1: usize, n2: usize) -> bool {
    n2 <= n1
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    /// Counterexample as a lasso of world states.
    Violated(Lasso<StateId>),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }
}

/// Closed system of arena and machine: node `(n, m)` means the play is at
/// arena node `n` and the machine has not yet read `n`'s observation.
struct Closed<'a> {
    arena: &'a Arena,
    machine: &'a StrategyMachine,
    cols: Vec<usize>,
    act: Vec<usize>,
}

impl<'a> Closed<'a> {
    fn new(arena: &'a Arena, machine: &'a StrategyMachine) -> Result<Self, SynthError> {
        machine.validate()?;
        Ok(Closed { arena, machine, cols: arena.columns(machine), act: arena.action_map(machine)? })
    }

    fn succ(&self, n: usize, m: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let c = self.cols[self.arena.obs[n]];
        let m2 = self.machine.update[m][c];
        let a = self.act[self.machine.output[m][c]];
        self.arena.succ[n][a].iter().map(move |&t| (t, m2))
    }
}

/// Model checks the closed system against all goals of priority ≤ `n`.
pub fn verify_strategy(arena: &Arena, goals: &GoalList, n: usize, machine: &StrategyMachine) -> Result<Verdict, SynthError> {
    let closed = Closed::new(arena, machine)?;
    let r = resolver(&arena.world);
    let nba = &Nba::from_ltl(&crate::ltl::Ltl::not(goals.conjunction_up_to(n)), &r);
    let init: Vec<(usize, usize, usize)> = arena
        .init
        .iter()
        .flat_map(|&n0| {
            nba.init
                .iter()
                .filter(move |&&q| nba.states[q].admits(arena.label(n0)))
                .map(move |&q| (n0, machine.init, q))
        })
        .collect();
    let lasso = find_accepting_lasso(
        &init,
        |&(n, m, q)| {
            let mut out = Vec::new();
            for (t, m2) in closed.succ(n, m) {
                for &q2 in &nba.states[q].succ {
                    if nba.states[q2].admits(arena.label(t)) {
                        out.push((t, m2, q2));
                    }
                }
            }
            out
        },
        |&(_, _, q)| nba.states[q].accepting,
    );
    Ok(match lasso {
        None => Verdict::Holds,
        Some(l) => Verdict::Violated(l.map(|&(n, _, _)| arena.state[n])),
    })
}

/// Greatest level the machine guarantees.
pub fn achieved_level(arena: &Arena, goals: &GoalList, machine: &StrategyMachine) -> Result<usize, SynthError> {
    for n in (1..=goals.len()).rev() {
        if verify_strategy(arena, goals, n, machine)?.holds() {
            return Ok(n);
        }
    }
    Ok(0)
}

/// Partially filled machine table for bounded search.
struct Search<'a> {
    arena: &'a Arena,
    nba: Nba,
    bound: usize,
    cols: usize,
    /// `table[m][obs]`: `(next memory, action)`.
    table: Vec<Vec<Option<(usize, usize)>>>,
    used: usize,
    nodes: usize,
    budget: usize,
    budget_hit: bool,
}

enum Probe {
    Violated,
    Frontier(usize, usize),
    Complete,
}

impl Search<'_> {
    /// Explores the closed product over defined entries only.
    fn probe(&self) -> Probe {
        let arena = self.arena;
        let nba = &self.nba;
        let mut frontier: Option<(usize, usize)> = None;
        let mut seen: HashSet<(usize, usize)> = HashSet::new();
        let mut queue: VecDeque<(usize, usize)> = arena.init.iter().map(|&n| (n, 0)).collect();
        for &n in &arena.init {
            seen.insert((n, 0));
        }
        while let Some((n, m)) = queue.pop_front() {
            match self.table[m][arena.obs[n]] {
                None => {
                    if frontier.is_none() {
                        frontier = Some((m, arena.obs[n]));
                    }
                }
                Some((m2, a)) => {
                    for &t in &arena.succ[n][a] {
                        if seen.insert((t, m2)) {
                            queue.push_back((t, m2));
                        }
                    }
                }
            }
        }
        let init: Vec<(usize, usize, usize)> = arena
            .init
            .iter()
            .flat_map(|&n0| nba.init.iter().filter(move |&&q| nba.states[q].admits(arena.label(n0))).map(move |&q| (n0, 0, q)))
            .collect();
        let lasso = find_accepting_lasso(
            &init,
            |&(n, m, q)| {
                let mut out = Vec::new();
                if let Some((m2, a)) = self.table[m][arena.obs[n]] {
                    for &t in &arena.succ[n][a] {
                        for &q2 in &nba.states[q].succ {
                            if nba.states[q2].admits(arena.label(t)) {
                                out.push((t, m2, q2));
                            }
                        }
                    }
                }
                out
            },
            |&(_, _, q)| nba.states[q].accepting,
        );
        if lasso.is_some() {
            return Probe::Violated;
        }
        match frontier {
            Some((m, o)) => Probe::Frontier(m, o),
            None => Probe::Complete,
        }
    }

    fn run(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.budget_hit = true;
            return false;
        }
        match self.probe() {
            Probe::Violated => false,
            Probe::Complete => true,
            Probe::Frontier(m, o) => {
                let limit = (self.used + 1).min(self.bound);
                for m2 in 0..limit {
                    for a in 0..self.arena.actions.len() {
                        let prev_used = self.used;
                        self.table[m][o] = Some((m2, a));
                        self.used = self.used.max(m2 + 1);
                        if self.run() {
                            return true;
                        }
                        self.used = prev_used;
                        self.table[m][o] = None;
                        if self.budget_hit {
                            return false;
                        }
                    }
                }
                false
            }
        }
    }

    fn machine(&self) -> StrategyMachine {
        let mem = self.used.max(1);
        let mut update = vec![vec![0; self.cols]; mem];
        let mut output = vec![vec![0; self.cols]; mem];
        for m in 0..mem {
            for o in 0..self.cols - 1 {
                if let Some((m2, a)) = self.table[m][o] {
                    update[m][o] = m2;
                    output[m][o] = a;
                }
            }
        }
        StrategyMachine {
            alphabet: self.arena.obs_names.clone(),
            actions: self.arena.actions.clone(),
            init: 0,
            update,
            output,
        }
    }
}

/// Searches machines with memory 1, 2, ..., `bound` for one guaranteeing all
/// goals of priority ≤ `n`. Entries are chosen lazily, only where the
/// closed system can reach them, and a partial table is abandoned as soon
/// as its determined part already contains a violating lasso.
pub fn bounded_synthesize(arena: &Arena, goals: &GoalList, n: usize, bound: usize, budget: usize) -> SynthesisOutcome {
    let r = resolver(&arena.world);
    let nba = Nba::from_ltl(&crate::ltl::Ltl::not(goals.conjunction_up_to(n)), &r);
    let cols = arena.obs_names.len() + 1;
    let mut nodes = 0;
    for b in 1..=bound.max(1) {
        let mut s = Search {
            arena,
            nba: nba.clone(),
            bound: b,
            cols,
            table: vec![vec![None; cols]; b],
            used: 1,
            nodes,
            budget,
            budget_hit: false,
        };
        if s.run() {
            return SynthesisOutcome::Realized(s.machine());
        }
        if s.budget_hit {
            return SynthesisOutcome::BoundExhausted { budget_hit: true };
        }
        nodes = s.nodes;
    }
    SynthesisOutcome::BoundExhausted { budget_hit: false }
}

/// Plain enumeration of complete tables, verified one by one. Exponential;
/// used to cross-check [`bounded_synthesize`] on tiny instances.
pub fn exhaustive_synthesize(arena: &Arena, goals: &GoalList, n: usize, bound: usize) -> Option<StrategyMachine> {
    let cols = arena.obs_names.len() + 1;
    let n_act = arena.actions.len();
    for b in 1..=bound.max(1) {
        let entries = b * (cols - 1);
        let choices = b * n_act;
        let mut digits = vec![0usize; entries];
        loop {
            let mut update = vec![vec![0; cols]; b];
            let mut output = vec![vec![0; cols]; b];
            for (i, &d) in digits.iter().enumerate() {
                update[i / (cols - 1)][i % (cols - 1)] = d / n_act;
                output[i / (cols - 1)][i % (cols - 1)] = d % n_act;
            }
            let m = StrategyMachine {
                alphabet: arena.obs_names.clone(),
                actions: arena.actions.clone(),
                init: 0,
                update,
                output,
            };
            if verify_strategy(arena, goals, n, &m).expect("compatible machine").holds() {
                return Some(m);
            }
            let mut i = 0;
            loop {
                if i == entries {
                    break;
                }
                digits[i] += 1;
                if digits[i] < choices {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
            if i == entries {
                break;
            }
        }
    }
    None
}
