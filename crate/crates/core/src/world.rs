//! Labelled Kripke structures with concurrent ego/environment actions.
//!
//! A [`World`] is immutable once built. Propositions, actions and states are
//! interned in declaration order, so every set over them is a bitset or a
//! sorted index vector and iteration order is deterministic.

use crate::propset::{PropSet, MAX_PROPS};
use serde::Serialize;
use std::collections::{BTreeMap, HashMap, VecDeque};
use thiserror::Error;

pub type StateId = usize;
pub type PropId = usize;
pub type ActionId = usize;

/// Name of the distinguished proposition labelling the sink state.
pub const UNDEF: &str = "undef";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ActionPair {
    pub ego: ActionId,
    pub env: ActionId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub src: StateId,
    pub dst: StateId,
    /// Sorted, deduplicated.
    pub actions: Vec<ActionPair>,
}

/// A finite-domain variable compiled to mutually exclusive atoms `name=value`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Family {
    pub name: String,
    pub atoms: Vec<PropId>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WorldError {
    #[error("duplicate proposition `{0}`")]
    DuplicateProp(String),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("duplicate action `{0}`")]
    DuplicateAction(String),
    #[error("unknown proposition `{0}`")]
    UnknownProp(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("too many propositions (limit {MAX_PROPS})")]
    TooManyProps,
    #[error("no sink state declared")]
    NoSink,
    #[error("path is not a path of the world: no edge {0} -> {1}")]
    PathNotInWorld(String, String),
    #[error("empty path")]
    EmptyPath,
}

/// A single invariant violation found by [`World::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    MissingAction { state: String, ego: String, env: String },
    MislabeledSink { state: String },
    UndefOutsideSink { state: String },
    EmptyInit,
    EmptyActionSet { src: String, dst: String },
    FamilyNotExclusive { state: String, family: String },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::MissingAction { state, ego, env } => {
                write!(f, "missing-action: state {state} has no edge for {ego}/{env}")
            }
            Violation::MislabeledSink { state } => {
                write!(f, "mislabeled-sink: sink {state} must be labelled exactly {{undef}}")
            }
            Violation::UndefOutsideSink { state } => {
                write!(f, "mislabeled-sink: non-sink state {state} carries undef")
            }
            Violation::EmptyInit => write!(f, "empty-init: no initial state"),
            Violation::EmptyActionSet { src, dst } => {
                write!(f, "empty-action-set: edge {src} -> {dst}")
            }
            Violation::FamilyNotExclusive { state, family } => {
                write!(f, "family-not-exclusive: state {state} must carry exactly one value of {family}")
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct World {
    props: Vec<String>,
    #[serde(skip)]
    prop_index: HashMap<String, PropId>,
    families: Vec<Family>,
    ego_actions: Vec<String>,
    env_actions: Vec<String>,
    states: Vec<String>,
    #[serde(skip)]
    state_index: HashMap<String, StateId>,
    labels: Vec<PropSet>,
    init: Vec<StateId>,
    sink: StateId,
    edges: Vec<Edge>,
    /// `succ[s][ego * n_env + env]`, sorted targets.
    #[serde(skip)]
    succ: Vec<Vec<Vec<StateId>>>,
    /// All targets of `s` regardless of action, sorted.
    #[serde(skip)]
    post: Vec<Vec<StateId>>,
}

impl PartialEq for World {
    fn eq(&self, other: &Self) -> bool {
        self.props == other.props
            && self.families == other.families
            && self.ego_actions == other.ego_actions
            && self.env_actions == other.env_actions
            && self.states == other.states
            && self.labels == other.labels
            && self.init == other.init
            && self.sink == other.sink
            && self.edges == other.edges
    }
}

impl World {
    pub fn props(&self) -> &[String] {
        &self.props
    }

    pub fn prop_id(&self, name: &str) -> Option<PropId> {
        self.prop_index.get(name).copied()
    }

    pub fn prop_name(&self, p: PropId) -> &str {
        &self.props[p]
    }

    pub fn families(&self) -> &[Family] {
        &self.families
    }

    pub fn ego_actions(&self) -> &[String] {
        &self.ego_actions
    }

    pub fn env_actions(&self) -> &[String] {
        &self.env_actions
    }

    pub fn ego_action_id(&self, name: &str) -> Option<ActionId> {
        self.ego_actions.iter().position(|a| a == name)
    }

    pub fn env_action_id(&self, name: &str) -> Option<ActionId> {
        self.env_actions.iter().position(|a| a == name)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s]
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.state_index.get(name).copied()
    }

    pub fn label(&self, s: StateId) -> PropSet {
        self.labels[s]
    }

    pub fn init(&self) -> &[StateId] {
        &self.init
    }

    pub fn sink(&self) -> StateId {
        self.sink
    }

    pub fn undef(&self) -> PropId {
        self.prop_index[UNDEF]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn all_props(&self) -> PropSet {
        PropSet::full(self.props.len())
    }

    /// Targets reachable from `s` when ego plays `ego` and the environment `env`.
    pub fn successors(&self, s: StateId, ego: ActionId, env: ActionId) -> &[StateId] {
        &self.succ[s][ego * self.env_actions.len() + env]
    }

    /// Targets of `s` over all actions.
    pub fn post(&self, s: StateId) -> &[StateId] {
        &self.post[s]
    }

    pub fn has_edge(&self, s: StateId, t: StateId) -> bool {
        self.post[s].binary_search(&t).is_ok()
    }

    /// States reachable from `from` (inclusive) over edges of any action.
    pub fn reachable_from(&self, from: &[StateId]) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut queue: VecDeque<StateId> = VecDeque::new();
        for &s in from {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(s) = queue.pop_front() {
            for &t in self.post(s) {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    /// Resolve observable names (family names or atom names) to a proposition set.
    pub fn resolve_observables<S: AsRef<str>>(&self, names: &[S]) -> Result<PropSet, WorldError> {
        let mut set = PropSet::EMPTY;
        for n in names {
            let n = n.as_ref();
            if let Some(fam) = self.families.iter().find(|f| f.name == n) {
                for &a in &fam.atoms {
                    set.insert(a);
                }
            } else if let Some(p) = self.prop_id(n) {
                set.insert(p);
            } else {
                return Err(WorldError::UnknownProp(n.to_string()));
            }
        }
        Ok(set)
    }

    /// Like [`World::resolve_observables`] but silently ignores names this world
    /// does not declare.
    pub fn resolve_observables_lenient<S: AsRef<str>>(&self, names: &[S]) -> PropSet {
        let mut set = PropSet::EMPTY;
        for n in names {
            let n = n.as_ref();
            if let Some(fam) = self.families.iter().find(|f| f.name == n) {
                for &a in &fam.atoms {
                    set.insert(a);
                }
            } else if let Some(p) = self.prop_id(n) {
                set.insert(p);
            }
        }
        set
    }

    /// Canonical observation token: sorted atom names joined by `.`, `_` for ∅.
    pub fn token(&self, set: PropSet) -> String {
        let mut names: Vec<&str> = set.iter().map(|p| self.props[p].as_str()).collect();
        if names.is_empty() {
            return "_".to_string();
        }
        names.sort_unstable();
        names.join(".")
    }

    /// Observation token of a state under an observation mask.
    pub fn obs_token(&self, s: StateId, mask: PropSet) -> String {
        self.token(self.labels[s].intersect(mask))
    }

    /// Checks every structural invariant of a world; an empty result means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.init.is_empty() {
            out.push(Violation::EmptyInit);
        }
        let undef = self.undef();
        for s in 0..self.num_states() {
            if s == self.sink {
                if self.labels[s] != PropSet::singleton(undef) {
                    out.push(Violation::MislabeledSink { state: self.states[s].clone() });
                }
            } else {
                if self.labels[s].contains(undef) {
                    out.push(Violation::UndefOutsideSink { state: self.states[s].clone() });
                }
                for fam in &self.families {
                    let n = fam.atoms.iter().filter(|&&a| self.labels[s].contains(a)).count();
                    if n != 1 {
                        out.push(Violation::FamilyNotExclusive {
                            state: self.states[s].clone(),
                            family: fam.name.clone(),
                        });
                    }
                }
            }
        }
        for e in &self.edges {
            if e.actions.is_empty() {
                out.push(Violation::EmptyActionSet {
                    src: self.states[e.src].clone(),
                    dst: self.states[e.dst].clone(),
                });
            }
        }
        for s in 0..self.num_states() {
            for ego in 0..self.ego_actions.len() {
                for env in 0..self.env_actions.len() {
                    if self.successors(s, ego, env).is_empty() {
                        out.push(Violation::MissingAction {
                            state: self.states[s].clone(),
                            ego: self.ego_actions[ego].clone(),
                            env: self.env_actions[env].clone(),
                        });
                    }
                }
            }
        }
        out
    }

    /// Sequence of label sets along `path` restricted to `obs`.
    pub fn observable_history(&self, path: &[StateId], obs: PropSet) -> Result<ObservableHistory, WorldError> {
        self.check_path(path)?;
        Ok(ObservableHistory {
            obs,
            entries: path.iter().map(|&s| self.labels[s].intersect(obs)).collect(),
        })
    }

    pub fn check_path(&self, path: &[StateId]) -> Result<(), WorldError> {
        for w in path.windows(2) {
            if !self.has_edge(w[0], w[1]) {
                return Err(WorldError::PathNotInWorld(
                    self.states[w[0]].clone(),
                    self.states[w[1]].clone(),
                ));
            }
        }
        Ok(())
    }

    pub fn trace(&self, path: &[StateId]) -> Vec<PropSet> {
        path.iter().map(|&s| self.labels[s]).collect()
    }

    /// Human-readable label, e.g. `{xe=1, ye=1, rp}`.
    pub fn label_string(&self, s: StateId) -> String {
        let names: Vec<&str> = self.labels[s].iter().map(|p| self.props[p].as_str()).collect();
        format!("{{{}}}", names.join(", "))
    }

    /// A builder with this world's propositions and actions but no states.
    pub fn signature_builder(&self) -> WorldBuilder {
        WorldBuilder {
            props: self.props.clone(),
            prop_index: self.prop_index.clone(),
            families: self.families.clone(),
            ego_actions: self.ego_actions.clone(),
            env_actions: self.env_actions.clone(),
            ..WorldBuilder::default()
        }
    }

    /// A builder pre-populated with this world, for derived constructions.
    pub fn to_builder(&self) -> WorldBuilder {
        let mut b = WorldBuilder {
            states: self.states.clone(),
            state_index: self.state_index.clone(),
            labels: self.labels.clone(),
            init: self.init.clone(),
            sink: Some(self.sink),
            ..self.signature_builder()
        };
        for e in &self.edges {
            b.edges.insert((e.src, e.dst), e.actions.clone());
        }
        b
    }
}

/// Observation history: label sets of a path restricted to `obs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservableHistory {
    pub obs: PropSet,
    pub entries: Vec<PropSet>,
}

impl ObservableHistory {
    pub fn tokens(&self, world: &World) -> Vec<String> {
        self.entries.iter().map(|&e| world.token(e)).collect()
    }
}

/// Incremental constructor for [`World`].
#[derive(Clone, Debug, Default)]
pub struct WorldBuilder {
    props: Vec<String>,
    prop_index: HashMap<String, PropId>,
    families: Vec<Family>,
    ego_actions: Vec<String>,
    env_actions: Vec<String>,
    states: Vec<String>,
    state_index: HashMap<String, StateId>,
    labels: Vec<PropSet>,
    init: Vec<StateId>,
    sink: Option<StateId>,
    edges: BTreeMap<(StateId, StateId), Vec<ActionPair>>,
    totalize: bool,
}

impl WorldBuilder {
    pub fn new() -> Self {
        let mut b = Self::default();
        b.add_prop(UNDEF).expect("fresh builder");
        b
    }

    fn add_prop(&mut self, name: &str) -> Result<PropId, WorldError> {
        if self.prop_index.contains_key(name) {
            return Err(WorldError::DuplicateProp(name.to_string()));
        }
        if self.props.len() >= MAX_PROPS {
            return Err(WorldError::TooManyProps);
        }
        let id = self.props.len();
        self.props.push(name.to_string());
        self.prop_index.insert(name.to_string(), id);
        Ok(id)
    }

    /// Declares a Boolean proposition. Re-declaring `undef` is accepted.
    pub fn bool_prop(&mut self, name: &str) -> Result<&mut Self, WorldError> {
        if name != UNDEF {
            self.add_prop(name)?;
        }
        Ok(self)
    }

    /// Declares a finite-domain proposition compiled to atoms `name=value`.
    pub fn family<S: AsRef<str>>(&mut self, name: &str, values: &[S]) -> Result<&mut Self, WorldError> {
        if self.families.iter().any(|f| f.name == name) {
            return Err(WorldError::DuplicateProp(name.to_string()));
        }
        let mut atoms = Vec::new();
        for v in values {
            atoms.push(self.add_prop(&format!("{name}={}", v.as_ref()))?);
        }
        self.families.push(Family { name: name.to_string(), atoms });
        Ok(self)
    }

    pub fn ego_action(&mut self, name: &str) -> Result<&mut Self, WorldError> {
        if self.ego_actions.iter().any(|a| a == name) {
            return Err(WorldError::DuplicateAction(name.to_string()));
        }
        self.ego_actions.push(name.to_string());
        Ok(self)
    }

    pub fn env_action(&mut self, name: &str) -> Result<&mut Self, WorldError> {
        if self.env_actions.iter().any(|a| a == name) {
            return Err(WorldError::DuplicateAction(name.to_string()));
        }
        self.env_actions.push(name.to_string());
        Ok(self)
    }

    pub fn state<S: AsRef<str>>(&mut self, name: &str, labels: &[S]) -> Result<StateId, WorldError> {
        if self.state_index.contains_key(name) {
            return Err(WorldError::DuplicateState(name.to_string()));
        }
        let mut set = PropSet::EMPTY;
        for l in labels {
            let l = l.as_ref();
            let p = self
                .prop_index
                .get(l)
                .copied()
                .ok_or_else(|| WorldError::UnknownProp(l.to_string()))?;
            set.insert(p);
        }
        let id = self.states.len();
        self.states.push(name.to_string());
        self.state_index.insert(name.to_string(), id);
        self.labels.push(set);
        Ok(id)
    }

    /// Adds a state with an already-resolved label.
    pub fn state_with_label(&mut self, name: &str, label: PropSet) -> Result<StateId, WorldError> {
        if self.state_index.contains_key(name) {
            return Err(WorldError::DuplicateState(name.to_string()));
        }
        let id = self.states.len();
        self.states.push(name.to_string());
        self.state_index.insert(name.to_string(), id);
        self.labels.push(label);
        Ok(id)
    }

    pub fn set_init(&mut self, init: Vec<StateId>) {
        self.init = init;
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.state_index.get(name).copied()
    }

    fn state_ref(&self, name: &str) -> Result<StateId, WorldError> {
        self.state_index
            .get(name)
            .copied()
            .ok_or_else(|| WorldError::UnknownState(name.to_string()))
    }

    pub fn init(&mut self, name: &str) -> Result<&mut Self, WorldError> {
        let s = self.state_ref(name)?;
        if !self.init.contains(&s) {
            self.init.push(s);
        }
        Ok(self)
    }

    /// Designates the sink. Creates it labelled `{undef}` if not yet declared.
    pub fn sink(&mut self, name: &str) -> Result<&mut Self, WorldError> {
        let s = match self.state_index.get(name) {
            Some(&s) => s,
            None => self.state(name, &[UNDEF])?,
        };
        self.sink = Some(s);
        Ok(self)
    }

    pub fn edge<S: AsRef<str>>(&mut self, src: &str, dst: &str, actions: &[(S, S)]) -> Result<&mut Self, WorldError> {
        let s = self.state_ref(src)?;
        let t = self.state_ref(dst)?;
        let mut pairs = Vec::new();
        for (e, v) in actions {
            let ego = self
                .ego_actions
                .iter()
                .position(|a| a == e.as_ref())
                .ok_or_else(|| WorldError::UnknownAction(e.as_ref().to_string()))?;
            let env = self
                .env_actions
                .iter()
                .position(|a| a == v.as_ref())
                .ok_or_else(|| WorldError::UnknownAction(v.as_ref().to_string()))?;
            pairs.push(ActionPair { ego, env });
        }
        self.edge_ids(s, t, pairs);
        Ok(self)
    }

    pub fn edge_ids(&mut self, src: StateId, dst: StateId, pairs: Vec<ActionPair>) {
        let entry = self.edges.entry((src, dst)).or_default();
        entry.extend(pairs);
        entry.sort_unstable();
        entry.dedup();
    }

    /// Removes every edge leaving `src`.
    pub fn clear_edges_from(&mut self, src: StateId) {
        self.edges.retain(|&(s, _), _| s != src);
    }

    pub fn outgoing(&self, src: StateId) -> Vec<(StateId, Vec<ActionPair>)> {
        self.edges
            .range((src, 0)..(src + 1, 0))
            .map(|(&(_, t), a)| (t, a.clone()))
            .collect()
    }

    /// Route every action pair missing at a state to the sink.
    pub fn totalize(&mut self, on: bool) -> &mut Self {
        self.totalize = on;
        self
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn has_prop(&self, name: &str) -> bool {
        self.prop_index.contains_key(name)
    }

    /// Replaces the ego action list. Only meaningful before any edge is added.
    pub fn set_ego_actions(&mut self, names: Vec<String>) {
        self.ego_actions = names;
    }

    pub fn env_action_names(&self) -> &[String] {
        &self.env_actions
    }

    pub fn build(mut self) -> Result<World, WorldError> {
        let sink = self.sink.ok_or(WorldError::NoSink)?;
        let n_ego = self.ego_actions.len();
        let n_env = self.env_actions.len();
        let all: Vec<ActionPair> = (0..n_ego)
            .flat_map(|ego| (0..n_env).map(move |env| ActionPair { ego, env }))
            .collect();
        if !self.edges.keys().any(|&(s, _)| s == sink) {
            self.edges.insert((sink, sink), all.clone());
        }
        if self.totalize {
            for s in 0..self.states.len() {
                let mut covered = vec![false; n_ego * n_env];
                for (_, acts) in self.edges.range((s, 0)..(s + 1, 0)) {
                    for a in acts {
                        covered[a.ego * n_env + a.env] = true;
                    }
                }
                let missing: Vec<ActionPair> = all
                    .iter()
                    .copied()
                    .filter(|a| !covered[a.ego * n_env + a.env])
                    .collect();
                if !missing.is_empty() {
                    self.edge_ids(s, sink, missing);
                }
            }
        }
        let n = self.states.len();
        let mut succ = vec![vec![Vec::new(); n_ego * n_env]; n];
        let mut post = vec![Vec::new(); n];
        let mut edges = Vec::with_capacity(self.edges.len());
        for ((s, t), acts) in self.edges {
            for a in &acts {
                succ[s][a.ego * n_env + a.env].push(t);
            }
            post[s].push(t);
            edges.push(Edge { src: s, dst: t, actions: acts });
        }
        for row in succ.iter_mut() {
            for v in row.iter_mut() {
                v.sort_unstable();
                v.dedup();
            }
        }
        for p in post.iter_mut() {
            p.sort_unstable();
            p.dedup();
        }
        Ok(World {
            props: self.props,
            prop_index: self.prop_index,
            families: self.families,
            ego_actions: self.ego_actions,
            env_actions: self.env_actions,
            states: self.states,
            state_index: self.state_index,
            labels: self.labels,
            init: self.init,
            sink,
            edges,
            succ,
            post,
        })
    }
}
