//! Realities, beliefs, belief catalogs and knowledge.

use crate::buchi::world_satisfies;
use crate::ltl::{Bltl, Ltl};
use crate::world::{StateId, World};
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::sync::{Arc, Mutex};
use thiserror::Error;

/// A possible world together with the states the system believes it is in.
#[derive(Clone, Debug)]
pub struct Reality {
    pub world_id: String,
    pub world: Arc<World>,
    /// Sorted, deduplicated.
    pub current: Vec<StateId>,
}

impl PartialEq for Reality {
    fn eq(&self, other: &Self) -> bool {
        self.world_id == other.world_id && self.current == other.current && *self.world == *other.world
    }
}

impl Reality {
    pub fn new(world_id: &str, world: Arc<World>, mut current: Vec<StateId>) -> Reality {
        current.sort_unstable();
        current.dedup();
        Reality { world_id: world_id.to_string(), world, current }
    }

    /// Resolves current state names against the world.
    pub fn from_names<S: AsRef<str>>(world_id: &str, world: Arc<World>, names: &[S]) -> Result<Reality, BeliefError> {
        let mut current = Vec::new();
        for n in names {
            let n = n.as_ref();
            current.push(
                world
                    .state_id(n)
                    .ok_or_else(|| BeliefError::UnknownState(world_id.to_string(), n.to_string()))?,
            );
        }
        Ok(Reality::new(world_id, world, current))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Belief {
    pub id: String,
    pub realities: Vec<Reality>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BeliefError {
    #[error("world `{0}` has no state `{1}`")]
    UnknownState(String, String),
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("unknown belief `{0}`")]
    UnknownBelief(String),
    #[error("duplicate belief `{0}`")]
    DuplicateBelief(String),
    #[error("duplicate world `{0}`")]
    DuplicateWorld(String),
    #[error("knowledge labeling names unknown state `{0}`")]
    UnknownDesignState(String),
}

/// A single reality invariant violation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RealityViolation {
    EmptyCurrent,
    Unreachable { state: String },
    Antichain { from: String, to: String },
    ActionNotInDesign { action: String },
    PropNotInDesign { prop: String },
    World(String),
}

impl fmt::Display for RealityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealityViolation::EmptyCurrent => write!(f, "empty-current: no current state"),
            RealityViolation::Unreachable { state } => {
                write!(f, "unreachable-current: {state} is not reachable from an initial state")
            }
            RealityViolation::Antichain { from, to } => {
                write!(f, "antichain: current state {to} is reachable from current state {from}")
            }
            RealityViolation::ActionNotInDesign { action } => {
                write!(f, "action-not-in-design: {action}")
            }
            RealityViolation::PropNotInDesign { prop } => write!(f, "prop-not-in-design: {prop}"),
            RealityViolation::World(v) => write!(f, "world: {v}"),
        }
    }
}

/// Checks reachability, the antichain condition and, when a design world is
/// given, that actions and propositions are drawn from it.
pub fn validate_reality(r: &Reality, design: Option<&World>) -> Vec<RealityViolation> {
    let w = &r.world;
    let mut out: Vec<RealityViolation> = w.validate().into_iter().map(|v| RealityViolation::World(v.to_string())).collect();
    if r.current.is_empty() {
        out.push(RealityViolation::EmptyCurrent);
    }
    let reach = w.reachable_from(w.init());
    for &c in &r.current {
        if !reach[c] {
            out.push(RealityViolation::Unreachable { state: w.state_name(c).to_string() });
        }
    }
    // No current state may be reachable from a current state by a nonempty path.
    let n = w.num_states();
    for &c in &r.current {
        let mut seen = vec![false; n];
        let mut queue: VecDeque<StateId> = w.post(c).iter().copied().collect();
        for &t in w.post(c) {
            seen[t] = true;
        }
        while let Some(s) = queue.pop_front() {
            if r.current.binary_search(&s).is_ok() {
                out.push(RealityViolation::Antichain {
                    from: w.state_name(c).to_string(),
                    to: w.state_name(s).to_string(),
                });
            }
            for &t in w.post(s) {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
    }
    if let Some(d) = design {
        for a in w.ego_actions() {
            if d.ego_action_id(a).is_none() {
                out.push(RealityViolation::ActionNotInDesign { action: a.clone() });
            }
        }
        for a in w.env_actions() {
            if d.env_action_id(a).is_none() {
                out.push(RealityViolation::ActionNotInDesign { action: a.clone() });
            }
        }
        for p in w.props() {
            if d.prop_id(p).is_none() {
                out.push(RealityViolation::PropNotInDesign { prop: p.clone() });
            }
        }
    }
    out
}

impl Belief {
    pub fn new(id: &str, realities: Vec<Reality>) -> Belief {
        Belief { id: id.to_string(), realities }
    }

    /// Violations of all realities, tagged with the reality index.
    pub fn validate(&self, design: Option<&World>) -> Vec<(usize, RealityViolation)> {
        let mut out = Vec::new();
        if self.realities.is_empty() {
            out.push((0, RealityViolation::EmptyCurrent));
        }
        for (i, r) in self.realities.iter().enumerate() {
            out.extend(validate_reality(r, design).into_iter().map(|v| (i, v)));
        }
        out
    }
}

type SatKey = (usize, Vec<StateId>, Ltl);

/// Memo table for LTL checks over worlds, shared across threads.
#[derive(Default)]
pub struct SatCache {
    map: Mutex<HashMap<SatKey, (Arc<World>, bool)>>,
}

impl SatCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn world_satisfies(&self, w: &Arc<World>, from: &[StateId], f: &Ltl) -> bool {
        let key = (Arc::as_ptr(w) as usize, from.to_vec(), f.clone());
        if let Some((_, v)) = self.map.lock().expect("cache lock").get(&key) {
            return *v;
        }
        let v = world_satisfies(w, from, f).is_ok();
        self.map.lock().expect("cache lock").insert(key, (w.clone(), v));
        v
    }
}

/// `K ψ` holds if ψ holds on all initial traces of every reality, `Kc ψ` if
/// it holds on all traces from every current state.
pub fn belief_satisfies(b: &Belief, phi: &Bltl) -> bool {
    belief_satisfies_cached(b, phi, &SatCache::new())
}

pub fn belief_satisfies_cached(b: &Belief, phi: &Bltl, cache: &SatCache) -> bool {
    realities_satisfy(&b.realities, phi, cache)
}

pub fn realities_satisfy(rs: &[Reality], phi: &Bltl, cache: &SatCache) -> bool {
    match phi {
        Bltl::K(f) => rs.iter().all(|r| cache.world_satisfies(&r.world, r.world.init(), f)),
        Bltl::Kc(f) => rs.iter().all(|r| cache.world_satisfies(&r.world, &r.current, f)),
        Bltl::Not(a) => !realities_satisfy(rs, a, cache),
        Bltl::And(a, b) => realities_satisfy(rs, a, cache) && realities_satisfy(rs, b, cache),
    }
}

/// A finite set of BLTL formulas.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KnowledgeBase(pub Vec<Bltl>);

impl KnowledgeBase {
    pub fn new(mut formulas: Vec<Bltl>) -> Self {
        let mut seen = Vec::new();
        formulas.retain(|f| {
            if seen.contains(f) {
                false
            } else {
                seen.push(f.clone());
                true
            }
        });
        KnowledgeBase(formulas)
    }

    pub fn formulas(&self) -> &[Bltl] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn satisfied_by(&self, b: &Belief, cache: &SatCache) -> bool {
        self.0.iter().all(|f| belief_satisfies_cached(b, f, cache))
    }

    /// First formula the belief violates.
    pub fn first_violation(&self, b: &Belief, cache: &SatCache) -> Option<&Bltl> {
        self.0.iter().find(|f| !belief_satisfies_cached(b, f, cache))
    }
}

/// Knowledge base per design-world state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnowledgeLabeling {
    per_state: Vec<KnowledgeBase>,
}

impl KnowledgeLabeling {
    pub fn empty(num_states: usize) -> Self {
        KnowledgeLabeling { per_state: vec![KnowledgeBase::default(); num_states] }
    }

    pub fn uniform(num_states: usize, kb: KnowledgeBase) -> Self {
        KnowledgeLabeling { per_state: vec![kb; num_states] }
    }

    pub fn from_vec(per_state: Vec<KnowledgeBase>) -> Self {
        KnowledgeLabeling { per_state }
    }

    pub fn num_states(&self) -> usize {
        self.per_state.len()
    }

    pub fn at(&self, s: StateId) -> &KnowledgeBase {
        &self.per_state[s]
    }

    pub fn set(&mut self, s: StateId, kb: KnowledgeBase) {
        self.per_state[s] = kb;
    }

    pub fn add(&mut self, s: StateId, f: Bltl) {
        if !self.per_state[s].0.contains(&f) {
            self.per_state[s].0.push(f);
        }
    }

    pub fn add_everywhere(&mut self, f: Bltl) {
        for s in 0..self.per_state.len() {
            self.add(s, f.clone());
        }
    }

    pub fn per_state(&self) -> &[KnowledgeBase] {
        &self.per_state
    }

    pub fn total_formulas(&self) -> usize {
        self.per_state.iter().map(|k| k.len()).sum()
    }
}

/// The finite set of beliefs the system can form, over a shared world pool.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BeliefCatalog {
    worlds: BTreeMap<String, Arc<World>>,
    beliefs: Vec<Belief>,
}

impl BeliefCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_world(&mut self, id: &str, w: Arc<World>) -> Result<(), BeliefError> {
        if self.worlds.contains_key(id) {
            return Err(BeliefError::DuplicateWorld(id.to_string()));
        }
        self.worlds.insert(id.to_string(), w);
        Ok(())
    }

    pub fn world(&self, id: &str) -> Result<&Arc<World>, BeliefError> {
        self.worlds.get(id).ok_or_else(|| BeliefError::UnknownWorld(id.to_string()))
    }

    pub fn worlds(&self) -> impl Iterator<Item = (&String, &Arc<World>)> {
        self.worlds.iter()
    }

    /// Adds a belief; realities must reference pooled worlds.
    pub fn add_belief(&mut self, b: Belief) -> Result<(), BeliefError> {
        if self.beliefs.iter().any(|x| x.id == b.id) {
            return Err(BeliefError::DuplicateBelief(b.id));
        }
        for r in &b.realities {
            if !self.worlds.contains_key(&r.world_id) {
                self.worlds.insert(r.world_id.clone(), r.world.clone());
            }
        }
        self.beliefs.push(b);
        Ok(())
    }

    /// Convenience: belief from `(world id, current state names)` pairs.
    pub fn add(&mut self, id: &str, realities: &[(&str, &[&str])]) -> Result<(), BeliefError> {
        let mut rs = Vec::new();
        for (wid, cur) in realities {
            let w = self.world(wid)?.clone();
            rs.push(Reality::from_names(wid, w, cur)?);
        }
        self.add_belief(Belief::new(id, rs))
    }

    pub fn beliefs(&self) -> &[Belief] {
        &self.beliefs
    }

    pub fn len(&self) -> usize {
        self.beliefs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beliefs.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Belief> {
        self.beliefs.iter().find(|b| b.id == id)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.beliefs.iter().position(|b| b.id == id)
    }

    pub fn ids(&self) -> Vec<String> {
        self.beliefs.iter().map(|b| b.id.clone()).collect()
    }

    /// The catalog restricted to the given belief ids (catalog order kept).
    pub fn restrict(&self, ids: &[String]) -> BeliefCatalog {
        BeliefCatalog {
            worlds: self.worlds.clone(),
            beliefs: self.beliefs.iter().filter(|b| ids.contains(&b.id)).cloned().collect(),
        }
    }

    pub fn validate(&self, design: Option<&World>) -> Vec<(String, usize, RealityViolation)> {
        self.beliefs
            .iter()
            .flat_map(|b| b.validate(design).into_iter().map(move |(i, v)| (b.id.clone(), i, v)))
            .collect()
    }
}

/// A copy of `w` whose only initial state is a fresh copy of `s` with the same
/// label and outgoing edges. The copy has no incoming edges, so it can serve as
/// a current state that no path revisits.
pub fn rooted_copy(w: &World, s: StateId) -> World {
    let mut b = w.to_builder();
    let name = format!("{}'", w.state_name(s));
    let copy = b.state_with_label(&name, w.label(s)).expect("fresh state name");
    for e in w.edges().iter().filter(|e| e.src == s) {
        b.edge_ids(copy, e.dst, e.actions.clone());
    }
    b.set_init(vec![copy]);
    b.build().expect("copy of a valid world")
}

/// A singleton belief placing the system exactly at design state `s`.
pub fn exact_state_belief(id: &str, world_id: &str, w: &World, s: StateId) -> Belief {
    let copy = rooted_copy(w, s);
    let init = copy.init()[0];
    Belief::new(id, vec![Reality::new(world_id, Arc::new(copy), vec![init])])
}
