//! Relevance conservation of belief formations, and (weak) relevance of
//! knowledge, observations and beliefs.
//!
//! Tuples `(K, O, B)` are ordered componentwise: fewer observations, fewer
//! beliefs, and knowledge labelings obtained by dropping formulas at some
//! states. Dropping a formula only yields a strictly smaller labeling if it
//! changes which catalog beliefs the knowledge admits; dropping a formula
//! every belief satisfies anyway is not a change.

use crate::autonomy::{synthesize_autonomous_with, truth_level, AutonomyError, AutonomyOutcome, BestChoiceTable};
use crate::belief::{BeliefCatalog, KnowledgeBase, KnowledgeLabeling, SatCache};
use crate::formation::{check_knowledge_consistency, check_totality, ConsistencyWitness, FormationError, RegularBeliefFormation};
use crate::goals::GoalList;
use crate::synthesis::{synthesize, Arena, StrategyMachine, SynthesisOptions, SynthesisOutcome};
use crate::world::{ActionPair, StateId, World, WorldError};
use rayon::prelude::*;
use std::collections::{HashMap, VecDeque};
use std::sync::atomic::{AtomicBool, Ordering};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RelevanceError {
    #[error(transparent)]
    Autonomy(#[from] AutonomyError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Formation(#[from] FormationError),
    #[error("formation is not total: no rule matches after path {}", .0.join(" "))]
    NotTotal(Vec<String>),
    #[error("formation is not knowledge-consistent: {0}")]
    Inconsistent(ConsistencyWitness),
    #[error("candidate pool is empty")]
    PoolEmpty,
    #[error("pool member {0} differs from the query outside the queried component")]
    PoolMismatch(usize),
    #[error("lattice too large: {0} candidate tuples")]
    TooLarge(u128),
}

fn precheck(
    wd: &World,
    k: &KnowledgeLabeling,
    catalog: &BeliefCatalog,
    f: &RegularBeliefFormation,
    cache: &SatCache,
) -> Result<(), RelevanceError> {
    f.check_references(catalog)?;
    f.obs_mask(wd)?;
    check_totality(f, wd).map_err(RelevanceError::NotTotal)?;
    check_knowledge_consistency(f, wd, k, catalog, cache).map_err(RelevanceError::Inconsistent)
}

#[derive(Clone, Debug)]
pub struct DoxasticCheck {
    pub holds: bool,
    pub conditional: bool,
    /// Best level of a truth-observing strategy.
    pub target: usize,
    /// A doxastic strategy over belief ids reaching the target.
    pub strategy: Option<StrategyMachine>,
}

/// Whether some strategy reading only the formed beliefs does as well as the
/// best truth-observing strategy.
pub fn conserves_doxastic(
    wd: &World,
    goals: &GoalList,
    k: &KnowledgeLabeling,
    catalog: &BeliefCatalog,
    f: &RegularBeliefFormation,
    opts: &SynthesisOptions,
) -> Result<DoxasticCheck, RelevanceError> {
    precheck(wd, k, catalog, f, &SatCache::new())?;
    let (target, cond) = truth_level(wd, goals, opts);
    let arena = Arena::with_formation(wd, f);
    Ok(match synthesize(&arena, goals, target, opts) {
        SynthesisOutcome::Realized(m) => DoxasticCheck { holds: true, conditional: cond, target, strategy: Some(m) },
        SynthesisOutcome::Unrealizable => DoxasticCheck { holds: false, conditional: cond, target, strategy: None },
        SynthesisOutcome::BoundExhausted { .. } => DoxasticCheck { holds: false, conditional: true, target, strategy: None },
    })
}

/// One step of a counterexample: design state and the belief formed there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessStep {
    pub state: String,
    pub belief: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutonomyWitness {
    pub stem: Vec<WitnessStep>,
    pub cycle: Vec<WitnessStep>,
}

#[derive(Clone, Debug)]
pub struct AutonomyCheck {
    pub holds: bool,
    pub conditional: bool,
    pub target: usize,
    pub witness: Option<AutonomyWitness>,
    /// Formed beliefs without a decisive dominant strategy.
    pub indecisive: Vec<String>,
}

/// Product of the design world with the formation automaton in which ego only
/// plays decisive best choices of the current belief. States whose belief has
/// none move to the sink.
pub struct BestChoiceProduct {
    pub world: World,
    /// Design state and belief of each product state; `None` for the sink.
    pub nodes: Vec<Option<(StateId, String)>>,
}

pub fn best_choice_product(
    wd: &World,
    f: &RegularBeliefFormation,
    table: &BestChoiceTable,
) -> Result<BestChoiceProduct, RelevanceError> {
    let mask = wd.resolve_observables_lenient(&f.observe);
    let dfa = f.compile();
    let tok: Vec<String> = (0..wd.num_states()).map(|s| wd.obs_token(s, mask)).collect();
    let mut ids: HashMap<(StateId, usize), usize> = HashMap::new();
    let mut keys: Vec<(StateId, usize)> = Vec::new();
    let mut queue = VecDeque::new();
    let sink = wd.sink();
    let mut node = |s: StateId, q: usize, keys: &mut Vec<(StateId, usize)>, queue: &mut VecDeque<usize>| -> Option<usize> {
        if s == sink {
            return None;
        }
        let q2 = dfa.step(q, &tok[s]);
        Some(*ids.entry((s, q2)).or_insert_with(|| {
            keys.push((s, q2));
            queue.push_back(keys.len() - 1);
            keys.len() - 1
        }))
    };
    let init: Vec<Option<usize>> = wd.init().iter().map(|&s| node(s, dfa.init, &mut keys, &mut queue)).collect();
    let mut edges: Vec<(usize, Option<usize>, ActionPair)> = Vec::new();
    let mut beliefs: Vec<String> = Vec::new();
    while let Some(i) = queue.pop_front() {
        let (s, q) = keys[i];
        let Some(r) = dfa.rule[q] else {
            return Err(RelevanceError::NotTotal(vec![wd.state_name(s).to_string()]));
        };
        let belief = f.rules[r].belief.clone();
        let best = table.get(&belief).ok_or_else(|| AutonomyError::UnknownBelief(belief.clone()))?;
        if beliefs.len() <= i {
            beliefs.resize(i + 1, String::new());
        }
        beliefs[i] = belief;
        let mut any = false;
        for e in wd.edges().iter().filter(|e| e.src == s) {
            for p in &e.actions {
                if best.decisive.contains(&wd.ego_actions()[p.ego]) {
                    let t = node(e.dst, q, &mut keys, &mut queue);
                    edges.push((i, t, *p));
                    any = true;
                }
            }
        }
        if !any {
            edges.push((i, None, ActionPair { ego: 0, env: 0 }));
        }
    }
    let mut b = wd.signature_builder();
    b.sink("sink")?;
    let mut nodes = vec![None];
    for (i, &(s, q)) in keys.iter().enumerate() {
        b.state_with_label(&format!("{}@{q}", wd.state_name(s)), wd.label(s))?;
        nodes.push(Some((s, beliefs[i].clone())));
    }
    let id = |n: Option<usize>| n.map_or(0, |i| i + 1);
    for (src, dst, p) in edges {
        b.edge_ids(id(Some(src)), id(dst), vec![p]);
    }
    let mut init: Vec<usize> = init.into_iter().map(id).collect();
    init.sort_unstable();
    init.dedup();
    b.set_init(init);
    Ok(BestChoiceProduct { world: b.build()?, nodes })
}

/// Whether every autonomous system using the formation, whichever best choice
/// it plays, does as well as the best truth-observing strategy.
pub fn conserves_autonomous(
    wd: &World,
    goals: &GoalList,
    k: &KnowledgeLabeling,
    catalog: &BeliefCatalog,
    f: &RegularBeliefFormation,
    table: &BestChoiceTable,
    opts: &SynthesisOptions,
) -> Result<AutonomyCheck, RelevanceError> {
    precheck(wd, k, catalog, f, &SatCache::new())?;
    let (target, cond) = truth_level(wd, goals, opts);
    let prod = best_choice_product(wd, f, table)?;
    let mut indecisive: Vec<String> = Vec::new();
    for (_, b) in prod.nodes.iter().flatten() {
        if !table.get(b).is_some_and(|e| e.is_decisive()) && !indecisive.contains(b) {
            indecisive.push(b.clone());
        }
    }
    let step = |n: &usize| match &prod.nodes[*n] {
        Some((s, b)) => WitnessStep { state: wd.state_name(*s).to_string(), belief: Some(b.clone()) },
        None => WitnessStep { state: wd.state_name(wd.sink()).to_string(), belief: None },
    };
    let witness = goals.world_satisfies_up_to(&prod.world, prod.world.init(), target).err().map(|l| AutonomyWitness {
        stem: l.stem.iter().map(step).collect(),
        cycle: l.cycle.iter().map(step).collect(),
    });
    Ok(AutonomyCheck {
        holds: witness.is_none(),
        conditional: cond || table.conditional(),
        target,
        witness,
        indecisive,
    })
}

/// A knowledge labeling, observation set and belief set.
#[derive(Clone, Debug, PartialEq)]
pub struct Kob {
    pub knowledge: KnowledgeLabeling,
    pub observe: Vec<String>,
    pub beliefs: Vec<String>,
}

impl Kob {
    pub fn describe(&self) -> String {
        format!(
            "O={{{}}} B={{{}}} |K|={}",
            self.observe.join(","),
            self.beliefs.join(","),
            self.knowledge.total_formulas()
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LatticeMode {
    Full,
    Frontier,
}

/// Components allowed to shrink.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Vary {
    pub knowledge: bool,
    pub observe: bool,
    pub beliefs: bool,
}

impl Vary {
    pub const ALL: Vary = Vary { knowledge: true, observe: true, beliefs: true };
    /// Knowledge and observations, for a fixed formation catalog.
    pub const KO: Vary = Vary { knowledge: true, observe: true, beliefs: false };
}

#[derive(Clone, Debug)]
pub struct WeakRelevance {
    pub holds: bool,
    /// The tuple itself admits an autonomous system reaching the target.
    pub achieves: bool,
    pub conditional: bool,
    /// A strictly smaller tuple that also admits one.
    pub smaller: Option<Kob>,
    pub checked: usize,
    /// Frontier mode: successes found one level below a failing predecessor.
    pub monotonicity_violations: usize,
}

/// Shared state for lattice queries: best choices of the full catalog and the
/// target level are computed once.
pub struct Lattice<'a> {
    pub wd: &'a World,
    pub goals: &'a GoalList,
    pub catalog: &'a BeliefCatalog,
    pub table: BestChoiceTable,
    pub target: usize,
    pub opts: SynthesisOptions,
    pub limit: u128,
    cache: SatCache,
}

/// Result of one lattice point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Point {
    Yes,
    No,
    Unknown,
}

/// The distinct semantic options for one state's knowledge: each sub-base
/// with the beliefs it admits, one representative per admitted set, the
/// full base first.
struct KnowledgeClasses {
    per_state: Vec<Vec<KnowledgeBase>>,
}

impl<'a> Lattice<'a> {
    pub fn new(
        wd: &'a World,
        goals: &'a GoalList,
        catalog: &'a BeliefCatalog,
        opts: &SynthesisOptions,
    ) -> Result<Lattice<'a>, RelevanceError> {
        let table = BestChoiceTable::compute(catalog, goals, opts)?;
        let (target, _) = truth_level(wd, goals, opts);
        Ok(Lattice { wd, goals, catalog, table, target, opts: opts.clone(), limit: 1 << 20, cache: SatCache::new() })
    }

    fn admits(&self, kob: &Kob) -> Result<Point, RelevanceError> {
        let cat = self.catalog.restrict(&kob.beliefs);
        let table = self.table.restrict(&kob.beliefs);
        let out = synthesize_autonomous_with(
            self.wd,
            self.goals,
            &kob.knowledge,
            &kob.observe,
            &cat,
            &table,
            self.target,
            &self.opts,
        )?;
        Ok(match out {
            AutonomyOutcome::Exists(_) => Point::Yes,
            AutonomyOutcome::Impossible { .. } => Point::No,
            AutonomyOutcome::Inconclusive { .. } => Point::Unknown,
        })
    }

    /// Whether an autonomous system reaching the target exists for `kob`.
    pub fn admits_autonomous(&self, kob: &Kob) -> Result<Option<bool>, RelevanceError> {
        Ok(match self.admits(kob)? {
            Point::Yes => Some(true),
            Point::No => Some(false),
            Point::Unknown => None,
        })
    }

    fn classes(&self, k: &KnowledgeLabeling) -> Result<KnowledgeClasses, RelevanceError> {
        let beliefs = self.catalog.beliefs();
        let mut memo: Vec<(&KnowledgeBase, Vec<KnowledgeBase>)> = Vec::new();
        let mut per_state = Vec::with_capacity(k.num_states());
        for kb in k.per_state() {
            if let Some((_, c)) = memo.iter().find(|(x, _)| *x == kb) {
                per_state.push(c.clone());
                continue;
            }
            let fs = kb.formulas();
            if fs.len() > 16 {
                return Err(RelevanceError::TooLarge(1u128 << fs.len()));
            }
            let sat: Vec<Vec<bool>> = fs
                .iter()
                .map(|f| beliefs.iter().map(|b| KnowledgeBase::new(vec![f.clone()]).satisfied_by(b, &self.cache)).collect())
                .collect();
            let mut seen: Vec<Vec<bool>> = Vec::new();
            let mut reps: Vec<KnowledgeBase> = Vec::new();
            // subsets by decreasing size, so each class keeps its largest representative
            let mut masks: Vec<u32> = (0..1u32 << fs.len()).collect();
            masks.sort_by_key(|m| std::cmp::Reverse(m.count_ones()));
            for m in masks {
                let admitted: Vec<bool> = (0..beliefs.len())
                    .map(|b| (0..fs.len()).all(|i| m & (1 << i) == 0 || sat[i][b]))
                    .collect();
                if !seen.contains(&admitted) {
                    seen.push(admitted);
                    reps.push(KnowledgeBase::new(
                        (0..fs.len()).filter(|i| m & (1 << i) != 0).map(|i| fs[i].clone()).collect(),
                    ));
                }
            }
            memo.push((kb, reps.clone()));
            per_state.push(reps);
        }
        Ok(KnowledgeClasses { per_state })
    }

    /// Every class vector except the original (all zeros), up to `limit`.
    fn knowledge_candidates(&self, classes: &KnowledgeClasses) -> Result<Vec<KnowledgeLabeling>, RelevanceError> {
        let total: u128 = classes.per_state.iter().map(|c| c.len() as u128).product();
        if total > self.limit {
            return Err(RelevanceError::TooLarge(total));
        }
        let mut out = Vec::new();
        let mut idx = vec![0usize; classes.per_state.len()];
        loop {
            let mut s = 0;
            loop {
                if s == idx.len() {
                    return Ok(out);
                }
                idx[s] += 1;
                if idx[s] < classes.per_state[s].len() {
                    break;
                }
                idx[s] = 0;
                s += 1;
            }
            out.push(KnowledgeLabeling::from_vec(
                idx.iter().enumerate().map(|(s, &i)| classes.per_state[s][i].clone()).collect(),
            ));
        }
    }

    fn first_success(&self, cands: &[Kob], unknown: &AtomicBool) -> Result<Option<Kob>, RelevanceError> {
        let found = cands.par_iter().map(|c| (c, self.admits(c))).find_map_first(|(c, r)| match r {
            Ok(Point::Yes) => Some(Ok(c.clone())),
            Ok(Point::No) => None,
            Ok(Point::Unknown) => {
                unknown.store(true, Ordering::Relaxed);
                None
            }
            Err(e) => Some(Err(e)),
        });
        found.transpose()
    }

    pub fn weak_relevance(&self, kob: &Kob, mode: LatticeMode, vary: Vary) -> Result<WeakRelevance, RelevanceError> {
        let conditional = self.table.conditional();
        let me = self.admits(kob)?;
        if me != Point::Yes {
            return Ok(WeakRelevance {
                holds: false,
                achieves: false,
                conditional: conditional || me == Point::Unknown,
                smaller: None,
                checked: 1,
                monotonicity_violations: 0,
            });
        }
        let ks: Vec<KnowledgeLabeling> = if vary.knowledge {
            let classes = self.classes(&kob.knowledge)?;
            std::iter::once(kob.knowledge.clone()).chain(self.knowledge_candidates(&classes)?).collect()
        } else {
            vec![kob.knowledge.clone()]
        };
        let subsets = |xs: &[String], on: bool| -> Vec<Vec<String>> {
            if !on {
                return vec![xs.to_vec()];
            }
            let n = xs.len();
            let mut masks: Vec<u64> = (0..1u64 << n).collect();
            masks.sort_by_key(|m| std::cmp::Reverse(m.count_ones()));
            masks
                .into_iter()
                .map(|m| (0..n).filter(|i| m & (1 << i) != 0).map(|i| xs[i].clone()).collect())
                .collect()
        };
        let drop_one = |xs: &[String], on: bool| -> Vec<Vec<String>> {
            if !on {
                return Vec::new();
            }
            (0..xs.len()).map(|i| xs.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, x)| x.clone()).collect()).collect()
        };
        if kob.observe.len() > 20 || kob.beliefs.len() > 20 {
            return Err(RelevanceError::TooLarge(1u128 << kob.observe.len().max(kob.beliefs.len())));
        }
        let unknown = AtomicBool::new(false);
        let mut checked = 1;
        let mut violations = 0;
        let smaller = match mode {
            LatticeMode::Full => {
                let os = subsets(&kob.observe, vary.observe);
                let bs = subsets(&kob.beliefs, vary.beliefs);
                let total = (os.len() * bs.len()) as u128 * ks.len() as u128;
                if total > self.limit {
                    return Err(RelevanceError::TooLarge(total));
                }
                let mut cands = Vec::new();
                for (oi, o) in os.iter().enumerate() {
                    for (bi, b) in bs.iter().enumerate() {
                        for (ki, k) in ks.iter().enumerate() {
                            if oi == 0 && bi == 0 && ki == 0 {
                                continue;
                            }
                            cands.push(Kob { knowledge: k.clone(), observe: o.clone(), beliefs: b.clone() });
                        }
                    }
                }
                checked += cands.len();
                self.first_success(&cands, &unknown)?
            }
            LatticeMode::Frontier => {
                let mut cands: Vec<Kob> = ks[1..]
                    .iter()
                    .map(|k| Kob { knowledge: k.clone(), ..kob.clone() })
                    .collect();
                let preds: Vec<Kob> = drop_one(&kob.observe, vary.observe)
                    .into_iter()
                    .map(|o| Kob { observe: o, ..kob.clone() })
                    .chain(drop_one(&kob.beliefs, vary.beliefs).into_iter().map(|b| Kob { beliefs: b, ..kob.clone() }))
                    .collect();
                cands.extend(preds.iter().cloned());
                checked += cands.len();
                match self.first_success(&cands, &unknown)? {
                    Some(s) => Some(s),
                    None => {
                        let mut below: Vec<Kob> = Vec::new();
                        for p in &preds {
                            for o in drop_one(&p.observe, vary.observe) {
                                below.push(Kob { observe: o, ..p.clone() });
                            }
                            for b in drop_one(&p.beliefs, vary.beliefs) {
                                below.push(Kob { beliefs: b, ..p.clone() });
                            }
                        }
                        checked += below.len();
                        let hit = self.first_success(&below, &unknown)?;
                        violations = usize::from(hit.is_some());
                        hit
                    }
                }
            }
        };
        Ok(WeakRelevance {
            holds: smaller.is_none(),
            achieves: true,
            conditional: conditional || (smaller.is_none() && unknown.load(Ordering::Relaxed)),
            smaller,
            checked,
            monotonicity_violations: violations,
        })
    }

    /// Relevance of one component of `query`: it is weakly relevant and no
    /// other pool member is. Pool members must agree with `query` on the
    /// other two components.
    pub fn relevance(
        &self,
        query: &Kob,
        component: Component,
        pool: &[Kob],
        mode: LatticeMode,
    ) -> Result<Relevance, RelevanceError> {
        if pool.is_empty() {
            return Err(RelevanceError::PoolEmpty);
        }
        for (i, p) in pool.iter().enumerate() {
            let same_k = p.knowledge == query.knowledge;
            let same_o = p.observe == query.observe;
            let same_b = p.beliefs == query.beliefs;
            let ok = match component {
                Component::Knowledge => same_o && same_b,
                Component::Observations => same_k && same_b,
                Component::Beliefs => same_k && same_o,
            };
            if !ok {
                return Err(RelevanceError::PoolMismatch(i));
            }
        }
        let weak = self.weak_relevance(query, mode, Vary::ALL)?;
        let others: Vec<&Kob> = pool.iter().filter(|p| *p != query).collect();
        let verdicts = others
            .par_iter()
            .map(|p| self.weak_relevance(p, mode, Vary::ALL).map(|w| ((*p).clone(), w)))
            .collect::<Result<Vec<_>, _>>()?;
        let conditional = weak.conditional || verdicts.iter().any(|(_, w)| w.conditional);
        let alternatives: Vec<Kob> = verdicts.into_iter().filter(|(_, w)| w.holds).map(|(p, _)| p).collect();
        Ok(Relevance { holds: weak.holds && alternatives.is_empty(), weak, alternatives, conditional })
    }

    /// Weak relevance of the knowledge and observations of `kob` for its
    /// fixed belief catalog.
    pub fn ko_weakly_relevant(&self, kob: &Kob, mode: LatticeMode) -> Result<WeakRelevance, RelevanceError> {
        self.weak_relevance(kob, mode, Vary::KO)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    Knowledge,
    Observations,
    Beliefs,
}

#[derive(Clone, Debug)]
pub struct Relevance {
    pub holds: bool,
    pub weak: WeakRelevance,
    /// Other pool members that are weakly relevant.
    pub alternatives: Vec<Kob>,
    pub conditional: bool,
}

/// Every subset of `universe`, as observation pool entries of `query`.
pub fn observation_pool(query: &Kob, universe: &[String]) -> Vec<Kob> {
    let n = universe.len();
    (0..1u64 << n)
        .map(|m| Kob {
            observe: (0..n).filter(|i| m & (1 << i) != 0).map(|i| universe[i].clone()).collect(),
            ..query.clone()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::io::parse_world;
    use std::sync::Arc;

    fn opts() -> SynthesisOptions {
        SynthesisOptions::default()
    }

    #[test]
    fn sensor_believer_conserves_only_doxastically() {
        let b = fixtures::bundle("perm.bundle").unwrap();
        let cat = b.catalog.as_ref().unwrap();
        let f = b.formation.as_ref().unwrap();
        let d = conserves_doxastic(&b.world, &b.goals, &b.knowledge, cat, f, &opts()).unwrap();
        assert!(d.holds && !d.conditional);
        let table = BestChoiceTable::compute(cat, &b.goals, &opts()).unwrap();
        let a = conserves_autonomous(&b.world, &b.goals, &b.knowledge, cat, f, &table, &opts()).unwrap();
        assert!(!a.holds);
        let w = a.witness.unwrap();
        let states: Vec<&str> = w.stem.iter().chain(&w.cycle).map(|s| s.state.as_str()).collect();
        assert!(states.contains(&"s4"), "{states:?}");
    }

    #[test]
    fn coarse_wrong_beliefs_conserve_autonomy() {
        let b = fixtures::bundle("coarse.bundle").unwrap();
        let cat = b.catalog.as_ref().unwrap();
        let table = BestChoiceTable::compute(cat, &b.goals, &opts()).unwrap();
        let a = conserves_autonomous(&b.world, &b.goals, &b.knowledge, cat, b.formation.as_ref().unwrap(), &table, &opts())
            .unwrap();
        assert!(a.holds && a.indecisive.is_empty());
    }

    #[test]
    fn constant_belief_cannot_branch() {
        let b = fixtures::bundle("running.bundle").unwrap();
        let cat = b.catalog.as_ref().unwrap();
        let f = RegularBeliefFormation::from_texts(&["xe", "ye", "undef", "bp", "rp"], &[(".*", "B01")]).unwrap();
        let d = conserves_doxastic(&b.world, &b.goals, &crate::belief::KnowledgeLabeling::empty(b.world.num_states()), cat, &f, &opts())
            .unwrap();
        // level 3 needs no branching, so the constant belief still conserves it
        assert!(d.holds);
        let goals = GoalList::from_user_texts(&["F ((h & ye=2) | (s & xe=4))"]).unwrap();
        let blind = RegularBeliefFormation::from_texts(&["undef"], &[(".*", "B01")]).unwrap();
        let d = conserves_doxastic(&b.world, &goals, &crate::belief::KnowledgeLabeling::empty(b.world.num_states()), cat, &blind, &opts())
            .unwrap();
        assert!(!d.holds);
    }

    #[test]
    fn inconsistent_formation_is_rejected() {
        let b = fixtures::bundle("running.bundle").unwrap();
        let cat = b.catalog.as_ref().unwrap();
        let f = RegularBeliefFormation::from_texts(&["xe"], &[("xe=1", "B01")]).unwrap();
        let e = conserves_doxastic(&b.world, &b.goals, &b.knowledge, cat, &f, &opts()).unwrap_err();
        assert!(matches!(e, RelevanceError::NotTotal(_)));
    }

    fn gate() -> (World, BeliefCatalog, GoalList) {
        let w = parse_world(
            "prop gate noise goal\nact ego go stay\nact env e\n\
             state o gate\nstate on gate noise\nstate c\nstate cn noise\nstate g goal\n\
             init o on c cn\nsink bad\n\
             edge o g go/e\nedge on g go/e\nedge c g stay/e\nedge cn g stay/e\nedge g g go/e stay/e\ntotalize\n",
        )
        .unwrap();
        let go = parse_world("prop goal\nact ego go stay\nact env e\nstate a\nstate g goal\ninit a\nsink bad\nedge a g go/e\nedge g g go/e stay/e\ntotalize\n").unwrap();
        let stay = parse_world("prop goal\nact ego go stay\nact env e\nstate a\nstate g goal\ninit a\nsink bad\nedge a g stay/e\nedge g g go/e stay/e\ntotalize\n").unwrap();
        let mut cat = BeliefCatalog::new();
        cat.add_world("go", Arc::new(go)).unwrap();
        cat.add_world("stay", Arc::new(stay)).unwrap();
        cat.add("Bgo", &[("go", &["a"])]).unwrap();
        cat.add("Bstay", &[("stay", &["a"])]).unwrap();
        (w, cat, GoalList::from_user_texts(&["F goal"]).unwrap())
    }

    #[test]
    fn gate_observation_is_relevant() {
        let (w, cat, goals) = gate();
        let lat = Lattice::new(&w, &goals, &cat, &opts()).unwrap();
        let q = Kob { knowledge: KnowledgeLabeling::empty(w.num_states()), observe: vec!["gate".into()], beliefs: cat.ids() };
        let pool = observation_pool(&q, &["gate".into(), "noise".into()]);
        let r = lat.relevance(&q, Component::Observations, &pool, LatticeMode::Full).unwrap();
        assert!(r.holds && r.alternatives.is_empty());
        let noisy = Kob { observe: vec!["gate".into(), "noise".into()], ..q.clone() };
        let wr = lat.weak_relevance(&noisy, LatticeMode::Full, Vary::ALL).unwrap();
        assert!(!wr.holds && wr.achieves);
        assert_eq!(wr.smaller.unwrap().observe, vec!["gate"]);
        let fr = lat.weak_relevance(&noisy, LatticeMode::Frontier, Vary::ALL).unwrap();
        assert!(!fr.holds);
        assert!(lat.relevance(&q, Component::Observations, &[], LatticeMode::Full).is_err());
        let single = lat.relevance(&q, Component::Observations, std::slice::from_ref(&q), LatticeMode::Full).unwrap();
        assert!(single.holds);
    }

    #[test]
    fn nothing_to_remove() {
        let w = parse_world("act ego a\nact env e\nstate x\ninit x\nsink bad\nedge x x a/e\n").unwrap();
        let mut cat = BeliefCatalog::new();
        cat.add_world("w", Arc::new(w.clone())).unwrap();
        cat.add("B", &[("w", &["x"])]).unwrap();
        let goals = GoalList::from_user_texts(&[]).unwrap();
        let lat = Lattice::new(&w, &goals, &cat, &opts()).unwrap();
        let q = Kob { knowledge: KnowledgeLabeling::empty(w.num_states()), observe: vec![], beliefs: vec!["B".into()] };
        let r = lat.weak_relevance(&q, LatticeMode::Full, Vary::ALL).unwrap();
        assert!(r.holds && r.achieves);
    }

    #[test]
    fn failing_tuple_is_not_weakly_relevant() {
        let (w, cat, goals) = gate();
        let lat = Lattice::new(&w, &goals, &cat, &opts()).unwrap();
        let q = Kob { knowledge: KnowledgeLabeling::empty(w.num_states()), observe: vec!["noise".into()], beliefs: cat.ids() };
        let r = lat.weak_relevance(&q, LatticeMode::Full, Vary::ALL).unwrap();
        assert!(!r.holds && !r.achieves && r.checked == 1);
    }

    #[test]
    fn vacuous_knowledge_is_not_a_strict_reduction() {
        let b = fixtures::bundle("accel_dry.bundle").unwrap();
        let cat = b.catalog.as_ref().unwrap();
        let lat = Lattice::new(&b.world, &b.goals, cat, &opts()).unwrap();
        let classes = lat.classes(&b.knowledge).unwrap();
        assert!(classes.per_state.iter().all(|c| c.len() == 1));
        let pu = fixtures::bundle("pu.bundle").unwrap();
        let lat = Lattice::new(&pu.world, &pu.goals, pu.catalog.as_ref().unwrap(), &opts()).unwrap();
        let classes = lat.classes(&pu.knowledge).unwrap();
        let s1 = pu.world.state_id("s1").unwrap();
        assert_eq!(classes.per_state[s1].len(), 2);
        assert_eq!(lat.knowledge_candidates(&classes).unwrap().len(), 3);
    }

    fn accel(name: &str) -> crate::io::Bundle {
        fixtures::bundle(name).unwrap()
    }

    fn kob(b: &crate::io::Bundle, obs: &[&str]) -> Kob {
        Kob {
            knowledge: b.knowledge.clone(),
            observe: obs.iter().map(|s| s.to_string()).collect(),
            beliefs: b.catalog.as_ref().unwrap().ids(),
        }
    }

    #[test]
    fn acceleration_measurements() {
        let b = accel("accel_rain.bundle");
        let lat = Lattice::new(&b.world, &b.goals, b.catalog.as_ref().unwrap(), &opts()).unwrap();
        let w = |o: &[&str]| lat.weak_relevance(&kob(&b, o), LatticeMode::Full, Vary::ALL).unwrap();
        assert!(w(&["v", "t"]).holds);
        let all = w(&["pos", "v", "t"]);
        assert!(!all.holds && all.achieves);
        let pt = w(&["pos", "t"]);
        assert!(!pt.holds && !pt.achieves);

        let d = accel("accel_dry.bundle");
        let lat = Lattice::new(&d.world, &d.goals, d.catalog.as_ref().unwrap(), &opts()).unwrap();
        let q = kob(&d, &["v", "t"]);
        assert!(lat.weak_relevance(&q, LatticeMode::Full, Vary::ALL).unwrap().holds);
        assert!(lat.weak_relevance(&kob(&d, &["pos", "t"]), LatticeMode::Full, Vary::ALL).unwrap().holds);
        let pool = observation_pool(&q, &["pos".into(), "v".into(), "t".into()]);
        let r = lat.relevance(&q, Component::Observations, &pool, LatticeMode::Full).unwrap();
        assert!(!r.holds);
        assert_eq!(r.alternatives.iter().map(|k| k.observe.clone()).collect::<Vec<_>>(), vec![vec!["pos", "t"]]);
    }

    #[test]
    fn position_uncertain_is_only_automatic() {
        let b = fixtures::bundle("pu.bundle").unwrap();
        let cat = b.catalog.as_ref().unwrap();
        let f = b.formation.as_ref().unwrap();
        let d = conserves_doxastic(&b.world, &b.goals, &b.knowledge, cat, f, &opts()).unwrap();
        assert!(d.holds && d.strategy.is_some());
        let table = BestChoiceTable::compute(cat, &b.goals, &opts()).unwrap();
        let a = conserves_autonomous(&b.world, &b.goals, &b.knowledge, cat, f, &table, &opts()).unwrap();
        assert!(!a.holds);
        assert!(a.indecisive.contains(&"B03".to_string()));
    }
}
