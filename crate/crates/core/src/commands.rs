//! The `validate`, `analyze` and `convert` commands, producing reports.

use crate::autonomy::{run_doxastic_system, AutonomyOutcome, BestChoiceTable};
use crate::belief::SatCache;
use crate::formation::{check_knowledge_consistency, check_totality};
use crate::io::{
    parse_env_script, parse_manifest, relative_to, write_formation, write_strategy, Bundle, EnvScript, IoError,
};
use crate::relevance::{
    conserves_autonomous, conserves_doxastic, observation_pool, Component, Kob, Lattice, LatticeMode, RelevanceError,
    Vary, WitnessStep,
};
use crate::report::{Report, Verdict};
use crate::synthesis::{achieved_level, exact_analysis, max_achievable, Arena, SynthesisOptions};
use crate::world::World;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Question {
    Dominance,
    BestActions,
    Decisive,
    SynthAutonomous,
    ConserveDoxastic,
    ConserveAutonomous,
    WeakRelevance,
    Relevance,
    Simulate,
}

impl Question {
    pub const ALL: [Question; 9] = [
        Question::Dominance,
        Question::BestActions,
        Question::Decisive,
        Question::SynthAutonomous,
        Question::ConserveDoxastic,
        Question::ConserveAutonomous,
        Question::WeakRelevance,
        Question::Relevance,
        Question::Simulate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Question::Dominance => "dominance",
            Question::BestActions => "best-actions",
            Question::Decisive => "decisive",
            Question::SynthAutonomous => "synth-autonomous",
            Question::ConserveDoxastic => "conserve-doxastic",
            Question::ConserveAutonomous => "conserve-autonomous",
            Question::WeakRelevance => "weak-relevance",
            Question::Relevance => "relevance",
            Question::Simulate => "simulate",
        }
    }
}

impl fmt::Display for Question {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Question {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Question::ALL.into_iter().find(|q| q.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Question::ALL.iter().map(|q| q.name()).collect();
            format!("unknown question `{s}`; expected one of {}", names.join(", "))
        })
    }
}

#[derive(Clone, Debug)]
pub struct AnalyzeFlags {
    pub bound: Option<usize>,
    pub lattice: LatticeMode,
    /// Script name from the bundle, or a path to a script file.
    pub env: Option<String>,
    /// Observation universe for `relevance`; defaults to the bundle's observables.
    pub pool: Option<Vec<String>>,
    /// Replaces the bundle's observables.
    pub observe: Option<Vec<String>>,
}

impl Default for AnalyzeFlags {
    fn default() -> Self {
        AnalyzeFlags { bound: None, lattice: LatticeMode::Full, env: None, pool: None, observe: None }
    }
}

fn read(p: &str) -> Result<String, IoError> {
    std::fs::read_to_string(p).map_err(|e| IoError::Read { path: p.to_string(), msg: e.to_string() })
}

/// Parses and validates a bundle. Unreadable or unparsable input is an input
/// error; a bundle that parses but fails a validator is a negative verdict.
pub fn validate(path: &Path) -> Report {
    let cmd = format!("validate {}", path.display());
    let p = path.to_string_lossy().to_string();
    let manifest = match read(&p).and_then(|t| parse_manifest(&t).map_err(|e| e.in_file(&p))) {
        Ok(m) => m,
        Err(e) => return Report::error(cmd, e),
    };
    let mut missing = Vec::new();
    if manifest.world.is_none() {
        missing.push("world");
    }
    if manifest.goals.is_none() {
        missing.push("goals");
    }
    if !missing.is_empty() {
        let mut r = Report::new(cmd);
        for m in missing {
            r.push("error", format!("{p}: missing `{m}` entry"));
        }
        r.verdict = Verdict::InputError;
        return r;
    }
    let b = match Bundle::load(&p, &read) {
        Ok(b) => b,
        Err(e) => return Report::error(cmd, e),
    };
    let mut r = Report::new(cmd);
    let problems = validate_bundle(&b);
    r.push("world-states", b.world.num_states());
    r.push("goals", b.goals.len());
    if let Some(c) = &b.catalog {
        r.push("beliefs", c.len());
    }
    if let Some(f) = &b.formation {
        r.push("rules", f.rules.len());
    }
    for pr in &problems {
        r.push("invalid", pr);
    }
    r.verdict = if problems.is_empty() { Verdict::Yes } else { Verdict::No };
    r
}

/// Every validator finding of a loaded bundle.
pub fn validate_bundle(b: &Bundle) -> Vec<String> {
    let mut out: Vec<String> = b.world.validate().iter().map(|v| format!("world: {v}")).collect();
    if let Some(obs) = &b.observe {
        if let Err(e) = b.world.resolve_observables(obs) {
            out.push(format!("observe: {e}"));
        }
    }
    if let Some(c) = &b.catalog {
        for (id, i, v) in c.validate(Some(&b.world)) {
            out.push(format!("catalog: belief {id} reality {i}: {v}"));
        }
    }
    if let Some(f) = &b.formation {
        match &b.catalog {
            None => out.push("formation: no catalog to resolve beliefs against".into()),
            Some(c) => {
                if let Err(e) = f.check_references(c) {
                    out.push(format!("formation: {e}"));
                } else if let Err(e) = f.obs_mask(&b.world) {
                    out.push(format!("formation: {e}"));
                } else if let Err(path) = check_totality(f, &b.world) {
                    out.push(format!("formation: not total, no rule matches after path {}", path.join(" ")));
                } else if let Err(w) = check_knowledge_consistency(f, &b.world, &b.knowledge, c, &SatCache::new()) {
                    out.push(format!("formation: not knowledge-consistent: {w}"));
                }
            }
        }
    }
    if let Some(s) = &b.strategy {
        if let Err(e) = s.validate() {
            out.push(format!("strategy: {e}"));
        }
        if let Some(a) = s.actions.iter().find(|a| b.world.ego_action_id(a).is_none()) {
            out.push(format!("strategy: action `{a}` is not an ego action of the world"));
        }
        if let Some(f) = &b.formation {
            let ids = f.belief_ids();
            if let Some(t) = s.alphabet.iter().find(|t| !ids.contains(t)) {
                out.push(format!("strategy: column `{t}` is not a belief the formation forms"));
            }
        }
    }
    for (name, s) in &b.scripts {
        out.extend(script_problems(&b.world, s).into_iter().map(|e| format!("script {name}: {e}")));
    }
    out
}

fn script_problems(w: &World, s: &EnvScript) -> Vec<String> {
    let mut out = Vec::new();
    if w.state_id(&s.start).is_none() {
        out.push(format!("unknown start state `{}`", s.start));
    }
    for a in &s.env {
        if w.env_action_id(a).is_none() {
            out.push(format!("unknown environment action `{a}`"));
        }
    }
    out
}

/// JSON mirror of a bundle.
pub fn convert(path: &Path) -> Result<String, Report> {
    let b = Bundle::load_path(path).map_err(|e| Report::error(format!("convert {}", path.display()), e))?;
    Ok(serde_json::to_string_pretty(&b.to_json()).expect("json values serialize"))
}

fn steps(ws: &[WitnessStep]) -> String {
    ws.iter()
        .map(|s| match &s.belief {
            Some(b) => format!("{}[{b}]", s.state),
            None => s.state.clone(),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn need<'b, T>(r: &mut Report, v: &'b Option<T>, what: &str) -> Option<&'b T> {
    if v.is_none() {
        r.push("error", format!("missing {what}"));
        r.verdict = Verdict::InputError;
    }
    v.as_ref()
}

fn relevance_error(r: &mut Report, e: RelevanceError) {
    r.push("error", e);
    r.verdict = Verdict::InputError;
}

/// Runs one analysis on the bundle at `path`.
pub fn analyze(question: Question, path: &Path, flags: &AnalyzeFlags) -> Report {
    let cmd = format!("analyze {question} {}", path.display());
    let b = match Bundle::load_path(path) {
        Ok(b) => b,
        Err(e) => return Report::error(cmd, e),
    };
    let problems = validate_bundle(&b);
    if !problems.is_empty() {
        let mut r = Report::new(cmd);
        for p in problems {
            r.push("invalid", p);
        }
        r.verdict = Verdict::InputError;
        return r;
    }
    let mut r = Report::new(cmd);
    analyze_bundle(&mut r, question, &b, &path.to_string_lossy(), flags);
    r
}

/// Runs one analysis on a loaded, valid bundle; `base` resolves script paths.
pub fn analyze_bundle(r: &mut Report, question: Question, b: &Bundle, base: &str, flags: &AnalyzeFlags) {
    let opts = SynthesisOptions { bound: flags.bound, ..SynthesisOptions::default() };
    let wd = &b.world;
    let goals = &b.goals;
    let observables = flags.observe.clone().or_else(|| b.observables());
    match question {
        Question::Dominance => {
            let arena = Arena::with_mask(wd, wd.all_props());
            let best = max_achievable(&arena, goals, &opts);
            let conditional = best.conditional;
            r.push("truth-level", best.level);
            r.push("levels", goals.len() - 1);
            if best.level + 1 < goals.len() {
                r.push("first-unmet-goal", goals.goal(best.level));
            }
            if let Some(ex) = exact_analysis(&arena, goals, &opts) {
                for (tok, lvl) in &ex.per_init {
                    r.push("initial", format!("{tok} {lvl}"));
                }
            }
            r.artifact("truth.strat", write_strategy(&best.machine));
            let mut holds = true;
            if let (Some(f), Some(s)) = (&b.formation, &b.strategy) {
                let a = Arena::with_formation(wd, f);
                match achieved_level(&a, goals, s) {
                    Ok(l) => {
                        holds = l >= best.level;
                        r.push("doxastic-level", l);
                        r.push("doxastic-dominant", if holds { "yes" } else { "no" });
                    }
                    Err(e) => {
                        r.push("error", e);
                        r.verdict = Verdict::InputError;
                        return;
                    }
                }
            }
            r.verdict = Verdict::of(holds, conditional);
        }
        Question::BestActions | Question::Decisive => {
            let Some(cat) = need(r, &b.catalog, "catalog") else { return };
            let table = match BestChoiceTable::compute(cat, goals, &opts) {
                Ok(t) => t,
                Err(e) => {
                    r.push("error", e);
                    r.verdict = Verdict::InputError;
                    return;
                }
            };
            for e in &table.entries {
                let levels: Vec<String> = e.group_levels.iter().map(|(t, l)| format!("{t}:{l}")).collect();
                if question == Question::BestActions {
                    r.push(
                        "belief",
                        format!(
                            "{} levels={} choices={} decisive={}",
                            e.belief,
                            levels.join(","),
                            e.choices.join(","),
                            e.decisive.join(",")
                        ),
                    );
                } else {
                    r.push("belief", format!("{} {}", e.belief, if e.is_decisive() { "decisive" } else { "indecisive" }));
                }
            }
            let holds = question == Question::BestActions || table.indecisive().is_empty();
            r.verdict = Verdict::of(holds, table.conditional());
        }
        Question::SynthAutonomous => {
            let Some(cat) = need(r, &b.catalog, "catalog") else { return };
            let Some(obs) = need(r, &observables, "observables") else { return };
            let table = match BestChoiceTable::compute(cat, goals, &opts) {
                Ok(t) => t,
                Err(e) => {
                    r.push("error", e);
                    r.verdict = Verdict::InputError;
                    return;
                }
            };
            let (target, tc) = crate::autonomy::truth_level(wd, goals, &opts);
            let out = crate::autonomy::synthesize_autonomous_with(wd, goals, &b.knowledge, obs, cat, &table, target, &opts);
            r.push("target", target);
            match out {
                Err(e) => {
                    r.push("error", e);
                    r.verdict = Verdict::InputError;
                }
                Ok(AutonomyOutcome::Exists(sys)) => {
                    r.push("exists", "yes");
                    r.push("consistent", if sys.consistent { "yes" } else { "no" });
                    r.push("rules", sys.formation.rules.len());
                    r.artifact("formation.txt", write_formation(&sys.formation));
                    r.artifact("strategy.txt", write_strategy(&sys.strategy));
                    r.verdict = Verdict::of(sys.consistent, tc || table.conditional());
                }
                Ok(AutonomyOutcome::Impossible { .. }) => {
                    r.push("exists", "no");
                    let ind = table.indecisive();
                    if !ind.is_empty() {
                        r.push("indecisive", ind.join(","));
                    }
                    r.verdict = Verdict::of(false, tc || table.conditional());
                }
                Ok(AutonomyOutcome::Inconclusive { .. }) => {
                    r.push("exists", "unknown");
                    r.verdict = Verdict::Conditional;
                }
            }
        }
        Question::ConserveDoxastic => {
            let Some(cat) = need(r, &b.catalog, "catalog") else { return };
            let Some(f) = need(r, &b.formation, "formation") else { return };
            match conserves_doxastic(wd, goals, &b.knowledge, cat, f, &opts) {
                Err(e) => relevance_error(r, e),
                Ok(d) => {
                    r.push("target", d.target);
                    r.push("conserves", if d.holds { "yes" } else { "no" });
                    if let Some(m) = &d.strategy {
                        r.artifact("doxastic.strat", write_strategy(m));
                    }
                    r.verdict = Verdict::of(d.holds, d.conditional);
                }
            }
        }
        Question::ConserveAutonomous => {
            let Some(cat) = need(r, &b.catalog, "catalog") else { return };
            let Some(f) = need(r, &b.formation, "formation") else { return };
            let table = match BestChoiceTable::compute(cat, goals, &opts) {
                Ok(t) => t,
                Err(e) => {
                    r.push("error", e);
                    r.verdict = Verdict::InputError;
                    return;
                }
            };
            match conserves_autonomous(wd, goals, &b.knowledge, cat, f, &table, &opts) {
                Err(e) => relevance_error(r, e),
                Ok(a) => {
                    r.push("target", a.target);
                    r.push("conserves", if a.holds { "yes" } else { "no" });
                    if !a.indecisive.is_empty() {
                        r.push("indecisive", a.indecisive.join(","));
                    }
                    if let Some(w) = &a.witness {
                        r.push("witness-stem", steps(&w.stem));
                        r.push("witness-cycle", steps(&w.cycle));
                        r.artifact(
                            "counterexample.txt",
                            format!("stem {}\ncycle {}\n", steps(&w.stem), steps(&w.cycle)),
                        );
                    }
                    r.verdict = Verdict::of(a.holds, a.conditional);
                }
            }
        }
        Question::WeakRelevance | Question::Relevance => {
            let Some(cat) = need(r, &b.catalog, "catalog") else { return };
            let Some(obs) = need(r, &observables, "observables") else { return };
            let lat = match Lattice::new(wd, goals, cat, &opts) {
                Ok(l) => l,
                Err(e) => return relevance_error(r, e),
            };
            let q = Kob { knowledge: b.knowledge.clone(), observe: obs.clone(), beliefs: cat.ids() };
            r.push("query", q.describe());
            r.push("target", lat.target);
            if question == Question::WeakRelevance {
                match lat.weak_relevance(&q, flags.lattice, Vary::ALL) {
                    Err(e) => relevance_error(r, e),
                    Ok(w) => {
                        r.push("achieves", if w.achieves { "yes" } else { "no" });
                        if let Some(s) = &w.smaller {
                            r.push("smaller", s.describe());
                        }
                        r.push("checked", w.checked);
                        if w.monotonicity_violations > 0 {
                            r.push("monotonicity-violations", w.monotonicity_violations);
                        }
                        r.verdict = Verdict::of(w.holds, w.conditional);
                    }
                }
            } else {
                let universe = flags.pool.clone().unwrap_or_else(|| obs.clone());
                let pool = observation_pool(&q, &universe);
                match lat.relevance(&q, Component::Observations, &pool, flags.lattice) {
                    Err(e) => relevance_error(r, e),
                    Ok(rel) => {
                        r.push("pool", format!("{{{}}}", universe.join(",")));
                        r.push("weakly-relevant", if rel.weak.holds { "yes" } else { "no" });
                        for a in &rel.alternatives {
                            r.push("alternative", a.describe());
                        }
                        r.verdict = Verdict::of(rel.holds, rel.conditional);
                    }
                }
            }
        }
        Question::Simulate => {
            let Some(f) = need(r, &b.formation, "formation") else { return };
            let Some(s) = need(r, &b.strategy, "strategy") else { return };
            let Some(env) = need(r, &flags.env, "--env script") else { return };
            let script = match b.scripts.get(env) {
                Some(s) => s.clone(),
                None => {
                    let p = relative_to(base, env);
                    match read(&p).and_then(|t| parse_env_script(&t).map_err(|e| e.in_file(&p))) {
                        Ok(s) => s,
                        Err(e) => {
                            r.push("error", e);
                            r.verdict = Verdict::InputError;
                            return;
                        }
                    }
                }
            };
            match run_doxastic_system(wd, goals, f, s, &script) {
                Err(e) => {
                    r.push("error", e);
                    r.verdict = Verdict::InputError;
                }
                Ok(run) => {
                    for i in 0..run.states.len() {
                        let act = run.actions.get(i).map_or("-", |a| a.as_str());
                        r.push(
                            "step",
                            format!("{i} {} {} {} {act}", run.states[i], run.tokens[i], run.beliefs[i]),
                        );
                    }
                    let (target, cond) = crate::autonomy::truth_level(wd, goals, &opts);
                    r.push("run-level", run.level);
                    r.push("target", target);
                    let violated: Vec<String> = (run.level..goals.len()).map(|i| goals.goal(i).to_string()).collect();
                    r.push("violations", if run.level >= target { "none".to_string() } else { violated[0].clone() });
                    r.verdict = Verdict::of(run.level >= target, cond);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn questions_round_trip() {
        for q in Question::ALL {
            assert_eq!(q.name().parse::<Question>().unwrap(), q);
        }
        assert!("nope".parse::<Question>().is_err());
    }

    #[test]
    fn fixture_bundles_validate() {
        for name in fixtures::CROSSING.iter().chain(fixtures::ACCELERATION) {
            let b = fixtures::bundle(name).unwrap();
            assert_eq!(validate_bundle(&b), Vec::<String>::new(), "{name}");
        }
    }

    #[test]
    fn simulate_slow_branch() {
        let b = fixtures::bundle("running.bundle").unwrap();
        let mut r = Report::new("t");
        let flags = AnalyzeFlags { env: Some("slow".into()), ..Default::default() };
        analyze_bundle(&mut r, Question::Simulate, &b, "running.bundle", &flags);
        assert_eq!(r.verdict, Verdict::Yes, "{}", r.render());
        assert_eq!(r.get("violations"), Some("none"));
    }

    #[test]
    fn dangling_belief_is_reported() {
        let mut b = fixtures::bundle("running.bundle").unwrap();
        let mut f = b.formation.clone().unwrap();
        f.rules[0].belief = "B99".into();
        b.formation = Some(f);
        let p = validate_bundle(&b);
        assert_eq!(p.len(), 1);
        assert!(p[0].contains("B99"), "{p:?}");
    }
}
