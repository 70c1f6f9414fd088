//! Line-based text formats for worlds, goals, knowledge, catalogs,
//! formations, strategies, environment scripts and bundle manifests.
//!
//! Every format ignores blank lines and `#` comments. Writers produce text
//! that the matching parser reads back to an equal value.

use crate::belief::{Belief, BeliefCatalog, KnowledgeBase, KnowledgeLabeling, Reality};
use crate::formation::{parse_regex, RegularBeliefFormation, Rule};
use crate::goals::{normalize_goal_list, GoalList};
use crate::ltl::{parse_bltl, parse_ltl, Bltl};
use crate::synthesis::StrategyMachine;
use crate::world::{World, WorldBuilder, UNDEF};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IoError {
    #[error("{file}:{line}: {msg}")]
    Syntax { file: String, line: usize, msg: String },
    #[error("{file}: {msg}")]
    Invalid { file: String, msg: String },
    #[error("cannot read `{path}`: {msg}")]
    Read { path: String, msg: String },
}

impl IoError {
    fn at(line: usize, msg: impl ToString) -> IoError {
        IoError::Syntax { file: String::new(), line, msg: msg.to_string() }
    }

    fn invalid(msg: impl ToString) -> IoError {
        IoError::Invalid { file: String::new(), msg: msg.to_string() }
    }

    /// Attaches a file name to errors raised by the string parsers.
    pub fn in_file(self, name: &str) -> IoError {
        match self {
            IoError::Syntax { line, msg, .. } => IoError::Syntax { file: name.to_string(), line, msg },
            IoError::Invalid { msg, .. } => IoError::Invalid { file: name.to_string(), msg },
            e => e,
        }
    }
}

/// Non-comment lines as `(line number, words)`, plus the raw text after the
/// first word for formats that embed formulas.
fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            return None;
        }
        let words: Vec<&str> = l.split_whitespace().collect();
        let rest = l[words[0].len()..].trim();
        Some((i + 1, words, rest))
    })
}

// ---------------------------------------------------------------- worlds

/// Parses a world.
///
/// ```text
/// prop s h blue
/// family xe 1 2 3
/// act ego f t
/// act env e
/// state s1 xe=1 s blue
/// init s1
/// sink bad
/// edge s1 s2 f/e t/*
/// totalize
/// ```
///
/// `*` as environment action stands for every environment action. `totalize`
/// routes action pairs missing at a state to the sink.
pub fn parse_world(text: &str) -> Result<World, IoError> {
    let mut b = WorldBuilder::new();
    let mut edges: Vec<(usize, String, String, Vec<String>)> = Vec::new();
    let mut inits: Vec<(usize, String)> = Vec::new();
    let mut sink: Option<(usize, String)> = None;
    for (ln, w, _) in lines(text) {
        let err = |e: crate::world::WorldError| IoError::at(ln, e);
        match w[0] {
            "prop" => {
                for p in &w[1..] {
                    b.bool_prop(p).map_err(err)?;
                }
            }
            "family" => {
                if w.len() < 3 {
                    return Err(IoError::at(ln, "family needs a name and at least one value"));
                }
                b.family(w[1], &w[2..]).map_err(err)?;
            }
            "act" => match w.get(1) {
                Some(&"ego") => {
                    for a in &w[2..] {
                        b.ego_action(a).map_err(err)?;
                    }
                }
                Some(&"env") => {
                    for a in &w[2..] {
                        b.env_action(a).map_err(err)?;
                    }
                }
                _ => return Err(IoError::at(ln, "expected `act ego ...` or `act env ...`")),
            },
            "state" => {
                let Some(name) = w.get(1) else {
                    return Err(IoError::at(ln, "state needs a name"));
                };
                let labels: Vec<&str> = w[2..]
                    .iter()
                    .flat_map(|l| l.split(',').map(|x| x.trim_matches(|c| c == '{' || c == '}')))
                    .filter(|l| !l.is_empty())
                    .collect();
                b.state(name, &labels).map_err(err)?;
            }
            "init" => inits.extend(w[1..].iter().map(|s| (ln, s.to_string()))),
            "sink" => {
                let Some(name) = w.get(1) else {
                    return Err(IoError::at(ln, "sink needs a name"));
                };
                sink = Some((ln, name.to_string()));
            }
            "edge" => {
                if w.len() < 4 {
                    return Err(IoError::at(ln, "edge needs source, target and actions"));
                }
                let acts = w[3..]
                    .iter()
                    .flat_map(|a| a.split(','))
                    .map(|a| a.trim_matches(|c| c == '{' || c == '}'))
                    .filter(|a| !a.is_empty())
                    .map(str::to_string)
                    .collect();
                edges.push((ln, w[1].to_string(), w[2].to_string(), acts));
            }
            "totalize" => {
                b.totalize(true);
            }
            other => return Err(IoError::at(ln, format!("unknown directive `{other}`"))),
        }
    }
    let (sink_ln, sink_name) = sink.ok_or_else(|| IoError::invalid("no `sink` declared"))?;
    b.sink(&sink_name).map_err(|e| IoError::at(sink_ln, e))?;
    for (ln, s) in inits {
        b.init(&s).map_err(|e| IoError::at(ln, e))?;
    }
    let env_all = b.env_action_names().to_vec();
    for (ln, src, dst, acts) in edges {
        let mut pairs: Vec<(String, String)> = Vec::new();
        for a in acts {
            let (e, v) = a
                .split_once('/')
                .ok_or_else(|| IoError::at(ln, format!("action pair `{a}` must be ego/env")))?;
            if v == "*" {
                pairs.extend(env_all.iter().map(|v| (e.to_string(), v.clone())));
            } else {
                pairs.push((e.to_string(), v.to_string()));
            }
        }
        b.edge(&src, &dst, &pairs).map_err(|e| IoError::at(ln, e))?;
    }
    b.build().map_err(IoError::invalid)
}

/// Writes a world with every edge explicit.
pub fn write_world(w: &World) -> String {
    let mut out = String::new();
    let mut family_of = vec![None; w.props().len()];
    for (fi, f) in w.families().iter().enumerate() {
        for &a in &f.atoms {
            family_of[a] = Some(fi);
        }
    }
    let mut pending: Vec<&str> = Vec::new();
    let flush = |pending: &mut Vec<&str>, out: &mut String| {
        if !pending.is_empty() {
            out.push_str(&format!("prop {}\n", pending.join(" ")));
            pending.clear();
        }
    };
    for (p, name) in w.props().iter().enumerate() {
        match family_of[p] {
            Some(fi) => {
                let f = &w.families()[fi];
                if f.atoms[0] == p {
                    flush(&mut pending, &mut out);
                    let values: Vec<&str> = f
                        .atoms
                        .iter()
                        .map(|&a| &w.prop_name(a)[f.name.len() + 1..])
                        .collect();
                    out.push_str(&format!("family {} {}\n", f.name, values.join(" ")));
                }
            }
            None if name == UNDEF => {}
            None => pending.push(name),
        }
    }
    flush(&mut pending, &mut out);
    out.push_str(&format!("act ego {}\n", w.ego_actions().join(" ")));
    out.push_str(&format!("act env {}\n", w.env_actions().join(" ")));
    for s in 0..w.num_states() {
        let labels: Vec<&str> = w.label(s).iter().map(|p| w.prop_name(p)).collect();
        if labels.is_empty() {
            out.push_str(&format!("state {}\n", w.state_name(s)));
        } else {
            out.push_str(&format!("state {} {}\n", w.state_name(s), labels.join(" ")));
        }
    }
    let inits: Vec<&str> = w.init().iter().map(|&s| w.state_name(s)).collect();
    if !inits.is_empty() {
        out.push_str(&format!("init {}\n", inits.join(" ")));
    }
    out.push_str(&format!("sink {}\n", w.state_name(w.sink())));
    for e in w.edges() {
        let acts: Vec<String> = e
            .actions
            .iter()
            .map(|a| format!("{}/{}", w.ego_actions()[a.ego], w.env_actions()[a.env]))
            .collect();
        out.push_str(&format!("edge {} {} {}\n", w.state_name(e.src), w.state_name(e.dst), acts.join(" ")));
    }
    out
}

// ----------------------------------------------------------------- goals

/// Parses user goals, one `goal <priority> <ltl>` per line, and normalises.
pub fn parse_goals(text: &str) -> Result<GoalList, IoError> {
    let mut user = Vec::new();
    for (ln, w, rest) in lines(text) {
        if w[0] != "goal" || w.len() < 3 {
            return Err(IoError::at(ln, "expected `goal <priority> <formula>`"));
        }
        let prio: usize = w[1].parse().map_err(|_| IoError::at(ln, format!("bad priority `{}`", w[1])))?;
        let formula = rest[w[1].len()..].trim();
        user.push((parse_ltl(formula).map_err(|e| IoError::at(ln, e))?, prio));
    }
    normalize_goal_list(&user).map_err(IoError::invalid)
}

pub fn write_goals(g: &GoalList) -> String {
    g.user_goals()
        .iter()
        .enumerate()
        .map(|(i, f)| format!("goal {} {f}\n", i + 1))
        .collect()
}

// ------------------------------------------------------------- knowledge

/// Parses a knowledge labeling over the states of `w`.
///
/// ```text
/// let far = Kc (xo=4 | xo=5)
/// at * far
/// at s1 far other
/// ```
pub fn parse_knowledge(text: &str, w: &World) -> Result<KnowledgeLabeling, IoError> {
    let mut named: BTreeMap<String, Bltl> = BTreeMap::new();
    let mut k = KnowledgeLabeling::empty(w.num_states());
    for (ln, words, rest) in lines(text) {
        match words[0] {
            "let" => {
                let (name, formula) = rest
                    .split_once('=')
                    .ok_or_else(|| IoError::at(ln, "expected `let <name> = <formula>`"))?;
                let name = name.trim();
                if name.is_empty() || name.contains(char::is_whitespace) {
                    return Err(IoError::at(ln, "formula names are single words"));
                }
                let f = parse_bltl(formula.trim()).map_err(|e| IoError::at(ln, e))?;
                if named.insert(name.to_string(), f).is_some() {
                    return Err(IoError::at(ln, format!("formula `{name}` defined twice")));
                }
            }
            "at" => {
                let Some(&target) = words.get(1) else {
                    return Err(IoError::at(ln, "expected `at <state|*> <names>`"));
                };
                let states: Vec<usize> = if target == "*" {
                    (0..w.num_states()).collect()
                } else {
                    vec![w
                        .state_id(target)
                        .ok_or_else(|| IoError::at(ln, format!("unknown state `{target}`")))?]
                };
                for name in &words[2..] {
                    let f = named
                        .get(*name)
                        .ok_or_else(|| IoError::at(ln, format!("unknown formula `{name}`")))?;
                    for &s in &states {
                        k.add(s, f.clone());
                    }
                }
            }
            other => return Err(IoError::at(ln, format!("unknown directive `{other}`"))),
        }
    }
    Ok(k)
}

pub fn write_knowledge(k: &KnowledgeLabeling, w: &World) -> String {
    let mut formulas: Vec<&Bltl> = Vec::new();
    for kb in k.per_state() {
        for f in kb.formulas() {
            if !formulas.contains(&f) {
                formulas.push(f);
            }
        }
    }
    let name = |f: &Bltl| format!("k{}", formulas.iter().position(|g| *g == f).expect("collected") + 1);
    let mut out: String = formulas
        .iter()
        .enumerate()
        .map(|(i, f)| format!("let k{} = {f}\n", i + 1))
        .collect();
    let per = k.per_state();
    let uniform = !per.is_empty() && per.iter().all(|kb| kb == &per[0]);
    if uniform && !per[0].is_empty() {
        let names: Vec<String> = per[0].formulas().iter().map(name).collect();
        out.push_str(&format!("at * {}\n", names.join(" ")));
    } else if !uniform {
        for (s, kb) in per.iter().enumerate() {
            if !kb.is_empty() {
                let names: Vec<String> = kb.formulas().iter().map(name).collect();
                out.push_str(&format!("at {} {}\n", w.state_name(s), names.join(" ")));
            }
        }
    }
    out
}

// --------------------------------------------------------------- catalogs

/// Resolves a path relative to the directory of the file that mentions it.
pub fn relative_to(base: &str, path: &str) -> String {
    let p = Path::new(path);
    if p.is_absolute() {
        return path.to_string();
    }
    Path::new(base)
        .parent()
        .unwrap_or(Path::new(""))
        .join(p)
        .to_string_lossy()
        .into_owned()
}

/// Reader for files referenced by other files.
pub type Loader<'a> = &'a dyn Fn(&str) -> Result<String, IoError>;

/// Parses a belief catalog. World files are read through `load`, with paths
/// relative to `name`.
///
/// ```text
/// world ws slow.world
/// belief B1 ws:a
/// belief B2 ws:a,b wh:c
/// ```
pub fn parse_catalog(text: &str, name: &str, load: Loader) -> Result<BeliefCatalog, IoError> {
    let mut cat = BeliefCatalog::new();
    for (ln, w, _) in lines(text) {
        match w[0] {
            "world" => {
                if w.len() != 3 {
                    return Err(IoError::at(ln, "expected `world <id> <file>`"));
                }
                let path = relative_to(name, w[2]);
                let world = parse_world(&load(&path)?).map_err(|e| e.in_file(&path))?;
                cat.add_world(w[1], Arc::new(world)).map_err(|e| IoError::at(ln, e))?;
            }
            "belief" => {
                if w.len() < 3 {
                    return Err(IoError::at(ln, "expected `belief <id> <world>:<states> ...`"));
                }
                let mut realities = Vec::new();
                for r in &w[2..] {
                    let (wid, states) = r
                        .split_once(':')
                        .ok_or_else(|| IoError::at(ln, format!("reality `{r}` must be world:state,...")))?;
                    let world = cat.world(wid).map_err(|e| IoError::at(ln, e))?.clone();
                    let names: Vec<&str> = states.split(',').filter(|s| !s.is_empty()).collect();
                    realities.push(Reality::from_names(wid, world, &names).map_err(|e| IoError::at(ln, e))?);
                }
                cat.add_belief(Belief::new(w[1], realities)).map_err(|e| IoError::at(ln, e))?;
            }
            other => return Err(IoError::at(ln, format!("unknown directive `{other}`"))),
        }
    }
    Ok(cat)
}

/// Writes a catalog referencing `<world id>.world` files; the world texts are
/// returned alongside.
pub fn write_catalog(cat: &BeliefCatalog) -> (String, Vec<(String, String)>) {
    let mut out = String::new();
    let mut files = Vec::new();
    for (id, w) in cat.worlds() {
        let file = format!("{id}.world");
        out.push_str(&format!("world {id} {file}\n"));
        files.push((file, write_world(w)));
    }
    for b in cat.beliefs() {
        let rs: Vec<String> = b
            .realities
            .iter()
            .map(|r| {
                let cur: Vec<&str> = r.current.iter().map(|&s| r.world.state_name(s)).collect();
                format!("{}:{}", r.world_id, cur.join(","))
            })
            .collect();
        out.push_str(&format!("belief {} {}\n", b.id, rs.join(" ")));
    }
    (out, files)
}

// ------------------------------------------------------------- formations

/// Parses a formation: one `observe` line and ordered `rule <regex> -> <belief>`.
pub fn parse_formation(text: &str) -> Result<RegularBeliefFormation, IoError> {
    let mut observe = None;
    let mut rules = Vec::new();
    for (ln, w, rest) in lines(text) {
        match w[0] {
            "observe" => observe = Some(w[1..].iter().map(|s| s.to_string()).collect()),
            "rule" => {
                let (re, belief) = rest
                    .rsplit_once("->")
                    .ok_or_else(|| IoError::at(ln, "expected `rule <regex> -> <belief>`"))?;
                let belief = belief.trim();
                if belief.is_empty() || belief.contains(char::is_whitespace) {
                    return Err(IoError::at(ln, "belief id must be a single word"));
                }
                let regex = parse_regex(re.trim()).map_err(|e| IoError::at(ln, e))?;
                rules.push(Rule { regex, belief: belief.to_string() });
            }
            other => return Err(IoError::at(ln, format!("unknown directive `{other}`"))),
        }
    }
    let observe = observe.ok_or_else(|| IoError::invalid("no `observe` line"))?;
    Ok(RegularBeliefFormation::new(observe, rules))
}

pub fn write_formation(f: &RegularBeliefFormation) -> String {
    let mut out = format!("observe {}\n", f.observe.join(" "));
    for r in &f.rules {
        out.push_str(&format!("rule {} -> {}\n", r.regex, r.belief));
    }
    out
}

// ------------------------------------------------------------- strategies

/// Parses a finite-memory strategy. `*` names the column for tokens outside
/// the alphabet.
///
/// ```text
/// alphabet B1 B2
/// actions f t
/// memory 1
/// init 0
/// row 0 B1 -> 0 t
/// row 0 B2 -> 0 f
/// row 0 * -> 0 f
/// ```
pub fn parse_strategy(text: &str) -> Result<StrategyMachine, IoError> {
    let mut alphabet: Option<Vec<String>> = None;
    let mut actions: Option<Vec<String>> = None;
    let mut memory: Option<usize> = None;
    let mut init = 0;
    let mut rows: Vec<(usize, usize, String, usize, String)> = Vec::new();
    for (ln, w, _) in lines(text) {
        let num = |s: &str| s.parse::<usize>().map_err(|_| IoError::at(ln, format!("expected a number, got `{s}`")));
        match w[0] {
            "alphabet" => alphabet = Some(w[1..].iter().map(|s| s.to_string()).collect()),
            "actions" => actions = Some(w[1..].iter().map(|s| s.to_string()).collect()),
            "memory" if w.len() == 2 => memory = Some(num(w[1])?),
            "init" if w.len() == 2 => init = num(w[1])?,
            "row" if w.len() == 6 && w[3] == "->" => {
                rows.push((ln, num(w[1])?, w[2].to_string(), num(w[4])?, w[5].to_string()));
            }
            _ => return Err(IoError::at(ln, "malformed strategy line")),
        }
    }
    let alphabet = alphabet.ok_or_else(|| IoError::invalid("no `alphabet` line"))?;
    let actions = actions.ok_or_else(|| IoError::invalid("no `actions` line"))?;
    let memory = memory.ok_or_else(|| IoError::invalid("no `memory` line"))?;
    let cols = alphabet.len() + 1;
    let mut update = vec![vec![None; cols]; memory];
    let mut output = vec![vec![0; cols]; memory];
    for (ln, m, tok, m2, act) in rows {
        if m >= memory || m2 >= memory {
            return Err(IoError::at(ln, "memory index out of range"));
        }
        let c = if tok == "*" {
            alphabet.len()
        } else {
            alphabet
                .iter()
                .position(|t| *t == tok)
                .ok_or_else(|| IoError::at(ln, format!("token `{tok}` not in alphabet")))?
        };
        let a = actions
            .iter()
            .position(|x| *x == act)
            .ok_or_else(|| IoError::at(ln, format!("unknown action `{act}`")))?;
        if update[m][c].is_some() {
            return Err(IoError::at(ln, "duplicate row"));
        }
        update[m][c] = Some(m2);
        output[m][c] = a;
    }
    let mut full = Vec::with_capacity(memory);
    for (m, row) in update.into_iter().enumerate() {
        let mut r = Vec::with_capacity(cols);
        for (c, x) in row.into_iter().enumerate() {
            let tok = alphabet.get(c).map(String::as_str).unwrap_or("*");
            r.push(x.ok_or_else(|| IoError::invalid(format!("no row for memory {m} and token {tok}")))?);
        }
        full.push(r);
    }
    let machine = StrategyMachine { alphabet, actions, init, update: full, output };
    machine.validate().map_err(IoError::invalid)?;
    Ok(machine)
}

pub fn write_strategy(m: &StrategyMachine) -> String {
    let mut out = format!(
        "alphabet {}\nactions {}\nmemory {}\ninit {}\n",
        m.alphabet.join(" "),
        m.actions.join(" "),
        m.memory(),
        m.init
    );
    for q in 0..m.memory() {
        for c in 0..=m.alphabet.len() {
            let tok = m.alphabet.get(c).map(String::as_str).unwrap_or("*");
            out.push_str(&format!("row {q} {tok} -> {} {}\n", m.update[q][c], m.actions[m.output[q][c]]));
        }
    }
    out
}

// ------------------------------------------------------------ env scripts

/// Initial state plus the environment's action at each step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvScript {
    pub start: String,
    pub env: Vec<String>,
}

pub fn parse_env_script(text: &str) -> Result<EnvScript, IoError> {
    let mut start = None;
    let mut env = Vec::new();
    for (ln, w, _) in lines(text) {
        match w[0] {
            "start" if w.len() == 2 => start = Some(w[1].to_string()),
            "env" => env.extend(w[1..].iter().map(|s| s.to_string())),
            _ => return Err(IoError::at(ln, "expected `start <state>` or `env <actions>`")),
        }
    }
    Ok(EnvScript { start: start.ok_or_else(|| IoError::invalid("no `start` line"))?, env })
}

pub fn write_env_script(s: &EnvScript) -> String {
    format!("start {}\nenv {}\n", s.start, s.env.join(" "))
}

// ---------------------------------------------------------------- bundles

/// File references of a bundle manifest, relative to the manifest.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Manifest {
    pub world: Option<String>,
    pub goals: Option<String>,
    pub observe: Option<Vec<String>>,
    pub knowledge: Option<String>,
    pub catalog: Option<String>,
    pub formation: Option<String>,
    pub strategy: Option<String>,
    pub scripts: Vec<(String, String)>,
}

pub fn parse_manifest(text: &str) -> Result<Manifest, IoError> {
    let mut m = Manifest::default();
    for (ln, w, _) in lines(text) {
        let one = |slot: &mut Option<String>| {
            if w.len() != 2 {
                return Err(IoError::at(ln, format!("expected `{} <file>`", w[0])));
            }
            if slot.replace(w[1].to_string()).is_some() {
                return Err(IoError::at(ln, format!("`{}` given twice", w[0])));
            }
            Ok(())
        };
        match w[0] {
            "world" => one(&mut m.world)?,
            "goals" => one(&mut m.goals)?,
            "knowledge" => one(&mut m.knowledge)?,
            "catalog" => one(&mut m.catalog)?,
            "formation" => one(&mut m.formation)?,
            "strategy" => one(&mut m.strategy)?,
            "observe" => m.observe = Some(w[1..].iter().map(|s| s.to_string()).collect()),
            "script" if w.len() == 3 => m.scripts.push((w[1].to_string(), w[2].to_string())),
            other => return Err(IoError::at(ln, format!("unknown manifest entry `{other}`"))),
        }
    }
    Ok(m)
}

pub fn write_manifest(m: &Manifest) -> String {
    let mut out = String::new();
    let mut put = |k: &str, v: &Option<String>| {
        if let Some(v) = v {
            out.push_str(&format!("{k} {v}\n"));
        }
    };
    put("world", &m.world);
    put("goals", &m.goals);
    put("knowledge", &m.knowledge);
    put("catalog", &m.catalog);
    put("formation", &m.formation);
    put("strategy", &m.strategy);
    if let Some(o) = &m.observe {
        out.push_str(&format!("observe {}\n", o.join(" ")));
    }
    for (n, f) in &m.scripts {
        out.push_str(&format!("script {n} {f}\n"));
    }
    out
}

/// A loaded bundle. Only the world and the goals are mandatory.
#[derive(Clone, Debug)]
pub struct Bundle {
    pub world: World,
    pub goals: GoalList,
    pub observe: Option<Vec<String>>,
    pub knowledge: KnowledgeLabeling,
    pub catalog: Option<BeliefCatalog>,
    pub formation: Option<RegularBeliefFormation>,
    pub strategy: Option<StrategyMachine>,
    pub scripts: BTreeMap<String, EnvScript>,
}

impl Bundle {
    /// Loads the bundle whose manifest is at `path`, reading every file via `load`.
    pub fn load(path: &str, load: Loader) -> Result<Bundle, IoError> {
        let m = parse_manifest(&load(path)?).map_err(|e| e.in_file(path))?;
        let read = |rel: &str| -> Result<(String, String), IoError> {
            let p = relative_to(path, rel);
            Ok((load(&p)?, p))
        };
        let missing = |what: &str| IoError::Invalid { file: path.to_string(), msg: format!("missing `{what}` entry") };
        let (text, p) = read(m.world.as_deref().ok_or_else(|| missing("world"))?)?;
        let world = parse_world(&text).map_err(|e| e.in_file(&p))?;
        let (text, p) = read(m.goals.as_deref().ok_or_else(|| missing("goals"))?)?;
        let goals = parse_goals(&text).map_err(|e| e.in_file(&p))?;
        let knowledge = match &m.knowledge {
            Some(f) => {
                let (text, p) = read(f)?;
                parse_knowledge(&text, &world).map_err(|e| e.in_file(&p))?
            }
            None => KnowledgeLabeling::empty(world.num_states()),
        };
        let catalog = match &m.catalog {
            Some(f) => {
                let (text, p) = read(f)?;
                Some(parse_catalog(&text, &p, load).map_err(|e| e.in_file(&p))?)
            }
            None => None,
        };
        let formation = match &m.formation {
            Some(f) => {
                let (text, p) = read(f)?;
                Some(parse_formation(&text).map_err(|e| e.in_file(&p))?)
            }
            None => None,
        };
        let strategy = match &m.strategy {
            Some(f) => {
                let (text, p) = read(f)?;
                Some(parse_strategy(&text).map_err(|e| e.in_file(&p))?)
            }
            None => None,
        };
        let mut scripts = BTreeMap::new();
        for (name, f) in &m.scripts {
            let (text, p) = read(f)?;
            scripts.insert(name.clone(), parse_env_script(&text).map_err(|e| e.in_file(&p))?);
        }
        Ok(Bundle { world, goals, observe: m.observe, knowledge, catalog, formation, strategy, scripts })
    }

    /// Loads a bundle from the file system.
    pub fn load_path(path: &Path) -> Result<Bundle, IoError> {
        let reader = |p: &str| {
            std::fs::read_to_string(p).map_err(|e| IoError::Read { path: p.to_string(), msg: e.to_string() })
        };
        Bundle::load(&path.to_string_lossy(), &reader)
    }

    /// Observables for analyses: the manifest's list, else the formation's.
    pub fn observables(&self) -> Option<Vec<String>> {
        self.observe.clone().or_else(|| self.formation.as_ref().map(|f| f.observe.clone()))
    }

    /// Writes the bundle as text files into `dir` under fixed names.
    pub fn write_dir(&self, dir: &Path) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let mut m = Manifest {
            world: Some("world.txt".into()),
            goals: Some("goals.txt".into()),
            knowledge: Some("knowledge.txt".into()),
            observe: self.observe.clone(),
            ..Manifest::default()
        };
        std::fs::write(dir.join("world.txt"), write_world(&self.world))?;
        std::fs::write(dir.join("goals.txt"), write_goals(&self.goals))?;
        std::fs::write(dir.join("knowledge.txt"), write_knowledge(&self.knowledge, &self.world))?;
        if let Some(c) = &self.catalog {
            let (text, files) = write_catalog(c);
            std::fs::write(dir.join("catalog.txt"), text)?;
            for (name, body) in files {
                std::fs::write(dir.join(name), body)?;
            }
            m.catalog = Some("catalog.txt".into());
        }
        if let Some(f) = &self.formation {
            std::fs::write(dir.join("formation.txt"), write_formation(f))?;
            m.formation = Some("formation.txt".into());
        }
        if let Some(s) = &self.strategy {
            std::fs::write(dir.join("strategy.txt"), write_strategy(s))?;
            m.strategy = Some("strategy.txt".into());
        }
        for (name, s) in &self.scripts {
            let file = format!("{name}.env");
            std::fs::write(dir.join(&file), write_env_script(s))?;
            m.scripts.push((name.clone(), file));
        }
        let manifest = dir.join("bundle.txt");
        std::fs::write(&manifest, write_manifest(&m))?;
        Ok(manifest)
    }

    /// JSON mirror of the bundle.
    pub fn to_json(&self) -> Value {
        let knowledge: Vec<Value> = (0..self.world.num_states())
            .map(|s| {
                json!({
                    "state": self.world.state_name(s),
                    "formulas": self.knowledge.at(s).formulas().iter().map(|f| f.to_string()).collect::<Vec<_>>(),
                })
            })
            .collect();
        let catalog = self.catalog.as_ref().map(|c| {
            json!({
                "worlds": c.worlds().map(|(id, w)| (id.clone(), serde_json::to_value(&**w).expect("serializable"))).collect::<BTreeMap<_, _>>(),
                "beliefs": c.beliefs().iter().map(|b| json!({
                    "id": b.id,
                    "realities": b.realities.iter().map(|r| json!({
                        "world": r.world_id,
                        "current": r.current.iter().map(|&s| r.world.state_name(s)).collect::<Vec<_>>(),
                    })).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
            })
        });
        json!({
            "world": serde_json::to_value(&self.world).expect("serializable"),
            "goals": self.goals.goals().iter().map(|g| g.to_string()).collect::<Vec<_>>(),
            "observe": self.observe,
            "knowledge": knowledge,
            "catalog": catalog,
            "formation": self.formation.as_ref().map(|f| json!({
                "observe": f.observe,
                "rules": f.rules.iter().map(|r| json!({"regex": r.regex.to_string(), "belief": r.belief})).collect::<Vec<_>>(),
            })),
            "strategy": self.strategy.as_ref().map(|m| json!({
                "alphabet": m.alphabet, "actions": m.actions, "init": m.init, "update": m.update, "output": m.output,
            })),
            "scripts": self.scripts.iter().map(|(n, s)| (n.clone(), json!({"start": s.start, "env": s.env}))).collect::<BTreeMap<_, _>>(),
        })
    }
}

/// Knowledge base from formula texts, for tests and fixtures.
pub fn knowledge_base(texts: &[&str]) -> Result<KnowledgeBase, IoError> {
    texts
        .iter()
        .map(|t| parse_bltl(t).map_err(IoError::invalid))
        .collect::<Result<Vec<_>, _>>()
        .map(KnowledgeBase::new)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = "\
# two states
prop p q
family x 1 2
act ego a b
act env e u
state s0 p x=1
state s1 q x=2
init s0
sink bad
edge s0 s1 a/*
edge s1 s1 a/e b/e a/u b/u
totalize
";

    #[test]
    fn world_round_trip() {
        let w = parse_world(TINY).unwrap();
        assert!(w.validate().is_empty());
        assert_eq!(w.successors(0, 1, 0), &[w.sink()]);
        assert_eq!(w.successors(0, 0, 1), &[1]);
        let again = parse_world(&write_world(&w)).unwrap();
        assert_eq!(w, again);
        assert_eq!(write_world(&w), write_world(&again));
    }

    #[test]
    fn world_errors_carry_lines() {
        let e = parse_world("prop p\nstate s0 r\nsink bad\n").unwrap_err();
        assert!(matches!(e, IoError::Syntax { line: 2, .. }), "{e}");
        assert!(parse_world("prop p\n").is_err());
        let e = parse_world("act ego a\nact env e\nstate s\nsink k\nedge s s a\n").unwrap_err();
        assert!(matches!(e, IoError::Syntax { line: 5, .. }), "{e}");
    }

    #[test]
    fn goals_round_trip() {
        let g = parse_goals("goal 2 F ye=3\ngoal 1 G (!(xe=2 & ye=2) | !(xo=2))\n").unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.goal(4).to_string(), parse_ltl("F ye=3").unwrap().to_string());
        assert_eq!(parse_goals(&write_goals(&g)).unwrap(), g);
        assert!(parse_goals("goal 1 F p\ngoal 1 G q\n").is_err());
    }

    #[test]
    fn knowledge_round_trip() {
        let w = parse_world(TINY).unwrap();
        let k = parse_knowledge("let a = K G !q\nlet b = Kc p\nat * a\nat s0 b\n", &w).unwrap();
        assert_eq!(k.at(0).len(), 2);
        assert_eq!(k.at(1).len(), 1);
        assert_eq!(parse_knowledge(&write_knowledge(&k, &w), &w).unwrap(), k);
        let u = parse_knowledge("let a = K G !q\nat * a\n", &w).unwrap();
        assert!(write_knowledge(&u, &w).contains("at * k1"));
        assert!(parse_knowledge("at * nope\n", &w).is_err());
    }

    #[test]
    fn catalog_round_trip() {
        let load = |p: &str| if p == "w.world" { Ok(TINY.to_string()) } else { Err(IoError::invalid(p)) };
        let cat = parse_catalog("world w w.world\nbelief B1 w:s0\nbelief B2 w:s0,s1 w:s1\n", "cat.txt", &load).unwrap();
        assert_eq!(cat.ids(), vec!["B1", "B2"]);
        assert_eq!(cat.get("B2").unwrap().realities[0].current, vec![0, 1]);
        let (text, files) = write_catalog(&cat);
        let load2 = |p: &str| Ok(files.iter().find(|(n, _)| n == p).expect("written").1.clone());
        assert_eq!(parse_catalog(&text, "x", &load2).unwrap(), cat);
        assert!(parse_catalog("belief B w:s0\n", "c", &load).is_err());
    }

    #[test]
    fn formation_round_trip() {
        let f = parse_formation("observe x undef\nrule x=1 -> B1\nrule . (x=2 | x=1)* -> B2\nrule .* -> B1\n").unwrap();
        assert_eq!(f.rules.len(), 3);
        assert_eq!(f.form_belief(&["x=1", "x=2"]).unwrap(), "B2");
        assert_eq!(parse_formation(&write_formation(&f)).unwrap(), f);
        assert!(parse_formation("rule x -> B\n").is_err());
    }

    #[test]
    fn strategy_round_trip() {
        let s = "alphabet B1 B2\nactions f t\nmemory 2\ninit 0\n\
                 row 0 B1 -> 1 f\nrow 0 B2 -> 0 t\nrow 0 * -> 0 f\n\
                 row 1 B1 -> 1 t\nrow 1 B2 -> 1 t\nrow 1 * -> 1 t\n";
        let m = parse_strategy(s).unwrap();
        assert_eq!(m.run(&["B1", "B1", "x"]), vec!["f", "t", "t"]);
        assert_eq!(parse_strategy(&write_strategy(&m)).unwrap(), m);
        assert!(parse_strategy("alphabet A\nactions f\nmemory 1\nrow 0 A -> 0 f\n").is_err());
    }

    #[test]
    fn scripts_and_manifests() {
        let e = parse_env_script("start s1\nenv f f\nenv F\n").unwrap();
        assert_eq!(e.env, vec!["f", "f", "F"]);
        assert_eq!(parse_env_script(&write_env_script(&e)).unwrap(), e);
        let m = parse_manifest("world w.txt\ngoals g.txt\nobserve x undef\nscript slow s.env\n").unwrap();
        assert_eq!(parse_manifest(&write_manifest(&m)).unwrap(), m);
        assert!(parse_manifest("world a\nworld b\n").is_err());
    }

    #[test]
    fn relative_paths() {
        assert_eq!(relative_to("dir/bundle.txt", "w.world"), "dir/w.world");
        assert_eq!(relative_to("bundle.txt", "w.world"), "w.world");
        assert_eq!(relative_to("dir/b.txt", "/abs/w"), "/abs/w");
    }
}
