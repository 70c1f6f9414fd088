//! Regular belief formation: ordered rules mapping observation histories,
//! written as regular expressions over observation tokens, to belief ids.

use crate::belief::{BeliefCatalog, KnowledgeLabeling, SatCache};
use crate::ltl::Bltl;
use crate::propset::PropSet;
use crate::world::{StateId, World, WorldError};
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormationError {
    #[error("regex syntax error at word {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("no rule matches history `{0}`")]
    NoRuleMatches(String),
    #[error("rule {rule} refers to unknown belief `{belief}`")]
    UnknownBelief { rule: usize, belief: String },
    #[error(transparent)]
    World(#[from] WorldError),
}

/// Regular expressions over observation tokens.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Regex {
    Empty,
    Epsilon,
    Token(String),
    Any,
    Concat(Vec<Regex>),
    Alt(Vec<Regex>),
    Star(Box<Regex>),
}

impl Regex {
    pub fn concat(parts: Vec<Regex>) -> Regex {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Regex::Empty => return Regex::Empty,
                Regex::Epsilon => {}
                Regex::Concat(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Regex::Epsilon,
            1 => out.pop().expect("one element"),
            _ => Regex::Concat(out),
        }
    }

    pub fn alt(parts: Vec<Regex>) -> Regex {
        let mut out: Vec<Regex> = Vec::new();
        for p in parts {
            let items = match p {
                Regex::Empty => continue,
                Regex::Alt(inner) => inner,
                other => vec![other],
            };
            for i in items {
                if !out.contains(&i) {
                    out.push(i);
                }
            }
        }
        match out.len() {
            0 => Regex::Empty,
            1 => out.pop().expect("one element"),
            _ => Regex::Alt(out),
        }
    }

    pub fn star(r: Regex) -> Regex {
        match r {
            Regex::Empty | Regex::Epsilon => Regex::Epsilon,
            s @ Regex::Star(_) => s,
            other => Regex::Star(Box::new(other)),
        }
    }

    fn is_atomic(&self) -> bool {
        matches!(self, Regex::Token(_) | Regex::Any | Regex::Empty | Regex::Epsilon | Regex::Alt(_))
    }
}

impl fmt::Display for Regex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regex::Empty => write!(f, "!"),
            Regex::Epsilon => write!(f, "()"),
            Regex::Token(t) => write!(f, "{t}"),
            Regex::Any => write!(f, "."),
            Regex::Concat(items) => {
                let parts: Vec<String> = items.iter().map(|i| i.to_string()).collect();
                write!(f, "{}", parts.join(" "))
            }
            Regex::Alt(items) => {
                let parts: Vec<String> = items.iter().map(|i| i.to_string()).collect();
                write!(f, "({})", parts.join(" | "))
            }
            Regex::Star(r) => {
                if r.is_atomic() {
                    write!(f, "{r}*")
                } else {
                    write!(f, "({r})*")
                }
            }
        }
    }
}

/// Canonical form of an observation token: atom names sorted and `.`-joined.
pub fn canonical_token(word: &str) -> String {
    if word == "_" {
        return word.to_string();
    }
    let mut parts: Vec<&str> = word.split('.').collect();
    parts.sort_unstable();
    parts.join(".")
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum RTok {
    Word(String),
    Dot,
    Star,
    Plus,
    Quest,
    Bar,
    LParen,
    RParen,
    Bang,
}

fn lex_regex(text: &str) -> Vec<RTok> {
    let mut out = Vec::new();
    let mut word = String::new();
    let flush = |word: &mut String, out: &mut Vec<RTok>| {
        if !word.is_empty() {
            if word == "." {
                out.push(RTok::Dot);
            } else {
                out.push(RTok::Word(canonical_token(word)));
            }
            word.clear();
        }
    };
    for c in text.chars() {
        match c {
            c if c.is_whitespace() => flush(&mut word, &mut out),
            '*' | '+' | '?' | '|' | '(' | ')' | '!' => {
                flush(&mut word, &mut out);
                out.push(match c {
                    '*' => RTok::Star,
                    '+' => RTok::Plus,
                    '?' => RTok::Quest,
                    '|' => RTok::Bar,
                    '(' => RTok::LParen,
                    ')' => RTok::RParen,
                    _ => RTok::Bang,
                });
            }
            c => word.push(c),
        }
    }
    flush(&mut word, &mut out);
    out
}

struct RegexParser {
    toks: Vec<RTok>,
    i: usize,
}

impl RegexParser {
    fn err<T>(&self, msg: &str) -> Result<T, FormationError> {
        Err(FormationError::Syntax { pos: self.i + 1, msg: msg.to_string() })
    }

    fn peek(&self) -> Option<&RTok> {
        self.toks.get(self.i)
    }

    fn alt(&mut self) -> Result<Regex, FormationError> {
        let mut parts = vec![self.concat()?];
        while self.peek() == Some(&RTok::Bar) {
            self.i += 1;
            parts.push(self.concat()?);
        }
        Ok(if parts.len() == 1 { parts.pop().expect("one") } else { Regex::Alt(parts) })
    }

    fn concat(&mut self) -> Result<Regex, FormationError> {
        let mut parts = Vec::new();
        while matches!(self.peek(), Some(RTok::Word(_) | RTok::Dot | RTok::LParen | RTok::Bang)) {
            parts.push(self.postfix()?);
        }
        Ok(match parts.len() {
            0 => Regex::Epsilon,
            1 => parts.pop().expect("one"),
            _ => Regex::Concat(parts),
        })
    }

    fn postfix(&mut self) -> Result<Regex, FormationError> {
        let mut r = self.atom()?;
        loop {
            match self.peek() {
                Some(RTok::Star) => r = Regex::Star(Box::new(r)),
                Some(RTok::Plus) => r = Regex::Concat(vec![r.clone(), Regex::Star(Box::new(r))]),
                Some(RTok::Quest) => r = Regex::Alt(vec![Regex::Epsilon, r]),
                _ => return Ok(r),
            }
            self.i += 1;
        }
    }

    fn atom(&mut self) -> Result<Regex, FormationError> {
        match self.peek().cloned() {
            Some(RTok::Word(w)) => {
                self.i += 1;
                Ok(Regex::Token(w))
            }
            Some(RTok::Dot) => {
                self.i += 1;
                Ok(Regex::Any)
            }
            Some(RTok::Bang) => {
                self.i += 1;
                Ok(Regex::Empty)
            }
            Some(RTok::LParen) => {
                self.i += 1;
                let r = self.alt()?;
                if self.peek() != Some(&RTok::RParen) {
                    return self.err("expected `)`");
                }
                self.i += 1;
                Ok(r)
            }
            _ => self.err("expected a token, `.` or `(`"),
        }
    }
}

pub fn parse_regex(text: &str) -> Result<Regex, FormationError> {
    let mut p = RegexParser { toks: lex_regex(text), i: 0 };
    if matches!(p.peek(), Some(RTok::Star | RTok::Plus | RTok::Quest)) {
        return p.err("operator without operand");
    }
    let r = p.alt()?;
    if p.i != p.toks.len() {
        return p.err("unexpected input");
    }
    Ok(r)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub regex: Regex,
    pub belief: String,
}

/// Observation set plus ordered rules; the first matching rule decides.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularBeliefFormation {
    pub observe: Vec<String>,
    pub rules: Vec<Rule>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Label {
    Tok(usize),
    Any,
}

#[derive(Default)]
struct Nfa {
    eps: Vec<Vec<usize>>,
    edges: Vec<Vec<(Label, usize)>>,
}

impl Nfa {
    fn add(&mut self) -> usize {
        self.eps.push(Vec::new());
        self.edges.push(Vec::new());
        self.eps.len() - 1
    }

    /// Thompson construction; returns (start, end).
    fn build(&mut self, r: &Regex, alphabet: &HashMap<String, usize>) -> (usize, usize) {
        let s = self.add();
        let e = self.add();
        match r {
            Regex::Empty => {}
            Regex::Epsilon => self.eps[s].push(e),
            Regex::Token(t) => self.edges[s].push((Label::Tok(alphabet[t]), e)),
            Regex::Any => self.edges[s].push((Label::Any, e)),
            Regex::Concat(items) => {
                let mut cur = s;
                for it in items {
                    let (a, b) = self.build(it, alphabet);
                    self.eps[cur].push(a);
                    cur = b;
                }
                self.eps[cur].push(e);
            }
            Regex::Alt(items) => {
                for it in items {
                    let (a, b) = self.build(it, alphabet);
                    self.eps[s].push(a);
                    self.eps[b].push(e);
                }
            }
            Regex::Star(inner) => {
                let (a, b) = self.build(inner, alphabet);
                self.eps[s].push(a);
                self.eps[s].push(e);
                self.eps[b].push(a);
                self.eps[b].push(e);
            }
        }
        (s, e)
    }

    fn closure(&self, set: &mut BTreeSet<usize>) {
        let mut stack: Vec<usize> = set.iter().copied().collect();
        while let Some(q) = stack.pop() {
            for &t in &self.eps[q] {
                if set.insert(t) {
                    stack.push(t);
                }
            }
        }
    }
}

fn collect_tokens(r: &Regex, out: &mut BTreeSet<String>) {
    match r {
        Regex::Token(t) => {
            out.insert(t.clone());
        }
        Regex::Concat(items) | Regex::Alt(items) => items.iter().for_each(|i| collect_tokens(i, out)),
        Regex::Star(i) => collect_tokens(i, out),
        _ => {}
    }
}

/// Deterministic automaton recognising, for every history, the first matching rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormationDfa {
    /// Tokens mentioned by the rules; the last class is "any other token".
    pub alphabet: Vec<String>,
    index: HashMap<String, usize>,
    /// `trans[q][class]`.
    pub trans: Vec<Vec<usize>>,
    /// Rule index accepted in `q`, if any.
    pub rule: Vec<Option<usize>>,
    /// Every pair of rules that accept together in a reachable state.
    pub overlaps: Vec<(usize, usize)>,
    /// States from which no rule can ever match again.
    pub dead: Vec<bool>,
    pub init: usize,
}

impl FormationDfa {
    pub fn num_states(&self) -> usize {
        self.trans.len()
    }

    pub fn class(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(self.alphabet.len())
    }

    pub fn step(&self, q: usize, token: &str) -> usize {
        self.trans[q][self.class(token)]
    }

    pub fn run<S: AsRef<str>>(&self, tokens: &[S]) -> usize {
        tokens.iter().fold(self.init, |q, t| self.step(q, t.as_ref()))
    }
}

impl RegularBeliefFormation {
    pub fn new(observe: Vec<String>, rules: Vec<Rule>) -> Self {
        RegularBeliefFormation { observe, rules }
    }

    /// Rules given as `(regex text, belief id)` pairs.
    pub fn from_texts<S: AsRef<str>>(observe: &[S], rules: &[(&str, &str)]) -> Result<Self, FormationError> {
        let rules = rules
            .iter()
            .map(|(r, b)| Ok(Rule { regex: parse_regex(r)?, belief: b.to_string() }))
            .collect::<Result<Vec<_>, FormationError>>()?;
        Ok(RegularBeliefFormation { observe: observe.iter().map(|s| s.as_ref().to_string()).collect(), rules })
    }

    /// Observation mask of this formation in the given world.
    pub fn obs_mask(&self, w: &World) -> Result<PropSet, FormationError> {
        Ok(w.resolve_observables(&self.observe)?)
    }

    pub fn belief_ids(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rules {
            if !out.contains(&r.belief) {
                out.push(r.belief.clone());
            }
        }
        out
    }

    pub fn check_references(&self, catalog: &BeliefCatalog) -> Result<(), FormationError> {
        for (i, r) in self.rules.iter().enumerate() {
            if catalog.get(&r.belief).is_none() {
                return Err(FormationError::UnknownBelief { rule: i + 1, belief: r.belief.clone() });
            }
        }
        Ok(())
    }

    /// Subset construction over the union of all rule automata.
    pub fn compile(&self) -> FormationDfa {
        let mut toks = BTreeSet::new();
        for r in &self.rules {
            collect_tokens(&r.regex, &mut toks);
        }
        let alphabet: Vec<String> = toks.into_iter().collect();
        let index: HashMap<String, usize> = alphabet.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        let mut nfa = Nfa::default();
        let start = nfa.add();
        let mut accept: HashMap<usize, usize> = HashMap::new();
        for (i, r) in self.rules.iter().enumerate() {
            let (a, b) = nfa.build(&r.regex, &index);
            nfa.eps[start].push(a);
            accept.insert(b, i);
        }
        let classes = alphabet.len() + 1;
        let mut ids: HashMap<BTreeSet<usize>, usize> = HashMap::new();
        let mut sets: Vec<BTreeSet<usize>> = Vec::new();
        let mut trans: Vec<Vec<usize>> = Vec::new();
        let mut queue = VecDeque::new();
        let mut init_set = BTreeSet::from([start]);
        nfa.closure(&mut init_set);
        ids.insert(init_set.clone(), 0);
        sets.push(init_set);
        queue.push_back(0);
        while let Some(q) = queue.pop_front() {
            let mut row = Vec::with_capacity(classes);
            for c in 0..classes {
                let mut next = BTreeSet::new();
                for &s in &sets[q] {
                    for &(l, t) in &nfa.edges[s] {
                        if l == Label::Any || l == Label::Tok(c) {
                            next.insert(t);
                        }
                    }
                }
                nfa.closure(&mut next);
                let id = match ids.get(&next) {
                    Some(&id) => id,
                    None => {
                        let id = sets.len();
                        ids.insert(next.clone(), id);
                        sets.push(next);
                        queue.push_back(id);
                        id
                    }
                };
                row.push(id);
            }
            if trans.len() <= q {
                trans.resize(q + 1, Vec::new());
            }
            trans[q] = row;
        }
        let mut overlaps = BTreeSet::new();
        let rule: Vec<Option<usize>> = sets
            .iter()
            .map(|set| {
                let acc: Vec<usize> = {
                    let mut v: Vec<usize> = set.iter().filter_map(|s| accept.get(s).copied()).collect();
                    v.sort_unstable();
                    v
                };
                for i in 0..acc.len() {
                    for j in i + 1..acc.len() {
                        overlaps.insert((acc[i], acc[j]));
                    }
                }
                acc.first().copied()
            })
            .collect();
        // dead: cannot reach an accepting state
        let n = sets.len();
        let mut live: Vec<bool> = rule.iter().map(|r| r.is_some()).collect();
        let mut changed = true;
        while changed {
            changed = false;
            for q in 0..n {
                if !live[q] && trans[q].iter().any(|&t| live[t]) {
                    live[q] = true;
                    changed = true;
                }
            }
        }
        FormationDfa {
            alphabet,
            index,
            trans,
            rule,
            overlaps: overlaps.into_iter().collect(),
            dead: live.into_iter().map(|l| !l).collect(),
            init: 0,
        }
    }

    /// Belief formed after the (nonempty) token history.
    pub fn form_belief<S: AsRef<str>>(&self, history: &[S]) -> Result<String, FormationError> {
        let dfa = self.compile();
        form_with(&dfa, self, history)
    }

    /// One belief per nonempty prefix of the history.
    pub fn belief_history<S: AsRef<str>>(&self, history: &[S]) -> Result<Vec<String>, FormationError> {
        let dfa = self.compile();
        let mut q = dfa.init;
        let mut out = Vec::with_capacity(history.len());
        for (i, t) in history.iter().enumerate() {
            q = dfa.step(q, t.as_ref());
            match dfa.rule[q] {
                Some(r) => out.push(self.rules[r].belief.clone()),
                None => return Err(no_match(&history[..=i])),
            }
        }
        Ok(out)
    }

    /// Pairs of rules (1-based) whose languages intersect.
    pub fn overlap_lint(&self) -> Vec<(usize, usize)> {
        self.compile().overlaps.iter().map(|&(a, b)| (a + 1, b + 1)).collect()
    }
}

fn no_match<S: AsRef<str>>(h: &[S]) -> FormationError {
    FormationError::NoRuleMatches(h.iter().map(|t| t.as_ref()).collect::<Vec<_>>().join(" "))
}

fn form_with<S: AsRef<str>>(dfa: &FormationDfa, f: &RegularBeliefFormation, history: &[S]) -> Result<String, FormationError> {
    let q = dfa.run(history);
    match dfa.rule[q] {
        Some(r) => Ok(f.rules[r].belief.clone()),
        None => Err(no_match(history)),
    }
}

/// Product of a world with a formation automaton over all actions.
/// Node `(s, q)` means the history ending in `s` drives the automaton to `q`.
pub struct FormationProduct {
    pub nodes: Vec<(StateId, usize)>,
    pub index: HashMap<(StateId, usize), usize>,
    pub parent: Vec<Option<usize>>,
    pub init: Vec<usize>,
}

impl FormationProduct {
    pub fn build(w: &World, dfa: &FormationDfa, obs: PropSet) -> FormationProduct {
        let tok: Vec<usize> = (0..w.num_states()).map(|s| dfa.class(&w.obs_token(s, obs))).collect();
        let mut p = FormationProduct { nodes: Vec::new(), index: HashMap::new(), parent: Vec::new(), init: Vec::new() };
        let mut queue = VecDeque::new();
        for &s in w.init() {
            let key = (s, dfa.trans[dfa.init][tok[s]]);
            if !p.index.contains_key(&key) {
                p.index.insert(key, p.nodes.len());
                p.init.push(p.nodes.len());
                p.nodes.push(key);
                p.parent.push(None);
                queue.push_back(p.nodes.len() - 1);
            }
        }
        while let Some(i) = queue.pop_front() {
            let (s, q) = p.nodes[i];
            for &t in w.post(s) {
                let key = (t, dfa.trans[q][tok[t]]);
                if !p.index.contains_key(&key) {
                    p.index.insert(key, p.nodes.len());
                    p.nodes.push(key);
                    p.parent.push(Some(i));
                    queue.push_back(p.nodes.len() - 1);
                }
            }
        }
        p
    }

    /// World path from an initial state to node `i`.
    pub fn path_to(&self, mut i: usize) -> Vec<StateId> {
        let mut out = vec![self.nodes[i].0];
        while let Some(p) = self.parent[i] {
            out.push(self.nodes[p].0);
            i = p;
        }
        out.reverse();
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConsistencyWitness {
    NoRuleMatches { path: Vec<String> },
    UnknownBelief { path: Vec<String>, belief: String },
    Violation { path: Vec<String>, belief: String, formula: Bltl },
}

impl fmt::Display for ConsistencyWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConsistencyWitness::NoRuleMatches { path } => write!(f, "no rule matches after path {}", path.join(" ")),
            ConsistencyWitness::UnknownBelief { path, belief } => {
                write!(f, "unknown belief {belief} formed after path {}", path.join(" "))
            }
            ConsistencyWitness::Violation { path, belief, formula } => {
                write!(f, "belief {belief} formed after path {} violates {formula}", path.join(" "))
            }
        }
    }
}

/// Checks that every belief formed along an initial path of `w` satisfies the
/// knowledge at the path's last state. Returns the shortest witness on failure.
pub fn check_knowledge_consistency(
    f: &RegularBeliefFormation,
    w: &World,
    k: &KnowledgeLabeling,
    catalog: &BeliefCatalog,
    cache: &SatCache,
) -> Result<(), ConsistencyWitness> {
    let obs = w.resolve_observables_lenient(&f.observe);
    let dfa = f.compile();
    let prod = FormationProduct::build(w, &dfa, obs);
    let names = |p: Vec<StateId>| p.into_iter().map(|s| w.state_name(s).to_string()).collect::<Vec<_>>();
    let mut verdicts: BTreeMap<(usize, StateId), bool> = BTreeMap::new();
    for (i, &(s, q)) in prod.nodes.iter().enumerate() {
        let Some(r) = dfa.rule[q] else {
            return Err(ConsistencyWitness::NoRuleMatches { path: names(prod.path_to(i)) });
        };
        let belief_id = &f.rules[r].belief;
        let Some(b) = catalog.get(belief_id) else {
            return Err(ConsistencyWitness::UnknownBelief { path: names(prod.path_to(i)), belief: belief_id.clone() });
        };
        if verdicts.contains_key(&(r, s)) {
            continue;
        }
        let bad = k.at(s).first_violation(b, cache).cloned();
        verdicts.insert((r, s), bad.is_none());
        if let Some(formula) = bad {
            return Err(ConsistencyWitness::Violation { path: names(prod.path_to(i)), belief: belief_id.clone(), formula });
        }
    }
    Ok(())
}

/// Whether every reachable observable history of `w` matches some rule.
pub fn check_totality(f: &RegularBeliefFormation, w: &World) -> Result<(), Vec<String>> {
    let obs = w.resolve_observables_lenient(&f.observe);
    let dfa = f.compile();
    let prod = FormationProduct::build(w, &dfa, obs);
    for (i, &(_, q)) in prod.nodes.iter().enumerate() {
        if dfa.rule[q].is_none() {
            return Err(prod.path_to(i).into_iter().map(|s| w.state_name(s).to_string()).collect());
        }
    }
    Ok(())
}

/// Converts a DFA over explicit tokens into one regex per output value via
/// state elimination. `trans[q]` lists `(token, target)`; `output[q]` is the
/// value emitted after a nonempty history ending in `q`. The initial state
/// must have no incoming transitions.
pub fn dfa_to_regexes(
    init: usize,
    trans: &[Vec<(String, usize)>],
    output: &[Option<String>],
) -> Vec<(String, Regex)> {
    let n = trans.len();
    debug_assert!(trans.iter().all(|row| row.iter().all(|(_, t)| *t != init)));
    let mut values: Vec<String> = Vec::new();
    for v in output.iter().flatten() {
        if !values.contains(v) {
            values.push(v.clone());
        }
    }
    let mut out = Vec::new();
    for v in values {
        // GNFA: node n = start, n+1 = final
        let start = n;
        let fin = n + 1;
        let mut g: BTreeMap<(usize, usize), Regex> = BTreeMap::new();
        let add = |g: &mut BTreeMap<(usize, usize), Regex>, a: usize, b: usize, r: Regex| {
            let cur = g.remove(&(a, b)).unwrap_or(Regex::Empty);
            g.insert((a, b), Regex::alt(vec![cur, r]));
        };
        add(&mut g, start, init, Regex::Epsilon);
        for (q, row) in trans.iter().enumerate() {
            for (tok, t) in row {
                add(&mut g, q, *t, Regex::Token(tok.clone()));
            }
            if output[q].as_ref() == Some(&v) && q != init {
                add(&mut g, q, fin, Regex::Epsilon);
            }
        }
        for k in 0..n {
            let self_loop = g.remove(&(k, k)).map(Regex::star).unwrap_or(Regex::Epsilon);
            let ins: Vec<(usize, Regex)> = g.iter().filter(|((_, b), _)| *b == k).map(|((a, _), r)| (*a, r.clone())).collect();
            let outs: Vec<(usize, Regex)> = g.iter().filter(|((a, _), _)| *a == k).map(|((_, b), r)| (*b, r.clone())).collect();
            g.retain(|(a, b), _| *a != k && *b != k);
            for (a, ra) in &ins {
                for (b, rb) in &outs {
                    add(&mut g, *a, *b, Regex::concat(vec![ra.clone(), self_loop.clone(), rb.clone()]));
                }
            }
        }
        let r = g.remove(&(start, fin)).unwrap_or(Regex::Empty);
        if r != Regex::Empty {
            out.push((v, r));
        }
    }
    out
}
