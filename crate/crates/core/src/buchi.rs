//! LTL to Büchi translation (on-the-fly tableau), lasso search, and universal
//! model checking of worlds.

use crate::ltl::{Ltl, Nnf};
use crate::propset::PropSet;
use crate::world::{StateId, World};
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::hash::Hash;

/// A state-labelled nondeterministic Büchi automaton. A run may sit in state
/// `q` on letter `l` only if `pos ⊆ l` and `neg ∩ l = ∅`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nba {
    pub states: Vec<NbaState>,
    pub init: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NbaState {
    pub pos: PropSet,
    pub neg: PropSet,
    pub succ: Vec<usize>,
    pub accepting: bool,
}

impl NbaState {
    pub fn admits(&self, letter: PropSet) -> bool {
        self.pos.is_subset(letter) && self.neg.is_disjoint(letter)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Node {
    True,
    False,
    Lit(usize, bool),
    And(usize, usize),
    Or(usize, usize),
    Next(usize),
    Until(usize, usize),
    Release(usize, usize),
}

#[derive(Default)]
struct Arena {
    nodes: Vec<Node>,
    index: HashMap<Node, usize>,
}

impl Arena {
    fn intern(&mut self, f: &Nnf) -> usize {
        let node = match f {
            Nnf::True => Node::True,
            Nnf::False => Node::False,
            Nnf::Lit(p, b) => Node::Lit(*p, *b),
            Nnf::And(a, b) => Node::And(self.intern(a), self.intern(b)),
            Nnf::Or(a, b) => Node::Or(self.intern(a), self.intern(b)),
            Nnf::Next(a) => Node::Next(self.intern(a)),
            Nnf::Until(a, b) => Node::Until(self.intern(a), self.intern(b)),
            Nnf::Release(a, b) => Node::Release(self.intern(a), self.intern(b)),
        };
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(node.clone());
        self.index.insert(node, id);
        id
    }
}

/// One fully expanded tableau node: the letter constraint, the obligations for
/// the next step, and which untils are fulfilled or absent here.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Cover {
    pos: PropSet,
    neg: PropSet,
    next: Vec<usize>,
    fulfilled: Vec<bool>,
}

struct Tableau<'a> {
    arena: &'a Arena,
    untils: Vec<usize>,
}

impl Tableau<'_> {
    fn covers(&self, start: &[usize]) -> Vec<Cover> {
        let mut out = BTreeSet::new();
        self.expand(start.to_vec(), BTreeSet::new(), BTreeSet::new(), &mut out);
        out.into_iter().collect()
    }

    fn expand(&self, mut todo: Vec<usize>, mut old: BTreeSet<usize>, mut next: BTreeSet<usize>, out: &mut BTreeSet<Cover>) {
        while let Some(f) = todo.pop() {
            if old.contains(&f) {
                continue;
            }
            match self.arena.nodes[f] {
                Node::True => {
                    old.insert(f);
                }
                Node::False => return,
                Node::Lit(p, b) => {
                    let neg = self.arena.index.get(&Node::Lit(p, !b));
                    if neg.is_some_and(|n| old.contains(n)) {
                        return;
                    }
                    old.insert(f);
                }
                Node::And(a, b) => {
                    old.insert(f);
                    todo.push(a);
                    todo.push(b);
                }
                Node::Next(a) => {
                    old.insert(f);
                    next.insert(a);
                }
                Node::Or(a, b) => {
                    old.insert(f);
                    let mut t2 = todo.clone();
                    t2.push(b);
                    self.expand(t2, old.clone(), next.clone(), out);
                    todo.push(a);
                }
                Node::Until(a, b) => {
                    old.insert(f);
                    let mut t2 = todo.clone();
                    t2.push(a);
                    let mut n2 = next.clone();
                    n2.insert(f);
                    self.expand(t2, old.clone(), n2, out);
                    todo.push(b);
                }
                Node::Release(a, b) => {
                    old.insert(f);
                    let mut t2 = todo.clone();
                    t2.push(b);
                    let mut n2 = next.clone();
                    n2.insert(f);
                    self.expand(t2, old.clone(), n2, out);
                    todo.push(a);
                    todo.push(b);
                }
            }
        }
        let mut pos = PropSet::EMPTY;
        let mut neg = PropSet::EMPTY;
        for &f in &old {
            if let Node::Lit(p, b) = self.arena.nodes[f] {
                if b {
                    pos.insert(p);
                } else {
                    neg.insert(p);
                }
            }
        }
        if !pos.is_disjoint(neg) {
            return;
        }
        let fulfilled = self
            .untils
            .iter()
            .map(|&u| {
                let Node::Until(_, b) = self.arena.nodes[u] else { unreachable!() };
                !old.contains(&u) || old.contains(&b)
            })
            .collect();
        out.insert(Cover { pos, neg, next: next.into_iter().collect(), fulfilled });
    }
}

impl Nba {
    /// Translates an LTL formula; atoms unknown to `resolve` are false.
    pub fn from_ltl(f: &Ltl, resolve: &dyn Fn(&str) -> Option<usize>) -> Nba {
        Nba::from_nnf(&f.to_nnf(resolve))
    }

    pub fn from_nnf(f: &Nnf) -> Nba {
        let mut arena = Arena::default();
        let root = arena.intern(f);
        let untils: Vec<usize> = (0..arena.nodes.len())
            .filter(|&i| matches!(arena.nodes[i], Node::Until(..)))
            .collect();
        let tab = Tableau { arena: &arena, untils };

        let mut ids: HashMap<Cover, usize> = HashMap::new();
        let mut covers: Vec<Cover> = Vec::new();
        let mut succ: Vec<Vec<usize>> = Vec::new();
        let mut queue = VecDeque::new();
        let mut intern = |c: Cover, covers: &mut Vec<Cover>, queue: &mut VecDeque<usize>| -> usize {
            if let Some(&id) = ids.get(&c) {
                return id;
            }
            let id = covers.len();
            ids.insert(c.clone(), id);
            covers.push(c);
            queue.push_back(id);
            id
        };
        let init: Vec<usize> = tab
            .covers(&[root])
            .into_iter()
            .map(|c| intern(c, &mut covers, &mut queue))
            .collect();
        let mut next_cache: HashMap<Vec<usize>, Vec<Cover>> = HashMap::new();
        while let Some(id) = queue.pop_front() {
            let next = covers[id].next.clone();
            let cs = next_cache.entry(next.clone()).or_insert_with(|| tab.covers(&next)).clone();
            let targets: Vec<usize> = cs.into_iter().map(|c| intern(c, &mut covers, &mut queue)).collect();
            if succ.len() <= id {
                succ.resize(id + 1, Vec::new());
            }
            succ[id] = targets;
        }
        succ.resize(covers.len(), Vec::new());

        // Degeneralise with a round-robin counter over the until obligations.
        let k = tab.untils.len();
        let nba = if k == 0 {
            Nba {
                states: covers
                    .iter()
                    .zip(succ)
                    .map(|(c, s)| NbaState { pos: c.pos, neg: c.neg, succ: s, accepting: true })
                    .collect(),
                init,
            }
        } else {
            let mut map: HashMap<(usize, usize), usize> = HashMap::new();
            let mut states: Vec<NbaState> = Vec::new();
            let mut work: VecDeque<(usize, usize)> = VecDeque::new();
            let mut get = |q: usize, i: usize, states: &mut Vec<NbaState>, work: &mut VecDeque<(usize, usize)>| {
                *map.entry((q, i)).or_insert_with(|| {
                    states.push(NbaState {
                        pos: covers[q].pos,
                        neg: covers[q].neg,
                        succ: Vec::new(),
                        accepting: i == 0 && covers[q].fulfilled[0],
                    });
                    work.push_back((q, i));
                    states.len() - 1
                })
            };
            let init2: Vec<usize> = init.iter().map(|&q| get(q, 0, &mut states, &mut work)).collect();
            while let Some((q, i)) = work.pop_front() {
                let me = get(q, i, &mut states, &mut work);
                let j = if covers[q].fulfilled[i] { (i + 1) % k } else { i };
                let targets: Vec<usize> = succ[q].iter().map(|&t| get(t, j, &mut states, &mut work)).collect();
                states[me].succ = targets;
            }
            Nba { states, init: init2 }
        };
        nba.prune().quotient()
    }

    /// Drops states that cannot reach an accepting cycle.
    fn prune(self) -> Nba {
        let n = self.states.len();
        let sccs = tarjan(n, &|i| self.states[i].succ.clone());
        // live: states in a nontrivial SCC containing an accepting state
        let mut live = vec![false; n];
        for comp in &sccs {
            let nontrivial = comp.len() > 1 || self.states[comp[0]].succ.contains(&comp[0]);
            if nontrivial && comp.iter().any(|&q| self.states[q].accepting) {
                for &q in comp {
                    live[q] = true;
                }
            }
        }
        // backward closure
        let mut pred = vec![Vec::new(); n];
        for (q, s) in self.states.iter().enumerate() {
            for &t in &s.succ {
                pred[t].push(q);
            }
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&q| live[q]).collect();
        while let Some(q) = queue.pop_front() {
            for &p in &pred[q] {
                if !live[p] {
                    live[p] = true;
                    queue.push_back(p);
                }
            }
        }
        let mut remap = vec![usize::MAX; n];
        let mut states = Vec::new();
        for q in 0..n {
            if live[q] {
                remap[q] = states.len();
                states.push(self.states[q].clone());
            }
        }
        for s in states.iter_mut() {
            s.succ = s.succ.iter().filter(|&&t| live[t]).map(|&t| remap[t]).collect();
        }
        let init = self.init.iter().filter(|&&q| live[q]).map(|&q| remap[q]).collect();
        Nba { states, init }.normalized()
    }

    /// Merges bisimilar states (same label, acceptance and successor classes).
    fn quotient(self) -> Nba {
        let n = self.states.len();
        let mut class: Vec<usize> = vec![0; n];
        let mut key_ids: HashMap<(PropSet, PropSet, bool), usize> = HashMap::new();
        for (q, s) in self.states.iter().enumerate() {
            let l = key_ids.len();
            class[q] = *key_ids.entry((s.pos, s.neg, s.accepting)).or_insert(l);
        }
        loop {
            let mut sig_ids: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
            let mut next = vec![0; n];
            for q in 0..n {
                let mut succ: Vec<usize> = self.states[q].succ.iter().map(|&t| class[t]).collect();
                succ.sort_unstable();
                succ.dedup();
                let l = sig_ids.len();
                next[q] = *sig_ids.entry((class[q], succ)).or_insert(l);
            }
            let stable = sig_ids.len() == class.iter().collect::<BTreeSet<_>>().len();
            class = next;
            if stable {
                break;
            }
        }
        let k = class.iter().copied().max().map_or(0, |m| m + 1);
        let mut states: Vec<Option<NbaState>> = vec![None; k];
        for q in 0..n {
            if states[class[q]].is_none() {
                let s = &self.states[q];
                let mut succ: Vec<usize> = s.succ.iter().map(|&t| class[t]).collect();
                succ.sort_unstable();
                succ.dedup();
                states[class[q]] = Some(NbaState { pos: s.pos, neg: s.neg, succ, accepting: s.accepting });
            }
        }
        let init = self.init.iter().map(|&q| class[q]).collect();
        Nba { states: states.into_iter().map(|s| s.expect("class populated")).collect(), init }.normalized()
    }

    fn normalized(mut self) -> Nba {
        self.init.sort_unstable();
        self.init.dedup();
        for s in self.states.iter_mut() {
            s.succ.sort_unstable();
            s.succ.dedup();
        }
        self
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.init.is_empty()
    }

    /// Acceptance of `stem · cycle^ω`.
    pub fn accepts_lasso(&self, stem: &[PropSet], cycle: &[PropSet]) -> bool {
        assert!(!cycle.is_empty());
        let word: Vec<PropSet> = stem.iter().chain(cycle).copied().collect();
        let len = word.len();
        let next_pos = |i: usize| if i + 1 < len { i + 1 } else { stem.len() };
        let init: Vec<(usize, usize)> = self
            .init
            .iter()
            .filter(|&&q| self.states[q].admits(word[0]))
            .map(|&q| (0, q))
            .collect();
        find_accepting_lasso(
            &init,
            |&(i, q)| {
                let j = next_pos(i);
                self.states[q]
                    .succ
                    .iter()
                    .filter(|&&t| self.states[t].admits(word[j]))
                    .map(|&t| (j, t))
                    .collect()
            },
            |&(_, q)| self.states[q].accepting,
        )
        .is_some()
    }
}

/// An ultimately periodic run: `stem` followed by `cycle` repeated forever.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lasso<N> {
    pub stem: Vec<N>,
    pub cycle: Vec<N>,
}

impl<N: Clone> Lasso<N> {
    pub fn map<M>(&self, f: impl Fn(&N) -> M) -> Lasso<M> {
        Lasso { stem: self.stem.iter().map(&f).collect(), cycle: self.cycle.iter().map(&f).collect() }
    }

    /// The first `n` positions of the infinite unrolling.
    pub fn unroll(&self, n: usize) -> Vec<N> {
        let mut out: Vec<N> = self.stem.iter().take(n).cloned().collect();
        while out.len() < n {
            for x in &self.cycle {
                if out.len() == n {
                    break;
                }
                out.push(x.clone());
            }
        }
        out
    }
}

/// Strongly connected components of a graph over `0..n`, iterative Tarjan.
pub fn tarjan(n: usize, succ: &dyn Fn(usize) -> Vec<usize>) -> Vec<Vec<usize>> {
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, Vec<usize>, usize)> = vec![(root, succ(root), 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(frame) = call.last_mut() {
            let v = frame.0;
            if frame.2 < frame.1.len() {
                let w = frame.1[frame.2];
                frame.2 += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, succ(w), 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(parent) = call.last() {
                    let p = parent.0;
                    low[p] = low[p].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

/// Searches the graph reachable from `init` for a path to an accepting node
/// that lies on a cycle. Returns the lasso with the cycle starting at that node.
pub fn find_accepting_lasso<N, S, A>(init: &[N], succ: S, accepting: A) -> Option<Lasso<N>>
where
    N: Clone + Eq + Hash,
    S: Fn(&N) -> Vec<N>,
    A: Fn(&N) -> bool,
{
    let mut ids: HashMap<N, usize> = HashMap::new();
    let mut nodes: Vec<N> = Vec::new();
    let mut edges: Vec<Vec<usize>> = Vec::new();
    let mut parent: Vec<usize> = Vec::new();
    let mut queue = VecDeque::new();
    for x in init {
        if !ids.contains_key(x) {
            ids.insert(x.clone(), nodes.len());
            nodes.push(x.clone());
            parent.push(usize::MAX);
            queue.push_back(nodes.len() - 1);
        }
    }
    while let Some(i) = queue.pop_front() {
        let mut out = Vec::new();
        for y in succ(&nodes[i]) {
            let j = match ids.get(&y) {
                Some(&j) => j,
                None => {
                    let j = nodes.len();
                    ids.insert(y.clone(), j);
                    nodes.push(y);
                    parent.push(i);
                    queue.push_back(j);
                    j
                }
            };
            out.push(j);
        }
        out.sort_unstable();
        out.dedup();
        if edges.len() <= i {
            edges.resize(i + 1, Vec::new());
        }
        edges[i] = out;
    }
    edges.resize(nodes.len(), Vec::new());
    let comps = tarjan(nodes.len(), &|i| edges[i].clone());
    let mut comp_of = vec![0; nodes.len()];
    for (c, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of[v] = c;
        }
    }
    // lowest-index accepting node on a cycle, for determinism
    let target = (0..nodes.len()).find(|&v| {
        accepting(&nodes[v]) && (comps[comp_of[v]].len() > 1 || edges[v].contains(&v))
    })?;
    let mut stem = Vec::new();
    let mut v = parent[target];
    while v != usize::MAX {
        stem.push(nodes[v].clone());
        v = parent[v];
    }
    stem.reverse();
    // BFS inside the SCC from target back to target
    let c = comp_of[target];
    let mut back = vec![usize::MAX; nodes.len()];
    let mut q = VecDeque::new();
    q.push_back(target);
    let mut found = None;
    'bfs: while let Some(u) = q.pop_front() {
        for &w in &edges[u] {
            if w == target {
                found = Some(u);
                break 'bfs;
            }
            if comp_of[w] == c && back[w] == usize::MAX {
                back[w] = u;
                q.push_back(w);
            }
        }
    }
    let mut cycle = Vec::new();
    let mut u = found.expect("accepting node lies on a cycle");
    while u != target {
        cycle.push(nodes[u].clone());
        u = back[u];
    }
    cycle.push(nodes[target].clone());
    cycle.reverse();
    Some(Lasso { stem, cycle })
}

/// Resolver mapping atom names to a world's proposition ids.
pub fn resolver(w: &World) -> impl Fn(&str) -> Option<usize> + '_ {
    move |name| w.prop_id(name)
}

/// Checks that every infinite path of `w` from `from` satisfies `phi`.
/// On failure returns a lasso of world states violating it.
pub fn world_satisfies(w: &World, from: &[StateId], phi: &Ltl) -> Result<(), Lasso<StateId>> {
    let r = resolver(w);
    let nba = Nba::from_ltl(&Ltl::not(phi.clone()), &r);
    world_product_lasso(w, from, &nba)
}

/// Product of the world's unrestricted paths with `nba`; returns an accepting
/// lasso of world states if one exists.
pub fn world_product_lasso(w: &World, from: &[StateId], nba: &Nba) -> Result<(), Lasso<StateId>> {
    let init: Vec<(StateId, usize)> = from
        .iter()
        .flat_map(|&s| {
            nba.init
                .iter()
                .filter(move |&&q| nba.states[q].admits(w.label(s)))
                .map(move |&q| (s, q))
        })
        .collect();
    match find_accepting_lasso(
        &init,
        |&(s, q)| {
            let mut out = Vec::new();
            for &t in w.post(s) {
                for &q2 in &nba.states[q].succ {
                    if nba.states[q2].admits(w.label(t)) {
                        out.push((t, q2));
                    }
                }
            }
            out
        },
        |&(_, q)| nba.states[q].accepting,
    ) {
        None => Ok(()),
        Some(l) => Err(l.map(|&(s, _)| s)),
    }
}
