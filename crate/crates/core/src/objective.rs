//! Goal lists in the safety/reachability fragment, compiled to a monotone
//! bit monitor.
//!
//! A goal is in the fragment when it is a conjunction of components of the
//! shapes `G p`, `F q` and `p` with `p`, `q` propositional. Each safety or
//! initial component owns a *failed* bit, each reachability component a
//! *done* bit. Bits are only ever set, so a play satisfies the goals up to
//! level `k` iff no failed bit of those goals is ever set and all their done
//! bits eventually are.

use crate::goals::GoalList;
use crate::ltl::Ltl;
use crate::propset::PropSet;

pub type Mask = u64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Component {
    Safety(Ltl),
    Reach(Ltl),
    Init(Ltl),
}

/// Splits a goal into fragment components, or `None` if it is outside.
pub fn flatten(goal: &Ltl) -> Option<Vec<Component>> {
    let mut out = Vec::new();
    if flatten_into(goal, &mut out) {
        Some(out)
    } else {
        None
    }
}

fn flatten_into(goal: &Ltl, out: &mut Vec<Component>) -> bool {
    match goal {
        Ltl::True => true,
        Ltl::And(a, b) => flatten_into(a, out) && flatten_into(b, out),
        Ltl::Globally(p) if p.is_propositional() => {
            out.push(Component::Safety((**p).clone()));
            true
        }
        Ltl::Eventually(q) if q.is_propositional() => {
            out.push(Component::Reach((**q).clone()));
            true
        }
        p if p.is_propositional() => {
            out.push(Component::Init(p.clone()));
            true
        }
        _ => false,
    }
}

/// Monitor for the longest prefix of a goal list that lies in the fragment.
#[derive(Clone, Debug)]
pub struct Objective {
    pub components: Vec<Component>,
    /// Number of leading goals covered by the monitor.
    pub levels: usize,
    /// `fail_upto[k]`: failed bits of goals with priority ≤ k.
    pub fail_upto: Vec<Mask>,
    /// `done_upto[k]`: done bits of goals with priority ≤ k.
    pub done_upto: Vec<Mask>,
}

impl Objective {
    pub fn new(goals: &GoalList) -> Objective {
        let mut components = Vec::new();
        let mut fail_upto = vec![0];
        let mut done_upto = vec![0];
        let mut levels = 0;
        for g in goals.goals() {
            let Some(cs) = flatten(g) else { break };
            if components.len() + cs.len() > Mask::BITS as usize {
                break;
            }
            let (mut f, mut d) = (*fail_upto.last().expect("seeded"), *done_upto.last().expect("seeded"));
            for c in cs {
                let bit = 1 << components.len();
                match c {
                    Component::Reach(_) => d |= bit,
                    _ => f |= bit,
                }
                components.push(c);
            }
            fail_upto.push(f);
            done_upto.push(d);
            levels += 1;
        }
        Objective { components, levels, fail_upto, done_upto }
    }

    /// Truth of each component's proposition on a letter, as (now-bits, init-bits):
    /// the bits to set when entering a state and, additionally, at position 0.
    pub fn letter_bits(&self, letter: PropSet, resolve: &dyn Fn(&str) -> Option<usize>) -> (Mask, Mask) {
        let mut now = 0;
        let mut init = 0;
        for (i, c) in self.components.iter().enumerate() {
            let bit = 1 << i;
            match c {
                Component::Safety(p) => {
                    if !p.eval_letter(letter, resolve) {
                        now |= bit;
                    }
                }
                Component::Reach(q) => {
                    if q.eval_letter(letter, resolve) {
                        now |= bit;
                    }
                }
                Component::Init(p) => {
                    if !p.eval_letter(letter, resolve) {
                        init |= bit;
                    }
                }
            }
        }
        (now, init)
    }

    pub fn failed(&self, mask: Mask, level: usize) -> bool {
        mask & self.fail_upto[level] != 0
    }

    pub fn done(&self, mask: Mask, level: usize) -> bool {
        mask & self.done_upto[level] == self.done_upto[level]
    }
}
