//! Prioritised goal lists.

use crate::buchi::{world_satisfies, Lasso};
use crate::ltl::{parse_ltl, Ltl};
use crate::propset::PropSet;
use crate::world::{StateId, World};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GoalError {
    #[error("duplicate priority {0}")]
    DuplicatePriority(usize),
    #[error("priorities must be 1..{n}; {missing} is missing")]
    PriorityGap { n: usize, missing: usize },
    #[error("priority {prio} out of range 1..={n}")]
    OutOfRange { prio: usize, n: usize },
}

/// Goals in priority order: `goals[i]` has priority `i + 1`, and a lower
/// priority value is more important.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoalList {
    goals: Vec<Ltl>,
}

/// The technical top goal forbidding the sink.
pub fn never_undef() -> Ltl {
    Ltl::globally(Ltl::not(Ltl::atom(crate::world::UNDEF)))
}

/// Sorts user goals by priority and prepends `true` and `G !undef`.
pub fn normalize_goal_list(user: &[(Ltl, usize)]) -> Result<GoalList, GoalError> {
    let n = user.len();
    let mut slots: Vec<Option<Ltl>> = vec![None; n];
    for (f, prio) in user {
        if *prio == 0 || *prio > n {
            return Err(GoalError::OutOfRange { prio: *prio, n });
        }
        if slots[prio - 1].is_some() {
            return Err(GoalError::DuplicatePriority(*prio));
        }
        slots[prio - 1] = Some(f.clone());
    }
    let mut goals = vec![Ltl::True, never_undef()];
    for (i, s) in slots.into_iter().enumerate() {
        goals.push(s.ok_or(GoalError::PriorityGap { n, missing: i + 1 })?);
    }
    Ok(GoalList { goals })
}

impl GoalList {
    /// Goals in order, without normalisation. Used for already-normalised lists.
    pub fn from_normalized(goals: Vec<Ltl>) -> GoalList {
        GoalList { goals }
    }

    /// Parses user goals in priority order 1, 2, ... and normalises.
    pub fn from_user_texts(texts: &[&str]) -> Result<GoalList, crate::ltl::ParseError> {
        let parsed: Vec<(Ltl, usize)> = texts
            .iter()
            .enumerate()
            .map(|(i, t)| parse_ltl(t).map(|f| (f, i + 1)))
            .collect::<Result<_, _>>()?;
        Ok(normalize_goal_list(&parsed).expect("consecutive priorities"))
    }

    pub fn len(&self) -> usize {
        self.goals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.goals.is_empty()
    }

    /// Goal with priority `prio` (1-based).
    pub fn goal(&self, prio: usize) -> &Ltl {
        &self.goals[prio - 1]
    }

    pub fn goals(&self) -> &[Ltl] {
        &self.goals
    }

    /// User goals, i.e. everything after the two technical ones.
    pub fn user_goals(&self) -> &[Ltl] {
        &self.goals[2.min(self.goals.len())..]
    }

    /// Conjunction of all goals with priority at most `n`.
    pub fn conjunction_up_to(&self, n: usize) -> Ltl {
        Ltl::conj(self.goals[..n.min(self.goals.len())].iter().cloned())
    }

    /// Whether the word `stem · cycle^ω` satisfies every goal of priority ≤ n.
    pub fn lasso_satisfies_up_to(
        &self,
        stem: &[PropSet],
        cycle: &[PropSet],
        n: usize,
        resolve: &dyn Fn(&str) -> Option<usize>,
    ) -> bool {
        self.goals[..n].iter().all(|g| g.eval_lasso(stem, cycle, resolve))
    }

    /// Greatest `n` such that the word satisfies all goals up to `n`.
    pub fn lasso_level(&self, stem: &[PropSet], cycle: &[PropSet], resolve: &dyn Fn(&str) -> Option<usize>) -> usize {
        self.goals
            .iter()
            .take_while(|g| g.eval_lasso(stem, cycle, resolve))
            .count()
    }

    /// Whether every infinite path of `w` from `from` satisfies all goals up to `n`.
    pub fn world_satisfies_up_to(&self, w: &World, from: &[StateId], n: usize) -> Result<(), Lasso<StateId>> {
        world_satisfies(w, from, &self.conjunction_up_to(n))
    }
}
