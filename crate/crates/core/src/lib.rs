//! Doxastic analysis of autonomous systems.
//!
//! The crate models a ground-truth *design-time world* as a labelled Kripke
//! structure with concurrent ego/environment actions, lets a system form
//! beliefs (sets of alternative realities) from observation histories, and
//! answers three families of questions about such a system:
//!
//! * what the best achievable goal level is for truth-observing, doxastic and
//!   possible-worlds strategies ([`synthesis`], [`autonomy`]);
//! * whether a belief formation lets a rational (autonomous) system act as
//!   well as one that sees the ground truth ([`relevance`]);
//! * which knowledge, observations and beliefs are (weakly) relevant.
//!
//! Temporal goals are LTL formulas ([`ltl`]); knowledge is expressed in a
//! belief variant of LTL evaluated over realities ([`belief`]).

pub mod autonomy;
pub mod belief;
pub mod buchi;
pub mod commands;
pub mod fixtures;
pub mod formation;
pub mod goals;
pub mod io;
pub mod ltl;
pub mod objective;
pub mod propset;
pub mod relevance;
pub mod report;
pub mod synthesis;
pub mod testgen;
pub mod world;

pub use belief::{Belief, BeliefCatalog, KnowledgeBase, KnowledgeLabeling, Reality};
pub use formation::RegularBeliefFormation;
pub use goals::GoalList;
pub use ltl::{Bltl, Ltl};
pub use propset::PropSet;
pub use synthesis::{ObservationFunction, StrategyMachine, SynthesisOptions, SynthesisOutcome};
pub use world::World;
