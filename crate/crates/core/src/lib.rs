//! Good-for-MDPs Büchi automata toolkit.
//!
//! A nondeterministic Büchi automaton is *good for MDPs* (GFM) when taking its
//! syntactic product with any finite MDP preserves the maximal satisfaction
//! probability of its language. This crate provides:
//!
//! * [`automata`] — transition-based Büchi automata, HOA I/O, lasso-word
//!   membership and bounded language comparison;
//! * [`constructions`] — the subset/breakpoint machinery that turns an
//!   arbitrary NBA into a suitable limit-deterministic automaton
//!   ([`constructions::build_sldba`]) or a *slim* automaton with branching
//!   degree at most two ([`constructions::build_slim`]), both GFM;
//! * [`parity`] — transition-labelled max-parity games and a Zielonka-style
//!   solver, plus a strategy-enumeration oracle for small games;
//! * [`sim`] — the three simulation games (plain, with accepting-transition
//!   claims, and with claim updates) used to certify the GFM property;
//! * [`mdp`] / [`prism`] — labeled MDPs, an explicit text format, and a
//!   parser for a guarded-command (PRISM-style) model subset;
//! * [`model_check`] — end-component analysis and value iteration for
//!   satisfaction probabilities, with a GFM refutation check;
//! * [`rl`] — an episodic product environment with the reward-on-accept
//!   scheme and tabular Q-learning;
//! * [`random`] — seeded generators for the random instances the
//!   conformance suites and the bundled corpus are built from.

pub mod automata;
pub mod constructions;
mod error;
pub mod hoa;
pub mod mdp;
pub mod model_check;
pub mod parity;
pub mod prism;
pub mod random;
pub mod rl;
pub mod sim;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
