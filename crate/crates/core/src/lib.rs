//! Branch-and-bound MILP solving with pluggable branching rules, and the
//! machinery to learn branching policies by treating each B&B tree as a
//! tree-structured MDP episode.
//!
//! The crate is `no_std` and only needs `alloc`. Anything touching files,
//! wall clocks or threads lives in the companion `branchlearn` crate; time
//! limits are honoured through the [`clock::Clock`] trait.
//!
//! Module map:
//!
//! * [`lp`]: bounded-variable primal simplex for LP relaxations.
//! * [`milp`]: instance model, feasibility checks, brute-force oracle.
//! * [`gen`]: seeded generators for the five benchmark families.
//! * [`bnb`]: vanilla branch-and-bound with full tree instrumentation.
//! * [`branching`]: random, strong, pseudocost and learned branching rules.
//! * [`policy`]: candidate features and a small softmax scorer with
//!   analytic gradients.
//! * [`tree`]: episode trees, tree/temporal returns, synthetic tree MDPs.
//! * [`train`]: REINFORCE and imitation training loops, validation.
//! * [`eval`]: pairwise-complete aggregation of evaluation runs.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bnb;
pub mod branching;
pub mod clock;
pub mod eval;
pub mod gen;
pub mod lp;
pub mod milp;
pub mod policy;
pub mod sparse;
pub mod tol;
pub mod train;
pub mod tree;

pub mod float;

pub use bnb::{solve, NodeSelection, SolveConfig, SolveReport, SolveStatus};
pub use lp::{solve_lp, LpProblem, LpResult};
pub use milp::MilpInstance;
