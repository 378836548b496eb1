//! Causal bandits with an unknown causal graph.
//!
//! * [`combinatorics`]: exact binomials and action ranking.
//! * [`scm`]: discrete structural causal models, sampling and the exact
//!   mean-reward oracle.
//! * [`bandit_core`]: UCB1 arm statistics and mixture arms.
//! * [`algorithms`]: the regret-minimisation policies and parent
//!   identification rules.
//! * [`bounds`]: closed-form regret rates and scheduling quantities.
//! * [`harness`]: experiment orchestration, CSV output and the CLI.

pub mod algorithms;
pub mod bandit_core;
pub mod bounds;
pub mod combinatorics;
pub mod error;
pub mod harness;
pub mod scm;

pub use combinatorics::Action;
pub use error::{Error, Result};
pub use scm::{Instance, Observation};
