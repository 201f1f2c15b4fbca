//! Planning for co-safe LTL tasks in partially known environments.
//!
//! The agent knows a set of candidate successor sets for some states and
//! learns the real one on arrival. Strategies are synthesized on a game
//! arena that tracks this knowledge, minimizing regret against the cost the
//! agent would pay with full hindsight.

pub mod arena;
pub mod bench;
pub mod cost;
pub mod error;
pub mod exec;
pub mod fixtures;
pub mod formula;
pub mod grid;
pub mod model;
pub mod oracle;
pub mod solver;
pub mod strategy;

pub use cost::ExtCost;
pub use error::{Error, Result};
