//! Markov branching splitting rules, random fragmentation trees, and line-breaking constructions
//! of their reduced-tree scaling limits.

pub mod diagnostics;
pub mod error;
pub mod linebreak;
pub mod numeric;
pub mod partitions;
pub mod samplers;
pub mod splitting_rules;
pub mod trees;

pub use error::{Error, Result};
