//! Hierarchical manipulation planning over functional object-oriented
//! networks (FOON).
//!
//! The crate is `no_std` (it needs `alloc`) and covers the whole pipeline
//! that does not touch the file system:
//!
//! * [`graph`]: object/motion nodes, functional units, merging and task tree
//!   retrieval.
//! * [`predicate`]: the object-centred predicate vocabulary and state
//!   consistency rules.
//! * [`compiler`]: one ground macro operator per functional unit, plus PDDL
//!   rendering in [`pddl`].
//! * [`micro`]: the lifted robot-skill catalog and micro problem generation.
//! * [`planner`]: grounding, A* with h-max / h-FF / blind, and plan
//!   validation.
//! * [`context`]: action contexts and their relative-coordinate
//!   generalization.
//! * [`sim`]: the table-cell kitchen world, random configurations and the
//!   trial driver.
//! * [`bench`]: hierarchical versus monolithic planning cells.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bench;
pub mod compiler;
pub mod context;
pub mod graph;
pub mod micro;
pub mod pddl;
pub mod planner;
pub mod predicate;
pub mod recipes;
pub mod sim;
mod symbol;

pub use symbol::{Symbol, SymbolError};
