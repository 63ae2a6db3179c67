//! File formats, configuration, benchmarking and external-planner support
//! around [`foonplan_core`].

pub mod bench;
pub mod config;
pub mod external;
pub mod foon;
pub mod formats;

pub use foonplan_core;
