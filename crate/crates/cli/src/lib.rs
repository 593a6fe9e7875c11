//! Scenario runner behind the `gaussmap` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod figure;
pub mod output;
pub mod run;
pub mod scenario;
pub mod selftest;

pub use run::{run, RunOutput, RunReport};
pub use scenario::{builtin, ConfigError, Scenario};
