//! Batch front end for the radiation hydrodynamics solver: configuration,
//! initial data, run orchestration with checkpoints, and report commands.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checkpoint;
pub mod config;
pub mod presets;
pub mod run;
pub mod tools;
