//! Routing perishable produce under travel-time, delay and temperature
//! uncertainty.
//!
//! * [`kinetics`]: Arrhenius and Q10 shelf-life laws over temperature profiles.
//! * [`domain`]: instances, routes and their validation.
//! * [`solver`]: exact branch and bound for tours with additive side constraints.
//! * [`models`]: deterministic, robust, stochastic, distributionally robust and
//!   adaptive rolling-horizon formulations.
//! * [`scenarios`]: seeded scenario batches and synthetic instances.
//! * [`ingest`]: temperature-logger CSV files.
//! * [`analysis`]: Pareto frontiers, comparisons and sensitivity sweeps.
//! * [`cli`]: the `freshroute` command.

// Parameter checks are written as `!(x >= lo)` on purpose so NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod domain;
pub mod ingest;
pub mod kinetics;
pub mod models;
pub mod scenarios;
pub mod solver;
