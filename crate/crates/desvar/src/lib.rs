//! Discrete-event simulation engine with synchronized random-number
//! streams, three benchmark domain models, a variance-reduction estimator
//! toolkit (common random numbers, antithetic variates, control variates),
//! and statistical output analysis driven by an experiment harness.

pub mod dist;
pub mod experiment;
pub mod kernel;
pub mod model;
pub mod report;
pub mod rng;
pub mod stats;
pub mod vrt;
