//! Simulation toolkit for the matroid secretary problem: matroid oracles,
//! a random-order arrival engine, the greedy framework with its memory
//! policies, the hat and partition constructions, and Monte Carlo
//! estimators.

pub mod engine;
pub mod greedy;
pub mod matroid;
pub mod hat;
pub mod partition;
pub mod experiments;
