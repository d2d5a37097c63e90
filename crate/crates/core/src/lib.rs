//! Sparsest Cut on bounded-treewidth graphs.
//!
//! The crate bundles a pared-down Sherali-Adams relaxation solved by an exact
//! rational simplex, top-down propagation rounding with a conditional
//! expectation derandomizer, brute-force oracles, and generators for the
//! fractal and hypercube gap constructions together with the recursive lift
//! of MaxCut Sherali-Adams solutions.

pub mod budget;
pub mod decomposition;
pub mod error;
pub mod format;
pub mod generators;
pub mod graph;
pub mod lp;
pub mod oracle;
pub mod pipeline;
pub mod rational;
pub mod rounding;
pub mod sa;
pub mod sa_gap;

pub use error::{Error, Result};
pub use graph::{Cut, Edge, SparsestCutInstance, Sparsity, VertexId};
pub use rational::Rational;
