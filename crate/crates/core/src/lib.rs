//! Privacy-utility tradeoffs for finite-alphabet data release.
//!
//! A release mechanism `P_{Z|W}` sees an observation `W` of sensitive data `X`
//! and useful data `Y`. This crate evaluates privacy-leakage and distortion
//! functionals of such mechanisms, solves for the optimal tradeoff frontier
//! under full-data, output-perturbation and inference observation models,
//! provides closed-form frontiers for the symmetric-pair data model, and
//! checks post-processing and linkage inequalities for privacy measures.

pub mod axioms;
pub mod cli;
pub mod common_info;
pub mod error;
pub mod ext;
pub mod io;
pub mod measures;
pub mod probability;
mod random;
pub mod solver;
pub mod symmetric_pair;

pub use error::{Error, Result};
pub use ext::ExtReal;
pub use measures::{Adjacency, AdjacencyRelation, DistortionMeasure, PrivacyMeasure};
pub use probability::{Alphabet, Channel, JointPmf, Pmf, Tolerances};
