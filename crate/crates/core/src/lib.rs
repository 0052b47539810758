//! Random permutations with cycle weights: exact sampling, the scaled cycle
//! point process, limiting laws of cycle statistics, brute-force oracles
//! and a Monte Carlo harness.

pub mod error;
pub mod harness;
pub mod limit_laws;
pub mod logspace;
pub mod oracle;
pub mod permutation;
pub mod point_process;
pub mod region;
pub mod rng;
pub mod sampler;
pub mod statistics;
pub mod weights;

pub use error::{Error, Result};
pub use permutation::Permutation;
pub use rng::RngStream;
pub use sampler::PermutationSampler;
pub use weights::{WeightSequence, NormalizationTable};
