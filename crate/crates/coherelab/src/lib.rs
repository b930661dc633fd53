//! Simulation of multi-path interferometer response distributions and the
//! coherence measures that can be read off from their visibility.
//!
//! The crate is organized as a pipeline: `quantum` holds states, phase
//! encodings, measurements, and incoherence-preserving channels;
//! `interferometer` turns them into response patterns on phase grids;
//! `measures` computes coherence quantifiers with optimizer witnesses; and
//! `harness` stress-tests strong monotonicity of those quantifiers under
//! randomly sampled channels.

pub mod error;
pub mod harness;
pub mod interferometer;
pub mod measures;
pub mod numerics;
pub mod optim;
pub mod quantum;

pub use error::{Error, Result};
