//! Core of a quasi-static power system operations simulator.
//!
//! Decision models (unit commitment, economic dispatch) and an emulation
//! model are built once from a [`formulations::ProblemTemplate`], solved in a
//! fixed interleaved order and coupled through feedforward parameters and a
//! shared [`sequence::SimulationState`]. Results go to a hierarchical,
//! batched [`store`].
//!
//! The crate is `no_std` and only needs `alloc`. File IO, CLI and input
//! parsing live in the `opsim` crate.
#![no_std]

extern crate alloc;

pub mod engine;
pub mod error;
pub mod feedforward;
pub mod formulations;
pub mod math;
pub mod opt;
pub mod problems;
pub mod sequence;
pub mod solver;
pub mod store;
pub mod system;
pub mod time;

pub use error::{Error, Result};
