//! Exact density-matrix simulation of one-dimensional noisy random quantum
//! circuits, with mixed-state entanglement measured through the logarithmic
//! negativity of the partial transpose.
//!
//! The crate is organised around the stages of a study:
//!
//! * [`qstate`] — dense density-matrix storage and diagnostics
//! * [`gates`] — Haar-random and fixed gate sampling on seeded streams
//! * [`channels`] — unitary conjugation and the two-qubit depolarizing channel
//! * [`circuit`] — brick-wall layer schedules and depth-by-depth evolution
//! * [`negativity`] — partial transpose, its spectrum, and negativity measures
//! * [`experiment`] — seeded multi-sample sweeps over (N, p) with CSV persistence
//! * [`scaling`] — volume/area-law fits, crossing-point estimation, data collapse


pub mod channels;
pub mod circuit;
pub mod error;
pub mod experiment;
pub mod gates;
pub mod linalg;
pub mod negativity;
pub mod qstate;
pub mod scaling;

mod bits;

pub use error::{Error, Result};

// re-export so downstream crates share one complex-number type
pub use num_complex;
