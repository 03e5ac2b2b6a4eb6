//! Statevector toolkit for gradient-variance experiments on parametrized
//! quantum circuits.
//!
//! Deep randomly initialized circuits concentrate: the gradient of an
//! expectation-value objective has mean zero and exponentially small
//! variance in the qubit count, so gradient descent stalls right at
//! initialization. This crate implements the mirrored *identity-block*
//! initialization that sidesteps the problem — every block starts as
//! `U U^dag = I`, which caps the effective depth seen by each partial
//! derivative during the first updates — together with everything needed
//! to measure the effect:
//!
//! * exact statevector simulation with Pauli-sum observables ([`sim`],
//!   [`observable`]),
//! * circuit builders for the random hardware-efficient ansatz, mirrored
//!   identity blocks, and a fixed entangling prefix ([`ansatz`]),
//! * three mutually validating gradient engines plus a dense directional
//!   form ([`grad`]),
//! * Haar sampling and closed-form moment checks for the concentration
//!   statement itself ([`haar`]),
//! * Adam training loops for a Heisenberg-model VQE and a binary image
//!   classifier ([`train`]),
//! * IDX ingestion, amplitude encoding, and a synthetic dataset ([`data`]).
//!
//! The `blockinit` binary in this workspace drives the experiment suite on
//! top of these pieces; the book under `book/` walks through the concepts
//! chapter by chapter, and its code snippets compile as doc-tests.

pub mod ansatz;
pub mod circuit;
pub mod data;
pub mod error;
pub mod grad;
pub mod haar;
pub mod linalg;
pub mod observable;
pub mod sim;
pub mod train;

mod book;

pub use circuit::{BlockHalf, CircuitTemplate, GateSpec, ParameterVector, RotationAxis, SlotRole};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexVector};
pub use observable::{Observable, Pauli, PauliString};
pub use sim::StateVector;
