//! Single-encoding quantum homomorphic encryption over self-dual, doubly even
//! CSS codes.
//!
//! The crate is a simulator: a client encrypts one logical qubit by encoding
//! it with a CSS code and hiding every code qubit at a secret slot inside a
//! group of maximally mixed qubits. A server evaluates Clifford gates
//! transversally and T gates by magic-state teleportation, asking the client
//! to interpret measurement outcomes. Security bounds, region analysis and
//! depolarizing-noise experiments live alongside the protocol.
//!
//! Qubit ordering is little-endian everywhere: position 0 is the least
//! significant bit of an amplitude index.

pub mod cli;
pub mod css_code;
pub mod error;
pub mod noise_model;
pub mod qhe_protocol;
pub mod rng;
pub mod security_analysis;
pub mod state_sim;

pub use error::{Error, Result};
