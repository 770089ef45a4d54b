//! Quantum Fisher information of N-qubit states for collective spin operators,
//! and multipartite entanglement certification built on it.
//!
//! The pipeline is: build a [`states::QuantumState`], compute its
//! [`qfi::GammaMatrix`], then evaluate the bound ladder in [`criteria`].

pub mod collective;
pub mod criteria;
pub mod error;
pub mod interferometer;
pub mod landscape;
pub mod matcore;
pub mod qfi;
pub mod states;

pub use error::{Error, Result};
