//! Simulation lab for commitment protocols built on physically unclonable
//! functions, where the adversary may manufacture malicious PUFs that keep
//! state and talk back to their creator.
//!
//! Layers, bottom up: [`bitlab`] (bit strings and entropy), [`pufmodel`],
//! [`ecc`], [`fuzzyext`], [`functionality`] (ideal PUF and commitment
//! functionalities), [`protocols`], [`extractors`], [`adversaries`] and
//! [`harness`] (Monte Carlo experiments and reports).

pub mod adversaries;
pub mod bitlab;
pub mod ecc;
pub mod extractors;
pub mod functionality;
pub mod fuzzyext;
pub mod harness;
pub mod protocols;
pub mod pufmodel;
pub mod seeds;
