//! Privilege-controlled point-cloud release: regeneration at a chosen
//! privilege level, simulated reidentification attackers, and the privacy
//! and utility metrics used to evaluate the trade-off between them.

pub mod attacker;
pub mod corpus;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod plane;
pub mod privacy;
pub mod regen;
pub mod seed;
pub mod utility;

pub use error::{Error, Result};
