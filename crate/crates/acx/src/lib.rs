//! Numerical lab for almost complex structures on the unit ball of ℂⁿ.

pub mod acs;
pub mod ball;
pub mod calculus;
pub mod cli;
pub mod config;
pub mod custom;
pub mod disk;
pub mod error;
pub mod jet;
pub mod lift;
pub mod ma;
pub mod report;
pub mod sampling;
pub mod stationary;
pub mod variations;

pub use error::{AcxError, Result};
