#![no_std]
extern crate alloc;

pub mod bernstein;
pub mod approx;
pub mod conditions;
pub mod error;
pub mod exact;
pub mod generators;
pub mod hermite;
pub mod math;
pub mod orthosystem;
pub mod partition;
pub mod polyspace;
pub mod quadrature;
pub mod search;

pub use error::{Error, Result};
