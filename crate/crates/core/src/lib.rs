//! Reversible circuits that evaluate `exp(-a x)` and `exp(-a x^2)` on a
//! fixed-point grid.
//!
//! The crate plans the classical constants ([`numerics`]), lowers them into
//! Toffoli/Fredkin circuits ([`arith`], [`builder`]), simulates those circuits
//! bit-exactly on basis inputs ([`circuit`]), checks them against an
//! independent reference ([`oracle`]) and compares measured gate counts with
//! closed-form resource formulas ([`estimator`]).

pub mod arith;
pub mod builder;
pub mod circuit;
pub mod cli;
pub mod error;
pub mod estimator;
pub mod hp;
pub mod numerics;
pub mod oracle;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
