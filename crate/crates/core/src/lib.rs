//! Distributionally robust risk functionals on finite probability spaces.
//!
//! Static worst-case expectations over ambiguity sets, their conditional and
//! nested (multistage) counterparts, Wasserstein transport bounds, and a
//! dynamic-programming solver for rectangular multistage problems. Every
//! supremum reduces to a vertex scan or a small linear program solved by the
//! bundled dense simplex in [`lp`].

pub mod ambiguity;
pub mod commands;
pub mod composite;
pub mod conditional;
pub mod dp;
pub mod error;
pub mod lp;
pub mod measure;
pub mod problem;
pub mod report;
pub mod risk_static;
pub mod rng;
pub mod transport;
pub mod verify;

pub use error::{Error, Result};

/// Absolute tolerance for equality comparisons on reals.
pub const TOL: f64 = 1e-9;
