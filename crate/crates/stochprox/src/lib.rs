//! Stochastic proximal splitting for objectives of the form
//! E[f_k(x)] + E[g_k(x)] over a finite random component index, with
//! closed-form operators, reproducible counter-based sampling, Monte Carlo
//! diagnostics, and two ready-made applications (mixed-loss classification
//! and inconsistent convex feasibility).

pub mod apps;
pub mod cli;
pub mod core;
pub mod diagnostics;
pub mod error;
pub mod operators;
pub mod selftest;
pub mod solvers;

pub use error::{Error, Result};
