//! Exact solvers for Bayesian persuasion of stable matchings.

pub mod error;
pub mod linalg;
pub mod lp;
pub mod rational;

pub use error::{Error, Result};
pub use rational::Q;
pub mod model;
pub mod io;
pub mod matching;
pub mod cells;
pub mod oracle;
pub mod worlds;
pub mod gen;
pub mod typed;
pub mod reductions;
pub mod cli;
