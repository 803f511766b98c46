//! The frog model on d-ary trees: exact root-visit operators, dominance
//! certificates, and Monte Carlo experiments on infinite and finite trees.

pub mod certificates;
pub mod cli;
pub mod dist;
pub mod error;
pub mod operator;
pub mod output;
pub mod rng;
pub mod sim;
pub mod transience;

pub use error::{Error, Result};
