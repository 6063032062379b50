pub mod cli;
pub mod config;
pub mod dlm;
pub mod error;
pub mod eval;
pub mod io;
pub mod linalg;
pub mod priors;
pub mod sampler;
pub mod sim;
pub mod structure;

pub use error::{Error, Result};
