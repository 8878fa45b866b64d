pub mod analysis;
pub mod cli;
pub mod elements;
pub mod error;
pub mod experiment;
pub mod field;
pub mod scheme;
pub mod signal;

pub use error::{Error, Result};
