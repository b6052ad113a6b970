pub mod analytics;
pub mod dense;
pub mod error;
pub mod fermion;
pub mod harness;
pub mod model;
pub mod optimizer;

pub use error::{Error, Result};
