pub mod bounds;
pub mod engagement;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod policy;

pub use error::{Error, Result};
