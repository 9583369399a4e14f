pub mod error;
pub mod estimator;
pub mod info;
pub mod measures;
pub mod pipeline;
pub mod series;
pub mod surrogates;
pub mod sweep;
pub mod synthetic;
pub mod system;

pub use error::{Error, Result};
