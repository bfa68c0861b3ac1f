pub mod data;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod kernel;
pub mod learner;
pub mod minmax;
pub mod oracle;
pub mod surrogate;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
