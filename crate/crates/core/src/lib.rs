pub mod channel_sim;
pub mod dmd;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod linalg;
pub mod predictors;
pub mod synthetic;
pub mod tensor;
pub mod tucker;

pub use error::{Error, ErrorCategory, Result};
