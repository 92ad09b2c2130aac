pub mod bessel;
pub mod cli;
pub mod conformal;
pub mod estimators;
pub mod error;
pub mod exponents;
pub mod grid;
pub mod loewner;
pub mod mc;

pub use error::{Error, Result};
