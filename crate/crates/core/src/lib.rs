pub mod coefficients;
pub mod error;
pub mod export;
pub mod field;
pub mod formsum;
pub mod grid;
pub mod linalg;
pub mod multipliers;
pub mod probes;
pub mod spectra;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
