pub mod cache;
pub mod clifford;
pub mod error;
pub mod integrals;
pub mod kernel;
pub mod linalg;
pub mod ops;
pub mod poly;
pub mod quad;
pub mod spaces;

pub use clifford::Multivector;
pub use error::{Error, Result};
pub use poly::{CliffordPoly, VariableGroup};
