//! Numerical verification of the Stokes, Borel-Pompeiu and Cauchy identities
//! for the higher spin operators, driven by [`scenarios::run`].

pub mod config;
pub mod error;
pub mod report;
pub mod scenarios;
pub mod workspace;

pub use config::{FieldKind, Scenario, ScenarioConfig};
pub use error::{Result, VerifyError};
pub use report::VerificationReport;
pub use workspace::Workspace;
