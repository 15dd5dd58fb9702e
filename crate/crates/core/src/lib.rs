//! Contract-based statistical verification of system-of-systems models.
//!
//! Contracts are written in a pattern language over OCL state propositions,
//! translated to bounded LTL, monitored on simulated timed traces and
//! aggregated into a probability estimate.

pub mod bltl;
pub mod error;
pub mod gcsl;
pub mod lexer;
pub mod model;
pub mod ocl;
pub mod sim;
pub mod smc;
pub mod time;
pub mod translate;

pub use error::{Error, Location, Result};
pub use model::{InstanceId, SosModel, StateValuation, TimedTrace};
pub use time::{TimeSpan, TimeUnit};
