pub mod error;
pub mod formats;
pub mod harness;
pub mod oracle;
pub mod quantum;
pub mod repr;
pub mod state_set;
pub mod unitary;

pub use error::{Error, Result};
