//! Covert and non-covert rate-key regions for discrete memoryless
//! multi-access and interference channels observed by a warden.
//!
//! The crate is organised in five layers:
//!
//! * [`channel`] holds the channel tensors, their validation and file format.
//! * [`infodiv`] has the information measures (KL, chi-squared, mutual information).
//! * [`region`] evaluates and optimises the asymptotic rate-key regions.
//! * [`simulator`] runs the random coding scheme at finite blocklength.
//! * [`cli`] wires everything into the `covertmac` command.
//!
//! All quantities are in nats unless a function says otherwise.

pub mod channel;
pub mod cli;
pub mod error;
pub mod infodiv;
pub mod region;
pub mod simulator;
pub mod units;

pub use channel::{Channel, DmicChannel, Dmmac, GeneralMac, ValidationReport};
pub use error::{Error, Result};
pub use region::{CovertParams, RateKeyTuple, RegionQuery};
