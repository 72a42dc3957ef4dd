//! Throughput estimation and launch-power optimization for ultra-wideband
//! (S+C+L) WDM links in the presence of inter-channel stimulated Raman
//! scattering.

pub mod config;
pub mod error;
pub mod fiber;
pub mod link;
pub mod modem;
pub mod nli;
pub mod optimizer;
pub mod plan;
pub mod raman;
pub mod run;
pub mod units;

pub use error::{Error, Result};
