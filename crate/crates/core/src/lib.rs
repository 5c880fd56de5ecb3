//! Channel models and optimization for MIMO links aided by cascades of
//! reconfigurable intelligent surfaces (RISs), from the multiport impedance
//! description down to Monte Carlo campaigns.

pub mod channel_gen;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod models;
pub mod multiport;
pub mod optimizer;
pub mod registry;
pub mod scaling;
pub mod scattering;
pub mod synth;

pub use error::{Error, Result};
