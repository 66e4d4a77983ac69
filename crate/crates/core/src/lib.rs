//! Simulation and estimation toolkit for a two-species plankton model
//! observed through clouds.
//!
//! The drive system lives in [`ecology`], observers that recover the hidden
//! species and parameters in [`observer`], the switching-network analysis in
//! [`netanalysis`], and the experiment plumbing in [`scenario`], [`config`]
//! and [`io`].

pub mod config;
pub mod ecology;
pub mod error;
pub mod field;
pub mod io;
pub mod metrics;
pub mod netanalysis;
pub mod observer;
pub mod occlusion;
pub mod scenario;
pub mod seed;
pub mod sensing;

pub use error::{Error, Result};
pub use field::{Field, GridSpec};
