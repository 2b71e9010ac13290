//! Agent-based simulator of an information market in which cheap AI
//! production shifts supply toward low-quality content.
//!
//! The closed-form kernels (`econ`, `agents`, `ipi`, `policy`) are generic
//! over [`Scalar`]; the simulation and harness run in `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agents;
pub mod econ;
pub mod error;
pub mod harness;
pub mod ipi;
pub mod market;
pub mod params;
pub mod policy;
pub mod scalar;

pub use error::{Error, Result};
pub use params::ModelParams;
pub use scalar::Scalar;

pub type CesTechnology = econ::CesTechnology<f64>;
pub type FactorPrices = econ::FactorPrices<f64>;
pub type PlatformState = agents::PlatformState<f64>;
pub type PlatformGradients = agents::PlatformGradients<f64>;
pub type IpiReading = ipi::IpiReading<f64>;
pub type TrustParams = market::TrustParams<f64>;
pub type SignalParams = market::SignalParams<f64>;
