//! Saturation throughput of a two-stage full-duplex cognitive-radio MAC.
//!
//! Secondary users contend with a p-persistent RTS/CTS handshake. The winner
//! then transmits while sensing for a primary user during `t_s`, and keeps
//! transmitting (one-way or two-way) for the rest of the frame if the channel
//! still looks idle. The crate provides:
//!
//! * the closed-form normalized throughput ([`throughput::normalized_throughput`]),
//! * a configuration optimizer over the sensing time and sensing power
//!   ([`optimizer`]),
//! * a seeded Monte-Carlo simulator used as an independent check
//!   ([`montecarlo::simulate`]).
//!
//! Powers are linear and relative to the noise power; times are seconds.

// Negated comparisons are used on purpose: they reject NaN together with
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contention;
pub mod error;
pub mod exec;
pub mod gauss;
pub mod model;
pub mod montecarlo;
pub mod optimizer;
pub mod quadrature;
pub mod sensing;
pub mod throughput;

pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{
    db_to_linear, linear_to_db, AccessConfig, ContentionParams, PuModel, Scenario, SensingConfig,
    SicModel, TxMode,
};
