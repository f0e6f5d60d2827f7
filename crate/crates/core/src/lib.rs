//! Price-spike forecasting with spiking networks on high-frequency tick data.
//!
//! The pipeline runs tick data (real or synthetic) through VWAP aggregation,
//! difference features, robust normalization and Poisson encoding, trains
//! spiking networks (two unsupervised STDP variants and one supervised
//! surrogate-gradient variant) to flag price spikes, tunes them with a TPE
//! sampler, and evaluates the signals in a momentum backtester against naive
//! and random baselines.

pub mod backtest;
pub mod engine;
pub mod error;
pub mod hyperopt;
pub mod market;
pub mod metrics;
pub mod pipeline;
pub mod plasticity;
pub mod seed;
pub mod supervised;
pub mod tensor;

pub use error::{Error, Result};
