//! Joint dynamic pricing and inventory replenishment under competition.
//!
//! The crate bundles:
//!
//! - `demand`: demand-rate models (logistic, linearized, empirical table),
//!   competitor and reference-price dynamics, Poisson sampling, and
//!   least-squares demand fitting.
//! - `market`: the multi-period market/inventory simulator with lead-time
//!   pipelines, lost-sales or backlog accounting, and multi-product steps.
//! - `analytic`: closed-form single-period expected profit, gradients,
//!   optimality conditions, and grid enumeration.
//! - `sa`: two-timescale stochastic approximation for the single-period
//!   joint price/stock problem, with unbiased gradient estimators.
//! - `dp`: exact finite-horizon backward induction for tiny instances.
//! - `neural`: minimal reverse-mode MLP + stacked-GRU building blocks.
//! - `fsda`: the fast-slow dual-agent actor-critic trainer.
//! - `baselines`: BSLP, (s,S,p), and Myopic policies with parameter search.
//! - `config`: experiment configuration and named presets.

pub mod analytic;
pub mod baselines;
pub mod config;
pub mod demand;
pub mod dp;
pub mod error;
pub mod fsda;
pub mod market;
pub mod neural;
pub mod rng;
pub mod sa;

pub use error::{Error, Result};
