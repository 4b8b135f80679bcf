//! Solvers for the stochastic scheduling, allocation, and inventory
//! replenishment problem at a battery swap station.
//!
//! The station holds `M` batteries, each either full or depleted, and tracks
//! the discretized average capacity of the fleet. Each decision epoch it
//! chooses how many batteries to recharge or discharge and how many to
//! replace, facing Poisson swap demand, time-varying power prices, and
//! permanent capacity degradation from every charge cycle.
//!
//! The crate provides:
//! - the MDP itself ([`model`]): feasibility, transitions, rewards, the
//!   replacement cap that restores monotone-policy structure, and the
//!   subadditivity-violation finder;
//! - exact finite-horizon solvers ([`exact`]): backward induction and its
//!   monotone variant, with cached or on-demand transition probabilities;
//! - approximate dynamic programming ([`adp`]): approximate value iteration
//!   with monotone projection and regression-based initialization;
//! - stepsize rules ([`stepsize`]) for the value-smoothing weight;
//! - sample-path simulation and evaluation metrics ([`sim`]);
//! - experiment construction ([`experiments`]): bundled base data, Latin
//!   hypercube designs, and the 40 built-in study scenarios.

pub mod adp;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod model;
pub mod sim;
pub mod stepsize;

pub use error::{Error, Result};
