//! The swap-station MDP: states, actions, demand, transitions, and rewards.

mod demand;
mod dynamics;
mod grid;
mod scenario;

pub use demand::{DemandModel, DemandSpec};
pub use dynamics::{ReplacementCap, SubadditivityWitness};
pub use grid::{CapIdx, CapacityGrid};
pub use scenario::{Action, Scenario, State};
