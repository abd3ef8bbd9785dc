//! Security delay thresholds for delay-based randomness protocols facing
//! adversaries with faster hardware.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod casestudies;
pub mod equilibrium;
pub mod error;
pub mod exec;
pub mod fmt;
pub mod model;
pub mod montecarlo;
pub mod quadrature;
pub mod stopping;
pub mod thresholds;

pub use equilibrium::{equilibrium_attack_probability, EquilibriumResult, Regime};
pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{
    validate_scenario, EconomicEnvironment, FieldViolation, RewardModel, Scenario, ValidationErrors,
};
pub use montecarlo::SimConfig;
pub use stopping::{solve, GridSpec, PolicyGrid, ValueGrid};
pub use thresholds::{esdp, Condition, ThresholdReport};
