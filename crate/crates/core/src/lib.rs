//! Exact counterfactual calculator and Monte Carlo simulator for the
//! four-variable collider-bias model `U -> M <- A -> Y <- U`, `M -> Y`.
//!
//! The model has a binary exposure `A`, a binary confounder `U` of the
//! mediator and outcome, a binary mediator `M` and a binary outcome `Y`,
//! each generated by thresholding an independent uniform disturbance against
//! a logistic probability. On top of that model the crate computes the
//! associational contrast among `M = 1` units and five causal estimands,
//! on both the additive and the odds-ratio scale:
//!
//! * [`scm`]: parameters, mechanism tables and the exact factual joint law.
//! * [`estimands`]: closed forms for every contrast.
//! * [`mc`]: an independent sampler that materializes factual and
//!   counterfactual variables from shared disturbances.
//! * [`sweep`]: one-parameter grids, including the Figure 2 / Figure 3
//!   presets used to demonstrate collider bias.

pub mod error;
pub mod estimands;
pub mod exec;
pub mod mc;
pub mod scm;
pub mod sweep;

pub use error::{Error, Result};
pub use estimands::{report, Estimand, EstimandReport, RiskPair, Source};
pub use exec::Execution;
pub use mc::{estimate_report, McEstimate, McRun, WorldSample};
pub use scm::{
    expit, Coefficient, Given, InterceptMode, JointTable, MechanismTables, ScmModel, ScmParams,
};
pub use sweep::{run_sweep, Scales, SweepRow, SweepSpec};
