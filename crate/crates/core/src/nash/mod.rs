//! Nash iteration: base step, increments, stress update, frequency
//! selection and verification of the inductive bounds.

pub mod check;
pub mod diagonal;
pub mod increment;
pub mod params;
pub mod probes;
pub mod reynolds;
pub mod run;
pub mod state;
pub mod select;
pub mod structured;
pub mod weak;

pub use increment::{build_increment, Increment, IncrementPlan, IncrementReport};
pub use params::{Frac, IterationParams};
pub use reynolds::{euler_reynolds_residual, reynolds_update, ResidualReport};
pub use state::{base_step, IterationState};
pub use check::{check_inductive, CheckReport, SubCheck};
pub use run::{run, verify_state, RunReport, StepReport};
pub use select::select_lambda;
