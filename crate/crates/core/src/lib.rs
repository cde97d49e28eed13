//! hydra-core: a multi-horizon stochastic capacity-expansion engine.
//!
//! The crate assembles, solves, and reports on deterministic-equivalent
//! linear programs for multi-commodity energy systems: investment decisions
//! per node and period in the first stage, hourly operation per stochastic
//! scenario in the second. It carries the EU green-hydrogen rule set
//! (additionality, spatial and temporal correlation, the 90% renewable-grid
//! exemption) and natural-gas pipeline repurposing as switchable constraint
//! families.
//!
//! All numeric code is generic over [`scalar::Scalar`] (`f32` or `f64`);
//! the aliases below pin the `f64` instantiations that the CLI and the test
//! suites use.

pub mod dimensions;
pub mod lp;
pub mod model;
pub mod params;
pub mod report;
pub mod scenario;
pub mod synthetic;
pub mod scalar;
pub mod table;

pub use scalar::Scalar;

/// `f64` linear program.
pub type LinearProgram = lp::LinearProgram<f64>;
/// `f64` solver solution.
pub type Solution = lp::Solution<f64>;
/// `f64` model dimensions.
pub type ModelDimensions = dimensions::ModelDimensions<f64>;
/// `f64` parameter store.
pub type ParameterStore = params::ParameterStore<f64>;
/// `f64` assembled model.
pub type AssembledModel = model::AssembledModel<f64>;
/// `f64` solution report.
pub type SolutionReport = report::SolutionReport<f64>;
