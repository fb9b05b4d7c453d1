//! Checks run on computed trajectories. Each returns an
//! [`InequalityReport`] whose `worst_violation` is the smallest margin.

pub mod boundary;
pub mod bounds;
pub mod energy;
pub mod entropy;
pub mod report;
pub mod stability;
pub mod trace;

pub use boundary::{boundary_entropy_residual, boundary_entropy_residual_sampled, EntropyFamily};
pub use bounds::{max_principle_check, p_bounds_check};
pub use energy::{dp_energy, C0Fit, EnergyReport};
pub use entropy::{kruzkov_production, ProductionField};
pub use report::{InequalityReport, Location};
pub use stability::{l1_stability, measured_source_lipschitz};
pub use trace::{extract_trace, Side, TraceEstimate};
