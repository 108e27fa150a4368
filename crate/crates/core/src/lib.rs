//! Reciprocal sums `Σ ‖alpha · q‖^{-1}` over integer boxes and the lattice point
//! counts that control them.

pub mod alpha;
pub mod bounds;
pub mod enumerate;
pub mod error;
pub mod lattice;
pub mod phi;
pub mod realnum;
pub mod report;
pub mod sums;

pub use alpha::AlphaVector;
pub use bounds::{evaluate_bounds, fit_theorem_constants, shell_difference_check, BoundEntry, FitReport};
pub use enumerate::RunConfig;
pub use error::{Error, Result};
pub use lattice::{count_m, CountRecord, LatticeInstance};
pub use phi::{compute_phi_table, phi_at, PhiTable};
pub use sums::{dyadic_profile, sum_reciprocals, BoxSpec, DyadicProfile, SumResult};
pub use realnum::{IntervalValue, PrecisionBudget, RealSpec};
