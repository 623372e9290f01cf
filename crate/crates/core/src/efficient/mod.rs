//! Best-Set elimination over implicit families: threshold-represented
//! survivors, Pareto-based subroutines and Ellipsoid-solved allocations.

pub mod ellipsoid;
mod gap_elim;
pub mod programs;
pub mod subroutines;

pub use subroutines::{check_approx, opt_approx, opt_approx_split, unique, ThresholdFamily};
pub use gap_elim::{EfficientGapElim, EfficientRound};
