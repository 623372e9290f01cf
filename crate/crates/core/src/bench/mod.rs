//! Experiment plumbing: instance documents, seeded trial batches, CSV reports
//! and lower-bound rows.

pub mod baseline;
mod experiment;
pub mod instance;
mod lb;

pub use baseline::UniformBaseline;
pub use experiment::{run_experiment, Algorithm, Base, ExperimentConfig, RunReport, TrialRow, CSV_HEADER};
pub use instance::{load_instance, Instance, InstanceDoc};
pub use lb::{compute_lb_report, write_lb_csv, LbRow, LB_HEADER};
