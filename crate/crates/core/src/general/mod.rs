//! General-Samp: answer regions, the verification LP and the LPSample algorithm.

pub mod cutting;
pub mod lp_sample;
mod regions;

pub use regions::{region_min_sqdist, AnswerRegion, GeneralSampInstance, Halfspace};
