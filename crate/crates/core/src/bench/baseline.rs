//! Per-arm confidence baseline: sample every arm to the individual accuracy
//! that makes the empirical best set correct, then report it.

use crate::error::{Error, Result};
use crate::model::{ArmSet, BestSetInstance, EmpiricalMeans};
use crate::oracles::FamilyOracle;
use crate::run::{ResumableRun, Step};

/// Each arm gets `⌈2 ln(2n/δ)/η²⌉` pulls, where `η = min_A (μ(O) − μ(A))/|O ⊕ A|`
/// is the per-arm accuracy at which every estimate within `η` already ranks
/// O first. The baseline is told `η`, which only flatters it.
#[derive(Clone, Debug)]
pub struct UniformBaseline {
    oracle: FamilyOracle,
    per_arm: u64,
    n: usize,
    requested: bool,
}

impl UniformBaseline {
    pub fn new(instance: &BestSetInstance, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidInput(format!("delta must lie in (0,1), got {delta}")));
        }
        let eta = Self::accuracy(instance)?;
        let n = instance.n();
        let per_arm = if eta.is_finite() { (2.0 * (2.0 * n as f64 / delta).ln() / (eta * eta)).ceil() as u64 } else { 0 };
        Ok(UniformBaseline { oracle: instance.family().clone(), per_arm, n, requested: false })
    }

    /// min over rivals A of (μ(O) − μ(A))/|O ⊕ A|; infinite for one member.
    pub fn accuracy(instance: &BestSetInstance) -> Result<f64> {
        let o = instance.optimum();
        let mu = instance.means();
        Ok(instance
            .family()
            .members()?
            .iter()
            .filter(|a| *a != o)
            .map(|a| (o.weight(mu) - a.weight(mu)) / o.sym_diff(a).len() as f64)
            .fold(f64::INFINITY, f64::min))
    }

    pub fn pulls_per_arm(&self) -> u64 {
        self.per_arm
    }
}

impl ResumableRun for UniformBaseline {
    type Answer = ArmSet;

    fn resume(&mut self, observed: Option<EmpiricalMeans>) -> Step<ArmSet> {
        match observed {
            None if !self.requested && self.per_arm > 0 => {
                self.requested = true;
                Step::Sample(vec![self.per_arm; self.n])
            }
            obs => {
                let means = obs.map(|b| b.values().to_vec()).unwrap_or_else(|| vec![0.0; self.n]);
                match self.oracle.max_weight(&means) {
                    Ok(o) => Step::Done(o),
                    Err(e) => Step::Failed(e.into()),
                }
            }
        }
    }

    fn rounds(&self) -> usize {
        usize::from(self.requested)
    }
}
