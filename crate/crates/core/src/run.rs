//! Algorithms as resumable state machines, plus a plain driver.

use thiserror::Error;

use crate::error::Error;
use crate::model::{EmpiricalMeans, GaussianEnvironment};

/// Default guard on the number of pulls a single execution may use.
pub const DEFAULT_PULL_CAP: u64 = 1_000_000_000;

/// Why an execution ended without an answer.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum RunFailure {
    #[error("verification rejected the candidate")]
    VerificationFailed,
    #[error("round cap of {0} exceeded")]
    RoundCap(usize),
    #[error("pull cap of {0} exceeded")]
    PullCap(u64),
    #[error("stage-1 pull cap of {0} exceeded")]
    StageOneCap(u64),
    #[error("the refined estimate is too close to an alternative region")]
    AmbiguousEstimate,
    #[error(transparent)]
    Solver(#[from] Error),
}

/// What a run wants next.
#[derive(Debug, Clone, PartialEq)]
pub enum Step<A> {
    /// Fresh samples: `counts[i]` pulls of arm i.
    Sample(Vec<u64>),
    Done(A),
    Failed(RunFailure),
}

/// An execution that yields at every sample request. The first call passes
/// `None`; each later call passes the means of the batch just requested.
pub trait ResumableRun {
    type Answer: Clone;

    fn resume(&mut self, observed: Option<EmpiricalMeans>) -> Step<Self::Answer>;

    /// Rounds completed so far.
    fn rounds(&self) -> usize;
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome<A> {
    pub result: Result<A, RunFailure>,
    pub total_pulls: u64,
    pub rounds: usize,
}

/// Run to completion against `env`, failing once more than `pull_cap` pulls would be needed.
pub fn drive<R: ResumableRun>(run: &mut R, env: &mut GaussianEnvironment, pull_cap: u64) -> RunOutcome<R::Answer> {
    let start = env.total_pulls();
    let mut observed = None;
    let result = loop {
        match run.resume(observed.take()) {
            Step::Sample(counts) => {
                let need: u64 = counts.iter().sum();
                if env.total_pulls() - start + need > pull_cap {
                    break Err(RunFailure::PullCap(pull_cap));
                }
                observed = Some(env.sample(&counts));
            }
            Step::Done(a) => break Ok(a),
            Step::Failed(f) => break Err(f),
        }
    };
    RunOutcome { result, total_pulls: env.total_pulls() - start, rounds: run.rounds() }
}
