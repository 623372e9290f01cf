//! EfficientGapElim: survivors are {A : μ̂^{(r)}(A) ≥ θ_r}, never listed.

use crate::error::{Error, Result};
use crate::model::{Allocation, ArmSet, BestSetInstance, EmpiricalMeans};
use crate::oracles::FamilyOracle;
use crate::run::{ResumableRun, RunFailure, Step};

use super::programs::{simult_est_implicit, verify_implicit, ProgramSolution, VerifyTerm};
use super::subroutines::{check_approx, opt_approx, unique};
use crate::stats::log_two_over;

pub const DELTA0: f64 = 0.01;
pub const LAMBDA: f64 = 20.0;
pub const ROUND_CAP: usize = 64;

fn eps(r: usize) -> f64 {
    2f64.powi(-(r as i32))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EfficientRound {
    pub r: usize,
    pub theta: f64,
    pub opt: f64,
    pub budget: u64,
    pub ellipsoid_iterations: usize,
    pub cuts: usize,
}

#[derive(Clone, Debug, PartialEq)]
enum Phase {
    Start,
    Estimating { budget: u64, iterations: usize, cuts: usize },
    Verifying { o_hat: ArmSet },
    Finished,
}

/// SimultEst solution for one k, stored at a reference confidence. The program is
/// homogeneous in its bound, so other confidences rescale it exactly.
#[derive(Clone, Debug)]
struct Cached {
    log_ref: f64,
    solution: ProgramSolution,
}

#[derive(Clone, Debug)]
pub struct EfficientGapElim {
    oracle: FamilyOracle,
    n: usize,
    delta: f64,
    log_family: f64,
    r: usize,
    /// μ̂^{(0)}, μ̂^{(1)}, ...
    means: Vec<Vec<f64>>,
    /// θ_0, θ_1, ...
    thetas: Vec<f64>,
    cache: Vec<Cached>,
    phase: Phase,
    rounds: Vec<EfficientRound>,
}

impl EfficientGapElim {
    pub fn new(instance: &BestSetInstance, delta: f64) -> Result<Self> {
        Self::with_oracle(instance.family().clone(), delta)
    }

    pub fn with_oracle(oracle: FamilyOracle, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidInput(format!("delta must lie in (0,1), got {delta}")));
        }
        let n = oracle.n_arms();
        Ok(EfficientGapElim {
            log_family: oracle.log_count_upper(),
            oracle,
            n,
            delta,
            r: 0,
            means: vec![vec![0.0; n]],
            thetas: vec![0.0],
            cache: Vec::new(),
            phase: Phase::Start,
            rounds: Vec::new(),
        })
    }

    pub fn diagnostics(&self) -> &[EfficientRound] {
        &self.rounds
    }

    /// μ̂^{(k)} for k = 0..; index 0 is the all-zero start.
    pub fn means_history(&self) -> &[Vec<f64>] {
        &self.means
    }

    /// θ_k for k = 0..
    pub fn thresholds(&self) -> &[f64] {
        &self.thetas
    }

    fn theta_high(&self, k: usize) -> f64 {
        self.thetas[k] - eps(k) / LAMBDA
    }

    fn theta_low(&self, k: usize) -> f64 {
        self.thetas[k] - 2.0 * eps(k) / LAMBDA
    }

    /// Σ_{k≤r} SimultEst(μ̂^{(k−1)}, θ_{k−1} − ε_{k−1}/λ, θ_{k−1} − 2ε_{k−1}/λ, ε_k/λ, δ_r).
    fn estimation_budget(&mut self, delta_r: f64) -> Result<(Vec<u64>, usize, usize)> {
        let log_r = log_two_over(delta_r);
        let mut total = Allocation::zeros(self.n);
        let (mut iterations, mut cuts) = (0, 0);
        for k in 1..=self.r {
            if self.cache.len() < k {
                let solution = simult_est_implicit(
                    &self.oracle,
                    &self.means[k - 1],
                    self.theta_high(k - 1),
                    self.theta_low(k - 1),
                    eps(k) / LAMBDA,
                    delta_r,
                )?;
                iterations += solution.iterations;
                cuts += solution.cuts;
                self.cache.push(Cached { log_ref: log_r, solution });
            }
            let c = &self.cache[k - 1];
            let scale = log_r / c.log_ref;
            let scaled: Vec<f64> = c.solution.allocation.budget().iter().map(|m| m * scale).collect();
            total.add(&Allocation::new(scaled)?);
        }
        Ok((total.ceiled(), iterations, cuts))
    }

    fn begin_round(&mut self) -> Result<Step<ArmSet>> {
        self.r += 1;
        let r = self.r;
        if r > ROUND_CAP {
            return Ok(Step::Failed(RunFailure::RoundCap(ROUND_CAP)));
        }
        let prev = &self.means[r - 1];
        if unique(&self.oracle, prev, self.theta_high(r - 1))? {
            let o_hat = self.oracle.max_weight(prev)?;
            let terms: Vec<VerifyTerm> = (1..=r)
                .map(|k| VerifyTerm {
                    means: self.means[k - 1].clone(),
                    theta_high: self.theta_high(k - 1),
                    theta_low: self.theta_low(k - 1),
                    accuracy: eps(k) / LAMBDA,
                })
                .collect();
            // δ/(r|F|)
            let delta_v = (self.delta.ln() - (r as f64).ln() - self.log_family).exp();
            let sol = verify_implicit(&self.oracle, &o_hat, &terms, delta_v)?;
            self.phase = Phase::Verifying { o_hat };
            return Ok(Step::Sample(sol.allocation.ceiled()));
        }
        // δ_r = δ0/(10 r³ |F|²)
        let delta_r = (DELTA0.ln() - (10.0 * (r as f64).powi(3)).ln() - 2.0 * self.log_family).exp();
        let (counts, iterations, cuts) = self.estimation_budget(delta_r)?;
        self.phase = Phase::Estimating { budget: counts.iter().sum(), iterations, cuts };
        Ok(Step::Sample(counts))
    }

    fn finish_round(&mut self, budget: u64, iterations: usize, cuts: usize, sample: EmpiricalMeans) -> Result<()> {
        let r = self.r;
        let current = sample.values().to_vec();
        let best = opt_approx(&self.oracle, &self.means[r - 1], self.thetas[r - 1], &current, eps(r - 1) / LAMBDA)?;
        let opt = best.weight(&current);
        let theta = opt - (0.5 + 2.0 / LAMBDA) * eps(r);
        self.means.push(current);
        self.thetas.push(theta);
        self.rounds.push(EfficientRound { r, theta, opt, budget, ellipsoid_iterations: iterations, cuts });
        Ok(())
    }

    fn conclude(&self, o_hat: ArmSet, sample: EmpiricalMeans) -> Result<Step<ArmSet>> {
        for k in 1..self.r {
            let ok =
                check_approx(&self.oracle, &o_hat, &self.means[k], sample.values(), self.thetas[k], eps(k) / LAMBDA)?;
            if !ok {
                return Ok(Step::Failed(RunFailure::VerificationFailed));
            }
        }
        Ok(Step::Done(o_hat))
    }

    fn advance(&mut self, observed: Option<EmpiricalMeans>) -> Result<Step<ArmSet>> {
        match (std::mem::replace(&mut self.phase, Phase::Finished), observed) {
            (Phase::Start, None) => self.begin_round(),
            (Phase::Estimating { budget, iterations, cuts }, Some(s)) => {
                self.finish_round(budget, iterations, cuts, s)?;
                self.begin_round()
            }
            (Phase::Verifying { o_hat }, Some(s)) => self.conclude(o_hat, s),
            (p, o) => panic!("resume in phase {p:?} with samples present: {}", o.is_some()),
        }
    }
}

impl ResumableRun for EfficientGapElim {
    type Answer = ArmSet;

    fn resume(&mut self, observed: Option<EmpiricalMeans>) -> Step<ArmSet> {
        match self.advance(observed) {
            Ok(step @ Step::Sample(_)) => step,
            Ok(step) => {
                self.phase = Phase::Finished;
                step
            }
            Err(e) => {
                self.phase = Phase::Finished;
                Step::Failed(RunFailure::Solver(e))
            }
        }
    }

    fn rounds(&self) -> usize {
        self.r
    }
}
