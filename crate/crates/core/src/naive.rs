//! Gap elimination over an explicitly listed family: the SimultEst and Verify
//! allocation programs and the NaiveGapElim loop.

use crate::convex::{solve_inverse_packing, PackingConstraint};
use crate::error::{Error, Result};
use crate::model::{Allocation, ArmSet, BestSetInstance, EmpiricalMeans};
use crate::run::{ResumableRun, RunFailure, Step};
use crate::stats::log_two_over;

/// Confidence parameter reserved for the elimination phase.
pub const DELTA0: f64 = 0.01;
/// Accuracy divisor of the elimination schedule.
pub const LAMBDA: f64 = 10.0;
/// Rounds after which a run gives up.
pub const ROUND_CAP: usize = 64;

fn check_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must lie in (0,1), got {v}")))
    }
}

/// Budgets estimating every pairwise gap in `sets` to ±eps, each with confidence 1 − delta.
pub fn simult_est(n: usize, sets: &[ArmSet], eps: f64, delta: f64) -> Result<Allocation> {
    check_unit("eps", eps)?;
    check_unit("delta", delta)?;
    let mut seen = std::collections::HashSet::new();
    for s in sets {
        if !seen.insert(s) {
            return Err(Error::InvalidInput(format!("set {{{s}}} listed twice")));
        }
    }
    let bound = eps * eps / (2.0 * log_two_over(delta));
    let mut constraints = Vec::new();
    for (i, a) in sets.iter().enumerate() {
        for b in &sets[i + 1..] {
            constraints.push(PackingConstraint::new(a.sym_diff(b), bound));
        }
    }
    Ok(solve_inverse_packing(n, &constraints)?.tau)
}

/// Verify budgets: for every (k, F_k) and A ∈ F_k, Σ_{i∈Ô⊕A} 1/m_i ≤ (ε_k/λ)²/(2 ln(2/δ)),
/// ε_k = 2^{-k}. The last family must be {conjectured}.
pub fn verify_alloc_with(
    n: usize,
    families: &[(usize, Vec<ArmSet>)],
    conjectured: &ArmSet,
    delta: f64,
    lambda: f64,
) -> Result<Allocation> {
    check_unit("delta", delta)?;
    match families.last() {
        Some((_, last)) if last.len() == 1 && &last[0] == conjectured => {}
        _ => return Err(Error::InvalidInput("final family must be the singleton {conjectured}".into())),
    }
    let log = log_two_over(delta);
    let mut constraints = Vec::new();
    for (k, fam) in families {
        let acc = 2f64.powi(-(*k as i32)) / lambda;
        let bound = acc * acc / (2.0 * log);
        for a in fam {
            if a != conjectured {
                constraints.push(PackingConstraint::new(conjectured.sym_diff(a), bound));
            }
        }
    }
    Ok(solve_inverse_packing(n, &constraints)?.tau)
}

/// `verify_alloc_with` at the elimination divisor λ = 10.
pub fn verify_alloc(n: usize, families: &[(usize, Vec<ArmSet>)], conjectured: &ArmSet, delta: f64) -> Result<Allocation> {
    verify_alloc_with(n, families, conjectured, delta, LAMBDA)
}

/// Per-round record.
#[derive(Clone, Debug, PartialEq)]
pub struct NaiveRound {
    pub r: usize,
    /// Indices (into the family list) of F_r.
    pub surviving: Vec<usize>,
    /// Σ of the ceiled allocation pulled this round.
    pub budget: u64,
    pub opt: f64,
    /// μ̂^{(r)}; unsampled arms read 0.
    pub means: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
enum Phase {
    Start,
    Eliminating,
    Verifying { candidate: usize },
    Finished,
}

/// Algorithm state for one execution of NaiveGapElim.
#[derive(Clone, Debug)]
pub struct NaiveGapElim {
    n: usize,
    family: Vec<ArmSet>,
    delta: f64,
    r: usize,
    surviving: Vec<usize>,
    history: Vec<Vec<usize>>,
    phase: Phase,
    rounds: Vec<NaiveRound>,
    pending: Vec<u64>,
}

impl NaiveGapElim {
    pub fn new(instance: &BestSetInstance, delta: f64) -> Result<Self> {
        check_unit("delta", delta)?;
        let family = instance.family().members()?.to_vec();
        Ok(NaiveGapElim {
            n: instance.n(),
            surviving: (0..family.len()).collect(),
            family,
            delta,
            r: 0,
            history: Vec::new(),
            phase: Phase::Start,
            rounds: Vec::new(),
            pending: Vec::new(),
        })
    }

    pub fn diagnostics(&self) -> &[NaiveRound] {
        &self.rounds
    }

    pub fn family(&self) -> &[ArmSet] {
        &self.family
    }

    fn ln_family(&self) -> f64 {
        (self.family.len() as f64).ln()
    }

    /// Start round r (already incremented): either a SimultEst batch or the verification batch.
    fn begin_round(&mut self) -> std::result::Result<Vec<u64>, RunFailure> {
        if self.r > ROUND_CAP {
            return Err(RunFailure::RoundCap(ROUND_CAP));
        }
        self.history.push(self.surviving.clone());
        if self.surviving.len() == 1 {
            let candidate = self.surviving[0];
            let families: Vec<(usize, Vec<ArmSet>)> = self
                .history
                .iter()
                .enumerate()
                .map(|(k, fam)| (k + 1, fam.iter().map(|&i| self.family[i].clone()).collect()))
                .collect();
            let delta_v = self.delta / (self.r as f64 * self.family.len() as f64);
            let alloc = verify_alloc(self.n, &families, &self.family[candidate], delta_v)?;
            self.phase = Phase::Verifying { candidate };
            return Ok(alloc.ceiled());
        }
        let eps_r = 2f64.powi(-(self.r as i32));
        // δ_r = δ0 / (10 r² |F|²)
        let delta_r = (DELTA0.ln() - (10.0 * (self.r * self.r) as f64).ln() - 2.0 * self.ln_family()).exp();
        let sets: Vec<ArmSet> = self.surviving.iter().map(|&i| self.family[i].clone()).collect();
        let alloc = simult_est(self.n, &sets, eps_r / LAMBDA, delta_r)?;
        self.phase = Phase::Eliminating;
        Ok(alloc.ceiled())
    }

    fn eliminate(&mut self, means: &EmpiricalMeans) {
        let eps_r = 2f64.powi(-(self.r as i32));
        let weights: Vec<f64> = self.surviving.iter().map(|&i| means.weight(&self.family[i])).collect();
        let opt = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let cut = opt - eps_r / 2.0 - 2.0 * eps_r / LAMBDA;
        self.rounds.push(NaiveRound {
            r: self.r,
            surviving: self.surviving.clone(),
            budget: std::mem::take(&mut self.pending).iter().sum(),
            opt,
            means: means.values().to_vec(),
        });
        self.surviving = self.surviving.iter().zip(&weights).filter(|(_, &w)| w >= cut).map(|(&i, _)| i).collect();
    }

    fn accept(&self, candidate: usize, means: &EmpiricalMeans) -> bool {
        let o = means.weight(&self.family[candidate]);
        for (k0, fam_k) in self.history.iter().enumerate() {
            let acc = 2f64.powi(-((k0 + 1) as i32)) / LAMBDA;
            let in_k: std::collections::HashSet<usize> = fam_k.iter().copied().collect();
            for (a, set) in self.family.iter().enumerate() {
                if !in_k.contains(&a) && o - means.weight(set) < acc {
                    return false;
                }
            }
        }
        true
    }

    fn next_request(&mut self) -> Step<ArmSet> {
        loop {
            self.r += 1;
            match self.begin_round() {
                Err(f) => {
                    self.phase = Phase::Finished;
                    return Step::Failed(f);
                }
                Ok(counts) => {
                    if counts.iter().all(|&c| c == 0) {
                        // nothing to sample: feed an empty batch straight back
                        self.pending = counts;
                        let empty = EmpiricalMeans::zeros(self.n);
                        match self.absorb(empty) {
                            Some(step) => return step,
                            None => continue,
                        }
                    }
                    self.pending = counts.clone();
                    return Step::Sample(counts);
                }
            }
        }
    }

    /// Process a finished batch; `None` means a new round should start.
    fn absorb(&mut self, means: EmpiricalMeans) -> Option<Step<ArmSet>> {
        match self.phase.clone() {
            Phase::Eliminating => {
                self.eliminate(&means);
                None
            }
            Phase::Verifying { candidate } => {
                self.phase = Phase::Finished;
                Some(if self.accept(candidate, &means) {
                    Step::Done(self.family[candidate].clone())
                } else {
                    Step::Failed(RunFailure::VerificationFailed)
                })
            }
            Phase::Start | Phase::Finished => panic!("batch delivered in phase {:?}", self.phase),
        }
    }
}

impl ResumableRun for NaiveGapElim {
    type Answer = ArmSet;

    fn resume(&mut self, observed: Option<EmpiricalMeans>) -> Step<ArmSet> {
        match (&self.phase, observed) {
            (Phase::Finished, _) => panic!("resume after termination"),
            (Phase::Start, None) => self.next_request(),
            (Phase::Start, Some(_)) => panic!("first resume must not carry samples"),
            (_, None) => panic!("resume without the requested samples"),
            (_, Some(means)) => match self.absorb(means) {
                Some(step) => step,
                None => self.next_request(),
            },
        }
    }

    fn rounds(&self) -> usize {
        self.r
    }
}
