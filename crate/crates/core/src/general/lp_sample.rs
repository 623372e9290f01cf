//! LPSample: round-robin until one region is left near the estimate, refine the
//! estimate, then verify that region with an LP-optimal allocation.

use crate::error::{Error, Result};
use crate::model::EmpiricalMeans;
use crate::run::{ResumableRun, RunFailure, Step};
use crate::stats::conf_radius;

use super::cutting::solve_alt_lp;
use super::regions::{region_min_sqdist, GeneralSampInstance};

/// Confidence used by stage 1 and the refinement.
pub const DELTA0: f64 = 0.01;
/// Scale of the stage-2 allocation.
pub const BETA: f64 = 64.0;
/// Stage-1 pulls after which a run gives up.
pub const STAGE_ONE_CAP: u64 = 10_000_000;

/// Quantities recorded along one execution.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LpSampleTrace {
    pub stage_one_steps: u64,
    pub r_t: f64,
    pub candidate: Option<usize>,
    /// Per-arm pulls of the refinement step.
    pub refine_pulls: u64,
    /// Σ x* of the verification LP.
    pub lp_value: f64,
    pub stage_two_pulls: u64,
    pub statistic: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq)]
enum Phase {
    Start,
    StageOne,
    Refining { candidate: usize },
    Verifying { candidate: usize, m: Vec<u64>, center: Vec<f64> },
    Finished,
}

/// Cached unit-weight distance from the estimate to one region.
#[derive(Clone, Debug)]
struct DistCache {
    at: Vec<f64>,
    dist: f64,
}

#[derive(Clone, Debug)]
pub struct LpSample<'a> {
    instance: &'a GeneralSampInstance,
    delta: f64,
    phase: Phase,
    t: u64,
    sums: Vec<f64>,
    cache: Vec<Option<DistCache>>,
    trace: LpSampleTrace,
}

fn norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

impl<'a> LpSample<'a> {
    pub fn new(instance: &'a GeneralSampInstance, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidInput(format!("delta must lie in (0,1), got {delta}")));
        }
        let n = instance.n();
        Ok(LpSample {
            instance,
            delta,
            phase: Phase::Start,
            t: 0,
            sums: vec![0.0; n],
            cache: vec![None; instance.regions().len()],
            trace: LpSampleTrace::default(),
        })
    }

    pub fn trace(&self) -> &LpSampleTrace {
        &self.trace
    }

    fn n(&self) -> usize {
        self.instance.n()
    }

    /// The unique region within distance `radius` of `point`, if exactly one is.
    /// Cached distances move by at most ‖point − cached point‖, which lets most
    /// steps skip the projections.
    fn unique_region_near(&mut self, point: &[f64], radius: f64) -> Result<Option<usize>> {
        let ones = vec![1.0; point.len()];
        let mut inside = Vec::new();
        let mut unsure = Vec::new();
        for (j, c) in self.cache.iter().enumerate() {
            match c {
                Some(c) => {
                    let drift = norm(&c.at, point);
                    if c.dist + drift <= radius {
                        inside.push(j);
                    } else if c.dist - drift <= radius {
                        unsure.push(j);
                    }
                }
                None => unsure.push(j),
            }
        }
        if inside.len() >= 2 {
            return Ok(None);
        }
        for j in unsure {
            let (d2, _) = region_min_sqdist(&self.instance.regions()[j], &ones, point)?;
            let dist = d2.max(0.0).sqrt();
            self.cache[j] = Some(DistCache { at: point.to_vec(), dist });
            if dist <= radius {
                inside.push(j);
                if inside.len() >= 2 {
                    return Ok(None);
                }
            }
        }
        Ok((inside.len() == 1).then(|| inside[0]))
    }

    fn stage_one(&mut self, batch: EmpiricalMeans) -> std::result::Result<Step<usize>, RunFailure> {
        self.t += 1;
        for (s, v) in self.sums.iter_mut().zip(batch.values()) {
            *s += v;
        }
        let t = self.t;
        let mean: Vec<f64> = self.sums.iter().map(|s| s / t as f64).collect();
        let r = conf_radius(t, self.n(), DELTA0)?;
        self.trace.stage_one_steps = t;
        self.trace.r_t = r;
        if let Some(candidate) = self.unique_region_near(&mean, 3.0 * r)? {
            self.trace.candidate = Some(candidate);
            let n = self.n() as f64;
            let alpha2 = r * r / (8.0 * n);
            let m = ((2.0 * n + 3.0 * (2.0 / DELTA0).ln()) / alpha2).ceil() as u64;
            self.trace.refine_pulls = m;
            self.phase = Phase::Refining { candidate };
            return Ok(Step::Sample(vec![m; self.n()]));
        }
        if t * self.n() as u64 >= STAGE_ONE_CAP {
            return Err(RunFailure::StageOneCap(STAGE_ONE_CAP));
        }
        Ok(Step::Sample(vec![1; self.n()]))
    }

    fn refine(&mut self, candidate: usize, batch: EmpiricalMeans) -> std::result::Result<Step<usize>, RunFailure> {
        let center = batch.values().to_vec();
        let alt = self.instance.alternatives(candidate);
        let ones = vec![1.0; self.n()];
        let r = self.trace.r_t;
        for (_, region) in &alt {
            if region_min_sqdist(region, &ones, &center)?.0 <= r * r {
                return Err(RunFailure::AmbiguousEstimate);
            }
        }
        let lp = solve_alt_lp(&center, &alt)?;
        self.trace.lp_value = lp.value;
        let scale = BETA * (self.delta.recip().ln() + self.n() as f64);
        let m: Vec<u64> = lp.x.iter().map(|x| (x * scale).ceil() as u64).collect();
        self.trace.stage_two_pulls = m.iter().sum();
        self.phase = Phase::Verifying { candidate, m: m.clone(), center };
        Ok(Step::Sample(m))
    }

    fn verify(&mut self, candidate: usize, m: &[u64], center: &[f64], batch: EmpiricalMeans) -> Step<usize> {
        let stat: f64 =
            m.iter().zip(batch.values()).zip(center).map(|((&mi, x), c)| mi as f64 * (x - c) * (x - c)).sum();
        let threshold = 36.0 * (self.delta.recip().ln() + self.n() as f64);
        self.trace.statistic = stat;
        self.trace.threshold = threshold;
        if stat <= threshold {
            Step::Done(candidate)
        } else {
            Step::Failed(RunFailure::VerificationFailed)
        }
    }
}

impl ResumableRun for LpSample<'_> {
    type Answer = usize;

    fn resume(&mut self, observed: Option<EmpiricalMeans>) -> Step<usize> {
        let phase = std::mem::replace(&mut self.phase, Phase::Finished);
        let step = match (phase, observed) {
            (Phase::Start, None) => {
                self.phase = Phase::StageOne;
                Ok(Step::Sample(vec![1; self.n()]))
            }
            (Phase::StageOne, Some(b)) => {
                self.phase = Phase::StageOne;
                self.stage_one(b)
            }
            (Phase::Refining { candidate }, Some(b)) => self.refine(candidate, b),
            (Phase::Verifying { candidate, m, center }, Some(b)) => Ok(self.verify(candidate, &m, &center, b)),
            (p, o) => panic!("resume in phase {p:?} with samples present: {}", o.is_some()),
        };
        match step {
            Ok(s @ Step::Sample(_)) => s,
            Ok(s) => {
                self.phase = Phase::Finished;
                s
            }
            Err(f) => {
                self.phase = Phase::Finished;
                Step::Failed(f)
            }
        }
    }

    fn rounds(&self) -> usize {
        self.t as usize
    }
}
