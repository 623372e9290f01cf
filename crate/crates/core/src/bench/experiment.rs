use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::efficient::EfficientGapElim;
use crate::error::{Error, Result};
use crate::general::lp_sample::LpSample;
use crate::general::GeneralSampInstance;
use crate::hard::{ball_case_test, BallVerdict};
use crate::meta::parallel_simulate;
use crate::model::{derive_seed, BestSetInstance, GaussianEnvironment};
use crate::naive::NaiveGapElim;
use crate::run::{drive, ResumableRun, RunFailure, DEFAULT_PULL_CAP};

use super::baseline::UniformBaseline;
use super::instance::Instance;

/// Column order of the trial CSV.
pub const CSV_HEADER: [&str; 7] = ["trial", "seed", "answer", "correct", "total_pulls", "rounds", "wall_ms"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Base {
    Naive,
    Efficient,
    LpSample,
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Plain(Base),
    Ball,
    /// Run under the parallel simulation, which makes it δ-correct.
    Wrapped(Base),
}

impl Base {
    fn name(self) -> &'static str {
        match self {
            Base::Naive => "naive",
            Base::Efficient => "efficient",
            Base::LpSample => "lpsample",
            Base::Uniform => "uniform",
        }
    }
}

impl FromStr for Base {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(Base::Naive),
            "efficient" => Ok(Base::Efficient),
            "lpsample" => Ok(Base::LpSample),
            "uniform" => Ok(Base::Uniform),
            other => Err(Error::InvalidInput(format!("unknown algorithm `{other}`"))),
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    /// `naive`, `efficient`, `lpsample`, `uniform`, `ball`, or `wrapped-<base>`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "ball" {
            return Ok(Algorithm::Ball);
        }
        match s.strip_prefix("wrapped-") {
            Some(inner) => Ok(Algorithm::Wrapped(inner.parse()?)),
            None => Ok(Algorithm::Plain(s.parse()?)),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::Plain(b) => f.write_str(b.name()),
            Algorithm::Ball => f.write_str("ball"),
            Algorithm::Wrapped(b) => write!(f, "wrapped-{}", b.name()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub instance: Instance,
    pub algorithm: Algorithm,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    pub pull_cap: u64,
}

impl ExperimentConfig {
    pub fn new(instance: Instance, algorithm: Algorithm, delta: f64, trials: usize, seed: u64) -> Self {
        ExperimentConfig { instance, algorithm, delta, trials, seed, pull_cap: DEFAULT_PULL_CAP }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    /// Set as `i;j;k`, region index, `inside`/`outside`, or `failed:<reason>`.
    pub answer: String,
    pub correct: bool,
    pub total_pulls: u64,
    pub rounds: usize,
    pub wall_ms: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub algorithm: String,
    pub rows: Vec<TrialRow>,
}

fn quantile(sorted: &[u64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    let frac = pos - lo as f64;
    sorted[lo] as f64 * (1.0 - frac) + sorted[hi] as f64 * frac
}

impl RunReport {
    pub fn error_rate(&self) -> f64 {
        self.rows.iter().filter(|r| !r.correct).count() as f64 / self.rows.len() as f64
    }

    /// Rows whose run failed without answering.
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.answer.starts_with("failed")).count()
    }

    /// Linear-interpolated quantile of total pulls.
    pub fn pull_quantile(&self, q: f64) -> f64 {
        let mut p: Vec<u64> = self.rows.iter().map(|r| r.total_pulls).collect();
        p.sort_unstable();
        quantile(&p, q)
    }

    pub fn median_pulls(&self) -> f64 {
        self.pull_quantile(0.5)
    }

    pub fn mean_pulls(&self) -> f64 {
        self.rows.iter().map(|r| r.total_pulls as f64).sum::<f64>() / self.rows.len() as f64
    }

    /// With `with_wall = false` the wall-clock column is written as 0, which
    /// makes the file a pure function of the configuration.
    pub fn write_csv<W: Write>(&self, out: W, with_wall: bool) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(CSV_HEADER)?;
        for row in &self.rows {
            let mut row = row.clone();
            if !with_wall {
                row.wall_ms = 0;
            }
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        format!(
            "{}: trials={} error_rate={:.4} failures={} pulls p10={:.0} median={:.0} p90={:.0}",
            self.algorithm,
            self.rows.len(),
            self.error_rate(),
            self.failures(),
            self.pull_quantile(0.1),
            self.median_pulls(),
            self.pull_quantile(0.9)
        )
    }
}

struct Trial {
    answer: std::result::Result<String, RunFailure>,
    correct: bool,
    total_pulls: u64,
    rounds: usize,
}

fn failure_label(f: &RunFailure) -> String {
    let tag = match f {
        RunFailure::VerificationFailed => "verification".to_string(),
        RunFailure::RoundCap(c) => format!("round_cap_{c}"),
        RunFailure::PullCap(c) => format!("pull_cap_{c}"),
        RunFailure::StageOneCap(c) => format!("stage_one_cap_{c}"),
        RunFailure::AmbiguousEstimate => "ambiguous".to_string(),
        RunFailure::Solver(_) => "solver".to_string(),
    };
    format!("failed:{tag}")
}

/// One trial of a resumable algorithm, either driven directly or wrapped.
fn resumable<R, F, C>(
    mut make: F,
    check: C,
    cfg: &ExperimentConfig,
    wrapped: bool,
    seed: u64,
) -> Result<Trial>
where
    R: ResumableRun,
    F: FnMut(f64) -> Result<R>,
    C: Fn(&R::Answer) -> (String, bool),
{
    let profile = cfg.instance.profile();
    let (result, total_pulls, rounds) = if wrapped {
        let out = parallel_simulate(make, profile, cfg.delta, seed, cfg.pull_cap)?;
        (out.result, out.total_pulls, out.rounds)
    } else {
        let mut run = make(cfg.delta)?;
        let mut env = GaussianEnvironment::new(profile.clone(), seed);
        let out = drive(&mut run, &mut env, cfg.pull_cap);
        (out.result, out.total_pulls, out.rounds)
    };
    Ok(match result {
        Ok(a) => {
            let (answer, correct) = check(&a);
            Trial { answer: Ok(answer), correct, total_pulls, rounds }
        }
        Err(f) => Trial { answer: Err(f), correct: false, total_pulls, rounds },
    })
}

fn best_set_trial(inst: &BestSetInstance, base: Base, cfg: &ExperimentConfig, wrapped: bool, seed: u64) -> Result<Trial> {
    let check = |a: &crate::model::ArmSet| (a.to_string(), a == inst.optimum());
    match base {
        Base::Naive => resumable(|d| NaiveGapElim::new(inst, d), check, cfg, wrapped, seed),
        Base::Efficient => resumable(|d| EfficientGapElim::new(inst, d), check, cfg, wrapped, seed),
        Base::Uniform => resumable(|d| UniformBaseline::new(inst, d), check, cfg, wrapped, seed),
        Base::LpSample => unreachable!("translated before the trials start"),
    }
}

fn general_trial(inst: &GeneralSampInstance, cfg: &ExperimentConfig, wrapped: bool, seed: u64) -> Result<Trial> {
    let correct = inst.correct_region();
    resumable(|d| LpSample::new(inst, d), |a: &usize| (a.to_string(), *a == correct), cfg, wrapped, seed)
}

fn incompatible(alg: Algorithm, kind: &str) -> Error {
    Error::InvalidInput(format!("algorithm `{alg}` cannot run on a {kind} instance"))
}

/// Runs `trials` independent seeded trials in parallel. Trial `t` uses the
/// seed `derive_seed(seed, t)` for its environment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    if cfg.trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(Error::InvalidInput(format!("delta must lie in (0,1), got {}", cfg.delta)));
    }
    let alg = cfg.algorithm;
    // Best-Set instances run under LPSample through their top-set regions
    let translated = match (&cfg.instance, alg) {
        (Instance::BestSet(b), Algorithm::Plain(Base::LpSample) | Algorithm::Wrapped(Base::LpSample)) => {
            Some(GeneralSampInstance::from_best_set(b)?)
        }
        _ => None,
    };
    let trial = |t: usize| -> Result<TrialRow> {
        let seed = derive_seed(cfg.seed, t as u64);
        let start = Instant::now();
        let out = match (&cfg.instance, alg) {
            (_, Algorithm::Plain(Base::LpSample)) | (_, Algorithm::Wrapped(Base::LpSample)) => {
                let wrapped = matches!(alg, Algorithm::Wrapped(_));
                match (&translated, &cfg.instance) {
                    (Some(g), _) | (None, Instance::General(g)) => general_trial(g, cfg, wrapped, seed)?,
                    _ => return Err(incompatible(alg, cfg.instance.kind())),
                }
            }
            (Instance::BestSet(b), Algorithm::Plain(base)) => best_set_trial(b, base, cfg, false, seed)?,
            (Instance::BestSet(b), Algorithm::Wrapped(base)) => best_set_trial(b, base, cfg, true, seed)?,
            (Instance::Ball { profile, config }, Algorithm::Ball) => {
                let mut env = GaussianEnvironment::new(profile.clone(), seed);
                let res = ball_case_test(&mut env, config, cfg.delta)?;
                let inside = profile.means() == config.u.as_slice();
                let correct = (res.verdict == BallVerdict::Inside) == inside;
                let answer = match res.verdict {
                    BallVerdict::Inside => "inside",
                    BallVerdict::Outside => "outside",
                };
                Trial { answer: Ok(answer.into()), correct, total_pulls: res.total_pulls, rounds: res.stages as usize }
            }
            (inst, alg) => return Err(incompatible(alg, inst.kind())),
        };
        Ok(TrialRow {
            trial: t,
            seed,
            answer: out.answer.unwrap_or_else(|f| failure_label(&f)),
            correct: out.correct,
            total_pulls: out.total_pulls,
            rounds: out.rounds,
            wall_ms: start.elapsed().as_millis() as u64,
        })
    };
    let rows = (0..cfg.trials).into_par_iter().map(trial).collect::<Result<Vec<_>>>()?;
    Ok(RunReport { algorithm: alg.to_string(), rows })
}
