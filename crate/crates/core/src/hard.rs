//! Hard-instance generators and the staged ball-case tester.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::general::{AnswerRegion, GeneralSampInstance};
use crate::model::{derive_seed, BestSetInstance, GaussianEnvironment, MeanProfile};
use crate::oracles::{FamilyOracle, PathGraph};

/// Families rejected before the generator gives up.
pub const DESIGN_RETRIES: usize = 100;

/// Equal-size subsets of `0..n` with pairwise intersections at most `ell / 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignFamily {
    pub n: usize,
    pub m: usize,
    pub ell: usize,
    pub sets: Vec<Vec<usize>>,
}

fn overlap(a: &[usize], b: &[usize]) -> usize {
    // both sorted
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

fn binomial_at_least(n: usize, k: usize, bound: usize) -> bool {
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
        if c >= bound as u128 {
            return true;
        }
    }
    c >= bound as u128
}

impl DesignFamily {
    /// Exhaustive check of the size and intersection invariants.
    pub fn verify(&self) -> bool {
        self.sets.len() == self.m
            && self.sets.iter().all(|s| s.len() == self.ell && s.windows(2).all(|w| w[0] < w[1]))
            && self.sets.iter().all(|s| s.last().is_none_or(|&x| x < self.n))
            && (0..self.m).all(|i| (i + 1..self.m).all(|j| 2 * overlap(&self.sets[i], &self.sets[j]) <= self.ell))
    }

    pub fn max_overlap(&self) -> usize {
        let mut best = 0;
        for i in 0..self.m {
            for j in i + 1..self.m {
                best = best.max(overlap(&self.sets[i], &self.sets[j]));
            }
        }
        best
    }
}

/// Draws `m` uniform `⌊n/10⌋`-subsets and restarts the whole family whenever a
/// new set meets an earlier one in more than half its elements.
pub fn nw_design(n: usize, m: usize, seed: u64) -> Result<DesignFamily> {
    if n < 20 || m < 2 {
        return Err(Error::InvalidInput(format!("design needs n >= 20 and m >= 2, got n={n}, m={m}")));
    }
    let ell = n / 10;
    let exhausted = || Error::Infeasible(format!("no design with n={n}, m={m} after {DESIGN_RETRIES} families"));
    // distinct sets are necessary, so more sets than subsets can never work
    if !binomial_at_least(n, ell, m) {
        return Err(exhausted());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    'family: for _ in 0..DESIGN_RETRIES {
        let mut sets: Vec<Vec<usize>> = Vec::with_capacity(m);
        while sets.len() < m {
            let mut s = sample(&mut rng, n, ell).into_vec();
            s.sort_unstable();
            if sets.iter().any(|t| 2 * overlap(t, &s) > ell) {
                continue 'family;
            }
            sets.push(s);
        }
        let family = DesignFamily { n, m, ell, sets };
        debug_assert!(family.verify());
        return Ok(family);
    }
    Err(exhausted())
}

/// Two disjoint sets of `k` arms each; the first has every mean at `eps`, the
/// second at zero.
pub fn disj_sets_instance(k: usize, eps: f64) -> Result<BestSetInstance> {
    if k == 0 || !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidInput(format!("disjoint sets need k >= 1 and eps > 0, got k={k}, eps={eps}")));
    }
    let mut means = vec![eps; k];
    means.extend(std::iter::repeat_n(0.0, k));
    BestSetInstance::explicit(means, vec![(0..k).collect(), (k..2 * k).collect()])
}

/// Same profile as [`disj_sets_instance`], with the family given as the s-t
/// paths of two parallel `k`-edge paths.
pub fn disj_paths_instance(k: usize, eps: f64) -> Result<BestSetInstance> {
    let explicit = disj_sets_instance(k, eps)?;
    BestSetInstance::new(explicit.profile().clone(), FamilyOracle::path(PathGraph::two_paths(k)))
}

/// Either one arm sits at `gap` (region 0, the points `gap·e_i`) or all arms
/// sit at zero (region 1, the origin).
pub fn or_instance(n: usize, gap: f64, special: Option<usize>) -> Result<GeneralSampInstance> {
    if n == 0 || !(gap > 0.0 && gap <= 1.0) {
        return Err(Error::InvalidInput(format!("or instance needs n >= 1 and gap in (0,1], got n={n}, gap={gap}")));
    }
    let mut means = vec![0.0; n];
    if let Some(i) = special {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        means[i] = gap;
    }
    let spikes = (0..n)
        .map(|i| {
            let mut p = vec![0.0; n];
            p[i] = gap;
            p
        })
        .collect();
    GeneralSampInstance::new(
        MeanProfile::new(means)?,
        vec![AnswerRegion::Points(spikes), AnswerRegion::Points(vec![vec![0.0; n]])],
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct BallCaseConfig {
    /// Centre of the ball; subtracted from every estimate.
    pub u: Vec<f64>,
    pub r: f64,
    pub c1: f64,
    pub c2: f64,
}

impl BallCaseConfig {
    pub fn new(u: Vec<f64>, r: f64) -> Result<Self> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::InvalidInput(format!("radius must lie in (0,1], got {r}")));
        }
        Ok(BallCaseConfig { u, r, c1: 8.0, c2: 32.0 })
    }

    pub fn stages(&self) -> u32 {
        let n = self.u.len();
        (n as f64).log2().ceil().max(0.0) as u32 + 2
    }

    /// Arms drawn at stage `k` (with replacement).
    pub fn stage_arms(&self, k: u32, delta: f64) -> u64 {
        let n = self.u.len() as f64;
        (self.c1 * n * n.ln() * 2f64.powi(-(k as i32)) * delta.recip().ln()).ceil() as u64
    }

    /// Pulls per drawn arm at stage `k`.
    pub fn stage_budget(&self, k: u32, delta: f64) -> u64 {
        let n = self.u.len() as f64;
        (self.c2 / (self.r * self.r) * 2f64.powi(k as i32) * (n.ln() + delta.recip().ln())).ceil() as u64
    }

    pub fn trigger(&self, k: u32) -> f64 {
        self.r * 2f64.powf(-(k as f64) / 2.0 - 1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BallVerdict {
    Inside,
    Outside,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BallCaseOutcome {
    pub verdict: BallVerdict,
    /// Stages executed, including the one that fired.
    pub stages: u32,
    pub total_pulls: u64,
}

/// Decides between `x = u` and `‖x − u‖ ≥ r`. Stage `k` looks for coordinates
/// with `|x_i − u_i|` around `r·2^{-k/2}` by sampling `~n 2^{-k}` random arms.
pub fn ball_case_test(env: &mut GaussianEnvironment, config: &BallCaseConfig, delta: f64) -> Result<BallCaseOutcome> {
    let n = env.n();
    if config.u.len() != n {
        return Err(Error::InvalidInput(format!("centre has {} coordinates, environment has {n} arms", config.u.len())));
    }
    if n < 2 || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidInput(format!("ball test needs n >= 2 and delta in (0,1), got n={n}, delta={delta}")));
    }
    let mut pick = ChaCha8Rng::seed_from_u64(derive_seed(env.seed(), u64::MAX));
    let start = env.total_pulls();
    for k in 1..=config.stages() {
        let draws = config.stage_arms(k, delta);
        let budget = config.stage_budget(k, delta);
        let trigger = config.trigger(k);
        // all draws of the stage are sampled before deciding
        let mut fired = false;
        for _ in 0..draws {
            let a = pick.random_range(0..n);
            let m = env.sample_mean(a, budget).expect("positive budget");
            fired |= (m - config.u[a]).abs() > trigger;
        }
        if fired {
            return Ok(BallCaseOutcome { verdict: BallVerdict::Outside, stages: k, total_pulls: env.total_pulls() - start });
        }
    }
    Ok(BallCaseOutcome { verdict: BallVerdict::Inside, stages: config.stages(), total_pulls: env.total_pulls() - start })
}
