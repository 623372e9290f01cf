//! Ground-truth instances, the simulated Gaussian environment and the
//! elementary weight/gap arithmetic shared by every algorithm.

use std::cmp::Ordering;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::oracles::{FamilyOracle, Restriction};

/// A sorted set of distinct arm indices (0-based).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ArmSet(Vec<usize>);

impl ArmSet {
    pub fn new<I: IntoIterator<Item = usize>>(items: I) -> Self {
        let mut v: Vec<usize> = items.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        ArmSet(v)
    }

    pub fn empty() -> Self {
        ArmSet(Vec::new())
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        ArmSet(mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &i in &self.0 {
            m[i] = true;
        }
        m
    }

    /// Elements of exactly one of the two sets, sorted.
    pub fn sym_diff(&self, other: &ArmSet) -> ArmSet {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i] < b[j]) {
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j] < a[i] {
                out.push(b[j]);
                j += 1;
            } else {
                i += 1;
                j += 1;
            }
        }
        ArmSet(out)
    }

    /// Elements of `self` not in `other`.
    pub fn minus(&self, other: &ArmSet) -> ArmSet {
        ArmSet(self.0.iter().copied().filter(|&i| !other.contains(i)).collect())
    }

    pub fn weight(&self, w: &[f64]) -> f64 {
        self.0.iter().map(|&i| w[i]).sum()
    }

    /// Tie-break order: `Less` means `self` is preferred. The preferred set is
    /// the one containing the smallest index on which the two sets differ.
    pub fn tie_break_cmp(&self, other: &ArmSet) -> Ordering {
        for (x, y) in self.0.iter().zip(other.0.iter()) {
            match x.cmp(y) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        other.0.len().cmp(&self.0.len())
    }

    pub fn check_range(&self, n: usize) -> Result<()> {
        match self.max_index() {
            Some(i) if i >= n => Err(Error::IndexOutOfRange { index: i, n }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ArmSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join(";"))
    }
}

impl From<Vec<usize>> for ArmSet {
    fn from(v: Vec<usize>) -> Self {
        ArmSet::new(v)
    }
}

/// Ground-truth arm means.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanProfile {
    means: Vec<f64>,
}

impl MeanProfile {
    pub fn new(means: Vec<f64>) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::InvalidInput("mean profile needs at least one arm".into()));
        }
        if let Some(i) = means.iter().position(|m| !m.is_finite()) {
            return Err(Error::InvalidInput(format!("mean of arm {i} is not finite")));
        }
        Ok(MeanProfile { means })
    }

    pub fn n(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        MeanProfile::new(self.means.iter().map(|m| m * c).collect())
    }
}

/// Σ_{i∈set} means[i].
pub fn set_weight(profile: &MeanProfile, set: &ArmSet) -> Result<f64> {
    set.check_range(profile.n())?;
    Ok(set.weight(profile.means()))
}

/// Two weights are treated as tied when they agree to this relative precision.
pub(crate) fn weights_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

/// A Best-Set instance: means plus a feasible family with a unique optimum.
#[derive(Clone, Debug)]
pub struct BestSetInstance {
    profile: MeanProfile,
    family: FamilyOracle,
    optimum: ArmSet,
}

impl BestSetInstance {
    pub fn new(profile: MeanProfile, family: FamilyOracle) -> Result<Self> {
        if family.n_arms() != profile.n() {
            return Err(Error::InvalidInput(format!(
                "family is over {} arms but the profile has {}",
                family.n_arms(),
                profile.n()
            )));
        }
        let optimum = family.max_weight(profile.means())?;
        if family.is_singleton()? {
            return Ok(BestSetInstance { profile, family, optimum });
        }
        let second = family.second_best(profile.means())?;
        let (wo, ws) = (optimum.weight(profile.means()), second.weight(profile.means()));
        if weights_tie(wo, ws) || ws > wo {
            return Err(Error::NonUniqueOptimum);
        }
        Ok(BestSetInstance { profile, family, optimum })
    }

    pub fn explicit(means: Vec<f64>, sets: Vec<Vec<usize>>) -> Result<Self> {
        let profile = MeanProfile::new(means)?;
        let family = FamilyOracle::explicit(profile.n(), sets.into_iter().map(ArmSet::new).collect())?;
        BestSetInstance::new(profile, family)
    }

    pub fn profile(&self) -> &MeanProfile {
        &self.profile
    }

    pub fn means(&self) -> &[f64] {
        self.profile.means()
    }

    pub fn family(&self) -> &FamilyOracle {
        &self.family
    }

    pub fn optimum(&self) -> &ArmSet {
        &self.optimum
    }

    pub fn n(&self) -> usize {
        self.profile.n()
    }

    /// μ(O) minus the best weight of any other member, or `None` for a single-set family.
    pub fn optimality_gap(&self) -> Result<Option<f64>> {
        if self.family.is_singleton()? {
            return Ok(None);
        }
        let second = self.family.second_best(self.means())?;
        Ok(Some(self.optimum.weight(self.means()) - second.weight(self.means())))
    }

    pub fn with_profile(&self, profile: MeanProfile) -> Result<Self> {
        BestSetInstance::new(profile, self.family.clone())
    }
}

/// Gap value of an arm; `Unconstrained` when no alternative set flips its membership.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gap {
    Finite(f64),
    Unconstrained,
}

impl Gap {
    pub fn finite(self) -> Option<f64> {
        match self {
            Gap::Finite(g) => Some(g),
            Gap::Unconstrained => None,
        }
    }
}

/// Chen et al.'s per-arm gap: the cost of flipping arm `arm`'s membership relative to O.
pub fn chen_gap(instance: &BestSetInstance, arm: usize) -> Result<Gap> {
    let n = instance.n();
    if arm >= n {
        return Err(Error::IndexOutOfRange { index: arm, n });
    }
    let o = instance.optimum();
    let mut restriction = Restriction::none(n);
    if o.contains(arm) {
        restriction.excluded[arm] = true;
    } else {
        restriction.required[arm] = true;
    }
    match instance.family().max_weight_restricted(instance.means(), &restriction)? {
        None => Ok(Gap::Unconstrained),
        Some(alt) => Ok(Gap::Finite(o.weight(instance.means()) - alt.weight(instance.means()))),
    }
}

/// The r ≥ 0 with gap ∈ (2^{-(r+1)}, 2^{-r}]; gaps above 1 map to 0.
pub fn group_index(gap: f64) -> Result<u32> {
    if !(gap > 0.0) || !gap.is_finite() {
        return Err(Error::InvalidInput(format!("gap must be positive and finite, got {gap}")));
    }
    if gap > 1.0 {
        return Ok(0);
    }
    let mut r = (-gap.log2()).floor().max(0.0) as i32;
    while gap > 2f64.powi(-r) {
        r -= 1;
    }
    while gap <= 2f64.powi(-(r + 1)) {
        r += 1;
    }
    Ok(r as u32)
}

/// Nonnegative real sample budget per arm.
#[derive(Clone, Debug, PartialEq)]
pub struct Allocation {
    budget: Vec<f64>,
}

impl Allocation {
    pub fn new(budget: Vec<f64>) -> Result<Self> {
        if let Some(i) = budget.iter().position(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::InvalidInput(format!("budget of arm {i} is {}", budget[i])));
        }
        Ok(Allocation { budget })
    }

    pub fn zeros(n: usize) -> Self {
        Allocation { budget: vec![0.0; n] }
    }

    pub fn budget(&self) -> &[f64] {
        &self.budget
    }

    pub fn total(&self) -> f64 {
        self.budget.iter().sum()
    }

    /// Integer pull counts (ceiling of each entry).
    pub fn ceiled(&self) -> Vec<u64> {
        self.budget.iter().map(|&b| b.ceil() as u64).collect()
    }

    pub fn add(&mut self, other: &Allocation) {
        for (a, b) in self.budget.iter_mut().zip(&other.budget) {
            *a += b;
        }
    }
}

/// Sample means of one batch of pulls.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeans {
    values: Vec<f64>,
    counts: Vec<u64>,
}

impl EmpiricalMeans {
    pub fn new(values: Vec<f64>, counts: Vec<u64>) -> Self {
        assert_eq!(values.len(), counts.len());
        EmpiricalMeans { values, counts }
    }

    pub fn zeros(n: usize) -> Self {
        EmpiricalMeans { values: vec![0.0; n], counts: vec![0; n] }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, i: usize) -> Option<f64> {
        (self.counts[i] > 0).then(|| self.values[i])
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Means with unsampled arms reported as 0. Unsampled arms only ever sit in the
    /// common part of the sets being compared, so they cancel in every difference.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weight(&self, set: &ArmSet) -> f64 {
        set.weight(&self.values)
    }
}

/// SplitMix64 step, used to derive independent seeds from a base seed.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Unit-variance Gaussian arms with one ChaCha stream per arm.
#[derive(Clone, Debug)]
pub struct GaussianEnvironment {
    profile: MeanProfile,
    seed: u64,
    streams: Vec<ChaCha8Rng>,
    pulls: Vec<u64>,
    total_pulls: u64,
}

impl GaussianEnvironment {
    pub fn new(profile: MeanProfile, seed: u64) -> Self {
        let streams = (0..profile.n())
            .map(|arm| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(arm as u64);
                rng
            })
            .collect();
        let n = profile.n();
        GaussianEnvironment { profile, seed, streams, pulls: vec![0; n], total_pulls: 0 }
    }

    pub fn n(&self) -> usize {
        self.profile.n()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn profile(&self) -> &MeanProfile {
        &self.profile
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }

    pub fn total_pulls(&self) -> u64 {
        self.total_pulls
    }

    /// One draw from arm `arm`.
    pub fn pull(&mut self, arm: usize) -> f64 {
        let z: f64 = StandardNormal.sample(&mut self.streams[arm]);
        self.pulls[arm] += 1;
        self.total_pulls += 1;
        self.profile.means()[arm] + z
    }

    /// Mean of `count` fresh draws from `arm`. The sum of `count` unit-variance
    /// draws is Normal(count·μ, count), so it is drawn in one step.
    pub fn sample_mean(&mut self, arm: usize, count: u64) -> Option<f64> {
        match count {
            0 => None,
            1 => Some(self.pull(arm)),
            c => {
                let z: f64 = StandardNormal.sample(&mut self.streams[arm]);
                self.pulls[arm] += c;
                self.total_pulls += c;
                Some(self.profile.means()[arm] + z / (c as f64).sqrt())
            }
        }
    }

    /// Fresh samples for every arm according to `counts`.
    pub fn sample(&mut self, counts: &[u64]) -> EmpiricalMeans {
        assert_eq!(counts.len(), self.n(), "count vector length mismatch");
        let values = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| self.sample_mean(i, c).unwrap_or(0.0))
            .collect();
        EmpiricalMeans::new(values, counts.to_vec())
    }
}
