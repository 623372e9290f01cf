//! Answer regions for General-Samp instances and weighted squared-distance
//! minimisation over their closures.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{ArmSet, BestSetInstance, MeanProfile};

/// Closed halfspace a·x ≥ b.
#[derive(Clone, Debug, PartialEq)]
pub struct Halfspace {
    pub a: Vec<f64>,
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AnswerRegion {
    /// Intersection of closed halfspaces.
    Polyhedron(Vec<Halfspace>),
    /// Profiles under which `set` strictly beats every rival.
    TopSet { set: ArmSet, rivals: Vec<ArmSet> },
    /// Profiles with exactly `count` coordinates above `theta`.
    CountAbove { theta: f64, count: usize },
    /// A finite set of points.
    Points(Vec<Vec<f64>>),
}

const POINT_TOL: f64 = 1e-12;

impl AnswerRegion {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            AnswerRegion::Polyhedron(hs) => hs.iter().all(|h| dot(&h.a, x) >= h.b),
            AnswerRegion::TopSet { set, rivals } => {
                let v = set.weight(x);
                rivals.iter().all(|r| v > r.weight(x))
            }
            AnswerRegion::CountAbove { theta, count } => x.iter().filter(|v| **v > *theta).count() == *count,
            AnswerRegion::Points(ps) => {
                ps.iter().any(|p| p.iter().zip(x).all(|(a, b)| (a - b).abs() <= POINT_TOL))
            }
        }
    }

    fn check_dimension(&self, n: usize) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidInput(format!("{what} does not match {n} arms")));
        match self {
            AnswerRegion::Polyhedron(hs) => {
                if hs.iter().any(|h| h.a.len() != n || !h.b.is_finite() || h.a.iter().any(|v| !v.is_finite())) {
                    return bad("halfspace normal");
                }
            }
            AnswerRegion::TopSet { set, rivals } => {
                set.check_range(n)?;
                for r in rivals {
                    r.check_range(n)?;
                }
            }
            AnswerRegion::CountAbove { theta, count } => {
                if *count > n || !theta.is_finite() {
                    return bad("count_above parameters");
                }
            }
            AnswerRegion::Points(ps) => {
                if ps.is_empty() || ps.iter().any(|p| p.len() != n) {
                    return bad("point set");
                }
            }
        }
        Ok(())
    }

    /// Halfspaces 1_set·x − 1_rival·x ≥ 0 describing the closure of a top-set region.
    fn top_set_halfspaces(set: &ArmSet, rivals: &[ArmSet], n: usize) -> Vec<Halfspace> {
        rivals
            .iter()
            .map(|r| {
                let mut a = vec![0.0; n];
                for i in set.iter() {
                    a[i] += 1.0;
                }
                for i in r.iter() {
                    a[i] -= 1.0;
                }
                Halfspace { a, b: 0.0 }
            })
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn weighted_sqdist(w: &[f64], x: &[f64], c: &[f64]) -> f64 {
    w.iter().zip(x).zip(c).map(|((w, x), c)| w * (x - c) * (x - c)).sum()
}

/// min over the region's closure of Σ w_i (x_i − c_i)², with a minimiser.
pub fn region_min_sqdist(region: &AnswerRegion, w: &[f64], c: &[f64]) -> Result<(f64, Vec<f64>)> {
    let n = c.len();
    if w.len() != n {
        return Err(Error::InvalidInput("weight and centre lengths differ".into()));
    }
    if w.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
        return Err(Error::InvalidInput("weights must be finite and nonnegative".into()));
    }
    region.check_dimension(n)?;
    match region {
        AnswerRegion::Polyhedron(hs) => project_polyhedron(hs, w, c),
        AnswerRegion::TopSet { set, rivals } => {
            project_polyhedron(&AnswerRegion::top_set_halfspaces(set, rivals, n), w, c)
        }
        AnswerRegion::CountAbove { theta, count } => {
            // Closure: at least `count` coordinates ≥ θ and at least n − count ≤ θ.
            let up = |i: usize| w[i] * (theta - c[i]).max(0.0).powi(2);
            let down = |i: usize| w[i] * (c[i] - theta).max(0.0).powi(2);
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| (up(i) - down(i)).total_cmp(&(up(j) - down(j))).then(i.cmp(&j)));
            let mut x = c.to_vec();
            for (rank, &i) in order.iter().enumerate() {
                x[i] = if rank < *count { c[i].max(*theta) } else { c[i].min(*theta) };
            }
            Ok((weighted_sqdist(w, &x, c), x))
        }
        AnswerRegion::Points(ps) => {
            let mut best: Option<(f64, &Vec<f64>)> = None;
            for p in ps {
                let v = weighted_sqdist(w, p, c);
                if best.is_none_or(|(b, _)| v < b) {
                    best = Some((v, p));
                }
            }
            let (v, p) = best.expect("point set is nonempty");
            Ok((v, p.clone()))
        }
    }
}

const HILDRETH_SWEEPS: usize = 50_000;

/// Weighted projection onto {x : a_j·x ≥ b_j}: Hildreth's dual coordinate
/// ascent, then an equality-constrained solve on the detected active set.
fn project_polyhedron(hs: &[Halfspace], w: &[f64], c: &[f64]) -> Result<(f64, Vec<f64>)> {
    let n = c.len();
    let violation = |x: &[f64]| hs.iter().map(|h| h.b - dot(&h.a, x)).fold(0.0, f64::max);
    if violation(c) <= 0.0 {
        return Ok((0.0, c.to_vec()));
    }
    let wmax = w.iter().copied().fold(0.0, f64::max);
    // tiny regularisation keeps the minimiser unique on zero-weight coordinates
    let wr: Vec<f64> = if wmax > 0.0 { w.iter().map(|v| v.max(1e-9 * wmax)).collect() } else { vec![1.0; n] };
    let winv: Vec<f64> = wr.iter().map(|v| 1.0 / v).collect();
    let q: Vec<f64> = hs.iter().map(|h| h.a.iter().zip(&winv).map(|(a, wi)| a * a * wi).sum()).collect();
    let scale = hs.iter().map(|h| h.b.abs()).fold(0.0, f64::max)
        + c.iter().map(|v| v.abs()).fold(0.0, f64::max)
        + 1.0;
    let tol = 1e-13 * scale;

    let mut lambda = vec![0.0; hs.len()];
    let mut x = c.to_vec();
    let mut converged = false;
    for _ in 0..HILDRETH_SWEEPS {
        let mut moved = 0.0f64;
        for (j, h) in hs.iter().enumerate() {
            if q[j] == 0.0 {
                continue;
            }
            let r = h.b - dot(&h.a, &x);
            let step = (2.0 * r / q[j]).max(-lambda[j]);
            if step == 0.0 {
                continue;
            }
            lambda[j] += step;
            for i in 0..n {
                x[i] += 0.5 * step * winv[i] * h.a[i];
            }
            moved = moved.max((step * q[j]).abs());
        }
        if violation(&x) <= tol && moved <= tol {
            converged = true;
            break;
        }
    }
    if let Some(polished) = polish(hs, &wr, c, &lambda) {
        if violation(&polished) <= 1e-10 * scale {
            x = polished;
            converged = true;
        }
    }
    if !converged && violation(&x) > 1e-8 * scale {
        return Err(Error::NonConvergence("polyhedral projection hit its sweep cap".into()));
    }
    Ok((weighted_sqdist(w, &x, c), x))
}

/// Solve the projection with the constraints carrying positive multipliers as equalities.
fn polish(hs: &[Halfspace], wr: &[f64], c: &[f64], lambda: &[f64]) -> Option<Vec<f64>> {
    let lmax = lambda.iter().copied().fold(0.0, f64::max);
    if lmax <= 0.0 {
        return None;
    }
    let active: Vec<usize> = (0..hs.len()).filter(|&j| lambda[j] > 1e-12 * lmax).collect();
    let n = c.len();
    let k = active.len();
    let a = DMatrix::from_fn(k, n, |r, i| hs[active[r]].a[i]);
    let winv = DVector::from_iterator(n, wr.iter().map(|v| 1.0 / v));
    let awi = DMatrix::from_fn(k, n, |r, i| a[(r, i)] * winv[i]);
    let gram = &awi * a.transpose();
    let cv = DVector::from_column_slice(c);
    let rhs = DVector::from_iterator(k, (0..k).map(|r| 2.0 * (hs[active[r]].b - a.row(r).dot(&cv.transpose()))));
    let mu = gram.svd(true, true).solve(&rhs, 1e-12).ok()?;
    if mu.iter().any(|m| *m < -1e-9 * lmax.max(1.0)) {
        return None;
    }
    let shift = awi.transpose() * mu * 0.5;
    Some((0..n).map(|i| c[i] + shift[i]).collect())
}

/// A General-Samp instance: a mean profile in exactly one of disjoint regions.
#[derive(Clone, Debug)]
pub struct GeneralSampInstance {
    profile: MeanProfile,
    regions: Vec<AnswerRegion>,
    correct: usize,
}

impl GeneralSampInstance {
    pub fn new(profile: MeanProfile, regions: Vec<AnswerRegion>) -> Result<Self> {
        if regions.len() < 2 {
            return Err(Error::InvalidInput("a General-Samp instance needs at least two regions".into()));
        }
        for r in &regions {
            r.check_dimension(profile.n())?;
        }
        let hits: Vec<usize> = (0..regions.len()).filter(|&k| regions[k].contains(profile.means())).collect();
        match hits.as_slice() {
            [k] => Ok(GeneralSampInstance { correct: *k, profile, regions }),
            [] => Err(Error::InvalidInput("mean profile lies in no answer region".into())),
            _ => Err(Error::InvalidInput(format!("mean profile lies in {} answer regions", hits.len()))),
        }
    }

    /// Top-set regions, one per member of the family, with the rivals filled in.
    pub fn top_set_regions(sets: &[ArmSet]) -> Vec<AnswerRegion> {
        sets.iter()
            .enumerate()
            .map(|(k, s)| AnswerRegion::TopSet {
                set: s.clone(),
                rivals: sets.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, r)| r.clone()).collect(),
            })
            .collect()
    }

    /// The General-Samp form of a Best-Set instance; region k is member k of the family.
    pub fn from_best_set(instance: &BestSetInstance) -> Result<Self> {
        let sets = instance.family().members()?.to_vec();
        GeneralSampInstance::new(instance.profile().clone(), GeneralSampInstance::top_set_regions(&sets))
    }

    pub fn profile(&self) -> &MeanProfile {
        &self.profile
    }

    pub fn n(&self) -> usize {
        self.profile.n()
    }

    pub fn regions(&self) -> &[AnswerRegion] {
        &self.regions
    }

    pub fn correct_region(&self) -> usize {
        self.correct
    }

    /// Regions other than `answer`, with their indices.
    pub fn alternatives(&self, answer: usize) -> Vec<(usize, &AnswerRegion)> {
        self.regions.iter().enumerate().filter(|(k, _)| *k != answer).collect()
    }

    /// Euclidean distance from the profile to the closure of the alternative regions.
    pub fn distance_to_alt(&self) -> Result<f64> {
        let ones = vec![1.0; self.n()];
        let mut best = f64::INFINITY;
        for (_, r) in self.alternatives(self.correct) {
            best = best.min(region_min_sqdist(r, &ones, self.profile.means())?.0);
        }
        Ok(best.sqrt())
    }
}
