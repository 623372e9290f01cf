//! Feasible-set families behind a common oracle interface: maximization,
//! second best, enumeration, exact-weight decision and Pareto curves.

mod graph;
pub mod pareto;

use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::model::{weights_tie, ArmSet};

pub use graph::{BipartiteGraph, PathGraph, UndirectedGraph};
pub use pareto::{integer_frontier, pareto_eps, ParetoPoint};

/// Largest family size the enumeration fallback will materialise.
pub const ENUMERATION_CAP: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    SpanningTree,
    BipartiteMatching,
    StPath,
    ExplicitList,
}

#[derive(Clone, Debug, PartialEq)]
enum Payload {
    Explicit { n: usize, sets: Vec<ArmSet> },
    Tree(UndirectedGraph),
    Matching(BipartiteGraph),
    Path(PathGraph),
}

/// Forced and forbidden arms for a restricted maximization.
#[derive(Clone, Debug, PartialEq)]
pub struct Restriction {
    pub required: Vec<bool>,
    pub excluded: Vec<bool>,
}

impl Restriction {
    pub fn none(n: usize) -> Self {
        Restriction { required: vec![false; n], excluded: vec![false; n] }
    }

    fn admits(&self, set: &ArmSet) -> bool {
        let mask_ok = set.iter().all(|i| !self.excluded[i]);
        mask_ok && self.required.iter().enumerate().all(|(i, &r)| !r || set.contains(i))
    }
}

/// A feasible family over n arms, explicit or backed by a graph structure.
#[derive(Clone, Debug)]
pub struct FamilyOracle {
    payload: Payload,
    members: Arc<OnceLock<Result<Vec<ArmSet>>>>,
}

impl PartialEq for FamilyOracle {
    fn eq(&self, other: &Self) -> bool {
        self.payload == other.payload
    }
}

impl FamilyOracle {
    fn wrap(payload: Payload) -> Self {
        FamilyOracle { payload, members: Arc::new(OnceLock::new()) }
    }

    /// Explicit list of distinct subsets of 0..n (may be empty at this level).
    pub fn explicit(n: usize, sets: Vec<ArmSet>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for s in &sets {
            s.check_range(n)?;
            if !seen.insert(s.clone()) {
                return Err(Error::InvalidInput(format!("set {{{s}}} appears twice in the family")));
            }
        }
        Ok(FamilyOracle::wrap(Payload::Explicit { n, sets }))
    }

    pub fn spanning_tree(graph: UndirectedGraph) -> Self {
        FamilyOracle::wrap(Payload::Tree(graph))
    }

    pub fn matching(graph: BipartiteGraph) -> Self {
        FamilyOracle::wrap(Payload::Matching(graph))
    }

    pub fn path(graph: PathGraph) -> Self {
        FamilyOracle::wrap(Payload::Path(graph))
    }

    pub fn kind(&self) -> FamilyKind {
        match &self.payload {
            Payload::Explicit { .. } => FamilyKind::ExplicitList,
            Payload::Tree(_) => FamilyKind::SpanningTree,
            Payload::Matching(_) => FamilyKind::BipartiteMatching,
            Payload::Path(_) => FamilyKind::StPath,
        }
    }

    pub fn n_arms(&self) -> usize {
        match &self.payload {
            Payload::Explicit { n, .. } => *n,
            Payload::Tree(g) => g.edges.len(),
            Payload::Matching(g) => g.edges.len(),
            Payload::Path(g) => g.edges.len(),
        }
    }

    pub fn explicit_sets(&self) -> Option<&[ArmSet]> {
        match &self.payload {
            Payload::Explicit { sets, .. } => Some(sets),
            _ => None,
        }
    }

    pub fn path_graph(&self) -> Option<&PathGraph> {
        match &self.payload {
            Payload::Path(g) => Some(g),
            _ => None,
        }
    }

    /// Upper bound on ln|F|.
    pub fn log_count_upper(&self) -> f64 {
        match &self.payload {
            Payload::Explicit { sets, .. } => (sets.len().max(1) as f64).ln(),
            Payload::Tree(g) => {
                let v = g.vertices as f64;
                if g.vertices <= 2 { 0.0 } else { (v - 2.0) * v.ln() }
            }
            Payload::Matching(g) => (1..=g.left.min(g.right)).map(|k| (k as f64).ln()).sum(),
            Payload::Path(g) => g.edges.len() as f64 * std::f64::consts::LN_2,
        }
    }

    fn check_weights(&self, w: &[f64]) -> Result<()> {
        if w.len() != self.n_arms() {
            return Err(Error::InvalidInput(format!(
                "weight vector has length {} but the family has {} arms",
                w.len(),
                self.n_arms()
            )));
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("weights must be finite".into()));
        }
        Ok(())
    }

    /// Every member of the family (cached), or an error past `ENUMERATION_CAP`.
    pub fn members(&self) -> Result<&[ArmSet]> {
        let cached = self.members.get_or_init(|| match &self.payload {
            Payload::Explicit { sets, .. } => Ok(sets.clone()),
            Payload::Tree(g) => g.enumerate_trees(ENUMERATION_CAP),
            Payload::Matching(g) => g.enumerate_matchings(ENUMERATION_CAP),
            Payload::Path(g) => g.enumerate_paths(ENUMERATION_CAP),
        });
        match cached {
            Ok(v) => Ok(v.as_slice()),
            Err(e) => Err(e.clone()),
        }
    }

    /// Heaviest admissible set from a list, ties broken by `ArmSet::tie_break_cmp`.
    fn scan<'a>(sets: impl Iterator<Item = &'a ArmSet>, w: &[f64]) -> Option<ArmSet> {
        let mut best: Option<(&ArmSet, f64)> = None;
        for s in sets {
            let v = s.weight(w);
            best = match best {
                None => Some((s, v)),
                Some((b, bv)) => {
                    if weights_tie(v, bv) {
                        if s.tie_break_cmp(b).is_lt() { Some((s, v)) } else { Some((b, bv)) }
                    } else if v > bv {
                        Some((s, v))
                    } else {
                        Some((b, bv))
                    }
                }
            };
        }
        best.map(|(s, _)| s.clone())
    }

    fn raw_max(&self, w: &[f64], r: &Restriction) -> Option<(f64, ArmSet)> {
        match &self.payload {
            Payload::Explicit { sets, .. } => {
                Self::scan(sets.iter().filter(|s| r.admits(s)), w).map(|s| (s.weight(w), s))
            }
            Payload::Tree(g) => g.max_spanning_tree(w, r).map(|s| (s.weight(w), s)),
            Payload::Matching(g) => g.max_perfect_matching(w, r),
            Payload::Path(g) => g.max_path(w, r),
        }
    }

    /// Among optimal sets, keep the one preferred by the tie-break: decide
    /// arms in index order, forcing each in whenever optimality survives.
    fn refine(&self, w: &[f64], r: &Restriction, best: f64) -> ArmSet {
        let mut r = r.clone();
        let mut last = None;
        for e in 0..self.n_arms() {
            if r.required[e] || r.excluded[e] {
                continue;
            }
            r.required[e] = true;
            match self.raw_max(w, &r) {
                Some((v, s)) if weights_tie(v, best) || v > best => last = Some(s),
                _ => {
                    r.required[e] = false;
                    r.excluded[e] = true;
                }
            }
        }
        match last {
            Some(s) => s,
            None => self.raw_max(w, &r).expect("restriction stays feasible").1,
        }
    }

    /// argmax over admissible members of Σ w_i, or `None` when nothing is admissible.
    pub fn max_weight_restricted(&self, w: &[f64], r: &Restriction) -> Result<Option<ArmSet>> {
        self.check_weights(w)?;
        let Some((value, set)) = self.raw_max(w, r) else { return Ok(None) };
        Ok(Some(match &self.payload {
            Payload::Explicit { .. } | Payload::Tree(_) => set,
            Payload::Matching(_) | Payload::Path(_) => self.refine(w, r, value),
        }))
    }

    /// argmax_{A∈F} Σ_{i∈A} w_i with deterministic tie-break.
    pub fn max_weight(&self, w: &[f64]) -> Result<ArmSet> {
        self.max_weight_restricted(w, &Restriction::none(self.n_arms()))?.ok_or_else(|| {
            Error::Infeasible(
                match self.kind() {
                    FamilyKind::SpanningTree => "graph is disconnected; no spanning tree",
                    FamilyKind::BipartiteMatching => "graph has no perfect matching",
                    FamilyKind::StPath => "no s-t path",
                    FamilyKind::ExplicitList => "family is empty",
                }
                .into(),
            )
        })
    }

    /// Best member other than `max_weight(w)`, or `None` for a single-member family.
    pub fn second_best_opt(&self, w: &[f64]) -> Result<Option<ArmSet>> {
        let best = self.max_weight(w)?;
        if let Payload::Explicit { sets, .. } = &self.payload {
            return Ok(Self::scan(sets.iter().filter(|s| **s != best), w));
        }
        let mut candidates = Vec::new();
        for a in best.iter() {
            let mut r = Restriction::none(self.n_arms());
            r.excluded[a] = true;
            if let Some(s) = self.max_weight_restricted(w, &r)? {
                candidates.push(s);
            }
        }
        Ok(Self::scan(candidates.iter(), w))
    }

    pub fn second_best(&self, w: &[f64]) -> Result<ArmSet> {
        self.second_best_opt(w)?.ok_or(Error::SingletonFamily)
    }

    pub fn is_singleton(&self) -> Result<bool> {
        Ok(self.second_best_opt(&vec![0.0; self.n_arms()])?.is_none())
    }

    /// Whether some member has integer weight exactly `target`.
    pub fn exact_decide(&self, w: &[u64], target: u64) -> Result<bool> {
        if w.len() != self.n_arms() {
            return Err(Error::InvalidInput("weight vector length mismatch".into()));
        }
        let total: u128 = w.iter().map(|&x| x as u128).sum();
        if target as u128 > total {
            return Ok(false);
        }
        if let Payload::Path(g) = &self.payload {
            return Ok(g.exact_sum(w, target));
        }
        Ok(self
            .members()?
            .iter()
            .any(|s| s.iter().map(|i| w[i] as u128).sum::<u128>() == target as u128))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_max(sets: &[ArmSet], w: &[f64]) -> ArmSet {
        FamilyOracle::scan(sets.iter(), w).unwrap()
    }

    fn four_cycle() -> FamilyOracle {
        FamilyOracle::spanning_tree(UndirectedGraph::new(4, vec![(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap())
    }

    #[test]
    fn explicit_examples() {
        let f = FamilyOracle::explicit(2, vec![ArmSet::new([0]), ArmSet::new([1])]).unwrap();
        assert_eq!(f.max_weight(&[1.0, 0.0]).unwrap(), ArmSet::new([0]));
        assert_eq!(f.second_best(&[1.0, 0.0]).unwrap(), ArmSet::new([1]));
        assert!(FamilyOracle::explicit(2, vec![ArmSet::new([0]), ArmSet::new([0])]).is_err());
        let single = FamilyOracle::explicit(1, vec![ArmSet::new([0])]).unwrap();
        assert_eq!(single.second_best(&[1.0]).unwrap_err(), Error::SingletonFamily);
    }

    #[test]
    fn four_cycle_trees_tie_deterministically() {
        let f = four_cycle();
        assert_eq!(f.members().unwrap().len(), 4);
        let t = f.max_weight(&[1.0; 4]).unwrap();
        assert_eq!(t, ArmSet::new([0, 1, 2]));
        assert_eq!(t, f.max_weight(&[1.0; 4]).unwrap());
    }

    #[test]
    fn triangle_shortest_path() {
        // s=0, t=2; edges 0:(0,1) len 1, 1:(1,2) len 1, 2:(0,2) len 3
        let f = FamilyOracle::path(PathGraph::new(3, vec![(0, 1), (1, 2), (0, 2)], 0, 2).unwrap());
        let lengths = [1.0, 1.0, 3.0];
        let neg: Vec<f64> = lengths.iter().map(|l: &f64| -l).collect();
        assert_eq!(f.max_weight(&neg).unwrap(), ArmSet::new([0, 1]));
    }

    #[test]
    fn infeasible_structures_error() {
        let disconnected = FamilyOracle::spanning_tree(UndirectedGraph::new(4, vec![(0, 1), (2, 3)]).unwrap());
        assert!(matches!(disconnected.max_weight(&[0.0, 0.0]), Err(Error::Infeasible(_))));
        let lopsided = FamilyOracle::matching(BipartiteGraph::new(2, 1, vec![(0, 0), (1, 0)]).unwrap());
        assert!(matches!(lopsided.max_weight(&[0.0, 0.0]), Err(Error::Infeasible(_))));
        let no_path = FamilyOracle::path(PathGraph::new(3, vec![(0, 1)], 0, 2).unwrap());
        assert!(matches!(no_path.max_weight(&[0.0]), Err(Error::Infeasible(_))));
    }

    #[test]
    fn exact_decide_examples() {
        // path A: edges 0,1 weights 1+2 = 3; path B: edges 2,3 weights 3+4 = 7
        let f = FamilyOracle::path(PathGraph::two_paths(2));
        let w = [1, 2, 3, 4];
        assert!(f.exact_decide(&w, 7).unwrap());
        assert!(f.exact_decide(&w, 3).unwrap());
        assert!(!f.exact_decide(&w, 5).unwrap());
        assert!(!f.exact_decide(&w, 100).unwrap());
        let e = FamilyOracle::explicit(2, vec![ArmSet::new([0, 1])]).unwrap();
        assert!(e.exact_decide(&[2, 3], 5).unwrap());
        let empty = FamilyOracle::explicit(3, vec![]).unwrap();
        for v in 0..5 {
            assert!(!empty.exact_decide(&[1, 1, 1], v).unwrap());
        }
    }

    #[test]
    fn log_count_upper_bounds_enumeration() {
        let k4 = UndirectedGraph::new(4, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let f = FamilyOracle::spanning_tree(k4);
        assert_eq!(f.members().unwrap().len(), 16);
        assert!((f.log_count_upper() - 16f64.ln()).abs() < 1e-12);
        let m = FamilyOracle::matching(BipartiteGraph::complete(4));
        assert_eq!(m.members().unwrap().len(), 24);
        assert!((m.log_count_upper() - 24f64.ln()).abs() < 1e-12);
        let p = FamilyOracle::path(PathGraph::new(4, vec![(0, 1), (0, 2), (1, 3), (2, 3), (1, 2)], 0, 3).unwrap());
        assert_eq!(p.members().unwrap().len(), 3);
        assert!(p.log_count_upper() >= 3f64.ln());
    }

    #[test]
    fn second_best_matches_enumeration_on_four_cycle() {
        let f = four_cycle();
        let w = [0.31, -0.7, 0.52, 0.05];
        let all = f.members().unwrap().to_vec();
        let best = brute_max(&all, &w);
        let rest: Vec<ArmSet> = all.into_iter().filter(|s| *s != best).collect();
        assert_eq!(f.max_weight(&w).unwrap(), best);
        assert_eq!(f.second_best(&w).unwrap(), brute_max(&rest, &w));
    }

    fn small_graphs() -> Vec<FamilyOracle> {
        vec![
            four_cycle(),
            FamilyOracle::spanning_tree(
                UndirectedGraph::new(5, vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2), (1, 3), (2, 4)]).unwrap(),
            ),
            FamilyOracle::matching(BipartiteGraph::new(3, 3, vec![(0, 0), (0, 1), (1, 1), (1, 2), (2, 0), (2, 2), (0, 2), (2, 1)]).unwrap()),
            FamilyOracle::path(
                PathGraph::new(5, vec![(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (2, 4), (3, 4), (0, 4)], 0, 4).unwrap(),
            ),
        ]
    }

    proptest! {
        #[test]
        fn max_and_second_best_agree_with_enumeration(raw in proptest::collection::vec(-4i32..5, 8)) {
            for f in small_graphs() {
                // coarse integer weights produce plenty of ties
                let w: Vec<f64> = raw[..f.n_arms()].iter().map(|&v| v as f64 * 0.5).collect();
                let all = f.members().unwrap().to_vec();
                let best = brute_max(&all, &w);
                prop_assert_eq!(f.max_weight(&w).unwrap(), best.clone());
                let rest: Vec<ArmSet> = all.iter().filter(|s| **s != best).cloned().collect();
                let second = f.second_best(&w).unwrap();
                prop_assert!(second != best);
                prop_assert!(weights_tie(second.weight(&w), brute_max(&rest, &w).weight(&w)));
            }
        }

        #[test]
        fn exact_decide_agrees_with_enumeration(raw in proptest::collection::vec(0u64..8, 8), target in 0u64..50) {
            for f in small_graphs() {
                let w = &raw[..f.n_arms()];
                let all = f.members().unwrap();
                let expect = all.iter().any(|s| s.iter().map(|i| w[i]).sum::<u64>() == target);
                prop_assert_eq!(f.exact_decide(w, target).unwrap(), expect);
            }
        }
    }
}
