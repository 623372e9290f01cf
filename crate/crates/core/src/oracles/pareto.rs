//! Bi-objective Pareto curves over a family.
//!
//! The engine works on integer-rounded objectives: for s-t paths a label DP
//! keeps, per vertex, the non-dominated (f1, f2) pairs of partial paths; other
//! kinds enumerate their members. Approximate curves are obtained by choosing
//! the rounding unit and then thinning on a geometric grid.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::ArmSet;

use super::FamilyOracle;

/// A member together with its two objective values.
#[derive(Clone, Debug, PartialEq)]
pub struct ParetoPoint {
    pub set: ArmSet,
    pub f1: f64,
    pub f2: f64,
}

/// Largest magnitude allowed for a rounded objective entry.
const KEY_LIMIT: f64 = (1u64 << 50) as f64;

/// Round `f / unit` to the nearest integer, entrywise.
pub(crate) fn rounded_keys(f: &[f64], unit: f64) -> Result<Vec<i64>> {
    f.iter()
        .map(|&v| {
            let k = (v / unit).round();
            if k.abs() * f.len() as f64 > KEY_LIMIT || !k.is_finite() {
                Err(Error::InvalidInput("objective too fine for integer rounding at this size".into()))
            } else {
                Ok(k as i64)
            }
        })
        .collect()
}

/// Keep the entries not dominated in (a, b) (both maximised). Among equal
/// keys the earliest entry survives.
fn pareto_filter<T>(mut items: Vec<(i64, i64, T)>) -> Vec<(i64, i64, T)> {
    // stable sort keeps first-seen order among identical keys
    items.sort_by(|x, y| y.0.cmp(&x.0).then(y.1.cmp(&x.1)));
    let mut out = Vec::new();
    let mut best_b = i64::MIN;
    for item in items {
        if item.1 > best_b {
            best_b = item.1;
            out.push(item);
        }
    }
    out
}

/// Exact Pareto frontier of (Σ k1, Σ k2) over the family, both maximised.
/// One representative member per non-dominated value pair.
pub fn integer_frontier(oracle: &FamilyOracle, k1: &[i64], k2: &[i64]) -> Result<Vec<(ArmSet, i64, i64)>> {
    let n = oracle.n_arms();
    if k1.len() != n || k2.len() != n {
        return Err(Error::InvalidInput("objective length mismatch".into()));
    }
    if let Some(g) = oracle.path_graph() {
        // labels: (a, b, parent label, edge)
        let mut arena: Vec<(i64, i64, usize, usize)> = Vec::new();
        let mut at: Vec<Vec<usize>> = vec![Vec::new(); g.vertices];
        arena.push((0, 0, usize::MAX, usize::MAX));
        at[g.s].push(0);
        for &u in g.topo() {
            if at[u].is_empty() {
                continue;
            }
            let labels: Vec<(i64, i64, usize)> = at[u].iter().map(|&l| (arena[l].0, arena[l].1, l)).collect();
            let kept: Vec<usize> = pareto_filter(labels).into_iter().map(|x| x.2).collect();
            at[u] = kept.clone();
            if u == g.t {
                continue;
            }
            for &e in g.out_edges(u) {
                let v = g.edges[e].1;
                for &l in &kept {
                    let (a, b, _, _) = arena[l];
                    arena.push((a + k1[e], b + k2[e], l, e));
                    at[v].push(arena.len() - 1);
                }
            }
        }
        let mut out = Vec::new();
        for &l in &at[g.t] {
            let mut edges = Vec::new();
            let mut cur = l;
            while arena[cur].2 != usize::MAX {
                edges.push(arena[cur].3);
                cur = arena[cur].2;
            }
            out.push((ArmSet::new(edges), arena[l].0, arena[l].1));
        }
        return Ok(out);
    }
    let mut members: Vec<&ArmSet> = oracle.members()?.iter().collect();
    members.sort_by(|a, b| a.tie_break_cmp(b));
    let items: Vec<(i64, i64, &ArmSet)> = members
        .into_iter()
        .map(|s| (s.iter().map(|i| k1[i]).sum(), s.iter().map(|i| k2[i]).sum(), s))
        .collect();
    Ok(pareto_filter(items).into_iter().map(|(a, b, s)| (s.clone(), a, b)).collect())
}

/// (1+eps)-approximate Pareto curve for nonnegative objectives: every member A
/// has some returned p with f1(A) ≤ (1+eps) f1(p) and f2(A) ≤ (1+eps) f2(p).
pub fn pareto_eps(oracle: &FamilyOracle, f1: &[f64], f2: &[f64], eps: f64) -> Result<Vec<ParetoPoint>> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    let n = oracle.n_arms();
    if f1.len() != n || f2.len() != n {
        return Err(Error::InvalidInput("objective length mismatch".into()));
    }
    if f1.iter().chain(f2).any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidInput("pareto_eps needs finite nonnegative objectives".into()));
    }
    // Flooring with scale ⌈2n/(eps·min positive)⌉ loses at most eps/2 of any
    // nonzero value; the grid thinning below spends the remaining budget.
    let keys = |f: &[f64]| -> Result<Vec<i64>> {
        let min_pos = f.iter().copied().filter(|v| *v > 0.0).fold(f64::INFINITY, f64::min);
        if min_pos.is_infinite() {
            return Ok(vec![0; f.len()]);
        }
        let scale = (2.0 * n as f64 / (eps * min_pos)).ceil();
        f.iter()
            .map(|&v| {
                let k = (v * scale).floor();
                if k * n as f64 > KEY_LIMIT {
                    Err(Error::InvalidInput("objective range too wide for the exact-value backend".into()))
                } else {
                    Ok(k as i64)
                }
            })
            .collect()
    };
    let frontier = integer_frontier(oracle, &keys(f1)?, &keys(f2)?)?;
    let ratio = 1.0 + (eps / 2.0) / (1.0 + eps / 2.0);
    let cell = |v: f64| -> i64 {
        if v <= 0.0 { i64::MIN } else { (v.ln() / ratio.ln()).floor() as i64 }
    };
    let mut cells: HashMap<(i64, i64), ParetoPoint> = HashMap::new();
    let mut order = Vec::new();
    for (set, _, _) in frontier {
        let p = ParetoPoint { f1: set.weight(f1), f2: set.weight(f2), set };
        let key = (cell(p.f1), cell(p.f2));
        match cells.get(&key) {
            Some(q) if (q.f1, q.f2) >= (p.f1, p.f2) => {}
            Some(_) => {
                cells.insert(key, p);
            }
            None => {
                order.push(key);
                cells.insert(key, p);
            }
        }
    }
    Ok(order.into_iter().map(|k| cells.remove(&k).unwrap()).collect())
}
