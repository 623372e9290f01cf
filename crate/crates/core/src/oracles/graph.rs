//! Graph payloads and the per-kind maximization/enumeration routines.

use crate::error::{Error, Result};
use crate::model::ArmSet;

use super::Restriction;

/// Union-find with an undo log (no path compression), for enumeration.
struct RollbackDsu {
    parent: Vec<usize>,
    size: Vec<usize>,
    log: Vec<Option<(usize, usize)>>,
}

impl RollbackDsu {
    fn new(n: usize) -> Self {
        RollbackDsu { parent: (0..n).collect(), size: vec![1; n], log: Vec::new() }
    }

    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            self.log.push(None);
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.log.push(Some((ra, rb)));
        true
    }

    fn undo(&mut self) {
        if let Some(Some((ra, rb))) = self.log.pop() {
            self.parent[rb] = rb;
            self.size[ra] -= self.size[rb];
        }
    }
}

/// Simple undirected graph; arms are edges.
#[derive(Clone, Debug, PartialEq)]
pub struct UndirectedGraph {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

impl UndirectedGraph {
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if vertices == 0 {
            return Err(Error::InvalidInput("graph needs at least one vertex".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for (i, &(u, v)) in edges.iter().enumerate() {
            if u >= vertices || v >= vertices {
                return Err(Error::InvalidInput(format!("edge {i} has an endpoint outside 0..{vertices}")));
            }
            if u == v {
                return Err(Error::InvalidInput(format!("edge {i} is a self loop")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidInput(format!("edge {i} duplicates an earlier edge")));
            }
        }
        Ok(UndirectedGraph { vertices, edges })
    }

    /// Kruskal over edges sorted by (weight desc, index asc), with forced and
    /// forbidden edges. Returns `None` if no spanning tree satisfies the restriction.
    pub(crate) fn max_spanning_tree(&self, w: &[f64], r: &Restriction) -> Option<ArmSet> {
        let mut dsu = RollbackDsu::new(self.vertices);
        let mut chosen = Vec::with_capacity(self.vertices.saturating_sub(1));
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            if r.required[e] {
                if r.excluded[e] || !dsu.union(u, v) {
                    return None;
                }
                chosen.push(e);
            }
        }
        let mut order: Vec<usize> = (0..self.edges.len()).filter(|&e| !r.required[e] && !r.excluded[e]).collect();
        order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
        for e in order {
            let (u, v) = self.edges[e];
            if dsu.union(u, v) {
                chosen.push(e);
            }
        }
        (chosen.len() + 1 == self.vertices).then(|| ArmSet::new(chosen))
    }

    pub(crate) fn enumerate_trees(&self, cap: usize) -> Result<Vec<ArmSet>> {
        fn rec(
            g: &UndirectedGraph,
            e: usize,
            dsu: &mut RollbackDsu,
            stack: &mut Vec<usize>,
            out: &mut Vec<ArmSet>,
            cap: usize,
        ) -> Result<()> {
            let need = g.vertices - 1;
            if stack.len() == need {
                if out.len() >= cap {
                    return Err(Error::EnumerationCap { cap });
                }
                out.push(ArmSet::new(stack.iter().copied()));
                return Ok(());
            }
            if e == g.edges.len() || stack.len() + (g.edges.len() - e) < need {
                return Ok(());
            }
            let (u, v) = g.edges[e];
            if dsu.union(u, v) {
                stack.push(e);
                rec(g, e + 1, dsu, stack, out, cap)?;
                stack.pop();
            }
            dsu.undo();
            rec(g, e + 1, dsu, stack, out, cap)
        }
        let mut out = Vec::new();
        let mut dsu = RollbackDsu::new(self.vertices);
        rec(self, 0, &mut dsu, &mut Vec::new(), &mut out, cap)?;
        Ok(out)
    }
}

/// Bipartite graph with `left` and `right` vertices; arms are edges (l, r).
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteGraph {
    pub left: usize,
    pub right: usize,
    pub edges: Vec<(usize, usize)>,
}

impl BipartiteGraph {
    pub fn new(left: usize, right: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for (i, &(l, r)) in edges.iter().enumerate() {
            if l >= left || r >= right {
                return Err(Error::InvalidInput(format!("edge {i} has an endpoint outside the bipartition")));
            }
            if !seen.insert((l, r)) {
                return Err(Error::InvalidInput(format!("edge {i} duplicates an earlier edge")));
            }
        }
        Ok(BipartiteGraph { left, right, edges })
    }

    /// Complete bipartite graph K_{k,k}, edge (l, r) at index l·k + r.
    pub fn complete(k: usize) -> Self {
        let edges = (0..k).flat_map(|l| (0..k).map(move |r| (l, r))).collect();
        BipartiteGraph { left: k, right: k, edges }
    }

    /// Maximum-weight perfect matching (Hungarian algorithm on negated weights);
    /// returns the value and the matching, or `None` if none satisfies the restriction.
    pub(crate) fn max_perfect_matching(&self, w: &[f64], r: &Restriction) -> Option<(f64, ArmSet)> {
        if self.left != self.right {
            return None;
        }
        let n = self.left;
        if n == 0 {
            return Some((0.0, ArmSet::empty()));
        }
        let total: f64 = w.iter().map(|v| v.abs()).sum();
        let big = (total + 1.0) * 4.0 * (n as f64 + 1.0);
        let mut cost = vec![vec![big; n]; n];
        let mut edge_at = vec![vec![usize::MAX; n]; n];
        let mut row_forced = vec![usize::MAX; n];
        let mut col_forced = vec![usize::MAX; n];
        for (e, &(l, rr)) in self.edges.iter().enumerate() {
            if r.required[e] {
                if r.excluded[e] || row_forced[l] != usize::MAX || col_forced[rr] != usize::MAX {
                    return None;
                }
                row_forced[l] = rr;
                col_forced[rr] = l;
            }
        }
        for (e, &(l, rr)) in self.edges.iter().enumerate() {
            if r.excluded[e] {
                continue;
            }
            if row_forced[l] != usize::MAX && row_forced[l] != rr {
                continue;
            }
            if col_forced[rr] != usize::MAX && col_forced[rr] != l {
                continue;
            }
            cost[l][rr] = -w[e];
            edge_at[l][rr] = e;
        }
        let assignment = hungarian(&cost);
        let mut chosen = Vec::with_capacity(n);
        let mut value = 0.0;
        for (l, &rr) in assignment.iter().enumerate() {
            let e = edge_at[l][rr];
            if e == usize::MAX {
                return None;
            }
            chosen.push(e);
            value += w[e];
        }
        Some((value, ArmSet::new(chosen)))
    }

    pub(crate) fn enumerate_matchings(&self, cap: usize) -> Result<Vec<ArmSet>> {
        if self.left != self.right {
            return Ok(Vec::new());
        }
        let mut by_left: Vec<Vec<usize>> = vec![Vec::new(); self.left];
        for (e, &(l, _)) in self.edges.iter().enumerate() {
            by_left[l].push(e);
        }
        fn rec(
            g: &BipartiteGraph,
            by_left: &[Vec<usize>],
            l: usize,
            used: &mut Vec<bool>,
            stack: &mut Vec<usize>,
            out: &mut Vec<ArmSet>,
            cap: usize,
        ) -> Result<()> {
            if l == g.left {
                if out.len() >= cap {
                    return Err(Error::EnumerationCap { cap });
                }
                out.push(ArmSet::new(stack.iter().copied()));
                return Ok(());
            }
            for &e in &by_left[l] {
                let r = g.edges[e].1;
                if !used[r] {
                    used[r] = true;
                    stack.push(e);
                    rec(g, by_left, l + 1, used, stack, out, cap)?;
                    stack.pop();
                    used[r] = false;
                }
            }
            Ok(())
        }
        let mut out = Vec::new();
        rec(self, &by_left, 0, &mut vec![false; self.right], &mut Vec::new(), &mut out, cap)?;
        Ok(out)
    }
}

/// Min-cost assignment on a square matrix; returns the column of each row.
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of_row = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            col_of_row[p[j] - 1] = j - 1;
        }
    }
    col_of_row
}

/// Directed acyclic graph with source and sink; arms are edges, members are s-t paths.
#[derive(Clone, Debug, PartialEq)]
pub struct PathGraph {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub s: usize,
    pub t: usize,
    topo: Vec<usize>,
    pos: Vec<usize>,
    out: Vec<Vec<usize>>,
}

impl PathGraph {
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>, s: usize, t: usize) -> Result<Self> {
        if s >= vertices || t >= vertices {
            return Err(Error::InvalidInput("source or sink outside the vertex range".into()));
        }
        if s == t {
            return Err(Error::InvalidInput("source and sink must differ".into()));
        }
        let mut out = vec![Vec::new(); vertices];
        let mut indeg = vec![0usize; vertices];
        for (e, &(u, v)) in edges.iter().enumerate() {
            if u >= vertices || v >= vertices {
                return Err(Error::InvalidInput(format!("edge {e} has an endpoint outside 0..{vertices}")));
            }
            out[u].push(e);
            indeg[v] += 1;
        }
        let mut queue: std::collections::VecDeque<usize> = (0..vertices).filter(|&v| indeg[v] == 0).collect();
        let mut topo = Vec::with_capacity(vertices);
        while let Some(u) = queue.pop_front() {
            topo.push(u);
            for &e in &out[u] {
                let v = edges[e].1;
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    queue.push_back(v);
                }
            }
        }
        if topo.len() != vertices {
            return Err(Error::InvalidInput("path oracle requires an acyclic directed graph".into()));
        }
        let mut pos = vec![0; vertices];
        for (k, &v) in topo.iter().enumerate() {
            pos[v] = k;
        }
        Ok(PathGraph { vertices, edges, s, t, topo, pos, out })
    }

    /// Two vertex-disjoint s-t paths of `k` edges each: edges 0..k form the
    /// first path, k..2k the second. Vertex 0 is s, vertex 1 is t.
    pub fn two_paths(k: usize) -> Self {
        assert!(k >= 1);
        let mut edges = Vec::with_capacity(2 * k);
        let mut next = 2;
        for _ in 0..2 {
            let mut prev = 0;
            for step in 0..k {
                let head = if step + 1 == k { 1 } else { let h = next; next += 1; h };
                edges.push((prev, head));
                prev = head;
            }
        }
        PathGraph::new(next.max(2), edges, 0, 1).expect("two-path graph is acyclic")
    }

    pub(crate) fn topo(&self) -> &[usize] {
        &self.topo
    }

    pub(crate) fn out_edges(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    /// Heaviest path `from` ⇝ `to` avoiding excluded edges.
    fn segment(&self, from: usize, to: usize, w: &[f64], excluded: &[bool]) -> Option<(f64, Vec<usize>)> {
        if self.pos[from] > self.pos[to] {
            return None;
        }
        let mut best = vec![f64::NEG_INFINITY; self.vertices];
        let mut parent = vec![usize::MAX; self.vertices];
        best[from] = 0.0;
        for &u in &self.topo[self.pos[from]..=self.pos[to]] {
            if best[u] == f64::NEG_INFINITY {
                continue;
            }
            for &e in &self.out[u] {
                let v = self.edges[e].1;
                if excluded[e] || self.pos[v] > self.pos[to] {
                    continue;
                }
                let cand = best[u] + w[e];
                if cand > best[v] {
                    best[v] = cand;
                    parent[v] = e;
                }
            }
        }
        if best[to] == f64::NEG_INFINITY {
            return None;
        }
        let mut path = Vec::new();
        let mut v = to;
        while v != from {
            let e = parent[v];
            path.push(e);
            v = self.edges[e].0;
        }
        Some((best[to], path))
    }

    /// Heaviest s-t path containing every required edge and no excluded one.
    pub(crate) fn max_path(&self, w: &[f64], r: &Restriction) -> Option<(f64, ArmSet)> {
        let mut required: Vec<usize> = (0..self.edges.len()).filter(|&e| r.required[e]).collect();
        if required.iter().any(|&e| r.excluded[e]) {
            return None;
        }
        required.sort_by_key(|&e| self.pos[self.edges[e].0]);
        let mut at = self.s;
        let mut value = 0.0;
        let mut chosen = Vec::new();
        for &e in &required {
            let (tail, head) = self.edges[e];
            let (v, seg) = self.segment(at, tail, w, &r.excluded)?;
            value += v + w[e];
            chosen.extend(seg);
            chosen.push(e);
            at = head;
        }
        let (v, seg) = self.segment(at, self.t, w, &r.excluded)?;
        value += v;
        chosen.extend(seg);
        let set = ArmSet::new(chosen.iter().copied());
        if set.len() != chosen.len() {
            return None;
        }
        Some((value, set))
    }

    pub(crate) fn enumerate_paths(&self, cap: usize) -> Result<Vec<ArmSet>> {
        fn rec(g: &PathGraph, u: usize, stack: &mut Vec<usize>, out: &mut Vec<ArmSet>, cap: usize) -> Result<()> {
            if u == g.t {
                if out.len() >= cap {
                    return Err(Error::EnumerationCap { cap });
                }
                out.push(ArmSet::new(stack.iter().copied()));
                return Ok(());
            }
            for &e in &g.out[u] {
                stack.push(e);
                rec(g, g.edges[e].1, stack, out, cap)?;
                stack.pop();
            }
            Ok(())
        }
        let mut out = Vec::new();
        rec(self, self.s, &mut Vec::new(), &mut out, cap)?;
        Ok(out)
    }

    /// Whether some s-t path has integer weight exactly `target`, by
    /// propagating the set of reachable path sums along a topological order.
    pub(crate) fn exact_sum(&self, w: &[u64], target: u64) -> bool {
        let width = target as usize + 1;
        let words = width.div_ceil(64);
        let mut reach = vec![vec![0u64; words]; self.vertices];
        reach[self.s][0] = 1;
        for &u in &self.topo {
            if reach[u].iter().all(|&x| x == 0) {
                continue;
            }
            let src = reach[u].clone();
            for &e in &self.out[u] {
                let v = self.edges[e].1;
                let shift = w[e];
                if shift > target {
                    continue;
                }
                shift_or(&mut reach[v], &src, shift as usize, width);
            }
        }
        let t = target as usize;
        reach[self.t][t / 64] >> (t % 64) & 1 == 1
    }
}

/// dst |= (src << shift), truncated to `width` bits.
fn shift_or(dst: &mut [u64], src: &[u64], shift: usize, width: usize) {
    let words = dst.len();
    let (ws, bs) = (shift / 64, shift % 64);
    for k in (ws..words).rev() {
        let lo = src[k - ws] << bs;
        let hi = if bs > 0 && k > ws { src[k - ws - 1] >> (64 - bs) } else { 0 };
        dst[k] |= lo | hi;
    }
    let extra = words * 64 - width;
    if extra > 0 {
        dst[words - 1] &= u64::MAX >> extra;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hungarian_solves_small_assignment() {
        let cost = vec![vec![4.0, 1.0, 3.0], vec![2.0, 0.0, 5.0], vec![3.0, 2.0, 2.0]];
        let a = hungarian(&cost);
        let total: f64 = a.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        assert_eq!(total, 5.0);
    }

    #[test]
    fn two_paths_shape() {
        let g = PathGraph::two_paths(3);
        assert_eq!(g.edges.len(), 6);
        let paths = g.enumerate_paths(10).unwrap();
        assert_eq!(paths, vec![ArmSet::new([0, 1, 2]), ArmSet::new([3, 4, 5])]);
        let single = PathGraph::two_paths(1);
        assert_eq!(single.enumerate_paths(10).unwrap().len(), 2);
    }

    #[test]
    fn cycles_are_rejected_for_paths() {
        assert!(PathGraph::new(3, vec![(0, 1), (1, 2), (2, 0)], 0, 2).is_err());
    }

    #[test]
    fn shift_or_matches_naive() {
        let width = 150;
        let mut src = vec![0u64; 3];
        for b in [0usize, 5, 63, 64, 100, 149] {
            src[b / 64] |= 1 << (b % 64);
        }
        for shift in [0usize, 1, 13, 63, 64, 65, 120] {
            let mut dst = vec![0u64; 3];
            shift_or(&mut dst, &src, shift, width);
            for b in 0..width {
                let expect = b >= shift && (src[(b - shift) / 64] >> ((b - shift) % 64)) & 1 == 1;
                assert_eq!((dst[b / 64] >> (b % 64)) & 1 == 1, expect, "shift {shift} bit {b}");
            }
        }
    }
}
