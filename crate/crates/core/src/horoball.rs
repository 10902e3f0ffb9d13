//! Combinatorial horoballs over finite base graphs.
//!
//! Vertices are pairs `(v, k)` of a base vertex and a depth. At depth `k`
//! two vertices are joined when their base distance is positive and at most
//! `2^k`; vertical edges join `(v, k)` to `(v, k + 1)`. Distances and
//! geodesics use a closed form valid at every depth, so the explicit
//! truncation depth only matters when an explicit graph is requested.

use std::fmt;

use crate::chain::{circuit_chain, path_chain, Chain1, Chain2, SparseChain};
use crate::graph::{Graph, VertexId, UNREACHED};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HoroballError {
    #[error("base graph has a loop at vertex {0}")]
    SelfLoop(u32),
    #[error("base graph is disconnected")]
    Disconnected,
    #[error("not a closed edge path: {0}")]
    NotALoop(String),
    #[error("filling would pass depth {cap}")]
    DepthOverflow { cap: u32 },
}

/// Finite base graph with its full distance matrix.
#[derive(Clone, Debug)]
pub struct BaseGraph {
    n: usize,
    dist: Vec<u32>,
}

impl BaseGraph {
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self, HoroballError> {
        if let Some(&(u, _)) = edges.iter().find(|(u, v)| u == v) {
            return Err(HoroballError::SelfLoop(u));
        }
        let g = Graph::from_edges(n, edges);
        let mut dist = Vec::with_capacity(n * n);
        for v in 0..n {
            let row = g.bfs(v as VertexId);
            if row.contains(&UNREACHED) {
                return Err(HoroballError::Disconnected);
            }
            dist.extend(row);
        }
        Ok(BaseGraph { n, dist })
    }

    /// Base given directly by a metric, e.g. a word metric on a coset.
    pub fn with_metric(n: usize, d: impl Fn(usize, usize) -> u32) -> Self {
        let mut dist = Vec::with_capacity(n * n);
        for u in 0..n {
            for v in 0..n {
                dist.push(d(u, v));
            }
        }
        BaseGraph { n, dist }
    }

    pub fn cycle(n: usize) -> Self {
        let e: Vec<(u32, u32)> = (0..n).map(|i| (i as u32, ((i + 1) % n) as u32)).collect();
        Self::from_edges(n, &e).unwrap()
    }

    /// Path on `n` vertices.
    pub fn path(n: usize) -> Self {
        let e: Vec<(u32, u32)> = (1..n).map(|i| ((i - 1) as u32, i as u32)).collect();
        Self::from_edges(n, &e).unwrap()
    }

    pub fn grid(w: usize, h: usize) -> Self {
        let mut e = Vec::new();
        for y in 0..h {
            for x in 0..w {
                let v = (y * w + x) as u32;
                if x + 1 < w {
                    e.push((v, v + 1));
                }
                if y + 1 < h {
                    e.push((v, v + w as u32));
                }
            }
        }
        Self::from_edges(w * h, &e).unwrap()
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn d(&self, u: u32, v: u32) -> u32 {
        self.dist[u as usize * self.n + v as usize]
    }

    pub fn diameter(&self) -> u32 {
        self.dist.iter().copied().max().unwrap_or(0)
    }

    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut e = Vec::new();
        for u in 0..self.n as u32 {
            for v in u + 1..self.n as u32 {
                if self.d(u, v) == 1 {
                    e.push((u, v));
                }
            }
        }
        e
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HoroVertex {
    pub base: u32,
    pub depth: u32,
}

impl HoroVertex {
    pub fn new(base: u32, depth: u32) -> Self {
        HoroVertex { base, depth }
    }
}

impl fmt::Display for HoroVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.base, self.depth)
    }
}

/// Largest base distance spanned by a horizontal edge at depth `k`.
pub fn width(k: u32) -> u64 {
    if k >= 63 {
        u64::MAX
    } else {
        1u64 << k
    }
}

/// Fewest hops of span `2^m` covering base distance `d`.
fn hops(d: u32, m: u32) -> u64 {
    let w = width(m);
    (d as u64).div_ceil(w)
}

/// Smallest `n` with `d <= 2^n`.
pub fn ceil_log2(d: u64) -> u32 {
    if d <= 1 {
        0
    } else {
        64 - (d - 1).leading_zeros()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellKind {
    Triangle,
    Square,
    Pentagon,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub kind: CellKind,
    /// Boundary circuit, oriented consistently with the filled loop.
    pub boundary: Vec<HoroVertex>,
}

#[derive(Clone, Debug, Default)]
pub struct Filling {
    pub cells: Vec<Cell>,
}

impl Filling {
    pub fn area(&self) -> usize {
        self.cells.len()
    }

    pub fn chain(&self) -> Chain2<HoroVertex> {
        let mut c = SparseChain::zero();
        for cell in &self.cells {
            c.add(&circuit_chain(&cell.boundary));
        }
        c
    }

    /// Signed sum of the cell boundaries, without cancellation of cells
    /// that happen to coincide.
    pub fn boundary_chain(&self) -> Chain1<HoroVertex> {
        let mut c = SparseChain::zero();
        for cell in &self.cells {
            let mut p = cell.boundary.clone();
            p.push(p[0]);
            c.add(&path_chain(&p));
        }
        c
    }
}

/// Depth past which the filling refuses to push a loop.
pub const FILL_DEPTH_CAP: u32 = 62;

#[derive(Clone, Debug)]
pub struct HoroballGraph {
    pub base: BaseGraph,
    /// Explicit truncation depth.
    pub depth: u32,
}

impl HoroballGraph {
    pub fn build(base: BaseGraph, depth: u32) -> Self {
        HoroballGraph { base, depth }
    }

    pub fn vertex_id(&self, v: HoroVertex) -> VertexId {
        v.depth * self.base.len() as u32 + v.base
    }

    pub fn vertex(&self, id: VertexId) -> HoroVertex {
        let n = self.base.len() as u32;
        HoroVertex::new(id % n, id / n)
    }

    pub fn vertex_count(&self) -> usize {
        self.base.len() * (self.depth as usize + 1)
    }

    pub fn contains(&self, v: HoroVertex) -> bool {
        (v.base as usize) < self.base.len() && v.depth <= self.depth
    }

    /// Horizontal edges at depth `k` as base-vertex pairs `u < v`.
    pub fn horizontal_edges(&self, k: u32) -> Vec<(u32, u32)> {
        let n = self.base.len() as u32;
        let mut e = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if self.base.d(u, v) as u64 <= width(k) {
                    e.push((u, v));
                }
            }
        }
        e
    }

    /// Explicit graph of the truncation, vertex ids as in [`Self::vertex_id`].
    pub fn to_graph(&self) -> Graph {
        let n = self.base.len() as u32;
        let mut edges = Vec::new();
        for k in 0..=self.depth {
            for (u, v) in self.horizontal_edges(k) {
                edges.push((k * n + u, k * n + v));
            }
            if k < self.depth {
                for v in 0..n {
                    edges.push((k * n + v, (k + 1) * n + v));
                }
            }
        }
        Graph::from_edges(self.vertex_count(), &edges)
    }

    /// Text form: a `base <n>` header, one `base u v` line per base edge, then
    /// one `v w k kind` line per edge of the truncation, where `k` is the
    /// depth of the edge (the upper endpoint's for vertical edges) and `kind`
    /// is `horizontal` or `vertical`.
    pub fn to_text(&self) -> String {
        let n = self.base.len() as u32;
        let mut out = format!("base {n}\n");
        for (u, v) in self.base.edges() {
            out += &format!("base {u} {v}\n");
        }
        for k in 0..=self.depth {
            for (u, v) in self.horizontal_edges(k) {
                out += &format!("{} {} {k} horizontal\n", k * n + u, k * n + v);
            }
            if k > 0 {
                for v in 0..n {
                    out += &format!("{} {} {k} vertical\n", (k - 1) * n + v, k * n + v);
                }
            }
        }
        out
    }

    pub fn is_edge(&self, a: HoroVertex, b: HoroVertex) -> bool {
        if a.base == b.base {
            return a.depth.abs_diff(b.depth) == 1;
        }
        a.depth == b.depth && self.base.d(a.base, b.base) as u64 <= width(a.depth)
    }

    /// Exact distance in the infinite horoball.
    pub fn distance(&self, a: HoroVertex, b: HoroVertex) -> u32 {
        match self.plan(a, b) {
            None => a.depth.abs_diff(b.depth),
            Some((m, h)) => 2 * m - a.depth - b.depth + h,
        }
    }

    /// Descent depth and hop count of the canonical geodesic: least cost over
    /// at most three hops, then least depth.
    fn plan(&self, a: HoroVertex, b: HoroVertex) -> Option<(u32, u32)> {
        let d = self.base.d(a.base, b.base);
        if d == 0 {
            return None;
        }
        let lo = a.depth.max(b.depth);
        let hi = lo.max(ceil_log2(d as u64));
        let mut best: Option<(u64, u32, u32)> = None;
        for m in lo..=hi {
            let h = hops(d, m);
            if h > 3 {
                continue;
            }
            let cost = 2 * m as u64 - a.depth as u64 - b.depth as u64 + h;
            if best.map_or(true, |(c, _, _)| cost < c) {
                best = Some((cost, m, h as u32));
            }
        }
        best.map(|(_, m, h)| (m, h))
    }

    /// Canonical geodesic as a vertex sequence from `a` to `b`. The result for
    /// `(b, a)` is the exact reversal.
    pub fn geodesic(&self, a: HoroVertex, b: HoroVertex) -> Vec<HoroVertex> {
        if b < a {
            let mut p = self.geodesic(b, a);
            p.reverse();
            return p;
        }
        let Some((m, h)) = self.plan(a, b) else {
            return vertical(a, b.depth);
        };
        let w = width(m);
        let near = |u: u32, v: u32| self.base.d(u, v) as u64 <= w;
        let n = self.base.len() as u32;
        let mut stops = vec![a.base];
        match h {
            1 => {}
            2 => stops.push((0..n).find(|&u| near(a.base, u) && near(u, b.base)).unwrap()),
            _ => {
                let u1 = (0..n)
                    .find(|&u| near(a.base, u) && (0..n).any(|u2| near(u, u2) && near(u2, b.base)))
                    .unwrap();
                let u2 = (0..n).find(|&u2| near(u1, u2) && near(u2, b.base)).unwrap();
                stops.push(u1);
                stops.push(u2);
            }
        }
        stops.push(b.base);
        let mut path = vertical(a, m);
        for &s in &stops[1..] {
            path.push(HoroVertex::new(s, m));
        }
        let mut up = vertical(HoroVertex::new(b.base, m), b.depth);
        up.remove(0);
        path.extend(up);
        path
    }

    /// Path through the horoball: down to a common depth, one horizontal
    /// edge, back up. The depth avoids `l2` by stepping one level deeper.
    pub fn sigma_path(&self, x: HoroVertex, y: HoroVertex, l2: u32) -> Vec<HoroVertex> {
        sigma_path_with(|u, v| self.base.d(u, v), x, y, l2)
    }

    /// True when the circuit bounds one of the three kinds of 2-cell.
    pub fn is_cell(&self, cell: &Cell) -> bool {
        let b = &cell.boundary;
        let n = b.len();
        let closed = (0..n).all(|i| self.is_edge(b[i], b[(i + 1) % n]));
        let mut distinct = b.clone();
        distinct.sort();
        distinct.dedup();
        if !closed || distinct.len() != n {
            return false;
        }
        let vertical_edges = (0..n).filter(|&i| b[i].base == b[(i + 1) % n].base).count();
        match (cell.kind, n) {
            (CellKind::Triangle, 3) => vertical_edges == 0,
            (CellKind::Square, 4) => vertical_edges == 2,
            (CellKind::Pentagon, 5) => {
                if vertical_edges != 2 {
                    return false;
                }
                // The two shallow vertices sit on a horizontal edge; the
                // other three form a horizontal path one level up whose ends
                // are not adjacent, else this is a square plus a triangle.
                let top = b.iter().map(|v| v.depth).min().unwrap();
                let upper: Vec<&HoroVertex> = b.iter().filter(|v| v.depth == top).collect();
                let lower: Vec<&HoroVertex> = b.iter().filter(|v| v.depth == top + 1).collect();
                if upper.len() != 3 || lower.len() != 2 {
                    return false;
                }
                let ends: Vec<u32> = lower.iter().map(|v| v.base).collect();
                self.base.d(ends[0], ends[1]) as u64 > width(top)
            }
            _ => false,
        }
    }

    /// Fills a closed edge path (first vertex repeated at the end).
    pub fn fill(&self, c: &[HoroVertex]) -> Result<Filling, HoroballError> {
        if c.is_empty() || c[0] != c[c.len() - 1] {
            return Err(HoroballError::NotALoop("path is not closed".into()));
        }
        for w in c.windows(2) {
            if !self.is_edge(w[0], w[1]) {
                return Err(HoroballError::NotALoop(format!("{} and {} are not adjacent", w[0], w[1])));
            }
        }
        let mut lp: Vec<HoroVertex> = c[..c.len() - 1].to_vec();
        let mut cells = Vec::new();
        loop {
            remove_backtracks(&mut lp);
            if lp.is_empty() {
                break;
            }
            let j = lp.iter().map(|v| v.depth).min().unwrap();
            if j >= FILL_DEPTH_CAP {
                return Err(HoroballError::DepthOverflow { cap: FILL_DEPTH_CAP });
            }
            let n = lp.len();
            let shortcut = (0..n).find(|&i| {
                let (x, y, z) = (lp[i], lp[(i + 1) % n], lp[(i + 2) % n]);
                x.depth == j
                    && y.depth == j
                    && z.depth == j
                    && x.base != z.base
                    && self.base.d(x.base, z.base) as u64 <= width(j)
            });
            if let Some(i) = shortcut {
                cells.push(Cell {
                    kind: CellKind::Triangle,
                    boundary: vec![lp[i], lp[(i + 1) % n], lp[(i + 2) % n]],
                });
                lp.remove((i + 1) % n);
                continue;
            }
            if lp.iter().all(|v| v.depth == j) {
                let mut xs: Vec<u32> = lp.iter().map(|v| v.base).collect();
                xs.push(xs[0]);
                let tops = push_down(&xs, j, &mut cells);
                lp = tops[..tops.len() - 1].iter().map(|&b| HoroVertex::new(b, j + 1)).collect();
                continue;
            }
            // Rotate so a maximal run at depth j starts at index 1.
            let s = (0..n).find(|&i| lp[i].depth == j && lp[(i + n - 1) % n].depth != j).unwrap();
            lp.rotate_left((s + n - 1) % n);
            let mut e = 1;
            while lp[e + 1].depth == j {
                e += 1;
            }
            let xs: Vec<u32> = lp[1..=e].iter().map(|v| v.base).collect();
            let tops = push_down(&xs, j, &mut cells);
            let mut next: Vec<HoroVertex> = tops.iter().map(|&b| HoroVertex::new(b, j + 1)).collect();
            next.extend_from_slice(&lp[e + 2..]);
            lp = next;
        }
        Ok(Filling { cells })
    }
}

pub(crate) fn sigma_path_with(d: impl Fn(u32, u32) -> u32, x: HoroVertex, y: HoroVertex, l2: u32) -> Vec<HoroVertex> {
    if x.base == y.base {
        return vertical(x, y.depth);
    }
    let n = ceil_log2(d(x.base, y.base) as u64);
    let mut r = n.max(x.depth).max(y.depth);
    if r == l2 {
        r = l2 + 1;
    }
    let mut p = vertical(x, r);
    let mut up = vertical(HoroVertex::new(y.base, r), y.depth);
    p.append(&mut up);
    p
}

/// Vertical segment from `a` to depth `k`.
pub fn vertical(a: HoroVertex, k: u32) -> Vec<HoroVertex> {
    if k >= a.depth {
        (a.depth..=k).map(|t| HoroVertex::new(a.base, t)).collect()
    } else {
        (k..=a.depth).rev().map(|t| HoroVertex::new(a.base, t)).collect()
    }
}

/// Pushes the horizontal path `xs` at depth `j` one level down with
/// pentagons on consecutive pairs of edges and a square on a leftover edge.
/// Returns the base vertices of the replacement path at depth `j + 1`.
fn push_down(xs: &[u32], j: u32, cells: &mut Vec<Cell>) -> Vec<u32> {
    let m = xs.len() - 1;
    let lo = |b: u32| HoroVertex::new(b, j);
    let hi = |b: u32| HoroVertex::new(b, j + 1);
    let mut tops = vec![xs[0]];
    let mut i = 0;
    while i + 2 <= m {
        cells.push(Cell {
            kind: CellKind::Pentagon,
            boundary: vec![hi(xs[i]), lo(xs[i]), lo(xs[i + 1]), lo(xs[i + 2]), hi(xs[i + 2])],
        });
        tops.push(xs[i + 2]);
        i += 2;
    }
    if i < m {
        cells.push(Cell {
            kind: CellKind::Square,
            boundary: vec![hi(xs[i]), lo(xs[i]), lo(xs[i + 1]), hi(xs[i + 1])],
        });
        tops.push(xs[i + 1]);
    }
    tops
}

/// Removes cyclic backtracking `u v u` until none is left.
fn remove_backtracks(lp: &mut Vec<HoroVertex>) {
    loop {
        let n = lp.len();
        if n == 2 {
            lp.clear();
            return;
        }
        if n < 3 {
            return;
        }
        match (0..n).find(|&i| lp[i] == lp[(i + 2) % n]) {
            None => return,
            Some(i) => {
                let a = (i + 1) % n;
                let b = (i + 2) % n;
                let (hi, lo) = if a > b { (a, b) } else { (b, a) };
                lp.remove(hi);
                lp.remove(lo);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{boundary2, path_chain};

    fn hv(b: u32, k: u32) -> HoroVertex {
        HoroVertex::new(b, k)
    }

    #[test]
    fn path_dump_by_hand() {
        let h = HoroballGraph::build(BaseGraph::path(3), 2);
        let want = "base 3\nbase 0 1\nbase 1 2\n\
            0 1 0 horizontal\n1 2 0 horizontal\n\
            3 4 1 horizontal\n3 5 1 horizontal\n4 5 1 horizontal\n\
            0 3 1 vertical\n1 4 1 vertical\n2 5 1 vertical\n\
            6 7 2 horizontal\n6 8 2 horizontal\n7 8 2 horizontal\n\
            3 6 2 vertical\n4 7 2 vertical\n5 8 2 vertical\n";
        assert_eq!(h.to_text(), want);
    }

    #[test]
    fn single_edge_base() {
        let h = HoroballGraph::build(BaseGraph::path(2), 2);
        let g = h.to_graph();
        assert_eq!(g.len(), 6);
        // three horizontal, four vertical
        assert_eq!(g.edge_count(), 7);
    }

    #[test]
    fn path_three_deep_edge() {
        let h = HoroballGraph::build(BaseGraph::path(4), 2);
        assert!(h.horizontal_edges(2).contains(&(0, 3)));
        assert!(!h.horizontal_edges(1).contains(&(0, 3)));
    }

    #[test]
    fn self_loop_rejected() {
        assert_eq!(BaseGraph::from_edges(2, &[(0, 1), (1, 1)]).unwrap_err(), HoroballError::SelfLoop(1));
    }

    #[test]
    fn distance_examples() {
        let h = HoroballGraph::build(BaseGraph::path(200), 8);
        assert_eq!(h.distance(hv(0, 0), hv(0, 5)), 5);
        assert_eq!(h.distance(hv(0, 3), hv(8, 3)), 1);
        assert_eq!(h.distance(hv(0, 0), hv(100, 0)), 14);
        let g = h.geodesic(hv(0, 0), hv(100, 0));
        assert_eq!(g.len(), 15);
        assert_eq!(g.iter().map(|v| v.depth).max(), Some(6));
        assert_eq!(h.geodesic(hv(3, 2), hv(4, 2)), vec![hv(3, 2), hv(4, 2)]);
    }

    #[test]
    fn sigma_examples() {
        let h = HoroballGraph::build(BaseGraph::path(20), 8);
        let p = h.sigma_path(hv(0, 2), hv(9, 3), 100);
        assert_eq!(p.len() - 1, 4);
        assert_eq!(p.iter().map(|v| v.depth).max(), Some(4));
        let p = h.sigma_path(hv(0, 2), hv(9, 3), 4);
        assert_eq!(p.len() - 1, 6);
        assert_eq!(p.iter().map(|v| v.depth).max(), Some(5));
        assert_eq!(h.sigma_path(hv(5, 1), hv(5, 6), 100).len() - 1, 5);
    }

    #[test]
    fn fill_square_and_triangle() {
        let h = HoroballGraph::build(BaseGraph::cycle(6), 4);
        let sq = [hv(0, 1), hv(1, 1), hv(1, 2), hv(0, 2), hv(0, 1)];
        let f = h.fill(&sq).unwrap();
        assert_eq!(f.area(), 1);
        assert_eq!(boundary2(&f.chain()), path_chain(&sq));
        let tri = [hv(0, 1), hv(1, 1), hv(2, 1), hv(0, 1)];
        let f = h.fill(&tri).unwrap();
        assert_eq!(f.area(), 1);
        assert_eq!(f.cells[0].kind, CellKind::Triangle);
    }

    #[test]
    fn fill_hexagon() {
        let h = HoroballGraph::build(BaseGraph::cycle(6), 4);
        let hex: Vec<HoroVertex> = (0..=6).map(|i| hv(i % 6, 0)).collect();
        let f = h.fill(&hex).unwrap();
        assert!(f.area() <= 18);
        assert_eq!(boundary2(&f.chain()), path_chain(&hex));
        assert!(f.cells.iter().all(|c| h.is_cell(c)));
    }

    #[test]
    fn fill_rejects_open_paths() {
        let h = HoroballGraph::build(BaseGraph::cycle(6), 4);
        assert!(matches!(h.fill(&[hv(0, 0), hv(1, 0)]), Err(HoroballError::NotALoop(_))));
        assert!(matches!(h.fill(&[hv(0, 0), hv(3, 0), hv(0, 0)]), Err(HoroballError::NotALoop(_))));
    }
}
