//! Horoball families, preferred paths, preferred triangles and their
//! skeletal fillings, and the composite bicombing `q` with its triangle
//! defect.
//!
//! Horoballs are indexed by coset index in a [`CuspedBall`]. The "`L`-horoball"
//! of a coset is the set of its horoball vertices of depth at least `L`.
//! Geodesics are enumerated through BFS intervals inside the ball; any
//! interval that leaves the inner ball is reported as unsound.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use crate::chain::{path_chain, Chain1, Edge, SparseChain};
use crate::cusped::CuspedBall;
use crate::graph::{Distances, Graph, VertexId, UNREACHED};
use crate::horoball::{sigma_path_with, HoroVertex};
use crate::metric::{canonical_geodesic, hausdorff_distance, Constants, MetricError};
use crate::mineyev::{Mineyev, MineyevError};
use crate::oracle::GroupOracle;
use crate::word::Word;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PreferredError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Mineyev(#[from] MineyevError),
    #[error("a geodesic from {a} to {b} leaves the inner ball")]
    TruncationUnsound { a: VertexId, b: VertexId },
    #[error("endpoints coincide at {0}")]
    SameEndpoints(VertexId),
    #[error("corner {0} lies at depth L2")]
    CornerAtL2(VertexId),
    #[error("a path in horoball {coset} needs depth {depth}, beyond the truncation")]
    TooDeep { coset: usize, depth: u32 },
    #[error("vertex {0} is outside the thick part")]
    NotThick(VertexId),
}

pub type Result<T> = std::result::Result<T, PreferredError>;

/// How a family was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Provenance {
    C0,
    CK,
    Closure { iterations: usize },
}

/// Ordered list of horoballs (coset indices) attached to a pair of vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HoroballFamily {
    pub a: VertexId,
    pub b: VertexId,
    pub members: Vec<usize>,
    pub provenance: Provenance,
}

/// Kind of a piece of a preferred path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum SegmentKind {
    Geodesic,
    Sigma,
}

/// A piece of a preferred path: vertex index range `start..=end`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Segment {
    pub kind: SegmentKind,
    pub start: usize,
    pub end: usize,
    pub horoball: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreferredPath {
    pub a: VertexId,
    pub b: VertexId,
    pub family: Vec<usize>,
    pub vertices: Vec<VertexId>,
    pub segments: Vec<Segment>,
}

impl PreferredPath {
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() <= 1
    }

    pub fn reversed(&self) -> PreferredPath {
        let n = self.vertices.len() - 1;
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|s| Segment { kind: s.kind, start: n - s.end, end: n - s.start, horoball: s.horoball })
            .collect();
        let mut family = self.family.clone();
        family.reverse();
        PreferredPath { a: self.b, b: self.a, family, vertices, segments }
    }
}

/// Length and neighbourhood measurements of a preferred path.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct QuasiReport {
    pub length: u32,
    pub distance: u32,
    pub hausdorff: u32,
    pub length_bound: u32,
    pub hausdorff_bound: u32,
}

impl QuasiReport {
    pub fn ok(&self) -> bool {
        self.length <= self.length_bound && self.hausdorff <= self.hausdorff_bound
    }
}

/// `2d + 20K + 120δ + 72`, the additive quasi-geodesic bound.
pub fn length_bound(c: &Constants, d: u32) -> u32 {
    2 * d + 20 * c.k + 120 * c.delta + 72
}

/// `K + 12δ + 9`.
pub fn hausdorff_bound(c: &Constants) -> u32 {
    c.k + 12 * c.delta + 9
}

/// `6K + 48δ + 28`, the slimness bound for preferred triangles.
pub fn slimness_bound(c: &Constants) -> u32 {
    6 * c.k + 48 * c.delta + 28
}

/// Distances and cached horoball data for one cusped ball and one set of constants.
pub struct Geometry<'b> {
    pub ball: &'b CuspedBall,
    pub dist: Distances<'b>,
    pub constants: Constants,
    /// Cayley radius of the inner ball; intervals must stay within it and
    /// strictly above the truncation depth.
    pub inner_radius: usize,
    to_horoball: RefCell<HashMap<usize, Rc<Vec<u32>>>>,
    horoball_sets: RefCell<HashMap<usize, Rc<Vec<VertexId>>>>,
}

impl<'b> Geometry<'b> {
    pub fn new(ball: &'b CuspedBall, constants: Constants, inner_radius: usize) -> Self {
        Geometry {
            ball,
            dist: Distances::new(&ball.graph),
            constants,
            inner_radius,
            to_horoball: RefCell::new(HashMap::new()),
            horoball_sets: RefCell::new(HashMap::new()),
        }
    }

    pub fn graph(&self) -> &'b Graph {
        &self.ball.graph
    }

    pub fn d(&self, a: VertexId, b: VertexId) -> Result<u32> {
        match self.dist.d(a, b) {
            UNREACHED => Err(MetricError::Disconnected(a, b).into()),
            d => Ok(d),
        }
    }

    pub fn is_inner(&self, v: VertexId) -> bool {
        self.ball.is_inner(v, self.inner_radius) && self.ball.depth_of(v) < self.ball.depth
    }

    pub fn geodesic(&self, a: VertexId, b: VertexId) -> Result<Vec<VertexId>> {
        Ok(canonical_geodesic(&self.dist, a, b)?)
    }

    /// Vertices on some geodesic from `a` to `b`, checked against the inner ball.
    pub fn interval(&self, a: VertexId, b: VertexId) -> Result<Vec<VertexId>> {
        let ra = self.dist.row(a);
        let rb = self.dist.row(b);
        let d = ra[b as usize];
        if d == UNREACHED {
            return Err(MetricError::Disconnected(a, b).into());
        }
        let out: Vec<VertexId> =
            (0..ra.len() as VertexId).filter(|&v| ra[v as usize] != UNREACHED && ra[v as usize] + rb[v as usize] == d).collect();
        if out.iter().any(|&v| !self.is_inner(v)) {
            return Err(PreferredError::TruncationUnsound { a, b });
        }
        Ok(out)
    }

    /// The `L1`-horoball of a coset, sorted.
    pub fn horoball_set(&self, coset: usize) -> Rc<Vec<VertexId>> {
        if let Some(s) = self.horoball_sets.borrow().get(&coset) {
            return s.clone();
        }
        let s = Rc::new(self.ball.horoball_vertices(coset, self.constants.l1.max(1)));
        self.horoball_sets.borrow_mut().insert(coset, s.clone());
        s
    }

    /// Distance from every vertex to the `L1`-horoball of a coset.
    pub fn horoball_row(&self, coset: usize) -> Rc<Vec<u32>> {
        if let Some(r) = self.to_horoball.borrow().get(&coset) {
            return r.clone();
        }
        let r = Rc::new(self.graph().bfs_multi(&self.horoball_set(coset), u32::MAX));
        self.to_horoball.borrow_mut().insert(coset, r.clone());
        r
    }

    /// The `L1`-horoball containing `v`, if any.
    pub fn horoball_of(&self, v: VertexId) -> Option<usize> {
        if self.ball.depth_of(v) >= self.constants.l1.max(1) {
            self.ball.coset_of[v as usize].map(|c| c as usize)
        } else {
            None
        }
    }

    /// Index along `path` of the first point closest to the horoball.
    pub fn projection_index(&self, coset: usize, path: &[VertexId]) -> usize {
        let row = self.horoball_row(coset);
        let mut best = (u32::MAX, 0);
        for (i, &v) in path.iter().enumerate() {
            if row[v as usize] < best.0 {
                best = (row[v as usize], i);
            }
        }
        best.1
    }

    /// Sorts horoballs by projection to the canonical geodesic, ties by index.
    pub fn order_by_projection(&self, a: VertexId, b: VertexId, members: &mut Vec<usize>) -> Result<()> {
        let g = self.geodesic(a, b)?;
        let mut keyed: Vec<(usize, usize)> = members.iter().map(|&c| (self.projection_index(c, &g), c)).collect();
        keyed.sort_unstable();
        keyed.dedup_by_key(|k| k.1);
        *members = keyed.into_iter().map(|k| k.1).collect();
        Ok(())
    }

    /// `L1`-horoballs meeting some geodesic from `a` to `b`.
    pub fn family_c0(&self, a: VertexId, b: VertexId) -> Result<HoroballFamily> {
        if a == b {
            return Err(PreferredError::SameEndpoints(a));
        }
        let iv = self.interval(a, b)?;
        let set: BTreeSet<usize> = iv.iter().filter_map(|&v| self.horoball_of(v)).collect();
        let mut members: Vec<usize> = set.into_iter().collect();
        self.order_by_projection(a, b, &mut members)?;
        Ok(HoroballFamily { a, b, members, provenance: Provenance::C0 })
    }

    /// `L1`-horoballs whose `K`-neighbourhood meets every geodesic from `a` to `b`.
    pub fn family_ck(&self, a: VertexId, b: VertexId) -> Result<HoroballFamily> {
        if a == b {
            return Err(PreferredError::SameEndpoints(a));
        }
        let iv = self.interval(a, b)?;
        let k = self.constants.k;
        let l1 = self.constants.l1.max(1);
        let candidates: BTreeSet<usize> = if k >= l1 {
            (0..self.ball.cosets.len()).collect()
        } else {
            iv.iter()
                .filter(|&&v| self.ball.depth_of(v) + k >= l1)
                .flat_map(|&v| self.ball.zero_horoballs(v))
                .collect()
        };
        let ra = self.dist.row(a);
        let rb = self.dist.row(b);
        let d = ra[b as usize];
        let on_interval = |v: VertexId| ra[v as usize] != UNREACHED && ra[v as usize] + rb[v as usize] == d;
        let mut members = Vec::new();
        for c in candidates {
            let row = self.horoball_row(c);
            let near = |v: VertexId| row[v as usize] <= k;
            if !iv.iter().any(|&v| near(v)) {
                continue;
            }
            // Is there a geodesic avoiding the neighbourhood?
            let avoids = if near(a) {
                false
            } else {
                let mut frontier = vec![a];
                let mut reached = false;
                let mut visited = BTreeSet::from([a]);
                while let Some(u) = frontier.pop() {
                    if u == b {
                        reached = true;
                        break;
                    }
                    for &w in self.graph().neighbors(u) {
                        if ra[w as usize] == ra[u as usize] + 1 && on_interval(w) && !near(w) && visited.insert(w) {
                            frontier.push(w);
                        }
                    }
                }
                reached
            };
            if !avoids {
                members.push(c);
            }
        }
        self.order_by_projection(a, b, &mut members)?;
        Ok(HoroballFamily { a, b, members, provenance: Provenance::CK })
    }

    /// Geodesic from `a` to the nearest point of the `L1`-horoball, ending at
    /// the least such point.
    pub fn gamma_to(&self, a: VertexId, coset: usize) -> Result<Vec<VertexId>> {
        let set = self.horoball_set(coset);
        let ra = self.dist.row(a);
        let target = *set.iter().min_by_key(|&&v| (ra[v as usize], v)).expect("nonempty horoball");
        if ra[target as usize] == UNREACHED {
            return Err(MetricError::Disconnected(a, target).into());
        }
        self.geodesic(a, target)
    }

    /// Shortest geodesic between two `L1`-horoballs, chosen least-first from
    /// the horoball of smaller index and reversed for the other order.
    pub fn gamma_between(&self, x: usize, y: usize) -> Result<Vec<VertexId>> {
        if y < x {
            let mut p = self.gamma_between(y, x)?;
            p.reverse();
            return Ok(p);
        }
        let rx = self.horoball_row(x);
        let ys = self.horoball_set(y);
        let v = *ys.iter().min_by_key(|&&v| (rx[v as usize], v)).expect("nonempty horoball");
        let m = rx[v as usize];
        if m == UNREACHED {
            return Err(MetricError::Disconnected(v, v).into());
        }
        let rv = self.dist.row(v);
        let u = *self.horoball_set(x).iter().find(|&&u| rv[u as usize] == m).expect("realizing point");
        self.geodesic(u, v)
    }

    /// `σ(x, y)` inside a coset's horoball.
    pub fn sigma(&self, coset: usize, x: VertexId, y: VertexId) -> Result<Vec<VertexId>> {
        let hx = self.ball.in_horoball(coset, x).expect("x in horoball");
        let hy = self.ball.in_horoball(coset, y).expect("y in horoball");
        let base = &self.ball.cosets[coset].base;
        let p: Vec<HoroVertex> = sigma_path_with(|u, v| base.d(u, v), hx, hy, self.constants.l2);
        if let Some(deep) = p.iter().map(|h| h.depth).max().filter(|&k| k > self.ball.depth) {
            return Err(PreferredError::TooDeep { coset, depth: deep });
        }
        Ok(p.into_iter().map(|h| self.ball.horo_vertex(coset, h.base as usize, h.depth)).collect())
    }

    /// The preferred path from `a` to `b` through the given ordered family.
    pub fn preferred_path(&self, a: VertexId, b: VertexId, family: &[usize]) -> Result<PreferredPath> {
        if a == b {
            return Err(PreferredError::SameEndpoints(a));
        }
        if family.is_empty() {
            self.interval(a, b)?;
            let vertices = self.geodesic(a, b)?;
            let end = vertices.len() - 1;
            let segments = vec![Segment { kind: SegmentKind::Geodesic, start: 0, end, horoball: None }];
            return Ok(PreferredPath { a, b, family: vec![], vertices, segments });
        }
        let mut pieces: Vec<(SegmentKind, Option<usize>, Vec<VertexId>)> = Vec::new();
        pieces.push((SegmentKind::Geodesic, None, self.gamma_to(a, family[0])?));
        for (i, &h) in family.iter().enumerate() {
            let entry = *pieces.last().unwrap().2.last().unwrap();
            let next = if i + 1 < family.len() {
                self.gamma_between(h, family[i + 1])?
            } else {
                let mut g = self.gamma_to(b, h)?;
                g.reverse();
                g
            };
            pieces.push((SegmentKind::Sigma, Some(h), self.sigma(h, entry, next[0])?));
            pieces.push((SegmentKind::Geodesic, None, next));
        }
        let mut vertices: Vec<VertexId> = vec![a];
        let mut segments = Vec::new();
        for (kind, horoball, p) in pieces {
            debug_assert_eq!(p[0], *vertices.last().unwrap());
            let start = vertices.len() - 1;
            vertices.extend_from_slice(&p[1..]);
            segments.push(Segment { kind, start, end: vertices.len() - 1, horoball });
        }
        if vertices.iter().any(|&v| !self.is_inner(v)) {
            return Err(PreferredError::TruncationUnsound { a, b });
        }
        Ok(PreferredPath { a, b, family: family.to_vec(), vertices, segments })
    }

    /// True when no edge of the path is horizontal at depth `L2`.
    pub fn avoids_l2_horizontals(&self, p: &PreferredPath) -> bool {
        let l2 = self.constants.l2;
        p.vertices.windows(2).all(|w| !(self.ball.depth_of(w[0]) == l2 && self.ball.depth_of(w[1]) == l2 && w[0] != w[1]))
    }

    pub fn quasigeodesic_check(&self, p: &PreferredPath) -> Result<QuasiReport> {
        let d = self.d(p.a, p.b)?;
        let g = self.geodesic(p.a, p.b)?;
        Ok(QuasiReport {
            length: p.len() as u32,
            distance: d,
            hausdorff: hausdorff_distance(self.graph(), &p.vertices, &g),
            length_bound: length_bound(&self.constants, d),
            hausdorff_bound: hausdorff_bound(&self.constants),
        })
    }

    /// Largest distance from a point of one side to the union of the other two.
    pub fn slimness(&self, sides: [&[VertexId]; 3]) -> u32 {
        let mut worst = 0;
        for i in 0..3 {
            let others: Vec<VertexId> = sides[(i + 1) % 3].iter().chain(sides[(i + 2) % 3]).copied().collect();
            let d = self.graph().bfs_multi(&others, u32::MAX);
            worst = worst.max(sides[i].iter().map(|&v| d[v as usize]).max().unwrap_or(0));
        }
        worst
    }

    /// Whether the family's order agrees with projection order along the
    /// lexicographically greatest geodesic.
    pub fn order_consistent(&self, f: &HoroballFamily) -> Result<bool> {
        let alt = extreme_geodesic(&self.dist, f.a, f.b)?;
        let keys: Vec<usize> = f.members.iter().map(|&c| self.projection_index(c, &alt)).collect();
        Ok(keys.windows(2).all(|w| w[0] <= w[1]))
    }
}

/// Greedy geodesic taking the largest admissible neighbour at each step.
pub fn extreme_geodesic(dist: &Distances, a: VertexId, b: VertexId) -> std::result::Result<Vec<VertexId>, MetricError> {
    let row = dist.row(b);
    if row[a as usize] == UNREACHED {
        return Err(MetricError::Disconnected(a, b));
    }
    let mut path = vec![a];
    let mut cur = a;
    while cur != b {
        let want = row[cur as usize] - 1;
        cur = *dist.graph.neighbors(cur).iter().rev().find(|&&v| row[v as usize] == want).unwrap();
        path.push(cur);
    }
    Ok(path)
}

/// Families on a finite witness set after the bounded closure.
#[derive(Clone, Debug)]
pub struct Closure {
    pub families: BTreeMap<(VertexId, VertexId), Vec<usize>>,
    pub initial: BTreeMap<(VertexId, VertexId), Vec<usize>>,
    pub iterations: usize,
    pub fixpoint: bool,
}

impl Closure {
    pub fn family(&self, a: VertexId, b: VertexId) -> Option<HoroballFamily> {
        self.families.get(&(a, b)).map(|m| HoroballFamily {
            a,
            b,
            members: m.clone(),
            provenance: Provenance::Closure { iterations: self.iterations },
        })
    }
}

/// Elements of `f` between `x` and `y` inclusive, in `f`'s order.
fn between(f: &[usize], x: usize, y: usize) -> &[usize] {
    let i = f.iter().position(|&h| h == x).unwrap();
    let j = f.iter().position(|&h| h == y).unwrap();
    if i <= j {
        &f[i..=j]
    } else {
        &f[j..=i]
    }
}

fn prefix_through(f: &[usize], x: usize) -> &[usize] {
    &f[..=f.iter().position(|&h| h == x).unwrap()]
}

fn suffix_from(f: &[usize], x: usize) -> &[usize] {
    &f[f.iter().position(|&h| h == x).unwrap()..]
}

fn common(f: &[usize], g: &[usize]) -> Vec<usize> {
    f.iter().copied().filter(|h| g.contains(h)).collect()
}

/// Iterates the interval, prefix and suffix repairs over the witness pairs,
/// which are closed under reversal first.
pub fn family_closure(geo: &Geometry, pairs: &[(VertexId, VertexId)], max_iterations: usize) -> Result<Closure> {
    let mut w: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();
    for &(a, b) in pairs {
        if a != b {
            w.insert((a, b));
            w.insert((b, a));
        }
    }
    let mut fam: BTreeMap<(VertexId, VertexId), Vec<usize>> = BTreeMap::new();
    for &(a, b) in &w {
        fam.insert((a, b), geo.family_c0(a, b)?.members);
    }
    let initial = fam.clone();
    let mut by_start: BTreeMap<VertexId, Vec<(VertexId, VertexId)>> = BTreeMap::new();
    let mut by_end: BTreeMap<VertexId, Vec<(VertexId, VertexId)>> = BTreeMap::new();
    for &(a, b) in &w {
        by_start.entry(a).or_default().push((a, b));
        by_end.entry(b).or_default().push((a, b));
    }
    let mut iterations = 0;
    let mut fixpoint = false;
    while iterations < max_iterations {
        iterations += 1;
        let mut next = BTreeMap::new();
        for (&(a, b), f) in &fam {
            let mut set: BTreeSet<usize> = f.iter().copied().collect();
            for (_, g) in fam.iter() {
                let c = common(f, g);
                for i in 0..c.len() {
                    for j in i + 1..c.len() {
                        set.extend(between(g, c[i], c[j]));
                    }
                }
            }
            for key in &by_start[&a] {
                let g = &fam[key];
                for x in common(f, g) {
                    set.extend(prefix_through(g, x));
                }
            }
            for key in &by_end[&b] {
                let g = &fam[key];
                for x in common(f, g) {
                    set.extend(suffix_from(g, x));
                }
            }
            let mut members: Vec<usize> = set.into_iter().collect();
            if members.len() != f.len() {
                geo.order_by_projection(a, b, &mut members)?;
            } else {
                members = f.clone();
            }
            next.insert((a, b), members);
        }
        if next == fam {
            fixpoint = true;
            break;
        }
        fam = next;
    }
    Ok(Closure { families: fam, initial, iterations, fixpoint })
}

/// Outcome for one axiom.
#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct AxiomOutcome {
    pub checked: usize,
    pub violations: usize,
    pub examples: Vec<String>,
}

impl AxiomOutcome {
    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.violations += 1;
            if self.examples.len() < 5 {
                self.examples.push(what());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct AxiomReport {
    pub axioms: [AxiomOutcome; 7],
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.axioms.iter().all(AxiomOutcome::passed)
    }
}

fn is_ordered_subset(small: &[usize], big: &[usize]) -> bool {
    let mut it = big.iter();
    small.iter().all(|x| it.any(|y| y == x))
}

/// Checks the seven axioms on a closure. Equivariance is tested for the
/// given group elements on pairs whose translates are also witnesses.
pub fn check_axioms(geo: &Geometry, closure: &Closure, oracle: &GroupOracle, translations: &[Word]) -> Result<AxiomReport> {
    let mut r = AxiomReport::default();
    let fam = &closure.families;
    for (&(a, b), f) in fam {
        let c0 = &closure.initial[&(a, b)];
        r.axioms[0].record(is_ordered_subset(c0, f), || format!("({a},{b}) C0 {c0:?} ⊄ {f:?}"));
        let ck = geo.family_ck(a, b)?.members;
        r.axioms[1].record(is_ordered_subset(f, &ck), || format!("({a},{b}) {f:?} ⊄ CK {ck:?}"));
        if let Some(g) = fam.get(&(b, a)) {
            let mut rev = g.clone();
            rev.reverse();
            r.axioms[2].record(*f == rev, || format!("({a},{b}) {f:?} vs reversed {rev:?}"));
        }
        for t in translations {
            let (Some(ta), Some(tb)) = (geo.ball.translate(oracle, t, a), geo.ball.translate(oracle, t, b)) else {
                continue;
            };
            let Some(g) = fam.get(&(ta, tb)) else { continue };
            let image: Option<Vec<usize>> = f.iter().map(|&c| geo.ball.translate_coset(oracle, t, c)).collect();
            let Some(image) = image else { continue };
            r.axioms[3].record(*g == image, || format!("({a},{b}) image {image:?} vs {g:?}"));
        }
    }
    for (&(a, b), f) in fam {
        for (&(c, d), g) in fam {
            let com = common(f, g);
            for i in 0..com.len() {
                for j in i + 1..com.len() {
                    let (x, y) = (com[i], com[j]);
                    let s1: BTreeSet<usize> = between(f, x, y).iter().copied().collect();
                    let s2: BTreeSet<usize> = between(g, x, y).iter().copied().collect();
                    r.axioms[4].record(s1 == s2, || format!("({a},{b}) and ({c},{d}) between {x},{y}"));
                }
            }
            if a == c && b != d {
                for &x in &com {
                    r.axioms[5].record(prefix_through(f, x) == prefix_through(g, x), || format!("({a},{b}) and ({c},{d}) up to {x}"));
                }
            }
            if b == d && a != c {
                for &x in &com {
                    r.axioms[6].record(suffix_from(f, x) == suffix_from(g, x), || format!("({a},{b}) and ({c},{d}) from {x}"));
                }
            }
        }
    }
    Ok(r)
}

/// How the preimage of one `L2`-horoball sits on a triangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Crossing {
    Bite,
    Nibble,
    Dip,
    Plunge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum SkelEdgeKind {
    Boundary,
    Ligament,
    Rib,
}

/// A vertex of the skeleton: a corner or an `L2`-vertex, at a position of
/// the boundary cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct SkelVertex {
    pub position: usize,
    pub image: VertexId,
    pub corner: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Leg {
    pub corner: usize,
    /// Skeleton vertices in the leg, by index.
    pub vertices: Vec<usize>,
    /// The distinguished ligament.
    pub cut: (usize, usize),
}

/// Skeletal filling of a preferred triangle with corners `a, b, c`.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Skeleton {
    pub corners: [VertexId; 3],
    /// Boundary images in cyclic order `a → b → c → a`, each corner once.
    pub cycle: Vec<VertexId>,
    pub corner_positions: [usize; 3],
    pub vertices: Vec<SkelVertex>,
    pub edges: Vec<(usize, usize, SkelEdgeKind)>,
    pub pairs: Vec<(usize, usize)>,
    pub classes: Vec<(usize, Crossing)>,
    pub legs: Vec<Leg>,
    pub middle: Vec<usize>,
    /// False when some `L2`-vertex is not matched exactly once.
    pub perfect_matching: bool,
    pub max_pair_distance: u32,
}

impl Skeleton {
    pub fn ribs(&self) -> usize {
        self.edges.iter().filter(|e| e.2 == SkelEdgeKind::Rib).count()
    }

    pub fn ligaments(&self) -> usize {
        self.edges.iter().filter(|e| e.2 == SkelEdgeKind::Ligament).count()
    }

    /// Partner of each skeleton vertex under the pairing.
    fn partner(&self) -> Vec<Option<usize>> {
        let mut p = vec![None; self.vertices.len()];
        for &(x, y) in &self.pairs {
            p[x] = Some(y);
            p[y] = Some(x);
        }
        p
    }

    /// Annotated edge list: kind, skeleton endpoints, image endpoints.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for &(x, y, k) in &self.edges {
            let kind = match k {
                SkelEdgeKind::Boundary => "boundary",
                SkelEdgeKind::Ligament => "ligament",
                SkelEdgeKind::Rib => "rib",
            };
            s.push_str(&format!("{kind} {x} {y} {} {}\n", self.vertices[x].image, self.vertices[y].image));
        }
        s
    }

    /// Faces cut out by ribs and ligaments, each as a cyclic sequence of
    /// skeleton vertices traversed in the boundary direction. The flag says
    /// whether each step is along the boundary.
    pub fn sub_pictures(&self) -> Vec<Vec<(usize, bool)>> {
        let n = self.vertices.len();
        let partner = self.partner();
        let mut used = vec![false; n];
        let mut faces = Vec::new();
        for s in 0..n {
            if used[s] {
                continue;
            }
            let mut face = Vec::new();
            let mut i = s;
            loop {
                used[i] = true;
                face.push((i, true));
                let j = (i + 1) % n;
                match partner[j] {
                    Some(w) if w != j => {
                        face.push((j, false));
                        i = w;
                    }
                    _ => i = j,
                }
                if i == s {
                    break;
                }
                if face.len() > 4 * n {
                    break;
                }
            }
            faces.push(face);
        }
        faces
    }
}

/// Depth profile helpers over a boundary cycle.
struct Cycle<'a> {
    ball: &'a CuspedBall,
    images: &'a [VertexId],
    l2: u32,
}

impl Cycle<'_> {
    fn deep_coset(&self, i: usize) -> Option<usize> {
        let v = self.images[i];
        if self.ball.depth_of(v) >= self.l2 && self.l2 > 0 {
            self.ball.coset_of[v as usize].map(|c| c as usize)
        } else {
            None
        }
    }
}

/// Builds the skeleton from the three sides `p(a,b)`, `p(b,c)`, `p(c,a)`.
pub fn build_skeleton(geo: &Geometry, sides: [&PreferredPath; 3]) -> Result<Skeleton> {
    let l2 = geo.constants.l2;
    let corners = [sides[0].a, sides[1].a, sides[2].a];
    for &c in &corners {
        if geo.ball.depth_of(c) == l2 {
            return Err(PreferredError::CornerAtL2(c));
        }
    }
    let mut cycle = Vec::new();
    let mut corner_positions = [0; 3];
    for (s, p) in sides.iter().enumerate() {
        corner_positions[s] = cycle.len();
        cycle.extend_from_slice(&p.vertices[..p.vertices.len() - 1]);
    }
    let n = cycle.len();
    let side_start = corner_positions;
    let side_end = [corner_positions[1], corner_positions[2], n];
    let sides_of = |pos: usize| -> Vec<usize> {
        (0..3).filter(|&s| (side_start[s] <= pos && pos <= side_end[s]) || (s == 2 && pos == 0)).collect()
    };
    let cyc = Cycle { ball: geo.ball, images: &cycle, l2 };
    // Maximal cyclic runs inside one L2-horoball.
    let mut arcs: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    let start = (0..n).find(|&i| cyc.deep_coset(i) != cyc.deep_coset((i + n - 1) % n));
    if let Some(st) = start {
        let mut i = st;
        let mut visited = 0;
        while visited < n {
            let here = cyc.deep_coset(i);
            let mut len = 1;
            while len < n && cyc.deep_coset((i + len) % n) == here {
                len += 1;
            }
            if let Some(c) = here {
                arcs.entry(c).or_default().push((i, (i + len - 1) % n));
            }
            visited += len;
            i = (i + len) % n;
        }
    } else if let Some(c) = cyc.deep_coset(0) {
        arcs.entry(c).or_default();
    }
    // Arcs per coset in cyclic order starting from position 0.
    for v in arcs.values_mut() {
        v.sort_unstable();
    }
    let mut l2_positions: BTreeSet<usize> = (0..n).filter(|&i| geo.ball.depth_of(cycle[i]) == l2).collect();
    let mut classes = Vec::new();
    let mut raw_pairs = Vec::new();
    for (&c, list) in &arcs {
        let covered = |pos: usize| list.iter().any(|&(s, e)| if s <= e { s <= pos && pos <= e } else { pos >= s || pos <= e });
        let corners_in = corner_positions.iter().filter(|&&p| covered(p)).count();
        let mut touched = BTreeSet::new();
        for &(s, e) in list {
            let mut p = s;
            loop {
                touched.extend(sides_of(p));
                if p == e {
                    break;
                }
                p = (p + 1) % n;
            }
        }
        let class = if corners_in == 1 {
            Crossing::Bite
        } else {
            match touched.len() {
                1 => Crossing::Nibble,
                2 => Crossing::Dip,
                _ => Crossing::Plunge,
            }
        };
        classes.push((c, class));
        let m = list.len();
        for i in 0..m {
            let end = list[i].1;
            let next_start = list[(i + 1) % m].0;
            raw_pairs.push((end, next_start));
            l2_positions.insert(end);
            l2_positions.insert(next_start);
        }
    }
    let mut positions: BTreeMap<usize, Option<usize>> = l2_positions.iter().map(|&p| (p, None)).collect();
    for (s, &p) in corner_positions.iter().enumerate() {
        positions.insert(p, Some(s));
    }
    let vertices: Vec<SkelVertex> =
        positions.iter().map(|(&position, &corner)| SkelVertex { position, image: cycle[position], corner }).collect();
    let index: HashMap<usize, usize> = vertices.iter().enumerate().map(|(i, v)| (v.position, i)).collect();
    let mut edges: Vec<(usize, usize, SkelEdgeKind)> =
        (0..vertices.len()).map(|i| (i, (i + 1) % vertices.len(), SkelEdgeKind::Boundary)).collect();
    let mut pairs = Vec::new();
    let mut count = vec![0usize; vertices.len()];
    let mut max_pair_distance = 0;
    for &(x, y) in &raw_pairs {
        let (ix, iy) = (index[&x], index[&y]);
        count[ix] += 1;
        count[iy] += 1;
        pairs.push((ix, iy));
        let d = geo.d(cycle[x], cycle[y])?;
        max_pair_distance = max_pair_distance.max(d);
        let kind = if cycle[x] == cycle[y] { SkelEdgeKind::Ligament } else { SkelEdgeKind::Rib };
        edges.push((ix, iy, kind));
    }
    let perfect_matching = vertices
        .iter()
        .enumerate()
        .all(|(i, v)| if v.corner.is_some() { count[i] == 0 } else { count[i] == 1 })
        && pairs.iter().all(|&(x, y)| x != y);
    // Legs: the two sides at a corner agree up to the distinguished ligament.
    let mut legs = Vec::new();
    let mut inside = vec![false; vertices.len()];
    for (s, &cp) in corner_positions.iter().enumerate() {
        let forward = side_end[s] - cp;
        let prev = (s + 2) % 3;
        let backward = side_end[prev] - side_start[prev];
        let mut agree = 0;
        while agree < forward.min(backward) && cycle[(cp + agree + 1) % n] == cycle[(cp + n - agree - 1) % n] {
            agree += 1;
        }
        let cut = (1..=agree).rev().find_map(|t| {
            let (x, y) = ((cp + t) % n, (cp + n - t) % n);
            let (ix, iy) = (index.get(&x)?, index.get(&y)?);
            pairs.iter().any(|&p| p == (*ix, *iy) || p == (*iy, *ix)).then_some((t, *ix, *iy))
        });
        if let Some((t, ix, iy)) = cut {
            let (px, py) = ((cp + t) % n, (cp + n - t) % n);
            let mut members = Vec::new();
            for (i, v) in vertices.iter().enumerate() {
                let off_f = (v.position + n - cp) % n;
                let off_b = (cp + n - v.position) % n;
                if off_f <= t || off_b <= t {
                    members.push(i);
                    if v.position != px && v.position != py {
                        inside[i] = true;
                    }
                }
            }
            legs.push(Leg { corner: s, vertices: members, cut: (ix, iy) });
        }
    }
    let middle = (0..vertices.len()).filter(|&i| !inside[i]).collect();
    Ok(Skeleton {
        corners,
        cycle,
        corner_positions,
        vertices,
        edges,
        pairs,
        classes,
        legs,
        middle,
        perfect_matching,
        max_pair_distance,
    })
}

/// Induced subgraph of vertices up to a depth, with id maps both ways.
pub struct ThickPart {
    pub depth: u32,
    pub graph: Graph,
    pub to_ball: Vec<VertexId>,
    from_ball: Vec<Option<VertexId>>,
}

impl ThickPart {
    pub fn new(ball: &CuspedBall, depth: u32) -> Self {
        let keep: Vec<bool> = ball.depths.iter().map(|&k| k <= depth).collect();
        let (graph, to_ball) = ball.graph.induced(&keep);
        let mut from_ball = vec![None; ball.len()];
        for (i, &v) in to_ball.iter().enumerate() {
            from_ball[v as usize] = Some(i as VertexId);
        }
        ThickPart { depth, graph, to_ball, from_ball }
    }

    pub fn local(&self, v: VertexId) -> Result<VertexId> {
        self.from_ball[v as usize].ok_or(PreferredError::NotThick(v))
    }
}

/// The bicombing `q`: preferred paths with every thick piece replaced by the
/// homological bicombing of its endpoints.
pub struct QBicombing<'a> {
    pub geo: &'a Geometry<'a>,
    pub thick: &'a ThickPart,
    pub mineyev: &'a Mineyev<'a>,
}

impl QBicombing<'_> {
    /// `Q(u, v)` computed on the thick part, in ball vertex ids.
    pub fn big_q(&self, u: VertexId, v: VertexId) -> Result<Chain1<VertexId>> {
        let q = self.mineyev.q(self.thick.local(u)?, self.thick.local(v)?)?;
        // The induced subgraph keeps the vertex order, so orientations carry over.
        Ok(q.map_keys(|e| Edge(self.thick.to_ball[e.0 as usize], self.thick.to_ball[e.1 as usize])))
    }

    /// Split points of a path: its ends and its vertices at depth `L2`.
    fn splits(&self, vertices: &[VertexId]) -> Vec<usize> {
        let l2 = self.geo.constants.l2;
        let last = vertices.len() - 1;
        (0..=last).filter(|&i| i == 0 || i == last || self.geo.ball.depth_of(vertices[i]) == l2).collect()
    }

    fn is_thick(&self, piece: &[VertexId]) -> bool {
        piece.iter().all(|&v| self.geo.ball.depth_of(v) <= self.geo.constants.l2)
    }

    pub fn q(&self, p: &PreferredPath) -> Result<Chain1<VertexId>> {
        let mut out = SparseChain::zero();
        let s = self.splits(&p.vertices);
        for w in s.windows(2) {
            let piece = &p.vertices[w[0]..=w[1]];
            if self.is_thick(piece) {
                out.add(&self.big_q(piece[0], piece[piece.len() - 1])?);
            } else {
                out.add(&path_chain(piece));
            }
        }
        Ok(out)
    }

    /// Sum over thick sub-pictures of the `Q`-chains around their boundaries.
    pub fn c_abc(&self, sk: &Skeleton) -> Result<Chain1<VertexId>> {
        let mut out = SparseChain::zero();
        let n = sk.cycle.len();
        for face in sk.sub_pictures() {
            let thick = face.iter().filter(|s| s.1).all(|&(i, _)| {
                let from = sk.vertices[i].position;
                let to = sk.vertices[(i + 1) % sk.vertices.len()].position;
                let len = (to + n - from) % n;
                let len = if len == 0 { n } else { len };
                (0..=len).all(|t| self.geo.ball.depth_of(sk.cycle[(from + t) % n]) <= self.geo.constants.l2)
            });
            if !thick {
                continue;
            }
            let m = face.len();
            for k in 0..m {
                let (i, boundary) = face[k];
                let j = if boundary { (i + 1) % sk.vertices.len() } else { face[(k + 1) % m].0 };
                let (u, v) = (sk.vertices[i].image, sk.vertices[j].image);
                if u != v {
                    out.add(&self.big_q(u, v)?);
                }
            }
        }
        Ok(out)
    }

    /// Edges of `q(a,b) + q(b,c) + q(c,a) − c_abc` with an endpoint above depth `L2`.
    pub fn defect_outside(&self, sides: [&PreferredPath; 3], c: &Chain1<VertexId>) -> Result<Vec<Edge<VertexId>>> {
        let mut s = SparseChain::zero();
        for p in sides {
            s.add(&self.q(p)?);
        }
        s.sub(c);
        let l2 = self.geo.constants.l2;
        Ok(s.support().filter(|e| self.geo.ball.depth_of(e.0) < l2 || self.geo.ball.depth_of(e.1) < l2).cloned().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cusped::HoroballId;
    use crate::oracle::GroupOracle;
    use crate::presentation::RelativePresentation;

    fn f2() -> (RelativePresentation, GroupOracle) {
        let rp = RelativePresentation::parse("generators a b\nparabolic 1 type Z generators a\nparabolic 2 type Z generators b\n").unwrap();
        let o = GroupOracle::for_presentation(&rp);
        (rp, o)
    }

    #[test]
    fn bounds_at_unit_delta() {
        let c = Constants::theoretical(1);
        assert_eq!(length_bound(&c, 0), 392);
        assert_eq!(length_bound(&c, 5), 402);
        assert_eq!(hausdorff_bound(&c), 31);
        assert_eq!(slimness_bound(&c), 136);
    }

    #[test]
    fn shallow_pair_is_geodesic() {
        let (rp, o) = f2();
        let b = CuspedBall::build(&o, &rp, 3, 6, 100_000).unwrap();
        let geo = Geometry::new(&b, Constants::explicit(1, 1, 4, 6), 3);
        let x = b.cayley_vertex(&rp.parse_word("a b").unwrap()).unwrap();
        let y = b.cayley_vertex(&rp.parse_word("b^-1").unwrap()).unwrap();
        let f = geo.family_ck(x, y).unwrap();
        assert!(f.members.is_empty());
        let p = geo.preferred_path(x, y, &f.members).unwrap();
        let q = geo.quasigeodesic_check(&p).unwrap();
        assert_eq!(q.length, q.distance);
        assert_eq!(q.hausdorff, 0);
    }

    #[test]
    fn power_pair_enters_its_horoball() {
        let (rp, o) = f2();
        let b = CuspedBall::build(&o, &rp, 5, 8, 200_000).unwrap();
        let geo = Geometry::new(&b, Constants::explicit(1, 1, 2, 4), 5);
        let x = b.cayley_vertex(&rp.parse_word("a^-5").unwrap()).unwrap();
        let y = b.cayley_vertex(&rp.parse_word("a^5").unwrap()).unwrap();
        let ca = b.coset_index(&HoroballId { parabolic: 0, transversal: Word::identity() }).unwrap();
        let c0 = geo.family_c0(x, y).unwrap();
        let ck = geo.family_ck(x, y).unwrap();
        assert_eq!(c0.members, vec![ca]);
        assert_eq!(ck.members, vec![ca]);
        let p = geo.preferred_path(x, y, &ck.members).unwrap();
        assert!(p.vertices.iter().any(|&v| b.depth_of(v) >= 2));
        assert!(geo.quasigeodesic_check(&p).unwrap().ok());
        let back = geo.preferred_path(y, x, &[ca]).unwrap();
        assert_eq!(back.len(), p.len());
        assert!(matches!(geo.preferred_path(x, x, &[]), Err(PreferredError::SameEndpoints(_))));
    }

    #[test]
    fn closure_is_reversal_symmetric() {
        let (rp, o) = f2();
        let b = CuspedBall::build(&o, &rp, 3, 8, 200_000).unwrap();
        let geo = Geometry::new(&b, Constants::explicit(1, 1, 2, 4), 3);
        let w = |s: &str| b.cayley_vertex(&rp.parse_word(s).unwrap()).unwrap();
        let pairs = [(w("a^-2"), w("a^2 b")), (w("b"), w("a^3"))];
        let cl = family_closure(&geo, &pairs, 10).unwrap();
        assert!(cl.fixpoint);
        for &(x, y) in &pairs {
            let mut f = cl.family(x, y).unwrap().members;
            let g = cl.family(y, x).unwrap().members;
            f.reverse();
            assert_eq!(f, g);
        }
    }

    #[test]
    fn shallow_triangle_has_bare_skeleton() {
        let (rp, o) = f2();
        let b = CuspedBall::build(&o, &rp, 2, 6, 100_000).unwrap();
        let geo = Geometry::new(&b, Constants::explicit(1, 1, 4, 6), 2);
        let w = |s: &str| b.cayley_vertex(&rp.parse_word(s).unwrap()).unwrap();
        let t = [w("a"), w("b"), w("b^-1")];
        let sides: Vec<PreferredPath> = [(0, 1), (1, 2), (2, 0)].iter().map(|&(i, j)| geo.preferred_path(t[i], t[j], &[]).unwrap()).collect();
        let sk = build_skeleton(&geo, [&sides[0], &sides[1], &sides[2]]).unwrap();
        assert_eq!(sk.ribs(), 0);
        assert!(sk.classes.is_empty());
        assert!(sk.pairs.is_empty());
    }
}
