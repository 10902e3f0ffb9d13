//! Distances, canonical geodesics, Gromov products and hyperbolicity
//! estimates on finite graphs. All quantities are exact.

use std::collections::HashMap;
use std::rc::Rc;

use num::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::{int, rat, Rational};
use crate::graph::{Distances, Graph, VertexId, UNREACHED};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("vertices {0} and {1} lie in different components")]
    Disconnected(VertexId, VertexId),
}

pub fn bfs_distance(g: &Graph, a: VertexId, b: VertexId) -> Result<u32, MetricError> {
    let d = g.bfs_multi(&[a], u32::MAX)[b as usize];
    if d == UNREACHED {
        Err(MetricError::Disconnected(a, b))
    } else {
        Ok(d)
    }
}

/// Lexicographically least geodesic from the smaller endpoint to the larger,
/// reversed when queried the other way round.
pub fn canonical_geodesic(dist: &Distances, a: VertexId, b: VertexId) -> Result<Vec<VertexId>, MetricError> {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let row = dist.row(hi);
    if row[lo as usize] == UNREACHED {
        return Err(MetricError::Disconnected(a, b));
    }
    let mut path = vec![lo];
    let mut cur = lo;
    while cur != hi {
        let want = row[cur as usize] - 1;
        cur = *dist.graph.neighbors(cur).iter().find(|&&v| row[v as usize] == want).unwrap();
        path.push(cur);
    }
    if a > b {
        path.reverse();
    }
    Ok(path)
}

/// `(x, y)_z`, an exact half-integer.
pub fn gromov_product(dist: &Distances, x: VertexId, y: VertexId, z: VertexId) -> Result<Rational, MetricError> {
    let dxz = checked(dist, x, z)?;
    let dyz = checked(dist, y, z)?;
    let dxy = checked(dist, x, y)?;
    Ok(rat(dxz as i64 + dyz as i64 - dxy as i64, 2))
}

fn checked(dist: &Distances, a: VertexId, b: VertexId) -> Result<u32, MetricError> {
    match dist.d(a, b) {
        UNREACHED => Err(MetricError::Disconnected(a, b)),
        d => Ok(d),
    }
}

/// The hyperbolicity constants used by the path constructions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Constants {
    pub delta: u32,
    pub k: u32,
    pub l1: u32,
    pub l2: u32,
    pub regime: Regime,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Regime {
    Theoretical,
    Explicit,
}

impl Constants {
    /// `K = 10δ`, `L1 = 100K`, `L2 = 3L1`.
    pub fn theoretical(delta: u32) -> Self {
        let delta = delta.max(1);
        let k = 10 * delta;
        let l1 = 100 * k;
        Constants { delta, k, l1, l2: 3 * l1, regime: Regime::Theoretical }
    }

    /// Theoretical ratios from a measured estimate rounded up to an integer ≥ 1.
    pub fn from_measured(delta_hat: &Rational) -> Self {
        Self::theoretical(ceil_u32(delta_hat).max(1))
    }

    pub fn explicit(delta: u32, k: u32, l1: u32, l2: u32) -> Self {
        Constants { delta, k, l1, l2, regime: Regime::Explicit }
    }
}

pub fn ceil_u32(x: &Rational) -> u32 {
    x.ceil().to_integer().to_u32().unwrap_or(0)
}

/// Sampling policy for the hyperbolicity estimators.
#[derive(Clone, Copy, Debug)]
pub struct Budget {
    /// Exhaustive enumeration below this many inner vertices.
    pub exhaustive_below: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { exhaustive_below: 150, samples: 10_000, seed: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Estimate {
    pub value: Rational,
    /// Number of triangles or quadruples examined.
    pub samples: usize,
    pub exhaustive: bool,
    /// A configuration attaining the value.
    pub witness: Vec<VertexId>,
}

/// Vertices on some geodesic from `x` to `y`, grouped by distance from `x`.
struct Intervals<'a> {
    dist: &'a Distances<'a>,
    cache: HashMap<(VertexId, VertexId), Rc<Vec<Vec<VertexId>>>>,
}

impl<'a> Intervals<'a> {
    fn new(dist: &'a Distances<'a>) -> Self {
        Intervals { dist, cache: HashMap::new() }
    }

    fn get(&mut self, x: VertexId, y: VertexId) -> Rc<Vec<Vec<VertexId>>> {
        if let Some(v) = self.cache.get(&(x, y)) {
            return v.clone();
        }
        let rx = self.dist.row(x);
        let ry = self.dist.row(y);
        let d = rx[y as usize];
        let mut levels = vec![Vec::new(); d as usize + 1];
        for v in 0..rx.len() {
            if rx[v] != UNREACHED && ry[v] != UNREACHED && rx[v] + ry[v] == d {
                levels[rx[v] as usize].push(v as VertexId);
            }
        }
        let levels = Rc::new(levels);
        if self.cache.len() > 200_000 {
            self.cache.clear();
        }
        self.cache.insert((x, y), levels.clone());
        levels
    }
}

/// Largest fibre diameter of the comparison tripods of the triangle `x y z`,
/// taken over all choices of geodesic sides.
fn triangle_thinness(iv: &mut Intervals, x: VertexId, y: VertexId, z: VertexId) -> u32 {
    let dist = iv.dist;
    let mut worst = 0;
    for (c, p, q) in [(x, y, z), (y, z, x), (z, x, y)] {
        let dcp = dist.d(c, p) as i64;
        let dcq = dist.d(c, q) as i64;
        let dpq = dist.d(p, q) as i64;
        // Fibres through points at distance t from the corner, t <= (p, q)_c.
        let reach = (dcp + dcq - dpq) / 2;
        if reach <= 0 {
            continue;
        }
        let a = iv.get(c, p);
        let b = iv.get(c, q);
        for t in 1..=reach as usize {
            for &u in &a[t] {
                let row = dist.row(u);
                for &w in &b[t] {
                    worst = worst.max(row[w as usize]);
                }
            }
        }
    }
    worst
}

/// Thin-triangle constant over triangles with corners in `inner`.
pub fn delta_thin(dist: &Distances, inner: &[VertexId], budget: Budget) -> Estimate {
    let mut iv = Intervals::new(dist);
    let n = inner.len();
    let mut best = (0u32, Vec::new());
    let mut count = 0usize;
    let mut consider = |x, y, z, iv: &mut Intervals| {
        let t = triangle_thinness(iv, x, y, z);
        if t > best.0 || best.1.is_empty() {
            best = (t.max(best.0), vec![x, y, z]);
        }
    };
    let exhaustive = n < budget.exhaustive_below;
    if exhaustive {
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    consider(inner[i], inner[j], inner[k], &mut iv);
                    count += 1;
                }
            }
        }
    } else if n > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
        for _ in 0..budget.samples {
            let x = inner[rng.gen_range(0..n)];
            let y = inner[rng.gen_range(0..n)];
            let z = inner[rng.gen_range(0..n)];
            consider(x, y, z, &mut iv);
            count += 1;
        }
    }
    Estimate { value: int(best.0 as i64), samples: count, exhaustive, witness: best.1 }
}

fn four_point(dist: &Distances, q: [VertexId; 4]) -> i64 {
    let d = |i: usize, j: usize| dist.d(q[i], q[j]) as i64;
    let mut s = [d(0, 1) + d(2, 3), d(0, 2) + d(1, 3), d(0, 3) + d(1, 2)];
    s.sort_unstable();
    s[2] - s[1]
}

/// Four-point constant: half the gap between the two largest pair sums.
pub fn delta_fourpoint(dist: &Distances, inner: &[VertexId], budget: Budget) -> Estimate {
    let n = inner.len();
    let mut best = (0i64, Vec::new());
    let mut count = 0usize;
    let exhaustive = n < budget.exhaustive_below;
    let mut consider = |q: [VertexId; 4]| {
        let v = four_point(dist, q);
        if v > best.0 || best.1.is_empty() {
            best = (v.max(best.0), q.to_vec());
        }
    };
    if exhaustive {
        for a in 0..n {
            for b in a..n {
                for c in b..n {
                    for d in c..n {
                        consider([inner[a], inner[b], inner[c], inner[d]]);
                        count += 1;
                    }
                }
            }
        }
    } else if n > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
        for _ in 0..budget.samples {
            let mut q = [0; 4];
            for slot in q.iter_mut() {
                *slot = inner[rng.gen_range(0..n)];
            }
            consider(q);
            count += 1;
        }
    }
    Estimate { value: rat(best.0, 2), samples: count, exhaustive, witness: best.1 }
}

/// Slim-triangle constant for triangles with canonical sides: the farthest a
/// vertex of one side gets from the union of the other two.
pub fn delta_slim(dist: &Distances, inner: &[VertexId], budget: Budget) -> Result<Estimate, MetricError> {
    let g = dist.graph;
    let n = inner.len();
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let exhaustive = n < budget.exhaustive_below.min(40);
    let mut triples = Vec::new();
    if exhaustive {
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    triples.push([inner[i], inner[j], inner[k]]);
                }
            }
        }
    } else if n > 0 {
        for _ in 0..budget.samples {
            let mut t = [0; 3];
            for slot in t.iter_mut() {
                *slot = *inner.choose(&mut rng).unwrap();
            }
            triples.push(t);
        }
    }
    let mut best = (0u32, Vec::new());
    for t in &triples {
        let sides = [
            canonical_geodesic(dist, t[0], t[1])?,
            canonical_geodesic(dist, t[1], t[2])?,
            canonical_geodesic(dist, t[2], t[0])?,
        ];
        for i in 0..3 {
            let others: Vec<VertexId> = sides[(i + 1) % 3].iter().chain(&sides[(i + 2) % 3]).copied().collect();
            let d = g.bfs_multi(&others, u32::MAX);
            let m = sides[i].iter().map(|&v| d[v as usize]).max().unwrap_or(0);
            if m > best.0 {
                best = (m, t.to_vec());
            }
        }
    }
    Ok(Estimate { value: int(best.0 as i64), samples: triples.len(), exhaustive, witness: best.1 })
}

/// Largest distance from a vertex of `from` to the set `to`.
pub fn directed_hausdorff(g: &Graph, from: &[VertexId], to: &[VertexId]) -> u32 {
    if from.is_empty() || to.is_empty() {
        return 0;
    }
    let d = g.bfs_multi(to, u32::MAX);
    from.iter().map(|&v| d[v as usize]).max().unwrap()
}

/// Hausdorff distance between the vertex sets of two paths.
pub fn hausdorff_distance(g: &Graph, p: &[VertexId], q: &[VertexId]) -> u32 {
    directed_hausdorff(g, p, q).max(directed_hausdorff(g, q, p))
}

/// Worst distance from a vertex of `path` to `a ∪ b ∪ geodesic`; the tube
/// property asks this to stay within `3δ`.
pub fn tube_excess(g: &Graph, a: &[VertexId], b: &[VertexId], geodesic: &[VertexId], path: &[VertexId]) -> u32 {
    let mut target: Vec<VertexId> = a.to_vec();
    target.extend_from_slice(b);
    target.extend_from_slice(geodesic);
    directed_hausdorff(g, path, &target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::Zero;

    fn cycle(n: u32) -> Graph {
        let e: Vec<(u32, u32)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_edges(n as usize, &e)
    }

    fn all(g: &Graph) -> Vec<VertexId> {
        (0..g.len() as VertexId).collect()
    }

    #[test]
    fn four_cycle_geodesics() {
        let g = cycle(4);
        let d = Distances::new(&g);
        assert_eq!(canonical_geodesic(&d, 0, 2).unwrap(), vec![0, 1, 2]);
        assert_eq!(canonical_geodesic(&d, 2, 0).unwrap(), vec![2, 1, 0]);
        assert_eq!(canonical_geodesic(&d, 3, 3).unwrap(), vec![3]);
    }

    #[test]
    fn disconnected_reported() {
        let g = Graph::from_edges(3, &[(0, 1)]);
        assert_eq!(bfs_distance(&g, 0, 2), Err(MetricError::Disconnected(0, 2)));
        let d = Distances::new(&g);
        assert!(canonical_geodesic(&d, 2, 0).is_err());
    }

    #[test]
    fn gromov_products() {
        let g = cycle(6);
        let d = Distances::new(&g);
        assert_eq!(gromov_product(&d, 1, 1, 4).unwrap(), int(3));
        assert_eq!(gromov_product(&d, 0, 2, 1).unwrap(), int(0));
        assert_eq!(gromov_product(&d, 0, 3, 1).unwrap(), int(0));
        assert_eq!(gromov_product(&d, 0, 2, 4).unwrap(), int(1));
        let g5 = cycle(5);
        let d5 = Distances::new(&g5);
        assert_eq!(gromov_product(&d5, 0, 1, 3).unwrap(), rat(3, 2));
    }

    #[test]
    fn trees_are_thin() {
        let g = Graph::from_edges(7, &[(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)]);
        let d = Distances::new(&g);
        assert!(delta_thin(&d, &all(&g), Budget::default()).value.is_zero());
        assert!(delta_fourpoint(&d, &all(&g), Budget::default()).value.is_zero());
    }

    #[test]
    fn constants_ratios() {
        let c = Constants::theoretical(2);
        assert_eq!((c.k, c.l1, c.l2), (20, 2000, 6000));
        assert_eq!(Constants::from_measured(&rat(3, 2)).delta, 2);
        assert_eq!(Constants::from_measured(&int(0)).delta, 1);
    }

    #[test]
    fn hausdorff_of_reversal() {
        let g = cycle(8);
        assert_eq!(hausdorff_distance(&g, &[0, 1, 2], &[2, 1, 0]), 0);
        assert_eq!(hausdorff_distance(&g, &[0, 1, 2, 3, 4], &[0, 7, 6, 5, 4]), 2);
    }
}
