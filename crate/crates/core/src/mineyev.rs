//! Mineyev's homological bicombing on a finite hyperbolic graph.
//!
//! Starting from the canonical geodesic bicombing, the 0-chains `f(a, b)`
//! average over flowers every `10δ` steps, `star` smears them over balls of
//! radius `7δ`, and the 1-chains `Q'` are built by induction on distance.
//! `Q` is the antisymmetrization of `Q'`. All coefficients are exact.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use num::{One, Signed};

use crate::chain::{path_chain, Chain0, Chain1, Rational, SparseChain};
use crate::graph::{Distances, VertexId, UNREACHED};
use crate::metric::{canonical_geodesic, MetricError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MineyevError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("recursion from {a} to {b} does not get closer; the graph is not hyperbolic enough for this parameter")]
    NoProgress { a: VertexId, b: VertexId },
    #[error("the parameter must be at least one")]
    ZeroParameter,
}

type Memo<T> = RefCell<HashMap<(VertexId, VertexId), Rc<T>>>;

/// Memoized state for one graph and one parameter `δ`.
pub struct Mineyev<'g> {
    pub dist: &'g Distances<'g>,
    pub delta: u32,
    geodesics: Memo<Vec<VertexId>>,
    f: Memo<Chain0<VertexId>>,
    q_prime: Memo<Chain1<VertexId>>,
    stars: RefCell<HashMap<VertexId, Rc<Vec<VertexId>>>>,
}

impl<'g> Mineyev<'g> {
    pub fn new(dist: &'g Distances<'g>, delta: u32) -> Result<Self, MineyevError> {
        if delta == 0 {
            return Err(MineyevError::ZeroParameter);
        }
        Ok(Mineyev {
            dist,
            delta,
            geodesics: RefCell::new(HashMap::new()),
            f: RefCell::new(HashMap::new()),
            q_prime: RefCell::new(HashMap::new()),
            stars: RefCell::new(HashMap::new()),
        })
    }

    fn step(&self) -> u32 {
        10 * self.delta
    }

    pub fn d(&self, a: VertexId, b: VertexId) -> Result<u32, MineyevError> {
        match self.dist.d(a, b) {
            UNREACHED => Err(MetricError::Disconnected(a, b).into()),
            d => Ok(d),
        }
    }

    pub fn geodesic(&self, a: VertexId, b: VertexId) -> Result<Rc<Vec<VertexId>>, MineyevError> {
        if let Some(g) = self.geodesics.borrow().get(&(a, b)) {
            return Ok(g.clone());
        }
        let g = Rc::new(canonical_geodesic(self.dist, a, b)?);
        self.geodesics.borrow_mut().insert((a, b), g.clone());
        Ok(g)
    }

    /// Point of `γ(a, b)` at the largest multiple of `10δ` strictly below `d(a, b)`.
    pub fn pr(&self, a: VertexId, b: VertexId) -> Result<VertexId, MineyevError> {
        if a == b {
            return Ok(a);
        }
        let d = self.d(a, b)?;
        let r = (d - 1) / self.step() * self.step();
        Ok(self.geodesic(a, b)?[r as usize])
    }

    /// `S(a, d(a, b)) ∩ B(b, δ)`.
    pub fn flower(&self, a: VertexId, b: VertexId) -> Vec<VertexId> {
        let ra = self.dist.row(a);
        let rb = self.dist.row(b);
        let d = ra[b as usize];
        (0..ra.len() as VertexId).filter(|&x| ra[x as usize] == d && rb[x as usize] <= self.delta).collect()
    }

    pub fn f(&self, a: VertexId, b: VertexId) -> Result<Rc<Chain0<VertexId>>, MineyevError> {
        if let Some(c) = self.f.borrow().get(&(a, b)) {
            return Ok(c.clone());
        }
        let d = self.d(a, b)?;
        let step = self.step();
        let c = if d <= step {
            SparseChain::single(b, Rational::one())
        } else if d % step != 0 {
            (*self.f(a, self.pr(a, b)?)?).clone()
        } else {
            let fl = self.flower(a, b);
            let w = Rational::new(1.into(), (fl.len() as i64).into());
            let mut acc = SparseChain::zero();
            for x in fl {
                acc.add_scaled(&*self.f(a, self.pr(a, x)?)?, &w);
            }
            acc
        };
        let c = Rc::new(c);
        self.f.borrow_mut().insert((a, b), c.clone());
        Ok(c)
    }

    fn ball7(&self, a: VertexId) -> Rc<Vec<VertexId>> {
        if let Some(b) = self.stars.borrow().get(&a) {
            return b.clone();
        }
        let r = self.dist.graph.bfs_multi(&[a], 7 * self.delta);
        let b: Rc<Vec<VertexId>> = Rc::new((0..r.len() as VertexId).filter(|&x| r[x as usize] <= 7 * self.delta).collect());
        self.stars.borrow_mut().insert(a, b.clone());
        b
    }

    /// Linear extension of the uniform average over `B(a, 7δ)`.
    pub fn star(&self, c: &Chain0<VertexId>) -> Chain0<VertexId> {
        let mut out = SparseChain::zero();
        for (&a, x) in c.iter() {
            let ball = self.ball7(a);
            let w = x / Rational::from_integer((ball.len() as i64).into());
            for &y in ball.iter() {
                out.add_term(y, w.clone());
            }
        }
        out
    }

    pub fn fbar(&self, a: VertexId, b: VertexId) -> Result<Chain0<VertexId>, MineyevError> {
        Ok(self.star(&*self.f(a, b)?))
    }

    /// Chain of the canonical geodesic.
    pub fn p(&self, a: VertexId, b: VertexId) -> Result<Chain1<VertexId>, MineyevError> {
        Ok(path_chain(&self.geodesic(a, b)?))
    }

    pub fn q_prime(&self, a: VertexId, b: VertexId) -> Result<Rc<Chain1<VertexId>>, MineyevError> {
        if let Some(c) = self.q_prime.borrow().get(&(a, b)) {
            return Ok(c.clone());
        }
        let d = self.d(a, b)?;
        let c = if d <= self.step() {
            self.p(a, b)?
        } else {
            let fb = self.fbar(b, a)?;
            let mut acc = SparseChain::zero();
            for (&x, w) in fb.iter() {
                if self.d(a, x)? >= d {
                    return Err(MineyevError::NoProgress { a, b });
                }
                acc.add_scaled(&*self.q_prime(a, x)?, w);
                acc.add_scaled(&self.p(x, b)?, w);
            }
            acc
        };
        let c = Rc::new(c);
        self.q_prime.borrow_mut().insert((a, b), c.clone());
        Ok(c)
    }

    /// `½(Q'(a, b) − Q'(b, a))`.
    pub fn q(&self, a: VertexId, b: VertexId) -> Result<Chain1<VertexId>, MineyevError> {
        if a == b {
            return Ok(SparseChain::zero());
        }
        let half = Rational::new(1.into(), 2.into());
        let mut c = self.q_prime(a, b)?.scaled(&half);
        c.add_scaled(&*self.q_prime(b, a)?, &-half);
        Ok(c)
    }

    /// `|Q(a, b) + Q(b, c) + Q(c, a)|₁`.
    pub fn triangle_area(&self, a: VertexId, b: VertexId, c: VertexId) -> Result<Rational, MineyevError> {
        let mut s = self.q(a, b)?;
        s.add(&self.q(b, c)?);
        s.add(&self.q(c, a)?);
        Ok(s.l1_norm())
    }

    /// Whether `supp f̄(a, b)` lies in the `8δ`-ball about the point of
    /// `γ(a, b)` at distance `10δ` from `a`; vacuous when `d(a, b) ≤ 10δ`.
    pub fn flower_support_ok(&self, a: VertexId, b: VertexId) -> Result<bool, MineyevError> {
        if self.d(a, b)? <= self.step() {
            return Ok(true);
        }
        let centre = self.geodesic(a, b)?[self.step() as usize];
        let row = self.dist.row(centre);
        Ok(self.fbar(a, b)?.support().all(|&x| row[x as usize] <= 8 * self.delta))
    }

    /// Largest distance from a vertex of `supp Q(a, b)` to `γ(a, b)`, and the
    /// ratio `|Q(a, b)|₁ / d(a, b)` (zero when `a = b`).
    pub fn quasi_geodesic_profile(&self, a: VertexId, b: VertexId) -> Result<(u32, Rational), MineyevError> {
        let q = self.q(a, b)?;
        let g = self.geodesic(a, b)?;
        let near = self.dist.graph.bfs_multi(&g, u32::MAX);
        let spread = q.support().flat_map(|e| [e.0, e.1]).map(|v| near[v as usize]).max().unwrap_or(0);
        let d = self.d(a, b)?;
        let ratio = if d == 0 { Rational::from_integer(0.into()) } else { q.l1_norm() / Rational::from_integer((d as i64).into()) };
        Ok((spread, ratio))
    }

    /// True when every coefficient of `f(a, b)` is nonnegative and they sum to one.
    pub fn f_is_convex(&self, a: VertexId, b: VertexId) -> Result<bool, MineyevError> {
        let f = self.f(a, b)?;
        Ok(f.iter().all(|(_, c)| !c.is_negative()) && f.total() == Rational::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{boundary1, int, rat, vertex};
    use crate::graph::Graph;

    fn path_graph(n: u32) -> Graph {
        let e: Vec<(u32, u32)> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::from_edges(n as usize, &e)
    }

    #[test]
    fn projection_examples() {
        let g = path_graph(40);
        let d = Distances::new(&g);
        let m = Mineyev::new(&d, 1).unwrap();
        assert_eq!(m.pr(0, 25).unwrap(), 20);
        assert_eq!(m.pr(0, 10).unwrap(), 0);
        assert_eq!(m.pr(7, 7).unwrap(), 7);
        assert_eq!(m.flower(0, 25), vec![25]);
    }

    #[test]
    fn f_base_and_projection_branch() {
        let g = path_graph(40);
        let d = Distances::new(&g);
        let m = Mineyev::new(&d, 1).unwrap();
        assert_eq!(*m.f(0, 7).unwrap(), vertex(7));
        assert_eq!(*m.f(0, 13).unwrap(), *m.f(0, m.pr(0, 13).unwrap()).unwrap());
        assert_eq!(*m.f(0, 33).unwrap(), vertex(10));
    }

    #[test]
    fn star_of_isolated_vertex() {
        let g = Graph::from_edges(1, &[]);
        let d = Distances::new(&g);
        let m = Mineyev::new(&d, 1).unwrap();
        assert_eq!(m.star(&vertex(0)), vertex(0));
    }

    #[test]
    fn q_boundary_and_antisymmetry_on_a_path() {
        let g = path_graph(30);
        let d = Distances::new(&g);
        let m = Mineyev::new(&d, 1).unwrap();
        for (a, b) in [(0, 29), (3, 17), (5, 5), (12, 2)] {
            let q = m.q(a, b).unwrap();
            let mut want = vertex(b);
            want.sub(&vertex(a));
            if a != b {
                assert_eq!(boundary1(&q), want);
            }
            assert_eq!(m.q(b, a).unwrap(), q.negated());
        }
        assert_eq!(m.triangle_area(0, 10, 25).unwrap(), int(0));
        assert_eq!(m.q(0, 3).unwrap().coeff(&crate::chain::Edge(0, 1)), rat(1, 1));
    }

    #[test]
    fn zero_parameter_rejected() {
        let g = path_graph(3);
        let d = Distances::new(&g);
        assert!(matches!(Mineyev::new(&d, 0), Err(MineyevError::ZeroParameter)));
    }
}
