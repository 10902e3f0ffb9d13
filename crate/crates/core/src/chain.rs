//! Finitely supported cellular chains with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt::Display;

use num::{BigInt, BigRational, One, Signed, Zero};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Formal sum of cells. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseChain<K: Ord + Clone> {
    terms: BTreeMap<K, Rational>,
}

impl<K: Ord + Clone> Default for SparseChain<K> {
    fn default() -> Self {
        SparseChain { terms: BTreeMap::new() }
    }
}

impl<K: Ord + Clone> SparseChain<K> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(k: K, c: Rational) -> Self {
        let mut s = Self::zero();
        s.add_term(k, c);
        s
    }

    pub fn add_term(&mut self, k: K, c: Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(k.clone()).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn add_scaled(&mut self, other: &Self, c: &Rational) {
        if c.is_zero() {
            return;
        }
        for (k, v) in &other.terms {
            self.add_term(k.clone(), v * c);
        }
    }

    pub fn add(&mut self, other: &Self) {
        self.add_scaled(other, &Rational::one());
    }

    pub fn sub(&mut self, other: &Self) {
        self.add_scaled(other, &-Rational::one());
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut s = self.clone();
        s.add(other);
        s
    }

    pub fn minus(&self, other: &Self) -> Self {
        let mut s = self.clone();
        s.sub(other);
        s
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        let mut s = Self::zero();
        s.add_scaled(self, c);
        s
    }

    pub fn negated(&self) -> Self {
        self.scaled(&-Rational::one())
    }

    pub fn coeff(&self, k: &K) -> Rational {
        self.terms.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &Rational)> {
        self.terms.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &K> {
        self.terms.keys()
    }

    /// Sum of absolute coefficients.
    pub fn l1_norm(&self) -> Rational {
        self.terms.values().fold(Rational::zero(), |a, v| a + v.abs())
    }

    /// Sum of coefficients.
    pub fn total(&self) -> Rational {
        self.terms.values().fold(Rational::zero(), |a, v| a + v)
    }

    pub fn map_keys<J: Ord + Clone>(&self, f: impl Fn(&K) -> J) -> SparseChain<J> {
        let mut s = SparseChain::zero();
        for (k, v) in &self.terms {
            s.add_term(f(k), v.clone());
        }
        s
    }

    /// One line per cell: `cell-id numerator/denominator`.
    pub fn to_lines(&self, name: impl Fn(&K) -> String) -> String {
        let mut out = String::new();
        for (k, v) in &self.terms {
            out += &format!("{} {}/{}\n", name(k), v.numer(), v.denom());
        }
        out
    }
}

/// Unoriented edge stored with endpoints in increasing order; a chain
/// coefficient `c` on `Edge(u, v)` means `c` times the edge oriented `u → v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge<V>(pub V, pub V);

impl<V: Ord + Copy> Edge<V> {
    /// The stored edge and the sign of the orientation `a → b` relative to it.
    pub fn oriented(a: V, b: V) -> (Edge<V>, i64) {
        if a < b {
            (Edge(a, b), 1)
        } else {
            (Edge(b, a), -1)
        }
    }
}

impl<V: Display> Display for Edge<V> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

pub type Chain0<V> = SparseChain<V>;
pub type Chain1<V> = SparseChain<Edge<V>>;
pub type Chain2<V> = SparseChain<Circuit<V>>;

/// 1-chain of an edge path given by its vertex sequence.
pub fn path_chain<V: Ord + Copy>(path: &[V]) -> Chain1<V> {
    let mut c = SparseChain::zero();
    for w in path.windows(2) {
        let (e, s) = Edge::oriented(w[0], w[1]);
        c.add_term(e, int(s));
    }
    c
}

pub fn oriented_edge<V: Ord + Copy>(a: V, b: V) -> Chain1<V> {
    path_chain(&[a, b])
}

pub fn vertex<V: Ord + Clone>(v: V) -> Chain0<V> {
    SparseChain::single(v, Rational::one())
}

pub fn boundary1<V: Ord + Copy>(c: &Chain1<V>) -> Chain0<V> {
    let mut out = SparseChain::zero();
    for (Edge(u, v), x) in c.iter() {
        out.add_term(*v, x.clone());
        out.add_term(*u, -x.clone());
    }
    out
}

/// A 2-cell given by its boundary circuit, stored in a canonical rotation and
/// direction: the least vertex first, then the smaller of its two neighbours.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Circuit<V>(pub Vec<V>);

impl<V: Ord + Copy> Circuit<V> {
    /// Canonical circuit and the sign of the given orientation relative to it.
    pub fn oriented(boundary: &[V]) -> (Circuit<V>, i64) {
        let n = boundary.len();
        let i = (0..n).min_by_key(|&i| boundary[i]).unwrap();
        let fwd: Vec<V> = (0..n).map(|k| boundary[(i + k) % n]).collect();
        if n < 3 || fwd[1] < fwd[n - 1] {
            (Circuit(fwd), 1)
        } else {
            let mut back = vec![fwd[0]];
            back.extend(fwd[1..].iter().rev());
            (Circuit(back), -1)
        }
    }

    pub fn boundary_path(&self) -> Vec<V> {
        let mut p = self.0.clone();
        p.push(self.0[0]);
        p
    }
}

pub fn circuit_chain<V: Ord + Copy>(boundary: &[V]) -> Chain2<V> {
    let (c, s) = Circuit::oriented(boundary);
    SparseChain::single(c, int(s))
}

pub fn boundary2<V: Ord + Copy>(c: &Chain2<V>) -> Chain1<V> {
    let mut out = SparseChain::zero();
    for (cell, x) in c.iter() {
        out.add_scaled(&path_chain(&cell.boundary_path()), x);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecomposeError {
    #[error("the boundary of the chain is not supported in the terminal set")]
    BoundaryNotInT,
    #[error("cycle decomposition of a circulation with no terminal set is not supported")]
    Circulation,
}

/// Writes `f` as a coherent nonnegative sum of simple paths running along the
/// orientation of `f`. Paths start and end in `terminals`, or are closed.
pub fn decompose<V: Ord + Copy>(f: &Chain1<V>, terminals: &[V]) -> Result<Vec<(Rational, Vec<V>)>, DecomposeError> {
    let excess = boundary1(f);
    if excess.support().any(|v| terminals.binary_search(v).is_err()) {
        return Err(DecomposeError::BoundaryNotInT);
    }
    if terminals.is_empty() && !f.is_zero() {
        return Err(DecomposeError::Circulation);
    }
    // Residual flow on directed edges; excess is inflow minus outflow.
    let mut out: BTreeMap<V, BTreeMap<V, Rational>> = BTreeMap::new();
    for (Edge(u, v), c) in f.iter() {
        let (a, b) = if c.is_positive() { (*u, *v) } else { (*v, *u) };
        out.entry(a).or_default().insert(b, c.abs());
    }
    let mut excess: BTreeMap<V, Rational> = excess.iter().map(|(v, c)| (*v, c.clone())).collect();
    let mut terms = Vec::new();
    loop {
        let start = excess
            .iter()
            .find(|(_, c)| c.is_negative())
            .map(|(v, _)| *v)
            .or_else(|| out.keys().next().copied());
        let Some(s) = start else { break };
        let mut path = vec![s];
        let mut pos: BTreeMap<V, usize> = BTreeMap::new();
        pos.insert(s, 0);
        let closed = loop {
            let cur = *path.last().unwrap();
            if path.len() > 1 && excess.get(&cur).is_some_and(|c| c.is_positive()) {
                break false;
            }
            let next = *out[&cur].keys().next().unwrap();
            if let Some(&i) = pos.get(&next) {
                path.drain(..i);
                path.push(next);
                break true;
            }
            pos.insert(next, path.len());
            path.push(next);
        };
        let mut alpha = path.windows(2).map(|w| out[&w[0]][&w[1]].clone()).min().unwrap();
        if !closed {
            let first = path[0];
            let last = *path.last().unwrap();
            alpha = alpha.min(-excess[&first].clone()).min(excess[&last].clone());
            for (v, d) in [(first, alpha.clone()), (last, -alpha.clone())] {
                let e = excess.get_mut(&v).unwrap();
                *e += d;
                if e.is_zero() {
                    excess.remove(&v);
                }
            }
        }
        for w in path.windows(2) {
            let m = out.get_mut(&w[0]).unwrap();
            let c = m.get_mut(&w[1]).unwrap();
            *c -= &alpha;
            if c.is_zero() {
                m.remove(&w[1]);
                if m.is_empty() {
                    out.remove(&w[0]);
                }
            }
        }
        terms.push((alpha, path));
    }
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_boundary() {
        let e = oriented_edge(3u32, 1u32);
        let b = boundary1(&e);
        assert_eq!(b.coeff(&1), int(1));
        assert_eq!(b.coeff(&3), int(-1));
        assert_eq!(e.l1_norm(), int(1));
    }

    #[test]
    fn closed_loop_has_no_boundary() {
        let c = path_chain(&[0u32, 1, 2, 0]);
        assert!(boundary1(&c).is_zero());
    }

    #[test]
    fn boundary_of_boundary_vanishes() {
        let sq = circuit_chain(&[5u32, 2, 7, 9]);
        assert!(boundary1(&boundary2(&sq)).is_zero());
        assert_eq!(boundary2(&sq), path_chain(&[5u32, 2, 7, 9, 5]));
        let rev = circuit_chain(&[9u32, 7, 2, 5]);
        assert_eq!(rev, sq.negated());
    }

    #[test]
    fn decompose_two_parallel_paths() {
        let mut f = path_chain(&[0u32, 1, 2, 3]).scaled(&rat(1, 2));
        f.add(&path_chain(&[0u32, 4, 5, 3]).scaled(&rat(1, 2)));
        let d = decompose(&f, &[0, 3]).unwrap();
        assert_eq!(d, vec![(rat(1, 2), vec![0, 1, 2, 3]), (rat(1, 2), vec![0, 4, 5, 3])]);
        assert_eq!(decompose(&f, &[0]), Err(DecomposeError::BoundaryNotInT));
        assert_eq!(decompose(&path_chain(&[0u32, 1, 2, 0]), &[]), Err(DecomposeError::Circulation));
    }

    #[test]
    fn decompose_with_cycle() {
        let mut f = path_chain(&[0u32, 1, 2, 3]);
        f.add(&path_chain(&[1u32, 5, 6, 1]).scaled(&rat(2, 3)));
        let d = decompose(&f, &[0, 3]).unwrap();
        let total = d.iter().fold(int(0), |a, (c, p)| a + c * int(p.len() as i64 - 1));
        assert_eq!(total, f.l1_norm());
        let mut sum = SparseChain::zero();
        for (c, p) in &d {
            sum.add_scaled(&path_chain(p), c);
        }
        assert_eq!(sum, f);
    }

    #[test]
    fn serialization_lines() {
        let mut c = SparseChain::zero();
        c.add_term(Edge(0u32, 1u32), rat(1, 2));
        c.add_term(Edge(1u32, 2u32), rat(-3, 4));
        assert_eq!(c.to_lines(|e| e.to_string()), "0-1 1/2\n1-2 -3/4\n");
    }
}
