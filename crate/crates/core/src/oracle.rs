//! Word problem solutions and Cayley balls.

use std::collections::HashMap;

use crate::graph::{Graph, VertexId};
use crate::parabolic::{PElem, Peripheral};
use crate::presentation::{ParabolicKind, ParabolicSpec, RelativePresentation};
use crate::rewrite::{knuth_bendix, RewriteSystem};
use crate::word::{gen_of, Letter, Word};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("rewriting system is incomplete; normal forms are not certified")]
    IncompleteOracle,
    #[error("vertex cap of {cap} exceeded")]
    ResourceLimit { cap: usize },
}

pub const DEFAULT_MAX_RULES: usize = 5000;
pub const DEFAULT_MAX_LENGTH: usize = 64;

#[derive(Clone, Debug)]
pub enum Backing {
    FreeGroup,
    /// Free product of the parabolic factors; generators outside every
    /// parabolic form infinite cyclic factors.
    FreeProductOfParabolics { factors: Vec<Peripheral>, factor_of: Vec<usize> },
    RewriteSystem(RewriteSystem),
}

#[derive(Clone, Debug)]
pub struct GroupOracle {
    pub generators: Vec<String>,
    pub backing: Backing,
}

/// Canonical representative of a cyclic word up to rotation and inversion.
fn cyclic_class(w: &Word) -> Word {
    let w = w.cyclic_reduce();
    let mut best = w.clone();
    for cand in [w.clone(), w.inverse()] {
        let n = cand.len();
        for i in 0..n {
            let mut v = cand.0[i..].to_vec();
            v.extend_from_slice(&cand.0[..i]);
            let v = Word(v);
            if v < best {
                best = v;
            }
        }
    }
    best
}

impl GroupOracle {
    pub fn free(generators: &[String]) -> Self {
        GroupOracle { generators: generators.to_vec(), backing: Backing::FreeGroup }
    }

    /// Free-product backing; `None` unless the relators are exactly those
    /// forced by the parabolic kinds and every relation lives in one factor.
    /// The relators forced by the parabolic kinds are always implied.
    pub fn free_product(rp: &RelativePresentation) -> Option<Self> {
        let mut have: Vec<Word> = rp.relators.iter().chain(&rp.parabolic_relators()).map(cyclic_class).filter(|w| !w.is_empty()).collect();
        let mut want: Vec<Word> = rp.parabolic_relators().iter().map(cyclic_class).collect();
        have.sort();
        have.dedup();
        want.sort();
        want.dedup();
        if have != want {
            return None;
        }
        let mut factors: Vec<Peripheral> = rp.parabolics.iter().map(Peripheral::new).collect();
        let mut factor_of = vec![usize::MAX; rp.ngens()];
        for (i, p) in rp.parabolics.iter().enumerate() {
            for &g in &p.generators {
                factor_of[g] = i;
            }
        }
        for g in 0..rp.ngens() {
            if factor_of[g] == usize::MAX {
                factor_of[g] = factors.len();
                factors.push(Peripheral::new(&ParabolicSpec {
                    id: 0,
                    kind: ParabolicKind::FreeAbelian { rank: 1 },
                    generators: vec![g],
                }));
            }
        }
        Some(GroupOracle { generators: rp.generators.clone(), backing: Backing::FreeProductOfParabolics { factors, factor_of } })
    }

    pub fn rewriting(rp: &RelativePresentation, max_rules: usize, max_length: usize) -> Self {
        GroupOracle { generators: rp.generators.clone(), backing: Backing::RewriteSystem(knuth_bendix(rp, max_rules, max_length)) }
    }

    /// Picks the cheapest exact backing for the presentation.
    pub fn for_presentation(rp: &RelativePresentation) -> Self {
        if rp.relators.is_empty() && rp.parabolic_relators().is_empty() {
            return Self::free(&rp.generators);
        }
        if let Some(o) = Self::free_product(rp) {
            return o;
        }
        Self::rewriting(rp, DEFAULT_MAX_RULES, DEFAULT_MAX_LENGTH)
    }

    pub fn ngens(&self) -> usize {
        self.generators.len()
    }

    pub fn is_complete(&self) -> bool {
        match &self.backing {
            Backing::RewriteSystem(rs) => rs.is_complete(),
            _ => true,
        }
    }

    /// Best-effort reduction, valid even for incomplete systems.
    pub fn reduce_partial(&self, w: &Word) -> Word {
        match &self.backing {
            Backing::FreeGroup => w.free_reduce(),
            Backing::RewriteSystem(rs) => rs.reduce(w),
            Backing::FreeProductOfParabolics { factors, factor_of } => {
                let mut stack: Vec<(usize, PElem)> = Vec::new();
                for &l in w.letters() {
                    let f = factor_of[gen_of(l)];
                    let merged = match stack.last() {
                        Some((top, e)) if *top == f => Some(factors[f].push_letter(e, l)),
                        _ => None,
                    };
                    match merged {
                        Some(e) => {
                            stack.pop();
                            if !factors[f].is_identity(&e) {
                                stack.push((f, e));
                            }
                        }
                        None => {
                            let e = factors[f].push_letter(&factors[f].identity(), l);
                            if !factors[f].is_identity(&e) {
                                stack.push((f, e));
                            }
                        }
                    }
                }
                let mut out = Vec::new();
                for (f, e) in &stack {
                    out.extend(factors[*f].word(e).0);
                }
                Word(out)
            }
        }
    }

    pub fn normal_form(&self, w: &Word) -> Result<Word, OracleError> {
        if !self.is_complete() {
            return Err(OracleError::IncompleteOracle);
        }
        Ok(self.reduce_partial(w))
    }

    pub fn multiply(&self, u: &Word, v: &Word) -> Result<Word, OracleError> {
        self.normal_form(&u.concat(v))
    }

    pub fn equal(&self, u: &Word, v: &Word) -> Result<bool, OracleError> {
        Ok(self.normal_form(&u.inverse().concat(v))?.is_empty())
    }

    fn all_letters(&self) -> Vec<Letter> {
        (1..=self.ngens() as Letter).flat_map(|g| [g, -g]).collect()
    }
}

/// Ball of the Cayley graph about the identity.
#[derive(Clone, Debug)]
pub struct CayleyBall {
    pub radius: usize,
    /// Normal forms in ShortLex order; vertex `i` is `elements[i]`.
    pub elements: Vec<Word>,
    pub index: HashMap<Word, VertexId>,
    /// Labeled edges `(g, g·s, s)` for generator index `s`.
    pub edges: Vec<(VertexId, VertexId, usize)>,
    pub sphere_sizes: Vec<usize>,
    /// True once some sphere came out empty, i.e. the group is finite.
    pub saturated: bool,
}

impl CayleyBall {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn graph(&self) -> Graph {
        let e: Vec<(VertexId, VertexId)> = self.edges.iter().map(|&(u, v, _)| (u, v)).collect();
        Graph::from_edges(self.len(), &e)
    }

    pub fn get(&self, w: &Word) -> Option<VertexId> {
        self.index.get(w).copied()
    }
}

pub fn cayley_ball(o: &GroupOracle, radius: usize, cap: usize) -> Result<CayleyBall, OracleError> {
    if !o.is_complete() {
        return Err(OracleError::IncompleteOracle);
    }
    let letters = o.all_letters();
    let mut elements = vec![Word::identity()];
    let mut index: HashMap<Word, VertexId> = HashMap::new();
    index.insert(Word::identity(), 0);
    let mut sphere_sizes = vec![1];
    let mut saturated = false;
    let mut start = 0;
    for r in 0..radius {
        let end = elements.len();
        let mut next: Vec<Word> = Vec::new();
        for i in start..end {
            for &l in &letters {
                let mut w = elements[i].0.clone();
                w.push(l);
                let nf = o.reduce_partial(&Word(w));
                if nf.len() == r + 1 && !index.contains_key(&nf) {
                    index.insert(nf.clone(), 0);
                    next.push(nf);
                }
            }
        }
        next.sort();
        if elements.len() + next.len() > cap {
            return Err(OracleError::ResourceLimit { cap });
        }
        sphere_sizes.push(next.len());
        for w in next {
            index.insert(w.clone(), elements.len() as VertexId);
            elements.push(w);
        }
        start = end;
        if start == elements.len() {
            saturated = true;
            break;
        }
    }
    let mut edges = Vec::new();
    for (i, g) in elements.iter().enumerate() {
        for s in 0..o.ngens() {
            let mut w = g.0.clone();
            w.push((s + 1) as Letter);
            let h = o.reduce_partial(&Word(w));
            if let Some(&j) = index.get(&h) {
                edges.push((i as VertexId, j, s));
            }
        }
    }
    Ok(CayleyBall { radius, elements, index, edges, sphere_sizes, saturated })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rp(gens: &[&str], rels: &[&str]) -> RelativePresentation {
        RelativePresentation::new("G", gens, vec![], rels).unwrap()
    }

    #[test]
    fn free_ball_counts() {
        let g = rp(&["a", "b"], &[]);
        let o = GroupOracle::for_presentation(&g);
        let b = cayley_ball(&o, 2, 1000).unwrap();
        assert_eq!(b.len(), 17);
        assert_eq!(b.graph().edge_count(), 16);
        assert_eq!(o.normal_form(&g.parse_word("a b b^-1").unwrap()).unwrap(), g.parse_word("a").unwrap());
    }

    #[test]
    fn cyclic_ball_saturates() {
        let g = rp(&["x"], &["x^5"]);
        let o = GroupOracle::for_presentation(&g);
        let b = cayley_ball(&o, 10, 1000).unwrap();
        assert_eq!(b.len(), 5);
        assert!(b.saturated);
    }

    #[test]
    fn cap_is_enforced() {
        let g = rp(&["a", "b"], &[]);
        let o = GroupOracle::for_presentation(&g);
        assert_eq!(cayley_ball(&o, 5, 100).unwrap_err(), OracleError::ResourceLimit { cap: 100 });
    }

    #[test]
    fn free_product_matches_rewriting() {
        let t = "generators x y a\nparabolic 1 type Z/6 generators x\nparabolic 2 type Z generators y\nrelator x^6\n";
        let g = RelativePresentation::parse(t).unwrap();
        let fp = GroupOracle::free_product(&g).expect("free product backing");
        let kb = GroupOracle::rewriting(&g, 5000, 64);
        assert!(kb.is_complete());
        let bf = cayley_ball(&fp, 4, 100_000).unwrap();
        let bk = cayley_ball(&kb, 4, 100_000).unwrap();
        assert_eq!(bf.elements, bk.elements);
    }
}
