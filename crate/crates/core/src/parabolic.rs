//! Elements, word lengths and balls in a single parabolic subgroup.

use crate::presentation::{ParabolicKind, ParabolicSpec};
use crate::word::{gen_of, Letter, Word};

/// An element of a parabolic subgroup in its own normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PElem {
    /// Exponent vector over the subgroup generators; residues in `[0, m)` for
    /// finite factors.
    Abelian(Vec<i64>),
    /// Freely reduced word in global letters.
    Free(Word),
}

#[derive(Clone, Debug)]
pub struct Peripheral {
    pub spec: ParabolicSpec,
}

impl Peripheral {
    pub fn new(spec: &ParabolicSpec) -> Self {
        Peripheral { spec: spec.clone() }
    }

    pub fn rank(&self) -> usize {
        self.spec.generators.len()
    }

    /// Local generator index of a global letter, if the letter belongs here.
    pub fn local(&self, l: Letter) -> Option<usize> {
        self.spec.generators.iter().position(|&g| g == gen_of(l))
    }

    pub fn contains_letter(&self, l: Letter) -> bool {
        self.local(l).is_some()
    }

    fn orders(&self) -> Option<&[u64]> {
        match &self.spec.kind {
            ParabolicKind::FiniteCyclic { orders } => Some(orders),
            _ => None,
        }
    }

    pub fn is_abelian(&self) -> bool {
        !matches!(self.spec.kind, ParabolicKind::FreeGroup { rank } if rank >= 2)
    }

    pub fn is_finite(&self) -> bool {
        self.orders().is_some()
    }

    pub fn identity(&self) -> PElem {
        if self.is_abelian() {
            PElem::Abelian(vec![0; self.rank()])
        } else {
            PElem::Free(Word::identity())
        }
    }

    pub fn is_identity(&self, e: &PElem) -> bool {
        match e {
            PElem::Abelian(v) => v.iter().all(|&x| x == 0),
            PElem::Free(w) => w.is_empty(),
        }
    }

    fn normalize(&self, mut v: Vec<i64>) -> Vec<i64> {
        if let Some(orders) = self.orders() {
            for (x, &m) in v.iter_mut().zip(orders) {
                *x = x.rem_euclid(m as i64);
            }
        }
        v
    }

    /// Element represented by a word in this subgroup's letters.
    /// Letters from other generators are ignored by the caller's contract.
    pub fn element(&self, w: &Word) -> PElem {
        if self.is_abelian() {
            let mut v = vec![0i64; self.rank()];
            for &l in w.letters() {
                if let Some(i) = self.local(l) {
                    v[i] += if l > 0 { 1 } else { -1 };
                }
            }
            PElem::Abelian(self.normalize(v))
        } else {
            PElem::Free(w.free_reduce())
        }
    }

    pub fn multiply(&self, a: &PElem, b: &PElem) -> PElem {
        match (a, b) {
            (PElem::Abelian(x), PElem::Abelian(y)) => {
                PElem::Abelian(self.normalize(x.iter().zip(y).map(|(p, q)| p + q).collect()))
            }
            (PElem::Free(x), PElem::Free(y)) => PElem::Free(x.concat(y).free_reduce()),
            _ => panic!("mixed parabolic element kinds"),
        }
    }

    pub fn inverse(&self, a: &PElem) -> PElem {
        match a {
            PElem::Abelian(x) => PElem::Abelian(self.normalize(x.iter().map(|p| -p).collect())),
            PElem::Free(w) => PElem::Free(w.inverse()),
        }
    }

    /// Multiplies by a single letter of this subgroup on the right.
    pub fn push_letter(&self, a: &PElem, l: Letter) -> PElem {
        let i = self.local(l).expect("letter outside parabolic");
        match a {
            PElem::Abelian(x) => {
                let mut v = x.clone();
                v[i] += if l > 0 { 1 } else { -1 };
                PElem::Abelian(self.normalize(v))
            }
            PElem::Free(w) => {
                let mut v = w.0.clone();
                if v.last() == Some(&-l) {
                    v.pop();
                } else {
                    v.push(l);
                }
                PElem::Free(Word(v))
            }
        }
    }

    /// ShortLex-least word for the element, in global letters.
    pub fn word(&self, e: &PElem) -> Word {
        match e {
            PElem::Free(w) => w.clone(),
            PElem::Abelian(v) => {
                let mut out = Vec::new();
                for (i, &x) in v.iter().enumerate() {
                    let g = self.spec.generators[i];
                    let x = match self.orders() {
                        Some(orders) => {
                            let m = orders[i] as i64;
                            if 2 * x <= m {
                                x
                            } else {
                                x - m
                            }
                        }
                        None => x,
                    };
                    out.extend(Word::power(g, x).0);
                }
                Word(out)
            }
        }
    }

    /// Word length in the subgroup's own generators.
    pub fn length(&self, e: &PElem) -> u64 {
        self.word(e).len() as u64
    }

    pub fn distance(&self, a: &PElem, b: &PElem) -> u64 {
        self.length(&self.multiply(&self.inverse(a), b))
    }

    /// Every element of length at most `radius`, sorted by ShortLex of words.
    pub fn ball(&self, radius: u64) -> Vec<PElem> {
        let mut seen = std::collections::HashSet::new();
        let mut frontier = vec![self.identity()];
        seen.insert(self.identity());
        let mut out = vec![self.identity()];
        let letters: Vec<Letter> = self
            .spec
            .generators
            .iter()
            .flat_map(|&g| [(g + 1) as Letter, -((g + 1) as Letter)])
            .collect();
        for _ in 0..radius {
            let mut next = Vec::new();
            for e in &frontier {
                for &l in &letters {
                    let f = self.push_letter(e, l);
                    if seen.insert(f.clone()) {
                        next.push(f.clone());
                        out.push(f);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        out.sort_by_key(|e| self.word(e));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: ParabolicKind, gens: Vec<usize>) -> ParabolicSpec {
        ParabolicSpec { id: 1, kind, generators: gens }
    }

    #[test]
    fn cyclic_words_are_shortest() {
        let p = Peripheral::new(&spec(ParabolicKind::FiniteCyclic { orders: vec![5] }, vec![0]));
        let e = p.element(&Word(vec![1; 7]));
        assert_eq!(e, PElem::Abelian(vec![2]));
        assert_eq!(p.word(&PElem::Abelian(vec![3])), Word(vec![-1, -1]));
        assert_eq!(p.ball(10).len(), 5);
    }

    #[test]
    fn abelian_ball_sizes() {
        let p = Peripheral::new(&spec(ParabolicKind::FreeAbelian { rank: 2 }, vec![0, 1]));
        // |{v in Z^2 : |v|_1 <= 3}| = 2*3^2 + 2*3 + 1
        assert_eq!(p.ball(3).len(), 25);
        let f = Peripheral::new(&spec(ParabolicKind::FreeGroup { rank: 2 }, vec![0, 1]));
        assert_eq!(f.ball(2).len(), 17);
    }
}
