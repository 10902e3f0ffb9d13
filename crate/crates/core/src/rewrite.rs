//! Knuth–Bendix completion of group presentations under ShortLex.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};

use crate::presentation::RelativePresentation;
use crate::word::{letter_from_rank, rank, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Completion {
    Complete,
    BoundedIncomplete,
}

/// A ShortLex-reducing string rewriting system on letter ranks.
#[derive(Clone, Debug)]
pub struct RewriteSystem {
    ngens: usize,
    rules: HashMap<Vec<u8>, Vec<u8>>,
    lengths: Vec<usize>,
    pub status: Completion,
}

fn ranks(w: &Word) -> Vec<u8> {
    w.letters().iter().map(|&l| rank(l) as u8).collect()
}

fn unranks(v: &[u8]) -> Word {
    Word(v.iter().map(|&r| letter_from_rank(r as u32)).collect())
}

fn sl_cmp(a: &[u8], b: &[u8]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

impl RewriteSystem {
    fn empty(ngens: usize) -> Self {
        RewriteSystem { ngens, rules: HashMap::new(), lengths: Vec::new(), status: Completion::Complete }
    }

    pub fn ngens(&self) -> usize {
        self.ngens
    }

    pub fn is_complete(&self) -> bool {
        self.status == Completion::Complete
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Rules sorted by ShortLex of their left-hand sides.
    pub fn rules(&self) -> Vec<(Word, Word)> {
        let mut r: Vec<(&Vec<u8>, &Vec<u8>)> = self.rules.iter().collect();
        r.sort_by(|a, b| sl_cmp(a.0, b.0));
        r.into_iter().map(|(l, r)| (unranks(l), unranks(r))).collect()
    }

    fn refresh_lengths(&mut self) {
        let mut l: Vec<usize> = self.rules.keys().map(|k| k.len()).collect();
        l.sort_unstable();
        l.dedup();
        self.lengths = l;
    }

    fn reduce_ranks(&self, w: &[u8]) -> Vec<u8> {
        let mut input: Vec<u8> = w.iter().rev().copied().collect();
        let mut out: Vec<u8> = Vec::with_capacity(w.len());
        while let Some(x) = input.pop() {
            out.push(x);
            for &l in &self.lengths {
                if l > out.len() {
                    break;
                }
                let start = out.len() - l;
                if let Some(rhs) = self.rules.get(&out[start..]) {
                    out.truncate(start);
                    input.extend(rhs.iter().rev());
                    break;
                }
            }
        }
        out
    }

    pub fn reduce(&self, w: &Word) -> Word {
        unranks(&self.reduce_ranks(&ranks(w)))
    }
}

type Equation = Reverse<(usize, Vec<u8>, Vec<u8>)>;

fn equation(a: Vec<u8>, b: Vec<u8>) -> Equation {
    Reverse((a.len().max(b.len()), a, b))
}

/// Runs completion with the given bounds. Exceeding a bound yields a system
/// flagged [`Completion::BoundedIncomplete`], still usable for reduction.
pub fn knuth_bendix(rp: &RelativePresentation, max_rules: usize, max_length: usize) -> RewriteSystem {
    let n = rp.ngens();
    let mut sys = RewriteSystem::empty(n);
    let mut queue: BinaryHeap<Equation> = BinaryHeap::new();
    for g in 0..n as u8 {
        queue.push(equation(vec![2 * g, 2 * g + 1], vec![]));
        queue.push(equation(vec![2 * g + 1, 2 * g], vec![]));
    }
    for r in rp.relators.iter().chain(&rp.parabolic_relators()) {
        let r = r.cyclic_reduce();
        if !r.is_empty() {
            queue.push(equation(ranks(&r), vec![]));
        }
    }
    let mut incomplete = false;
    while let Some(Reverse((_, a, b))) = queue.pop() {
        let a = sys.reduce_ranks(&a);
        let b = sys.reduce_ranks(&b);
        let (lhs, rhs) = match sl_cmp(&a, &b) {
            Ordering::Equal => continue,
            Ordering::Greater => (a, b),
            Ordering::Less => (b, a),
        };
        if lhs.len() > max_length {
            incomplete = true;
            continue;
        }
        add_rule(&mut sys, lhs, rhs, &mut queue);
        if sys.rules.len() > max_rules {
            incomplete = true;
            break;
        }
    }
    if incomplete || !queue.is_empty() {
        sys.status = Completion::BoundedIncomplete;
    }
    sys
}

fn contains(hay: &[u8], needle: &[u8]) -> bool {
    needle.len() <= hay.len() && hay.windows(needle.len()).any(|w| w == needle)
}

fn add_rule(sys: &mut RewriteSystem, lhs: Vec<u8>, rhs: Vec<u8>, queue: &mut BinaryHeap<Equation>) {
    // Rules whose left side becomes reducible are retired and re-queued.
    let stale: Vec<Vec<u8>> = sys.rules.keys().filter(|k| contains(k, &lhs)).cloned().collect();
    for k in stale {
        let r = sys.rules.remove(&k).unwrap();
        queue.push(equation(k, r));
    }
    sys.rules.insert(lhs.clone(), rhs.clone());
    sys.refresh_lengths();
    let touched: Vec<Vec<u8>> = sys.rules.iter().filter(|(_, r)| contains(r, &lhs)).map(|(k, _)| k.clone()).collect();
    for k in touched {
        let r = sys.rules[&k].clone();
        let r = sys.reduce_ranks(&r);
        sys.rules.insert(k, r);
    }
    let others: Vec<(Vec<u8>, Vec<u8>)> = sys.rules.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    for (l2, r2) in &others {
        overlaps(&lhs, &rhs, l2, r2, queue);
        if *l2 != lhs {
            overlaps(l2, r2, &lhs, &rhs, queue);
        }
    }
}

/// Critical pairs from a proper suffix of `l1` matching a prefix of `l2`.
fn overlaps(l1: &[u8], r1: &[u8], l2: &[u8], r2: &[u8], queue: &mut BinaryHeap<Equation>) {
    for k in 1..l1.len().min(l2.len()) {
        if l1[l1.len() - k..] == l2[..k] {
            let mut a = r1.to_vec();
            a.extend_from_slice(&l2[k..]);
            let mut b = l1[..l1.len() - k].to_vec();
            b.extend_from_slice(r2);
            queue.push(equation(a, b));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rp(gens: &[&str], rels: &[&str]) -> RelativePresentation {
        RelativePresentation::new("G", gens, vec![], rels).unwrap()
    }

    #[test]
    fn cyclic_of_order_five() {
        let g = rp(&["x"], &["x^5"]);
        let rs = knuth_bendix(&g, 5000, 64);
        assert!(rs.is_complete());
        assert_eq!(rs.reduce(&g.parse_word("x^7").unwrap()), g.parse_word("x^2").unwrap());
        assert_eq!(rs.reduce(&g.parse_word("x^3").unwrap()), g.parse_word("x^-2").unwrap());
    }

    #[test]
    fn free_group_has_only_free_reductions() {
        let g = rp(&["a", "b"], &[]);
        let rs = knuth_bendix(&g, 5000, 64);
        assert!(rs.is_complete());
        assert_eq!(rs.len(), 4);
        assert!(rs.rules().iter().all(|(l, r)| l.len() == 2 && r.is_empty()));
    }

    #[test]
    fn von_dyck_237_completes_with_product_generator() {
        let g = rp(&["x", "y", "z"], &["x y z^-1", "x^2", "y^3", "z^7"]);
        let rs = knuth_bendix(&g, 5000, 64);
        assert!(rs.is_complete());
        assert!(rs.reduce(&g.parse_word("(x y)^7").unwrap()).is_empty());
    }

    #[test]
    fn von_dyck_237_on_two_generators_exceeds_length_bound() {
        // The ShortLex system for x < X < y < Y is infinite; completion must
        // stop at the length bound and say so.
        let g = rp(&["x", "y"], &["x^2", "y^3", "(x y)^7"]);
        let rs = knuth_bendix(&g, 5000, 64);
        assert_eq!(rs.status, Completion::BoundedIncomplete);
    }

    #[test]
    fn tight_bounds_report_incomplete() {
        let g = rp(&["x", "y"], &["x^2", "y^3", "(x y)^7"]);
        let rs = knuth_bendix(&g, 10, 64);
        assert_eq!(rs.status, Completion::BoundedIncomplete);
    }
}
