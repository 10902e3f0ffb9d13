//! Independent oracles: breadth-first search for the horoball metric,
//! explicit geodesic enumeration for thinness, and matrix representations
//! for the triangle quotients.

use std::collections::{HashSet, VecDeque};

use relhyp::chain::int;
use relhyp::filling::{fill, survival_check, thrice_punctured_sphere, triangle_kernels};
use relhyp::graph::{Distances, Graph};
use relhyp::horoball::{BaseGraph, HoroballGraph};
use relhyp::metric::{delta_thin, Budget, Constants};
use relhyp::oracle::cayley_ball;
use relhyp::word::{gen_of, Word};

#[test]
fn horoball_distance_matches_bfs() {
    for (base, depth) in [(BaseGraph::path(9), 5), (BaseGraph::cycle(12), 5), (BaseGraph::grid(4, 3), 4)] {
        let h = HoroballGraph::build(base, depth);
        let g = h.to_graph();
        for a in 0..h.vertex_count() {
            let row = g.bfs(a as u32);
            for b in 0..h.vertex_count() {
                let (va, vb) = (h.vertex(a as u32), h.vertex(b as u32));
                assert_eq!(h.distance(va, vb), row[b], "{va} {vb}");
            }
        }
    }
}

/// Every geodesic from `a` to `b`, listed explicitly.
fn all_geodesics(g: &Graph, a: u32, b: u32) -> Vec<Vec<u32>> {
    let from_b = g.bfs(b);
    let mut out = Vec::new();
    let mut stack = vec![vec![a]];
    while let Some(p) = stack.pop() {
        let last = *p.last().unwrap();
        if last == b {
            out.push(p);
            continue;
        }
        for &n in g.neighbors(last) {
            if from_b[n as usize] + 1 == from_b[last as usize] {
                let mut q = p.clone();
                q.push(n);
                stack.push(q);
            }
        }
    }
    out
}

fn brute_thinness(g: &Graph) -> u32 {
    let n = g.len() as u32;
    let d: Vec<Vec<u32>> = (0..n).map(|v| g.bfs(v)).collect();
    let geo: Vec<Vec<Vec<Vec<u32>>>> = (0..n).map(|a| (0..n).map(|b| all_geodesics(g, a, b)).collect()).collect();
    let mut worst = 0;
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let gp = (d[x as usize][y as usize] + d[x as usize][z as usize] - d[y as usize][z as usize]) / 2;
                for s in &geo[x as usize][y as usize] {
                    for t in &geo[x as usize][z as usize] {
                        for i in 1..=gp as usize {
                            worst = worst.max(d[s[i] as usize][t[i] as usize]);
                        }
                    }
                }
            }
        }
    }
    worst
}

#[test]
fn thinness_matches_enumeration() {
    let graphs = [
        HoroballGraph::build(BaseGraph::cycle(9), 0).to_graph(),
        HoroballGraph::build(BaseGraph::grid(3, 3), 0).to_graph(),
        HoroballGraph::build(BaseGraph::path(4), 2).to_graph(),
        HoroballGraph::build(BaseGraph::cycle(6), 2).to_graph(),
    ];
    for g in &graphs {
        let dist = Distances::new(g);
        let inner: Vec<u32> = (0..g.len() as u32).collect();
        let est = delta_thin(&dist, &inner, Budget { exhaustive_below: 1000, samples: 0, seed: 1 });
        assert!(est.exhaustive);
        assert_eq!(est.value, int(brute_thinness(g) as i64));
    }
}

/// Element of `PSL(2, p)` stored as a matrix normalized up to sign.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
struct Psl([i64; 4]);

impl Psl {
    fn new(m: [i64; 4], p: i64) -> Self {
        let m = m.map(|x| x.rem_euclid(p));
        let neg = m.map(|x| (p - x) % p);
        Psl(m.min(neg))
    }

    fn mul(self, o: Psl, p: i64) -> Psl {
        let [a, b, c, d] = self.0;
        let [e, f, g, h] = o.0;
        Psl::new([a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h], p)
    }

    fn inv(self, p: i64) -> Psl {
        let [a, b, c, d] = self.0;
        Psl::new([d, -b, -c, a], p)
    }

    fn one(p: i64) -> Psl {
        Psl::new([1, 0, 0, 1], p)
    }

    fn order(self, p: i64) -> usize {
        let mut x = self;
        let mut n = 1;
        while x != Psl::one(p) {
            x = x.mul(self, p);
            n += 1;
        }
        n
    }
}

fn sl2(p: i64) -> Vec<Psl> {
    let mut v = HashSet::new();
    for a in 0..p {
        for b in 0..p {
            for c in 0..p {
                for d in 0..p {
                    if (a * d - b * c).rem_euclid(p) == 1 {
                        v.insert(Psl::new([a, b, c, d], p));
                    }
                }
            }
        }
    }
    let mut v: Vec<_> = v.into_iter().collect();
    v.sort_by_key(|m| m.0);
    v
}

/// Images of `x, y, z = xy` with orders `(l, m, n)` generating `PSL(2, p)`.
fn triangle_rep(p: i64, l: usize, m: usize, n: usize) -> [Psl; 3] {
    let all = sl2(p);
    for &x in &all {
        if x.order(p) != l {
            continue;
        }
        for &y in &all {
            let z = x.mul(y, p);
            if y.order(p) == m && z.order(p) == n && generated(&[x, y], p) == all.len() {
                return [x, y, z];
            }
        }
    }
    panic!("no generating triple in PSL(2,{p})");
}

fn generated(gens: &[Psl], p: i64) -> usize {
    let mut seen = HashSet::from([Psl::one(p)]);
    let mut q = VecDeque::from([Psl::one(p)]);
    while let Some(g) = q.pop_front() {
        for &s in gens {
            let h = g.mul(s, p);
            if seen.insert(h) {
                q.push_back(h);
            }
        }
    }
    seen.len()
}

fn image(w: &Word, rep: &[Psl; 3], p: i64) -> Psl {
    w.letters().iter().fold(Psl::one(p), |acc, &l| {
        let g = rep[gen_of(l)];
        acc.mul(if l > 0 { g } else { g.inv(p) }, p)
    })
}

fn random_words(count: usize, len: usize, seed: u64) -> Vec<Word> {
    let mut s = seed;
    let mut next = move || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (s >> 33) as i32
    };
    (0..count)
        .map(|_| Word((0..len).map(|_| { let g = next().rem_euclid(3) + 1; if next() % 2 == 0 { g } else { -g } }).collect()))
        .collect()
}

#[test]
fn icosahedral_quotient_is_psl_2_5() {
    let p = 5;
    let rep = triangle_rep(p, 2, 3, 5);
    let fs = fill(&thrice_punctured_sphere(), &triangle_kernels(2, 3, 5), &Constants::theoretical(1), 64).unwrap();
    let o = fs.quotient_oracle().unwrap();
    let ball = cayley_ball(&o, 20, 1000).unwrap();
    assert!(ball.saturated);
    assert_eq!(ball.len(), 60);
    let images: HashSet<Psl> = ball.elements.iter().map(|w| image(w, &rep, p)).collect();
    assert_eq!(images.len(), 60);
    for w in random_words(300, 12, 7) {
        assert_eq!(image(&o.normal_form(&w).unwrap(), &rep, p), image(&w, &rep, p));
    }
}

#[test]
fn hurwitz_quotient_maps_onto_psl_2_7() {
    let p = 7;
    let rep = triangle_rep(p, 2, 3, 7);
    let fs = fill(&thrice_punctured_sphere(), &triangle_kernels(2, 3, 7), &Constants::theoretical(1), 64).unwrap();
    let o = fs.quotient_oracle().unwrap();
    for r in &fs.quotient.relators {
        assert!(o.normal_form(r).unwrap().is_empty());
    }
    for w in random_words(300, 14, 11) {
        assert_eq!(image(&o.normal_form(&w).unwrap(), &rep, p), image(&w, &rep, p));
    }
    let ball = cayley_ball(&o, 8, 100_000).unwrap();
    assert!(!ball.saturated);
    let images: HashSet<Psl> = ball.elements.iter().map(|w| image(w, &rep, p)).collect();
    assert_eq!(images.len(), 168);
}

#[test]
fn survival_separates_expected_collapse() {
    let fs = fill(&thrice_punctured_sphere(), &triangle_kernels(8, 8, 8), &Constants::theoretical(1), 64).unwrap();
    let x = Word::power(0, 1);
    let x9 = Word::power(0, 9);
    let rep = survival_check(&fs, &[x, x9]).unwrap();
    assert_eq!(rep.expected.len(), 1);
    assert!(rep.unexpected.is_empty());

    let rep = survival_check(&fs, &[Word::identity()]).unwrap();
    assert!(rep.injective());
    assert_eq!(rep.size, 1);

    let base = cayley_ball(&fs.base_oracle(), 2, 10_000).unwrap();
    let rep = survival_check(&fs, &base.elements).unwrap();
    assert!(rep.injective(), "{rep:?}");
}
