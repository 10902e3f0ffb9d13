//! Property tests for the structural invariants of each layer.

use proptest::prelude::*;

use relhyp::chain::{boundary1, boundary2, circuit_chain, decompose, int, path_chain, rat, vertex, Chain1, SparseChain};
use relhyp::experiments::{free_group_rel_generators, modular_group};
use relhyp::filling::{fill, thrice_punctured_sphere, triangle_kernels};
use relhyp::graph::Distances;
use relhyp::horoball::{BaseGraph, HoroVertex, HoroballGraph};
use relhyp::metric::Constants;
use relhyp::mineyev::Mineyev;
use relhyp::oracle::{cayley_ball, GroupOracle};
use relhyp::word::Word;

fn horoball() -> HoroballGraph {
    HoroballGraph::build(BaseGraph::path(7), 6)
}

fn horo_vertex() -> impl Strategy<Value = HoroVertex> {
    (0u32..7, 0u32..=6).prop_map(|(b, d)| HoroVertex::new(b, d))
}

fn word(ngens: i32, max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec((1..=ngens, any::<bool>()).prop_map(|(g, inv)| if inv { -g } else { g }), 0..=max_len).prop_map(Word)
}

/// A circuit on distinct vertices, in random order.
fn simple_circuit() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::btree_set(0u32..50, 3..8).prop_map(|s| s.into_iter().collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn horoball_distance_is_a_metric(a in horo_vertex(), b in horo_vertex(), c in horo_vertex()) {
        let h = horoball();
        prop_assert_eq!(h.distance(a, b), h.distance(b, a));
        prop_assert_eq!(h.distance(a, b) == 0, a == b);
        prop_assert!(h.distance(a, c) <= h.distance(a, b) + h.distance(b, c));
    }

    #[test]
    fn horoball_geodesic_realizes_distance(a in horo_vertex(), b in horo_vertex()) {
        let h = horoball();
        let g = h.geodesic(a, b);
        prop_assert_eq!(g.first(), Some(&a));
        prop_assert_eq!(g.last(), Some(&b));
        prop_assert_eq!(g.len() as u32 - 1, h.distance(a, b));
        prop_assert!(g.windows(2).all(|w| h.is_edge(w[0], w[1])));
    }

    #[test]
    fn horoball_filling_bounds_loop(start in horo_vertex(), steps in prop::collection::vec(0usize..16, 1..24)) {
        let h = horoball();
        let g = h.to_graph();
        let mut lp = vec![start];
        for s in steps {
            let cur = h.vertex_id(*lp.last().unwrap());
            let nb = g.neighbors(cur);
            lp.push(h.vertex(nb[s % nb.len()]));
        }
        let back = h.geodesic(*lp.last().unwrap(), start);
        lp.extend_from_slice(&back[1..]);
        let f = h.fill(&lp).unwrap();
        prop_assert!(f.area() <= 3 * (lp.len() - 1));
        prop_assert_eq!(f.boundary_chain(), path_chain(&lp));
        prop_assert!(f.cells.iter().all(|c| h.is_cell(c)));
    }

    #[test]
    fn boundary_of_boundary_vanishes(cells in prop::collection::vec((prop::collection::vec(0u32..12, 3..7), -5i64..=5), 0..6)) {
        let mut c = SparseChain::zero();
        for (b, k) in &cells {
            c.add_scaled(&circuit_chain(b), &int(*k));
        }
        prop_assert!(boundary1(&boundary2(&c)).is_zero());
    }

    #[test]
    fn reversed_circuit_negates(b in simple_circuit()) {
        let mut r = b.clone();
        r.reverse();
        prop_assert_eq!(circuit_chain(&r), circuit_chain(&b).negated());
        let mut rot = b.clone();
        rot.rotate_left(1);
        prop_assert_eq!(circuit_chain(&rot), circuit_chain(&b));
    }

    #[test]
    fn path_boundary_is_endpoints(p in prop::collection::vec(0u32..9, 2..12)) {
        let expect = vertex(*p.last().unwrap()).minus(&vertex(p[0]));
        prop_assert_eq!(boundary1(&path_chain(&p)), expect);
    }

    #[test]
    fn decomposition_reassembles(paths in prop::collection::vec((prop::collection::vec(0u32..8, 2..8), 1i64..6), 1..5)) {
        let mut f: Chain1<u32> = SparseChain::zero();
        for (p, w) in &paths {
            f.add_scaled(&path_chain(p), &rat(*w, 2));
        }
        let mut terminals: Vec<u32> = boundary1(&f).support().copied().collect();
        terminals.push(0);
        terminals.sort();
        terminals.dedup();
        let parts = decompose(&f, &terminals).unwrap();
        let mut sum = SparseChain::zero();
        let mut mass = int(0);
        for (a, p) in &parts {
            prop_assert!(*a > int(0));
            let pc = path_chain(p);
            sum.add_scaled(&pc, a);
            mass += a * int(p.len() as i64 - 1);
        }
        prop_assert_eq!(sum, f.clone());
        prop_assert_eq!(mass, f.l1_norm());
    }

    #[test]
    fn normal_forms_are_canonical(w in word(2, 16), v in word(2, 10)) {
        let rp = free_group_rel_generators();
        let o = GroupOracle::for_presentation(&rp);
        let n = o.normal_form(&w).unwrap();
        prop_assert_eq!(o.normal_form(&n).unwrap(), n.clone());
        prop_assert!(o.normal_form(&w.concat(&w.inverse())).unwrap().is_empty());
        let wv = o.multiply(&w, &v).unwrap();
        prop_assert_eq!(o.multiply(&wv, &v.inverse()).unwrap(), n);
    }

    #[test]
    fn conjugated_relators_vanish_in_quotient(u in word(3, 8), r in 0usize..6) {
        let fs = fill(&thrice_punctured_sphere(), &triangle_kernels(2, 3, 7), &Constants::theoretical(1), 64).unwrap();
        let o = fs.quotient_oracle().unwrap();
        let rel = &fs.quotient.relators[r % fs.quotient.relators.len()];
        let conj = u.concat(rel).concat(&u.inverse());
        prop_assert!(o.normal_form(&conj).unwrap().is_empty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bicombing_is_antisymmetric_with_point_boundary(a in 0u32..200, b in 0u32..200) {
        let rp = modular_group();
        let o = GroupOracle::for_presentation(&rp);
        let ball = cayley_ball(&o, 8, 1_000).unwrap();
        let g = ball.graph();
        let n = g.len() as u32;
        let (a, b) = (a % n, b % n);
        let dist = Distances::new(&g);
        let m = Mineyev::new(&dist, 1).unwrap();
        let q = m.q(a, b).unwrap();
        prop_assert_eq!(m.q(b, a).unwrap(), q.negated());
        prop_assert_eq!(boundary1(&q), vertex(b).minus(&vertex(a)));
    }
}
