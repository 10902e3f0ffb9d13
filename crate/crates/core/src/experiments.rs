//! Reproducible experiment suites. Each runner returns a table of
//! per-instance rows and a pass/fail verdict; the command-line driver writes
//! the tables as CSV and the acceptance test prints the verdicts.

use std::collections::BTreeSet;

use num::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::{boundary1, decompose, path_chain, rat, vertex, Chain1, Edge, Rational, SparseChain};
use crate::cusped::{CuspedBall, CuspedVertex, HoroballId};
use crate::filling::{build_surgered, fill, injectivity_check, same_cusped_ball, shell_check, thrice_punctured_sphere, triangle_experiment, triangle_kernels, Finiteness};
use crate::graph::{Distances, Graph, VertexId};
use crate::horoball::{BaseGraph, HoroVertex, HoroballGraph};
use crate::metric::{ceil_u32, delta_thin, hausdorff_distance, Budget, Constants};
use crate::mineyev::Mineyev;
use crate::oracle::{cayley_ball, GroupOracle};
use crate::preferred::{build_skeleton, check_axioms, family_closure, slimness_bound, Geometry, PreferredPath, QBicombing, ThickPart};
use crate::presentation::{FillingKernel, RelativePresentation};
use crate::word::Word;

/// Rows of one experiment, ready for CSV output.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$($x.to_string()),*] };
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub name: String,
    pub passed: bool,
    pub summary: String,
    pub table: Table,
}

impl Outcome {
    fn new(name: &str, passed: bool, summary: String, table: Table) -> Self {
        Outcome { name: name.to_string(), passed, summary, table }
    }
}

/// A base graph named as `cycle:N`, `path:N` or `grid:WxH`.
pub fn parse_base(spec: &str) -> Option<BaseGraph> {
    let (kind, arg) = spec.split_once(':')?;
    match kind {
        "cycle" => Some(BaseGraph::cycle(arg.parse().ok()?)),
        "path" => Some(BaseGraph::path(arg.parse().ok()?)),
        "grid" => {
            let (w, h) = arg.split_once('x')?;
            Some(BaseGraph::grid(w.parse().ok()?, h.parse().ok()?))
        }
        _ => None,
    }
}

/// The three bases used for horoball experiments.
pub const HOROBALL_BASES: [&str; 3] = ["cycle:50", "path:100", "grid:8x8"];

fn random_vertex(h: &HoroballGraph, rng: &mut ChaCha8Rng) -> HoroVertex {
    HoroVertex::new(rng.gen_range(0..h.base.len() as u32), rng.gen_range(0..=h.depth))
}

/// Closed-form distances against BFS on the explicit truncation.
pub fn horoball_metric(base: &str, depth: u32, pairs: usize, seed: u64) -> Outcome {
    let h = HoroballGraph::build(parse_base(base).expect("base"), depth);
    let g = h.to_graph();
    let dist = Distances::new(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Table::new(&["base", "a", "b", "closed_form", "bfs"]);
    let mut bad = 0;
    for _ in 0..pairs {
        let (a, b) = (random_vertex(&h, &mut rng), random_vertex(&h, &mut rng));
        let (x, y) = (h.distance(a, b), dist.d(h.vertex_id(a), h.vertex_id(b)));
        bad += (x != y) as usize;
        t.push(row![base, a, b, x, y]);
    }
    Outcome::new("horoball-metric", bad == 0, format!("{base}: {bad} mismatches in {pairs} pairs"), t)
}

/// Maximal runs of vertical steps and the number of horizontal steps.
pub fn geodesic_shape(p: &[HoroVertex]) -> (usize, usize) {
    let mut runs = 0;
    let mut horizontal = 0;
    let mut prev_vertical = false;
    for w in p.windows(2) {
        let vertical = w[0].base == w[1].base;
        if vertical && !prev_vertical {
            runs += 1;
        }
        horizontal += (!vertical) as usize;
        prev_vertical = vertical;
    }
    (runs, horizontal)
}

/// A uniformly random shortest path, choosing each step among the
/// neighbours one step closer to the target.
pub fn random_geodesic(g: &Graph, dist: &Distances, a: VertexId, b: VertexId, rng: &mut ChaCha8Rng) -> Vec<VertexId> {
    let row = dist.row(b);
    let mut p = vec![a];
    let mut v = a;
    while v != b {
        let next: Vec<VertexId> = g.neighbors(v).iter().copied().filter(|&w| row[w as usize] + 1 == row[v as usize]).collect();
        v = next[rng.gen_range(0..next.len())];
        p.push(v);
    }
    p
}

/// Shape and nearness of closed-form geodesics.
pub fn horoball_geodesics(base: &str, depth: u32, samples: usize, seed: u64) -> Outcome {
    let h = HoroballGraph::build(parse_base(base).expect("base"), depth);
    let g = h.to_graph();
    let dist = Distances::new(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Table::new(&["base", "a", "b", "length", "vertical_runs", "horizontal_edges", "hausdorff_to_bfs"]);
    let mut bad = 0;
    for _ in 0..samples {
        let (a, b) = (random_vertex(&h, &mut rng), random_vertex(&h, &mut rng));
        let p = h.geodesic(a, b);
        let (runs, horiz) = geodesic_shape(&p);
        let ids: Vec<VertexId> = p.iter().map(|&v| h.vertex_id(v)).collect();
        let other = random_geodesic(&g, &dist, h.vertex_id(a), h.vertex_id(b), &mut rng);
        let hd = hausdorff_distance(&g, &ids, &other);
        let valid = ids.windows(2).all(|w| g.has_edge(w[0], w[1])) && p.len() as u32 == h.distance(a, b) + 1;
        bad += (!valid || runs > 2 || horiz > 3 || hd > 4) as usize;
        t.push(row![base, a, b, p.len() - 1, runs, horiz, hd]);
    }
    Outcome::new("horoball-geodesics", bad == 0, format!("{base}: {bad} violations in {samples} geodesics"), t)
}

/// A random closed edge path: a random walk followed by a geodesic home.
fn random_loop(h: &HoroballGraph, g: &Graph, rng: &mut ChaCha8Rng) -> Vec<HoroVertex> {
    let start = random_vertex(h, rng);
    let mut ids = vec![h.vertex_id(start)];
    let steps = rng.gen_range(2..30);
    for _ in 0..steps {
        let n = g.neighbors(*ids.last().unwrap());
        ids.push(n[rng.gen_range(0..n.len())]);
    }
    let mut p: Vec<HoroVertex> = ids.iter().map(|&v| h.vertex(v)).collect();
    let back = h.geodesic(*p.last().unwrap(), start);
    p.extend_from_slice(&back[1..]);
    if p.len() == 1 {
        p.push(start);
    }
    p
}

/// Area and exact boundary of constructed fillings of random loops.
pub fn horoball_isoperimetry(base: &str, depth: u32, loops: usize, seed: u64) -> Outcome {
    let h = HoroballGraph::build(parse_base(base).expect("base"), depth);
    let g = h.to_graph();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Table::new(&["base", "loop_length", "chain_norm", "area", "boundary_exact"]);
    let mut bad = 0;
    let mut worst = rat(0, 1);
    for _ in 0..loops {
        let c = random_loop(&h, &g, &mut rng);
        let chain = path_chain(&c);
        let norm = chain.l1_norm();
        let (area, exact) = match h.fill(&c) {
            Ok(f) => (f.area(), crate::chain::boundary2(&f.chain()) == chain && f.cells.iter().all(|x| h.is_cell(x))),
            Err(_) => (usize::MAX, false),
        };
        let ok = exact && Rational::from_integer((area as i64).into()) <= &norm * Rational::from_integer(3.into());
        if !norm.is_zero() {
            let ratio = Rational::from_integer((area as i64).into()) / &norm;
            if ratio > worst {
                worst = ratio;
            }
        }
        bad += (!ok) as usize;
        t.push(row![base, c.len() - 1, norm, area, exact]);
    }
    Outcome::new("horoball-isoperimetry", bad == 0, format!("{base}: {bad} violations in {loops} loops, max area/|c| = {worst}"), t)
}

/// Thin-triangle constant of the truncation.
pub fn horoball_thinness(base: &str, depth: u32, budget: Budget) -> Outcome {
    let h = HoroballGraph::build(parse_base(base).expect("base"), depth);
    let g = h.to_graph();
    let dist = Distances::new(&g);
    // Geodesics between vertices at depth below the truncation stay inside it.
    let inner: Vec<VertexId> = (0..g.len() as VertexId).filter(|&v| h.vertex(v).depth < depth).collect();
    let e = delta_thin(&dist, &inner, budget);
    let mut t = Table::new(&["base", "depth", "inner", "triangles", "exhaustive", "delta_thin"]);
    t.push(row![base, depth, inner.len(), e.samples, e.exhaustive, e.value]);
    let ok = e.value <= Rational::from_integer(20.into());
    Outcome::new("horoball-thinness", ok, format!("{base}: thin constant {} over {} triangles", e.value, e.samples), t)
}

/// `Z/2 * Z/3` relative to its factors.
pub fn modular_group() -> RelativePresentation {
    RelativePresentation::parse("generators x y\nparabolic 1 type Z/2 generators x\nparabolic 2 type Z/3 generators y\n").expect("fixed presentation")
}

/// `F(a, b)` relative to `⟨a⟩, ⟨b⟩`.
pub fn free_group_rel_generators() -> RelativePresentation {
    RelativePresentation::parse("generators a b\nparabolic 1 type Z generators a\nparabolic 2 type Z generators b\n").expect("fixed presentation")
}

/// `Z² * Z` relative to its factors.
pub fn abelian_free_product() -> RelativePresentation {
    RelativePresentation::parse("generators a b c\nparabolic 1 type Z^2 generators a b\nparabolic 2 type Z generators c\n").expect("fixed presentation")
}

/// Exhaustive bicombing checks on one finite graph. The parameter is the
/// measured thin constant rounded up, and at least one.
pub fn bicombing_checks(name: &str, g: &Graph) -> Outcome {
    let dist = Distances::new(g);
    let all: Vec<VertexId> = (0..g.len() as VertexId).collect();
    let dhat = delta_thin(&dist, &all, Budget { exhaustive_below: 200, samples: 10_000, seed: 1 }).value;
    let dm = ceil_u32(&dhat).max(1);
    let m = Mineyev::new(&dist, dm).expect("positive parameter");
    let n = g.len() as VertexId;
    let (mut boundary_bad, mut anti_bad, mut flower_bad, mut norm_bad, mut worst) = (0, 0, 0, 0, rat(0, 1));
    let bound = Rational::from_integer((18 * dm as i64).into());
    for a in 0..n {
        for b in 0..n {
            let q = m.q(a, b).expect("hyperbolic enough");
            let mut want = vertex(b);
            want.sub(&vertex(a));
            boundary_bad += (boundary1(&q) != want) as usize;
            if a < b {
                anti_bad += (m.q(b, a).expect("hyperbolic enough") != q.negated()) as usize;
            }
            flower_bad += (!m.flower_support_ok(a, b).expect("hyperbolic enough")) as usize;
            let d = Rational::from_integer((dist.d(a, b) as i64).into());
            let norm = q.l1_norm();
            norm_bad += (norm > &bound * &d) as usize;
            if !d.is_zero() && norm.clone() / &d > worst {
                worst = norm / d;
            }
        }
    }
    let mut t = Table::new(&["graph", "vertices", "delta_thin", "parameter", "pairs", "boundary_violations", "antisymmetry_violations", "flower_violations", "norm_violations", "max_norm_ratio"]);
    t.push(row![name, n, dhat, dm, n * n, boundary_bad, anti_bad, flower_bad, norm_bad, worst]);
    let bad = boundary_bad + anti_bad + flower_bad + norm_bad;
    Outcome::new("bicombing", bad == 0, format!("{name}: {n} vertices, parameter {dm}, {bad} violations, max |Q|/d = {worst}"), t)
}

/// The graphs used for the bicombing suite: a Cayley ball of `Z/2 * Z/3` and
/// a shallow cusped ball of `F(a, b)`.
pub fn bicombing_graphs() -> Vec<(String, Graph)> {
    let rp = modular_group();
    let o = GroupOracle::for_presentation(&rp);
    let cb = cayley_ball(&o, 8, 1_000).expect("small ball");
    let rp2 = free_group_rel_generators();
    let o2 = GroupOracle::for_presentation(&rp2);
    let cusped = CuspedBall::build(&o2, &rp2, 2, 3, 1_000).expect("small ball");
    vec![("Z/2*Z/3 radius 8".to_string(), cb.graph()), ("F2 cusped radius 2 depth 3".to_string(), cusped.graph.clone())]
}

/// Random rational 1-chain on a random connected graph.
fn random_chain(rng: &mut ChaCha8Rng) -> (usize, Chain1<u32>) {
    let n = rng.gen_range(3..10);
    let mut c = SparseChain::zero();
    for v in 1..n as u32 {
        let u = rng.gen_range(0..v);
        c.add(&random_edge_term(u, v, rng));
    }
    for _ in 0..rng.gen_range(0..2 * n) {
        let (u, v) = (rng.gen_range(0..n as u32), rng.gen_range(0..n as u32));
        if u != v {
            c.add(&random_edge_term(u, v, rng));
        }
    }
    (n, c)
}

fn random_edge_term(u: u32, v: u32, rng: &mut ChaCha8Rng) -> Chain1<u32> {
    let (e, s) = Edge::oriented(u, v);
    let mut num = rng.gen_range(-12..=12i64);
    if num == 0 {
        num = 1;
    }
    SparseChain::single(e, rat(s * num, rng.gen_range(1..=6)))
}

/// Coherent decomposition of random chains into simple paths.
pub fn chain_decomposition(count: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Table::new(&["chain", "vertices", "support", "norm", "paths", "weighted_length", "reassembles", "coherent"]);
    let mut bad = 0;
    for i in 0..count {
        let (n, f) = random_chain(&mut rng);
        let mut terminals: Vec<u32> = boundary1(&f).support().copied().collect();
        terminals.push(0);
        terminals.sort_unstable();
        terminals.dedup();
        let (paths, weighted, reassembles, coherent) = match decompose(&f, &terminals) {
            Ok(ps) => {
                let mut sum: Chain1<u32> = SparseChain::zero();
                let mut weighted = rat(0, 1);
                let mut coherent = true;
                for (alpha, p) in &ps {
                    let pc = path_chain(p);
                    weighted += alpha * pc.l1_norm();
                    coherent &= alpha.is_positive() && pc.iter().all(|(e, c)| (f.coeff(e) * c).is_positive());
                    sum.add_scaled(&pc, alpha);
                }
                (ps.len(), weighted, sum == f, coherent)
            }
            Err(_) => (0, rat(-1, 1), false, false),
        };
        let ok = reassembles && coherent && weighted == f.l1_norm();
        bad += (!ok) as usize;
        t.push(row![i, n, f.len(), f.l1_norm(), paths, weighted, reassembles, coherent]);
    }
    Outcome::new("chain-decomposition", bad == 0, format!("{bad} violations in {count} chains"), t)
}

/// Measured thin constant of the cusped ball of `F(a, b)`, used to set
/// theoretical constants.
pub fn free_group_delta(radius: usize, depth: u32, inner_radius: usize, budget: Budget) -> Rational {
    let rp = free_group_rel_generators();
    let o = GroupOracle::for_presentation(&rp);
    let b = CuspedBall::build(&o, &rp, radius, depth, 2_000_000).expect("ball");
    let dist = Distances::new(&b.graph);
    let inner: Vec<VertexId> = b.inner(inner_radius).into_iter().filter(|&v| b.depth_of(v) < depth).collect();
    delta_thin(&dist, &inner, budget).value
}

fn preferred_sides(geo: &Geometry, t: [VertexId; 3], pairs_extra: &[(VertexId, VertexId)]) -> crate::preferred::Result<Vec<PreferredPath>> {
    let mut pairs = vec![(t[0], t[1]), (t[1], t[2]), (t[2], t[0])];
    pairs.extend_from_slice(pairs_extra);
    let cl = family_closure(geo, &pairs, 10)?;
    (0..3).map(|i| geo.preferred_path(pairs[i].0, pairs[i].1, &cl.family(pairs[i].0, pairs[i].1).expect("witness").members)).collect()
}

/// Quasi-geodesic and slimness bounds for preferred paths on the cusped
/// ball of `F(a, b)` at theoretical constants.
pub fn preferred_quasigeodesics(constants: Constants, radius: usize, pairs: usize, triangles: usize, seed: u64) -> Outcome {
    let rp = free_group_rel_generators();
    let o = GroupOracle::for_presentation(&rp);
    let slack = 200;
    let b = CuspedBall::build(&o, &rp, radius, constants.l1 + slack, 5_000_000).expect("ball");
    let geo = Geometry::new(&b, constants, radius);
    let shallow: Vec<VertexId> = b.inner(radius).into_iter().filter(|&v| b.depth_of(v) <= 6).collect();
    let deep: Vec<VertexId> = b.inner(radius).into_iter().filter(|&v| b.depth_of(v) >= constants.l1 && b.depth_of(v) + slack / 2 <= b.depth).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.5) { shallow[rng.gen_range(0..shallow.len())] } else { deep[rng.gen_range(0..deep.len())] };
    let mut sample = Vec::new();
    while sample.len() < pairs {
        let (x, y) = (pick(&mut rng), pick(&mut rng));
        if x != y {
            sample.push((x, y));
        }
    }
    let mut t = Table::new(&["kind", "a", "b", "c", "distance", "length", "length_bound", "hausdorff", "hausdorff_bound", "family_size", "ok"]);
    let mut bad = 0;
    let cl = family_closure(&geo, &sample, 10).expect("closure");
    for &(x, y) in &sample {
        let f = cl.family(x, y).expect("witness");
        let row = geo.preferred_path(x, y, &f.members).and_then(|p| geo.quasigeodesic_check(&p));
        match row {
            Ok(q) => {
                bad += (!q.ok()) as usize;
                t.push(row![
                    "pair",
                    b.label(x),
                    b.label(y),
                    "",
                    q.distance,
                    q.length,
                    q.length_bound,
                    q.hausdorff,
                    q.hausdorff_bound,
                    f.members.len(),
                    q.ok()
                ]);
            }
            Err(e) => {
                bad += 1;
                t.push(row!["pair", b.label(x), b.label(y), "", "", e, "", "", "", f.members.len(), false]);
            }
        }
    }
    let bound = slimness_bound(&constants);
    let mut worst_slim = 0;
    for _ in 0..triangles {
        let tri = [pick(&mut rng), pick(&mut rng), pick(&mut rng)];
        match preferred_sides(&geo, tri, &[]) {
            Ok(s) => {
                let slim = geo.slimness([&s[0].vertices, &s[1].vertices, &s[2].vertices]);
                worst_slim = worst_slim.max(slim);
                bad += (slim > bound) as usize;
                t.push(row!["triangle", b.label(tri[0]), b.label(tri[1]), b.label(tri[2]), "", "", "", slim, bound, "", slim <= bound]);
            }
            Err(e) => {
                bad += 1;
                t.push(row!["triangle", b.label(tri[0]), b.label(tri[1]), b.label(tri[2]), "", e, "", "", bound, "", false]);
            }
        }
    }
    Outcome::new(
        "preferred-quasigeodesics",
        bad == 0,
        format!(
            "delta {} K {} L1 {}: {pairs} pairs, {triangles} triangles, {bad} violations, max slimness {worst_slim} (bound {bound})",
            constants.delta, constants.k, constants.l1
        ),
        t,
    )
}

/// A vertex named by coset transversal, parabolic, element and depth; depth
/// zero names the Cayley vertex of the product.
pub type PointSpec<'a> = (&'a str, usize, &'a str, u32);

fn point(rp: &RelativePresentation, o: &GroupOracle, b: &CuspedBall, s: PointSpec) -> Option<VertexId> {
    let w = |x: &str| rp.parse_word(x).expect("word");
    let label = if s.3 == 0 {
        CuspedVertex::Cayley(o.normal_form(&w(s.0).concat(&w(s.2))).ok()?)
    } else {
        CuspedVertex::Horo { parabolic: s.1, transversal: w(s.0), element: w(s.2), depth: s.3 }
    };
    b.vertex(&label)
}

/// One curated instance for the axiom checks.
pub struct AxiomInstance {
    pub name: &'static str,
    pub presentation: RelativePresentation,
    pub radius: usize,
    pub depth: u32,
    pub points: Vec<PointSpec<'static>>,
}

pub fn axiom_instances() -> Vec<AxiomInstance> {
    vec![
        AxiomInstance {
            name: "F2 rel <a>,<b>",
            presentation: free_group_rel_generators(),
            radius: 3,
            depth: 10,
            points: vec![
                ("", 0, "a^-1", 8),
                ("", 0, "a", 5),
                ("b", 0, "", 8),
                ("b", 0, "a", 6),
                ("", 1, "b^-1", 7),
                ("a", 1, "b", 9),
                ("", 0, "", 0),
                ("", 0, "a b", 0),
                ("", 0, "b^-1 a", 0),
                ("a^-1", 1, "b", 5),
            ],
        },
        AxiomInstance {
            name: "Z^2*Z rel factors",
            presentation: abelian_free_product(),
            radius: 2,
            depth: 10,
            points: vec![("", 0, "a b", 8), ("", 0, "a^-1", 5), ("c", 0, "b", 7), ("", 1, "c", 6), ("a", 1, "c^-1", 9), ("", 0, "", 0), ("", 0, "c a", 0), ("", 0, "b c", 0)],
        },
    ]
}

/// Axioms on the closure of all pairs of curated points and their
/// translates by generators.
pub fn axioms_curated(constants: Constants) -> Outcome {
    let mut t = Table::new(&["instance", "witnesses", "iterations", "fixpoint", "axiom", "checked", "violations"]);
    let mut ok = true;
    let mut notes = Vec::new();
    for inst in axiom_instances() {
        let rp = &inst.presentation;
        let o = GroupOracle::for_presentation(rp);
        let b = CuspedBall::build(&o, rp, inst.radius, inst.depth, 2_000_000).expect("ball");
        let geo = Geometry::new(&b, constants, inst.radius);
        let pts: Vec<VertexId> = inst.points.iter().map(|&s| point(rp, &o, &b, s).expect("curated point in ball")).collect();
        let gens: Vec<Word> = (0..rp.ngens()).flat_map(|g| [Word::letter(g as i32 + 1), Word::letter(-(g as i32) - 1)]).collect();
        let mut pairs: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();
        for &x in &pts {
            for &y in &pts {
                if x != y {
                    pairs.insert((x, y));
                    for g in &gens {
                        if let (Some(tx), Some(ty)) = (b.translate(&o, g, x), b.translate(&o, g, y)) {
                            if geo.is_inner(tx) && geo.is_inner(ty) {
                                pairs.insert((tx, ty));
                            }
                        }
                    }
                }
            }
        }
        let pairs: Vec<(VertexId, VertexId)> = pairs.into_iter().collect();
        let cl = match family_closure(&geo, &pairs, 10) {
            Ok(c) => c,
            Err(e) => {
                ok = false;
                notes.push(format!("{}: {e}", inst.name));
                continue;
            }
        };
        let rep = check_axioms(&geo, &cl, &o, &gens).expect("axiom check");
        ok &= rep.passed() && cl.fixpoint && cl.iterations <= 10;
        for (i, a) in rep.axioms.iter().enumerate() {
            t.push(row![inst.name, cl.families.len(), cl.iterations, cl.fixpoint, format!("A{}", i + 1), a.checked, a.violations]);
        }
        let total: usize = rep.axioms.iter().map(|a| a.violations).sum();
        notes.push(format!("{}: {} witnesses, fixpoint after {} iterations, {total} violations", inst.name, cl.families.len(), cl.iterations));
    }
    Outcome::new("axioms", ok, notes.join("; "), t)
}

/// Curated triangles for the skeleton checks, with corners deep in one or
/// two horoballs beyond depth `L2`.
pub fn skeleton_triangles(l2: u32) -> Vec<[PointSpec<'static>; 3]> {
    vec![
        [("", 0, "", l2 + 50), ("", 0, "a^2", l2 + 80), ("", 0, "b", 0)],
        [("", 0, "", l2 + 50), ("", 1, "b", l2 + 20), ("", 0, "b a", 0)],
        [("", 0, "a", l2 + 50), ("", 0, "b", 0), ("", 0, "b^-1", 0)],
        [("", 0, "a", l2 + 50), ("", 0, "a^-1", 100), ("", 1, "b^-1", l2 + 10)],
        [("", 0, "a^-1", l2 + 40), ("", 0, "a^2", l2 + 40), ("a^-1 b", 0, "", 0)],
        [("", 1, "b^2", l2 + 60), ("", 1, "b^-2", l2 + 60), ("", 0, "a", 0)],
    ]
}

/// Rib count, middle size and pair distances on curated preferred triangles.
pub fn skeleton_curated(constants: Constants, radius: usize) -> Outcome {
    let rp = free_group_rel_generators();
    let o = GroupOracle::for_presentation(&rp);
    let b = CuspedBall::build(&o, &rp, radius, constants.l2 + 300, 5_000_000).expect("ball");
    let geo = Geometry::new(&b, constants, radius);
    let mut t = Table::new(&["a", "b", "c", "classes", "l2_vertices", "pairs", "ribs", "ligaments", "legs", "middle", "perfect_matching", "max_pair_distance", "ok"]);
    let mut bad = 0;
    for spec in skeleton_triangles(constants.l2) {
        let tri = spec.map(|s| point(&rp, &o, &b, s).expect("curated point in ball"));
        let labels = tri.map(|v| b.label(v));
        let r = preferred_sides(&geo, tri, &[]).and_then(|s| build_skeleton(&geo, [&s[0], &s[1], &s[2]]));
        match r {
            Ok(sk) => {
                let ok = sk.ribs() <= 6 && sk.middle.len() <= 15 && sk.max_pair_distance <= 1 && sk.perfect_matching;
                bad += (!ok) as usize;
                let classes: Vec<String> = sk.classes.iter().map(|c| format!("{:?}", c.1)).collect();
                let l2v = sk.vertices.iter().filter(|v| v.corner.is_none()).count();
                t.push(row![
                    labels[0],
                    labels[1],
                    labels[2],
                    classes.join(" "),
                    l2v,
                    sk.pairs.len(),
                    sk.ribs(),
                    sk.ligaments(),
                    sk.legs.len(),
                    sk.middle.len(),
                    sk.perfect_matching,
                    sk.max_pair_distance,
                    ok
                ]);
            }
            Err(e) => {
                bad += 1;
                t.push(row![labels[0], labels[1], labels[2], e, "", "", "", "", "", "", "", "", false]);
            }
        }
    }
    let n = t.rows.len();
    Outcome::new("skeleton", bad == 0, format!("{n} triangles at L2 = {}, {bad} violations", constants.l2), t)
}

/// A vertex named by its anchor element, parabolic and depth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnchoredPoint {
    pub anchor: Word,
    pub parabolic: usize,
    pub depth: u32,
}

impl AnchoredPoint {
    /// The vertex at this depth below the anchor in the coset of the given
    /// parabolic through it; depth zero is the anchor itself.
    pub fn resolve(&self, b: &CuspedBall) -> Option<VertexId> {
        let g = b.cayley_vertex(&self.anchor)?;
        if self.depth == 0 {
            return Some(g);
        }
        let ci = b.zero_horoballs(g).into_iter().find(|&c| b.cosets[c].id.parabolic == self.parabolic)?;
        let m = b.cosets[ci].cayley.iter().position(|&x| x == b.anchor[g as usize])?;
        (self.depth <= b.depth).then(|| b.horo_vertex(ci, m, self.depth))
    }
}

/// Random triangles for the defect checks: anchors of length at most one,
/// depths in `0..=12` or `30..=45` other than `L2`, with distinct corners.
fn defect_labels(rp: &RelativePresentation, l2: u32, count: usize, seed: u64) -> Vec<[AnchoredPoint; 3]> {
    let names: Vec<Word> = ["", "a", "a^-1", "b", "b^-1"].iter().map(|s| rp.parse_word(s).unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let one = |rng: &mut ChaCha8Rng| loop {
        let depth = if rng.gen_bool(0.5) { rng.gen_range(0..=12) } else { rng.gen_range(30..=45) };
        let anchor = names[rng.gen_range(0..names.len())].clone();
        let parabolic = if depth == 0 { 0 } else { rng.gen_range(0..2usize) };
        if depth != l2 {
            return AnchoredPoint { anchor, parabolic, depth };
        }
    };
    let mut out = Vec::new();
    while out.len() < count {
        let t = [one(&mut rng), one(&mut rng), one(&mut rng)];
        if t[0] != t[1] && t[1] != t[2] && t[2] != t[0] {
            out.push(t);
        }
    }
    out
}

/// Thick-defect support and `|c_abc|₁` on sampled triangles at two radii.
pub fn thick_defect(constants: Constants, mineyev_parameter: u32, radii: [usize; 2], triangles: usize, seed: u64) -> Outcome {
    let rp = free_group_rel_generators();
    let o = GroupOracle::for_presentation(&rp);
    let labels = defect_labels(&rp, constants.l2, triangles, seed);
    let depth = constants.l2 + constants.l1 + 18 * mineyev_parameter;
    let mut t = Table::new(&["radius", "triangle", "a", "b", "c", "c_norm", "defect_outside", "ok"]);
    let mut bad = 0;
    let mut norms: Vec<Vec<Rational>> = Vec::new();
    for radius in radii {
        let b = CuspedBall::build(&o, &rp, radius, depth, 5_000_000).expect("ball");
        let geo = Geometry::new(&b, constants, radius);
        let thick = ThickPart::new(&b, depth);
        let tdist = Distances::new(&thick.graph);
        let m = Mineyev::new(&tdist, mineyev_parameter).expect("positive parameter");
        let qb = QBicombing { geo: &geo, thick: &thick, mineyev: &m };
        let mut these = Vec::new();
        for (i, lab) in labels.iter().enumerate() {
            let tri: Vec<Option<VertexId>> = lab.iter().map(|l| l.resolve(&b)).collect();
            let names: Vec<String> = tri.iter().map(|v| v.map(|v| b.label(v)).unwrap_or_else(|| "missing".into())).collect();
            let Some(tri) = tri.into_iter().collect::<Option<Vec<_>>>() else {
                bad += 1;
                these.push(rat(-1, 1));
                t.push(row![radius, i, names[0], names[1], names[2], "", "", false]);
                continue;
            };
            let r = preferred_sides(&geo, [tri[0], tri[1], tri[2]], &[]).and_then(|s| {
                let sk = build_skeleton(&geo, [&s[0], &s[1], &s[2]])?;
                let c = qb.c_abc(&sk)?;
                let outside = qb.defect_outside([&s[0], &s[1], &s[2]], &c)?;
                Ok((c.l1_norm(), outside.len()))
            });
            match r {
                Ok((norm, out)) => {
                    bad += (out > 0) as usize;
                    t.push(row![radius, i, names[0], names[1], names[2], norm, out, out == 0]);
                    these.push(norm);
                }
                Err(e) => {
                    bad += 1;
                    these.push(rat(-1, 1));
                    t.push(row![radius, i, names[0], names[1], names[2], e, "", false]);
                }
            }
        }
        norms.push(these);
    }
    let max = |v: &Vec<Rational>| v.iter().max().cloned().unwrap_or_else(|| rat(0, 1));
    let stable = norms[0] == norms[1];
    Outcome::new(
        "thick-defect",
        bad == 0 && stable,
        format!("{triangles} triangles, {bad} violations, max |c| = {} at radius {} and {} at radius {}", max(&norms[0]), radii[0], max(&norms[1]), radii[1]),
        t,
    )
}

/// Expected orders on the spherical side of the triangle family.
pub const FINITE_TRIANGLES: [((i64, i64, i64), usize); 6] =
    [((2, 3, 5), 60), ((2, 3, 4), 24), ((2, 3, 3), 12), ((2, 2, 3), 6), ((2, 2, 5), 10), ((2, 2, 10), 20)];

/// Triangle fillings on the hyperbolic side.
pub const INFINITE_TRIANGLES: [(i64, i64, i64); 3] = [(2, 3, 7), (3, 3, 4), (4, 4, 4)];

/// Orders and growth of triangle quotients.
pub fn triangle_family(radius: usize, budget: Budget) -> Outcome {
    let mut t = Table::new(&["p", "q", "r", "hyperbolic_side", "verdict", "order", "ball_sizes", "delta_thin", "ok"]);
    let mut bad = 0;
    let cases: Vec<((i64, i64, i64), Option<usize>)> =
        FINITE_TRIANGLES.iter().map(|&(k, n)| (k, Some(n))).chain(INFINITE_TRIANGLES.iter().map(|&k| (k, None))).collect();
    for ((p, q, r), want) in cases {
        let rep = triangle_experiment(p, q, r, radius, 2_000_000, budget).expect("triangle filling");
        let (verdict, order) = match &rep.quotient.finiteness {
            Finiteness::Finite { order } => ("finite", order.to_string()),
            Finiteness::GrowingTo { .. } => ("growing", String::new()),
            Finiteness::Inconclusive => ("inconclusive", String::new()),
            Finiteness::Undecided => ("undecided", String::new()),
        };
        let ok = rep.matches_dichotomy()
            && match want {
                Some(n) => rep.quotient.finiteness == Finiteness::Finite { order: n },
                None => rep.quotient.finiteness == Finiteness::GrowingTo { radius },
            };
        bad += (!ok) as usize;
        let sizes: Vec<String> = rep.quotient.ball_sizes.iter().map(|s| s.to_string()).collect();
        t.push(row![p, q, r, rep.hyperbolic_side, verdict, order, sizes.join(" "), rep.quotient.delta_hat.map(|d| d.to_string()).unwrap_or_default(), ok]);
    }
    Outcome::new("triangle-family", bad == 0, format!("{} fillings, {bad} disagreements with the dichotomy", t.rows.len()), t)
}

/// Injectivity and trivial intersections of parabolic images.
pub fn filling_injectivity(slopes: &[i64], bound: u64) -> Outcome {
    let mut t = Table::new(&["slope", "parabolic", "elements_checked", "failures", "intersections", "threshold_met"]);
    let mut bad = 0;
    for &n in slopes {
        let fs = fill(&thrice_punctured_sphere(), &triangle_kernels(n, n, n), &Constants::theoretical(1), 1 << 20).expect("filling");
        let rep = injectivity_check(&fs, bound).expect("complete quotient");
        bad += rep.failures.len() + rep.intersections.len();
        for (i, c) in rep.checked.iter().enumerate() {
            t.push(row![n, i + 1, c, rep.failures.len(), rep.intersections.len(), rep.threshold_met]);
        }
    }
    Outcome::new("filling-injectivity", bad == 0, format!("slopes {slopes:?}: {bad} violations"), t)
}

/// Largest depth whose horizontal edges span less than the shortest slope.
pub fn desk_shell_depth(min_slope: i64) -> u32 {
    let mut l = 0;
    while (1i64 << (l + 1)) < min_slope {
        l += 1;
    }
    l
}

/// Shell isomorphism for equal-slope triangle fillings, and the trivial
/// filling against the base cusped ball.
pub fn surgered_shell(slopes: &[(i64, usize)]) -> Outcome {
    let mut t = Table::new(&["filling", "radius", "shell_depth", "vertices", "cosets_checked", "mismatches", "self_loops", "ok"]);
    let mut ok = true;
    for &(n, radius) in slopes {
        let depth = desk_shell_depth(n);
        let fs = fill(&thrice_punctured_sphere(), &triangle_kernels(n, n, n), &Constants::explicit(1, 1, 1, depth), 1 << 20).expect("filling");
        let ss = build_surgered(&fs, radius, depth + 1, 2_000_000).expect("surgered space");
        let rep = shell_check(&ss, depth);
        let good = rep.passed() && rep.self_loops == 0;
        ok &= good;
        t.push(row![format!("({n},{n},{n})"), radius, depth, ss.ball.len(), rep.cosets_checked, rep.mismatches, rep.self_loops, good]);
    }
    let rp = thrice_punctured_sphere();
    let ks: Vec<FillingKernel> = (1..=3).map(FillingKernel::trivial).collect();
    let fs = fill(&rp, &ks, &Constants::explicit(1, 1, 1, 2), 1 << 20).expect("filling");
    let ss = build_surgered(&fs, 3, 4, 2_000_000).expect("surgered space");
    let o = GroupOracle::for_presentation(&rp);
    let base = CuspedBall::build(&o, &rp, 3, 4, 2_000_000).expect("ball");
    let same = same_cusped_ball(&ss.ball, &base);
    ok &= same;
    t.push(row!["trivial", 3, 4, ss.ball.len(), "", "", "", same]);
    Outcome::new("surgered-shell", ok, format!("{} fillings checked; trivial filling reproduces the base ball: {same}", slopes.len()), t)
}

/// Coset identifier of the parabolic `p` through the identity.
pub fn identity_coset(b: &CuspedBall, parabolic: usize) -> Option<usize> {
    b.coset_index(&HoroballId { parabolic, transversal: Word::identity() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_counts() {
        let p = [HoroVertex::new(0, 0), HoroVertex::new(0, 1), HoroVertex::new(0, 2), HoroVertex::new(3, 2), HoroVertex::new(3, 1)];
        assert_eq!(geodesic_shape(&p), (2, 1));
    }

    #[test]
    fn shell_depths() {
        assert_eq!(desk_shell_depth(4), 1);
        assert_eq!(desk_shell_depth(8), 2);
        assert_eq!(desk_shell_depth(12), 3);
    }

    #[test]
    fn bases_parse() {
        assert_eq!(parse_base("cycle:50").unwrap().len(), 50);
        assert_eq!(parse_base("grid:8x8").unwrap().len(), 64);
        assert!(parse_base("torus:3").is_none());
    }

    #[test]
    fn small_decomposition_suite() {
        assert!(chain_decomposition(20, 3).passed);
    }
}
