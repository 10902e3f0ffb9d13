//! Dehn filling experiments: quotient construction, the surgered space,
//! slope-length thresholds, injectivity and survival checks, and quotient
//! hyperbolicity estimates.
//!
//! The surgered space is realized as the cusped ball of the quotient group
//! relative to the quotient parabolics. The shell check compares each
//! horoball of that ball, down to a chosen depth, with the quotient of a
//! horoball over the unfilled parabolic computed independently by lifting.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::Rational;
use crate::cusped::{CuspedBall, CuspedError};
use crate::graph::{Distances, VertexId};
use crate::metric::{ceil_u32, delta_thin, Budget, Constants};
use crate::mineyev::Mineyev;
use crate::oracle::{cayley_ball, GroupOracle, OracleError};
use crate::parabolic::{PElem, Peripheral};
use crate::presentation::{
    quotient_presentation, slope_length, FillingKernel, ParabolicKind, PresentationError, RelativePresentation, SlopeLength,
};
use crate::word::{gen_of, Word};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FillingError {
    #[error(transparent)]
    Presentation(#[from] PresentationError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Cusped(#[from] CuspedError),
}

/// The slope-length thresholds a filling is compared against, as powers of two.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Threshold {
    /// `12·2^(3000δ)` at the configured `δ`.
    pub theoretical: String,
    /// `12·2^L2` for the active constants.
    pub configured: String,
    pub configured_exponent: u32,
    pub regime: crate::metric::Regime,
}

impl Threshold {
    pub fn new(c: &Constants) -> Self {
        Threshold {
            theoretical: format!("12*2^{}", 3000u64 * c.delta as u64),
            configured: format!("12*2^{}", c.l2),
            configured_exponent: c.l2,
            regime: c.regime,
        }
    }

    /// Whether a slope length reaches `12·2^L2`.
    pub fn cleared_by(&self, s: SlopeLength) -> bool {
        match s {
            SlopeLength::Infinite => true,
            SlopeLength::Finite(n) => self.configured_exponent < 60 && n >= 12u64 << self.configured_exponent,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FillingSpec {
    pub base: RelativePresentation,
    pub kernels: Vec<FillingKernel>,
    pub quotient: RelativePresentation,
    /// One slope length per parabolic, in parabolic order.
    pub slopes: Vec<SlopeLength>,
    pub threshold: Threshold,
}

impl FillingSpec {
    pub fn min_slope(&self) -> SlopeLength {
        self.slopes.iter().copied().min().unwrap_or(SlopeLength::Infinite)
    }

    pub fn clears_threshold(&self) -> bool {
        self.threshold.cleared_by(self.min_slope())
    }

    pub fn is_trivial(&self) -> bool {
        self.slopes.iter().all(|s| *s == SlopeLength::Infinite)
    }

    pub fn base_oracle(&self) -> GroupOracle {
        GroupOracle::for_presentation(&self.base)
    }

    /// Oracle for the quotient; fails when completion did not finish.
    pub fn quotient_oracle(&self) -> Result<GroupOracle, FillingError> {
        let o = GroupOracle::for_presentation(&self.quotient);
        if !o.is_complete() {
            return Err(OracleError::IncompleteOracle.into());
        }
        Ok(o)
    }
}

/// Assembles the quotient presentation and computes slope lengths, searching
/// kernels up to `slope_bound`.
pub fn fill(
    rp: &RelativePresentation,
    kernels: &[FillingKernel],
    constants: &Constants,
    slope_bound: u64,
) -> Result<FillingSpec, FillingError> {
    let quotient = quotient_presentation(rp, kernels)?;
    let mut slopes = Vec::new();
    for p in &rp.parabolics {
        let s = match kernels.iter().find(|k| k.parabolic_id == p.id) {
            Some(k) => slope_length(p, k, slope_bound)?,
            None => SlopeLength::Infinite,
        };
        slopes.push(s);
    }
    Ok(FillingSpec { base: rp.clone(), kernels: kernels.to_vec(), quotient, slopes, threshold: Threshold::new(constants) })
}

/// `F(x, y)` relative to `⟨x⟩, ⟨y⟩, ⟨xy⟩`, written with `z = xy`.
pub fn thrice_punctured_sphere() -> RelativePresentation {
    RelativePresentation::parse(
        "group F2\ngenerators x y z\nparabolic 1 type Z generators x\nparabolic 2 type Z generators y\nparabolic 3 type Z generators z\nrelator x y z^-1\n",
    )
    .expect("fixed presentation")
}

/// Kernels `⟨x^p⟩, ⟨y^q⟩, ⟨z^r⟩` of the triangle filling.
pub fn triangle_kernels(p: i64, q: i64, r: i64) -> Vec<FillingKernel> {
    [(1, 0, p), (2, 1, q), (3, 2, r)].iter().map(|&(id, g, n)| FillingKernel::word(id, Word::power(g, n))).collect()
}

/// The surgered space at desk scale.
pub struct SurgeredSpace {
    pub oracle: GroupOracle,
    pub ball: CuspedBall,
}

pub fn build_surgered(fs: &FillingSpec, radius: usize, depth: u32, cap: usize) -> Result<SurgeredSpace, FillingError> {
    let oracle = fs.quotient_oracle()?;
    let ball = CuspedBall::build(&oracle, &fs.quotient, radius, depth, cap)?;
    Ok(SurgeredSpace { oracle, ball })
}

/// Result of comparing horoballs with quotients of unfilled horoballs.
#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct ShellReport {
    pub depth: u32,
    pub cosets_checked: usize,
    pub mismatches: usize,
    /// Quotient vertices joined to themselves by a lifted horizontal edge at the
    /// given depth; zero exactly when every slope exceeds `2^depth`.
    pub self_loops: usize,
}

impl ShellReport {
    pub fn passed(&self) -> bool {
        self.mismatches == 0 && self.cosets_checked > 0
    }
}

/// Least `l1` distance between lifts of two residues of `Z/m_1 × ... × Z/m_r`,
/// by explicit search over lifts in `[-m, 2m)`.
fn lifted_distance(orders: &[u64], x: &[i64], y: &[i64]) -> u64 {
    x.iter()
        .zip(y)
        .zip(orders)
        .map(|((&a, &b), &m)| {
            let m = m as i64;
            (-1..=1).map(|t| (a - (b + t * m)).unsigned_abs()).min().unwrap()
        })
        .sum()
}

/// Whether some nonzero lift of zero has `l1` norm at most `w`.
fn has_short_kernel(orders: &[u64], w: u64) -> bool {
    orders.iter().any(|&m| m <= w)
}

/// Checks every coset of the surgered ball whose members fill a whole finite
/// quotient parabolic: down to `depth`, its horoball must be the quotient of
/// the horoball over the unfilled parabolic.
pub fn shell_check(ss: &SurgeredSpace, depth: u32) -> ShellReport {
    let ball = &ss.ball;
    let mut r = ShellReport { depth: depth.min(ball.depth), ..Default::default() };
    let depth = r.depth;
    for (ci, c) in ball.cosets.iter().enumerate() {
        let per: &Peripheral = ball.peripheral(c.id.parabolic);
        let ParabolicKind::FiniteCyclic { orders } = &per.spec.kind else { continue };
        let size: u64 = orders.iter().product();
        if c.elements.len() as u64 != size {
            continue;
        }
        r.cosets_checked += 1;
        let coords: Vec<Vec<i64>> = c
            .elements
            .iter()
            .map(|e| match e {
                PElem::Abelian(v) => v.clone(),
                PElem::Free(_) => unreachable!("finite parabolics are abelian"),
            })
            .collect();
        let s = coords.len();
        let id = |m: usize, k: u32| ball.horo_vertex(ci, m, k);
        let members: BTreeMap<VertexId, (usize, u32)> =
            (0..s).flat_map(|m| (0..=depth).map(move |k| (m, k))).map(|(m, k)| (id(m, k), (m, k))).collect();
        let mut have: BTreeSet<((usize, u32), (usize, u32))> = BTreeSet::new();
        for (&v, &lv) in &members {
            for &w in ball.graph.neighbors(v) {
                if let Some(&lw) = members.get(&w) {
                    // Depth-zero edges of other generators are not part of the horoball.
                    if lv.1 == 0 && lw.1 == 0 && lifted_distance(orders, &coords[lv.0], &coords[lw.0]) != 1 {
                        continue;
                    }
                    if lv < lw {
                        have.insert((lv, lw));
                    }
                }
            }
        }
        let mut want: BTreeSet<((usize, u32), (usize, u32))> = BTreeSet::new();
        for m in 0..s {
            for k in 0..depth {
                want.insert(((m, k), (m, k + 1)));
            }
            for n in m + 1..s {
                let d = lifted_distance(orders, &coords[m], &coords[n]);
                for k in 0..=depth {
                    if d <= 1u64 << k {
                        want.insert(((m, k), (n, k)));
                    }
                }
            }
        }
        if have != want {
            r.mismatches += 1;
        }
        if has_short_kernel(orders, 1u64 << depth) {
            r.self_loops += s;
        }
    }
    r
}

/// Edge-for-edge comparison of two cusped balls with identical labels.
pub fn same_cusped_ball(x: &CuspedBall, y: &CuspedBall) -> bool {
    if x.labels != y.labels {
        return false;
    }
    let ex: BTreeSet<(VertexId, VertexId)> = x.graph.edges().collect();
    let ey: BTreeSet<(VertexId, VertexId)> = y.graph.edges().collect();
    ex == ey
}

#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct InjectivityReport {
    /// Nontrivial elements of each `P_i/K_i` checked.
    pub checked: Vec<usize>,
    /// Elements sent to the identity or colliding with another element.
    pub failures: Vec<String>,
    /// Pairs of parabolics whose images meet outside the identity.
    pub intersections: Vec<String>,
    pub threshold_met: bool,
}

impl InjectivityReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.intersections.is_empty()
    }
}

/// Checks that each `P_i/K_i → G/K` is injective on elements of word length at
/// most `bound`, and that the images of distinct parabolics meet trivially.
pub fn injectivity_check(fs: &FillingSpec, bound: u64) -> Result<InjectivityReport, FillingError> {
    let o = fs.quotient_oracle()?;
    let mut r = InjectivityReport { threshold_met: fs.clears_threshold(), ..Default::default() };
    let mut images: Vec<BTreeSet<Word>> = Vec::new();
    for p in &fs.quotient.parabolics {
        let per = Peripheral::new(p);
        let mut seen: BTreeMap<Word, Word> = BTreeMap::new();
        let mut count = 0;
        for e in per.ball(bound) {
            if per.is_identity(&e) {
                continue;
            }
            count += 1;
            let w = per.word(&e);
            let nf = o.normal_form(&w)?;
            let shown = fs.quotient.show(&w);
            if nf.is_empty() {
                r.failures.push(format!("parabolic {}: {shown} is trivial", p.id));
            } else if let Some(prev) = seen.insert(nf, w.clone()) {
                r.failures.push(format!("parabolic {}: {shown} equals {}", p.id, fs.quotient.show(&prev)));
            }
        }
        r.checked.push(count);
        images.push(seen.into_keys().collect());
    }
    for i in 0..images.len() {
        for j in i + 1..images.len() {
            if let Some(w) = images[i].intersection(&images[j]).next() {
                r.intersections.push(format!(
                    "parabolics {} and {} share {}",
                    fs.quotient.parabolics[i].id,
                    fs.quotient.parabolics[j].id,
                    fs.quotient.show(w)
                ));
            }
        }
    }
    Ok(r)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct SurvivalReport {
    pub size: usize,
    /// Pairs distinct in `G` and equal in `G/K`, split by whether their
    /// quotient lies in one filling kernel.
    pub expected: Vec<(String, String)>,
    pub unexpected: Vec<(String, String)>,
}

impl SurvivalReport {
    pub fn injective(&self) -> bool {
        self.expected.is_empty() && self.unexpected.is_empty()
    }
}

/// Compares normal forms of `words` in `G` and in `G/K` pairwise.
pub fn survival_check(fs: &FillingSpec, words: &[Word]) -> Result<SurvivalReport, FillingError> {
    let base = fs.base_oracle();
    let quot = fs.quotient_oracle()?;
    let mut groups: BTreeMap<Word, Vec<Word>> = BTreeMap::new();
    let mut distinct: BTreeSet<Word> = BTreeSet::new();
    for w in words {
        let g = base.normal_form(w)?;
        if distinct.insert(g.clone()) {
            groups.entry(quot.normal_form(w)?).or_default().push(g);
        }
    }
    let mut r = SurvivalReport { size: distinct.len(), ..Default::default() };
    for list in groups.values() {
        for i in 0..list.len() {
            for j in i + 1..list.len() {
                let diff = base.normal_form(&list[i].inverse().concat(&list[j]))?;
                let pair = (fs.base.show(&list[i]), fs.base.show(&list[j]));
                if in_one_kernel(fs, &diff) {
                    r.expected.push(pair);
                } else {
                    r.unexpected.push(pair);
                }
            }
        }
    }
    Ok(r)
}

/// Whether a normal form is a word in one parabolic lying in its kernel.
fn in_one_kernel(fs: &FillingSpec, w: &Word) -> bool {
    if w.is_empty() {
        return true;
    }
    let Some(pi) = fs.base.parabolics.iter().position(|p| p.generators.contains(&gen_of(w.letters()[0]))) else {
        return false;
    };
    let p = &fs.base.parabolics[pi];
    if !w.letters().iter().all(|&l| p.generators.contains(&gen_of(l))) {
        return false;
    }
    let q = Peripheral::new(&fs.quotient.parabolics[pi]);
    q.is_identity(&q.element(w))
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Finiteness {
    /// The ball stopped growing; the order is its size.
    Finite { order: usize },
    /// Sphere sizes increased strictly up to the radius.
    GrowingTo { radius: usize },
    /// Neither: growth stalled without saturating, or the ball hit the cap.
    Inconclusive,
    /// Completion did not finish.
    Undecided,
}

/// Finiteness evidence and growth of a quotient group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientReport {
    pub finiteness: Finiteness,
    /// Cumulative ball sizes by radius.
    pub ball_sizes: Vec<usize>,
    /// Thin constant of the half-radius ball when the quotient keeps growing.
    pub delta_hat: Option<Rational>,
    /// Size of the completed rewriting system.
    pub rules: Option<usize>,
}

/// Decides finiteness of `G/K` by ball saturation up to `radius`, and
/// estimates `δ̂` on the inner half of the ball when it keeps growing.
pub fn quotient_growth(fs: &FillingSpec, radius: usize, cap: usize, budget: Budget) -> Result<QuotientReport, FillingError> {
    let mut rep = QuotientReport { finiteness: Finiteness::Undecided, ball_sizes: vec![], delta_hat: None, rules: None };
    let Ok(o) = fs.quotient_oracle() else { return Ok(rep) };
    if let crate::oracle::Backing::RewriteSystem(rs) = &o.backing {
        rep.rules = Some(rs.len());
    }
    let ball = match cayley_ball(&o, radius, cap) {
        Ok(b) => b,
        Err(OracleError::ResourceLimit { .. }) => {
            rep.finiteness = Finiteness::Inconclusive;
            return Ok(rep);
        }
        Err(e) => return Err(e.into()),
    };
    rep.ball_sizes = ball
        .sphere_sizes
        .iter()
        .scan(0, |total, s| {
            *total += s;
            Some(*total)
        })
        .collect();
    if ball.saturated {
        rep.finiteness = Finiteness::Finite { order: ball.len() };
        return Ok(rep);
    }
    if !ball.sphere_sizes.windows(2).all(|w| w[1] > w[0]) {
        rep.finiteness = Finiteness::Inconclusive;
        return Ok(rep);
    }
    rep.finiteness = Finiteness::GrowingTo { radius };
    let g = ball.graph();
    let d = Distances::new(&g);
    let inner: Vec<VertexId> = (0..ball.len() as VertexId).filter(|&v| ball.elements[v as usize].len() <= radius / 2).collect();
    rep.delta_hat = Some(delta_thin(&d, &inner, budget).value);
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriangleReport {
    pub p: i64,
    pub q: i64,
    pub r: i64,
    /// Whether `1/p + 1/q + 1/r < 1`.
    pub hyperbolic_side: bool,
    pub quotient: QuotientReport,
}

impl TriangleReport {
    /// Finite exactly when `1/p + 1/q + 1/r > 1`, growing with a finite `δ̂`
    /// when it is below one.
    pub fn matches_dichotomy(&self) -> bool {
        let spherical = self.q * self.r + self.p * self.r + self.p * self.q > self.p * self.q * self.r;
        match &self.quotient.finiteness {
            Finiteness::Finite { .. } => spherical,
            Finiteness::GrowingTo { .. } => self.hyperbolic_side && self.quotient.delta_hat.is_some(),
            _ => false,
        }
    }
}

/// Fills the thrice-punctured sphere group with `x^p, y^q, z^r`.
pub fn triangle_experiment(p: i64, q: i64, r: i64, radius: usize, cap: usize, budget: Budget) -> Result<TriangleReport, FillingError> {
    let fs = fill(&thrice_punctured_sphere(), &triangle_kernels(p, q, r), &Constants::theoretical(1), 1 << 20)?;
    let hyperbolic_side = q * r + p * r + p * q < p * q * r;
    Ok(TriangleReport { p, q, r, hyperbolic_side, quotient: quotient_growth(&fs, radius, cap, budget)? })
}

/// Hyperbolicity evidence for a surgered space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientDelta {
    pub delta_hat: Rational,
    /// Triangles examined by the thin-triangle estimator.
    pub triangles: usize,
    /// Largest `|Q(a,b) + Q(b,c) + Q(c,a)|₁ / perimeter` over sampled
    /// triangles, from the homological bicombing at parameter `⌈δ̂⌉`.
    pub area_ratio: Option<Rational>,
}

/// `δ̂` of the surgered space over vertices of Cayley radius at most
/// `inner_radius` and depth below the truncation, with filling-area ratios
/// on `area_samples` random triangles.
pub fn quotient_delta(ss: &SurgeredSpace, inner_radius: usize, budget: Budget, area_samples: usize) -> QuotientDelta {
    let d = Distances::new(&ss.ball.graph);
    let inner: Vec<VertexId> = ss.ball.inner(inner_radius).into_iter().filter(|&v| ss.ball.depth_of(v) < ss.ball.depth).collect();
    let e = delta_thin(&d, &inner, budget);
    let mut area_ratio = None;
    if area_samples > 0 && !inner.is_empty() {
        let m = Mineyev::new(&d, ceil_u32(&e.value).max(1)).expect("positive parameter");
        let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
        for _ in 0..area_samples {
            let t: Vec<VertexId> = (0..3).map(|_| inner[rng.gen_range(0..inner.len())]).collect();
            let perimeter = d.d(t[0], t[1]) + d.d(t[1], t[2]) + d.d(t[2], t[0]);
            if perimeter == 0 {
                continue;
            }
            let Ok(area) = m.triangle_area(t[0], t[1], t[2]) else { continue };
            let r = area / Rational::from_integer((perimeter as i64).into());
            if area_ratio.as_ref().is_none_or(|x| r > *x) {
                area_ratio = Some(r);
            }
        }
    }
    QuotientDelta { delta_hat: e.value, triangles: e.samples, area_ratio }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_slopes() {
        let fs = fill(&thrice_punctured_sphere(), &triangle_kernels(7, 7, 7), &Constants::theoretical(1), 100).unwrap();
        assert_eq!(fs.slopes, vec![SlopeLength::Finite(7); 3]);
        assert!(!fs.clears_threshold());
        assert_eq!(fs.threshold.theoretical, "12*2^3000");
    }

    #[test]
    fn trivial_kernels_give_infinite_slopes() {
        let rp = thrice_punctured_sphere();
        let ks: Vec<FillingKernel> = (1..=3).map(FillingKernel::trivial).collect();
        let fs = fill(&rp, &ks, &Constants::theoretical(1), 100).unwrap();
        assert!(fs.is_trivial());
        assert!(fs.clears_threshold());
        assert_eq!(fs.quotient, rp);
    }

    #[test]
    fn lattice_slope() {
        let rp = RelativePresentation::parse("generators a b\nparabolic 1 type Z^2 generators a b\n").unwrap();
        let k = FillingKernel { parabolic_id: 1, data: crate::presentation::KernelData::Lattice(vec![vec![4, 0], vec![0, 4]]) };
        let fs = fill(&rp, &[k], &Constants::explicit(1, 1, 1, 1), 100).unwrap();
        assert_eq!(fs.slopes, vec![SlopeLength::Finite(4)]);
    }

    #[test]
    fn lifted_distances() {
        assert_eq!(lifted_distance(&[5], &[0], &[4]), 1);
        assert_eq!(lifted_distance(&[8], &[1], &[6]), 3);
        assert_eq!(lifted_distance(&[4, 4], &[0, 0], &[2, 3]), 3);
        assert!(has_short_kernel(&[4], 4));
        assert!(!has_short_kernel(&[8], 4));
    }

    #[test]
    fn dihedral_quotient() {
        let rep = triangle_experiment(2, 2, 5, 12, 100_000, Budget::default()).unwrap();
        assert_eq!(rep.quotient.finiteness, Finiteness::Finite { order: 10 });
        assert!(rep.matches_dichotomy());
    }
}
