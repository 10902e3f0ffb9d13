//! Truncated cusped spaces and coned-off Cayley graphs.
//!
//! A cusped ball is the Cayley ball of radius `R` with a combinatorial
//! horoball of depth `T` glued along the part of every peripheral coset that
//! meets the ball. The base metric of each horoball is the word metric of the
//! parabolic subgroup, so the truncation agrees with the full space wherever
//! the full space does not leave the ball.

use std::collections::HashMap;
use std::fmt;

use crate::graph::{Graph, VertexId};
use crate::horoball::{width, BaseGraph, HoroVertex};
use crate::oracle::{cayley_ball, CayleyBall, GroupOracle, OracleError};
use crate::parabolic::{PElem, Peripheral};
use crate::presentation::RelativePresentation;
use crate::word::Word;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CuspedError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("a path left the inner ball of radius {inner}")]
    TruncationUnsound { inner: usize },
}

/// Horoball identifier: parabolic index and coset transversal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HoroballId {
    pub parabolic: usize,
    pub transversal: Word,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CuspedVertex {
    Cayley(Word),
    /// Vertex `(i, t, p, k)` with `k ≥ 1`; depth zero is the Cayley vertex `t·p`.
    Horo { parabolic: usize, transversal: Word, element: Word, depth: u32 },
}

impl CuspedVertex {
    pub fn depth(&self) -> u32 {
        match self {
            CuspedVertex::Cayley(_) => 0,
            CuspedVertex::Horo { depth, .. } => *depth,
        }
    }
}

/// One peripheral coset meeting the ball.
#[derive(Clone, Debug)]
pub struct Coset {
    pub id: HoroballId,
    /// Members `t·p` inside the ball, as parabolic elements `p` in word order.
    pub elements: Vec<PElem>,
    /// Cayley vertex of each member.
    pub cayley: Vec<VertexId>,
    /// Parabolic word metric between members.
    pub base: BaseGraph,
}

/// Least element of `gP` and the members of `gP` in the ball, found by
/// enumerating the parabolic ball of radius `2R` (all of `P` when finite).
fn coset_members(o: &GroupOracle, per: &Peripheral, g: &Word, ball: &CayleyBall, reach: u64) -> (Word, Vec<(PElem, VertexId)>) {
    let ps = per.ball(reach);
    let mut found: Vec<(Word, PElem)> = ps.into_iter().map(|p| (o.reduce_partial(&g.concat(&per.word(&p))), p)).collect();
    found.sort_by(|a, b| a.0.cmp(&b.0));
    let (t, p0) = found[0].clone();
    let p0_inv = per.inverse(&p0);
    let mut members: Vec<(Word, PElem, VertexId)> = found
        .into_iter()
        .filter_map(|(w, p)| ball.get(&w).map(|id| (w, per.multiply(&p0_inv, &p), id)))
        .collect();
    members.sort_by(|a, b| per.word(&a.1).cmp(&per.word(&b.1)));
    members.dedup_by(|a, b| a.2 == b.2);
    (t, members.into_iter().map(|(_, p, id)| (p, id)).collect())
}

fn find_cosets(o: &GroupOracle, rp: &RelativePresentation, ball: &CayleyBall) -> Vec<Coset> {
    let mut cosets = Vec::new();
    let reach = 2 * ball.radius as u64;
    for (i, spec) in rp.parabolics.iter().enumerate() {
        let per = Peripheral::new(spec);
        let reach = if per.is_finite() { u64::MAX } else { reach };
        let mut seen = vec![false; ball.len()];
        let mut found = Vec::new();
        for (gi, g) in ball.elements.iter().enumerate() {
            if seen[gi] {
                continue;
            }
            let (t, members) = coset_members(o, &per, g, ball, reach);
            for (_, id) in &members {
                seen[*id as usize] = true;
            }
            let elements: Vec<PElem> = members.iter().map(|m| m.0.clone()).collect();
            let base = BaseGraph::with_metric(elements.len(), |a, b| per.distance(&elements[a], &elements[b]) as u32);
            found.push(Coset {
                id: HoroballId { parabolic: i, transversal: t },
                cayley: members.iter().map(|m| m.1).collect(),
                elements,
                base,
            });
        }
        found.sort_by(|a, b| a.id.cmp(&b.id));
        cosets.extend(found);
    }
    cosets
}

/// Truncated cusped space about the identity.
#[derive(Clone, Debug)]
pub struct CuspedBall {
    pub radius: usize,
    pub depth: u32,
    pub cayley: CayleyBall,
    pub cosets: Vec<Coset>,
    pub graph: Graph,
    pub labels: Vec<CuspedVertex>,
    pub depths: Vec<u32>,
    /// Coset of each vertex of depth at least one.
    pub coset_of: Vec<Option<u32>>,
    /// Ball index of the Cayley element `t·p` underlying each vertex.
    pub anchor: Vec<VertexId>,
    /// Cayley vertex ids by ball index.
    cayley_ids: Vec<VertexId>,
    /// Horoball vertex ids by coset, member and depth minus one.
    horo_ids: Vec<Vec<VertexId>>,
    peripherals: Vec<Peripheral>,
    names: Vec<String>,
}

impl CuspedBall {
    pub fn build(o: &GroupOracle, rp: &RelativePresentation, radius: usize, depth: u32, cap: usize) -> Result<Self, CuspedError> {
        let cayley = cayley_ball(o, radius, cap)?;
        let cosets = find_cosets(o, rp, &cayley);
        let t = depth as usize;
        let horo_count: usize = cosets.iter().map(|c| c.elements.len() * t).sum();
        if cayley.len() + horo_count > cap {
            return Err(OracleError::ResourceLimit { cap }.into());
        }
        let peripherals: Vec<Peripheral> = rp.parabolics.iter().map(Peripheral::new).collect();
        // Sort key: underlying element, parabolic index plus one, depth.
        let mut keys: Vec<(VertexId, usize, u32, usize, usize)> = (0..cayley.len()).map(|g| (g as VertexId, 0, 0, 0, 0)).collect();
        for (ci, c) in cosets.iter().enumerate() {
            for (m, &g) in c.cayley.iter().enumerate() {
                for k in 1..=depth {
                    keys.push((g, c.id.parabolic + 1, k, ci, m));
                }
            }
        }
        keys.sort_unstable();
        let n = keys.len();
        let mut cayley_ids = vec![0; cayley.len()];
        let mut horo_ids: Vec<Vec<VertexId>> = cosets.iter().map(|c| vec![0; c.elements.len() * t]).collect();
        let mut labels = Vec::with_capacity(n);
        let mut depths = Vec::with_capacity(n);
        let mut coset_of = Vec::with_capacity(n);
        let mut anchor = Vec::with_capacity(n);
        for (id, &(g, p1, k, ci, m)) in keys.iter().enumerate() {
            let id = id as VertexId;
            anchor.push(g);
            depths.push(k);
            if p1 == 0 {
                cayley_ids[g as usize] = id;
                labels.push(CuspedVertex::Cayley(cayley.elements[g as usize].clone()));
                coset_of.push(None);
            } else {
                let c = &cosets[ci];
                horo_ids[ci][m * t + k as usize - 1] = id;
                labels.push(CuspedVertex::Horo {
                    parabolic: c.id.parabolic,
                    transversal: c.id.transversal.clone(),
                    element: peripherals[c.id.parabolic].word(&c.elements[m]),
                    depth: k,
                });
                coset_of.push(Some(ci as u32));
            }
        }
        let mut edges: Vec<(VertexId, VertexId)> =
            cayley.edges.iter().map(|&(u, v, _)| (cayley_ids[u as usize], cayley_ids[v as usize])).collect();
        for (ci, c) in cosets.iter().enumerate() {
            let s = c.elements.len();
            let id = |m: usize, k: u32| if k == 0 { cayley_ids[c.cayley[m] as usize] } else { horo_ids[ci][m * t + k as usize - 1] };
            for k in 0..depth {
                for m in 0..s {
                    edges.push((id(m, k), id(m, k + 1)));
                }
            }
            for a in 0..s {
                for b in a + 1..s {
                    let d = c.base.d(a as u32, b as u32) as u64;
                    let first = (1..=depth).find(|&k| d <= width(k));
                    if let Some(k0) = first {
                        for k in k0..=depth {
                            edges.push((id(a, k), id(b, k)));
                        }
                    }
                }
            }
        }
        let graph = Graph::from_edges(n, &edges);
        Ok(CuspedBall {
            radius,
            depth,
            cayley,
            cosets,
            graph,
            labels,
            depths,
            coset_of,
            anchor,
            cayley_ids,
            horo_ids,
            peripherals,
            names: rp.generators.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn depth_of(&self, v: VertexId) -> u32 {
        self.depths[v as usize]
    }

    pub fn cayley_vertex(&self, w: &Word) -> Option<VertexId> {
        self.cayley.get(w).map(|g| self.cayley_ids[g as usize])
    }

    /// Vertex `(member, k)` of a coset's horoball; depth zero is the Cayley vertex.
    pub fn horo_vertex(&self, coset: usize, member: usize, k: u32) -> VertexId {
        if k == 0 {
            self.cayley_ids[self.cosets[coset].cayley[member] as usize]
        } else {
            self.horo_ids[coset][member * self.depth as usize + k as usize - 1]
        }
    }

    pub fn vertex(&self, label: &CuspedVertex) -> Option<VertexId> {
        match label {
            CuspedVertex::Cayley(w) => self.cayley_vertex(w),
            CuspedVertex::Horo { parabolic, transversal, element, depth } => {
                let ci = self.coset_index(&HoroballId { parabolic: *parabolic, transversal: transversal.clone() })?;
                let per = &self.peripherals[*parabolic];
                let p = per.element(element);
                let m = self.cosets[ci].elements.iter().position(|e| *e == p)?;
                (*depth <= self.depth).then(|| self.horo_vertex(ci, m, *depth))
            }
        }
    }

    pub fn coset_index(&self, id: &HoroballId) -> Option<usize> {
        self.cosets.binary_search_by(|c| c.id.cmp(id)).ok()
    }

    /// Member index of `v` in the given coset's horoball, with its depth.
    pub fn in_horoball(&self, coset: usize, v: VertexId) -> Option<HoroVertex> {
        let c = &self.cosets[coset];
        match self.coset_of[v as usize] {
            Some(ci) if ci as usize == coset => {}
            Some(_) => return None,
            None => {}
        }
        let m = c.cayley.iter().position(|&g| g == self.anchor[v as usize])?;
        Some(HoroVertex::new(m as u32, self.depths[v as usize]))
    }

    /// Cosets through a Cayley vertex, one per parabolic.
    pub fn zero_horoballs(&self, v: VertexId) -> Vec<usize> {
        if self.depths[v as usize] > 0 {
            return vec![self.coset_of[v as usize].unwrap() as usize];
        }
        let g = self.anchor[v as usize];
        (0..self.cosets.len()).filter(|&ci| self.cosets[ci].cayley.contains(&g)).collect()
    }

    /// The `L`-horoball containing `v`. At `L = 0` a Cayley vertex lies in
    /// one such set per parabolic; the first is returned.
    pub fn l_horoball(&self, v: VertexId, l: u32) -> Option<usize> {
        if self.depths[v as usize] < l {
            return None;
        }
        self.zero_horoballs(v).first().copied()
    }

    /// Vertices of a coset's horoball at depth at least `l`.
    pub fn horoball_vertices(&self, coset: usize, l: u32) -> Vec<VertexId> {
        let s = self.cosets[coset].elements.len();
        let mut out = Vec::new();
        for m in 0..s {
            for k in l..=self.depth {
                out.push(self.horo_vertex(coset, m, k));
            }
        }
        out.sort_unstable();
        out
    }

    /// Vertices over Cayley elements of length at most `radius`.
    pub fn inner(&self, radius: usize) -> Vec<VertexId> {
        (0..self.len() as VertexId).filter(|&v| self.cayley.elements[self.anchor[v as usize] as usize].len() <= radius).collect()
    }

    pub fn is_inner(&self, v: VertexId, radius: usize) -> bool {
        self.cayley.elements[self.anchor[v as usize] as usize].len() <= radius
    }

    /// Image of `v` under left multiplication by `g`, when it lies in the ball.
    pub fn translate(&self, o: &GroupOracle, g: &Word, v: VertexId) -> Option<VertexId> {
        let e = o.multiply(g, &self.cayley.elements[self.anchor[v as usize] as usize]).ok()?;
        let cv = self.cayley_vertex(&e)?;
        let k = self.depths[v as usize];
        if k == 0 {
            return Some(cv);
        }
        let parabolic = self.cosets[self.coset_of[v as usize]? as usize].id.parabolic;
        let ci = self.zero_horoballs(cv).into_iter().find(|&c| self.cosets[c].id.parabolic == parabolic)?;
        let m = self.cosets[ci].cayley.iter().position(|&x| x == self.anchor[cv as usize])?;
        Some(self.horo_vertex(ci, m, k))
    }

    /// Image of a coset under left multiplication by `g`, when it meets the ball.
    pub fn translate_coset(&self, o: &GroupOracle, g: &Word, coset: usize) -> Option<usize> {
        let c = &self.cosets[coset];
        let e = o.multiply(g, &self.cayley.elements[c.cayley[0] as usize]).ok()?;
        let cv = self.cayley_vertex(&e)?;
        self.zero_horoballs(cv).into_iter().find(|&x| self.cosets[x].id.parabolic == c.id.parabolic)
    }

    pub fn peripheral(&self, parabolic: usize) -> &Peripheral {
        &self.peripherals[parabolic]
    }

    pub fn label(&self, v: VertexId) -> String {
        match &self.labels[v as usize] {
            CuspedVertex::Cayley(w) => w.display(&self.names).to_string(),
            CuspedVertex::Horo { parabolic, transversal, element, depth } => format!(
                "({},{},{},{})",
                parabolic + 1,
                transversal.display(&self.names),
                element.display(&self.names),
                depth
            ),
        }
    }

    /// Edge list with vertex labels, one edge per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("cusped radius {} depth {} vertices {}\n", self.radius, self.depth, self.len());
        for (u, v) in self.graph.edges() {
            out += &format!("{} {}\n", self.label(u), self.label(v));
        }
        out
    }
}

impl fmt::Display for HoroballId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}:{:?}", self.parabolic + 1, self.transversal.0)
    }
}

/// Cayley graph with a cone vertex over every peripheral coset.
#[derive(Clone, Debug)]
pub struct ConedOffGraph {
    /// Cayley elements first, then cone vertices.
    pub elements: Vec<Word>,
    pub cones: Vec<(usize, Vec<VertexId>)>,
    pub graph: Graph,
}

impl ConedOffGraph {
    pub fn build(o: &GroupOracle, rp: &RelativePresentation, radius: usize, cap: usize) -> Result<Self, CuspedError> {
        let ball = cayley_ball(o, radius, cap)?;
        let cosets = find_cosets(o, rp, &ball);
        let cones = cosets.iter().map(|c| (c.id.parabolic, c.cayley.clone())).collect();
        let edges: Vec<(VertexId, VertexId)> = ball.edges.iter().map(|&(u, v, _)| (u, v)).collect();
        Ok(Self::assemble(ball.elements, edges, cones))
    }

    /// Coned-off graph on an explicit finite set of normal forms. Cosets are
    /// identified through parabolic generator edges inside the set.
    pub fn build_on(o: &GroupOracle, rp: &RelativePresentation, set: &[Word]) -> Result<Self, CuspedError> {
        let mut elements: Vec<Word> = set.iter().map(|w| o.normal_form(w)).collect::<Result<_, _>>()?;
        elements.sort();
        elements.dedup();
        let index: HashMap<&Word, VertexId> = elements.iter().enumerate().map(|(i, w)| (w, i as VertexId)).collect();
        let mut edges = Vec::new();
        let mut labeled = Vec::new();
        for (i, g) in elements.iter().enumerate() {
            for s in 0..rp.ngens() {
                let h = o.reduce_partial(&g.concat(&Word::letter(s as i32 + 1)));
                if let Some(&j) = index.get(&h) {
                    edges.push((i as VertexId, j));
                    labeled.push((i as VertexId, j, s));
                }
            }
        }
        let mut cones = Vec::new();
        for (pi, spec) in rp.parabolics.iter().enumerate() {
            let mut parent: Vec<usize> = (0..elements.len()).collect();
            fn find(p: &mut [usize], x: usize) -> usize {
                let mut r = x;
                while p[r] != r {
                    r = p[r];
                }
                p[x] = r;
                r
            }
            for &(u, v, s) in &labeled {
                if spec.generators.contains(&s) {
                    let (a, b) = (find(&mut parent, u as usize), find(&mut parent, v as usize));
                    parent[a.max(b)] = a.min(b);
                }
            }
            let mut groups: HashMap<usize, Vec<VertexId>> = HashMap::new();
            for v in 0..elements.len() {
                let r = find(&mut parent, v);
                groups.entry(r).or_default().push(v as VertexId);
            }
            let mut gs: Vec<Vec<VertexId>> = groups.into_values().collect();
            gs.sort();
            cones.extend(gs.into_iter().map(|g| (pi, g)));
        }
        Ok(Self::assemble(elements, edges, cones))
    }

    fn assemble(elements: Vec<Word>, mut edges: Vec<(VertexId, VertexId)>, cones: Vec<(usize, Vec<VertexId>)>) -> Self {
        let n = elements.len();
        for (ci, (_, members)) in cones.iter().enumerate() {
            for &m in members {
                edges.push((m, (n + ci) as VertexId));
            }
        }
        let graph = Graph::from_edges(n + cones.len(), &edges);
        ConedOffGraph { elements, cones, graph }
    }

    pub fn vertex(&self, w: &Word) -> Option<VertexId> {
        self.elements.binary_search(w).ok().map(|i| i as VertexId)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::UNREACHED;

    fn f2_rel(pars: &str) -> RelativePresentation {
        RelativePresentation::parse(&format!("generators a b\n{pars}")).unwrap()
    }

    #[test]
    fn zero_depth_is_the_cayley_ball() {
        let rp = f2_rel("parabolic 1 type Z generators a\nparabolic 2 type Z generators b\n");
        let o = GroupOracle::for_presentation(&rp);
        let b = CuspedBall::build(&o, &rp, 2, 0, 100_000).unwrap();
        assert_eq!(b.len(), 17);
        assert_eq!(b.graph.edge_count(), 16);
    }

    #[test]
    fn free_group_cosets() {
        let rp = f2_rel("parabolic 1 type Z generators a\nparabolic 2 type Z generators b\n");
        let o = GroupOracle::for_presentation(&rp);
        let b = CuspedBall::build(&o, &rp, 2, 1, 100_000).unwrap();
        // Cosets of <a> meeting the ball: 1, b, B, ba, bA... one per element
        // not ending in a or A.
        let a_cosets = b.cosets.iter().filter(|c| c.id.parabolic == 0).count();
        let expected = b.cayley.elements.iter().filter(|w| w.letters().last().map_or(true, |l| l.abs() != 1)).count();
        assert_eq!(a_cosets, expected);
        let one = &b.cosets[b.coset_index(&HoroballId { parabolic: 0, transversal: Word::identity() }).unwrap()];
        assert_eq!(one.elements.len(), 5);
        assert_eq!(b.len(), 17 + 2 * 17);
    }

    #[test]
    fn depth_and_horoball_queries() {
        let rp = f2_rel("parabolic 1 type Z generators a\n");
        let o = GroupOracle::for_presentation(&rp);
        let b = CuspedBall::build(&o, &rp, 2, 7, 100_000).unwrap();
        let id = HoroballId { parabolic: 0, transversal: Word::identity() };
        let v = b
            .vertex(&CuspedVertex::Horo { parabolic: 0, transversal: Word::identity(), element: Word::power(0, 2), depth: 7 })
            .unwrap();
        assert_eq!(b.depth_of(v), 7);
        assert_eq!(b.l_horoball(v, 3), b.coset_index(&id));
        let one = b.cayley_vertex(&Word::identity()).unwrap();
        assert_eq!(b.depth_of(one), 0);
        assert_eq!(b.l_horoball(one, 1), None);
        assert_eq!(b.l_horoball(one, 0), b.coset_index(&id));
    }

    #[test]
    fn coned_off_small() {
        let rp = f2_rel("parabolic 1 type Z generators a\n");
        let o = GroupOracle::for_presentation(&rp);
        let c = ConedOffGraph::build(&o, &rp, 1, 1000).unwrap();
        let sizes: Vec<usize> = c.cones.iter().map(|(_, m)| m.len()).collect();
        assert_eq!(sizes, vec![3, 1, 1]);
        let a_pow = |k: i64| Word::power(0, k);
        let mut set: Vec<Word> = (-1000..=1000).map(a_pow).collect();
        set.push(rp.parse_word("b").unwrap());
        let c = ConedOffGraph::build_on(&o, &rp, &set).unwrap();
        let d = c.graph.bfs(c.vertex(&Word::identity()).unwrap());
        assert_eq!(d[c.vertex(&a_pow(1000)).unwrap() as usize], 2);
        assert_ne!(d[c.vertex(&rp.parse_word("b").unwrap()).unwrap() as usize], UNREACHED);
    }
}
