//! Compact undirected graphs with breadth-first distances.

use std::cell::RefCell;
use std::collections::{HashMap, VecDeque};
use std::rc::Rc;

pub type VertexId = u32;
pub const UNREACHED: u32 = u32::MAX;

/// Simple undirected graph in compressed adjacency form. Neighbour lists are
/// sorted, so iteration order follows vertex order.
#[derive(Clone, Debug, Default)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
}

impl Graph {
    /// Builds from an edge list; loops and duplicate edges are dropped.
    pub fn from_edges(n: usize, edges: &[(VertexId, VertexId)]) -> Self {
        let mut deg = vec![0usize; n + 1];
        for &(u, v) in edges {
            if u != v {
                deg[u as usize] += 1;
                deg[v as usize] += 1;
            }
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + deg[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0; offsets[n]];
        for &(u, v) in edges {
            if u != v {
                targets[fill[u as usize]] = v;
                fill[u as usize] += 1;
                targets[fill[v as usize]] = u;
                fill[v as usize] += 1;
            }
        }
        let mut out_off = vec![0usize; n + 1];
        let mut out = Vec::with_capacity(targets.len());
        for i in 0..n {
            let s = &mut targets[offsets[i]..offsets[i + 1]];
            s.sort_unstable();
            let mut last = None;
            for &t in s.iter() {
                if Some(t) != last {
                    out.push(t);
                    last = Some(t);
                }
            }
            out_off[i + 1] = out.len();
        }
        Graph { offsets: out_off, targets: out }
    }

    pub fn len(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.targets[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (0..self.len() as VertexId).flat_map(move |u| self.neighbors(u).iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn bfs(&self, src: VertexId) -> Vec<u32> {
        self.bfs_multi(&[src], u32::MAX)
    }

    /// Distances from a source set, exploring no further than `limit`.
    pub fn bfs_multi(&self, sources: &[VertexId], limit: u32) -> Vec<u32> {
        let mut dist = vec![UNREACHED; self.len()];
        let mut q = VecDeque::new();
        for &s in sources {
            if dist[s as usize] != 0 {
                dist[s as usize] = 0;
                q.push_back(s);
            }
        }
        while let Some(u) = q.pop_front() {
            let du = dist[u as usize];
            if du >= limit {
                continue;
            }
            for &w in self.neighbors(u) {
                if dist[w as usize] == UNREACHED {
                    dist[w as usize] = du + 1;
                    q.push_back(w);
                }
            }
        }
        dist
    }

    /// Induced subgraph on `keep`, with the map from new to old ids.
    pub fn induced(&self, keep: &[bool]) -> (Graph, Vec<VertexId>) {
        let mut new_id = vec![UNREACHED; self.len()];
        let mut old = Vec::new();
        for (v, &k) in keep.iter().enumerate() {
            if k {
                new_id[v] = old.len() as VertexId;
                old.push(v as VertexId);
            }
        }
        let edges: Vec<(VertexId, VertexId)> = self
            .edges()
            .filter(|&(u, v)| keep[u as usize] && keep[v as usize])
            .map(|(u, v)| (new_id[u as usize], new_id[v as usize]))
            .collect();
        (Graph::from_edges(old.len(), &edges), old)
    }

    pub fn is_connected(&self) -> bool {
        self.is_empty() || self.bfs(0).iter().all(|&d| d != UNREACHED)
    }
}

/// Bounded cache of single-source distance rows.
pub struct Distances<'g> {
    pub graph: &'g Graph,
    rows: RefCell<HashMap<VertexId, Rc<Vec<u32>>>>,
    cap: usize,
}

impl<'g> Distances<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        // Keep roughly 256 MiB of rows at most.
        let cap = ((64usize << 20) / graph.len().max(1)).clamp(16, 100_000);
        Distances { graph, rows: RefCell::new(HashMap::new()), cap }
    }

    pub fn with_capacity(graph: &'g Graph, cap: usize) -> Self {
        Distances { graph, rows: RefCell::new(HashMap::new()), cap: cap.max(1) }
    }

    pub fn row(&self, src: VertexId) -> Rc<Vec<u32>> {
        if let Some(r) = self.rows.borrow().get(&src) {
            return r.clone();
        }
        let r = Rc::new(self.graph.bfs(src));
        let mut rows = self.rows.borrow_mut();
        if rows.len() >= self.cap {
            rows.clear();
        }
        rows.insert(src, r.clone());
        r
    }

    pub fn d(&self, a: VertexId, b: VertexId) -> u32 {
        if a == b {
            return 0;
        }
        if let Some(r) = self.rows.borrow().get(&a) {
            return r[b as usize];
        }
        if let Some(r) = self.rows.borrow().get(&b) {
            return r[a as usize];
        }
        self.row(a)[b as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dedups_and_sorts() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 0), (2, 1), (1, 1)]);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert_eq!(g.bfs(0), vec![0, 1, 2]);
    }

    #[test]
    fn induced_keeps_ids_in_order() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        let (h, old) = g.induced(&[true, false, true, true]);
        assert_eq!(old, vec![0, 2, 3]);
        assert_eq!(h.edge_count(), 1);
        assert!(h.has_edge(1, 2));
    }
}
