use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest vertex count accepted by [`enumerate_graphs`].
pub const MAX_ENUMERATION_VERTICES: usize = 8;

/// Graph on at most 16 vertices stored as adjacency bitmasks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SimpleGraph {
    adj: Vec<u16>,
}

/// Structural filters for enumerated graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphFilter {
    /// At least three vertices, connected, no cut vertex.
    TwoConnected,
    MinDegree3,
    /// Every edge lies in a triangle.
    TriangleCover,
}

impl SimpleGraph {
    pub fn empty(q: usize) -> Self {
        assert!(q <= 16, "at most 16 vertices");
        Self { adj: vec![0; q] }
    }

    pub fn from_edges(q: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Self::empty(q);
        for &(a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        assert!(a != b && a < self.q() && b < self.q());
        self.adj[a] |= 1 << b;
        self.adj[b] |= 1 << a;
    }

    pub fn q(&self) -> usize {
        self.adj.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a] >> b & 1 == 1
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones() as usize
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let q = self.q();
        (0..q)
            .flat_map(|a| (a + 1..q).map(move |b| (a, b)))
            .filter(|&(a, b)| self.has_edge(a, b))
            .collect()
    }

    fn connected_without(&self, removed: Option<usize>) -> bool {
        let q = self.q();
        let mask: u16 = (((1u32 << q) - 1) as u16) & !removed.map_or(0, |r| 1 << r);
        if mask == 0 {
            return true;
        }
        let mut seen: u16 = 1 << mask.trailing_zeros();
        loop {
            let mut next = seen;
            for v in 0..q {
                if seen >> v & 1 == 1 {
                    next |= self.adj[v] & mask;
                }
            }
            if next == seen {
                return seen == mask;
            }
            seen = next;
        }
    }

    pub fn is_connected(&self) -> bool {
        self.connected_without(None)
    }

    pub fn is_two_connected(&self) -> bool {
        self.q() >= 3 && self.is_connected() && (0..self.q()).all(|v| self.connected_without(Some(v)))
    }

    pub fn min_degree(&self) -> usize {
        (0..self.q()).map(|v| self.degree(v)).min().unwrap_or(0)
    }

    pub fn every_edge_in_triangle(&self) -> bool {
        self.edges().iter().all(|&(a, b)| self.adj[a] & self.adj[b] != 0)
    }

    pub fn passes(&self, filter: GraphFilter) -> bool {
        match filter {
            GraphFilter::TwoConnected => self.is_two_connected(),
            GraphFilter::MinDegree3 => self.min_degree() >= 3,
            GraphFilter::TriangleCover => self.every_edge_in_triangle(),
        }
    }

    /// Relabels so that vertex `v` becomes `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut g = Self::empty(self.q());
        for (a, b) in self.edges() {
            g.add_edge(perm[a], perm[b]);
        }
        g
    }

    /// Upper-triangle adjacency string read column by column, packed into an integer.
    pub fn code(&self) -> u128 {
        let q = self.q();
        let mut code = 0u128;
        for b in 1..q {
            for a in 0..b {
                code = code << 1 | u128::from(self.has_edge(a, b));
            }
        }
        code
    }

    /// Isomorphism-invariant representative: the minimum [`code`](Self::code) over the
    /// labellings that list refined vertex classes in order.
    pub fn canonical(&self) -> Self {
        let q = self.q();
        if q <= 1 {
            return self.clone();
        }
        let colors = self.refined_colors();
        let mut slots: Vec<u32> = colors.clone();
        slots.sort_unstable();
        let mut search = Search {
            graph: self,
            colors: &colors,
            slots: &slots,
            order: Vec::with_capacity(q),
            used: 0,
            best: None,
            total_bits: q * (q - 1) / 2,
        };
        search.run(0);
        let order = search.best.expect("at least one labelling").1;
        let mut perm = vec![0; q];
        for (pos, &v) in order.iter().enumerate() {
            perm[v] = pos;
        }
        self.permuted(&perm)
    }

    /// Colour refinement starting from a single class.
    fn refined_colors(&self) -> Vec<u32> {
        let q = self.q();
        let mut colors = vec![0u32; q];
        let mut classes = 1;
        loop {
            let sigs: Vec<(u32, Vec<u32>)> = (0..q)
                .map(|v| {
                    let mut nb: Vec<u32> = (0..q).filter(|&u| self.has_edge(v, u)).map(|u| colors[u]).collect();
                    nb.sort_unstable();
                    (colors[v], nb)
                })
                .collect();
            let mut distinct = sigs.clone();
            distinct.sort();
            distinct.dedup();
            colors = sigs
                .iter()
                .map(|s| distinct.binary_search(s).expect("present") as u32)
                .collect();
            if distinct.len() == classes {
                return colors;
            }
            classes = distinct.len();
        }
    }
}

struct Search<'a> {
    graph: &'a SimpleGraph,
    colors: &'a [u32],
    slots: &'a [u32],
    order: Vec<usize>,
    used: u16,
    best: Option<(u128, Vec<usize>)>,
    total_bits: usize,
}

impl Search<'_> {
    fn run(&mut self, prefix: u128) {
        let pos = self.order.len();
        let q = self.slots.len();
        if pos == q {
            if self.best.as_ref().is_none_or(|(b, _)| prefix < *b) {
                self.best = Some((prefix, self.order.clone()));
            }
            return;
        }
        for v in 0..q {
            if self.used >> v & 1 == 1 || self.colors[v] != self.slots[pos] {
                continue;
            }
            let mut code = prefix;
            for &u in &self.order {
                code = code << 1 | u128::from(self.graph.has_edge(u, v));
            }
            let bits = pos * (pos + 1) / 2;
            if let Some((best, _)) = &self.best {
                let best_prefix = best >> (self.total_bits - bits);
                if code > best_prefix {
                    continue;
                }
            }
            self.order.push(v);
            self.used |= 1 << v;
            self.run(code);
            self.used &= !(1 << v);
            self.order.pop();
        }
    }
}

/// All graphs on `q` vertices up to isomorphism that pass every filter, as canonical
/// representatives in increasing code order.
pub fn enumerate_graphs(q: usize, filters: &[GraphFilter]) -> Result<Vec<SimpleGraph>> {
    if q > MAX_ENUMERATION_VERTICES {
        return Err(Error::TooManyVertices { q });
    }
    let mut level: Vec<SimpleGraph> = vec![SimpleGraph::empty(q.min(1))];
    for size in 2..=q {
        let mut next = HashSet::new();
        for g in &level {
            for mask in 0u16..(1 << (size - 1)) {
                let mut adj = g.adj.clone();
                adj.push(mask);
                for (v, row) in adj.iter_mut().enumerate().take(size - 1) {
                    *row |= (mask >> v & 1) << (size - 1);
                }
                next.insert(SimpleGraph { adj }.canonical());
            }
        }
        level = next.into_iter().collect();
    }
    let mut out: Vec<SimpleGraph> = level
        .into_iter()
        .filter(|g| filters.iter().all(|&f| g.passes(f)))
        .collect();
    out.sort_by_key(SimpleGraph::code);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Canonical form by exhaustive search over every permutation.
    fn brute_canonical(g: &SimpleGraph) -> u128 {
        let q = g.q();
        let mut perm: Vec<usize> = (0..q).collect();
        let mut best = u128::MAX;
        permute(&mut perm, 0, &mut |p| best = best.min(g.permuted(p).code()));
        best
    }

    fn permute(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
        if k == p.len() {
            f(p);
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            permute(p, k + 1, f);
            p.swap(k, i);
        }
    }

    fn brute_count(q: usize, filter: Option<GraphFilter>) -> usize {
        let pairs: Vec<(usize, usize)> = (0..q).flat_map(|a| (a + 1..q).map(move |b| (a, b))).collect();
        let mut seen = HashSet::new();
        for mask in 0u32..(1 << pairs.len()) {
            let edges: Vec<_> = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
            let g = SimpleGraph::from_edges(q, &edges);
            if filter.is_none_or(|f| g.passes(f)) {
                seen.insert(brute_canonical(&g));
            }
        }
        seen.len()
    }

    #[test]
    fn counts_of_all_graphs() {
        let expected = [1, 1, 2, 4, 11, 34, 156, 1044, 12346];
        for q in 1..=8 {
            assert_eq!(enumerate_graphs(q, &[]).unwrap().len(), expected[q], "q = {q}");
        }
    }

    #[test]
    fn counts_agree_with_brute_force() {
        for q in 1..=5 {
            assert_eq!(enumerate_graphs(q, &[]).unwrap().len(), brute_count(q, None));
            for f in [GraphFilter::TwoConnected, GraphFilter::MinDegree3, GraphFilter::TriangleCover] {
                assert_eq!(enumerate_graphs(q, &[f]).unwrap().len(), brute_count(q, Some(f)), "q = {q} {f:?}");
            }
        }
    }

    #[test]
    fn canonical_form_is_relabelling_invariant() {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for g in enumerate_graphs(6, &[]).unwrap() {
            assert_eq!(g.canonical(), g);
            for _ in 0..5 {
                let mut perm: Vec<usize> = (0..6).collect();
                perm.shuffle(&mut rng);
                assert_eq!(g.permuted(&perm).canonical(), g);
            }
        }
    }

    #[test]
    fn small_filtered_families() {
        assert_eq!(enumerate_graphs(3, &[GraphFilter::TwoConnected]).unwrap().len(), 1);
        assert_eq!(enumerate_graphs(4, &[GraphFilter::TwoConnected]).unwrap().len(), 3);
        assert_eq!(enumerate_graphs(5, &[GraphFilter::TwoConnected]).unwrap().len(), 10);
        assert_eq!(enumerate_graphs(5, &[GraphFilter::MinDegree3]).unwrap().len(), 3);
    }

    #[test]
    fn too_many_vertices() {
        assert!(matches!(enumerate_graphs(9, &[]), Err(Error::TooManyVertices { q: 9 })));
    }

    #[test]
    fn four_cycle_is_two_connected_without_triangles() {
        let c4 = SimpleGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert!(c4.is_two_connected());
        assert!(!c4.every_edge_in_triangle());
        let star = SimpleGraph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]);
        assert!(star.is_connected() && !star.is_two_connected());
    }
}
