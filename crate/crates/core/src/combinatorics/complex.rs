use std::collections::BTreeSet;

use serde::Serialize;

use crate::cluster::Cluster;
use crate::error::{Error, Result};

/// Two-dimensional simplicial complex of non-empty interfaces and triple sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IncidenceComplex {
    pub q: usize,
    pub edges: BTreeSet<(usize, usize)>,
    pub triangles: BTreeSet<(usize, usize, usize)>,
}

fn sorted_pair(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn sorted_triple(a: usize, b: usize, c: usize) -> (usize, usize, usize) {
    let mut t = [a, b, c];
    t.sort_unstable();
    (t[0], t[1], t[2])
}

impl IncidenceComplex {
    /// Builds a complex, adding the edges of every triangle.
    pub fn new(
        q: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        triangles: impl IntoIterator<Item = (usize, usize, usize)>,
    ) -> Self {
        let triangles: BTreeSet<_> = triangles
            .into_iter()
            .map(|(a, b, c)| sorted_triple(a, b, c))
            .collect();
        let mut edges: BTreeSet<_> = edges.into_iter().map(|(a, b)| sorted_pair(a, b)).collect();
        for &(a, b, c) in &triangles {
            edges.insert((a, b));
            edges.insert((a, c));
            edges.insert((b, c));
        }
        Self { q, edges, triangles }
    }

    /// All edges and all triangles on `q` vertices.
    pub fn complete(q: usize) -> Self {
        let mut tris = Vec::new();
        for a in 0..q {
            for b in a + 1..q {
                for c in b + 1..q {
                    tris.push((a, b, c));
                }
            }
        }
        let edges = (0..q).flat_map(|a| (a + 1..q).map(move |b| (a, b)));
        Self::new(q, edges, tris)
    }

    /// The bare cycle `0 − 1 − … − (q−1) − 0`.
    pub fn cycle(q: usize) -> Self {
        Self::new(q, (0..q).map(|i| (i, (i + 1) % q)), [])
    }

    /// Number of connected components of the 1-skeleton.
    pub fn components(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.q).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
        (0..self.q).filter(|&v| find(&mut parent, v) == v).count()
    }

    pub fn is_connected(&self) -> bool {
        self.components() == 1
    }

    /// Graphviz rendering of the 1-skeleton.
    pub fn to_dot(&self, name: &str) -> String {
        let mut s = format!("graph {name} {{\n");
        for v in 0..self.q {
            s.push_str(&format!("  {v};\n"));
        }
        for &(a, b) in &self.edges {
            s.push_str(&format!("  {a} -- {b};\n"));
        }
        s.push_str("}\n");
        s
    }
}

/// Incidence complex of a cluster from sampled non-emptiness tests.
pub fn extract_complex(cluster: &Cluster, samples: usize, seed: u64) -> Result<IncidenceComplex> {
    let q = cluster.q();
    let mut edges = Vec::new();
    let mut triangles = Vec::new();
    for i in 0..q {
        for j in i + 1..q {
            if cluster.interface_nonempty(i, j, samples, seed)?.nonempty {
                edges.push((i, j));
            }
            for k in j + 1..q {
                match cluster.triple_set_nonempty(i, j, k, samples, seed) {
                    Ok(d) if d.nonempty => triangles.push((i, j, k)),
                    Ok(_) | Err(Error::DegenerateIntersection { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(IncidenceComplex::new(q, edges, triangles))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangles_close_their_faces() {
        let c = IncidenceComplex::new(4, [], [(2, 0, 1)]);
        assert_eq!(c.edges.len(), 3);
        assert!(c.edges.contains(&(0, 2)));
        assert_eq!(c.components(), 2);
    }

    #[test]
    fn complete_complex_counts() {
        let c = IncidenceComplex::complete(5);
        assert_eq!(c.edges.len(), 10);
        assert_eq!(c.triangles.len(), 10);
        assert!(c.is_connected());
    }

    #[test]
    fn two_cells_give_one_edge() {
        let c = crate::construct::equal_volume_bubble(2, 2).unwrap();
        let k = extract_complex(&c, 4096, 1).unwrap();
        assert_eq!(k.edges.len(), 1);
        assert!(k.triangles.is_empty());
    }

    #[test]
    fn dot_lists_edges() {
        let dot = IncidenceComplex::cycle(3).to_dot("g");
        assert!(dot.contains("0 -- 1;") && dot.contains("0 -- 2;") && dot.contains("1 -- 2;"));
    }
}
