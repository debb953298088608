use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Undirected graph with positive edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    vertices: usize,
    edges: Vec<(usize, usize, f64)>,
}

/// Outcome of reconstructing a potential from edge differences.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    /// `values[i] - values[j]` reproduces every edge value; `values` sums to zero.
    Recovered(DVector<f64>),
    /// A cycle along which the oriented edge values do not sum to zero.
    CycleObstruction { cycle: Vec<usize>, sum: f64 },
}

/// Solution of `L a = e_s - e_t` normalised to mean zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxPrincipleSolution {
    pub potential: DVector<f64>,
    /// `a_s` minus the largest other entry.
    pub margin: f64,
    pub strict_max: bool,
}

impl WeightedGraph {
    pub fn new(vertices: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(a, b, w) in &edges {
            for v in [a, b] {
                if v >= vertices {
                    return Err(Error::IndexOutOfRange { index: v, q: vertices });
                }
            }
            if a == b {
                return Err(Error::RepeatedIndex);
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::NonPositiveWeight { weight: w });
            }
        }
        Ok(Self { vertices, edges })
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Weighted graph Laplacian `D - W`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let mut l = DMatrix::zeros(self.vertices, self.vertices);
        for &(a, b, w) in &self.edges {
            l[(a, a)] += w;
            l[(b, b)] += w;
            l[(a, b)] -= w;
            l[(b, a)] -= w;
        }
        l
    }

    fn adjacency(&self, removed: Option<usize>) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices];
        for &(a, b, _) in &self.edges {
            if Some(a) != removed && Some(b) != removed {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        adj
    }

    fn connected_without(&self, removed: Option<usize>) -> bool {
        let adj = self.adjacency(removed);
        let Some(start) = (0..self.vertices).find(|&v| Some(v) != removed) else {
            return true;
        };
        let mut seen = vec![false; self.vertices];
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        (0..self.vertices).all(|v| seen[v] || Some(v) == removed)
    }

    pub fn is_connected(&self) -> bool {
        self.connected_without(None)
    }

    /// First vertex whose removal disconnects the graph.
    pub fn cut_vertex(&self) -> Option<usize> {
        if self.vertices < 3 {
            return None;
        }
        (0..self.vertices).find(|&v| !self.connected_without(Some(v)))
    }

    /// Second-smallest Laplacian eigenvalue.
    pub fn algebraic_connectivity(&self) -> f64 {
        let mut ev: Vec<f64> = self.laplacian().symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev.get(1).copied().unwrap_or(0.0)
    }

    /// Positive definiteness of the Laplacian on zero-sum vectors.
    pub fn is_positive_definite_on_zero_sum(&self) -> bool {
        if self.vertices <= 1 {
            return true;
        }
        let scale = self.laplacian().amax().max(1.0);
        self.algebraic_connectivity() > 1e-10 * scale
    }

    /// Solves `L a = e_s - e_t` with `Σ a = 0`.
    pub fn max_principle_solve(&self, s: usize, t: usize) -> Result<MaxPrincipleSolution> {
        for v in [s, t] {
            if v >= self.vertices {
                return Err(Error::IndexOutOfRange { index: v, q: self.vertices });
            }
        }
        if s == t {
            return Err(Error::RepeatedIndex);
        }
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        if self.vertices > 2 && !self.connected_without(Some(s)) {
            return Err(Error::CutVertex { vertex: s });
        }
        let n = self.vertices;
        let m = self.laplacian() + DMatrix::from_element(n, n, 1.0 / n as f64);
        let mut rhs = DVector::zeros(n);
        rhs[s] = 1.0;
        rhs[t] = -1.0;
        let potential = m
            .cholesky()
            .ok_or(Error::Disconnected)?
            .solve(&rhs);
        let mean = potential.mean();
        let potential = potential.add_scalar(-mean);
        let others = (0..n)
            .filter(|&v| v != s)
            .map(|v| potential[v])
            .fold(f64::NEG_INFINITY, f64::max);
        let margin = potential[s] - others;
        Ok(MaxPrincipleSolution { potential, margin, strict_max: margin > 1e-12 })
    }

    /// Finds `a` with `a_i - a_j = A_ij` along every listed oriented edge, or a cycle
    /// where the values fail to close up.
    ///
    /// Every listed edge must be an edge of the graph, and the graph must be connected.
    pub fn recover_potential(&self, values: &[(usize, usize, f64)], tol: f64) -> Result<Potential> {
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        let n = self.vertices;
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(a, b, v) in values {
            if a >= n || b >= n {
                return Err(Error::IndexOutOfRange { index: a.max(b), q: n });
            }
            if !self.edges.iter().any(|&(x, y, _)| (x, y) == (a, b) || (x, y) == (b, a)) {
                return Err(Error::Invalid(format!("({a}, {b}) is not an edge")));
            }
            adj[a].push((b, v));
            adj[b].push((a, -v));
        }
        for &(a, b, _) in &self.edges {
            if !adj[a].iter().any(|&(u, _)| u == b) {
                return Err(Error::Invalid(format!("no value for edge ({a}, {b})")));
            }
        }
        let mut pot = vec![f64::NAN; n];
        let mut parent = vec![usize::MAX; n];
        let mut depth = vec![0usize; n];
        pot[0] = 0.0;
        let mut queue = VecDeque::from([0]);
        while let Some(v) = queue.pop_front() {
            for &(u, val) in &adj[v] {
                if pot[u].is_nan() {
                    // val = a_v - a_u
                    pot[u] = pot[v] - val;
                    parent[u] = v;
                    depth[u] = depth[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        for &(a, b, v) in values {
            let residual = v - (pot[a] - pot[b]);
            if residual.abs() > tol {
                return Ok(Potential::CycleObstruction {
                    cycle: tree_cycle(a, b, &parent, &depth),
                    sum: residual,
                });
            }
        }
        let pot = DVector::from_vec(pot);
        let mean = pot.mean();
        Ok(Potential::Recovered(pot.add_scalar(-mean)))
    }
}

/// Cycle `a → b → (tree path) → a`.
fn tree_cycle(a: usize, b: usize, parent: &[usize], depth: &[usize]) -> Vec<usize> {
    let (mut x, mut y) = (a, b);
    let mut from_a = vec![a];
    let mut from_b = vec![b];
    while x != y {
        if depth[x] >= depth[y] {
            x = parent[x];
            from_a.push(x);
        } else {
            y = parent[y];
            from_b.push(y);
        }
    }
    from_a.pop();
    let mut cycle = from_b;
    cycle.extend(from_a.into_iter().rev());
    cycle.insert(0, a);
    cycle.pop();
    cycle
}
