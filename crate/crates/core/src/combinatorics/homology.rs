use super::IncidenceComplex;

/// Coefficient field for homology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Field {
    #[default]
    Gf2,
    Rationals,
}

/// Rank of `H_1 = ker ∂₁ / im ∂₂` over the chosen field.
pub fn homology_h1(complex: &IncidenceComplex, field: Field) -> usize {
    let edges: Vec<(usize, usize)> = complex.edges.iter().copied().collect();
    let edge_index = |a: usize, b: usize| edges.binary_search(&(a, b)).expect("faces are closed");
    let mut d1 = vec![vec![0i128; edges.len()]; complex.q];
    for (e, &(a, b)) in edges.iter().enumerate() {
        d1[a][e] = -1;
        d1[b][e] = 1;
    }
    let mut d2 = vec![vec![0i128; complex.triangles.len()]; edges.len()];
    for (t, &(a, b, c)) in complex.triangles.iter().enumerate() {
        d2[edge_index(b, c)][t] = 1;
        d2[edge_index(a, c)][t] = -1;
        d2[edge_index(a, b)][t] = 1;
    }
    let rank = match field {
        Field::Gf2 => rank_gf2,
        Field::Rationals => rank_rational,
    };
    let kernel = edges.len() - rank(d1);
    kernel - rank(d2)
}

fn rank_gf2(m: Vec<Vec<i128>>) -> usize {
    let mut rows: Vec<Vec<bool>> = m
        .into_iter()
        .map(|r| r.into_iter().map(|x| x.rem_euclid(2) == 1).collect())
        .collect();
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col]) else {
            continue;
        };
        rows.swap(rank, pivot);
        for r in 0..rows.len() {
            if r != rank && rows[r][col] {
                for c in col..cols {
                    let v = rows[rank][c];
                    rows[r][c] ^= v;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Fraction-free (Bareiss) elimination over the integers, which gives the rank over Q.
fn rank_rational(mut rows: Vec<Vec<i128>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    let mut prev = 1i128;
    for col in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        for r in rank + 1..rows.len() {
            for c in col + 1..cols {
                rows[r][c] = (rows[rank][col] * rows[r][c] - rows[r][col] * rows[rank][c]) / prev;
            }
            rows[r][col] = 0;
        }
        prev = rows[rank][col];
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_has_one_hole() {
        let c = IncidenceComplex::cycle(4);
        assert_eq!(homology_h1(&c, Field::Gf2), 1);
        assert_eq!(homology_h1(&c, Field::Rationals), 1);
    }

    #[test]
    fn complete_complexes_are_acyclic() {
        for q in 1..=7 {
            let c = IncidenceComplex::complete(q);
            assert_eq!(homology_h1(&c, Field::Gf2), 0, "q = {q}");
            assert_eq!(homology_h1(&c, Field::Rationals), 0, "q = {q}");
        }
    }

    #[test]
    fn disjoint_filled_triangles() {
        let c = IncidenceComplex::new(6, [], [(0, 1, 2), (3, 4, 5)]);
        assert_eq!(homology_h1(&c, Field::Gf2), 0);
        assert_eq!(homology_h1(&c, Field::Rationals), 0);
        assert_eq!(c.components(), 2);
    }

    #[test]
    fn hollow_triangle_and_theta_graph() {
        assert_eq!(homology_h1(&IncidenceComplex::cycle(3), Field::Rationals), 1);
        // Two triangles sharing an edge, both hollow: two independent cycles.
        let theta = IncidenceComplex::new(4, [(0, 1), (1, 2), (0, 2), (1, 3), (2, 3)], []);
        assert_eq!(homology_h1(&theta, Field::Gf2), 2);
        assert_eq!(homology_h1(&theta, Field::Rationals), 2);
    }

    #[test]
    fn hollow_tetrahedron_surface_has_no_first_homology() {
        let c = IncidenceComplex::new(4, [], [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]);
        assert_eq!(homology_h1(&c, Field::Gf2), 0);
        assert_eq!(homology_h1(&c, Field::Rationals), 0);
    }
}
