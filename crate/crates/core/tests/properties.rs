use bubbletk::cluster::Cluster;
use bubbletk::combinatorics::{homology_h1, ring_feasibility, Field, IncidenceComplex, RingVerdict, SimpleGraph, WeightedGraph};
use bubbletk::construct::{bubble_from_curvatures, transform};
use bubbletk::minkowski::{boost_closed_form, boost_generator, expm, is_lorentz, LorentzMatrix};
use bubbletk::projections::StereoChart;
use bubbletk::variation::{first_variation_volume, FieldSpec};
use nalgebra::DVector;
use proptest::prelude::*;

fn unit(dim: usize) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-1.0f64..1.0, dim)
        .prop_filter("non-degenerate direction", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-2)
        .prop_map(|v| DVector::from_vec(v).normalize())
}

fn zero_sum(q: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, q).prop_map(|v| {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        v.into_iter().map(|x| x - mean).collect()
    })
}

/// Standard bubble with `n = q - 1` and random curvatures.
fn standard_bubble() -> impl Strategy<Value = Cluster> {
    (2usize..=5).prop_flat_map(|q| zero_sum(q).prop_map(move |k| bubble_from_curvatures(q - 1, q, &k).unwrap()))
}

fn clear_winner(cluster: &Cluster, p: &DVector<f64>) -> bool {
    let mut f = cluster.functionals(p);
    f.sort_by(f64::total_cmp);
    f.len() < 2 || f[1] - f[0] > 1e-7
}

fn random_graph(max_q: usize) -> impl Strategy<Value = SimpleGraph> {
    (2usize..=max_q).prop_flat_map(|q| {
        prop::collection::vec(any::<bool>(), q * (q - 1) / 2).prop_map(move |bits| {
            let mut g = SimpleGraph::empty(q);
            let mut k = 0;
            for b in 1..q {
                for a in 0..b {
                    if bits[k] {
                        g.add_edge(a, b);
                    }
                    k += 1;
                }
            }
            g
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn boost_routes_agree(theta in unit(4), t in -2.0f64..2.0) {
        let pade = expm(&(boost_generator(&theta).unwrap() * t));
        let closed = boost_closed_form(&theta, t).unwrap();
        prop_assert!((&pade - &closed).amax() < 1e-10 * closed.amax());
        prop_assert!(is_lorentz(&closed, 1e-9).is_lorentz);
    }

    #[test]
    fn gram_is_mobius_invariant(cluster in standard_bubble(), theta in unit(6), t in -1.5f64..1.5) {
        let dim = cluster.n() + 1;
        let theta = theta.rows(0, dim).normalize();
        let image = transform(&cluster, &LorentzMatrix::boost(&theta, t).unwrap()).unwrap();
        prop_assert!(cluster.gram().deviation(image.gram().matrix()) < 1e-9);
        prop_assert!(image.is_standard_bubble(1e-9).is_standard);
    }

    #[test]
    fn cells_follow_the_conformal_map(cluster in standard_bubble(), theta in unit(6), t in -1.5f64..1.5, p in unit(6)) {
        let dim = cluster.n() + 1;
        let u = LorentzMatrix::boost(&theta.rows(0, dim).normalize(), t).unwrap();
        let p = p.rows(0, dim).normalize();
        prop_assume!(clear_winner(&cluster, &p));
        let image = transform(&cluster, &u).unwrap();
        let moved = u.act_on_sphere(&p);
        prop_assert!((moved.norm() - 1.0).abs() < 1e-12);
        prop_assert_eq!(image.argmin(&moved), cluster.argmin(&p));
    }

    #[test]
    fn stereographic_round_trip(pole in unit(4), p in unit(4)) {
        prop_assume!((&p - &pole).norm() > 1e-3);
        let chart = StereoChart::new(&pole).unwrap();
        let back = chart.to_sphere(&chart.to_plane(&p).unwrap());
        prop_assert!((back - p).amax() < 1e-11);
    }

    #[test]
    fn json_round_trip_is_exact(cluster in standard_bubble()) {
        let text = bubbletk::io::to_json(&cluster, Default::default());
        let (back, _) = bubbletk::io::from_json(&text).unwrap();
        prop_assert_eq!(back, cluster);
    }

    #[test]
    fn canonical_form_ignores_labels(g in random_graph(8), seed in any::<u64>()) {
        use rand::{seq::SliceRandom, SeedableRng};
        let mut perm: Vec<usize> = (0..g.q()).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(g.permuted(&perm).canonical(), g.canonical());
    }

    #[test]
    fn graph_homology_is_the_cycle_rank(g in random_graph(9)) {
        let complex = IncidenceComplex::new(g.q(), g.edges(), []);
        let expected = g.edges().len() + complex.components() - g.q();
        prop_assert_eq!(homology_h1(&complex, Field::Gf2), expected);
        prop_assert_eq!(homology_h1(&complex, Field::Rationals), expected);
    }

    #[test]
    fn clique_complexes_agree_over_both_fields(g in random_graph(8)) {
        let edges = g.edges();
        let mut triangles = Vec::new();
        for a in 0..g.q() {
            for b in a + 1..g.q() {
                for c in b + 1..g.q() {
                    if g.has_edge(a, b) && g.has_edge(a, c) && g.has_edge(b, c) {
                        triangles.push((a, b, c));
                    }
                }
            }
        }
        let complex = IncidenceComplex::new(g.q(), edges, triangles);
        prop_assert_eq!(homology_h1(&complex, Field::Gf2), homology_h1(&complex, Field::Rationals));
    }

    #[test]
    fn short_rings_are_infeasible(q in 4usize..=7, k in prop::collection::vec(0.01f64..50.0, 6)) {
        let report = ring_feasibility(q, &k[..q - 1], None).unwrap();
        prop_assert_eq!(report.verdict, RingVerdict::Infeasible);
        prop_assert!(report.angles.excess >= -1e-9);
    }

    #[test]
    fn maximum_principle_on_wheels(rim in 3usize..10, w in prop::collection::vec(0.05f64..10.0, 18), t_off in 1usize..10) {
        // Hub 0 joined to a cycle 1..=rim; every vertex is a non-cut vertex.
        let v = rim + 1;
        let mut edges = Vec::new();
        for i in 1..=rim {
            edges.push((0, i, w[i - 1]));
            edges.push((i, i % rim + 1, w[rim + i - 1]));
        }
        let graph = WeightedGraph::new(v, edges).unwrap();
        for s in 0..v {
            let t = (s + t_off % (v - 1) + 1) % v;
            let sol = graph.max_principle_solve(s, t).unwrap();
            prop_assert!(sol.strict_max);
            prop_assert!(sol.potential.sum().abs() < 1e-10);
            let lowest = sol.potential.iter().copied().fold(f64::INFINITY, f64::min);
            prop_assert!((sol.potential[t] - lowest).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn volume_variation_sums_to_zero(cluster in standard_bubble(), theta in unit(6)) {
        let theta = theta.rows(0, cluster.n() + 1).normalize();
        let dv = first_variation_volume(&cluster, &FieldSpec::Mobius { theta }, 8192, 3).unwrap();
        let total: f64 = dv.iter().map(|r| r.value).sum();
        let scale: f64 = dv.iter().map(|r| r.value.abs()).sum::<f64>().max(1.0);
        prop_assert!(total.abs() < 1e-12 * scale);
    }
}
