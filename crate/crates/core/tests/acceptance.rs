//! End-to-end acceptance checks. Each test writes one PASS/FAIL line to stderr.

use std::io::Write;
use std::time::Instant;

use bubbletk::cluster::{default_detection_samples, Cluster, ConeKind, Membership};
use bubbletk::combinatorics::{
    enumerate_graphs, extract_complex, homology_h1, ring_angle_bound, ring_feasibility, Field, GraphFilter,
    IncidenceComplex, RingGeometry, RingVerdict, WeightedGraph,
};
use bubbletk::construct::{bubble_from_curvatures, bubble_from_volumes, equal_volume_bubble, transform, VolumeSolverOptions};
use bubbletk::fixtures::regular_ring;
use bubbletk::linalg::null_space;
use bubbletk::measure::{cell_volumes, perimeter, surface_moment, Surface, SurfaceTensor};
use bubbletk::minkowski::LorentzMatrix;
use bubbletk::projections::to_euclidean;
use bubbletk::sampling::{gaussian_vector, on_sphere};
use bubbletk::variation::{
    first_variation_area, index_form_q0, jacobi_flow_check, perimeter_flow_derivative, FieldSpec, IndexFormMode,
    SkewField, MC_STEP,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: usize, name: &str, pass: bool, detail: String, start: Instant) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!(
        "acceptance {id:>2} {verdict} {name}: {detail} [{:.2}s]\n",
        start.elapsed().as_secs_f64()
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_curvatures(r: &mut ChaCha8Rng, q: usize, scale: f64) -> Vec<f64> {
    let g = gaussian_vector(r, q) * scale;
    let mean = g.mean();
    g.iter().map(|x| x - mean).collect()
}

fn random_rotation(r: &mut ChaCha8Rng, dim: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| r.sample::<f64, _>(rand_distr::StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let rr = qr.r();
    for c in 0..dim {
        if rr[(c, c)] < 0.0 {
            q.column_mut(c).neg_mut();
        }
    }
    q
}

fn random_mobius(r: &mut ChaCha8Rng, dim: usize) -> LorentzMatrix {
    let rot = LorentzMatrix::from_rotation(&random_rotation(r, dim)).unwrap();
    let theta = on_sphere(r, dim);
    let t = r.random_range(-1.2..1.2);
    LorentzMatrix::boost(&theta, t).unwrap().compose(&rot)
}

/// `max |P G P − ½P|` with `G` the Minkowski products of the homogeneous parameters.
fn gram_deviation(cluster: &Cluster) -> f64 {
    let ck = cluster.homogeneous();
    let q = ck.len();
    let last = ck[0].len() - 1;
    let g = DMatrix::from_fn(q, q, |a, b| {
        let mut s = 0.0;
        for r in 0..last {
            s += ck[a][r] * ck[b][r];
        }
        s - ck[a][last] * ck[b][last]
    });
    let p = DMatrix::identity(q, q) - DMatrix::from_element(q, q, 1.0 / q as f64);
    let d = &p * g * &p - &p * 0.5;
    d.amax()
}

#[test]
fn criterion_01_gram_characterization() {
    let start = Instant::now();
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    let mut flagged = true;
    let mut count = 0;
    for q in 2..=5 {
        let n = q - 1;
        let mut clusters = vec![equal_volume_bubble(n, q).unwrap()];
        for _ in 0..50 {
            let k = random_curvatures(&mut r, q, 0.8);
            clusters.push(bubble_from_curvatures(n, q, &k).unwrap());
        }
        for c in &clusters {
            worst = worst.max(gram_deviation(c));
            flagged &= c.is_standard_bubble(1e-10).is_standard;
            count += 1;
        }
    }
    let pass = worst < 1e-10 && flagged && start.elapsed().as_secs_f64() < 1.0;
    report(1, "Gram characterization", pass, format!("{count} bubbles, max deviation {worst:.2e}"), start);
    assert!(pass);
}

#[test]
fn criterion_02_mobius_invariance() {
    let start = Instant::now();
    let mut r = rng(2);
    let seed = 0x02;
    let bases = [
        bubble_from_curvatures(2, 3, &[0.5, -0.2, -0.3]).unwrap(),
        bubble_from_curvatures(3, 4, &[0.4, 0.1, -0.2, -0.3]).unwrap(),
    ];
    let complexes: Vec<IncidenceComplex> = bases
        .iter()
        .map(|c| extract_complex(c, default_detection_samples(c.n()), seed).unwrap())
        .collect();
    let mut worst: f64 = 0.0;
    let mut mismatches = 0;
    for trial in 0..100 {
        let b = trial % 2;
        let base = &bases[b];
        let u = random_mobius(&mut r, base.n() + 1);
        let image = transform(base, &u).unwrap();
        worst = worst.max(base.gram().deviation(image.gram().matrix()));
        let complex = extract_complex(&image, default_detection_samples(image.n()), seed).unwrap();
        if complex != complexes[b] {
            mismatches += 1;
        }
    }
    let pass = worst < 1e-9 && mismatches == 0 && start.elapsed().as_secs_f64() < 30.0;
    report(
        2,
        "Mobius invariance",
        pass,
        format!("100 transforms, max Gram change {worst:.2e}, complex mismatches {mismatches}"),
        start,
    );
    assert!(pass);
}

#[test]
fn criterion_03_equal_volume_double_bubble() {
    let start = Instant::now();
    let cluster = equal_volume_bubble(2, 3).unwrap();
    let per = perimeter(&cluster, 200_000, 3).unwrap().total;
    let vols = cell_volumes(&cluster, 1_000_000, 3);
    let per_ok = per.within(0.75, 3.0, 0.0);
    let vol_ok = vols.iter().all(|v| v.within(1.0 / 3.0, 3.0, 0.0));
    let pass = per_ok && vol_ok && start.elapsed().as_secs_f64() < 5.0;
    let vs: Vec<String> = vols.iter().map(|v| format!("{:.4}", v.value)).collect();
    report(
        3,
        "equal-volume double bubble",
        pass,
        format!("perimeter {:.5} ± {:.1e}, volumes [{}]", per.value, per.std_error, vs.join(", ")),
        start,
    );
    assert!(pass);
}

#[test]
fn criterion_04_volume_solver() {
    let start = Instant::now();
    let opts = VolumeSolverOptions::default();
    let mut pass = true;
    let mut detail = Vec::new();
    for (n, target) in [(2usize, vec![0.5, 0.3, 0.2]), (3, vec![0.4, 0.3, 0.2, 0.1])] {
        let sol = bubble_from_volumes(n, target.len(), &target, &opts).unwrap();
        let check = cell_volumes(&sol.cluster, 1_000_000, opts.seed ^ 0xdead_beef);
        let matched = check.iter().zip(&target).all(|(m, &v)| m.within(v, 3.0, 1e-3));
        pass &= sol.converged && sol.iterations <= 15 && matched;
        let ms: Vec<String> = check.iter().map(|m| format!("{:.4}", m.value)).collect();
        detail.push(format!("S^{n}: {} steps, remeasured [{}]", sol.iterations, ms.join(", ")));
    }
    pass &= start.elapsed().as_secs_f64() < 120.0;
    report(4, "volume solver", pass, detail.join("; "), start);
    assert!(pass);
}

#[test]
fn criterion_05_lagrange_identity() {
    let start = Instant::now();
    let mut r = rng(5);
    let samples = 200_000;
    let mut worst_ratio: f64 = 0.0;
    let mut pass = true;
    for trial in 0..10 {
        let (n, q) = if trial % 2 == 0 { (2, 3) } else { (3, 4) };
        let k = random_curvatures(&mut r, q, 0.6);
        let cluster = bubble_from_curvatures(n, q, &k).unwrap();
        let theta = on_sphere(&mut r, n + 1);
        let seed = 500 + trial as u64;
        let analytic = first_variation_area(&cluster, &FieldSpec::Mobius { theta: theta.clone() }, samples, seed).unwrap();
        let fd = perimeter_flow_derivative(&cluster, &theta, MC_STEP, samples, seed).unwrap();
        let gap = (analytic.area.value - fd.value).abs();
        let bound = 3.0 * analytic.area.std_error.hypot(fd.std_error) + 1e-4;
        worst_ratio = worst_ratio.max(gap / bound);
        pass &= gap <= bound && analytic.lagrange_gap() < 1e-12;
    }
    pass &= start.elapsed().as_secs_f64() < 120.0;
    report(5, "Lagrange identity", pass, format!("10 fields, worst gap/bound {worst_ratio:.3}"), start);
    assert!(pass);
}

#[test]
fn criterion_06_jacobi_closed_form() {
    let start = Instant::now();
    let mut r = rng(6);
    let mut worst: f64 = 0.0;
    let mut formula_gap: f64 = 0.0;
    let mut done = 0;
    while done < 20 {
        let (n, q) = if done % 2 == 0 { (2, 3) } else { (3, 4) };
        let k = random_curvatures(&mut r, q, 0.6);
        let cluster = bubble_from_curvatures(n, q, &k).unwrap();
        let i = r.random_range(0..q);
        let j = (i + r.random_range(1..q)) % q;
        let theta = on_sphere(&mut r, n + 1);
        let check = jacobi_flow_check(&cluster, i, j, &theta, 1e-4).unwrap();
        let (cij, _) = cluster.pair(i, j);
        let expected = (n as f64 - 1.0) * theta.dot(&cij);
        formula_gap = formula_gap.max((check.closed_form - expected).abs());
        worst = worst.max((check.finite_difference - expected).abs());
        done += 1;
    }
    let pass = worst < 1e-4 && formula_gap < 1e-12 && start.elapsed().as_secs_f64() < 5.0;
    report(6, "Jacobi closed form", pass, format!("20 pairs, max FD error {worst:.2e}"), start);
    assert!(pass);
}

#[test]
fn criterion_07_skew_field_null_direction() {
    let start = Instant::now();
    let mut r = rng(7);
    let samples = 400_000;
    let mut pass = true;
    let mut detail = Vec::new();
    for q in [3usize, 4] {
        let n = q - 1;
        let k = random_curvatures(&mut r, q, 0.5);
        for cluster in [equal_volume_bubble(n, q).unwrap(), bubble_from_curvatures(n, q, &k).unwrap()] {
            let centers = DMatrix::from_fn(q, n + 1, |a, b| cluster.center(a)[b]);
            let north = null_space(&centers).column(0).into_owned();
            let weights = DVector::from_vec(random_curvatures(&mut r, q, 1.0));
            let field = SkewField::new(&cluster, weights, north).unwrap();
            let rep = index_form_q0(&cluster, &field, IndexFormMode::Full, samples, 70 + q as u64).unwrap();
            let z = rep.total.value / rep.total.std_error;
            pass &= rep.total.within(0.0, 3.0, 0.0) && rep.failed_triples.is_empty();
            detail.push(format!("q={q}: {:.2e} ({z:+.2}σ)", rep.total.value));
        }
    }
    pass &= start.elapsed().as_secs_f64() < 60.0;
    report(7, "skew-field null direction", pass, detail.join(", "), start);
    assert!(pass);
}

#[test]
fn criterion_08_isotropicity() {
    let start = Instant::now();
    let mut r = rng(8);
    let samples = 200_000;
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for q in 2..=4 {
        let k = random_curvatures(&mut r, q, 0.5);
        let cluster = bubble_from_curvatures(3, q, &k).unwrap();
        let view = to_euclidean(&cluster, None).unwrap();
        let surface = Surface::Euclidean { view: &view, bound: view.enclosing_radius() };
        for which in [SurfaceTensor::NormalCenter, SurfaceTensor::TracelessNormal] {
            let m = surface_moment(surface, which, samples, 80 + q as u64).unwrap();
            for e in m.iter().flatten() {
                pass &= e.value.abs() <= 3.0 * e.std_error;
                if e.std_error > 0.0 {
                    worst = worst.max(e.value.abs() / e.std_error);
                }
            }
        }
    }
    pass &= start.elapsed().as_secs_f64() < 60.0;
    report(8, "isotropicity", pass, format!("n=3, q=2..4, worst entry {worst:.2}σ"), start);
    assert!(pass);
}

#[test]
fn criterion_09_combinatorial_oracles() {
    let start = Instant::now();
    let four = enumerate_graphs(4, &[GraphFilter::TwoConnected]).unwrap().len();
    let five = enumerate_graphs(5, &[GraphFilter::MinDegree3]).unwrap().len();
    let complete_ok = (2..=6).all(|q| {
        let c = IncidenceComplex::complete(q);
        homology_h1(&c, Field::Gf2) == 0 && homology_h1(&c, Field::Rationals) == 0
    });
    let cycle = IncidenceComplex::cycle(4);
    let cycle_h1 = homology_h1(&cycle, Field::Gf2);
    let pass = four == 3
        && five == 3
        && complete_ok
        && cycle_h1 == 1
        && homology_h1(&cycle, Field::Rationals) == 1
        && start.elapsed().as_secs_f64() < 10.0;
    report(
        9,
        "combinatorial oracles",
        pass,
        format!("q=4 two-connected {four}, q=5 min-degree-3 {five}, H1(C4) {cycle_h1}"),
        start,
    );
    assert!(pass);
}

fn connected_without(v: usize, adj: &[Vec<usize>], removed: Option<usize>) -> bool {
    let start = (0..v).find(|&x| Some(x) != removed).unwrap();
    let mut seen = vec![false; v];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(x) = stack.pop() {
        for &y in &adj[x] {
            if Some(y) != removed && !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    (0..v).all(|x| seen[x] || Some(x) == removed)
}

#[test]
fn criterion_10_strong_maximum_principle() {
    let start = Instant::now();
    let mut r = rng(10);
    let mut instances = 0;
    let mut worst_margin = f64::INFINITY;
    let mut pass = true;
    while instances < 200 {
        let v = r.random_range(3..=12);
        let mut edges = Vec::new();
        let mut adj = vec![Vec::new(); v];
        for b in 1..v {
            let a = r.random_range(0..b);
            edges.push((a, b, r.random_range(0.1..5.0)));
            adj[a].push(b);
            adj[b].push(a);
        }
        for a in 0..v {
            for b in a + 1..v {
                if !adj[a].contains(&b) && r.random_bool(0.3) {
                    edges.push((a, b, r.random_range(0.1..5.0)));
                    adj[a].push(b);
                    adj[b].push(a);
                }
            }
        }
        let candidates: Vec<usize> = (0..v).filter(|&s| connected_without(v, &adj, Some(s))).collect();
        if candidates.is_empty() {
            continue;
        }
        let s = candidates[r.random_range(0..candidates.len())];
        let t = (s + r.random_range(1..v)) % v;
        let graph = WeightedGraph::new(v, edges).unwrap();
        let sol = graph.max_principle_solve(s, t).unwrap();
        let residual = (graph.laplacian() * &sol.potential - {
            let mut e = DVector::zeros(v);
            e[s] = 1.0;
            e[t] = -1.0;
            e
        })
        .amax();
        let others = (0..v).filter(|&x| x != s).map(|x| sol.potential[x]).fold(f64::NEG_INFINITY, f64::max);
        worst_margin = worst_margin.min(sol.potential[s] - others);
        pass &= sol.strict_max && sol.potential[s] > others && residual < 1e-9;
        instances += 1;
    }
    pass &= start.elapsed().as_secs_f64() < 5.0;
    report(10, "strong maximum principle", pass, format!("200 graphs, smallest margin {worst_margin:.3e}"), start);
    assert!(pass);
}

#[test]
fn criterion_11_ring_test() {
    let start = Instant::now();
    let mut r = rng(11);
    let mut pass = true;
    let mut min_excess = [f64::INFINITY; 8];
    let mut max_excess = [f64::NEG_INFINITY; 8];
    for q in 4..=7 {
        for _ in 0..200 {
            let k: Vec<f64> = (0..q - 1).map(|_| r.random_range(0.05..20.0)).collect();
            let rep = ring_feasibility(q, &k, None).unwrap();
            pass &= rep.verdict == RingVerdict::Infeasible;
            min_excess[q] = min_excess[q].min(rep.angles.excess);
            max_excess[q] = max_excess[q].max(rep.angles.excess);
        }
    }
    pass &= (4..7).all(|q| min_excess[q] > 1e-9);
    pass &= min_excess[7].abs() < 1e-9 && max_excess[7].abs() < 1e-9;

    let ring = regular_ring(7).unwrap();
    let bound = ring_angle_bound(8, &ring.ring_curvatures).unwrap();
    let geometry = RingGeometry {
        cluster: &ring.cluster,
        hub: ring.hub,
        samples: default_detection_samples(2),
        seed: 11,
    };
    let heptagon = ring_feasibility(8, &ring.ring_curvatures, Some(geometry)).unwrap();
    pass &= heptagon.verdict == RingVerdict::Feasible && bound.excess < 0.0;
    pass &= start.elapsed().as_secs_f64() < 1.0;
    report(
        11,
        "ring test",
        pass,
        format!(
            "min excess q=4..7 [{:.1}, {:.1}, {:.1}, {:.1e}], heptagon {:?}",
            min_excess[4], min_excess[5], min_excess[6], min_excess[7], heptagon.verdict
        ),
        start,
    );
    assert!(pass);
}

#[test]
fn criterion_12_projection_coherence() {
    let start = Instant::now();
    let mut r = rng(12);
    let mut round_trip: f64 = 0.0;
    let mut disagreements = 0;
    let mut compared = 0;
    let mut complex_ok = true;
    let specs = [(2usize, 3usize), (2, 4), (3, 4), (3, 5)];
    for (idx, &(n, q)) in specs.iter().enumerate() {
        let k = random_curvatures(&mut r, q, 0.6);
        let base = bubble_from_curvatures(n, q, &k).unwrap();
        let cluster = transform(&base, &random_mobius(&mut r, n + 1)).unwrap();
        let view = to_euclidean(&cluster, None).unwrap();

        let (centers, offsets) = view.spherical_parameters();
        for i in 0..q {
            round_trip = round_trip.max((&centers[i] - cluster.center(i)).amax());
            round_trip = round_trip.max((offsets[i] - cluster.curvature(i)).abs());
        }

        let points = 25_000;
        for _ in 0..points {
            let p = on_sphere(&mut r, n + 1);
            let Ok(x) = view.chart().to_plane(&p) else { continue };
            let mut f = cluster.functionals(&p);
            f.sort_by(f64::total_cmp);
            if f[1] - f[0] < 1e-9 {
                continue;
            }
            compared += 1;
            if view.argmin(&x) != cluster.argmin(&p) {
                disagreements += 1;
            }
        }

        let seed = 120 + idx as u64;
        let samples = default_detection_samples(n);
        let complex = extract_complex(&cluster, samples, seed).unwrap();
        let rebuilt = Cluster::new(n, centers.clone(), offsets.clone()).unwrap();
        complex_ok &= extract_complex(&rebuilt, samples, seed).unwrap() == complex;
        let simplices = complex
            .edges
            .iter()
            .map(|&(a, b)| vec![a, b])
            .chain(complex.triangles.iter().map(|&(a, b, c)| vec![a, b, c]));
        for set in simplices {
            let det = cluster.meeting_set_nonempty(&set, samples, seed).unwrap();
            let Some(p) = det.witness else {
                complex_ok = false;
                continue;
            };
            let x = view.chart().to_plane(&p).unwrap();
            complex_ok &= match view.cell_of(&x, 1e-9) {
                Membership::Tie(cells) => cells == set,
                Membership::Cell(_) => false,
            };
        }
    }
    let pass = round_trip < 1e-12
        && compared >= 90_000
        && disagreements == 0
        && complex_ok
        && start.elapsed().as_secs_f64() < 30.0;
    report(
        12,
        "projection coherence",
        pass,
        format!("round trip {round_trip:.1e}, {disagreements}/{compared} membership disagreements, complex preserved {complex_ok}"),
        start,
    );
    assert!(pass);
}

fn sample_meeting_points(cluster: &Cluster, cells: &[usize], r: &mut ChaCha8Rng, want: usize) -> Vec<DVector<f64>> {
    let Ok(Some(carrier)) = cluster.carrier(cells) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for _ in 0..4000 {
        let p = carrier.sample(r);
        if cluster.is_meeting_point(cells, &p, 1e-7) {
            out.push(p);
            if out.len() == want {
                break;
            }
        }
    }
    out
}

#[test]
fn criterion_13_blow_up_classification() {
    let start = Instant::now();
    let mut r = rng(13);
    let mut pass = true;
    let (mut triples, mut quadruples) = (0, 0);
    let mut worst_sum: f64 = 0.0;
    for (n, q) in [(2usize, 3usize), (2, 4), (3, 4), (3, 5)] {
        let k = random_curvatures(&mut r, q, 0.5);
        let cluster = bubble_from_curvatures(n, q, &k).unwrap();
        for a in 0..q {
            for b in a + 1..q {
                for c in b + 1..q {
                    for p in sample_meeting_points(&cluster, &[a, b, c], &mut r, 5) {
                        let cone = cluster.blow_up(&p, 1e-9).unwrap();
                        worst_sum = worst_sum.max(cone.max_cycle_sum());
                        pass &= cone.kind == ConeKind::Y && cone.max_cycle_sum() < 1e-9;
                        triples += 1;
                    }
                    if n < 3 {
                        continue;
                    }
                    for d in c + 1..q {
                        for p in sample_meeting_points(&cluster, &[a, b, c, d], &mut r, 2) {
                            let cone = cluster.blow_up(&p, 1e-9).unwrap();
                            worst_sum = worst_sum.max(cone.max_cycle_sum());
                            pass &= cone.kind == ConeKind::T && cone.max_cycle_sum() < 1e-9;
                            quadruples += 1;
                        }
                    }
                }
            }
        }
    }
    pass &= triples > 0 && quadruples > 0 && start.elapsed().as_secs_f64() < 10.0;
    report(
        13,
        "blow-up classification",
        pass,
        format!("{triples} triple points Y, {quadruples} quadruple points T, max |Σn| {worst_sum:.1e}"),
        start,
    );
    assert!(pass);
}
