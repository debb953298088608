//! `bubbletk` command-line front end.
//!
//! Exit codes: 0 success, 1 a verification or solver check failed, 2 bad input.

mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bubbletk::cluster::{Cluster, ConeKind};
use bubbletk::combinatorics::{
    enumerate_graphs, extract_complex, homology_h1, ring_feasibility, Field, GraphFilter, RingGeometry,
};
use bubbletk::construct::{bubble_from_curvatures, bubble_from_volumes, equal_volume_bubble, transform, VolumeSolverOptions};
use bubbletk::error::Error;
use bubbletk::linalg::null_space;
use bubbletk::measure::{
    cell_volumes, perimeter, surface_moment, Surface, SurfaceTensor, DEFAULT_SURFACE_SAMPLES, DEFAULT_VOLUME_SAMPLES,
};
use bubbletk::minkowski::LorentzMatrix;
use bubbletk::projections::{to_euclidean, EuclideanCarrier};
use bubbletk::sampling::{chunk_rng, gaussian_vector, DEFAULT_SEED};
use bubbletk::variation::{
    first_variation_area, index_form_q0, jacobi_flow_check, perimeter_flow_derivative, FieldSpec, IndexFormMode,
    SkewField, CURVATURE_STEP, MC_STEP,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(name = "bubbletk", version, about = "Spherical Voronoi clusters: construction, measures and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a standard bubble.
    Construct(ConstructArgs),
    /// Apply a boost or a rotation.
    Transform(TransformArgs),
    /// Stereographic picture of a cluster.
    Project(ProjectArgs),
    /// Monte Carlo volumes and interface areas.
    Measure(MeasureArgs),
    /// Run named checks; exits 1 if any fails.
    Verify(VerifyArgs),
    /// Incidence complexes, homology, enumeration and the ring test.
    Graph {
        #[command(subcommand)]
        command: GraphCommand,
    },
    /// Classify the tangent cone at a boundary point.
    Blowup(BlowupArgs),
    /// Angle test for bubble rings.
    RingTest(RingArgs),
    /// SVG cross-section.
    Plot(PlotArgs),
}

#[derive(Subcommand)]
enum GraphCommand {
    Extract(ExtractArgs),
    Homology(HomologyArgs),
    Enumerate(EnumerateArgs),
    RingTest(RingArgs),
}

#[derive(Args)]
struct Sampling {
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Equal,
    Curv,
    Vol,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Dot,
    Svg,
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    q: usize,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    curvatures: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    volumes: Vec<f64>,
    #[command(flatten)]
    sampling: Sampling,
    #[arg(short = 'o', long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TransformArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Boost direction θ.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    boost: Vec<f64>,
    /// Boost parameter.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    t: f64,
    /// Rotation `i,j,angle` in the plane of coordinates i and j.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    rotate: Vec<f64>,
    #[arg(short = 'o', long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProjectArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    pole_cell: Option<usize>,
    #[arg(short = 'o', long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MeasureArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    sampling: Sampling,
    /// Samples for volumes; `--samples` sets the per-interface count.
    #[arg(long, default_value_t = DEFAULT_VOLUME_SAMPLES)]
    volume_samples: usize,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(short = 'o', long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "gram")]
    checks: Vec<String>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[command(flatten)]
    sampling: Sampling,
    #[arg(short = 'o', long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    sampling: Sampling,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(short = 'o', long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    Gf2,
    Q,
}

#[derive(Args)]
struct HomologyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "gf2")]
    field: FieldArg,
    #[command(flatten)]
    sampling: Sampling,
}

#[derive(Clone, Copy, ValueEnum)]
enum FilterArg {
    #[value(name = "two_connected")]
    TwoConnected,
    #[value(name = "min_degree_3")]
    MinDegree3,
    #[value(name = "triangle_cover")]
    TriangleCover,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    q: usize,
    #[arg(long, value_enum, value_delimiter = ',')]
    filter: Vec<FilterArg>,
    #[arg(long, value_enum, default_value = "dot")]
    format: Format,
    #[arg(short = 'o', long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RingArgs {
    #[arg(long)]
    q: usize,
    /// Ring curvatures in cyclic order.
    #[arg(long, value_delimiter = ',')]
    curvatures: Vec<f64>,
    /// Explicit ring geometry to check when q >= 8.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    hub: Option<usize>,
    #[command(flatten)]
    sampling: Sampling,
}

#[derive(Args)]
struct BlowupArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    point: Vec<f64>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotMode {
    Sphere,
    Euclidean,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "sphere")]
    mode: PlotMode,
    /// First spanning vector of the slice plane (sphere mode).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    span_u: Vec<f64>,
    /// Second spanning vector of the slice plane (sphere mode).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    span_v: Vec<f64>,
    #[arg(long)]
    pole_cell: Option<usize>,
    #[arg(long, default_value_t = 720)]
    resolution: usize,
    #[arg(short = 'o', long)]
    out: Option<PathBuf>,
}

enum Failure {
    Input(Error),
    Check { failed: Vec<String> },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e)
    }
}

type CliResult = std::result::Result<(), Failure>;

fn vecf(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(value: &T, out: Option<&PathBuf>) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Invalid(e.to_string()))?;
    text.push('\n');
    emit(&text, out)
}

fn load(path: &Path) -> Result<Cluster, Error> {
    Ok(bubbletk::io::load(path)?.0)
}

fn save_cluster(cluster: &Cluster, meta: Map<String, Value>, out: Option<&PathBuf>) -> Result<(), Error> {
    let mut text = bubbletk::io::to_json(cluster, meta);
    text.push('\n');
    emit(&text, out)
}

fn construct(args: &ConstructArgs) -> CliResult {
    let mut meta = Map::new();
    let cluster = match args.mode {
        Mode::Equal => {
            meta.insert("mode".into(), json!("equal"));
            equal_volume_bubble(args.n, args.q)?
        }
        Mode::Curv => {
            meta.insert("mode".into(), json!("curv"));
            bubble_from_curvatures(args.n, args.q, &args.curvatures)?
        }
        Mode::Vol => {
            let opts = VolumeSolverOptions {
                samples: args.sampling.samples.unwrap_or(DEFAULT_VOLUME_SAMPLES),
                seed: args.sampling.seed,
                ..VolumeSolverOptions::default()
            };
            let sol = bubble_from_volumes(args.n, args.q, &args.volumes, &opts)?;
            meta.insert("mode".into(), json!("vol"));
            meta.insert("seed".into(), json!(opts.seed));
            meta.insert("samples".into(), json!(opts.samples));
            meta.insert("converged".into(), json!(sol.converged));
            meta.insert("iterations".into(), json!(sol.iterations));
            save_cluster(&sol.cluster, meta, args.out.as_ref())?;
            if !sol.converged {
                return Err(Failure::Check { failed: vec!["volume-solver".into()] });
            }
            return Ok(());
        }
    };
    save_cluster(&cluster, meta, args.out.as_ref())?;
    Ok(())
}

fn rotation(dim: usize, spec: &[f64]) -> Result<DMatrix<f64>, Error> {
    let [i, j, angle] = spec else {
        return Err(Error::Invalid("--rotate expects i,j,angle".into()));
    };
    let (i, j) = (*i as usize, *j as usize);
    if i >= dim || j >= dim || i == j {
        return Err(Error::Invalid(format!("rotation plane ({i}, {j}) outside dimension {dim}")));
    }
    let mut r = DMatrix::identity(dim, dim);
    let (s, c) = angle.sin_cos();
    r[(i, i)] = c;
    r[(j, j)] = c;
    r[(i, j)] = -s;
    r[(j, i)] = s;
    Ok(r)
}

fn transform_cmd(args: &TransformArgs) -> CliResult {
    let cluster = load(&args.input)?;
    let mut meta = Map::new();
    let u = match (args.boost.is_empty(), args.rotate.is_empty()) {
        (false, true) => {
            meta.insert("boost".into(), json!(args.boost));
            meta.insert("t".into(), json!(args.t));
            LorentzMatrix::boost(&DVector::from_column_slice(&args.boost), args.t)?
        }
        (true, false) => {
            meta.insert("rotate".into(), json!(args.rotate));
            LorentzMatrix::from_rotation(&rotation(cluster.n() + 1, &args.rotate)?)?
        }
        _ => return Err(Error::Invalid("give exactly one of --boost and --rotate".into()).into()),
    };
    save_cluster(&transform(&cluster, &u)?, meta, args.out.as_ref())?;
    Ok(())
}

fn project(args: &ProjectArgs) -> CliResult {
    let cluster = load(&args.input)?;
    let view = to_euclidean(&cluster, args.pole_cell)?;
    let frame = view.chart().frame();
    let mut carriers = Vec::new();
    for i in 0..view.q() {
        for j in i + 1..view.q() {
            let c = match view.carrier(i, j) {
                EuclideanCarrier::Sphere { center, radius } => {
                    json!({"i": i, "j": j, "kind": "sphere", "center": vecf(&center), "radius": radius})
                }
                EuclideanCarrier::Plane { normal, foot } => {
                    json!({"i": i, "j": j, "kind": "plane", "normal": vecf(&normal), "foot": vecf(&foot)})
                }
                EuclideanCarrier::Empty => json!({"i": i, "j": j, "kind": "empty"}),
            };
            carriers.push(c);
        }
    }
    let report = json!({
        "space": "R",
        "n": view.n(),
        "q": view.q(),
        "pole": vecf(view.pole()),
        "pole_cell": view.pole_cell(),
        "frame": (0..frame.nrows()).map(|r| frame.row(r).iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>(),
        "centers": view.euclid_centers().iter().map(vecf).collect::<Vec<_>>(),
        "curvatures": view.euclid_curvatures(),
        "spherical_offsets": view.spherical_offsets(),
        "carriers": carriers,
    });
    emit_json(&report, args.out.as_ref())?;
    Ok(())
}

fn measure_cmd(args: &MeasureArgs) -> CliResult {
    let cluster = load(&args.input)?;
    let seed = args.sampling.seed;
    let surface_samples = args.sampling.samples.unwrap_or(DEFAULT_SURFACE_SAMPLES);
    let volumes = cell_volumes(&cluster, args.volume_samples, seed);
    let per = perimeter(&cluster, surface_samples, seed)?;
    match args.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Error::Io(e.to_string());
            w.write_record(["quantity", "i", "j", "value", "std_error", "samples", "seed"]).map_err(io)?;
            for (i, v) in volumes.iter().enumerate() {
                w.serialize(("volume", i, "", v.value, v.std_error, v.samples, v.seed)).map_err(io)?;
            }
            for p in &per.pairs {
                let r = p.report;
                w.serialize(("area", p.i, p.j, r.value, r.std_error, r.samples, r.seed)).map_err(io)?;
            }
            let t = per.total;
            w.serialize(("perimeter", "", "", t.value, t.std_error, t.samples, t.seed)).map_err(io)?;
            let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
            emit(&String::from_utf8_lossy(&bytes), args.out.as_ref())?;
        }
        Format::Json => {
            let report = json!({
                "seed": seed,
                "normalization": "sphere",
                "volumes": volumes,
                "pairs": per.pairs,
                "perimeter": per.total,
                "skipped_pairs": per.skipped,
            });
            emit_json(&report, args.out.as_ref())?;
        }
        _ => return Err(Error::Invalid("measure supports json and csv".into()).into()),
    }
    Ok(())
}

#[derive(Serialize)]
struct CheckOutcome {
    name: String,
    passed: bool,
    value: f64,
    threshold: f64,
    detail: Value,
}

fn random_direction(dim: usize, seed: u64, stream: u64) -> DVector<f64> {
    let mut rng = chunk_rng(seed, stream, 0);
    gaussian_vector(&mut rng, dim).normalize()
}

fn run_check(name: &str, cluster: &Cluster, args: &VerifyArgs) -> Result<CheckOutcome, Error> {
    let seed = args.sampling.seed;
    let samples = args.sampling.samples.unwrap_or(DEFAULT_SURFACE_SAMPLES);
    let n = cluster.n();
    Ok(match name {
        "gram" => {
            let check = cluster.is_standard_bubble(args.tol);
            CheckOutcome {
                name: name.into(),
                passed: check.is_standard,
                value: check.deviation,
                threshold: args.tol,
                detail: json!({}),
            }
        }
        "stationarity" => {
            let r = cluster.stationarity_report(samples.min(65_536), seed);
            let worst = r.max_normal_sum.max(r.cocycle_residual);
            CheckOutcome {
                name: name.into(),
                passed: worst < 1e-9,
                value: worst,
                threshold: 1e-9,
                detail: json!({"triple_points_checked": r.triple_points_checked, "multipliers": r.multipliers}),
            }
        }
        "lagrange" => {
            let theta = random_direction(n + 1, seed, 1);
            let spec = FieldSpec::Mobius { theta: theta.clone() };
            let analytic = first_variation_area(cluster, &spec, samples, seed)?;
            let fd = perimeter_flow_derivative(cluster, &theta, MC_STEP, samples, seed)?;
            let gap = (analytic.area.value - fd.value).abs();
            let sigma = analytic.area.std_error.hypot(fd.std_error);
            let threshold = 3.0 * sigma + 1e-4;
            CheckOutcome {
                name: name.into(),
                passed: gap <= threshold && analytic.lagrange_gap() < 1e-12,
                value: gap,
                threshold,
                detail: json!({
                    "theta": vecf(&theta),
                    "analytic": analytic.area,
                    "finite_difference": fd,
                    "lagrange_gap": analytic.lagrange_gap(),
                }),
            }
        }
        "jacobi" => {
            let theta = random_direction(n + 1, seed, 2);
            let mut worst: f64 = 0.0;
            let mut pairs = Vec::new();
            for i in 0..cluster.q() {
                for j in i + 1..cluster.q() {
                    if cluster.pair_defect(i, j).abs() > 1e-9 || !cluster.interface_nonempty(i, j, 4096, seed)?.nonempty {
                        continue;
                    }
                    let c = jacobi_flow_check(cluster, i, j, &theta, CURVATURE_STEP)?;
                    worst = worst.max(c.error);
                    pairs.push(json!({"i": i, "j": j, "check": c}));
                }
            }
            CheckOutcome {
                name: name.into(),
                passed: worst < 1e-4,
                value: worst,
                threshold: 1e-4,
                detail: json!({"theta": vecf(&theta), "pairs": pairs}),
            }
        }
        "skew-q0" => {
            let centers = DMatrix::from_fn(cluster.q(), n + 1, |i, j| cluster.center(i)[j]);
            let ns = null_space(&centers);
            if ns.ncols() == 0 {
                return Ok(CheckOutcome {
                    name: name.into(),
                    passed: false,
                    value: f64::NAN,
                    threshold: 0.0,
                    detail: json!({"reason": "no direction orthogonal to every quasi-centre"}),
                });
            }
            let north = ns.column(0).into_owned();
            let mut weights = gaussian_vector(&mut chunk_rng(seed, 3, 0), cluster.q());
            let mean = weights.mean();
            weights.add_scalar_mut(-mean);
            let field = SkewField::new(cluster, weights.clone(), north.clone())?;
            let r = index_form_q0(cluster, &field, IndexFormMode::Full, samples, seed)?;
            let threshold = 3.0 * r.total.std_error;
            CheckOutcome {
                name: name.into(),
                passed: r.total.value.abs() <= threshold,
                value: r.total.value.abs(),
                threshold,
                detail: json!({"north": vecf(&north), "weights": vecf(&weights), "report": r}),
            }
        }
        "isotropy" => {
            let view = to_euclidean(cluster, None)?;
            let bound = view.enclosing_radius();
            let surface = Surface::Euclidean { view: &view, bound };
            let mut worst: f64 = 0.0;
            let mut passed = true;
            let mut parts = Map::new();
            for (label, which) in [("normal_center", SurfaceTensor::NormalCenter), ("traceless_normal", SurfaceTensor::TracelessNormal)] {
                let m = surface_moment(surface, which, samples, seed)?;
                for row in &m {
                    for e in row {
                        worst = worst.max(e.value.abs() / e.std_error.max(1e-300));
                        passed &= e.value.abs() <= 3.0 * e.std_error;
                    }
                }
                parts.insert(label.into(), json!(m));
            }
            CheckOutcome { name: name.into(), passed, value: worst, threshold: 3.0, detail: Value::Object(parts) }
        }
        other => return Err(Error::Invalid(format!("unknown check {other:?}"))),
    })
}

fn verify(args: &VerifyArgs) -> CliResult {
    let cluster = load(&args.input)?;
    let mut outcomes = Vec::new();
    for name in &args.checks {
        outcomes.push(run_check(name.trim(), &cluster, args)?);
    }
    let failed: Vec<String> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name.clone()).collect();
    emit_json(
        &json!({"seed": args.sampling.seed, "passed": failed.is_empty(), "checks": outcomes}),
        args.out.as_ref(),
    )?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check { failed })
    }
}

fn detection_samples(cluster: &Cluster, s: &Sampling) -> usize {
    s.samples.unwrap_or_else(|| bubbletk::cluster::default_detection_samples(cluster.n()))
}

fn graph(cmd: &GraphCommand) -> CliResult {
    match cmd {
        GraphCommand::Extract(args) => {
            let cluster = load(&args.input)?;
            let complex = extract_complex(&cluster, detection_samples(&cluster, &args.sampling), args.sampling.seed)?;
            match args.format {
                Format::Dot => emit(&complex.to_dot("complex"), args.out.as_ref())?,
                _ => emit_json(&json!({"seed": args.sampling.seed, "complex": complex}), args.out.as_ref())?,
            }
        }
        GraphCommand::Homology(args) => {
            let cluster = load(&args.input)?;
            let complex = extract_complex(&cluster, detection_samples(&cluster, &args.sampling), args.sampling.seed)?;
            let (field, label) = match args.field {
                FieldArg::Gf2 => (Field::Gf2, "gf2"),
                FieldArg::Q => (Field::Rationals, "q"),
            };
            emit_json(
                &json!({
                    "seed": args.sampling.seed,
                    "field": label,
                    "h1": homology_h1(&complex, field),
                    "components": complex.components(),
                }),
                None,
            )?;
        }
        GraphCommand::Enumerate(args) => {
            let filters: Vec<GraphFilter> = args
                .filter
                .iter()
                .map(|f| match f {
                    FilterArg::TwoConnected => GraphFilter::TwoConnected,
                    FilterArg::MinDegree3 => GraphFilter::MinDegree3,
                    FilterArg::TriangleCover => GraphFilter::TriangleCover,
                })
                .collect();
            let graphs = enumerate_graphs(args.q, &filters)?;
            match args.format {
                Format::Json => emit_json(
                    &json!({
                        "q": args.q,
                        "filters": filters,
                        "count": graphs.len(),
                        "graphs": graphs.iter().map(|g| g.edges()).collect::<Vec<_>>(),
                    }),
                    args.out.as_ref(),
                )?,
                _ => {
                    let mut text = String::new();
                    for (k, g) in graphs.iter().enumerate() {
                        text.push_str(&format!("graph g{k} {{\n"));
                        for v in 0..g.q() {
                            text.push_str(&format!("  {v};\n"));
                        }
                        for (a, b) in g.edges() {
                            text.push_str(&format!("  {a} -- {b};\n"));
                        }
                        text.push_str("}\n");
                    }
                    emit(&text, args.out.as_ref())?;
                }
            }
        }
        GraphCommand::RingTest(args) => ring_test(args)?,
    }
    Ok(())
}

fn ring_test(args: &RingArgs) -> CliResult {
    let cluster = args.input.as_deref().map(load).transpose()?;
    let geometry = match (&cluster, args.hub) {
        (Some(c), Some(hub)) => Some(RingGeometry {
            cluster: c,
            hub,
            samples: detection_samples(c, &args.sampling),
            seed: args.sampling.seed,
        }),
        (Some(_), None) => return Err(Error::Invalid("--in needs --hub".into()).into()),
        _ => None,
    };
    let report = ring_feasibility(args.q, &args.curvatures, geometry)?;
    emit_json(&json!({"seed": args.sampling.seed, "report": report}), None)?;
    Ok(())
}

fn blowup(args: &BlowupArgs) -> CliResult {
    let cluster = load(&args.input)?;
    let cone = cluster.blow_up(&DVector::from_column_slice(&args.point), args.tol)?;
    let kind: ConeKind = cone.kind;
    emit_json(
        &json!({
            "point": vecf(&cone.point),
            "cells": cone.cells,
            "kind": kind,
            "dim": cone.dim,
            "pairs_present": cone.pairs_present,
            "max_cycle_sum": cone.max_cycle_sum(),
        }),
        None,
    )?;
    Ok(())
}

fn plot_cmd(args: &PlotArgs) -> CliResult {
    let cluster = load(&args.input)?;
    let svg = match args.mode {
        PlotMode::Sphere => {
            let dim = cluster.n() + 1;
            let axis = |k: usize| {
                let mut e = DVector::zeros(dim);
                e[k.min(dim - 1)] = 1.0;
                e
            };
            let u = if args.span_u.is_empty() { axis(0) } else { DVector::from_column_slice(&args.span_u) };
            let v = if args.span_v.is_empty() { axis(1) } else { DVector::from_column_slice(&args.span_v) };
            plot::sphere_slice(&cluster, &u, &v, args.resolution)?
        }
        PlotMode::Euclidean => plot::euclidean_slice(&to_euclidean(&cluster, args.pole_cell)?, args.resolution)?,
    };
    emit(&svg, args.out.as_ref())?;
    Ok(())
}

fn dispatch(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::Construct(a) => construct(a),
        Command::Transform(a) => transform_cmd(a),
        Command::Project(a) => project(a),
        Command::Measure(a) => measure_cmd(a),
        Command::Verify(a) => verify(a),
        Command::Graph { command } => graph(command),
        Command::Blowup(a) => blowup(a),
        Command::RingTest(a) => ring_test(a),
        Command::Plot(a) => plot_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", json!({"error": "E_USAGE", "message": e.to_string()}));
            return ExitCode::from(2);
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check { failed }) => {
            eprintln!("{}", json!({"error": "E_CHECK_FAILED", "failed": failed}));
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("{}", json!({"error": e.code(), "message": e.to_string()}));
            ExitCode::from(2)
        }
    }
}
