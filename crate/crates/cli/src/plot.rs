//! SVG cross-sections of clusters.

use std::fmt::Write;

use bubbletk::cluster::Cluster;
use bubbletk::error::{Error, Result};
use bubbletk::projections::{EuclideanCarrier, EuclideanView};
use nalgebra::DVector;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];
const SIZE: f64 = 480.0;

fn color(index: usize) -> &'static str {
    PALETTE[index % PALETTE.len()]
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">"
    );
    let _ = writeln!(out, "<title>{title}</title>");
    let _ = writeln!(out, "<rect width=\"{SIZE}\" height=\"{SIZE}\" fill=\"white\"/>");
}

fn polyline(out: &mut String, pts: &[(f64, f64)], stroke: &str, width: f64) {
    if pts.len() < 2 {
        return;
    }
    let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.3},{y:.3}")).collect();
    let _ = writeln!(
        out,
        "<polyline fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{width}\" points=\"{}\"/>",
        coords.join(" ")
    );
}

/// Orthonormalises the two spanning vectors of a slice plane.
fn plane_basis(u: &DVector<f64>, v: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
    let nu = u.norm();
    if nu < 1e-12 {
        return Err(Error::DegeneratePlane);
    }
    let u = u / nu;
    let w = v - &u * u.dot(v);
    let nw = w.norm();
    if nw < 1e-9 * v.norm().max(1.0) {
        return Err(Error::DegeneratePlane);
    }
    Ok((u, w / nw))
}

/// Great-circle slice of S^n through the plane spanned by `u` and `v`, with each arc
/// drawn in the colour of its cell and a dot where the cell changes.
pub fn sphere_slice(cluster: &Cluster, u: &DVector<f64>, v: &DVector<f64>, resolution: usize) -> Result<String> {
    let dim = cluster.n() + 1;
    if u.len() != dim || v.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: u.len().min(v.len()) });
    }
    let (u, v) = plane_basis(u, v)?;
    let steps = resolution.max(8);
    let radius = 0.42 * SIZE;
    let screen = |phi: f64| (SIZE / 2.0 + radius * phi.cos(), SIZE / 2.0 - radius * phi.sin());
    let cells: Vec<usize> = (0..=steps)
        .map(|s| {
            let phi = std::f64::consts::TAU * s as f64 / steps as f64;
            cluster.argmin(&(&u * phi.cos() + &v * phi.sin()))
        })
        .collect();
    let mut out = String::new();
    header(&mut out, "great-circle slice");
    let mut start = 0;
    for s in 1..=steps {
        if cells[s] != cells[start] || s == steps {
            let pts: Vec<_> = (start..=s)
                .map(|t| screen(std::f64::consts::TAU * t as f64 / steps as f64))
                .collect();
            polyline(&mut out, &pts, color(cells[start]), 4.0);
            if cells[s] != cells[start] {
                let (x, y) = screen(std::f64::consts::TAU * (s as f64 - 0.5) / steps as f64);
                let _ = writeln!(out, "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"4\" fill=\"black\"/>");
            }
            start = s;
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Slice of the Euclidean picture by the plane of the first two coordinates, with each
/// interface drawn in the colour of its pair.
pub fn euclidean_slice(view: &EuclideanView, resolution: usize) -> Result<String> {
    let n = view.n();
    if n < 2 {
        return Err(Error::DegeneratePlane);
    }
    let extent = view.enclosing_radius().min(1e3) * 1.1;
    let scale = 0.46 * SIZE / extent;
    let screen = |x: f64, y: f64| (SIZE / 2.0 + scale * x, SIZE / 2.0 - scale * y);
    let steps = resolution.max(8);
    let q = view.q();
    let lift = |x: f64, y: f64| {
        let mut p = DVector::zeros(n);
        p[0] = x;
        p[1] = y;
        p
    };
    let mut out = String::new();
    header(&mut out, "euclidean slice");
    let mut pair_index = 0;
    for i in 0..q {
        for j in i + 1..q {
            let color = color(pair_index);
            pair_index += 1;
            // Parametrise the carrier's trace in the slice plane.
            let curve: Vec<(f64, f64)> = match view.carrier(i, j) {
                EuclideanCarrier::Sphere { center, radius } => {
                    let off: f64 = center.iter().skip(2).map(|x| x * x).sum();
                    let r2 = radius * radius - off;
                    if r2 <= 0.0 {
                        continue;
                    }
                    let r = r2.sqrt();
                    (0..=steps)
                        .map(|s| {
                            let a = std::f64::consts::TAU * s as f64 / steps as f64;
                            (center[0] + r * a.cos(), center[1] + r * a.sin())
                        })
                        .collect()
                }
                EuclideanCarrier::Plane { normal, foot } => {
                    let (a, b) = (normal[0], normal[1]);
                    let norm = (a * a + b * b).sqrt();
                    if norm < 1e-12 {
                        continue;
                    }
                    let offset = normal.dot(&foot) / norm;
                    let (px, py) = (a / norm * offset, b / norm * offset);
                    let (dx, dy) = (-b / norm, a / norm);
                    (0..=steps)
                        .map(|s| {
                            let t = extent * (2.0 * s as f64 / steps as f64 - 1.0);
                            (px + t * dx, py + t * dy)
                        })
                        .collect()
                }
                EuclideanCarrier::Empty => continue,
            };
            let on_interface = |&(x, y): &(f64, f64)| {
                let f = view.functionals(&lift(x, y));
                let top = f[i].max(f[j]);
                (0..q).filter(|&l| l != i && l != j).all(|l| f[l] > top)
            };
            let mut run: Vec<(f64, f64)> = Vec::new();
            for pt in &curve {
                if on_interface(pt) {
                    run.push(screen(pt.0, pt.1));
                } else {
                    polyline(&mut out, &run, color, 3.0);
                    run.clear();
                }
            }
            polyline(&mut out, &run, color, 3.0);
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use bubbletk::construct::equal_volume_bubble;
    use nalgebra::dvector;

    #[test]
    fn equatorial_slice_has_three_arcs() {
        let c = equal_volume_bubble(2, 3).unwrap();
        let svg = sphere_slice(&c, &dvector![1.0, 0.0, 0.0], &dvector![0.0, 1.0, 0.0], 360).unwrap();
        assert_eq!(svg.matches("<circle").count(), 3);
        for cell in 0..3 {
            assert!(svg.contains(color(cell)));
        }
    }

    #[test]
    fn parallel_spanning_vectors_are_rejected() {
        let c = equal_volume_bubble(2, 3).unwrap();
        let r = sphere_slice(&c, &dvector![1.0, 0.0, 0.0], &dvector![2.0, 0.0, 0.0], 36);
        assert!(matches!(r, Err(Error::DegeneratePlane)));
    }
}
