//! Brute-force grid search on S(E) for l ≤ 3, the reference for the
//! multistart section optimizer.

use std::f64::consts::PI;

use dvlab::optimize::SphereOptConfig;
use dvlab::sampling::{grassmannian_samples, Subspace};
use dvlab::sections::{section_diameter, section_inradius};
use dvlab::{ConvexBody, SeedSpec};

pub const GRID: usize = 100_000;

fn section_norm(body: &ConvexBody, e: &Subspace, z: &[f64]) -> f64 {
    let r = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    body.eval(&e.embed(&z.iter().map(|v| v / r).collect::<Vec<_>>()))
}

/// Extremum of f on the circle: angle grid, then repeated local zoom.
fn circle_extremum(f: impl Fn(&[f64]) -> f64, sign: f64) -> f64 {
    let g = |th: f64| sign * f(&[th.cos(), th.sin()]);
    let step = 2.0 * PI / GRID as f64;
    let mut best: Vec<(f64, f64)> = (0..GRID).map(|i| (g(i as f64 * step), i as f64 * step)).collect();
    best.sort_by(|a, b| a.0.total_cmp(&b.0));
    best.truncate(20);
    best.into_iter()
        .map(|(mut v, mut th)| {
            let mut h = step;
            while h > 1e-13 {
                for k in -20..=20 {
                    let t = th + k as f64 * h / 10.0;
                    let w = g(t);
                    if w < v {
                        v = w;
                        th = t;
                    }
                }
                h /= 10.0;
            }
            v
        })
        .fold(f64::INFINITY, f64::min)
        * sign
}

/// Extremum of f on S²: Fibonacci lattice, then shrinking tangent-plane grids.
fn sphere_extremum(f: impl Fn(&[f64]) -> f64, sign: f64) -> f64 {
    let g = |z: &[f64]| sign * f(z);
    let golden = PI * (3.0 - 5f64.sqrt());
    let mut pts: Vec<(f64, [f64; 3])> = (0..GRID)
        .map(|i| {
            let y = 1.0 - 2.0 * (i as f64 + 0.5) / GRID as f64;
            let r = (1.0 - y * y).sqrt();
            let th = golden * i as f64;
            let p = [r * th.cos(), y, r * th.sin()];
            (g(&p), p)
        })
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.truncate(20);
    pts.into_iter()
        .map(|(mut v, mut p)| {
            let mut h = 0.02;
            while h > 1e-11 {
                let (a, b) = tangent_basis(&p);
                let mut improved = true;
                while improved {
                    improved = false;
                    for i in -10..=10 {
                        for j in -10..=10 {
                            let (s, t) = (i as f64 * h / 10.0, j as f64 * h / 10.0);
                            let q = [p[0] + s * a[0] + t * b[0], p[1] + s * a[1] + t * b[1], p[2] + s * a[2] + t * b[2]];
                            let w = g(&q);
                            if w < v {
                                v = w;
                                p = q;
                                improved = true;
                            }
                        }
                    }
                }
                h /= 5.0;
            }
            v
        })
        .fold(f64::INFINITY, f64::min)
        * sign
}

fn tangent_basis(p: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    let u = [p[0] / r, p[1] / r, p[2] / r];
    let seed = if u[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = seed[0] * u[0] + seed[1] * u[1] + seed[2] * u[2];
    let mut a = [seed[0] - d * u[0], seed[1] - d * u[1], seed[2] - d * u[2]];
    let na = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    a.iter_mut().for_each(|v| *v /= na);
    let b = [u[1] * a[2] - u[2] * a[1], u[2] * a[0] - u[0] * a[2], u[0] * a[1] - u[1] * a[0]];
    (a, b)
}

fn extremum(body: &ConvexBody, e: &Subspace, sign: f64) -> f64 {
    let f = |z: &[f64]| section_norm(body, e, z);
    match e.dim() {
        2 => circle_extremum(f, sign),
        3 => sphere_extremum(f, sign),
        l => panic!("grid oracle covers l ≤ 3, got {l}"),
    }
}

/// Worst relative disagreement between optimizer and grid search over
/// 25 planar and 25 three-dimensional Haar sections, for the diameter
/// and the inradius.
pub fn max_relative_error(body: &ConvexBody, seed: u64) -> (f64, f64) {
    let n = body.dim();
    let cfg = SphereOptConfig::default();
    let root = SeedSpec::new(seed);
    let mut sections = grassmannian_samples(n, 2, 25, &root.child("l", 2)).unwrap();
    sections.extend(grassmannian_samples(n, 3, 25, &root.child("l", 3)).unwrap());
    let (mut worst_diam, mut worst_inr) = (0.0f64, 0.0f64);
    for (j, e) in sections.iter().enumerate() {
        let s = root.child("restarts", j as u64);
        let diam = section_diameter(body, e, &cfg, &s).unwrap().value;
        let inr = section_inradius(body, e, &cfg, &s).unwrap().value;
        let diam_grid = 2.0 / extremum(body, e, 1.0);
        let inr_grid = 1.0 / extremum(body, e, -1.0);
        worst_diam = worst_diam.max((diam - diam_grid).abs() / diam_grid);
        worst_inr = worst_inr.max((inr - inr_grid).abs() / inr_grid);
    }
    (worst_diam, worst_inr)
}

