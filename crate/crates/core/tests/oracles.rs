//! Monte Carlo estimators against closed forms computed independently here.

use std::f64::consts::{PI, SQRT_2};

use dvlab::bodies::{gaussian_measure, transfer_bracket};
use dvlab::estimators::{estimate_m, estimate_median, negative_moment, sphere_norms};
use dvlab::sampling::{grassmannian_samples, sphere_points};
use dvlab::sections::diameter_lk_average;
use dvlab::optimize::SphereOptConfig;
use dvlab::{ConvexBody, GaussianMethod, SeedSpec};

fn within_sigmas(value: f64, stderr: f64, truth: f64, k: f64) -> bool {
    (value - truth).abs() <= k * stderr
}

#[test]
fn mean_norm_of_planar_cross_polytope() {
    // mean of |cos θ| + |sin θ|
    let est = estimate_m(&ConvexBody::cross_polytope(2).unwrap(), 1_000_000, &SeedSpec::new(1)).unwrap();
    let truth = 4.0 / PI;
    assert!(within_sigmas(est.value, est.stderr, truth, 4.0), "{} ± {} vs {truth}", est.value, est.stderr);
}

#[test]
fn mean_norm_of_planar_cube() {
    // mean of max(|cos θ|, |sin θ|) = (4/π)·sin(π/4)
    let est = estimate_m(&ConvexBody::cube(2).unwrap(), 1_000_000, &SeedSpec::new(2)).unwrap();
    let truth = 2.0 * SQRT_2 / PI;
    assert!(within_sigmas(est.value, est.stderr, truth, 4.0), "{} ± {} vs {truth}", est.value, est.stderr);
}

#[test]
fn median_of_planar_cross_polytope() {
    // ‖x‖₁ = √2·sin φ with φ uniform on [π/4, π/2] by symmetry
    let est = estimate_median(&ConvexBody::cross_polytope(2).unwrap(), 200_000, &SeedSpec::new(3)).unwrap();
    let truth = SQRT_2 * (3.0 * PI / 8.0).sin();
    assert!((truth - 1.30656).abs() < 1e-5);
    assert!((est.value - truth).abs() < 5e-3, "{} vs {truth}", est.value);
    assert!(est.stderr > 0.0 && est.stderr < 5e-3);
}

#[test]
fn cube_gaussian_measure_analytic_vs_sampled() {
    let cube = ConvexBody::cube(2).unwrap();
    let seed = SeedSpec::new(4);
    let phi = |s: f64| 0.5 * (1.0 + libm::erf(s / SQRT_2));
    let truth = (2.0 * phi(1.0) - 1.0).powi(2);
    let exact = gaussian_measure(&cube, 1.0, GaussianMethod::AnalyticCube, &seed).unwrap();
    assert!((exact.value - truth).abs() < 1e-14);
    let mc = gaussian_measure(&cube, 1.0, GaussianMethod::MonteCarlo { samples: 1_000_000 }, &seed).unwrap();
    assert!(within_sigmas(mc.value, mc.stderr, truth, 4.0), "{} ± {}", mc.value, mc.stderr);
}

#[test]
fn euclidean_ball_gaussian_measure_is_chi_square() {
    // n = 2: P(|g|² ≤ s²) = 1 − exp(−s²/2)
    let ball = ConvexBody::euclidean(2).unwrap();
    let seed = SeedSpec::new(5);
    for s in [0.3, 1.0, 2.5] {
        let e = gaussian_measure(&ball, s, GaussianMethod::AnalyticEuclideanBall, &seed).unwrap();
        assert!((e.value - (1.0 - (-s * s / 2.0).exp())).abs() < 1e-12);
    }
}

#[test]
fn bracket_holds_for_sampled_cube_probability() {
    let cube = ConvexBody::cube(16).unwrap();
    let norms = sphere_norms(&cube, 200_000, &SeedSpec::new(6)).unwrap();
    for t in [0.4, 0.5, 0.6] {
        let br = transfer_bracket(&cube, t).unwrap();
        let p = norms.iter().filter(|&&v| v <= t).count() as f64 / norms.len() as f64;
        let slack = 4.0 * (p * (1.0 - p) / norms.len() as f64).sqrt() + 1e-12;
        assert!(p <= br.upper() + slack, "t={t}: {p} > {}", br.upper());
        assert!(br.lower() <= p + br.ln_ball_remainder.exp() + slack, "t={t}");
        if let Some(lo) = br.ln_lower_rigorous {
            assert!(lo.exp() <= p + slack, "t={t}");
        }
    }
}

/// Kolmogorov–Smirnov distance between a sample and the uniform law on [−1, 1].
fn ks_uniform(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = (x + 1.0) / 2.0;
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn sphere_coordinates_are_uniform_in_three_dimensions() {
    // on S² each coordinate is uniform on [−1, 1]
    let count = 20_000;
    let pts = sphere_points(3, count, &SeedSpec::new(7)).unwrap();
    let crit = 1.95 / (count as f64).sqrt(); // α = 0.001
    for j in 0..3 {
        let d = ks_uniform(pts.iter().map(|p| p[j]).collect());
        assert!(d < crit, "coordinate {j}: D = {d}");
    }
}

#[test]
fn haar_lines_are_uniform_directions() {
    let count = 20_000;
    let lines = grassmannian_samples(3, 1, count, &SeedSpec::new(8)).unwrap();
    let crit = 1.95 / (count as f64).sqrt();
    let d = ks_uniform(lines.iter().map(|e| e.column(0)[2]).collect());
    assert!(d < crit, "D = {d}");
}

#[test]
fn line_diameter_average_is_a_norm_moment() {
    // for l = 1, diam(K ∩ ℝu) = 2/‖u‖ with u uniform on the sphere
    let body = ConvexBody::lp(1.5, 12).unwrap();
    let seed = SeedSpec::new(9);
    let count = 500;
    let avg = diameter_lk_average(&body, 1, count, &SphereOptConfig::default(), &seed).unwrap();
    let lines = grassmannian_samples(12, 1, count, &seed).unwrap();
    let direct = lines.iter().map(|e| 2.0 / body.eval(e.column(0))).sum::<f64>() / count as f64;
    assert!((avg.estimate.value - direct).abs() < 1e-12, "{} vs {direct}", avg.estimate.value);
}

#[test]
fn negative_moment_of_the_ball_is_one() {
    let e = negative_moment(&ConvexBody::euclidean(9).unwrap(), 3.0, 1000, &SeedSpec::new(10)).unwrap();
    assert!((e.value - 1.0).abs() < 1e-12);
}
