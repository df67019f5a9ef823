//! Centrally symmetric convex bodies given by their norms, and Gaussian
//! measures of their dilates.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::estimate::EstimateCI;
use crate::sampling::{chunked_map, gaussian_vector, SeedSpec};
use crate::special::{ln_chi2_cdf, ln_normal_interval};

pub type NormFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

#[derive(Clone)]
pub enum BodyKind {
    /// Unit ball of ℓ_p^n, `p` in [1, ∞].
    LpBall { p: f64, n: usize },
    /// Black-box norm evaluator.
    NormOracle { n: usize, evaluator: Arc<NormFn> },
}

impl fmt::Debug for BodyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyKind::LpBall { p, n } => write!(f, "LpBall {{ p: {p}, n: {n} }}"),
            BodyKind::NormOracle { n, .. } => write!(f, "NormOracle {{ n: {n} }}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvexBody {
    kind: BodyKind,
    description: String,
}

impl ConvexBody {
    pub fn lp(p: f64, n: usize) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(ConvexBody {
            kind: BodyKind::LpBall { p, n },
            description: lp_spec(p, n),
        })
    }

    /// ℓ∞ ball.
    pub fn cube(n: usize) -> Result<Self> {
        Self::lp(f64::INFINITY, n)
    }

    /// ℓ1 ball.
    pub fn cross_polytope(n: usize) -> Result<Self> {
        Self::lp(1.0, n)
    }

    pub fn euclidean(n: usize) -> Result<Self> {
        Self::lp(2.0, n)
    }

    /// Wrap a norm evaluator after sampled-point sanity checks.
    ///
    /// Rejects evaluators that vanish on a nonzero test vector (degenerate
    /// "bodies" such as a slab R^{n-1} × [-1, 1]), and those that fail
    /// homogeneity or the triangle inequality on a few hundred points.
    pub fn oracle<F>(n: usize, description: &str, evaluator: F, seed: &SeedSpec) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        let body = ConvexBody {
            kind: BodyKind::NormOracle { n, evaluator: Arc::new(evaluator) },
            description: description.to_string(),
        };
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            let v = body.eval(&e);
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::NotANorm(format!("norm of e_{} is {v}", i + 1)));
            }
        }
        body.check_norm_axioms(256, seed)?;
        Ok(body)
    }

    pub fn kind(&self) -> &BodyKind {
        &self.kind
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            BodyKind::LpBall { n, .. } | BodyKind::NormOracle { n, .. } => *n,
        }
    }

    pub fn lp_exponent(&self) -> Option<f64> {
        match &self.kind {
            BodyKind::LpBall { p, .. } => Some(*p),
            BodyKind::NormOracle { .. } => None,
        }
    }

    pub fn is_euclidean(&self) -> bool {
        self.lp_exponent() == Some(2.0)
    }

    pub fn is_cube(&self) -> bool {
        self.lp_exponent() == Some(f64::INFINITY)
    }

    /// Canonical spec string (`lp:<p>:<n>` for ℓp balls).
    pub fn spec(&self) -> String {
        match &self.kind {
            BodyKind::LpBall { p, n } => lp_spec(*p, *n),
            BodyKind::NormOracle { n, .. } => format!("oracle:{}:{n}", self.description),
        }
    }

    /// ‖x‖_K with a dimension check.
    pub fn norm(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(self.eval(x))
    }

    /// ‖x‖_K without the dimension check.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.kind {
            BodyKind::LpBall { p, .. } => lp_norm(*p, x),
            BodyKind::NormOracle { evaluator, .. } => evaluator(x),
        }
    }

    /// b(K) = max of the norm on S^{n-1}, when known in closed form.
    pub fn lipschitz_constant(&self) -> Option<f64> {
        match &self.kind {
            BodyKind::LpBall { p, n } => Some(if *p <= 2.0 {
                (*n as f64).powf(1.0 / p - 0.5)
            } else {
                1.0
            }),
            BodyKind::NormOracle { .. } => None,
        }
    }

    /// Minimum of the norm on S^{n-1}, when known in closed form.
    pub fn min_on_sphere(&self) -> Option<f64> {
        match &self.kind {
            BodyKind::LpBall { p, n } => Some(if *p >= 2.0 {
                (*n as f64).powf(1.0 / p - 0.5)
            } else {
                1.0
            }),
            BodyKind::NormOracle { .. } => None,
        }
    }

    /// Whether the norm is differentiable away from the origin, so gradient
    /// methods need no smoothing.
    pub fn is_smooth(&self) -> bool {
        match &self.kind {
            BodyKind::LpBall { p, .. } => *p > 1.0 && p.is_finite(),
            BodyKind::NormOracle { .. } => true,
        }
    }

    /// Value and gradient of a smoothed norm at `x`, written into `grad`.
    ///
    /// `mu` is an absolute smoothing width; `mu = 0` gives the exact norm
    /// and a subgradient. Only ℓ1 and ℓ∞ are actually smoothed. Oracles
    /// use central differences.
    pub fn smoothed(&self, x: &[f64], mu: f64, grad: &mut [f64]) -> f64 {
        match &self.kind {
            BodyKind::LpBall { p, .. } => lp_smoothed(*p, x, mu, grad),
            BodyKind::NormOracle { evaluator, .. } => {
                let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
                let h = 1e-6 * scale;
                let mut y = x.to_vec();
                for i in 0..x.len() {
                    let xi = y[i];
                    y[i] = xi + h;
                    let up = evaluator(&y);
                    y[i] = xi - h;
                    let down = evaluator(&y);
                    y[i] = xi;
                    grad[i] = (up - down) / (2.0 * h);
                }
                evaluator(x)
            }
        }
    }

    /// Sampled check of positivity, homogeneity and the triangle
    /// inequality, relative tolerance 1e-9.
    pub fn check_norm_axioms(&self, pairs: usize, seed: &SeedSpec) -> Result<()> {
        let n = self.dim();
        let failures: Vec<Option<String>> = chunked_map(seed, pairs, |rng, idx| {
            let x = gaussian_vector(rng, n);
            let y = gaussian_vector(rng, n);
            let lambda: f64 = rng.random_range(-3.0..3.0);
            let nx = self.eval(&x);
            let ny = self.eval(&y);
            let tol = 1e-9;
            if !(nx > 0.0 && nx.is_finite()) {
                return Some(format!("pair {}: norm {nx} at a nonzero vector", idx.global()));
            }
            let scaled: Vec<f64> = x.iter().map(|v| lambda * v).collect();
            let ns = self.eval(&scaled);
            if (ns - lambda.abs() * nx).abs() > tol * (lambda.abs() * nx).max(1e-300) {
                return Some(format!("pair {}: homogeneity fails", idx.global()));
            }
            let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            if self.eval(&sum) > (nx + ny) * (1.0 + tol) {
                return Some(format!("pair {}: triangle inequality fails", idx.global()));
            }
            let zero = vec![0.0; n];
            if self.eval(&zero) != 0.0 {
                return Some("norm of the zero vector is not 0".into());
            }
            None
        });
        match failures.into_iter().flatten().next() {
            Some(msg) => Err(Error::NotANorm(msg)),
            None => Ok(()),
        }
    }
}

impl FromStr for ConvexBody {
    type Err = Error;

    /// Parses `lp:<p>:<n>`; `p` may be `inf`.
    fn from_str(spec: &str) -> Result<Self> {
        let bad = |reason: &str| Error::BodySpec { spec: spec.to_string(), reason: reason.to_string() };
        let parts: Vec<&str> = spec.trim().split(':').collect();
        if parts.len() != 3 || parts[0] != "lp" {
            return Err(bad("expected lp:<p>:<n>"));
        }
        let p = match parts[1] {
            "inf" | "Inf" | "INF" | "∞" => f64::INFINITY,
            s => s.parse::<f64>().map_err(|_| bad("p is not a number"))?,
        };
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        let n = parts[2].parse::<usize>().map_err(|_| bad("n is not a positive integer"))?;
        if n == 0 {
            return Err(bad("n is not a positive integer"));
        }
        ConvexBody::lp(p, n)
    }
}

fn lp_spec(p: f64, n: usize) -> String {
    if p.is_infinite() {
        format!("lp:inf:{n}")
    } else {
        format!("lp:{p}:{n}")
    }
}

fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// ℓp norm scaled by the largest coordinate so that large n or p cannot
/// overflow.
fn lp_norm(p: f64, x: &[f64]) -> f64 {
    if p == 1.0 {
        return x.iter().map(|v| v.abs()).sum();
    }
    if p.is_infinite() {
        return max_abs(x);
    }
    if p == 2.0 {
        let m = max_abs(x);
        if m == 0.0 {
            return 0.0;
        }
        return m * x.iter().map(|v| (v / m).powi(2)).sum::<f64>().sqrt();
    }
    let m = max_abs(x);
    if m == 0.0 {
        return 0.0;
    }
    m * x.iter().map(|v| (v.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
}

fn lp_smoothed(p: f64, x: &[f64], mu: f64, grad: &mut [f64]) -> f64 {
    if p == 1.0 {
        if mu > 0.0 {
            let mut value = 0.0;
            for (g, &v) in grad.iter_mut().zip(x) {
                let r = (v * v + mu * mu).sqrt();
                value += r - mu;
                *g = v / r;
            }
            return value;
        }
        for (g, &v) in grad.iter_mut().zip(x) {
            *g = if v > 0.0 {
                1.0
            } else if v < 0.0 {
                -1.0
            } else {
                0.0
            };
        }
        return x.iter().map(|v| v.abs()).sum();
    }
    if p.is_infinite() {
        let m = max_abs(x);
        if mu > 0.0 {
            let mut total = 0.0;
            // exp underflows to exactly 0 below this; skipping is lossless
            const UNDERFLOW: f64 = -746.0;
            let inv = 1.0 / mu;
            for (g, &v) in grad.iter_mut().zip(x) {
                let (a, b) = ((v - m) * inv, (-v - m) * inv);
                let up = if a < UNDERFLOW { 0.0 } else { a.exp() };
                let down = if b < UNDERFLOW { 0.0 } else { b.exp() };
                total += up + down;
                *g = up - down;
            }
            grad.iter_mut().for_each(|g| *g /= total);
            return m + mu * total.ln();
        }
        grad.iter_mut().for_each(|g| *g = 0.0);
        if let Some((i, v)) = x
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        {
            if *v != 0.0 {
                grad[i] = v.signum();
            }
        }
        return m;
    }
    let norm = lp_norm(p, x);
    if norm == 0.0 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        return 0.0;
    }
    for (g, &v) in grad.iter_mut().zip(x) {
        *g = v.signum() * (v.abs() / norm).powf(p - 1.0);
    }
    norm
}

/// How γ(scale·K) is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaussianMethod {
    /// Product of one-dimensional normal interval probabilities.
    AnalyticCube,
    /// Radial chi-square integral.
    AnalyticEuclideanBall,
    MonteCarlo { samples: usize },
}

/// ln γ(scale·K) for bodies with a closed form (cube, Euclidean ball).
pub fn ln_gaussian_measure(body: &ConvexBody, scale: f64, method: GaussianMethod) -> Result<f64> {
    if scale.is_nan() || scale < 0.0 {
        return Err(Error::InvalidArgument(format!("scale must be ≥ 0 (got {scale})")));
    }
    let n = body.dim();
    match method {
        GaussianMethod::AnalyticCube if body.is_cube() => {
            if scale == 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            Ok(n as f64 * ln_normal_interval(scale))
        }
        GaussianMethod::AnalyticEuclideanBall if body.is_euclidean() => {
            Ok(ln_chi2_cdf(n, scale * scale))
        }
        GaussianMethod::AnalyticCube => Err(Error::IncompatibleMethod {
            method: "analytic cube",
            body: body.spec(),
        }),
        GaussianMethod::AnalyticEuclideanBall => Err(Error::IncompatibleMethod {
            method: "analytic euclidean-ball",
            body: body.spec(),
        }),
        GaussianMethod::MonteCarlo { .. } => Err(Error::IncompatibleMethod {
            method: "log-space monte carlo",
            body: body.spec(),
        }),
    }
}

/// The analytic method matching `body`, if it has one.
pub fn analytic_method(body: &ConvexBody) -> Option<GaussianMethod> {
    if body.is_cube() {
        Some(GaussianMethod::AnalyticCube)
    } else if body.is_euclidean() {
        Some(GaussianMethod::AnalyticEuclideanBall)
    } else {
        None
    }
}

/// γ(scale·K) as an estimate. Analytic paths report zero stderr.
pub fn gaussian_measure(
    body: &ConvexBody,
    scale: f64,
    method: GaussianMethod,
    seed: &SeedSpec,
) -> Result<EstimateCI> {
    if scale.is_nan() || scale < 0.0 {
        return Err(Error::InvalidArgument(format!("scale must be ≥ 0 (got {scale})")));
    }
    match method {
        GaussianMethod::MonteCarlo { samples } => {
            if samples == 0 {
                return Err(Error::InvalidArgument("samples must be positive".into()));
            }
            if scale == 0.0 {
                return Ok(EstimateCI::analytic(0.0, seed));
            }
            let n = body.dim();
            let hits: usize = chunked_map(seed, samples, |rng, _| {
                let g = gaussian_vector(rng, n);
                (body.eval(&g) <= scale) as usize
            })
            .into_iter()
            .sum();
            Ok(EstimateCI::bernoulli(hits, samples, seed))
        }
        analytic => {
            let ln = ln_gaussian_measure(body, scale, analytic)?;
            Ok(EstimateCI::analytic(ln.exp(), seed))
        }
    }
}

/// Two-sided bound on σ(S^{n-1} ∩ tK) from Gaussian measures of dilates,
/// R = |g| being independent of g/|g|:
///
/// γ(t·r·K) − γ(r·Dⁿ) ≤ σ(S^{n-1} ∩ tK) ≤ γ(t·ρ·K) / γ(ρ·Dⁿ)
///
/// for every r, ρ > 0. The classical choice is r = √n/2, ρ = 2√n.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TransferBracket {
    /// ln γ(t·(√n/2)·K), the lower end with the ball remainder dropped.
    pub ln_lower: f64,
    /// Best rigorous lower end over r, when positive.
    pub ln_lower_rigorous: Option<f64>,
    /// Best upper end over ρ, capped at 0.
    pub ln_upper: f64,
    pub upper_radius: f64,
    /// ln γ(√n/2 · Dⁿ), the remainder dropped from `ln_lower`.
    pub ln_ball_remainder: f64,
}

impl TransferBracket {
    pub fn lower(&self) -> f64 {
        self.ln_lower.exp()
    }

    pub fn upper(&self) -> f64 {
        self.ln_upper.exp()
    }

    /// Geometric mean of the endpoints, in log space.
    pub fn ln_center(&self) -> f64 {
        0.5 * (self.ln_lower + self.ln_upper)
    }

    pub fn contains(&self, p: f64, slack: f64) -> bool {
        p >= self.lower() - slack && p <= self.upper() + slack
    }
}

/// ln(e^a − e^b) for a > b.
fn ln_diff(a: f64, b: f64) -> Option<f64> {
    if a > b {
        Some(a + (-(b - a).exp()).ln_1p())
    } else {
        None
    }
}

pub fn transfer_bracket(body: &ConvexBody, t: f64) -> Result<TransferBracket> {
    let method = analytic_method(body).ok_or(Error::IncompatibleMethod {
        method: "transfer bracket",
        body: body.spec(),
    })?;
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("threshold must be positive (got {t})")));
    }
    let n = body.dim();
    let sqrt_n = (n as f64).sqrt();
    let ln_gamma_body = |r: f64| ln_gaussian_measure(body, t * r, method);
    let ln_gamma_ball = |r: f64| ln_chi2_cdf(n, r * r);

    let ln_lower = ln_gamma_body(0.5 * sqrt_n)?;
    let ln_ball_remainder = ln_gamma_ball(0.5 * sqrt_n);

    let grid = 480;
    let mut ln_upper = ln_gamma_body(2.0 * sqrt_n)? - ln_gamma_ball(2.0 * sqrt_n);
    let mut upper_radius = 2.0 * sqrt_n;
    let mut ln_lower_rigorous: Option<f64> = None;
    for i in 0..=grid {
        // radii from √n/8 to 8√n, log-spaced
        let r = sqrt_n * (2f64).powf(-3.0 + 6.0 * i as f64 / grid as f64);
        let gb = ln_gamma_body(r)?;
        let gd = ln_gamma_ball(r);
        let up = gb - gd;
        if up < ln_upper {
            ln_upper = up;
            upper_radius = r;
        }
        if let Some(lo) = ln_diff(gb, gd) {
            ln_lower_rigorous = Some(ln_lower_rigorous.map_or(lo, |cur: f64| cur.max(lo)));
        }
    }
    Ok(TransferBracket {
        ln_lower,
        ln_lower_rigorous,
        ln_upper: ln_upper.min(0.0),
        upper_radius,
        ln_ball_remainder,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_eval_examples() {
        let x = [1.0, -2.0, 3.0];
        assert_eq!(ConvexBody::cross_polytope(3).unwrap().norm(&x).unwrap(), 6.0);
        assert_eq!(ConvexBody::cube(3).unwrap().norm(&x).unwrap(), 3.0);
        let e = ConvexBody::euclidean(5).unwrap();
        let u = [0.6, 0.0, -0.8, 0.0, 0.0];
        assert!((e.norm(&u).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(
            e.norm(&x),
            Err(Error::DimensionMismatch { expected: 5, got: 3 })
        );
    }

    #[test]
    fn general_p_matches_naive_and_survives_large_values() {
        let x = [0.3, -1.2, 2.5, 0.0];
        let p = 3.5;
        let naive = x.iter().map(|v: &f64| v.abs().powf(p)).sum::<f64>().powf(1.0 / p);
        let b = ConvexBody::lp(p, 4).unwrap();
        assert!((b.eval(&x) - naive).abs() < 1e-14 * naive);
        let big = [1e200, 1e200, 0.0, 0.0];
        let v = b.eval(&big);
        assert!((v / 1e200 - 2f64.powf(1.0 / p)).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_constants() {
        assert!((ConvexBody::cross_polytope(4).unwrap().lipschitz_constant().unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(ConvexBody::cube(100).unwrap().lipschitz_constant(), Some(1.0));
        assert_eq!(ConvexBody::euclidean(7).unwrap().lipschitz_constant(), Some(1.0));
        assert_eq!(ConvexBody::cube(16).unwrap().min_on_sphere(), Some(0.25));
    }

    #[test]
    fn spec_parsing() {
        let b: ConvexBody = "lp:inf:256".parse().unwrap();
        assert!(b.is_cube());
        assert_eq!(b.dim(), 256);
        assert_eq!(b.spec(), "lp:inf:256");
        let c: ConvexBody = "lp:1.5:10".parse().unwrap();
        assert_eq!(c.spec(), "lp:1.5:10");
        let err = "lp:0.5:10".parse::<ConvexBody>().unwrap_err();
        assert_eq!(err.to_string(), "p must be ≥ 1 (got 0.5)");
        assert!("lp:2".parse::<ConvexBody>().is_err());
        assert!("lp:2:0".parse::<ConvexBody>().is_err());
        assert!("ball:2:3".parse::<ConvexBody>().is_err());
    }

    #[test]
    fn degenerate_oracle_rejected() {
        // the slab norm |(x_1, …, x_{n-1})| vanishes on e_n
        let r = ConvexBody::oracle(
            4,
            "slab",
            |x: &[f64]| x[..3].iter().map(|v| v * v).sum::<f64>().sqrt(),
            &SeedSpec::new(1),
        );
        assert!(matches!(r, Err(Error::NotANorm(_))));
        // a weighted ℓ2 norm is fine
        let ok = ConvexBody::oracle(
            4,
            "ellipsoid",
            |x: &[f64]| x.iter().enumerate().map(|(i, v)| (i as f64 + 1.0) * v * v).sum::<f64>().sqrt(),
            &SeedSpec::new(1),
        );
        assert!(ok.is_ok());
        assert_eq!(ok.unwrap().lipschitz_constant(), None);
    }

    #[test]
    fn non_convex_oracle_rejected() {
        // ℓ_{1/2} quasi-norm breaks the triangle inequality
        let r = ConvexBody::oracle(
            3,
            "half",
            |x: &[f64]| x.iter().map(|v| v.abs().sqrt()).sum::<f64>().powi(2),
            &SeedSpec::new(2),
        );
        assert!(matches!(r, Err(Error::NotANorm(_))));
    }

    #[test]
    fn smoothed_gradients_match_finite_differences() {
        let x = [0.3, -0.7, 0.1, 0.65];
        for (p, mu) in [(1.0, 0.05), (f64::INFINITY, 0.05), (3.0, 0.0), (1.5, 0.0)] {
            let b = ConvexBody::lp(p, 4).unwrap();
            let mut g = [0.0; 4];
            b.smoothed(&x, mu, &mut g);
            for i in 0..4 {
                let h = 1e-6;
                let mut up = x;
                up[i] += h;
                let mut dn = x;
                dn[i] -= h;
                let mut scratch = [0.0; 4];
                let fd = (b.smoothed(&up, mu, &mut scratch) - b.smoothed(&dn, mu, &mut scratch)) / (2.0 * h);
                assert!((fd - g[i]).abs() < 1e-6, "p={p} i={i} fd={fd} g={}", g[i]);
            }
        }
    }

    #[test]
    fn gaussian_cube_n2_unit_scale() {
        let cube = ConvexBody::cube(2).unwrap();
        let g = gaussian_measure(&cube, 1.0, GaussianMethod::AnalyticCube, &SeedSpec::new(0)).unwrap();
        // (2Φ(1) − 1)²
        assert!((g.value - 0.682_689_492_137_086f64.powi(2)).abs() < 1e-12);
        assert!((g.value - 0.46607).abs() < 5.1e-6);
        assert_eq!(g.stderr, 0.0);
    }

    #[test]
    fn gaussian_measure_edges() {
        let s = SeedSpec::new(0);
        let ball = ConvexBody::euclidean(1).unwrap();
        for m in [GaussianMethod::AnalyticEuclideanBall, GaussianMethod::MonteCarlo { samples: 100 }] {
            assert_eq!(gaussian_measure(&ball, 0.0, m, &s).unwrap().value, 0.0);
        }
        let big = gaussian_measure(&ball, 1e3, GaussianMethod::AnalyticEuclideanBall, &s).unwrap();
        assert_eq!(big.value, 1.0);
        let l1 = ConvexBody::cross_polytope(3).unwrap();
        assert!(matches!(
            gaussian_measure(&l1, 1.0, GaussianMethod::AnalyticCube, &s),
            Err(Error::IncompatibleMethod { .. })
        ));
        assert!(gaussian_measure(&ball, -1.0, GaussianMethod::AnalyticEuclideanBall, &s).is_err());
    }

    #[test]
    fn transfer_bracket_orders_endpoints() {
        for n in [16, 64, 256] {
            let cube = ConvexBody::cube(n).unwrap();
            let t = 0.9 / (n as f64).sqrt().sqrt();
            let b = transfer_bracket(&cube, t).unwrap();
            assert!(b.ln_lower <= b.ln_upper);
            // the optimized upper end is never worse than the classical ρ = 2√n
            let classical = ln_gaussian_measure(&cube, 2.0 * t * (n as f64).sqrt(), GaussianMethod::AnalyticCube).unwrap()
                - ln_chi2_cdf(n, 4.0 * n as f64);
            assert!(b.ln_upper <= classical.min(0.0) + 1e-12);
            if let Some(r) = b.ln_lower_rigorous {
                assert!(r <= b.ln_upper);
            }
        }
    }
}
