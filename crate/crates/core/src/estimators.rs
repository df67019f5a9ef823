//! Estimators of the scalar functionals of a body on the uniform sphere:
//! average and median norm, Lipschitz constant, Dvoretzky dimension,
//! small-ball probabilities, critical dimension d_u(K), and moments of the
//! norm.
//!
//! Estimators that share a seed share their sphere sample, so quantities
//! computed from the same seed obey sample-level inequalities exactly
//! (e.g. the power-mean chain).

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bodies::{transfer_bracket, ConvexBody, TransferBracket};
use crate::error::{Error, Result};
use crate::estimate::{mean_and_stderr, power_mean, EstimateCI, Flag, Method};
use crate::optimize::{maximize_on_sphere, SphereObjective, SphereOptConfig};
use crate::sampling::{chunk_seed, chunked_map, sphere_point, subspace_sphere_point, SeedSpec, Subspace, CHUNK_SIZE};

/// Default u of d_u(K); u = 2 is d(K).
pub const DEFAULT_U: f64 = 2.0;
/// Minimum hit count for a direct Monte Carlo probability.
pub const DIRECT_MC_MIN_HITS: usize = 10;
/// Moment orders beyond this fraction of d̂ are flagged heavy-tailed.
pub const HEAVY_TAIL_FRACTION: f64 = 0.2;
pub const BOOTSTRAP_RESAMPLES: usize = 100;

/// One-sided 95% Poisson upper limits for 0..=9 observed events.
const POISSON_UPPER_95: [f64; 10] =
    [2.996, 4.744, 6.296, 7.754, 9.154, 10.513, 11.842, 13.148, 14.435, 15.705];

fn require_samples(samples: usize, min: usize) -> Result<()> {
    if samples < min {
        return Err(Error::InvalidArgument(format!("need at least {min} samples (got {samples})")));
    }
    Ok(())
}

/// ‖x_i‖ for `samples` uniform sphere points drawn from `seed`.
pub fn sphere_norms(body: &ConvexBody, samples: usize, seed: &SeedSpec) -> Result<Vec<f64>> {
    require_samples(samples, 1)?;
    let n = body.dim();
    Ok(chunked_map(seed, samples, |rng, _| body.eval(&sphere_point(rng, n))))
}

pub fn m_from_norms(norms: &[f64], seed: &SeedSpec) -> EstimateCI {
    let (mean, se) = mean_and_stderr(norms);
    EstimateCI::monte_carlo(mean, se, norms.len(), seed)
}

/// M(K) = ∫ ‖x‖ dσ(x).
pub fn estimate_m(body: &ConvexBody, samples: usize, seed: &SeedSpec) -> Result<EstimateCI> {
    require_samples(samples, 1)?;
    if body.is_euclidean() {
        return Ok(EstimateCI::analytic(1.0, seed));
    }
    Ok(m_from_norms(&sphere_norms(body, samples, seed)?, seed))
}

fn median_of(values: &mut [f64]) -> f64 {
    let n = values.len();
    let mid = n / 2;
    let (_, upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let lower = values[..mid].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

pub fn median_from_norms(norms: &[f64], seed: &SeedSpec) -> EstimateCI {
    let mut copy = norms.to_vec();
    let med = median_of(&mut copy);
    let n = norms.len();
    let boots: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .into_par_iter()
        .map(|b| {
            let mut rng = seed.child("bootstrap", b as u64).rng();
            let mut resample: Vec<f64> = (0..n).map(|_| norms[rng.random_range(0..n)]).collect();
            median_of(&mut resample)
        })
        .collect();
    let (bm, _) = mean_and_stderr(&boots);
    let var = boots.iter().map(|x| (x - bm).powi(2)).sum::<f64>() / (boots.len() - 1) as f64;
    let mut est = EstimateCI::monte_carlo(med, var.sqrt(), n, seed);
    if est.stderr == 0.0 {
        // all resamples hit one order statistic; fall back to its spacing
        let mut sorted = norms.to_vec();
        sorted.sort_by(f64::total_cmp);
        let spacing = sorted.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        est.stderr = spacing.max(f64::MIN_POSITIVE);
    }
    est
}

/// Median of the norm on the sphere with a bootstrap standard error.
pub fn estimate_median(body: &ConvexBody, samples: usize, seed: &SeedSpec) -> Result<EstimateCI> {
    require_samples(samples, 100)?;
    if body.is_euclidean() {
        return Ok(EstimateCI::analytic(1.0, seed));
    }
    Ok(median_from_norms(&sphere_norms(body, samples, seed)?, seed))
}

/// What is known about b(K).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum LipschitzBound {
    Exact(f64),
    /// Best value found by multistart maximization; b ≥ this.
    HeuristicLowerBound(f64),
    Unknown,
}

impl LipschitzBound {
    pub fn value(&self) -> Option<f64> {
        match self {
            LipschitzBound::Exact(b) | LipschitzBound::HeuristicLowerBound(b) => Some(*b),
            LipschitzBound::Unknown => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, LipschitzBound::Exact(_))
    }
}

struct FullSphere<'a>(&'a ConvexBody);

impl SphereObjective for FullSphere<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn value(&self, z: &[f64]) -> f64 {
        self.0.eval(z)
    }
    fn smoothed(&self, z: &[f64], mu: f64, grad: &mut [f64]) -> f64 {
        self.0.smoothed(z, mu, grad)
    }
    fn needs_smoothing(&self) -> bool {
        !self.0.is_smooth()
    }
}

/// Multistart maximization of the norm over S^{n-1}: a lower bound on b.
pub fn lipschitz_heuristic(body: &ConvexBody, cfg: &SphereOptConfig, seed: &SeedSpec) -> f64 {
    maximize_on_sphere(&FullSphere(body), cfg, seed).value
}

/// Exact b when available, otherwise the heuristic (if enabled).
pub fn lipschitz_bound(body: &ConvexBody, heuristic: Option<(&SphereOptConfig, &SeedSpec)>) -> LipschitzBound {
    match (body.lipschitz_constant(), heuristic) {
        (Some(b), _) => LipschitzBound::Exact(b),
        (None, Some((cfg, seed))) => LipschitzBound::HeuristicLowerBound(lipschitz_heuristic(body, cfg, seed)),
        (None, None) => LipschitzBound::Unknown,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyStats {
    pub n: usize,
    pub m: EstimateCI,
    pub median: EstimateCI,
    pub b: LipschitzBound,
}

pub fn body_stats(
    body: &ConvexBody,
    samples: usize,
    seed: &SeedSpec,
    heuristic: Option<(&SphereOptConfig, &SeedSpec)>,
) -> Result<BodyStats> {
    require_samples(samples, 100)?;
    let (m, median) = if body.is_euclidean() {
        (EstimateCI::analytic(1.0, seed), EstimateCI::analytic(1.0, seed))
    } else {
        let norms = sphere_norms(body, samples, seed)?;
        (m_from_norms(&norms, seed), median_from_norms(&norms, seed))
    };
    Ok(BodyStats { n: body.dim(), m, median, b: lipschitz_bound(body, heuristic) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DvoretzkyDimension {
    pub value: f64,
    /// b was a heuristic lower bound, so the value is an upper bound on k(K).
    pub heuristic: bool,
}

/// k(K) = n (M/b)².
pub fn dvoretzky_dimension(stats: &BodyStats) -> Result<DvoretzkyDimension> {
    let b = stats.b.value().ok_or(Error::LipschitzUnknown)?;
    Ok(DvoretzkyDimension {
        value: stats.n as f64 * (stats.m.value / b).powi(2),
        heuristic: !stats.b.is_exact(),
    })
}

/// A probability estimated at one grid level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityCell {
    /// Grid value (ε, t or u).
    pub level: f64,
    /// Norm threshold the event compares against.
    pub threshold: f64,
    pub hits: usize,
    pub estimate: EstimateCI,
    /// Upper confidence limit when the cell has fewer than the direct-MC
    /// minimum of hits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket: Option<TransferBracket>,
}

impl ProbabilityCell {
    pub fn is_direct(&self) -> bool {
        self.estimate.method == Method::Analytic || self.hits >= DIRECT_MC_MIN_HITS
    }
}

/// One-sided 95% Poisson upper limit on the probability of an event seen
/// `hits` times in `samples` draws.
pub fn poisson_upper_bound(hits: usize, samples: usize) -> f64 {
    let count = POISSON_UPPER_95
        .get(hits)
        .copied()
        .unwrap_or_else(|| hits as f64 + 1.645 * (hits as f64).sqrt() + 1.0);
    (count / samples as f64).min(1.0)
}

fn probability_cell(level: f64, threshold: f64, hits: usize, samples: usize, seed: &SeedSpec) -> ProbabilityCell {
    let mut estimate = EstimateCI::bernoulli(hits, samples, seed);
    let upper_bound = if hits < DIRECT_MC_MIN_HITS {
        estimate.flags.insert(Flag::RuleOfThree);
        Some(poisson_upper_bound(hits, samples))
    } else {
        None
    };
    ProbabilityCell { level, threshold, hits, estimate, upper_bound, bracket: None }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveRoute {
    DirectMC,
    GaussianSurrogate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallBallCurve {
    pub m: EstimateCI,
    pub route: CurveRoute,
    pub cells: Vec<ProbabilityCell>,
    /// Slope of ln σ vs ln ε over the directly estimated cells.
    pub fitted_exponent: Option<f64>,
}

impl SmallBallCurve {
    pub fn probabilities(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.estimate.value).collect()
    }
}

/// Least-squares slope of ys on xs.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// Least-squares slope of ys on xs through the origin.
pub fn fit_through_origin(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    if xs.is_empty() || sxx == 0.0 {
        return None;
    }
    Some(xs.iter().zip(ys).map(|(x, y)| x * y).sum::<f64>() / sxx)
}

fn check_eps(eps_grid: &[f64]) -> Result<()> {
    if eps_grid.is_empty() {
        return Err(Error::InvalidArgument("empty ε grid".into()));
    }
    if let Some(e) = eps_grid.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
        return Err(Error::InvalidArgument(format!("ε must lie in (0, 1) (got {e})")));
    }
    Ok(())
}

fn slope_of_cells(cells: &[ProbabilityCell]) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = cells
        .iter()
        .filter(|c| c.is_direct() && c.estimate.value > 0.0)
        .map(|c| (c.level.ln(), c.estimate.value.ln()))
        .unzip();
    fit_slope(&xs, &ys)
}

/// σ{‖x‖ < ε·M̂} on a grid, sharing one sphere sample across levels.
pub fn small_ball_from_norms(
    norms: &[f64],
    m: &EstimateCI,
    eps_grid: &[f64],
    seed: &SeedSpec,
) -> Result<SmallBallCurve> {
    check_eps(eps_grid)?;
    let cells: Vec<ProbabilityCell> = eps_grid
        .iter()
        .map(|&eps| {
            let threshold = eps * m.value;
            let hits = norms.iter().filter(|&&v| v < threshold).count();
            probability_cell(eps, threshold, hits, norms.len(), seed)
        })
        .collect();
    let fitted_exponent = slope_of_cells(&cells);
    Ok(SmallBallCurve { m: m.clone(), route: CurveRoute::DirectMC, cells, fitted_exponent })
}

pub fn small_ball_curve(
    body: &ConvexBody,
    m: &EstimateCI,
    eps_grid: &[f64],
    samples: usize,
    seed: &SeedSpec,
) -> Result<SmallBallCurve> {
    check_eps(eps_grid)?;
    require_samples(samples, 1)?;
    if body.is_euclidean() && m.method == Method::Analytic {
        // ‖x‖ ≡ M on the sphere
        let cells = eps_grid
            .iter()
            .map(|&eps| ProbabilityCell {
                level: eps,
                threshold: eps * m.value,
                hits: 0,
                estimate: EstimateCI::analytic(0.0, seed),
                upper_bound: None,
                bracket: None,
            })
            .collect();
        return Ok(SmallBallCurve { m: m.clone(), route: CurveRoute::DirectMC, cells, fitted_exponent: None });
    }
    let norms = sphere_norms(body, samples, seed)?;
    small_ball_from_norms(&norms, m, eps_grid, seed)
}

/// Surrogate estimate of σ{‖x‖ ≤ t} from the transfer bracket: value is
/// the geometric mean of the endpoints, stderr half the bracket width.
pub fn surrogate_probability(body: &ConvexBody, level: f64, t: f64, seed: &SeedSpec) -> Result<ProbabilityCell> {
    let bracket = transfer_bracket(body, t)?;
    let lo = bracket.lower();
    let hi = bracket.upper();
    let estimate = EstimateCI {
        value: bracket.ln_center().exp(),
        stderr: (0.5 * (hi - lo)).max(f64::MIN_POSITIVE),
        samples: 0,
        method: Method::HybridSurrogate,
        seed: seed.clone(),
        flags: Default::default(),
    };
    Ok(ProbabilityCell { level, threshold: t, hits: 0, estimate, upper_bound: None, bracket: Some(bracket) })
}

/// Small-ball curve via the analytic transfer bracket (cube, Euclidean ball).
pub fn small_ball_curve_surrogate(
    body: &ConvexBody,
    m: &EstimateCI,
    eps_grid: &[f64],
    seed: &SeedSpec,
) -> Result<SmallBallCurve> {
    check_eps(eps_grid)?;
    let cells = eps_grid
        .iter()
        .map(|&eps| surrogate_probability(body, eps, eps * m.value, seed))
        .collect::<Result<Vec<_>>>()?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = cells
        .iter()
        .map(|c| (c.level.ln(), c.bracket.as_ref().map_or(f64::NEG_INFINITY, |b| b.ln_center())))
        .filter(|(_, y)| y.is_finite())
        .unzip();
    let fitted_exponent = fit_slope(&xs, &ys);
    Ok(SmallBallCurve { m: m.clone(), route: CurveRoute::GaussianSurrogate, cells, fitted_exponent })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimensionRoute {
    /// The event {‖x‖ ≤ M/u} is empty; d = n exactly.
    EmptyEvent,
    DirectMC,
    GaussianSurrogate,
    /// −ln of an upper confidence limit: a lower bound on d.
    LowerBoundRuleOfThree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalDimension {
    pub u: f64,
    pub d: EstimateCI,
    pub route: DimensionRoute,
    pub m: EstimateCI,
    pub threshold: f64,
    pub hits: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket: Option<TransferBracket>,
}

/// d_u(K) = min{−ln σ{‖x‖ ≤ M/u}, n} from a sphere sample and a frozen M̂.
pub fn critical_dimension_from_norms(
    body: &ConvexBody,
    u: f64,
    m: &EstimateCI,
    norms: &[f64],
    seed: &SeedSpec,
) -> Result<CriticalDimension> {
    if !(u > 1.0) {
        return Err(Error::InvalidArgument(format!("u must exceed 1 (got {u})")));
    }
    let n = body.dim() as f64;
    let threshold = m.value / u;
    let base = |d: EstimateCI, route, hits, bracket| CriticalDimension {
        u,
        d,
        route,
        m: m.clone(),
        threshold,
        hits,
        bracket,
    };
    if body.min_on_sphere().is_some_and(|lo| threshold <= lo) {
        return Ok(base(EstimateCI::analytic(n, seed), DimensionRoute::EmptyEvent, 0, None));
    }
    let samples = norms.len();
    require_samples(samples, 1)?;
    let hits = norms.iter().filter(|&&v| v <= threshold).count();
    if hits >= DIRECT_MC_MIN_HITS {
        let p = hits as f64 / samples as f64;
        let se = ((1.0 - p) / (samples as f64 * p)).sqrt();
        let d = EstimateCI::monte_carlo((-p.ln()).min(n), se, samples, seed);
        return Ok(base(d, DimensionRoute::DirectMC, hits, None));
    }
    if body.is_cube() {
        let bracket = transfer_bracket(body, threshold)?;
        let center = -bracket.ln_center();
        let half_width = 0.5 * (bracket.ln_upper - bracket.ln_lower);
        let d = EstimateCI {
            value: center.min(n),
            stderr: half_width.max(f64::MIN_POSITIVE),
            samples: samples as u64,
            method: Method::HybridSurrogate,
            seed: seed.clone(),
            flags: Default::default(),
        };
        return Ok(base(d, DimensionRoute::GaussianSurrogate, hits, Some(bracket)));
    }
    let p_up = poisson_upper_bound(hits, samples);
    let se = ((1.0 - p_up) / (samples as f64 * p_up)).sqrt();
    let d = EstimateCI::monte_carlo((-p_up.ln()).min(n), se, samples, seed)
        .with_flag(Flag::RuleOfThree)
        .with_flag(Flag::HeuristicLowerBound);
    Ok(base(d, DimensionRoute::LowerBoundRuleOfThree, hits, None))
}

/// d_u(K); M̂ is estimated first on the same sample and frozen.
pub fn critical_dimension(body: &ConvexBody, u: f64, samples: usize, seed: &SeedSpec) -> Result<CriticalDimension> {
    if body.is_euclidean() {
        let m = EstimateCI::analytic(1.0, seed);
        return critical_dimension_from_norms(body, u, &m, &[], seed);
    }
    let norms = sphere_norms(body, samples, seed)?;
    let m = m_from_norms(&norms, seed);
    critical_dimension_from_norms(body, u, &m, &norms, seed)
}

fn moment_error(seed: &SeedSpec, index: usize) -> Error {
    Error::MomentOverflow {
        seed: chunk_seed(seed, index).to_string(),
        index: index % CHUNK_SIZE,
    }
}

/// (mean ‖x_i‖^{−l})^{−1/l}.
pub fn negative_moment_from_norms(norms: &[f64], l: f64, seed: &SeedSpec) -> Result<EstimateCI> {
    if !(l > 0.0) {
        return Err(Error::InvalidArgument(format!("moment order must be positive (got {l})")));
    }
    let (v, se) = power_mean(norms, -l).map_err(|i| moment_error(seed, i))?;
    Ok(EstimateCI::monte_carlo(v, se, norms.len(), seed))
}

/// (mean ‖x_i‖^{k})^{1/k}; k = 1 is exactly the sample mean.
pub fn positive_moment_from_norms(norms: &[f64], k: f64, seed: &SeedSpec) -> Result<EstimateCI> {
    if !(k > 0.0) {
        return Err(Error::InvalidArgument(format!("moment order must be positive (got {k})")));
    }
    if k == 1.0 {
        return Ok(m_from_norms(norms, seed));
    }
    let (v, se) = power_mean(norms, k).map_err(|i| moment_error(seed, i))?;
    Ok(EstimateCI::monte_carlo(v, se, norms.len(), seed))
}

/// exp(mean ln ‖x_i‖).
pub fn geometric_mean_from_norms(norms: &[f64], seed: &SeedSpec) -> Result<EstimateCI> {
    let (v, se) = power_mean(norms, 0.0).map_err(|i| moment_error(seed, i))?;
    Ok(EstimateCI::monte_carlo(v, se, norms.len(), seed))
}

pub fn negative_moment(body: &ConvexBody, l: f64, samples: usize, seed: &SeedSpec) -> Result<EstimateCI> {
    if !(l > 0.0) {
        return Err(Error::InvalidArgument(format!("moment order must be positive (got {l})")));
    }
    if body.is_euclidean() {
        return Ok(EstimateCI::analytic(1.0, seed));
    }
    negative_moment_from_norms(&sphere_norms(body, samples, seed)?, l, seed)
}

pub fn positive_moment(body: &ConvexBody, k: f64, samples: usize, seed: &SeedSpec) -> Result<EstimateCI> {
    if !(k > 0.0) {
        return Err(Error::InvalidArgument(format!("moment order must be positive (got {k})")));
    }
    if body.is_euclidean() {
        return Ok(EstimateCI::analytic(1.0, seed));
    }
    positive_moment_from_norms(&sphere_norms(body, samples, seed)?, k, seed)
}

pub fn geometric_mean(body: &ConvexBody, samples: usize, seed: &SeedSpec) -> Result<EstimateCI> {
    if body.is_euclidean() {
        return Ok(EstimateCI::analytic(1.0, seed));
    }
    geometric_mean_from_norms(&sphere_norms(body, samples, seed)?, seed)
}

/// Whether a moment of order `order` is beyond 0.2·d̂.
pub fn heavy_tail(order: f64, d: f64) -> bool {
    order > HEAVY_TAIL_FRACTION * d
}

/// Flag (and log) a moment estimate in the heavy-tail regime.
pub fn flag_heavy_tail(est: &mut EstimateCI, order: f64, d: f64) {
    if heavy_tail(order, d) {
        log::warn!("moment order {order} exceeds {HEAVY_TAIL_FRACTION}·d̂ = {:.3}", HEAVY_TAIL_FRACTION * d);
        est.flags.insert(Flag::HeavyTail);
    }
}

/// Norms of `samples` uniform points of S(E).
pub fn subspace_norms(body: &ConvexBody, subspace: &Subspace, samples: usize, seed: &SeedSpec) -> Result<Vec<f64>> {
    require_samples(samples, 1)?;
    if subspace.ambient_dim() != body.dim() {
        return Err(Error::DimensionMismatch { expected: body.dim(), got: subspace.ambient_dim() });
    }
    Ok(chunked_map(seed, samples, |rng, _| body.eval(&subspace_sphere_point(rng, subspace))))
}

/// M_E = ∫_{S(E)} ‖x‖ dσ_E(x).
pub fn estimate_m_e(body: &ConvexBody, subspace: &Subspace, samples: usize, seed: &SeedSpec) -> Result<EstimateCI> {
    if subspace.ambient_dim() != body.dim() {
        return Err(Error::DimensionMismatch { expected: body.dim(), got: subspace.ambient_dim() });
    }
    if body.is_euclidean() {
        return Ok(EstimateCI::analytic(1.0, seed));
    }
    if subspace.dim() == 1 {
        return Ok(EstimateCI::analytic(body.eval(subspace.column(0)), seed));
    }
    Ok(m_from_norms(&subspace_norms(body, subspace, samples, seed)?, seed))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationProfile {
    pub m: EstimateCI,
    /// k(K) used for the fit; `None` when b is unknown.
    pub k: Option<f64>,
    pub cells: Vec<ProbabilityCell>,
    /// c in σ{|‖x‖ − M| > tM} ≈ exp(−c t² k), fitted over direct cells.
    pub fitted_exponent: Option<f64>,
}

pub fn concentration_from_norms(
    body: &ConvexBody,
    norms: &[f64],
    m: &EstimateCI,
    t_grid: &[f64],
    seed: &SeedSpec,
) -> Result<ConcentrationProfile> {
    if let Some(t) = t_grid.iter().find(|t| !(**t > 0.0)) {
        return Err(Error::InvalidArgument(format!("t must be positive (got {t})")));
    }
    let k = body
        .lipschitz_constant()
        .map(|b| body.dim() as f64 * (m.value / b).powi(2));
    let cells: Vec<ProbabilityCell> = if norms.is_empty() {
        t_grid
            .iter()
            .map(|&t| ProbabilityCell {
                level: t,
                threshold: t * m.value,
                hits: 0,
                estimate: EstimateCI::analytic(0.0, seed),
                upper_bound: None,
                bracket: None,
            })
            .collect()
    } else {
        t_grid
            .iter()
            .map(|&t| {
                let dev = t * m.value;
                let hits = norms.iter().filter(|&&v| (v - m.value).abs() > dev).count();
                probability_cell(t, dev, hits, norms.len(), seed)
            })
            .collect()
    };
    let fitted_exponent = k.and_then(|k| {
        let (xs, ys): (Vec<f64>, Vec<f64>) = cells
            .iter()
            .filter(|c| c.hits >= DIRECT_MC_MIN_HITS && c.estimate.value < 1.0)
            .map(|c| (c.level * c.level * k, -c.estimate.value.ln()))
            .unzip();
        fit_through_origin(&xs, &ys)
    });
    Ok(ConcentrationProfile { m: m.clone(), k, cells, fitted_exponent })
}

/// σ{|‖x‖ − M̂| > t·M̂} over a t-grid.
pub fn concentration_profile(
    body: &ConvexBody,
    t_grid: &[f64],
    samples: usize,
    seed: &SeedSpec,
) -> Result<ConcentrationProfile> {
    if body.is_euclidean() {
        let m = EstimateCI::analytic(1.0, seed);
        return concentration_from_norms(body, &[], &m, t_grid, seed);
    }
    let norms = sphere_norms(body, samples, seed)?;
    let m = m_from_norms(&norms, seed);
    concentration_from_norms(body, &norms, &m, t_grid, seed)
}
