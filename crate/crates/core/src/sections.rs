//! Geometry of K ∩ E for a subspace E: diameter, inradius, volume radius
//! and the two Dvoretzky inclusion tests.
//!
//! With F the orthonormal frame of E,
//!
//! * diam(K ∩ E) = 2 / min_{|z|=1} ‖Fz‖
//! * inradius(K ∩ E) = 1 / max_{|z|=1} ‖Fz‖
//!
//! Closed forms are used where they exist (l = 1, the Euclidean ball,
//! coordinate sections of ℓp balls, and the cube's inradius, which is
//! one over the largest row norm of F). Everything else goes through the
//! multistart sphere optimizer.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bodies::ConvexBody;
use crate::error::{Error, Result};
use crate::estimate::{power_mean, EstimateCI, Flag};
use crate::estimators::{negative_moment_from_norms, subspace_norms};
use crate::optimize::{maximize_on_sphere, minimize_on_sphere, SphereObjective, SphereOptConfig, SphereOptResult};
use crate::sampling::{grassmannian_samples, SeedSpec, Subspace};

/// Restart values within this relative gap count as consistent.
pub const RESTART_GAP_TOLERANCE: f64 = 1e-6;

/// z ↦ ‖Fz‖_K on S^{l-1}.
pub struct SectionObjective<'a> {
    body: &'a ConvexBody,
    subspace: &'a Subspace,
}

impl<'a> SectionObjective<'a> {
    pub fn new(body: &'a ConvexBody, subspace: &'a Subspace) -> Result<Self> {
        check_dims(body, subspace)?;
        Ok(SectionObjective { body, subspace })
    }
}

impl SphereObjective for SectionObjective<'_> {
    fn dim(&self) -> usize {
        self.subspace.dim()
    }

    fn value(&self, z: &[f64]) -> f64 {
        self.body.eval(&self.subspace.embed(z))
    }

    fn smoothed(&self, z: &[f64], mu: f64, grad: &mut [f64]) -> f64 {
        let x = self.subspace.embed(z);
        let mut gx = vec![0.0; x.len()];
        let v = self.body.smoothed(&x, mu, &mut gx);
        // chain rule: ∇_z = Fᵀ ∇_x
        let g = self.subspace.coordinates(&gx);
        grad.copy_from_slice(&g);
        v
    }

    fn needs_smoothing(&self) -> bool {
        !self.body.is_smooth()
    }
}

fn check_dims(body: &ConvexBody, subspace: &Subspace) -> Result<()> {
    if subspace.ambient_dim() != body.dim() {
        return Err(Error::DimensionMismatch { expected: body.dim(), got: subspace.ambient_dim() });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionRoute {
    ClosedForm,
    Multistart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerTrace {
    pub restarts: usize,
    pub best: f64,
    pub second_best: Option<f64>,
    pub relative_gap: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl OptimizerTrace {
    fn from_result(r: &SphereOptResult, maximize: bool) -> Self {
        let mut vals = r.restart_values.clone();
        vals.sort_by(f64::total_cmp);
        if maximize {
            vals.reverse();
        }
        let second_best = vals.get(1).copied();
        let relative_gap = second_best.map(|s| (s - r.value).abs() / r.value.abs().max(f64::MIN_POSITIVE));
        OptimizerTrace {
            restarts: r.restart_values.len(),
            best: r.value,
            second_best,
            relative_gap,
            converged: r.converged,
            iterations: r.iterations,
        }
    }

    pub fn consistent(&self) -> bool {
        self.relative_gap.is_none_or(|g| g <= RESTART_GAP_TOLERANCE)
    }
}

/// A diameter or inradius with how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionMeasurement {
    pub value: f64,
    pub route: SectionRoute,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub flags: BTreeSet<Flag>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<OptimizerTrace>,
}

impl SectionMeasurement {
    fn exact(value: f64) -> Self {
        SectionMeasurement { value, route: SectionRoute::ClosedForm, flags: BTreeSet::new(), trace: None }
    }

    fn optimized(value: f64, result: &SphereOptResult, maximize: bool) -> Self {
        let trace = OptimizerTrace::from_result(result, maximize);
        let mut flags = BTreeSet::new();
        if !trace.converged {
            flags.insert(Flag::NotConverged);
        }
        if !trace.consistent() {
            flags.insert(Flag::RestartGap);
        }
        SectionMeasurement { value, route: SectionRoute::Multistart, flags, trace: Some(trace) }
    }

    pub fn is_exact(&self) -> bool {
        self.route == SectionRoute::ClosedForm
    }

    pub fn flag_names(&self) -> String {
        self.flags
            .iter()
            .map(|f| serde_json::to_value(f).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default())
            .collect::<Vec<_>>()
            .join("|")
    }
}

/// For a coordinate section of an ℓp ball, the section is the ℓp^l ball.
fn coordinate_lp_section(body: &ConvexBody, subspace: &Subspace) -> Option<ConvexBody> {
    let p = body.lp_exponent()?;
    let n = subspace.ambient_dim();
    let mut used = vec![false; n];
    for j in 0..subspace.dim() {
        let col = subspace.column(j);
        let mut nz = col.iter().enumerate().filter(|(_, v)| **v != 0.0);
        let (i, v) = nz.next()?;
        if nz.next().is_some() || v.abs() != 1.0 || used[i] {
            return None;
        }
        used[i] = true;
    }
    ConvexBody::lp(p, subspace.dim()).ok()
}

/// diam(K ∩ E). Restart r of the optimizer starts from `seed / restart:r`.
pub fn section_diameter(
    body: &ConvexBody,
    subspace: &Subspace,
    cfg: &SphereOptConfig,
    seed: &SeedSpec,
) -> Result<SectionMeasurement> {
    check_dims(body, subspace)?;
    if body.is_euclidean() {
        return Ok(SectionMeasurement::exact(2.0));
    }
    if subspace.dim() == 1 {
        return Ok(SectionMeasurement::exact(2.0 / body.eval(subspace.column(0))));
    }
    if let Some(sec) = coordinate_lp_section(body, subspace) {
        let lo = sec.min_on_sphere().expect("ℓp ball has a closed-form minimum");
        return Ok(SectionMeasurement::exact(2.0 / lo));
    }
    let obj = SectionObjective::new(body, subspace)?;
    let r = minimize_on_sphere(&obj, cfg, seed);
    let m = SectionMeasurement::optimized(2.0 / r.value, &r, false);
    if !m.flags.is_empty() {
        log::debug!("section diameter flags {:?} (gap {:?})", m.flags, m.trace.as_ref().and_then(|t| t.relative_gap));
    }
    Ok(m)
}

/// inradius(K ∩ E). Exact for the cube; elsewhere the optimizer value is
/// an upper bound on the inradius and is flagged as such.
pub fn section_inradius(
    body: &ConvexBody,
    subspace: &Subspace,
    cfg: &SphereOptConfig,
    seed: &SeedSpec,
) -> Result<SectionMeasurement> {
    check_dims(body, subspace)?;
    if body.is_euclidean() {
        return Ok(SectionMeasurement::exact(1.0));
    }
    if subspace.dim() == 1 {
        return Ok(SectionMeasurement::exact(1.0 / body.eval(subspace.column(0))));
    }
    if body.is_cube() {
        // max_{|z|=1} max_i |⟨row_i, z⟩| = max_i |row_i|
        let top = subspace.row_norms().into_iter().fold(0.0, f64::max);
        return Ok(SectionMeasurement::exact(1.0 / top));
    }
    if let Some(sec) = coordinate_lp_section(body, subspace) {
        let hi = sec.lipschitz_constant().expect("ℓp ball has a closed-form maximum");
        return Ok(SectionMeasurement::exact(1.0 / hi));
    }
    let obj = SectionObjective::new(body, subspace)?;
    let r = maximize_on_sphere(&obj, cfg, seed);
    let mut m = SectionMeasurement::optimized(1.0 / r.value, &r, true);
    m.flags.insert(Flag::HeuristicUpperBound);
    Ok(m)
}

/// (mean over S(E) of ‖x‖^{−k})^{1/k}; with k = dim E this is v.rad(K ∩ E).
pub fn section_volume_radius(
    body: &ConvexBody,
    subspace: &Subspace,
    k: f64,
    samples: usize,
    seed: &SeedSpec,
) -> Result<EstimateCI> {
    check_dims(body, subspace)?;
    if !(k > 0.0) {
        return Err(Error::InvalidArgument(format!("moment order must be positive (got {k})")));
    }
    if body.is_euclidean() {
        return Ok(EstimateCI::analytic(1.0, seed));
    }
    if subspace.dim() == 1 {
        return Ok(EstimateCI::analytic(1.0 / body.eval(subspace.column(0)), seed));
    }
    let norms = subspace_norms(body, subspace, samples, seed)?;
    let est = negative_moment_from_norms(&norms, k, seed)?;
    // v.rad is the reciprocal of the negative power mean of the norm
    let value = 1.0 / est.value;
    Ok(EstimateCI { value, stderr: est.stderr * value * value, ..est })
}

/// Outcome of an inclusion test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionTest {
    pub passed: bool,
    /// Whether the verdict is certain given the measurement's route.
    pub conclusive: bool,
    pub flags: BTreeSet<Flag>,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidArgument(format!("{name} must be positive (got {v})")));
    }
    Ok(())
}

/// K ∩ E ⊂ (C/M)(Dⁿ ∩ E) ⟺ diam ≤ 2C/M (inclusive).
pub fn upper_inclusion_holds(diameter: &SectionMeasurement, c: f64, m: f64) -> Result<InclusionTest> {
    check_positive("C", c)?;
    check_positive("M", m)?;
    let passed = diameter.value <= 2.0 * c / m;
    // an optimized diameter can only be too small, so failures are conclusive
    let conclusive = diameter.is_exact() || !passed;
    Ok(InclusionTest { passed, conclusive, flags: diameter.flags.clone() })
}

/// (c/M)(Dⁿ ∩ E) ⊂ K ∩ E ⟺ inradius ≥ c/M (inclusive).
pub fn lower_inclusion_holds(inradius: &SectionMeasurement, c: f64, m: f64) -> Result<InclusionTest> {
    check_positive("c", c)?;
    check_positive("M", m)?;
    let passed = inradius.value >= c / m;
    // a heuristic inradius can only be too large, so failures are conclusive
    let conclusive = inradius.is_exact() || !passed;
    Ok(InclusionTest { passed, conclusive, flags: inradius.flags.clone() })
}

pub fn upper_inclusion_test(
    body: &ConvexBody,
    subspace: &Subspace,
    c: f64,
    m: f64,
    cfg: &SphereOptConfig,
    seed: &SeedSpec,
) -> Result<InclusionTest> {
    upper_inclusion_holds(&section_diameter(body, subspace, cfg, seed)?, c, m)
}

pub fn lower_inclusion_test(
    body: &ConvexBody,
    subspace: &Subspace,
    c: f64,
    m: f64,
    cfg: &SphereOptConfig,
    seed: &SeedSpec,
) -> Result<InclusionTest> {
    lower_inclusion_holds(&section_inradius(body, subspace, cfg, seed)?, c, m)
}

/// Diameter, inradius and (optionally) volume radius of one section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionGeometry {
    pub subspace: Subspace,
    pub diameter: SectionMeasurement,
    pub inradius: SectionMeasurement,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub volume_radius: Option<EstimateCI>,
}

impl SectionGeometry {
    pub fn flags(&self) -> BTreeSet<Flag> {
        let mut f = self.diameter.flags.clone();
        f.extend(self.inradius.flags.iter().copied());
        if let Some(v) = &self.volume_radius {
            f.extend(v.flags.iter().copied());
        }
        f
    }
}

/// Volume-radius settings for [`section_geometry`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VradSettings {
    pub k: f64,
    pub samples: usize,
}

pub fn section_geometry(
    body: &ConvexBody,
    subspace: Subspace,
    cfg: &SphereOptConfig,
    vrad: Option<VradSettings>,
    seed: &SeedSpec,
) -> Result<SectionGeometry> {
    let diameter = section_diameter(body, &subspace, cfg, &seed.child("diameter", 0))?;
    let inradius = section_inradius(body, &subspace, cfg, &seed.child("inradius", 0))?;
    let volume_radius = vrad
        .map(|v| section_volume_radius(body, &subspace, v.k, v.samples, &seed.child("vrad", 0)))
        .transpose()?;
    Ok(SectionGeometry { subspace, diameter, inradius, volume_radius })
}

/// Geometry of `count` Haar sections of dimension l. Subspaces come from
/// `seed`; section j's optimizer seeds from `seed / restarts:j`.
pub fn random_sections(
    body: &ConvexBody,
    l: usize,
    count: usize,
    cfg: &SphereOptConfig,
    vrad: Option<VradSettings>,
    seed: &SeedSpec,
) -> Result<Vec<SectionGeometry>> {
    let subspaces = grassmannian_samples(body.dim(), l, count, seed)?;
    subspaces
        .into_par_iter()
        .enumerate()
        .map(|(j, e)| section_geometry(body, e, cfg, vrad, &seed.child("restarts", j as u64)))
        .collect()
}

/// Diameters of `count` Haar sections, seeded as in [`random_sections`].
pub fn random_section_diameters(
    body: &ConvexBody,
    l: usize,
    count: usize,
    cfg: &SphereOptConfig,
    seed: &SeedSpec,
) -> Result<Vec<SectionMeasurement>> {
    let subspaces = grassmannian_samples(body.dim(), l, count, seed)?;
    subspaces
        .par_iter()
        .enumerate()
        .map(|(j, e)| section_diameter(body, e, cfg, &seed.child("restarts", j as u64)))
        .collect()
}

/// Inradii of `count` Haar sections, seeded as in [`random_sections`].
pub fn random_section_inradii(
    body: &ConvexBody,
    l: usize,
    count: usize,
    cfg: &SphereOptConfig,
    seed: &SeedSpec,
) -> Result<Vec<SectionMeasurement>> {
    let subspaces = grassmannian_samples(body.dim(), l, count, seed)?;
    subspaces
        .par_iter()
        .enumerate()
        .map(|(j, e)| section_inradius(body, e, cfg, &seed.child("restarts", j as u64)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterAverage {
    pub l: usize,
    /// (mean diam^l)^{1/l} over the sampled sections.
    pub estimate: EstimateCI,
    pub diameters: Vec<SectionMeasurement>,
}

/// (∫_{G_{n,l}} diam(K∩E)^l dμ(E))^{1/l} by Monte Carlo over Haar E.
pub fn diameter_lk_average(
    body: &ConvexBody,
    l: usize,
    num_subspaces: usize,
    cfg: &SphereOptConfig,
    seed: &SeedSpec,
) -> Result<DiameterAverage> {
    if l == 0 {
        return Err(Error::ZeroDimension);
    }
    if num_subspaces == 0 {
        return Err(Error::InvalidArgument("need at least one subspace".into()));
    }
    if body.is_euclidean() {
        let diameters = vec![SectionMeasurement::exact(2.0); num_subspaces];
        return Ok(DiameterAverage { l, estimate: EstimateCI::analytic(2.0, seed), diameters });
    }
    let diameters = random_section_diameters(body, l, num_subspaces, cfg, seed)?;
    let values: Vec<f64> = diameters.iter().map(|d| d.value).collect();
    let (value, se) = power_mean(&values, l as f64)
        .map_err(|i| Error::InvalidArgument(format!("section {i} has a non-finite diameter")))?;
    let mut estimate = EstimateCI::monte_carlo(value, se, num_subspaces, seed);
    for d in &diameters {
        estimate.flags.extend(d.flags.iter().copied());
    }
    Ok(DiameterAverage { l, estimate, diameters })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SphereOptConfig {
        SphereOptConfig { restarts: 8, ..Default::default() }
    }

    #[test]
    fn coordinate_plane_sections() {
        let s = SeedSpec::new(1);
        let plane = Subspace::coordinate(6, &[0, 1]).unwrap();
        let cube = ConvexBody::cube(6).unwrap();
        let d = section_diameter(&cube, &plane, &cfg(), &s).unwrap();
        assert!((d.value - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(section_inradius(&cube, &plane, &cfg(), &s).unwrap().value, 1.0);
        let cross = ConvexBody::cross_polytope(4).unwrap();
        let plane4 = Subspace::coordinate(4, &[0, 1]).unwrap();
        assert_eq!(section_diameter(&cross, &plane4, &cfg(), &s).unwrap().value, 2.0);
    }

    #[test]
    fn optimizer_agrees_with_closed_form_on_coordinate_plane() {
        // rotate the plane's basis so the closed form does not trigger
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let e = Subspace::from_columns(3, &[vec![a, a, 0.0], vec![a, -a, 0.0]]).unwrap();
        let cube = ConvexBody::cube(3).unwrap();
        let d = section_diameter(&cube, &e, &cfg(), &SeedSpec::new(4)).unwrap();
        assert_eq!(d.route, SectionRoute::Multistart);
        assert!((d.value - 2.0 * 2f64.sqrt()).abs() < 1e-8, "{}", d.value);
        let cross = ConvexBody::cross_polytope(3).unwrap();
        let d = section_diameter(&cross, &e, &cfg(), &SeedSpec::new(4)).unwrap();
        assert!((d.value - 2.0).abs() < 1e-8, "{}", d.value);
        let r = section_inradius(&cross, &e, &cfg(), &SeedSpec::new(4)).unwrap();
        assert!(r.flags.contains(&Flag::HeuristicUpperBound));
        assert!((r.value - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn line_sections() {
        let u = vec![0.6, 0.0, -0.8];
        let e = Subspace::from_columns(3, &[u]).unwrap();
        let cube = ConvexBody::cube(3).unwrap();
        let s = SeedSpec::new(0);
        let d = section_diameter(&cube, &e, &cfg(), &s).unwrap();
        let r = section_inradius(&cube, &e, &cfg(), &s).unwrap();
        assert_eq!(d.value, 2.0 / 0.8);
        assert_eq!(r.value, 1.0 / 0.8);
        assert_eq!(section_volume_radius(&cube, &e, 1.0, 10, &s).unwrap().value, 1.0 / 0.8);
        let t = lower_inclusion_holds(&r, 1.0, 0.8).unwrap();
        assert!(t.passed && t.conclusive);
        assert!(!lower_inclusion_holds(&r, 1.0, 0.79).unwrap().passed);
    }

    #[test]
    fn euclidean_sections_and_boundary_inclusion() {
        let ball = ConvexBody::euclidean(5).unwrap();
        let e = crate::sampling::sample_grassmannian(5, 3, &SeedSpec::new(2)).unwrap();
        let s = SeedSpec::new(3);
        let d = section_diameter(&ball, &e, &cfg(), &s).unwrap();
        let r = section_inradius(&ball, &e, &cfg(), &s).unwrap();
        assert_eq!((d.value, r.value), (2.0, 1.0));
        assert!(upper_inclusion_holds(&d, 1.0, 1.0).unwrap().passed);
        assert!(lower_inclusion_holds(&r, 1.0, 1.0).unwrap().passed);
        assert!(upper_inclusion_holds(&d, 0.0, 1.0).is_err());
    }

    #[test]
    fn square_volume_radius() {
        let cube = ConvexBody::cube(4).unwrap();
        let plane = Subspace::coordinate(4, &[0, 1]).unwrap();
        let v = section_volume_radius(&cube, &plane, 2.0, 200_000, &SeedSpec::new(5)).unwrap();
        let exact = 2.0 / std::f64::consts::PI.sqrt();
        assert!((v.value - exact).abs() < 4.0 * v.stderr, "{} ± {}", v.value, v.stderr);
    }

    #[test]
    fn diameter_dominates_twice_inradius() {
        let cube = ConvexBody::cube(12).unwrap();
        let secs = random_sections(&cube, 3, 6, &cfg(), None, &SeedSpec::new(6)).unwrap();
        for g in secs {
            assert!(g.diameter.value >= 2.0 * g.inradius.value);
        }
    }
}
