//! Multistart optimization of a function on the Euclidean sphere S^{l-1}.
//!
//! Each restart runs projected gradient descent with a normalization
//! retraction and step halving (Armijo acceptance). Objectives with kinks
//! are first minimized through a smoothing continuation whose width
//! shrinks geometrically to `1e-9·f`, then polished with exact subgradient
//! steps. Trial steps follow Barzilai–Borwein; Armijo backtracking keeps
//! every accepted step a decrease of the objective being minimized.

use serde::{Deserialize, Serialize};

use crate::sampling::{dot, euclidean_norm, sphere_point, SeedSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereOptConfig {
    pub restarts: usize,
    /// Relative tolerance on the Riemannian gradient and on per-step decrease.
    pub tolerance: f64,
    /// Per-stage iteration cap.
    pub max_iterations: usize,
}

impl Default for SphereOptConfig {
    fn default() -> Self {
        SphereOptConfig { restarts: 50, tolerance: 1e-9, max_iterations: 10_000 }
    }
}

/// Function on S^{l-1} with an optional smoothed surrogate.
pub trait SphereObjective: Sync {
    fn dim(&self) -> usize;

    fn value(&self, z: &[f64]) -> f64;

    /// Smoothed value and Euclidean gradient; `mu = 0` gives the exact
    /// value and a subgradient.
    fn smoothed(&self, z: &[f64], mu: f64, grad: &mut [f64]) -> f64;

    fn needs_smoothing(&self) -> bool;
}

/// Negation, so maximization reuses the minimizer.
pub struct Negated<'a, O: SphereObjective>(pub &'a O);

impl<O: SphereObjective> SphereObjective for Negated<'_, O> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn value(&self, z: &[f64]) -> f64 {
        -self.0.value(z)
    }

    fn smoothed(&self, z: &[f64], mu: f64, grad: &mut [f64]) -> f64 {
        let v = self.0.smoothed(z, mu, grad);
        grad.iter_mut().for_each(|g| *g = -*g);
        -v
    }

    fn needs_smoothing(&self) -> bool {
        self.0.needs_smoothing()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereOptResult {
    pub value: f64,
    pub argmin: Vec<f64>,
    /// Final value of every restart, in restart order.
    pub restart_values: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl SphereOptResult {
    pub fn second_best(&self) -> Option<f64> {
        let mut v = self.restart_values.clone();
        v.sort_by(f64::total_cmp);
        v.get(1).copied()
    }

    /// (second best − best) / |best|.
    pub fn relative_gap(&self) -> Option<f64> {
        self.second_best()
            .map(|s| (s - self.value) / self.value.abs().max(f64::MIN_POSITIVE))
    }
}

struct StageOutcome {
    iterations: usize,
    hit_cap: bool,
}

fn tangent(grad: &[f64], z: &[f64], out: &mut [f64]) -> f64 {
    let radial = dot(grad, z);
    for ((o, g), zi) in out.iter_mut().zip(grad).zip(z) {
        *o = g - radial * zi;
    }
    euclidean_norm(out)
}

fn descend<O: SphereObjective>(
    obj: &O,
    z: &mut Vec<f64>,
    mu: f64,
    cfg: &SphereOptConfig,
) -> StageOutcome {
    let l = z.len();
    let mut grad = vec![0.0; l];
    let mut cand_grad = vec![0.0; l];
    let mut rg = vec![0.0; l];
    let mut prev_rg = vec![0.0; l];
    let mut prev_z = vec![0.0; l];
    let mut cand = vec![0.0; l];
    let mut f = obj.smoothed(z, mu, &mut grad);
    let mut step: f64 = 1.0;
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let gnorm = tangent(&grad, z, &mut rg);
        let scale = f.abs().max(1e-300);
        if gnorm <= cfg.tolerance * scale {
            return StageOutcome { iterations, hit_cap: false };
        }
        if iterations > 1 {
            // Barzilai–Borwein trial step; Armijo below keeps descent monotone
            let (mut ss, mut sy) = (0.0, 0.0);
            for i in 0..l {
                let si = z[i] - prev_z[i];
                ss += si * si;
                sy += si * (rg[i] - prev_rg[i]);
            }
            if sy > 0.0 && ss > 0.0 {
                step = ss / sy;
            }
        }
        // never rotate by more than about a radian
        step = step.min(1.0 / gnorm);
        let accepted = loop {
            for ((c, zi), r) in cand.iter_mut().zip(z.iter()).zip(&rg) {
                *c = zi - step * r;
            }
            let r = euclidean_norm(&cand);
            cand.iter_mut().for_each(|c| *c /= r);
            let fc = obj.smoothed(&cand, mu, &mut cand_grad);
            if fc <= f - 1e-4 * step * gnorm * gnorm {
                break Some(fc);
            }
            step *= 0.5;
            if step * gnorm < 1e-15 {
                break None;
            }
        };
        let Some(fc) = accepted else {
            return StageOutcome { iterations, hit_cap: false };
        };
        let decrease = f - fc;
        prev_z.copy_from_slice(z);
        prev_rg.copy_from_slice(&rg);
        std::mem::swap(z, &mut cand);
        std::mem::swap(&mut grad, &mut cand_grad);
        f = fc;
        step *= 2.0;
        if decrease <= cfg.tolerance * 1e-3 * scale {
            return StageOutcome { iterations, hit_cap: false };
        }
    }
    StageOutcome { iterations, hit_cap: true }
}

/// One restart from `z0`; returns (exact value, point, iterations, capped).
pub fn local_minimize<O: SphereObjective>(
    obj: &O,
    z0: Vec<f64>,
    cfg: &SphereOptConfig,
) -> (f64, Vec<f64>, usize, bool) {
    let mut z = z0;
    let mut iterations = 0;
    let mut capped = false;
    let mut best_value = obj.value(&z);
    let mut best = z.clone();
    if obj.needs_smoothing() {
        let f0 = best_value.abs().max(1e-300);
        // starting wider than 1e-3·f merges the basins of distinct vertices
        for k in 3..=9 {
            let mu = f0 * 10f64.powi(-k);
            let out = descend(obj, &mut z, mu, cfg);
            iterations += out.iterations;
            capped |= out.hit_cap;
            let v = obj.value(&z);
            if v < best_value {
                best_value = v;
                best.clone_from(&z);
            }
        }
        z.clone_from(&best);
    }
    let out = descend(obj, &mut z, 0.0, cfg);
    iterations += out.iterations;
    capped |= out.hit_cap;
    let v = obj.value(&z);
    if v < best_value {
        best_value = v;
        best = z;
    }
    (best_value, best, iterations, capped)
}

/// Multistart minimization; restart `r` starts from a uniform point drawn
/// from `seed / restart:r`. Restarts run sequentially.
pub fn minimize_on_sphere<O: SphereObjective>(
    obj: &O,
    cfg: &SphereOptConfig,
    seed: &SeedSpec,
) -> SphereOptResult {
    let l = obj.dim();
    if l == 1 {
        // S^0 = {±1}
        let a = obj.value(&[1.0]);
        let b = obj.value(&[-1.0]);
        let (value, argmin) = if b < a { (b, vec![-1.0]) } else { (a, vec![1.0]) };
        return SphereOptResult {
            value,
            argmin,
            restart_values: vec![a, b],
            converged: true,
            iterations: 0,
        };
    }
    let restarts = cfg.restarts.max(1);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut restart_values = Vec::with_capacity(restarts);
    let mut converged = true;
    let mut iterations = 0;
    for r in 0..restarts {
        let z0 = sphere_point(&mut seed.child("restart", r as u64).rng(), l);
        let (v, z, it, capped) = local_minimize(obj, z0, cfg);
        iterations += it;
        converged &= !capped;
        restart_values.push(v);
        if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
            best = Some((v, z));
        }
    }
    let (value, argmin) = best.expect("at least one restart");
    SphereOptResult { value, argmin, restart_values, converged, iterations }
}

pub fn maximize_on_sphere<O: SphereObjective>(
    obj: &O,
    cfg: &SphereOptConfig,
    seed: &SeedSpec,
) -> SphereOptResult {
    let mut r = minimize_on_sphere(&Negated(obj), cfg, seed);
    r.value = -r.value;
    r.restart_values.iter_mut().for_each(|v| *v = -*v);
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    /// zᵀ A z for diagonal A: min is the smallest diagonal entry.
    struct Rayleigh(Vec<f64>);

    impl SphereObjective for Rayleigh {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn value(&self, z: &[f64]) -> f64 {
            z.iter().zip(&self.0).map(|(a, d)| d * a * a).sum()
        }
        fn smoothed(&self, z: &[f64], _mu: f64, grad: &mut [f64]) -> f64 {
            for ((g, a), d) in grad.iter_mut().zip(z).zip(&self.0) {
                *g = 2.0 * d * a;
            }
            self.value(z)
        }
        fn needs_smoothing(&self) -> bool {
            false
        }
    }

    /// max_i |z_i|: min on S^{l-1} is 1/√l at the diagonals.
    struct MaxAbs(usize);

    impl SphereObjective for MaxAbs {
        fn dim(&self) -> usize {
            self.0
        }
        fn value(&self, z: &[f64]) -> f64 {
            z.iter().fold(0.0f64, |m, v| m.max(v.abs()))
        }
        fn smoothed(&self, z: &[f64], mu: f64, grad: &mut [f64]) -> f64 {
            crate::bodies::ConvexBody::cube(self.0).unwrap().smoothed(z, mu, grad)
        }
        fn needs_smoothing(&self) -> bool {
            true
        }
    }

    #[test]
    fn rayleigh_quotient_extremes() {
        let obj = Rayleigh(vec![3.0, 1.5, 0.25, 2.0]);
        let cfg = SphereOptConfig { restarts: 5, ..Default::default() };
        let lo = minimize_on_sphere(&obj, &cfg, &SeedSpec::new(1));
        assert!((lo.value - 0.25).abs() < 1e-8, "{}", lo.value);
        let hi = maximize_on_sphere(&obj, &cfg, &SeedSpec::new(1));
        assert!((hi.value - 3.0).abs() < 1e-8, "{}", hi.value);
        assert!(lo.converged && hi.converged);
    }

    #[test]
    fn kinked_max_norm_reaches_diagonal() {
        for l in [2, 3, 5, 8] {
            let cfg = SphereOptConfig { restarts: 4, ..Default::default() };
            let r = minimize_on_sphere(&MaxAbs(l), &cfg, &SeedSpec::new(l as u64));
            let exact = 1.0 / (l as f64).sqrt();
            assert!((r.value - exact).abs() < 1e-7 * exact, "l={l} got {}", r.value);
        }
    }

    #[test]
    fn restart_values_are_recorded() {
        let cfg = SphereOptConfig { restarts: 7, ..Default::default() };
        let r = minimize_on_sphere(&MaxAbs(3), &cfg, &SeedSpec::new(2));
        assert_eq!(r.restart_values.len(), 7);
        assert!(r.relative_gap().unwrap() >= 0.0);
        let again = minimize_on_sphere(&MaxAbs(3), &cfg, &SeedSpec::new(2));
        assert_eq!(r, again);
    }
}
