use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::sampling::SeedSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MonteCarlo,
    Analytic,
    /// Monte Carlo inputs combined with an analytic bracket.
    HybridSurrogate,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::MonteCarlo => "monte_carlo",
            Method::Analytic => "analytic",
            Method::HybridSurrogate => "hybrid_surrogate",
        }
    }
}

/// Qualifiers carried by an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    /// Zero or all hits: stderr is Laplace-adjusted.
    DegenerateBernoulli,
    /// The value is a rule-of-three style upper bound on a probability.
    RuleOfThree,
    /// The value is a heuristic lower bound (e.g. sphere maximization).
    HeuristicLowerBound,
    /// The value is a heuristic upper bound.
    HeuristicUpperBound,
    /// Moment order beyond 0.2·d̂.
    HeavyTail,
    /// Optimizer hit its iteration cap somewhere.
    NotConverged,
    /// Best and second-best restart disagree beyond 1e-6 relative.
    RestartGap,
}

/// A Monte Carlo (or analytic) scalar with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateCI {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
    pub method: Method,
    pub seed: SeedSpec,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub flags: BTreeSet<Flag>,
}

impl EstimateCI {
    pub fn analytic(value: f64, seed: &SeedSpec) -> Self {
        EstimateCI {
            value,
            stderr: 0.0,
            samples: 0,
            method: Method::Analytic,
            seed: seed.clone(),
            flags: BTreeSet::new(),
        }
    }

    pub fn monte_carlo(value: f64, stderr: f64, samples: usize, seed: &SeedSpec) -> Self {
        EstimateCI {
            value,
            stderr,
            samples: samples as u64,
            method: Method::MonteCarlo,
            seed: seed.clone(),
            flags: BTreeSet::new(),
        }
    }

    /// Frequency estimate of a probability from `hits` out of `samples`.
    pub fn bernoulli(hits: usize, samples: usize, seed: &SeedSpec) -> Self {
        let n = samples as f64;
        let p = hits as f64 / n;
        let mut est = if hits == 0 || hits == samples {
            let adj = (hits as f64 + 1.0) / (n + 2.0);
            let mut e = Self::monte_carlo(p, (adj * (1.0 - adj) / n).sqrt(), samples, seed);
            e.flags.insert(Flag::DegenerateBernoulli);
            e
        } else {
            Self::monte_carlo(p, (p * (1.0 - p) / n).sqrt(), samples, seed)
        };
        est.samples = samples as u64;
        est
    }

    pub fn with_flag(mut self, flag: Flag) -> Self {
        self.flags.insert(flag);
        self
    }

    pub fn has_flag(&self, flag: Flag) -> bool {
        self.flags.contains(&flag)
    }

    /// stderr = 0 iff analytic, and MC estimates have samples.
    pub fn is_consistent(&self) -> bool {
        let zero = self.stderr == 0.0;
        let analytic = self.method == Method::Analytic;
        zero == analytic && (self.method != Method::MonteCarlo || self.samples > 0)
    }

    /// Whether `self` and `other` agree within `k` joint standard errors.
    pub fn agrees_with(&self, other: &EstimateCI, k: f64) -> bool {
        let joint = self.stderr.hypot(other.stderr);
        (self.value - other.value).abs() <= k * joint
    }
}

/// Sample mean and standard error of the mean.
pub(crate) fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Power mean `(mean x_i^q)^{1/q}` computed in log space, with the
/// delta-method standard error. `q = 0` is the geometric mean.
///
/// Returns `Err(i)` with the index of the first non-positive or
/// non-finite input.
pub(crate) fn power_mean(xs: &[f64], q: f64) -> std::result::Result<(f64, f64), usize> {
    if let Some(i) = xs.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(i);
    }
    let n = xs.len() as f64;
    if q == 0.0 {
        let logs: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        let (m, se) = mean_and_stderr(&logs);
        let g = m.exp();
        return Ok((g, g * se));
    }
    let ys: Vec<f64> = xs.iter().map(|x| q * x.ln()).collect();
    let shift = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ws: Vec<f64> = ys.iter().map(|y| (y - shift).exp()).collect();
    let (wbar, wse) = mean_and_stderr(&ws);
    let log_mean = shift + wbar.ln();
    let value = (log_mean / q).exp();
    let rel = if wbar > 0.0 { wse / wbar } else { 0.0 };
    let _ = n;
    Ok((value, value * rel / q.abs()))
}
