//! Command-line front end: argument parsing into a canonical [`RunConfig`],
//! dispatch to the core experiments, and atomic JSON/CSV emission.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dvlab::experiments::{
    self, body_for, CubeGapParams, DimLiftParams, LowerInclusionParams, MeStabilityParams, NegKhinchineParams,
    SectionsParams, SmallBallFitParams, TransferParams, UpperInclusionParams, VradParams,
};
use dvlab::optimize::SphereOptConfig;
use dvlab::report::ExperimentReport;
use dvlab::{ConvexBody, SeedSpec};
use serde_json::Value;

pub const THREADS_ENV: &str = "DVLAB_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] dvlab::Error),
    #[error("invalid value for {flag}: {reason}")]
    Usage { flag: String, reason: String },
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

fn usage(flag: &str, reason: impl Into<String>) -> CliError {
    CliError::Usage { flag: flag.to_string(), reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Both,
}

impl Format {
    fn as_str(&self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Transfer,
    Vrad,
    NegKhinchine,
    MeStability,
    DimLift,
    UpperInclusion,
    LowerInclusion,
    CubeGap,
    SmallBallFit,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::Transfer,
        Experiment::Vrad,
        Experiment::NegKhinchine,
        Experiment::MeStability,
        Experiment::DimLift,
        Experiment::UpperInclusion,
        Experiment::LowerInclusion,
        Experiment::CubeGap,
        Experiment::SmallBallFit,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::Transfer => "transfer",
            Experiment::Vrad => "vrad",
            Experiment::NegKhinchine => "neg-khinchine",
            Experiment::MeStability => "me-stability",
            Experiment::DimLift => "dim-lift",
            Experiment::UpperInclusion => "upper-inclusion",
            Experiment::LowerInclusion => "lower-inclusion",
            Experiment::CubeGap => "cube-gap",
            Experiment::SmallBallFit => "small-ball-fit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Stats,
    SmallBall,
    Moments,
    Sections,
    Verify(Experiment),
}

impl Command {
    fn words(&self) -> Vec<&'static str> {
        match self {
            Command::Stats => vec!["stats"],
            Command::SmallBall => vec!["small-ball"],
            Command::Moments => vec!["moments"],
            Command::Sections => vec!["sections"],
            Command::Verify(e) => vec!["verify", e.as_str()],
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "dvlab", version, about = "Numerical experiments on norms, small balls and random sections")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Root seed of every random stream
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads (outputs do not depend on it); falls back to DVLAB_THREADS
    #[arg(long, global = true, value_parser = positive_usize)]
    threads: Option<usize>,

    /// Output path; stdout (JSON only) when absent
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format; inferred from --out's extension when absent
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// M, median, b, k and d of a body
    Stats(Opts),
    /// Small-ball probabilities over an ε grid
    SmallBall(Opts),
    /// Negative and positive moments of the norm
    Moments(Opts),
    /// Diameter, inradius and volume radius of random sections
    Sections(Opts),
    /// Run one verification experiment
    Verify {
        #[arg(value_enum)]
        experiment: Experiment,
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Args, Debug, Default, Clone)]
struct Opts {
    /// Body spec lp:<p>:<n> (p may be inf); families lp:<p> for sweeps
    #[arg(long)]
    body: Option<String>,
    /// Dimensions for sweeps
    #[arg(long, value_delimiter = ',', value_parser = positive_usize)]
    n: Vec<usize>,
    /// Section dimensions or moment orders
    #[arg(long, value_delimiter = ',', value_parser = positive_f64)]
    l: Vec<f64>,
    /// Moment or subspace orders
    #[arg(long, value_delimiter = ',', value_parser = positive_f64)]
    k: Vec<f64>,
    /// Small-ball ε grid
    #[arg(long, value_delimiter = ',', value_parser = positive_f64)]
    eps: Vec<f64>,
    /// Inclusion constants
    #[arg(long, value_delimiter = ',', value_parser = positive_f64)]
    c: Vec<f64>,
    /// Small-ball level u > 1 of the critical dimension d_u
    #[arg(long, value_parser = positive_f64)]
    u: Option<f64>,
    /// Scale sweep (multiples of M)
    #[arg(long, value_delimiter = ',', value_parser = positive_f64)]
    scales: Vec<f64>,
    #[arg(long, value_parser = positive_usize)]
    samples: Option<usize>,
    #[arg(long, value_parser = positive_usize)]
    subspaces: Option<usize>,
    #[arg(long, value_parser = positive_usize)]
    restarts: Option<usize>,
    #[arg(long, value_parser = positive_usize)]
    inner_samples: Option<usize>,
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(_) => Err("must be positive".into()),
        Err(e) => Err(e.to_string()),
    }
}

/// A fully resolved invocation: every parameter the command uses is set.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Canonical body spec, family, or comma list of families.
    pub body: Option<String>,
    pub n: Vec<usize>,
    pub l: Vec<f64>,
    pub k: Vec<f64>,
    pub eps: Vec<f64>,
    pub c: Vec<f64>,
    pub scales: Vec<f64>,
    pub u: Option<f64>,
    pub samples: Option<usize>,
    pub subspaces: Option<usize>,
    pub restarts: Option<usize>,
    pub inner_samples: Option<usize>,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

/// Which options a command reads.
#[derive(Default)]
struct Uses {
    body: bool,
    n: bool,
    l: bool,
    k: bool,
    eps: bool,
    c: bool,
    scales: bool,
    u: bool,
    samples: bool,
    subspaces: bool,
    restarts: bool,
    inner_samples: bool,
}

fn uses(cmd: Command) -> Uses {
    use Experiment::*;
    let u = Uses::default();
    match cmd {
        Command::Stats => Uses { body: true, u: true, samples: true, restarts: true, ..u },
        Command::SmallBall => Uses { body: true, eps: true, samples: true, ..u },
        Command::Moments => Uses { body: true, l: true, k: true, samples: true, ..u },
        Command::Sections => {
            Uses { body: true, l: true, k: true, subspaces: true, restarts: true, inner_samples: true, ..u }
        }
        Command::Verify(e) => match e {
            Transfer => Uses { body: true, n: true, scales: true, samples: true, ..u },
            Vrad => Uses { body: true, k: true, samples: true, inner_samples: true, ..u },
            NegKhinchine => Uses { body: true, l: true, samples: true, ..u },
            MeStability => Uses { body: true, k: true, subspaces: true, inner_samples: true, samples: true, ..u },
            DimLift => Uses { body: true, n: true, k: true, subspaces: true, samples: true, restarts: true, ..u },
            UpperInclusion | LowerInclusion => {
                Uses { body: true, l: true, c: true, subspaces: true, samples: true, restarts: true, ..u }
            }
            CubeGap => Uses { n: true, samples: true, ..u },
            SmallBallFit => Uses { body: true, eps: true, samples: true, ..u },
        },
    }
}

fn canonical_body(spec: &str) -> Result<ConvexBody, CliError> {
    ConvexBody::from_str(spec).map_err(|e| usage("--body", e.to_string()))
}

/// Canonical family for `lp:<p>` or the family of `lp:<p>:<n>`.
fn canonical_family(spec: &str) -> Result<(String, Option<usize>), CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.len() {
        2 => {
            let probe = canonical_body(&format!("{spec}:1"))?;
            Ok((experiments::family_of(&probe)?, None))
        }
        _ => {
            let body = canonical_body(spec)?;
            Ok((experiments::family_of(&body)?, Some(body.dim())))
        }
    }
}

fn integer_list(flag: &str, xs: &[f64]) -> Result<Vec<usize>, CliError> {
    xs.iter()
        .map(|&x| {
            if x.fract() == 0.0 && x >= 1.0 {
                Ok(x as usize)
            } else {
                Err(usage(flag, format!("expected a positive integer (got {x})")))
            }
        })
        .collect()
}

fn single<T: Copy>(flag: &str, xs: &[T]) -> Result<Option<T>, CliError> {
    match xs {
        [] => Ok(None),
        [x] => Ok(Some(*x)),
        _ => Err(usage(flag, "expects a single value")),
    }
}

fn or_default<T: Clone>(given: &[T], default: &[T]) -> Vec<T> {
    if given.is_empty() {
        default.to_vec()
    } else {
        given.to_vec()
    }
}

fn to_f64s(xs: &[usize]) -> Vec<f64> {
    xs.iter().map(|&x| x as f64).collect()
}

/// Parse an argument vector (without the program name).
pub fn parse_args<I, S>(args: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv = std::iter::once(std::ffi::OsString::from("dvlab")).chain(args.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(argv)?;
    resolve(cli).map_err(|e| clap::Error::raw(clap::error::ErrorKind::ValueValidation, format!("{e}\n")))
}

fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
    let (command, o) = match cli.command {
        Cmd::Stats(o) => (Command::Stats, o),
        Cmd::SmallBall(o) => (Command::SmallBall, o),
        Cmd::Moments(o) => (Command::Moments, o),
        Cmd::Sections(o) => (Command::Sections, o),
        Cmd::Verify { experiment, opts } => (Command::Verify(experiment), opts),
    };
    let u = uses(command);
    let unused = [
        ("--body", !u.body && o.body.is_some()),
        ("--n", !u.n && !o.n.is_empty()),
        ("--l", !u.l && !o.l.is_empty()),
        ("--k", !u.k && !o.k.is_empty()),
        ("--eps", !u.eps && !o.eps.is_empty()),
        ("--c", !u.c && !o.c.is_empty()),
        ("--scales", !u.scales && !o.scales.is_empty()),
        ("--u", !u.u && o.u.is_some()),
        ("--samples", !u.samples && o.samples.is_some()),
        ("--subspaces", !u.subspaces && o.subspaces.is_some()),
        ("--restarts", !u.restarts && o.restarts.is_some()),
        ("--inner-samples", !u.inner_samples && o.inner_samples.is_some()),
    ];
    if let Some((flag, _)) = unused.iter().find(|(_, bad)| *bad) {
        return Err(usage(flag, format!("not used by `{}`", command.words().join(" "))));
    }
    let format = match (cli.format, &cli.out) {
        (Some(f), _) => f,
        (None, Some(p)) if p.extension().is_some_and(|e| e == "csv") => Format::Csv,
        _ => Format::Json,
    };
    if format != Format::Json && cli.out.is_none() {
        return Err(usage("--format", "csv output needs --out"));
    }
    let mut cfg = RunConfig {
        command,
        body: None,
        n: Vec::new(),
        l: Vec::new(),
        k: Vec::new(),
        eps: Vec::new(),
        c: Vec::new(),
        scales: Vec::new(),
        u: None,
        samples: None,
        subspaces: None,
        restarts: None,
        inner_samples: None,
        seed: cli.seed,
        threads: cli.threads,
        out: cli.out,
        format,
    };
    let opt = SphereOptConfig::default();
    let single_body = |default: &str| -> Result<Option<String>, CliError> {
        Ok(Some(canonical_body(o.body.as_deref().unwrap_or(default))?.spec()))
    };
    use Experiment::*;
    match command {
        Command::Stats => {
            cfg.body = single_body("lp:inf:256")?;
            let u = o.u.unwrap_or(dvlab::estimators::DEFAULT_U);
            if u <= 1.0 {
                return Err(usage("--u", format!("u must exceed 1 (got {u})")));
            }
            cfg.u = Some(u);
            cfg.samples = Some(o.samples.unwrap_or(1_000_000));
            cfg.restarts = Some(o.restarts.unwrap_or(opt.restarts));
        }
        Command::SmallBall => {
            cfg.body = single_body("lp:inf:256")?;
            cfg.eps = or_default(&o.eps, &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]);
            cfg.samples = Some(o.samples.unwrap_or(1_000_000));
        }
        Command::Moments => {
            cfg.body = single_body("lp:inf:256")?;
            cfg.l = or_default(&o.l, &[1.0, 2.0, 4.0, 8.0]);
            cfg.k = or_default(&o.k, &[1.0, 2.0, 4.0]);
            cfg.samples = Some(o.samples.unwrap_or(1_000_000));
        }
        Command::Sections => {
            let d = SectionsParams::default();
            cfg.body = single_body("lp:inf:256")?;
            let l = single("--l", &integer_list("--l", &o.l)?)?.unwrap_or(d.l);
            cfg.l = vec![l as f64];
            cfg.k = vec![single("--k", &o.k)?.unwrap_or(l as f64)];
            cfg.subspaces = Some(o.subspaces.unwrap_or(d.subspaces));
            cfg.restarts = Some(o.restarts.unwrap_or(opt.restarts));
            cfg.inner_samples = Some(o.inner_samples.unwrap_or(d.vrad_samples));
        }
        Command::Verify(Transfer) => {
            let d = TransferParams::default();
            let (family, n) = canonical_family(o.body.as_deref().unwrap_or("lp:inf"))?;
            cfg.body = Some(family);
            cfg.n = match (o.n.is_empty(), n) {
                (false, _) => o.n.clone(),
                (true, Some(n)) => vec![n],
                (true, None) => d.n_list,
            };
            cfg.scales = or_default(&o.scales, &d.scales);
            cfg.samples = Some(o.samples.unwrap_or(d.samples));
        }
        Command::Verify(Vrad) => {
            let d = VradParams::default();
            cfg.body = single_body("lp:1:50")?;
            cfg.k = to_f64s(&integer_list("--k", &or_default(&o.k, &to_f64s(&d.k_list)))?);
            cfg.samples = Some(o.samples.unwrap_or(d.samples));
            cfg.inner_samples = Some(o.inner_samples.unwrap_or(d.inner_samples));
        }
        Command::Verify(NegKhinchine) => {
            let d = NegKhinchineParams::default();
            cfg.body = single_body("lp:inf:256")?;
            cfg.l = or_default(&o.l, &d.l_grid);
            cfg.samples = Some(o.samples.unwrap_or(d.samples));
        }
        Command::Verify(MeStability) => {
            let d = MeStabilityParams::default();
            cfg.body = single_body("lp:inf:128")?;
            cfg.k = to_f64s(&integer_list("--k", &or_default(&o.k, &to_f64s(&d.k_list)))?);
            cfg.subspaces = Some(o.subspaces.unwrap_or(d.num_subspaces));
            cfg.inner_samples = Some(o.inner_samples.unwrap_or(d.inner_samples));
            cfg.samples = Some(o.samples.unwrap_or(d.samples));
        }
        Command::Verify(DimLift) => {
            let d = DimLiftParams::default();
            let mut families = Vec::new();
            let mut dims = Vec::new();
            match &o.body {
                Some(spec) => {
                    for part in spec.split(',') {
                        let (f, n) = canonical_family(part.trim())?;
                        families.push(f);
                        dims.extend(n);
                    }
                }
                None => families = d.families.clone(),
            }
            cfg.body = Some(families.join(","));
            dims.sort_unstable();
            dims.dedup();
            cfg.n = if !o.n.is_empty() {
                o.n.clone()
            } else if !dims.is_empty() {
                dims
            } else {
                d.n_list
            };
            let k = single("--k", &integer_list("--k", &o.k)?)?.unwrap_or(d.k);
            cfg.k = vec![k as f64];
            cfg.subspaces = Some(o.subspaces.unwrap_or(d.num_subspaces));
            cfg.samples = Some(o.samples.unwrap_or(d.samples));
            cfg.restarts = Some(o.restarts.unwrap_or(opt.restarts));
        }
        Command::Verify(e @ (UpperInclusion | LowerInclusion)) => {
            let (l_list, c_grid, subs, samples) = if e == UpperInclusion {
                let d = UpperInclusionParams::default();
                (d.l_list, d.c_grid, d.num_subspaces, d.samples)
            } else {
                let d = LowerInclusionParams::default();
                (d.l_list, d.c_grid, d.num_subspaces, d.samples)
            };
            cfg.body = single_body("lp:inf:256")?;
            cfg.l = to_f64s(&integer_list("--l", &or_default(&o.l, &to_f64s(&l_list)))?);
            cfg.c = or_default(&o.c, &c_grid);
            cfg.subspaces = Some(o.subspaces.unwrap_or(subs));
            cfg.samples = Some(o.samples.unwrap_or(samples));
            cfg.restarts = Some(o.restarts.unwrap_or(opt.restarts));
        }
        Command::Verify(CubeGap) => {
            let d = CubeGapParams::default();
            cfg.n = or_default(&o.n, &d.n_list);
            cfg.samples = Some(o.samples.unwrap_or(d.samples));
        }
        Command::Verify(SmallBallFit) => {
            let d = SmallBallFitParams::default();
            cfg.body = single_body("lp:1:64")?;
            cfg.eps = or_default(&o.eps, &d.eps_grid);
            cfg.samples = Some(o.samples.unwrap_or(d.samples));
        }
    }
    if cfg.eps.iter().any(|&e| e >= 1.0) {
        return Err(usage("--eps", "ε must lie in (0, 1)"));
    }
    Ok(cfg)
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Arguments that determine the computation (everything except
    /// threads and output placement).
    pub fn experiment_args(&self) -> Vec<String> {
        let mut a: Vec<String> = self.command.words().iter().map(|w| w.to_string()).collect();
        let mut push = |flag: &str, v: String| {
            a.push(flag.to_string());
            a.push(v);
        };
        if let Some(b) = &self.body {
            push("--body", b.clone());
        }
        for (flag, xs) in [("--l", &self.l), ("--k", &self.k), ("--eps", &self.eps), ("--c", &self.c), ("--scales", &self.scales)] {
            if !xs.is_empty() {
                push(flag, join(xs));
            }
        }
        if !self.n.is_empty() {
            push("--n", join(&self.n));
        }
        if let Some(u) = self.u {
            push("--u", u.to_string());
        }
        for (flag, v) in [
            ("--samples", self.samples),
            ("--subspaces", self.subspaces),
            ("--restarts", self.restarts),
            ("--inner-samples", self.inner_samples),
        ] {
            if let Some(v) = v {
                push(flag, v.to_string());
            }
        }
        push("--seed", self.seed.to_string());
        a
    }

    /// Full canonical argument list; parses back to an identical config.
    pub fn canonical_args(&self) -> Vec<String> {
        let mut a = self.experiment_args();
        if let Some(t) = self.threads {
            a.extend(["--threads".to_string(), t.to_string()]);
        }
        if let Some(o) = &self.out {
            a.extend(["--out".to_string(), o.display().to_string()]);
        }
        a.extend(["--format".to_string(), self.format.as_str().to_string()]);
        a
    }

    pub fn canonical(&self) -> String {
        self.canonical_args().join(" ")
    }

    fn body(&self) -> Result<ConvexBody, CliError> {
        canonical_body(self.body.as_deref().unwrap_or_default())
    }

    fn optimizer(&self) -> SphereOptConfig {
        SphereOptConfig { restarts: self.restarts.unwrap_or(SphereOptConfig::default().restarts), ..Default::default() }
    }

    fn usize_list(xs: &[f64]) -> Vec<usize> {
        xs.iter().map(|&x| x as usize).collect()
    }

    /// Thread count from the config or the environment.
    pub fn thread_count(&self) -> Result<Option<usize>, CliError> {
        if self.threads.is_some() {
            return Ok(self.threads);
        }
        match std::env::var(THREADS_ENV) {
            Ok(s) if !s.trim().is_empty() => positive_usize(s.trim()).map(Some).map_err(|r| usage(THREADS_ENV, r)),
            _ => Ok(None),
        }
    }
}

/// Run the configured command on a dedicated thread pool.
pub fn execute(cfg: &RunConfig) -> Result<ExperimentReport, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.thread_count()? {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| CliError::ThreadPool(e.to_string()))?;
    let mut report = pool.install(|| run(cfg))?;
    report.command = Some(cfg.experiment_args().join(" "));
    Ok(report)
}

fn run(cfg: &RunConfig) -> Result<ExperimentReport, CliError> {
    use Experiment::*;
    let seed = SeedSpec::new(cfg.seed);
    let samples = cfg.samples.unwrap_or(1);
    let report = match cfg.command {
        Command::Stats => experiments::stats_report(&cfg.body()?, cfg.u.unwrap_or(2.0), samples, &cfg.optimizer(), &seed)?,
        Command::SmallBall => experiments::small_ball_report(&cfg.body()?, &cfg.eps, samples, &seed)?,
        Command::Moments => experiments::moments_report(&cfg.body()?, &cfg.l, &cfg.k, samples, &seed)?,
        Command::Sections => {
            let p = SectionsParams {
                l: cfg.l[0] as usize,
                subspaces: cfg.subspaces.unwrap_or(1),
                optimizer: cfg.optimizer(),
                vrad_k: cfg.k.first().copied(),
                vrad_samples: cfg.inner_samples.unwrap_or(1),
            };
            experiments::sections_report(&cfg.body()?, &p, &seed)?
        }
        Command::Verify(Transfer) => {
            let p = TransferParams { n_list: cfg.n.clone(), scales: cfg.scales.clone(), samples };
            experiments::verify_transfer(cfg.body.as_deref().unwrap_or("lp:inf"), &p, &seed)?
        }
        Command::Verify(Vrad) => {
            let p = VradParams {
                k_list: RunConfig::usize_list(&cfg.k),
                samples,
                inner_samples: cfg.inner_samples.unwrap_or(1),
            };
            experiments::verify_vrad(&cfg.body()?, &p, &seed)?
        }
        Command::Verify(NegKhinchine) => {
            let p = NegKhinchineParams { l_grid: cfg.l.clone(), samples };
            experiments::verify_negative_khinchine(&cfg.body()?, &p, &seed)?
        }
        Command::Verify(MeStability) => {
            let p = MeStabilityParams {
                k_list: RunConfig::usize_list(&cfg.k),
                num_subspaces: cfg.subspaces.unwrap_or(1),
                inner_samples: cfg.inner_samples.unwrap_or(1),
                samples,
            };
            experiments::verify_me_stability(&cfg.body()?, &p, &seed)?
        }
        Command::Verify(DimLift) => {
            let families = cfg.body.as_deref().unwrap_or_default().split(',').map(String::from).collect();
            let p = DimLiftParams {
                families,
                n_list: cfg.n.clone(),
                k: cfg.k[0] as usize,
                num_subspaces: cfg.subspaces.unwrap_or(1),
                samples,
                optimizer: cfg.optimizer(),
            };
            experiments::verify_dimension_lift(&p, &seed)?
        }
        Command::Verify(UpperInclusion) => {
            let p = UpperInclusionParams {
                l_list: RunConfig::usize_list(&cfg.l),
                c_grid: cfg.c.clone(),
                num_subspaces: cfg.subspaces.unwrap_or(1),
                samples,
                optimizer: cfg.optimizer(),
            };
            experiments::verify_upper_inclusion(&cfg.body()?, &p, &seed)?
        }
        Command::Verify(LowerInclusion) => {
            let p = LowerInclusionParams {
                l_list: RunConfig::usize_list(&cfg.l),
                c_grid: cfg.c.clone(),
                num_subspaces: cfg.subspaces.unwrap_or(1),
                samples,
                optimizer: cfg.optimizer(),
            };
            experiments::verify_lower_inclusion(&cfg.body()?, &p, &seed)?
        }
        Command::Verify(CubeGap) => {
            let p = CubeGapParams { n_list: cfg.n.clone(), samples, controls: true };
            experiments::cube_gap_study(&p, &seed)?
        }
        Command::Verify(SmallBallFit) => {
            let p = SmallBallFitParams { eps_grid: cfg.eps.clone(), samples, surrogate: true };
            experiments::small_ball_exponent_fit(&cfg.body()?, &p, &seed)?
        }
    };
    // sweeps validate their family lazily; make sure it builds
    if let (Some(b), Some(&n)) = (&cfg.body, cfg.n.first()) {
        for f in b.split(',') {
            body_for(f, n)?;
        }
    }
    Ok(report)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Column schema of the estimates CSV.
pub const ESTIMATE_COLUMNS: [&str; 8] = ["body", "n", "quantity", "value", "stderr", "samples", "method", "seed_path"];

fn dimension_of(report: &ExperimentReport, quantity: &str) -> String {
    if let Some(rest) = quantity.split('/').find_map(|p| p.strip_prefix("n=")) {
        return rest.to_string();
    }
    report
        .body
        .rsplit_once(':')
        .and_then(|(_, n)| n.parse::<usize>().ok())
        .map(|n| n.to_string())
        .unwrap_or_default()
}

pub fn estimates_csv(report: &ExperimentReport) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(ESTIMATE_COLUMNS)?;
    for (name, e) in &report.estimates {
        w.write_record([
            report.body.clone(),
            dimension_of(report, name),
            name.clone(),
            e.value.to_string(),
            e.stderr.to_string(),
            e.samples.to_string(),
            e.method.as_str().to_string(),
            e.seed.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| CliError::Io { path: PathBuf::from("<csv>"), source: e.into_error() })
}

pub fn table_csv(table: &dvlab::report::Table) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(cell))?;
    }
    w.into_inner().map_err(|e| CliError::Io { path: PathBuf::from("<csv>"), source: e.into_error() })
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
    path.with_file_name(format!("{stem}.{suffix}"))
}

/// Write the report per the configured format and return the paths
/// written. JSON without `--out` goes to stdout.
///
/// CSV: the report's single table (or the estimates, when it has none or
/// several) goes to `--out`; the estimates and any further tables go to
/// `<stem>.estimates.csv` and `<stem>.<table>.csv` beside it.
pub fn emit_report(report: &ExperimentReport, cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let json = report.to_json();
    let Some(out) = &cfg.out else {
        print!("{json}");
        return Ok(Vec::new());
    };
    let mut written = Vec::new();
    let mut write = |path: PathBuf, bytes: &[u8]| -> Result<(), CliError> {
        write_atomic(&path, bytes)?;
        written.push(path);
        Ok(())
    };
    let csv_main = match cfg.format {
        Format::Json => {
            write(out.clone(), json.as_bytes())?;
            return Ok(written);
        }
        Format::Csv => out.clone(),
        Format::Both => {
            write(out.with_extension("json"), json.as_bytes())?;
            out.with_extension("csv")
        }
    };
    if report.tables.len() == 1 {
        let (name, table) = report.tables.iter().next().expect("one table");
        write(csv_main.clone(), &table_csv(table)?)?;
        log::debug!("table {name} written to {}", csv_main.display());
        write(sibling(&csv_main, "estimates.csv"), &estimates_csv(report)?)?;
    } else {
        write(csv_main.clone(), &estimates_csv(report)?)?;
        for (name, table) in &report.tables {
            write(sibling(&csv_main, &format!("{name}.csv")), &table_csv(table)?)?;
        }
    }
    Ok(written)
}

/// Stderr lines naming failed verdicts; soft failures are informational.
pub fn failure_summary(report: &ExperimentReport) -> Vec<String> {
    let mut lines = Vec::new();
    let soft = report.failed_soft();
    if !soft.is_empty() {
        lines.push(format!("soft checks not met: {}", soft.join(", ")));
    }
    let hard = report.failed_hard();
    if !hard.is_empty() {
        lines.push(format!("hard verdicts failed: {}", hard.join(", ")));
    }
    lines
}

/// 0 iff every hard verdict passed.
pub fn exit_code(report: &ExperimentReport) -> i32 {
    if report.all_hard_passed() {
        0
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_defaults_are_filled() {
        let cfg = parse_args(["stats", "--body", "lp:inf:256", "--seed", "7"]).unwrap();
        assert_eq!(cfg.command, Command::Stats);
        assert_eq!(cfg.body.as_deref(), Some("lp:inf:256"));
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.samples, Some(1_000_000));
        assert_eq!(cfg.restarts, Some(50));
        assert_eq!(cfg.format, Format::Json);
    }

    #[test]
    fn bad_p_names_the_flag() {
        let err = parse_args(["stats", "--body", "lp:0.5:10"]).unwrap_err().to_string();
        assert!(err.contains("p must be ≥ 1"), "{err}");
        assert!(err.contains("--body"), "{err}");
    }

    #[test]
    fn grids_parse() {
        let cfg = parse_args(["verify", "vrad", "--body", "lp:1:50", "--k", "1,3,5"]).unwrap();
        assert_eq!(cfg.k, vec![1.0, 3.0, 5.0]);
        assert_eq!(cfg.command, Command::Verify(Experiment::Vrad));
    }

    #[test]
    fn rejects_bad_counts_and_unused_flags() {
        assert!(parse_args(["stats", "--samples", "0"]).is_err());
        assert!(parse_args(["stats", "--bogus", "1"]).is_err());
        let err = parse_args(["stats", "--eps", "0.5"]).unwrap_err().to_string();
        assert!(err.contains("--eps"), "{err}");
        assert!(parse_args(["verify", "vrad", "--k", "1.5"]).is_err());
        assert!(parse_args(["small-ball", "--eps", "1.2"]).is_err());
    }

    #[test]
    fn canonical_round_trip() {
        let inputs: Vec<Vec<&str>> = vec![
            vec!["stats", "--body", "lp:inf:256", "--seed", "7"],
            vec!["stats", "--u", "3.5", "--samples", "1000"],
            vec!["sections", "--body", "lp:INF:32", "--l", "3", "--out", "s.csv"],
            vec!["verify", "transfer", "--threads", "2"],
            vec!["verify", "dim-lift", "--body", "lp:1,lp:inf", "--k", "2"],
            vec!["verify", "lower-inclusion", "--c", "0.25,0.5", "--format", "both", "--out", "r.json"],
            vec!["moments", "--l", "0.5,2"],
        ];
        for args in inputs {
            let cfg = parse_args(args.clone()).unwrap();
            let again = parse_args(cfg.canonical_args()).unwrap();
            assert_eq!(cfg, again, "{args:?}");
            assert_eq!(cfg.canonical(), again.canonical());
        }
    }

    #[test]
    fn failing_hard_verdict_sets_exit_code_and_is_named() {
        let seed = SeedSpec::new(0);
        let mut r = ExperimentReport::new("t", "lp:2:3", &serde_json::json!({}), &seed);
        r.estimate("a", dvlab::EstimateCI::analytic(1.0, &seed));
        r.soft("fit", false, &["a".into()]);
        assert_eq!(exit_code(&r), 0);
        r.hard("holder_upper", false, &["a".into()]);
        assert_eq!(exit_code(&r), 1);
        let lines = failure_summary(&r);
        assert!(lines.iter().any(|l| l.contains("hard") && l.contains("holder_upper")), "{lines:?}");
    }

    #[test]
    fn format_inferred_from_extension() {
        let cfg = parse_args(["sections", "--out", "x.csv"]).unwrap();
        assert_eq!(cfg.format, Format::Csv);
        assert!(parse_args(["stats", "--format", "csv"]).is_err());
    }
}
