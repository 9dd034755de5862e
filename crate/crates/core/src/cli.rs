//! Batch driver behind the `blab` binary.
//!
//! Every subcommand reads a JSON [`ExperimentConfig`], runs one experiment and
//! writes a report `{"canonical": {...}, "generated_at": ...}` plus optional
//! CSV/text artifacts into the output directory. Only `generated_at` varies
//! between runs with the same seed.
//!
//! Exit codes: 0 success, 1 inequality violations, 2 configuration or input
//! error, 3 numerical failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::{envelope_fit, lemma_check, schwarz_pick_grid, BoundReport, PolarGrid, TheoremChecker};
use crate::critical::{critical_points, critical_sum, log_weighted_sum, protas_sum};
use crate::error::{Error, Result};
use crate::means::{default_radii, hp_trend, ZeroFamily};
use crate::product::{BlaschkeProduct, ZeroSequence};
use crate::regions::{default_type_grid, sample_zeros, BoundarySet, BoundarySetSpec, ModelFunction, RadialLaw, StolzSpec};
use crate::rng::derive_seed;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATIONS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Growth thresholds used to label trend experiments; heuristics, not theorems.
pub const BOUNDED_GROWTH: f64 = 0.10;
pub const UNBOUNDED_GROWTH: f64 = 0.50;
/// Out-of-sample slack of a fitted envelope.
pub const ENVELOPE_SLACK: f64 = 0.10;

#[derive(Debug, Parser)]
#[command(name = "blab", version, about = "Blaschke products with zeros in Stolz-type regions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the vertex lemma `phi(|t - z|lambda||/3) / |1 - conj(lambda) z| <= 2C + K`.
    VerifyLemma(RunArgs),
    /// Check the derivative bound on sampled products over an interior grid.
    VerifyTheorem1(RunArgs),
    /// Locate the critical points of a finite product.
    CriticalPoints(RunArgs),
    /// Weighted sums over critical points.
    CriticalSum(RunArgs),
    /// Estimate the type of a boundary set.
    BetaEstimate(RunArgs),
    /// Hardy means of `B'` across truncations.
    MeansTrend(RunArgs),
    /// Fit `|B'| <= c1 exp(c2 / d^rho)` on a grid.
    EnvelopeFit(RunArgs),
    /// Trace the boundary of a vertex region.
    RegionBoundary(RunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::VerifyLemma(_) => "verify-lemma",
            Command::VerifyTheorem1(_) => "verify-theorem1",
            Command::CriticalPoints(_) => "critical-points",
            Command::CriticalSum(_) => "critical-sum",
            Command::BetaEstimate(_) => "beta-estimate",
            Command::MeansTrend(_) => "means-trend",
            Command::EnvelopeFit(_) => "envelope-fit",
            Command::RegionBoundary(_) => "region-boundary",
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::VerifyLemma(a)
            | Command::VerifyTheorem1(a)
            | Command::CriticalPoints(a)
            | Command::CriticalSum(a)
            | Command::BetaEstimate(a)
            | Command::MeansTrend(a)
            | Command::EnvelopeFit(a)
            | Command::RegionBoundary(a) => a,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Output file names, relative to the output directory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub report: Option<String>,
    pub csv: Option<String>,
    pub points: Option<String>,
}

/// Experiment description. Each subcommand reads the fields it needs and
/// rejects the configuration when one is missing; unknown fields are errors.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional; must name the subcommand when present.
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    pub model: Option<ModelFunction>,
    pub boundary: Option<BoundarySetSpec>,
    pub boundary_file: Option<PathBuf>,
    pub k: Option<f64>,
    pub vertex_angle: Option<f64>,
    pub samples: Option<u64>,
    pub law: Option<RadialLaw>,
    pub zeros_file: Option<PathBuf>,
    /// Number of zeros to sample when no zeros file is given.
    pub zeros: Option<usize>,
    pub products: Option<usize>,
    pub degree_range: Option<[usize; 2]>,
    pub grid: Option<PolarGrid>,
    pub rho: Option<f64>,
    pub beta: Option<f64>,
    pub eps: Option<f64>,
    pub p: Option<Vec<f64>>,
    pub truncations: Option<Vec<usize>>,
    pub radii: Option<Vec<f64>>,
    pub family: Option<ZeroFamily>,
    pub resolution: Option<usize>,
    pub type_grid: Option<Vec<f64>>,
    pub outputs: Option<Outputs>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn require<T: Clone>(value: &Option<T>, field: &str) -> Result<T> {
        value
            .clone()
            .ok_or_else(|| Error::domain(format!("configuration field `{field}` is required")))
    }

    fn seed(&self) -> Result<u64> {
        Self::require(&self.seed, "seed")
    }

    fn boundary_set(&self, base: &Path) -> Result<BoundarySet> {
        match (&self.boundary, &self.boundary_file) {
            (Some(spec), None) => BoundarySet::from_spec(spec.clone()),
            (None, Some(path)) => BoundarySet::from_json(&fs::read_to_string(base.join(path))?),
            (Some(_), Some(_)) => Err(Error::domain("give either `boundary` or `boundary_file`, not both")),
            (None, None) => Err(Error::domain("configuration field `boundary` is required")),
        }
    }

    fn stolz(&self, base: &Path) -> Result<StolzSpec> {
        StolzSpec::new(Self::require(&self.model, "model")?, self.boundary_set(base)?, Self::require(&self.k, "k")?)
    }

    fn vertex_stolz(&self) -> Result<StolzSpec> {
        StolzSpec::vertex(
            Self::require(&self.model, "model")?,
            self.vertex_angle.unwrap_or(0.0),
            Self::require(&self.k, "k")?,
        )
    }

    fn law(&self) -> RadialLaw {
        self.law.unwrap_or(RadialLaw::Power { s: 2.0 })
    }

    /// Zeros from `zeros_file`, or `zeros` points sampled in the region.
    fn zero_sequence(&self, base: &Path) -> Result<ZeroSequence> {
        match &self.zeros_file {
            Some(path) => ZeroSequence::parse(&fs::read_to_string(base.join(path))?),
            None => sample_zeros(&self.stolz(base)?, Self::require(&self.zeros, "zeros")?, self.seed()?, self.law()),
        }
    }
}

/// One experiment's outcome before it is written out.
#[derive(Debug)]
pub struct Outcome {
    pub canonical: Value,
    pub violations: u64,
    /// `(default file name, contents)` of the CSV artifact.
    pub csv: Option<(String, String)>,
    /// `(default file name, contents)` of a zero-set text artifact.
    pub points: Option<(String, String)>,
}

impl Outcome {
    fn report(canonical: Value, violations: u64) -> Self {
        Self {
            canonical,
            violations,
            csv: None,
            points: None,
        }
    }
}

fn report_json(r: &BoundReport) -> Value {
    serde_json::to_value(r).expect("reports serialize")
}

fn point_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// Runs one experiment in memory.
pub fn execute(command: &str, config: &ExperimentConfig, base: &Path) -> Result<Outcome> {
    if let Some(kind) = &config.experiment {
        if kind != command {
            return Err(Error::domain(format!(
                "configuration is for `{kind}` but the subcommand is `{command}`"
            )));
        }
    }
    match command {
        "verify-lemma" => verify_lemma(config),
        "verify-theorem1" => verify_theorem(config, base),
        "critical-points" => run_critical_points(config, base),
        "critical-sum" => run_critical_sum(config, base),
        "beta-estimate" => beta_estimate(config, base),
        "means-trend" => means_trend(config),
        "envelope-fit" => run_envelope_fit(config, base),
        "region-boundary" => region_boundary(config),
        other => Err(Error::domain(format!("unknown experiment `{other}`"))),
    }
}

fn verify_lemma(config: &ExperimentConfig) -> Result<Outcome> {
    let spec = config.vertex_stolz()?;
    let samples = ExperimentConfig::require(&config.samples, "samples")?;
    let seed = config.seed()?;
    let report = lemma_check(&spec, samples, seed)?;
    let canonical = json!({
        "experiment": "verify-lemma",
        "anchor": "vertex-lemma: phi(|t - z|lambda||/3) / |1 - conj(lambda) z| <= 2C + K",
        "model": spec.model(),
        "k": spec.k(),
        "vertex_angle": config.vertex_angle.unwrap_or(0.0),
        "bound": spec.lemma_bound(),
        "seed": seed,
        "report": report_json(&report),
    });
    Ok(Outcome::report(canonical, report.violations))
}

fn verify_theorem(config: &ExperimentConfig, base: &Path) -> Result<Outcome> {
    let spec = config.stolz(base)?;
    let grid = config.grid.unwrap_or(PolarGrid {
        radial: 40,
        angular: 50,
        r_max: 0.999,
    });
    grid.validate()?;
    let points = grid.points();
    let mut products = Vec::new();
    if let Some(path) = &config.zeros_file {
        products.push(BlaschkeProduct::new(ZeroSequence::parse(&fs::read_to_string(base.join(path))?)?));
    } else {
        let seed = config.seed()?;
        let count = config.products.unwrap_or(100);
        let [lo, hi] = config.degree_range.unwrap_or([2, 200]);
        if lo == 0 || hi < lo {
            return Err(Error::domain(format!("degree range [{lo}, {hi}] is empty")));
        }
        for i in 0..count {
            let sub = derive_seed(seed, i as u64);
            let degree = lo + (sub % (hi - lo + 1) as u64) as usize;
            products.push(BlaschkeProduct::new(sample_zeros(&spec, degree, sub, config.law())?));
        }
    }
    let mut total = BoundReport::default();
    let mut sp_total = BoundReport::default();
    let mut intermediate_failures = 0u64;
    let mut per_product = Vec::new();
    for b in &products {
        let checker = TheoremChecker::new(b, &spec)?;
        let report = checker.check_grid(&points)?;
        let sp = schwarz_pick_grid(b, &points)?;
        intermediate_failures += points.iter().filter(|&&z| !checker.intermediate_holds(z)).count() as u64;
        per_product.push(json!({
            "degree": b.degree(),
            "alpha": b.alpha(),
            "worst_ratio": report.worst_ratio,
            "violations": report.violations,
        }));
        total = total.merge(report);
        sp_total = sp_total.merge(sp);
    }
    let violations = total.violations + sp_total.violations + intermediate_failures;
    let canonical = json!({
        "experiment": "verify-theorem1",
        "anchor": "derivative-bound: |B'(z)| <= 2(2C + K)^2 sum(1 - |z_n|) / phi(d(z, E)/6)^2",
        "model": spec.model(),
        "boundary": spec.set().spec(),
        "k": spec.k(),
        "seed": config.seed,
        "grid": grid,
        "products": per_product,
        "report": report_json(&total),
        "schwarz_pick": report_json(&sp_total),
        "intermediate_failures": intermediate_failures,
    });
    Ok(Outcome::report(canonical, violations))
}

fn run_critical_points(config: &ExperimentConfig, base: &Path) -> Result<Outcome> {
    let zeros = config.zero_sequence(base)?;
    let b = BlaschkeProduct::new(zeros);
    let cs = critical_points(&b)?;
    let canonical = json!({
        "experiment": "critical-points",
        "anchor": "zero set of B'",
        "degree": b.degree(),
        "count": cs.len(),
        "max_residual": cs.max_residual(),
        "points": cs.points.iter().map(|&z| point_json(z)).collect::<Vec<_>>(),
        "residuals": cs.residuals,
    });
    let mut outcome = Outcome::report(canonical, 0);
    outcome.points = Some(("critical-points.txt".into(), cs.to_text()));
    Ok(outcome)
}

fn run_critical_sum(config: &ExperimentConfig, base: &Path) -> Result<Outcome> {
    let zeros = config.zero_sequence(base)?;
    let set = config.boundary_set(base)?;
    let rho = ExperimentConfig::require(&config.rho, "rho")?;
    let eps = ExperimentConfig::require(&config.eps, "eps")?;
    let beta = match config.beta {
        Some(beta) => beta,
        None => set.type_beta(&config.type_grid.clone().unwrap_or_else(default_type_grid))?,
    };
    let b = BlaschkeProduct::new(zeros);
    let cs = critical_points(&b)?;
    let series = critical_sum(&cs, &set, rho, beta, eps)?;
    let logged = log_weighted_sum(&cs, eps)?;
    let plain: f64 = cs.points.iter().map(|c| 1.0 - c.norm()).sum();
    let canonical = json!({
        "experiment": "critical-sum",
        "anchor": "sum (1 - |c_n|) d(c_n, E)^((rho - beta + eps)_+) over critical points",
        "boundary": set.spec(),
        "degree": b.degree(),
        "rho": rho,
        "beta": beta,
        "eps": eps,
        "exponent": (rho - beta + eps).max(0.0),
        "weighted_sum": series.total(),
        "unweighted_sum": plain,
        "log_weighted_sum": logged.total(),
        "zero_sum": protas_sum(b.zeros(), 1.0)?,
        "terms": series.terms,
    });
    let mut outcome = Outcome::report(canonical, 0);
    outcome.csv = Some(("critical-sum.csv".into(), series.to_csv()?));
    Ok(outcome)
}

fn beta_estimate(config: &ExperimentConfig, base: &Path) -> Result<Outcome> {
    let set = config.boundary_set(base)?;
    let grid = config.type_grid.clone().unwrap_or_else(default_type_grid);
    let beta = set.type_beta(&grid)?;
    let measures = grid
        .iter()
        .map(|&x| set.neighborhood_measure(x))
        .collect::<Result<Vec<_>>>()?;
    let canonical = json!({
        "experiment": "beta-estimate",
        "anchor": "type of E: slope of log |E_x| against log x",
        "boundary": set.spec(),
        "grid": grid,
        "measures": measures,
        "beta": beta,
    });
    Ok(Outcome::report(canonical, 0))
}

fn means_trend(config: &ExperimentConfig) -> Result<Outcome> {
    let family = ExperimentConfig::require(&config.family, "family")?;
    let exponents = ExperimentConfig::require(&config.p, "p")?;
    let truncations = ExperimentConfig::require(&config.truncations, "truncations")?;
    let radii = config.radii.clone().unwrap_or_else(default_radii);
    let mut rows = Vec::new();
    let mut growth = Vec::new();
    for &p in &exponents {
        let table = hp_trend(&family, p, &truncations, &radii)?;
        for pair in truncations.windows(2) {
            let g = table.growth(pair[0], pair[1], p).unwrap_or(f64::NAN);
            growth.push(json!({"p": p, "from": pair[0], "to": pair[1], "growth": g}));
        }
        rows.extend(table.rows);
    }
    let table = crate::means::MeansTable { rows };
    let canonical = json!({
        "experiment": "means-trend",
        "anchor": "Hardy means of B' across truncations",
        "family": family,
        "radii": radii,
        "thresholds": {"bounded_below": BOUNDED_GROWTH, "unbounded_above": UNBOUNDED_GROWTH},
        "rows": table.rows,
        "growth": growth,
    });
    let mut outcome = Outcome::report(canonical, 0);
    outcome.csv = Some(("means-trend.csv".into(), table.to_csv()?));
    Ok(outcome)
}

fn run_envelope_fit(config: &ExperimentConfig, base: &Path) -> Result<Outcome> {
    let set = config.boundary_set(base)?;
    let zeros = config.zero_sequence(base)?;
    let rho = ExperimentConfig::require(&config.rho, "rho")?;
    let grid = config.grid.unwrap_or(PolarGrid {
        radial: 40,
        angular: 512,
        r_max: 0.99,
    });
    grid.validate()?;
    let b = BlaschkeProduct::new(zeros);
    let fit = envelope_fit(&b, &set, rho, &grid.points())?;
    let fine_grid = grid.refined();
    let fine = envelope_fit(&b, &set, rho, &fine_grid.points())?;
    let ratios = fit.ratios(&b, &set, &fine_grid.points())?;
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    let exceed = ratios.iter().filter(|&&r| r > 1.0 + ENVELOPE_SLACK).count() as u64;
    let change = if fit.c2 == fine.c2 { 0.0 } else { (fine.c2 - fit.c2).abs() / fit.c2.max(fine.c2) };
    let canonical = json!({
        "experiment": "envelope-fit",
        "anchor": "|B'(z)| <= c1 exp(c2 / d(z, E)^rho)",
        "boundary": set.spec(),
        "degree": b.degree(),
        "grid": grid,
        "fit": fit,
        "refined_fit": fine,
        "c2_relative_change": change,
        "out_of_sample_worst_ratio": worst,
        "out_of_sample_exceedances": exceed,
        "slack": ENVELOPE_SLACK,
    });
    Ok(Outcome::report(canonical, exceed))
}

fn region_boundary(config: &ExperimentConfig) -> Result<Outcome> {
    let spec = config.vertex_stolz()?;
    let angle = config.vertex_angle.unwrap_or(0.0);
    let resolution = config.resolution.unwrap_or(64);
    let points = spec.region_boundary(angle, resolution)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["re", "im"]).map_err(crate::critical::csv_err)?;
    for z in &points {
        w.write_record([z.re.to_string(), z.im.to_string()])
            .map_err(crate::critical::csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    let canonical = json!({
        "experiment": "region-boundary",
        "anchor": "boundary curve phi(|t - lambda|) = K (1 - |lambda|)",
        "model": spec.model(),
        "k": spec.k(),
        "vertex_angle": angle,
        "resolution": resolution,
        "points": points.iter().map(|&z| point_json(z)).collect::<Vec<_>>(),
    });
    let mut outcome = Outcome::report(canonical, 0);
    outcome.csv = Some(("region-boundary.csv".into(), String::from_utf8(bytes).expect("utf-8")));
    Ok(outcome)
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Canonical section serialized alone, as written into the report.
pub fn canonical_bytes(canonical: &Value) -> Vec<u8> {
    serde_json::to_vec_pretty(canonical).expect("json values serialize")
}

fn timestamp() -> String {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    format!("unix:{secs}")
}

/// Files written by a run, in order.
pub fn write_outcome(command: &str, outcome: &Outcome, outputs: &Outputs, out: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out)?;
    let mut written = Vec::new();
    let report = json!({"canonical": outcome.canonical, "generated_at": timestamp()});
    let name = outputs.report.clone().unwrap_or_else(|| format!("{command}.json"));
    let mut bytes = serde_json::to_vec_pretty(&report).expect("json values serialize");
    bytes.push(b'\n');
    let path = out.join(name);
    write_atomic(&path, &bytes)?;
    written.push(path);
    if let Some((default, contents)) = &outcome.csv {
        let path = out.join(outputs.csv.clone().unwrap_or_else(|| default.clone()));
        write_atomic(&path, contents.as_bytes())?;
        written.push(path);
    }
    if let Some((default, contents)) = &outcome.points {
        let path = out.join(outputs.points.clone().unwrap_or_else(|| default.clone()));
        write_atomic(&path, contents.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

/// Exit code for an error raised while running an experiment.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Domain(_)
        | Error::InvalidZero { .. }
        | Error::Precondition(_)
        | Error::Parse { .. }
        | Error::Json(_)
        | Error::Io(_) => EXIT_INPUT,
        Error::Sampling(_)
        | Error::NoConvergence { .. }
        | Error::CountMismatch { .. }
        | Error::InconclusiveContour { .. }
        | Error::Resolution(_) => EXIT_NUMERICAL,
    }
}

fn error_payload(err: &Error) -> Value {
    let kind = match err {
        Error::InvalidZero { .. } => "invalid-zero",
        Error::Domain(_) => "domain",
        Error::Sampling(_) => "sampling",
        Error::Precondition(_) => "precondition",
        Error::NoConvergence { .. } => "no-convergence",
        Error::CountMismatch { .. } => "count-mismatch",
        Error::InconclusiveContour { .. } => "inconclusive-contour",
        Error::Resolution(_) => "resolution",
        Error::Parse { .. } => "parse",
        Error::Io(_) => "io",
        Error::Json(_) => "config",
    };
    json!({"error": kind, "message": err.to_string()})
}

/// Sizes the global thread pool from `BLAB_THREADS` when set.
pub fn configure_threads() -> Result<()> {
    if let Ok(value) = std::env::var("BLAB_THREADS") {
        let n: usize = value
            .trim()
            .parse()
            .map_err(|_| Error::domain(format!("BLAB_THREADS must be a positive integer, got `{value}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::domain(format!("thread pool: {e}")))?;
    }
    Ok(())
}

/// Parses the config, runs the experiment, writes artifacts; returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    let command = cli.command.name();
    let args = cli.command.args();
    let loaded = fs::read_to_string(&args.config)
        .map_err(Error::from)
        .and_then(|text| ExperimentConfig::from_json(&text));
    let mut config = match loaded {
        Ok(config) => config,
        Err(err) => {
            eprintln!("{}: {}", args.config.display(), error_payload(&err));
            return EXIT_INPUT;
        }
    };
    if args.seed.is_some() {
        config.seed = args.seed;
    }
    let base = args.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let outcome = match configure_threads().and_then(|_| execute(command, &config, &base)) {
        Ok(outcome) => outcome,
        Err(err) => {
            eprintln!("{}", error_payload(&err));
            return exit_code(&err);
        }
    };
    match write_outcome(command, &outcome, &config.outputs.clone().unwrap_or_default(), &args.out) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
        }
        Err(err) => {
            eprintln!("{}", error_payload(&err));
            return EXIT_INPUT;
        }
    }
    if outcome.violations > 0 {
        eprintln!("{command}: {} violation(s)", outcome.violations);
        EXIT_VIOLATIONS
    } else {
        EXIT_OK
    }
}
