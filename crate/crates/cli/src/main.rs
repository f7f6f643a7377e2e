//! `shapefn`: compute functionals, run the inequality ledger, search shape
//! families and tabulate the disjoint-ball sequence.
//!
//! Exit codes: 0 success, 1 a ledger row failed, 2 invalid input, 3 a
//! numerical backend failed.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use shapefn::bounds::{ledger, standard_corpus, CorpusSpec, LedgerConfig, Summary};
use shapefn::estimators::EstimatorConfig;
use shapefn::functionals::{evaluate, Evaluation, FunctionalId};
use shapefn::geometry::Body;
use shapefn::report::to_json;
use shapefn::search::{
    counterexample_csv, counterexample_sequence, doubling_grid, loglog_slope, maximize, maximize_constrained,
    CounterexampleRow, Family, SearchConfig, SearchResult,
};
use shapefn::Error;

#[derive(Parser, Debug)]
#[command(name = "shapefn", version, about = "Torsion-capacity shape functionals")]
struct Cli {
    /// Cap on worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Base seed for every random stream.
    #[arg(long, global = true, env = "SHAPEFN_SEED", default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct EstimatorArgs {
    /// Walks per Monte Carlo estimate.
    #[arg(long)]
    walks: Option<usize>,

    /// Boundary points for planar logarithmic capacity.
    #[arg(long)]
    fekete_points: Option<usize>,
}

impl EstimatorArgs {
    fn config(&self, seed: u64) -> EstimatorConfig {
        let mut cfg = EstimatorConfig::default().with_seed(seed);
        if let Some(w) = self.walks {
            cfg = cfg.with_walks(w);
        }
        if let Some(n) = self.fekete_points {
            cfg.fekete_points = n;
        }
        cfg
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one functional on a body read from JSON.
    Compute {
        body: PathBuf,
        /// `G`, `H`, `G_alpha`, `H_alpha`, or `G_alpha(α)` / `H_alpha(α)`.
        #[arg(long, short)]
        functional: String,
        #[arg(long)]
        alpha: Option<f64>,
        #[command(flatten)]
        estimator: EstimatorArgs,
    },
    /// Run every inequality check on a corpus; exits 1 if any row fails.
    Verify {
        /// Directory of body JSON files; the built-in corpus when omitted.
        corpus: Option<PathBuf>,
        /// Directory for `ledger.csv` and `ledger.json`; CSV goes to standard
        /// output when omitted.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Random ellipsoids per dimension in the built-in corpus.
        #[arg(long, default_value_t = 1000)]
        ellipsoids_per_dim: usize,
        /// Random ellipses and random polygons in the built-in corpus.
        #[arg(long, default_value_t = 100)]
        planar: usize,
        /// Negative control: corrupt one passing row before reporting.
        #[arg(long)]
        self_test_tamper: bool,
        #[command(flatten)]
        estimator: EstimatorArgs,
    },
    /// Maximise a functional over a shape family.
    Search {
        /// Defaults to `G` for d ≥ 3 and `H` in the plane.
        #[arg(long, short)]
        functional: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, value_enum, default_value_t = FamilyArg::Ellipsoids)]
        family: FamilyArg,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        /// Run the volume-constrained search at this ε instead.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Function evaluations per restart.
        #[arg(long, default_value_t = 4000)]
        budget: usize,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[command(flatten)]
        estimator: EstimatorArgs,
    },
    /// Interval table of `G` on `k` disjoint balls of radii `j^{−β}`.
    Counterexample {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        /// Largest k; the grid is 1, 2, 4, … up to it.
        #[arg(long, default_value_t = 1 << 22)]
        kmax: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Write here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum FamilyArg {
    Ellipsoids,
    Boxes,
    Capsules,
    Slab,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    body_files: Vec<String>,
    functional: Option<String>,
    estimator: EstimatorConfig,
    seed: u64,
    outputs: Vec<String>,
    tool_version: &'static str,
}

impl RunManifest {
    fn new(command: &str, seed: u64, estimator: EstimatorConfig) -> Self {
        Self {
            command: command.to_string(),
            body_files: Vec::new(),
            functional: None,
            estimator,
            seed,
            outputs: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Serialize)]
struct ComputeOutput {
    #[serde(flatten)]
    evaluation: Evaluation,
    manifest: RunManifest,
}

#[derive(Serialize)]
struct LedgerOutput<'a> {
    manifest: RunManifest,
    summary: Summary,
    rows: &'a [shapefn::bounds::BoundReport],
    parse_errors: Vec<String>,
}

#[derive(Serialize)]
struct SearchOutput {
    manifest: RunManifest,
    result: SearchResult,
}

#[derive(Serialize)]
struct CounterexampleOutput {
    manifest: RunManifest,
    dim: usize,
    beta: f64,
    slope_top_decade: Option<f64>,
    rows: Vec<CounterexampleRow>,
}

/// Failure carrying its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_estimator_failure() { 3 } else { 2 };
        Failure {
            code,
            error: e.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        match error.downcast_ref::<Error>() {
            Some(e) if e.is_estimator_failure() => Failure { code: 3, error },
            _ => Failure { code: 2, error },
        }
    }
}

fn parse_functional(name: &str, alpha: Option<f64>) -> Result<FunctionalId, Error> {
    match (name.trim(), alpha) {
        ("G_alpha" | "G_α", Some(a)) => Ok(FunctionalId::GAlpha(a)),
        ("H_alpha" | "H_α", Some(a)) => Ok(FunctionalId::HAlpha(a)),
        ("G_alpha" | "G_α" | "H_alpha" | "H_α", None) => {
            Err(Error::Invalid(format!("{name} needs --alpha")))
        }
        (other, None) => other.parse(),
        (other, Some(_)) => Err(Error::Invalid(format!("--alpha applies to G_alpha or H_alpha, not {other}"))),
    }
}

fn read_body(path: &Path) -> anyhow::Result<Body> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Body::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_out(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn compute(
    seed: u64,
    body_path: &Path,
    functional: &str,
    alpha: Option<f64>,
    est: &EstimatorArgs,
) -> Result<u8, Failure> {
    let f = parse_functional(functional, alpha)?;
    let body = read_body(body_path)?;
    f.validate(body.dim())?;
    let cfg = est.config(seed);
    let evaluation = evaluate(f, &body, &cfg)?;
    let mut manifest = RunManifest::new("compute", seed, cfg);
    manifest.body_files.push(body_path.display().to_string());
    manifest.functional = Some(f.to_string());
    print!("{}", to_json(&ComputeOutput { evaluation, manifest })?);
    Ok(0)
}

/// Bodies by file stem, the files read, and the files that failed to parse.
type Corpus = (Vec<(String, Body)>, Vec<String>, Vec<String>);

fn load_corpus(dir: &Path) -> anyhow::Result<Corpus> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading corpus directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut bodies = Vec::new();
    let mut files = Vec::new();
    let mut errors = Vec::new();
    for p in paths {
        match read_body(&p) {
            Ok(b) => {
                let id = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                files.push(p.display().to_string());
                bodies.push((id, b));
            }
            Err(e) => errors.push(format!("{e:#}")),
        }
    }
    Ok((bodies, files, errors))
}

#[allow(clippy::too_many_arguments)]
fn verify(
    seed: u64,
    corpus: Option<&Path>,
    out_dir: Option<&Path>,
    ellipsoids_per_dim: usize,
    planar: usize,
    tamper: bool,
    est: &EstimatorArgs,
) -> Result<u8, Failure> {
    let cfg = LedgerConfig {
        estimator: est.config(seed),
        ..LedgerConfig::default()
    };
    let mut manifest = RunManifest::new("verify", seed, cfg.estimator.clone());
    let (bodies, parse_errors) = match corpus {
        Some(dir) => {
            let (bodies, files, errors) = load_corpus(dir)?;
            for e in &errors {
                eprintln!("skipping: {e}");
            }
            manifest.body_files = files;
            (bodies, errors)
        }
        None => {
            let spec = CorpusSpec {
                ellipsoids_per_dim,
                ellipses: planar,
                polygons: planar,
                seed,
                ..CorpusSpec::default()
            };
            (standard_corpus(&spec)?, Vec::new())
        }
    };
    if bodies.is_empty() {
        return Err(Error::Invalid("corpus contains no readable bodies".into()).into());
    }
    let mut result = ledger(&bodies, &cfg);
    if tamper {
        if let Some(i) = result.tamper() {
            eprintln!("tampered with row {i} ({})", result.rows[i].kind);
        }
    }
    let summary = result.summary();
    let csv = result.to_csv()?;
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let csv_path = dir.join("ledger.csv");
        let json_path = dir.join("ledger.json");
        manifest.outputs = vec![csv_path.display().to_string(), json_path.display().to_string()];
        write_out(Some(&csv_path), &csv)?;
        let out = LedgerOutput {
            manifest,
            summary: summary.clone(),
            rows: &result.rows,
            parse_errors,
        };
        write_out(Some(&json_path), &to_json(&out)?)?;
    } else {
        print!("{csv}");
    }
    eprintln!(
        "{} rows: {} pass, {} fail, {} inconclusive, {} vacuous, {} out of regime, {} error",
        summary.total,
        summary.pass,
        summary.fail,
        summary.inconclusive,
        summary.vacuous,
        summary.out_of_regime,
        summary.error
    );
    Ok(if summary.fail > 0 {
        1
    } else if summary.error > 0 {
        3
    } else {
        0
    })
}

#[allow(clippy::too_many_arguments)]
fn search(
    seed: u64,
    functional: Option<&str>,
    alpha: Option<f64>,
    family: FamilyArg,
    dim: usize,
    epsilon: Option<f64>,
    budget: usize,
    restarts: usize,
    est: &EstimatorArgs,
) -> Result<u8, Failure> {
    let f = match functional {
        Some(name) => parse_functional(name, alpha)?,
        None if dim == 2 => FunctionalId::H,
        None => FunctionalId::G,
    };
    let cfg = SearchConfig {
        estimator: est.config(seed),
        restarts,
        max_evaluations: budget,
        seed,
        ..SearchConfig::default()
    };
    let result = match epsilon {
        Some(eps) => maximize_constrained(f, dim, eps, &cfg)?,
        None => {
            let name = match family {
                FamilyArg::Ellipsoids => "ellipsoids",
                FamilyArg::Boxes => "boxes",
                FamilyArg::Capsules => "capsules",
                FamilyArg::Slab => "slab",
            };
            maximize(f, Family::from_name(name, dim, 0.0)?, &cfg)?
        }
    };
    let mut manifest = RunManifest::new("search", seed, cfg.estimator.clone());
    manifest.functional = Some(f.to_string());
    print!("{}", to_json(&SearchOutput { manifest, result })?);
    Ok(0)
}

fn counterexample(
    seed: u64,
    dim: usize,
    beta: f64,
    kmax: u64,
    format: Format,
    out: Option<&Path>,
) -> Result<u8, Failure> {
    if kmax == 0 {
        return Err(Error::Invalid("--kmax must be at least 1".into()).into());
    }
    let mut grid = doubling_grid(63 - kmax.leading_zeros());
    if *grid.last().expect("non-empty grid") != kmax {
        grid.push(kmax);
    }
    let rows = counterexample_sequence(dim, beta, &grid)?;
    let text = match format {
        Format::Csv => counterexample_csv(&rows)?,
        Format::Json => {
            let mut manifest = RunManifest::new("counterexample", seed, EstimatorConfig::default().with_seed(seed));
            if let Some(p) = out {
                manifest.outputs.push(p.display().to_string());
            }
            to_json(&CounterexampleOutput {
                manifest,
                dim,
                beta,
                slope_top_decade: loglog_slope(&rows, 10.0),
                rows,
            })?
        }
    };
    write_out(out, &text)?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .context("configuring the thread pool")?;
    }
    let seed = cli.seed;
    match &cli.command {
        Command::Compute {
            body,
            functional,
            alpha,
            estimator,
        } => compute(seed, body, functional, *alpha, estimator),
        Command::Verify {
            corpus,
            out_dir,
            ellipsoids_per_dim,
            planar,
            self_test_tamper,
            estimator,
        } => verify(
            seed,
            corpus.as_deref(),
            out_dir.as_deref(),
            *ellipsoids_per_dim,
            *planar,
            *self_test_tamper,
            estimator,
        ),
        Command::Search {
            functional,
            alpha,
            family,
            dim,
            epsilon,
            budget,
            restarts,
            estimator,
        } => search(
            seed,
            functional.as_deref(),
            *alpha,
            *family,
            *dim,
            *epsilon,
            *budget,
            *restarts,
            estimator,
        ),
        Command::Counterexample {
            dim,
            beta,
            kmax,
            format,
            out,
        } => counterexample(seed, *dim, *beta, *kmax, *format, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
