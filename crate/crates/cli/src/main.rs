use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use wmink::body::{is_zonotope, SymmetricPolytope};
use wmink::density::{
    check_evenness, check_homogeneity, check_implied_concavity, check_p_concavity, DensityKind, WeightedDensity,
};
use wmink::directions::{axes_and_diagonals, direction_set};
use wmink::integrate::{body_measure, body_measure_cone, body_measure_mc, gaussian_body_measure};
use wmink::io::{parse, BodyFile, DensityFile, ProblemFile};
use wmink::minkowski::{solve, uniqueness_probe, SolverOptions};
use wmink::mixed::{first_inequality_check, mixed_measure, mixed_measure_oracle, FIRST_INEQUALITY_TOL};
use wmink::projection::projection_profile;
use wmink::shephard::{compare, shephard_batch, stability_report, Verdict, DOMINANCE_TOL, MEASURE_TOL};
use wmink::suite::{run_all, SuiteConfig};
use wmink::surface::{sigma, sigma_scaled};

/// Weighted surface area measures, mixed measures, projection functions and
/// the weighted Minkowski and Shephard problems for symmetric polytopes.
///
/// Exit status: 0 when every check passes, 1 when a check fails, 2 on
/// invalid input (schema errors name the offending JSON pointer).
#[derive(Parser)]
#[command(name = "wmink", version)]
struct Cli {
    /// Seed for every stochastic step. Required by commands that sample.
    #[arg(long, global = true, env = "WMINK_SEED")]
    seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Report format. csv is available for sigma, project and shephard batch.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Leave the timestamp out of the metadata block, so that repeated runs
    /// are byte-identical.
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Density checks.
    #[command(subcommand)]
    Density(DensityCmd),
    /// Body inspection.
    #[command(subcommand)]
    Body(BodyCmd),
    /// Atoms of the weighted surface area measure.
    Sigma {
        body: PathBuf,
        density: PathBuf,
        /// Report sigma of the dilate tK.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
    /// mu(K) by the cone formula or quadrature, optionally against Monte Carlo.
    Measure {
        body: PathBuf,
        density: PathBuf,
        /// Add a Monte Carlo estimate.
        #[arg(long)]
        mc: bool,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
    },
    /// Mixed measure mu_1(K, L).
    Mixed {
        k: PathBuf,
        l: PathBuf,
        density: PathBuf,
        /// Add the finite-difference oracle.
        #[arg(long)]
        oracle: bool,
        /// Monte Carlo samples for the oracle (non-homogeneous densities).
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
    },
    /// Projection function P_{mu,K} on a direction set.
    Project {
        body: PathBuf,
        density: PathBuf,
        /// Number of directions: axes and diagonals plus random ones. Without
        /// it, axes and diagonals only.
        #[arg(long)]
        directions: Option<usize>,
        /// Comma-separated t values in (0, 1] for p_{mu,K}(theta, t).
        #[arg(long, value_delimiter = ',')]
        t_grid: Option<Vec<f64>>,
    },
    /// Solve the discrete Minkowski problem of a problem file.
    SolveMinkowski {
        problem: PathBuf,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
        /// With more than one start, also run the uniqueness probe.
        #[arg(long, default_value_t = 1)]
        starts: usize,
    },
    /// Comparison theorem harness.
    #[command(subcommand)]
    Shephard(ShephardCmd),
    /// Single inequality checks.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Run the acceptance suite.
    VerifySuite {
        /// Reduced sizes for a smoke run.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Subcommand)]
enum DensityCmd {
    /// Sampled homogeneity, concavity and evenness checks.
    Validate {
        density: PathBuf,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
}

#[derive(Subcommand)]
enum BodyCmd {
    /// Dimension, facets, vertices, volume and circumradius.
    Info { body: PathBuf },
    /// Central symmetry test of all 2-faces.
    IsZonotope { body: PathBuf },
}

#[derive(Args)]
struct PairArgs {
    k: PathBuf,
    l: PathBuf,
    density: PathBuf,
    /// Directions sampled for the dominance test.
    #[arg(long, default_value_t = 1024)]
    directions: usize,
}

#[derive(Subcommand)]
enum ShephardCmd {
    /// Dominance, zonotope certificate and measure comparison for one pair.
    Check(PairArgs),
    /// Stability bound for one pair.
    Stability(PairArgs),
    /// Random dominated pairs.
    Batch {
        density: PathBuf,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 1024)]
        directions: usize,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// mu_1(K, L) >= (1/q) mu(K)^{1-q} mu(L)^q.
    FirstInequality { k: PathBuf, l: PathBuf, density: PathBuf },
}

/// Result of a command: the report and whether its checks passed.
struct Report {
    result: Value,
    csv: Option<String>,
    passed: bool,
    tolerances: Value,
}

impl Report {
    fn new(result: impl Serialize) -> anyhow::Result<Self> {
        Ok(Self { result: serde_json::to_value(result)?, csv: None, passed: true, tolerances: json!({}) })
    }

    fn passed(mut self, passed: bool) -> Self {
        self.passed = passed;
        self
    }

    fn csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    fn tolerances(mut self, t: Value) -> Self {
        self.tolerances = t;
        self
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_body(path: &Path) -> anyhow::Result<SymmetricPolytope> {
    let file: BodyFile = parse(&read(path)?).with_context(|| format!("in {}", path.display()))?;
    file.build().with_context(|| format!("in {}", path.display()))
}

fn load_density(path: &Path) -> anyhow::Result<WeightedDensity> {
    let file: DensityFile = parse(&read(path)?).with_context(|| format!("in {}", path.display()))?;
    file.build().with_context(|| format!("in {}", path.display()))
}

fn need_seed(seed: Option<u64>) -> anyhow::Result<u64> {
    seed.ok_or_else(|| anyhow!(InputError("this command samples; pass --seed or set WMINK_SEED".into())))
}

#[derive(Debug)]
struct InputError(String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn run(cli: &Cli) -> anyhow::Result<Report> {
    let seed = cli.seed;
    match &cli.command {
        Command::Density(DensityCmd::Validate { density, dim, samples }) => {
            let d = load_density(density)?;
            let s = need_seed(seed)?;
            let mut checks = Vec::new();
            let mut not_applicable = Vec::new();
            for (name, r) in [
                ("homogeneity", check_homogeneity(&d, *dim, *samples, s)),
                ("p_concavity", check_p_concavity(&d, *dim, *samples, s)),
                ("implied_concavity", check_implied_concavity(&d, *dim, *samples, s)),
                ("evenness", Ok(check_evenness(&d, *dim, *samples, s))),
            ] {
                match r {
                    Ok(rep) => checks.push(rep),
                    Err(e) => not_applicable.push(json!({"check": name, "reason": e.to_string()})),
                }
            }
            let passed = checks.iter().all(|c| c.passed);
            Ok(Report::new(json!({"density": d.label(), "checks": checks, "not_applicable": not_applicable}))?
                .passed(passed))
        }
        Command::Body(BodyCmd::Info { body }) => {
            let p = load_body(body)?;
            Report::new(json!({
                "dim": p.dim(),
                "facets": p.len(),
                "half_normals": p.half_normals().iter().map(|u| u.as_slice().to_vec()).collect::<Vec<_>>(),
                "half_offsets": p.half_offsets(),
                "vertices": p.vertices().iter().map(|v| v.as_slice().to_vec()).collect::<Vec<_>>(),
                "volume": p.volume(),
                "circumradius": p.circumradius(),
            }))
        }
        Command::Body(BodyCmd::IsZonotope { body }) => Report::new(is_zonotope(&load_body(body)?)),
        Command::Sigma { body, density, scale } => {
            let (p, d) = (load_body(body)?, load_density(density)?);
            let s = if *scale == 1.0 { sigma(&p, &d)? } else { sigma_scaled(&p, &d, *scale)? };
            let n = p.dim();
            let mut csv: Vec<String> = (1..=n).map(|i| format!("u{i}")).collect();
            csv.push("weight".into());
            let mut out = csv.join(",") + "\n";
            for a in &s.atoms {
                let mut row: Vec<String> = a.direction.iter().map(|x| x.to_string()).collect();
                row.push(a.weight.to_string());
                out += &(row.join(",") + "\n");
            }
            Ok(Report::new(&s)?.csv(out))
        }
        Command::Measure { body, density, mc, samples } => {
            let (p, d) = (load_body(body)?, load_density(density)?);
            let mut out = json!({"density": d.label()});
            if d.homogeneity().is_some() {
                out["cone"] = json!(body_measure_cone(&p, &d)?);
            }
            out["quadrature"] = json!(body_measure(&p, &d)?);
            if *mc {
                let s = need_seed(seed)?;
                let est = match d.kind() {
                    DensityKind::Gaussian => gaussian_body_measure(&p, *samples, s)?,
                    _ => body_measure_mc(&p, &d, *samples, s)?,
                };
                out["mc"] = serde_json::to_value(est)?;
            }
            Ok(Report::new(out)?)
        }
        Command::Mixed { k, l, density, oracle, samples } => {
            let (k, l, d) = (load_body(k)?, load_body(l)?, load_density(density)?);
            let surface = mixed_measure(&k, &l, &d)?;
            let mut out = json!({"density": d.label(), "surface": surface});
            let mut passed = true;
            if *oracle {
                // Cone-formula oracles are deterministic; only sampled ones need a seed.
                let s = if d.homogeneity().is_some() { seed.unwrap_or(0) } else { need_seed(seed)? };
                let fd = mixed_measure_oracle(&k, &l, &d, *samples, s)?;
                let gap = (fd.value - surface.value).abs();
                let tol = (0.02 * surface.value.abs()).max(3.0 * fd.se);
                passed = gap <= tol;
                out["oracle"] = serde_json::to_value(&fd)?;
                out["agreement"] = json!({"gap": gap, "tolerance": tol, "passed": passed});
            }
            Ok(Report::new(out)?.passed(passed).tolerances(json!({"oracle_relative": 0.02, "oracle_se_multiple": 3.0})))
        }
        Command::Project { body, density, directions, t_grid } => {
            let (p, d) = (load_body(body)?, load_density(density)?);
            let dirs = match directions {
                Some(m) => direction_set(p.dim(), *m, need_seed(seed)?),
                None => axes_and_diagonals(p.dim()),
            };
            let prof = projection_profile(&p, &d, &dirs, t_grid.as_deref())?;
            let csv = prof.to_csv();
            Ok(Report::new(&prof)?.csv(csv))
        }
        Command::SolveMinkowski { problem, tol, max_iter, starts } => {
            let file: ProblemFile = parse(&read(problem)?).with_context(|| format!("in {}", problem.display()))?;
            let pr = file.build().with_context(|| format!("in {}", problem.display()))?;
            let opts = SolverOptions { tol: *tol, max_iter: *max_iter, seed };
            let report = solve(&pr, &opts)?;
            let mut out = json!({"solver": report});
            if *starts > 1 {
                out["uniqueness"] = serde_json::to_value(uniqueness_probe(&pr, *starts, *tol, need_seed(seed)?)?)?;
            }
            Ok(Report::new(out)?.tolerances(json!({"tol": tol, "max_iter": max_iter, "uniqueness_bound": 10.0 * tol})))
        }
        Command::Shephard(ShephardCmd::Check(a)) => {
            let (k, l, d) = (load_body(&a.k)?, load_body(&a.l)?, load_density(&a.density)?);
            let r = compare(&k, &l, &d, a.directions, need_seed(seed)?)?;
            let passed = r.verdict != Verdict::Violated;
            Ok(Report::new(&r)?.passed(passed).tolerances(shephard_tolerances()))
        }
        Command::Shephard(ShephardCmd::Stability(a)) => {
            let (k, l, d) = (load_body(&a.k)?, load_body(&a.l)?, load_density(&a.density)?);
            let r = stability_report(&k, &l, &d, a.directions, need_seed(seed)?)?;
            let passed = r.passed;
            Ok(Report::new(&r)?.passed(passed).tolerances(shephard_tolerances()))
        }
        Command::Shephard(ShephardCmd::Batch { density, dim, trials, directions }) => {
            let d = load_density(density)?;
            let b = shephard_batch(*dim, &d, *trials, *directions, need_seed(seed)?)?;
            let csv = b.to_csv();
            let passed = b.falsifying == 0;
            Ok(Report::new(&b)?.passed(passed).csv(csv).tolerances(shephard_tolerances()))
        }
        Command::Verify(VerifyCmd::FirstInequality { k, l, density }) => {
            let (k, l, d) = (load_body(k)?, load_body(l)?, load_density(density)?);
            let r = first_inequality_check(&k, &l, &d)?;
            let passed = r.passed;
            Ok(Report::new(&r)?.passed(passed).tolerances(json!({"slack": FIRST_INEQUALITY_TOL})))
        }
        Command::VerifySuite { quick } => {
            let s = need_seed(seed)?;
            let cfg = if *quick { SuiteConfig::quick(s) } else { SuiteConfig::full(s) };
            let results = run_all(&cfg);
            for r in &results {
                eprintln!("{}", r.line());
            }
            let passed = results.iter().all(|r| r.passed);
            Ok(Report::new(json!({"config": cfg, "criteria": results}))?.passed(passed))
        }
    }
}

fn shephard_tolerances() -> Value {
    json!({"dominance_relative": DOMINANCE_TOL, "measure": MEASURE_TOL})
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Density(_) => "density validate",
        Command::Body(BodyCmd::Info { .. }) => "body info",
        Command::Body(BodyCmd::IsZonotope { .. }) => "body is-zonotope",
        Command::Sigma { .. } => "sigma",
        Command::Measure { .. } => "measure",
        Command::Mixed { .. } => "mixed",
        Command::Project { .. } => "project",
        Command::SolveMinkowski { .. } => "solve-minkowski",
        Command::Shephard(ShephardCmd::Check(_)) => "shephard check",
        Command::Shephard(ShephardCmd::Stability(_)) => "shephard stability",
        Command::Shephard(ShephardCmd::Batch { .. }) => "shephard batch",
        Command::Verify(_) => "verify first-inequality",
        Command::VerifySuite { .. } => "verify-suite",
    }
}

fn render(cli: &Cli, report: &Report) -> anyhow::Result<String> {
    if cli.format == Format::Csv {
        return match &report.csv {
            Some(csv) => Ok(csv.clone()),
            None => bail!(InputError(format!("{} has no csv output", command_name(&cli.command)))),
        };
    }
    let mut meta = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": command_name(&cli.command),
        "seed": cli.seed,
        "tolerances": report.tolerances,
        "passed": report.passed,
    });
    if !cli.no_timestamp {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        meta["timestamp"] = json!(secs);
    }
    Ok(serde_json::to_string_pretty(&json!({"meta": meta, "result": report.result}))? + "\n")
}

/// Check failures exit 1, everything else that goes wrong is an input error.
fn exit_code(e: &anyhow::Error) -> u8 {
    use wmink::Error as E;
    if e.downcast_ref::<InputError>().is_some() {
        return 2;
    }
    match e.downcast_ref::<E>() {
        Some(E::CheckFailed { .. } | E::RejectedPair(_) | E::NoConvergence { .. } | E::FaceCollapsed { .. }) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli).and_then(|r| {
        let text = render(&cli, &r)?;
        match &cli.output {
            Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
            None => print!("{text}"),
        }
        Ok(r.passed)
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
