//! `jleg`: command-line runs of the disk solver, foliations and scenario
//! checks. Exit codes: 0 pass, 1 computational failure, 2 usage error.

mod config;
mod expr;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use jleg::acs::{check_identities_seeded, epsilon_estimate, IdentityReport};
use jleg::foliation::{Foliation, IntersectionRecord, LeafKind, LeafManifest, LeafParams, Lookup};
use jleg::psi::{in_z, psi_invert_on_slice, PsiInverse, INVERT_TOL};
use jleg::report::{write_json, write_leaf, write_text};
use jleg::sampling::rng;
use jleg::scenarios::{run_campaign, ScenarioId, ScenarioReport};
use jleg::solver::{choose_dilation, picard_solve, DilationChoice, DiskReport, SolverConfig};
use jleg::{ACSField, PlaneChart, Point5};

use config::{load_acs, load_config, DiskInput, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Compute(String),
}

impl From<jleg::Error> for CliError {
    fn from(e: jleg::Error) -> Self {
        match e {
            jleg::Error::InvalidInput(m) => CliError::Usage(m),
            other => CliError::Compute(other.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "jleg", version, about = "J-invariant Legendrian disks, foliations and scenario checks")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for reports and CSV artifacts (stdout if absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Grid size n (odd).
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Picard tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Dilation parameter r.
    #[arg(long, global = true)]
    r: Option<f64>,
    /// Number of random samples for campaigns.
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check J^2 = -Id and the Lagrangian/anti-compatibility identities.
    AcsCheck {
        /// ACS specification file (overrides the config's "acs").
        #[arg(long)]
        acs: Option<PathBuf>,
    },
    /// Solve for the J-invariant disk through (P, X).
    SolveDisk,
    /// Build a polar or parallel leaf.
    Foliate,
    /// Find the leaf through a point, or run a coverage campaign with --samples.
    LeafOf,
    /// Signed intersections of a leaf with a J-invariant patch.
    Intersect,
    /// Pointwise checks of a scenario manifold (s5, cy, n5).
    VerifyScenario {
        scenario: Option<String>,
    },
}

#[derive(Serialize)]
struct RunInfo {
    command: &'static str,
    seed: u64,
    n: usize,
    h: f64,
    r: f64,
    epsilon: Option<f64>,
    tol: f64,
}

struct Ctx {
    cfg: RunConfig,
    out: Option<PathBuf>,
}

impl Ctx {
    fn run_info(&self, command: &'static str, solver: &SolverConfig, acs: Option<&ACSField>) -> RunInfo {
        RunInfo {
            command,
            seed: self.cfg.seed,
            n: solver.n,
            h: 2.0 * solver.radius / (solver.n.max(2) - 1) as f64,
            r: solver.r,
            epsilon: acs.map(|a| epsilon_estimate(a, solver.r, 64)),
            tol: solver.tol,
        }
    }

    /// report.json in --out, or the report on stdout.
    fn emit<T: Serialize>(&self, report: &T, summary: &str) -> Result<(), CliError> {
        match &self.out {
            Some(dir) => {
                write_json(&dir.join("report.json"), report)?;
                println!("{summary}");
            }
            None => print!("{}", jleg::report::to_json(report)?),
        }
        Ok(())
    }

    fn artifact(&self, name: &str, text: &str) -> Result<(), CliError> {
        if let Some(dir) = &self.out {
            write_text(&dir.join(name), text)?;
        }
        Ok(())
    }
}

fn build_ctx(cli: &Cli) -> Result<Ctx, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.grid {
        cfg.solver.n = n;
        cfg.foliation.solver.n = n;
    }
    if let Some(t) = cli.tol {
        cfg.solver.tol = t;
        cfg.foliation.solver.tol = t;
    }
    if let Some(r) = cli.r {
        cfg.solver.r = r;
    }
    if cli.samples.is_some() {
        cfg.samples = cli.samples;
    }
    cfg.solver.validate()?;
    Ok(Ctx { cfg, out: cli.out.clone() })
}

fn plane(x: [f64; 2]) -> PlaneChart {
    PlaneChart::new(Complex64::new(x[0], x[1]))
}

fn point(p: [f64; 5]) -> Point5 {
    Point5::new(p[0], p[1], p[2], p[3], p[4])
}

#[derive(Serialize)]
struct AcsCheckReport {
    run: RunInfo,
    identities: IdentityReport,
    failing: Vec<&'static str>,
}

fn acs_check(ctx: &Ctx, acs_path: Option<&Path>) -> Result<bool, CliError> {
    let spec = match acs_path {
        Some(p) => load_acs(p)?,
        None => ctx.cfg.acs.clone(),
    };
    let field = spec.j_field()?;
    let acs = spec.field().ok();
    let samples = ctx.cfg.samples.unwrap_or(10_000);
    let identities = check_identities_seeded(field.as_ref(), samples, ctx.cfg.seed);
    let failing = identities.failing();
    for f in &failing {
        eprintln!("identity failed: {f}");
    }
    let pass = identities.pass;
    let report = AcsCheckReport { run: ctx.run_info("acs-check", &ctx.cfg.solver, acs.as_ref()), identities, failing };
    ctx.emit(&report, &format!("acs-check: {}", if pass { "pass" } else { "FAIL" }))?;
    Ok(pass)
}

#[derive(Serialize)]
struct SolveReport {
    run: RunInfo,
    dilation: Option<DilationChoice>,
    inversion: Option<PsiInverse>,
    disk: DiskReport,
}

fn solve_disk(ctx: &Ctx) -> Result<bool, CliError> {
    let base = ctx.cfg.acs.field()?;
    let mut solver = ctx.cfg.solver;
    let dilation = if ctx.cfg.auto_dilate {
        let d = choose_dilation(&base, &solver)?;
        solver.r = d.r;
        Some(d)
    } else {
        None
    };
    let acs = base.dilated(solver.r);
    let DiskInput { p, x } = ctx.cfg.disk;
    let (p, x) = (point(p), plane(x));
    let (inversion, sol) = if ctx.cfg.invert {
        if !in_z(&p) {
            return Err(CliError::Usage("invert needs a target point with x1 = y2 = 0".into()));
        }
        let (inv, sol) = psi_invert_on_slice(&p, &x, &acs, &solver, INVERT_TOL)?;
        (Some(inv), sol)
    } else {
        (None, picard_solve(&p, &x, &acs, &solver)?)
    };
    ctx.artifact("f.csv", &sol.f.to_csv())?;
    ctx.artifact("t.csv", &sol.t.to_csv())?;
    ctx.artifact("lambda.csv", &sol.lambda.to_csv())?;
    ctx.artifact("mu.csv", &sol.mu.to_csv())?;
    ctx.artifact("patch.csv", &sol.patch.to_csv())?;
    let report = SolveReport { run: ctx.run_info("solve-disk", &solver, Some(&base)), dilation, inversion, disk: sol.report() };
    let summary = format!(
        "solve-disk: {} iterations, max ratio {:.3e}, equation residual {:.3e}",
        report.disk.iterations, report.disk.max_ratio, report.disk.residuals.equation
    );
    ctx.emit(&report, &summary)?;
    Ok(true)
}

fn leaf_params(ctx: &Ctx) -> LeafParams {
    let l = ctx.cfg.leaf;
    match l.kind {
        LeafKind::Polar => LeafParams::polar(plane(l.x)),
        LeafKind::Parallel => LeafParams::parallel(Complex64::new(l.p[0], l.p[1]), plane(l.x)),
    }
}

fn foliation(ctx: &Ctx) -> Result<(Foliation, RunInfo), CliError> {
    let acs = ctx.cfg.acs.field()?;
    let fol = Foliation::new(acs, ctx.cfg.foliation)?;
    let run = ctx.run_info("foliation", &fol.cfg.solver, Some(&fol.acs));
    Ok((fol, run))
}

#[derive(Serialize)]
struct FoliateReport {
    run: RunInfo,
    tangent_spread: f64,
    leaf: LeafManifest,
}

fn foliate(ctx: &Ctx) -> Result<bool, CliError> {
    let (fol, run) = foliation(ctx)?;
    let leaf = fol.build_leaf(leaf_params(ctx))?;
    if let Some(dir) = &ctx.out {
        write_leaf(&dir.join("leaf"), &leaf)?;
    }
    let report = FoliateReport { run, tangent_spread: fol.tangent_spread(&leaf), leaf: leaf.manifest() };
    let summary = format!("foliate: {} disks, continuity {:.3e}", leaf.disks.len(), report.leaf.continuity);
    ctx.emit(&report, &summary)?;
    Ok(true)
}

#[derive(Serialize)]
struct LookupRecord {
    index: usize,
    q: Point5,
    lookup: Option<Lookup>,
    gap: Option<f64>,
    error: Option<String>,
    success: bool,
}

#[derive(Serialize)]
struct LeafOfReport {
    run: RunInfo,
    kind: LeafKind,
    successes: usize,
    total: usize,
    records: Vec<LookupRecord>,
}

const CONTAINS_TOL: f64 = 1e-6;

fn lookup(fol: &Foliation, kind: LeafKind, x: &PlaneChart, index: usize, q: Point5) -> LookupRecord {
    let res = match kind {
        LeafKind::Polar => fol.leaf_through_polar(&q),
        LeafKind::Parallel => fol.leaf_through_parallel(&q, x),
    }
    .and_then(|l| Ok((fol.leaf_gap(&l.params, &q)?, l)));
    match res {
        Ok((gap, l)) => {
            LookupRecord { index, q, success: gap <= CONTAINS_TOL, lookup: Some(l), gap: Some(gap), error: None }
        }
        Err(e) => LookupRecord { index, q, lookup: None, gap: None, error: Some(e.to_string()), success: false },
    }
}

fn leaf_of(ctx: &Ctx) -> Result<bool, CliError> {
    let (fol, run) = foliation(ctx)?;
    let kind = ctx.cfg.leaf.kind;
    let x = plane(ctx.cfg.leaf.x);
    let queries: Vec<Point5> = match (ctx.cfg.q, ctx.cfg.samples) {
        (Some(q), _) => vec![point(q)],
        (None, Some(n)) => {
            let mut r = rng(ctx.cfg.seed);
            let region = fol.cfg.region;
            (0..n)
                .map(|_| {
                    let z = Complex64::from_polar(r.gen_range(0.05..region), r.gen_range(0.0..std::f64::consts::TAU));
                    let zeta = match kind {
                        LeafKind::Polar => z * Complex64::from_polar(r.gen_range(0.0..1.0), r.gen_range(0.0..std::f64::consts::TAU)),
                        LeafKind::Parallel => Complex64::from_polar(r.gen_range(0.0..region), r.gen_range(0.0..std::f64::consts::TAU)),
                    };
                    fol.point_from_coords(zeta, z, r.gen_range(-0.5..0.5))
                })
                .collect()
        }
        (None, None) => return Err(CliError::Usage("leaf-of needs \"q\" in the config or --samples".into())),
    };
    let records: Vec<LookupRecord> = queries.into_iter().enumerate().map(|(k, q)| lookup(&fol, kind, &x, k, q)).collect();
    let successes = records.iter().filter(|r| r.success).count();
    let total = records.len();
    let report = LeafOfReport { run, kind, successes, total, records };
    ctx.emit(&report, &format!("leaf-of: {successes}/{total} lookups contain q"))?;
    Ok(successes == total)
}

#[derive(Serialize)]
struct IntersectReport {
    run: RunInfo,
    leaf: LeafParams,
    patch: DiskInput,
    negative: usize,
    records: Vec<IntersectionRecord>,
}

fn intersect(ctx: &Ctx) -> Result<bool, CliError> {
    let (fol, run) = foliation(ctx)?;
    let leaf = fol.build_leaf(leaf_params(ctx))?;
    let patch_in = ctx.cfg.patch;
    let (p, x) = (point(patch_in.p), plane(patch_in.x));
    let patch = if ctx.cfg.invert {
        psi_invert_on_slice(&p, &x, &fol.acs, &fol.cfg.solver, fol.cfg.disk_tol)?.1
    } else {
        picard_solve(&p, &x, &fol.acs, &fol.cfg.solver)?
    };
    let records = fol.intersect(&leaf, &patch.patch)?;
    let negative = records.iter().filter(|r| r.sign < 0).count();
    let summary = format!("intersect: {} crossings, {negative} negative", records.len());
    let report = IntersectReport { run, leaf: leaf.params, patch: patch_in, negative, records };
    ctx.emit(&report, &summary)?;
    Ok(true)
}

#[derive(Serialize)]
struct ScenarioRun {
    seed: u64,
    samples: usize,
    report: ScenarioReport,
}

fn verify_scenario(ctx: &Ctx, arg: Option<&str>) -> Result<bool, CliError> {
    let name = arg
        .map(str::to_string)
        .or_else(|| ctx.cfg.scenario.clone())
        .ok_or_else(|| CliError::Usage("verify-scenario needs a scenario id (s5, cy, n5)".into()))?;
    let id: ScenarioId = name.parse()?;
    let samples = ctx.cfg.samples.unwrap_or(100);
    let report = run_campaign(id, samples, ctx.cfg.seed, None)?;
    let pass = report.pass;
    let worst = report.max_deviations.iter().map(|m| m.max).fold(0.0f64, f64::max);
    let summary = format!("verify-scenario {id}: {} ({samples} points, max deviation {worst:.3e})", if pass { "pass" } else { "FAIL" });
    ctx.emit(&ScenarioRun { seed: ctx.cfg.seed, samples, report }, &summary)?;
    Ok(pass)
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let ctx = build_ctx(cli)?;
    match &cli.command {
        Command::AcsCheck { acs } => acs_check(&ctx, acs.as_deref()),
        Command::SolveDisk => solve_disk(&ctx),
        Command::Foliate => foliate(&ctx),
        Command::LeafOf => leaf_of(&ctx),
        Command::Intersect => intersect(&ctx),
        Command::VerifyScenario { scenario } => verify_scenario(&ctx, scenario.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Compute(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
