//! Batch front end: builds registry solutions, emits profile and residual
//! CSVs, runs the identity suites, the flat-radius search, and the lattice
//! relaxation.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 a check exceeded its
//! tolerance (including a failed flat-radius search), 3 numerical failure
//! (non-convergence, vanishing shell norm).
//!
//! Configuration precedence: command-line flags override the TOML config
//! file given with `--config`, which overrides built-in defaults. Every
//! output file starts with comment lines recording the effective config,
//! the seed, and the tool version; with the deterministic-reduction flag
//! (on by default) identical configs produce byte-identical files.

use crate::diagnostics::{
    self, build_profile, find_flat_radius, DiagnosticsError, RadialProfile, SearchParams,
};
use crate::relax::{self, LatticeState, RelaxError};
use crate::residuals::{self, EquationId};
use crate::sampling;
use crate::solutions::{self, SolutionError, SolutionPair};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_TOLERANCE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Effective run configuration after merging flags, file, and defaults.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub solution: String,
    pub r_min: f64,
    pub r_max: f64,
    pub samples: usize,
    pub angular_level: usize,
    pub radial_level: usize,
    pub residual_tol: f64,
    pub points: usize,
    pub radius: f64,
    pub epsilon: f64,
    pub rho: Option<f64>,
    pub tau: f64,
    pub nodes: usize,
    pub half_width: f64,
    pub perturb: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub deterministic: bool,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            solution: "ps-lift".into(),
            r_min: 0.5,
            r_max: 50.0,
            samples: 100,
            angular_level: 24,
            radial_level: 64,
            residual_tol: 1e-8,
            points: sampling::STANDARD_COUNT,
            radius: sampling::STANDARD_RADIUS,
            epsilon: 0.005,
            rho: None,
            tau: 0.25,
            nodes: 16,
            half_width: 1.2,
            perturb: 0.0,
            tol: 1e-6,
            max_iters: 5000,
            seed: sampling::STANDARD_SEED,
            deterministic: true,
            output: None,
        }
    }
}

/// Keys readable from the `--config` TOML file; all optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    solution: Option<String>,
    r_min: Option<f64>,
    r_max: Option<f64>,
    samples: Option<usize>,
    angular_level: Option<usize>,
    radial_level: Option<usize>,
    residual_tol: Option<f64>,
    points: Option<usize>,
    radius: Option<f64>,
    epsilon: Option<f64>,
    rho: Option<f64>,
    tau: Option<f64>,
    nodes: Option<usize>,
    half_width: Option<f64>,
    perturb: Option<f64>,
    tol: Option<f64>,
    max_iters: Option<usize>,
    seed: Option<u64>,
    deterministic: Option<bool>,
    output: Option<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(
    name = "kwlab",
    version,
    about = "Numerical laboratory for SU(2) gauge pairs on R^n",
    disable_help_subcommand = true
)]
struct Cli {
    /// TOML config file; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Default)]
struct CommonArgs {
    /// Registry solution label.
    #[arg(long)]
    solution: Option<String>,
    #[arg(long)]
    angular_level: Option<usize>,
    #[arg(long)]
    radial_level: Option<usize>,
    /// RNG seed recorded in output headers.
    #[arg(long)]
    seed: Option<u64>,
    /// Force fixed (single-threaded) summation order.
    #[arg(long, overrides_with = "no_deterministic")]
    deterministic: bool,
    #[arg(long = "no-deterministic")]
    no_deterministic: bool,
    /// Output file path (CSV or checkpoint, depending on the command).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the registry solution labels.
    ListSolutions,
    /// Write the radial diagnostics table as CSV.
    Profile {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        r_min: Option<f64>,
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Write a pointwise residual report as CSV.
    Residual {
        #[command(flatten)]
        common: CommonArgs,
        /// Equation: eq11, kw, kw-half, monopole, or all (claimed set).
        #[arg(long, default_value = "all")]
        eq: String,
        /// τ for `--eq kw`.
        #[arg(long)]
        tau: Option<f64>,
        /// Number of sample points.
        #[arg(long)]
        points: Option<usize>,
        /// Sample ball radius.
        #[arg(long)]
        radius: Option<f64>,
        /// Max-norm tolerance deciding the exit code.
        #[arg(long)]
        residual_tol: Option<f64>,
    },
    /// Run the invariant suites and print a pass/fail table.
    IdentityCheck {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        r_min: Option<f64>,
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Flat-radius search on a fresh or loaded profile.
    Search {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Outer radius of the search window (defaults to r_max).
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        r_min: Option<f64>,
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        /// Load a previously written profile CSV instead of sampling.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Gradient-flow relaxation on a Dirichlet box, with checkpointing.
    Relax {
        #[command(flatten)]
        common: CommonArgs,
        /// Nodes per axis.
        #[arg(long)]
        nodes: Option<usize>,
        /// Half-width of the centered box.
        #[arg(long)]
        half_width: Option<f64>,
        /// Relative amplitude of the smooth interior perturbation.
        #[arg(long)]
        perturb: Option<f64>,
        /// Stop when the max gradient norm drops below this.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        checkpoint_out: Option<PathBuf>,
        #[arg(long)]
        checkpoint_in: Option<PathBuf>,
    },
}

/// Entry point: parses `argv`, runs the subcommand, returns the exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version through the error path too.
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };

    let file_cfg = match &cli.config {
        None => FileConfig::default(),
        Some(path) => match load_config(path) {
            Ok(cfg) => cfg,
            Err(msg) => {
                eprintln!("error: {msg}");
                return EXIT_USAGE;
            }
        },
    };

    match dispatch(cli.command, file_cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load_config(path: &Path) -> Result<FileConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("cannot parse config {}: {e}", path.display()))
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Solution(#[from] SolutionError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error(transparent)]
    Relax(#[from] RelaxError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Solution(SolutionError::UnknownLabel(_)) => EXIT_USAGE,
            CliError::Solution(_) => EXIT_TOLERANCE,
            CliError::Diagnostics(DiagnosticsError::FlatRadiusNotFound { .. }) => EXIT_TOLERANCE,
            CliError::Diagnostics(DiagnosticsError::InvalidSearchParams(_))
            | CliError::Diagnostics(DiagnosticsError::InvalidProfileRange)
            | CliError::Diagnostics(DiagnosticsError::InsufficientWindow { .. }) => EXIT_USAGE,
            CliError::Diagnostics(DiagnosticsError::VanishingKappa { .. }) => EXIT_NUMERICAL,
            CliError::Relax(RelaxError::NonConvergence { .. })
            | CliError::Relax(RelaxError::StepUnderflow(_)) => EXIT_NUMERICAL,
            CliError::Relax(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_USAGE,
        }
    }
}

fn merge(common: &CommonArgs, file: &FileConfig) -> RunConfig {
    let d = RunConfig::default();
    RunConfig {
        solution: common
            .solution
            .clone()
            .or_else(|| file.solution.clone())
            .unwrap_or(d.solution),
        r_min: file.r_min.unwrap_or(d.r_min),
        r_max: file.r_max.unwrap_or(d.r_max),
        samples: file.samples.unwrap_or(d.samples),
        angular_level: common
            .angular_level
            .or(file.angular_level)
            .unwrap_or(d.angular_level),
        radial_level: common
            .radial_level
            .or(file.radial_level)
            .unwrap_or(d.radial_level),
        residual_tol: file.residual_tol.unwrap_or(d.residual_tol),
        points: file.points.unwrap_or(d.points),
        radius: file.radius.unwrap_or(d.radius),
        epsilon: file.epsilon.unwrap_or(d.epsilon),
        rho: file.rho,
        tau: file.tau.unwrap_or(d.tau),
        nodes: file.nodes.unwrap_or(d.nodes),
        half_width: file.half_width.unwrap_or(d.half_width),
        perturb: file.perturb.unwrap_or(d.perturb),
        tol: file.tol.unwrap_or(d.tol),
        max_iters: file.max_iters.unwrap_or(d.max_iters),
        seed: common.seed.or(file.seed).unwrap_or(d.seed),
        deterministic: if common.no_deterministic {
            false
        } else if common.deterministic {
            true
        } else {
            file.deterministic.unwrap_or(d.deterministic)
        },
        output: common.output.clone().or_else(|| file.output.clone()),
    }
}

/// Runs `f` under the configured reduction policy: a single-thread pool
/// when deterministic summation order is requested.
fn with_pool<T: Send>(deterministic: bool, f: impl FnOnce() -> T + Send) -> T {
    if deterministic {
        rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .expect("thread pool")
            .install(f)
    } else {
        f()
    }
}

fn header(cfg: &RunConfig, command: &str, extra: &[(&str, String)]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# kwlab v{}", crate::VERSION);
    let _ = writeln!(out, "# command = {command}");
    let _ = writeln!(out, "# solution = {}", cfg.solution);
    for (k, v) in extra {
        let _ = writeln!(out, "# {k} = {v}");
    }
    let _ = writeln!(out, "# angular_level = {}", cfg.angular_level);
    let _ = writeln!(out, "# radial_level = {}", cfg.radial_level);
    let _ = writeln!(out, "# seed = {}", cfg.seed);
    let _ = writeln!(out, "# deterministic = {}", cfg.deterministic);
    out
}

fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Renders a profile as the documented CSV schema.
pub fn profile_to_csv(profile: &RadialProfile, cfg: &RunConfig) -> String {
    let mut out = header(
        cfg,
        "profile",
        &[
            ("r_min", format!("{}", cfg.r_min)),
            ("r_max", format!("{}", cfg.r_max)),
            ("samples", format!("{}", cfg.samples)),
            ("dim", format!("{}", profile.dim)),
            ("vdim", format!("{}", profile.vdim)),
            ("degenerate_directions", format!("{}", profile.degenerate)),
        ],
    );
    out.push_str("r,kappa,N,lambda_min,lambda_max,trace_T,kappa_v,N_v,P_uv\n");
    for row in &profile.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            fmt12(row.r),
            fmt12(row.kappa),
            fmt12(row.frequency),
            fmt12(row.lambda_min),
            fmt12(row.lambda_max),
            fmt12(row.trace_t),
            fmt12(row.kappa_v),
            fmt12(row.n_v),
            fmt12(row.p_uv),
        );
    }
    out
}

/// Parses a profile CSV produced by [`profile_to_csv`]. Only the columns
/// needed by the flat-radius search are reconstructed.
pub fn profile_from_csv(text: &str) -> Result<RadialProfile, String> {
    let mut dim = 4usize;
    let mut rows = Vec::new();
    let mut saw_header = false;
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                if k.trim() == "dim" {
                    dim = v.trim().parse().map_err(|e| format!("bad dim: {e}"))?;
                }
            }
            continue;
        }
        if !saw_header {
            if line.trim() != "r,kappa,N,lambda_min,lambda_max,trace_T,kappa_v,N_v,P_uv" {
                return Err(format!("unexpected header row: {line}"));
            }
            saw_header = true;
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| format!("bad row '{line}': {e}"))?;
        if fields.len() != 9 {
            return Err(format!("expected 9 columns, got {}", fields.len()));
        }
        let kv_sq = fields[6] * fields[6];
        rows.push(diagnostics::ProfileRow {
            r: fields[0],
            kappa: fields[1],
            frequency: fields[2],
            lambda_min: fields[3],
            lambda_max: fields[4],
            trace_t: fields[5],
            kappa_v: fields[6],
            n_v: fields[7],
            p_uv: fields[8],
            tracked_v: [0.0; 4],
            component_energy: 0.0,
            degenerate: kv_sq <= diagnostics::DEGENERATE_EIGENVALUE_REL * fields[5].max(0.0),
        });
    }
    if rows.is_empty() {
        return Err("no data rows".into());
    }
    Ok(RadialProfile {
        dim,
        vdim: 4,
        rows,
        mats: Vec::new(),
        fixed_u: [0.0; 4],
        fixed_v: [0.0; 4],
        degenerate: false,
    })
}

fn residual_to_csv(reports: &[residuals::ResidualReport], cfg: &RunConfig) -> String {
    let mut out = header(
        cfg,
        "residual",
        &[
            ("points", format!("{}", cfg.points)),
            ("radius", format!("{}", cfg.radius)),
            ("residual_tol", format!("{:e}", cfg.residual_tol)),
        ],
    );
    out.push_str("x1,x2,x3,x4,eq,component,norm\n");
    for report in reports {
        for s in &report.samples {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                fmt12(s.point[0]),
                fmt12(s.point[1]),
                fmt12(s.point[2]),
                fmt12(s.point[3]),
                report.equation,
                s.component,
                fmt12(s.norm),
            );
        }
    }
    for report in reports {
        let _ = writeln!(
            out,
            "# summary eq={} max={} rms={}",
            report.equation,
            fmt12(report.max),
            fmt12(report.rms)
        );
    }
    out
}

fn write_or_print(path: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn build(label: &str) -> Result<SolutionPair, CliError> {
    Ok(solutions::build_solution(label)?)
}

fn dispatch(command: Command, file: FileConfig) -> Result<i32, CliError> {
    match command {
        Command::ListSolutions => {
            for label in solutions::REGISTRY_LABELS {
                println!("{label}");
            }
            Ok(EXIT_OK)
        }

        Command::Profile { common, r_min, r_max, samples } => {
            let mut cfg = merge(&common, &file);
            cfg.r_min = r_min.unwrap_or(cfg.r_min);
            cfg.r_max = r_max.unwrap_or(cfg.r_max);
            cfg.samples = samples.unwrap_or(cfg.samples);
            let pair = build(&cfg.solution)?;
            let q = sphere_quad(&cfg, pair.connection().dim())?;
            let segment_nodes = (cfg.radial_level / 8).max(4);
            let profile = with_pool(cfg.deterministic, || {
                build_profile(&pair, cfg.r_min, cfg.r_max, cfg.samples, &q, segment_nodes)
            })?;
            write_or_print(&cfg.output, &profile_to_csv(&profile, &cfg))?;
            Ok(EXIT_OK)
        }

        Command::Residual { common, eq, tau, points, radius, residual_tol } => {
            let mut cfg = merge(&common, &file);
            cfg.points = points.unwrap_or(cfg.points);
            cfg.radius = radius.unwrap_or(cfg.radius);
            cfg.residual_tol = residual_tol.unwrap_or(cfg.residual_tol);
            if let Some(t) = tau {
                cfg.tau = t;
            }

            let mut reports = Vec::new();
            if eq == "monopole" {
                let m = solutions::ps_monopole();
                let pts = sampling::ball_points(3, cfg.points, cfg.radius, cfg.seed);
                reports.push(with_pool(cfg.deterministic, || {
                    residuals::report_for_monopole(&m, &pts)
                }));
            } else {
                let pair = build(&cfg.solution)?;
                let pts = sampling::ball_points(4, cfg.points, cfg.radius, cfg.seed);
                let eqs: Vec<EquationId> = match eq.as_str() {
                    "eq11" => vec![EquationId::Master],
                    "kw" => vec![EquationId::Kw(cfg.tau)],
                    "kw-half" => vec![EquationId::Kw(0.5)],
                    "all" => {
                        let mut v = Vec::new();
                        if pair.claims().master {
                            v.push(EquationId::Master);
                        }
                        for &t in &pair.claims().kw_tau {
                            v.push(EquationId::Kw(t));
                        }
                        if v.is_empty() {
                            v.push(EquationId::Master);
                        }
                        v
                    }
                    other => {
                        return Err(CliError::Usage(format!(
                            "unknown equation '{other}' (expected eq11, kw, kw-half, monopole, all)"
                        )))
                    }
                };
                for e in eqs {
                    let report = with_pool(cfg.deterministic, || {
                        residuals::report_for_pair(&pair, e, &pts)
                    })
                    .map_err(|e| CliError::Usage(e.to_string()))?;
                    reports.push(report);
                }
            }
            write_or_print(&cfg.output, &residual_to_csv(&reports, &cfg))?;
            let worst = reports.iter().map(|r| r.max).fold(0.0, f64::max);
            if worst > cfg.residual_tol {
                eprintln!(
                    "residual max {worst:.3e} exceeds tolerance {:.1e}",
                    cfg.residual_tol
                );
                return Ok(EXIT_TOLERANCE);
            }
            Ok(EXIT_OK)
        }

        Command::IdentityCheck { common, r_min, r_max, samples } => {
            let mut cfg = merge(&common, &file);
            // Identity profiles default to the range/level where the
            // quadrature resolves the monopole core at every radius.
            cfg.r_min = r_min.unwrap_or(0.5);
            cfg.r_max = r_max.unwrap_or(12.0);
            cfg.samples = samples.unwrap_or(60);
            if common.angular_level.is_none() && file.angular_level.is_none() {
                cfg.angular_level = 32;
            }
            let pair = build(&cfg.solution)?;
            let q = sphere_quad(&cfg, pair.connection().dim())?;
            let mut checks = with_pool(cfg.deterministic, || {
                diagnostics::identity_suite(&pair, &q, cfg.r_min, cfg.r_max, cfg.samples)
            })?;
            checks.extend(with_pool(cfg.deterministic, || {
                diagnostics::pointwise_bound_suite(&pair, &q, 8.0)
            }));
            checks.extend(with_pool(cfg.deterministic, || {
                residuals::residual_suite(&pair, cfg.residual_tol)
            }));
            let mut all = true;
            println!("identity checks for {}:", cfg.solution);
            for c in &checks {
                println!("  [{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                all &= c.passed;
            }
            Ok(if all { EXIT_OK } else { EXIT_TOLERANCE })
        }

        Command::Search { common, epsilon, rho, r_min, r_max, samples, input } => {
            let mut cfg = merge(&common, &file);
            cfg.epsilon = epsilon.unwrap_or(cfg.epsilon);
            cfg.r_min = r_min.unwrap_or(cfg.r_min);
            cfg.r_max = r_max.unwrap_or(cfg.r_max);
            cfg.samples = samples.unwrap_or(cfg.samples);
            if let Some(rho) = rho {
                cfg.rho = Some(rho);
            }
            let rho = cfg.rho.unwrap_or(cfg.r_max);
            let params = SearchParams::new(cfg.epsilon, rho)?;

            let (profile, branch) = match input {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)?;
                    let profile = profile_from_csv(&text).map_err(CliError::Usage)?;
                    (profile, None)
                }
                None => {
                    let pair = build(&cfg.solution)?;
                    let q = sphere_quad(&cfg, pair.connection().dim())?;
                    let segment_nodes = (cfg.radial_level / 8).max(4);
                    let profile = with_pool(cfg.deterministic, || {
                        build_profile(&pair, cfg.r_min, cfg.r_max, cfg.samples, &q, segment_nodes)
                    })?;
                    let branch = diagnostics::branch_summary(&pair, &profile);
                    (profile, Some(branch))
                }
            };

            match find_flat_radius(&profile, &params) {
                Ok(report) => {
                    print!("{}", report.render());
                    if let Some(branch) = branch {
                        println!("{branch}");
                    }
                    Ok(if report.all_passed() { EXIT_OK } else { EXIT_TOLERANCE })
                }
                Err(e @ DiagnosticsError::FlatRadiusNotFound { .. }) => {
                    println!("flat radius not found: {e}");
                    if let Some(branch) = branch {
                        println!("{branch}");
                    }
                    Ok(EXIT_TOLERANCE)
                }
                Err(e) => Err(e.into()),
            }
        }

        Command::Relax {
            common,
            nodes,
            half_width,
            perturb,
            tol,
            max_iters,
            checkpoint_out,
            checkpoint_in,
        } => {
            let mut cfg = merge(&common, &file);
            cfg.nodes = nodes.unwrap_or(cfg.nodes);
            cfg.half_width = half_width.unwrap_or(cfg.half_width);
            cfg.perturb = perturb.unwrap_or(cfg.perturb);
            cfg.tol = tol.unwrap_or(cfg.tol);
            cfg.max_iters = max_iters.unwrap_or(cfg.max_iters);

            let pair = build(&cfg.solution)?;
            let mut state = match checkpoint_in {
                Some(path) => {
                    let bytes = std::fs::read(&path)?;
                    let cp = relax::read_checkpoint(bytes.as_slice())?;
                    relax::state_from_checkpoint(&cp, &pair)?
                }
                None => LatticeState::from_solution(&pair, cfg.nodes, cfg.half_width)?,
            };
            if cfg.perturb != 0.0 {
                state.perturb_interior(cfg.perturb, cfg.seed);
            }
            println!(
                "relaxing {} on a {}^{} box (h = {:.5}), perturbation {:.1}%",
                cfg.solution,
                cfg.nodes,
                state.dim(),
                state.spacing(),
                100.0 * cfg.perturb
            );
            let result = with_pool(cfg.deterministic, || {
                relax::flow(&mut state, cfg.tol, cfg.max_iters)
            });
            let save = |state: &LatticeState| -> Result<(), CliError> {
                if let Some(path) = &checkpoint_out {
                    let mut buf = Vec::new();
                    relax::write_checkpoint(state, &mut buf)?;
                    std::fs::write(path, buf)?;
                }
                Ok(())
            };
            match result {
                Ok(trace) => {
                    save(&state)?;
                    println!(
                        "converged in {} iterations: energy {} -> {}, max gradient {:.3e}, rms distance to seed solution {:.3e}",
                        trace.iterations,
                        fmt12(trace.energies[0]),
                        fmt12(*trace.energies.last().unwrap()),
                        trace.grad_norms.last().unwrap(),
                        state.rms_distance_to(&pair),
                    );
                    Ok(EXIT_OK)
                }
                Err(e) => {
                    save(&state)?;
                    Err(e.into())
                }
            }
        }
    }
}

fn sphere_quad(
    cfg: &RunConfig,
    dim: usize,
) -> Result<crate::fieldkit::SphereQuadrature, CliError> {
    crate::fieldkit::sphere_quadrature(dim, cfg.angular_level)
        .map_err(|e| CliError::Usage(e.to_string()))
}
