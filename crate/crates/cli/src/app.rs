use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{ColorChoice, Parser, Subcommand, ValueEnum};
use hilfer_core::certificates::{
    certify, corollary_bound, estimate_constants, gronwall_bound, verify_gronwall, EstimateOptions, GammaFactor,
    Verdict, DEFAULT_GRONWALL_TERMS, DEFAULT_SEED,
};
use hilfer_core::solver::{initial_condition_check, mild_solve, strong_residual, SolveReport};
use hilfer_core::specfun::{gamma, mainardi_wright, mittag_leffler, wright_moment};
use hilfer_core::Trajectory;
use serde::Serialize;

use crate::problem::{GronwallFile, Problem, ProblemFile};
use crate::table::{read_trajectory, write_trajectory};
use crate::CliError;

/// Environment variable overriding the sampling seed of `certify`.
pub const SEED_VAR: &str = "FRAC_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "hilfer",
    version,
    about = "Mild solutions, certificates and residual checks for nonlocal Hilfer problems",
    color = ColorChoice::Never
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve by Picard iteration and write the trajectory as CSV
    Solve {
        file: PathBuf,
        /// CSV destination; standard output when absent
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON solve report destination
        #[arg(long)]
        report: Option<PathBuf>,
        /// override grid.n
        #[arg(long)]
        n: Option<usize>,
    },
    /// Evaluate the contraction and ball-invariance inequalities
    Certify {
        file: PathBuf,
        /// estimate constants by sampling even when the file provides them
        #[arg(long)]
        estimate: bool,
        /// ball radius used when estimating; overrides estimate.r
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long, value_enum)]
        gamma_factor: Option<GammaArg>,
    },
    /// Strong-form residual and initial-condition error of a solution CSV
    Residual {
        file: PathBuf,
        #[arg(long)]
        solution: PathBuf,
    },
    /// Check a Gronwall instance given by u, v and g as functions of t
    Gronwall { file: PathBuf },
    /// Evaluate a special function
    Specfun {
        #[arg(value_enum)]
        name: SpecName,
        #[arg(allow_negative_numbers = true, required = true)]
        args: Vec<f64>,
        /// digits after the decimal point
        #[arg(long, default_value_t = 7)]
        precision: usize,
    },
    /// Solve on several grids and compare successive levels
    Converge {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        grids: Vec<usize>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GammaArg {
    Printed,
    Standard,
}

impl From<GammaArg> for GammaFactor {
    fn from(g: GammaArg) -> Self {
        match g {
            GammaArg::Printed => GammaFactor::Printed,
            GammaArg::Standard => GammaFactor::Standard,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SpecName {
    /// gamma X
    Gamma,
    /// ml ALPHA BETA Z
    Ml,
    /// wright MU THETA
    Wright,
    /// moment MU DELTA
    Moment,
}

/// Parses `args` (program name first) and runs one subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    1
                }
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "hilfer: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Solve { file, out: csv, report, n } => solve(&file, csv.as_deref(), report.as_deref(), n, out, err),
        Command::Certify {
            file,
            estimate,
            radius,
            gamma_factor,
        } => certify_cmd(&file, estimate, radius, gamma_factor.map(Into::into), out),
        Command::Residual { file, solution } => residual(&file, &solution, out),
        Command::Gronwall { file } => gronwall(&file, out),
        Command::Specfun { name, args, precision } => specfun(name, &args, precision, out),
        Command::Converge { file, grids } => converge(&file, &grids, out),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_problem(path: &Path) -> Result<Problem, CliError> {
    ProblemFile::from_json(&read(path)?)
        .and_then(|f| f.build())
        .map_err(|e| match e {
            CliError::Input(msg) => CliError::Input(format!("{}: {msg}", path.display())),
            other => other,
        })
}

fn io(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(value: &T, mut out: impl Write) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(out).map_err(io)?;
    out.flush().map_err(io)
}

fn solver_notes(p: &Problem) -> Vec<String> {
    let mut notes = vec![
        "trajectories are stored in weighted form w(t) = t^(1-gamma) u(t)".to_string(),
        "K_mu(t) = t^(mu-1) P_mu(t) is used for the solution kernel".to_string(),
        "the nonlocal map sees the trajectory interpolated linearly in weighted form".to_string(),
        "measured_ratio is the largest ratio of successive residuals after the first".to_string(),
    ];
    if p.spec.gamma() < 1.0 {
        notes.push("the weighted convolution integrand at t = 0 is extrapolated from the first two nodes".to_string());
    }
    notes
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    mu: f64,
    nu: f64,
    gamma: f64,
    n: usize,
    tol: f64,
    #[serde(flatten)]
    report: &'a SolveReport,
    notes: Vec<String>,
}

fn non_convergence(report: &SolveReport, tol: f64) -> CliError {
    CliError::Numerical(format!(
        "Picard iteration did not reach tol {tol:e} in {} iterations (last residual {:e})",
        report.iterations,
        report.residuals.last().copied().unwrap_or(f64::NAN)
    ))
}

fn solve(
    file: &Path,
    csv: Option<&Path>,
    report_path: Option<&Path>,
    n: Option<usize>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let p = load_problem(file)?;
    let n = n.unwrap_or(p.n);
    let grid = p.spec.grid(n)?;
    let report = mild_solve(&p.spec, grid, p.tol, p.max_iter)?;
    match csv {
        Some(path) => write_trajectory(&report.final_, create(path)?)?,
        None => write_trajectory(&report.final_, &mut *out)?,
    }
    if let Some(path) = report_path {
        let body = SolveOutput {
            mu: p.spec.mu,
            nu: p.spec.nu,
            gamma: p.spec.gamma(),
            n,
            tol: p.tol,
            report: &report,
            notes: solver_notes(&p),
        };
        write_json(&body, create(path)?)?;
    }
    let _ = writeln!(
        err,
        "solve: {} iterations, converged = {}, measured ratio {:.6}",
        report.iterations, report.converged, report.measured_ratio
    );
    if !report.converged {
        return Err(non_convergence(&report, p.tol));
    }
    Ok(())
}

fn seed_from_env() -> Result<u64, CliError> {
    let Ok(raw) = std::env::var(SEED_VAR) else {
        return Ok(DEFAULT_SEED);
    };
    let s = raw.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|_| CliError::Usage(format!("{SEED_VAR} = {raw:?} is not an unsigned integer")))
}

fn certify_cmd(
    file: &Path,
    estimate: bool,
    radius: Option<f64>,
    gamma_factor: Option<GammaFactor>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let p = load_problem(file)?;
    let (constants, estimated) = match p.condition_constants() {
        Some(mut c) if !estimate => {
            if let Some(g) = gamma_factor {
                c.gamma_factor = g;
            }
            (c, false)
        }
        _ => {
            let opts = EstimateOptions {
                r: radius.unwrap_or(p.estimate.r),
                samples: p.estimate.samples,
                n: p.n,
                seed: seed_from_env()?,
                gamma_factor: gamma_factor.unwrap_or_default(),
                ..EstimateOptions::default()
            };
            (estimate_constants(&p.spec, &opts)?, true)
        }
    };
    let report = certify(&constants, estimated)?;
    write_json(&report, &mut *out)?;
    if !report.certified() {
        return Err(CliError::Certificate(format!(
            "q = {} (contraction_ok = {}), ball lhs = {} against r = {} (ball_ok = {})",
            report.q, report.contraction_ok, report.ball_lhs, constants.r, report.ball_ok
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct ResidualOutput {
    n: usize,
    weighted_sup: f64,
    initial_condition_error: f64,
    path: hilfer_core::solver::ResidualPath,
}

fn residual(file: &Path, solution: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let p = load_problem(file)?;
    let text = read(solution)?;
    let rows = text.lines().filter(|l| !l.trim().is_empty()).count();
    if rows < 3 {
        return Err(CliError::Input(format!("{}: too few rows", solution.display())));
    }
    let grid = p.spec.grid(rows - 2)?;
    let u = read_trajectory(text.as_bytes(), grid, p.spec.gamma(), p.spec.dim())?;
    let path = strong_residual(&p.spec, &u)?;
    let body = ResidualOutput {
        n: grid.n,
        weighted_sup: path.weighted_sup(),
        initial_condition_error: initial_condition_check(&p.spec, &u)?,
        path,
    };
    write_json(&body, &mut *out)
}

#[derive(Serialize)]
struct GronwallOutput {
    #[serde(flatten)]
    verdict: hilfer_core::certificates::GronwallVerdict,
    terms: usize,
    t_end: f64,
    u_end: f64,
    series_end: f64,
    series_max_tail: f64,
    corollary_end: Option<f64>,
    /// corollary envelope minus series bound, minimum over the grid
    corollary_margin: Option<f64>,
}

fn gronwall(file: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let inst = GronwallFile::from_json(&read(file)?)?.build()?;
    let verdict = verify_gronwall(&inst.u, &inst.v, &inst.g, inst.alpha, inst.psi, &inst.grid)?;
    let series = gronwall_bound(&inst.v, &inst.g, inst.alpha, inst.psi, &inst.grid, DEFAULT_GRONWALL_TERMS)?;
    let corollary = corollary_bound(&inst.v, &inst.g, inst.alpha, inst.psi, &inst.grid).ok();
    let last = inst.grid.len() - 1;
    let body = GronwallOutput {
        terms: DEFAULT_GRONWALL_TERMS,
        t_end: inst.grid.node(last),
        u_end: inst.u[last],
        series_end: series.values[last],
        series_max_tail: series.max_tail(),
        corollary_end: corollary.as_ref().map(|c| c[last]),
        corollary_margin: corollary.as_ref().map(|c| {
            c.iter()
                .zip(&series.values)
                .map(|(c, s)| c - s)
                .fold(f64::INFINITY, f64::min)
        }),
        verdict,
    };
    write_json(&body, &mut *out)?;
    if body.verdict.series_bound == Verdict::Violated || body.verdict.corollary_bound == Verdict::Violated {
        return Err(CliError::Certificate("a Gronwall conclusion is violated".into()));
    }
    Ok(())
}

fn specfun(name: SpecName, args: &[f64], precision: usize, out: &mut dyn Write) -> Result<(), CliError> {
    let arity = match name {
        SpecName::Gamma => 1,
        SpecName::Ml => 3,
        SpecName::Wright | SpecName::Moment => 2,
    };
    if args.len() != arity {
        return Err(CliError::Usage(format!("{name:?} takes {arity} argument(s), got {}", args.len())));
    }
    let value = match name {
        SpecName::Gamma => gamma(args[0])?,
        SpecName::Ml => mittag_leffler(args[0], args[1], args[2])?,
        SpecName::Wright => mainardi_wright(args[0], args[1])?,
        SpecName::Moment => wright_moment(args[0], args[1])?,
    };
    writeln!(out, "{value:.precision$}").map_err(io)
}

#[derive(Serialize)]
struct Level {
    n: usize,
    iterations: usize,
    converged: bool,
    measured_ratio: f64,
    end_weighted: Vec<f64>,
    /// sup over this level's nodes of the weighted distance to the next level
    diff_to_next: Option<f64>,
    /// ratio of successive differences
    diff_ratio: Option<f64>,
}

fn level_distance(coarse: &Trajectory, fine: &Trajectory) -> f64 {
    let g = coarse.grid();
    (0..g.len())
        .map(|i| (coarse.weighted_at(i) - fine.interpolate_weighted(g.node(i))).norm())
        .fold(0.0, f64::max)
}

fn converge(file: &Path, grids: &[usize], out: &mut dyn Write) -> Result<(), CliError> {
    let p = load_problem(file)?;
    if grids.is_empty() {
        return Err(CliError::Usage("--grids needs at least one size".into()));
    }
    let spec = &p.spec;
    let (tol, max_iter) = (p.tol, p.max_iter);
    let reports: Vec<hilfer_core::Result<SolveReport>> = std::thread::scope(|s| {
        let handles: Vec<_> = grids
            .iter()
            .map(|&n| s.spawn(move || mild_solve(spec, spec.grid(n)?, tol, max_iter)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("grid level panicked"))
            .collect()
    });
    let reports = reports.into_iter().collect::<hilfer_core::Result<Vec<_>>>()?;
    let diffs: Vec<f64> = reports
        .windows(2)
        .map(|w| level_distance(&w[0].final_, &w[1].final_))
        .collect();
    let levels: Vec<Level> = reports
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let last = r.final_.grid().len() - 1;
            Level {
                n: grids[k],
                iterations: r.iterations,
                converged: r.converged,
                measured_ratio: r.measured_ratio,
                end_weighted: r.final_.weighted_at(last).iter().copied().collect(),
                diff_to_next: diffs.get(k).copied(),
                diff_ratio: match (k.checked_sub(1).and_then(|j| diffs.get(j)), diffs.get(k)) {
                    (Some(a), Some(b)) if *b > 0.0 => Some(a / b),
                    _ => None,
                },
            }
        })
        .collect();
    write_json(&levels, &mut *out)?;
    if let Some(r) = reports.iter().find(|r| !r.converged) {
        return Err(non_convergence(r, tol));
    }
    Ok(())
}
