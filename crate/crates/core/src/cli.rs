//! Command line driver: `run`, `compare` and `check` subcommands.
//!
//! Exit codes: 0 on success (whatever the solver status), 1 when a solve
//! errors or the gradient check fails, 2 for configuration errors, 3 for I/O
//! errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{random_feasible_points, ConfigError, RunConfig, SolverSpec};
use crate::history::ConvergenceHistory;
use crate::operators::{check_gradient, ObjectiveProblem};
use crate::solver::{solve, SolverResult};
use crate::Vector;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Relative-error threshold for `check`.
pub const GRADIENT_CHECK_TOL: f64 = 1e-5;

pub const CSV_HEADER: &str = "iter,f,rel_f_reduction,proj_grad_norm,step_size,ls_trials,n_projections,ipm_iters_total,active_fraction,operator_applies,elapsed_seconds";

#[derive(Debug, Parser)]
#[command(name = "pnkhb", version, about = "Projected Newton-Krylov solver for bound-constrained problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Override the config's random seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for CSV output (default: current directory).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Suppress the summary on stdout.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve with the `solver.*` configuration and write one CSV.
    Run { config: PathBuf },
    /// Run every entry of `compare.solvers` in parallel.
    Compare { config: PathBuf },
    /// Validate the config and check gradients at random feasible points.
    Check { config: PathBuf },
}

/// Per-iteration CSV including an `iter = 0` row for the starting point.
pub fn history_csv(history: &ConvergenceHistory) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    out.push_str(&format!(
        "0,{:e},{:e},{:e},0,0,0,0,0,{},0\n",
        history.initial_f,
        history.relative_reduction(history.initial_f),
        history.initial_proj_grad_norm,
        history.initial_operator_applies
    ));
    for r in &history.records {
        out.push_str(&format!(
            "{},{:e},{:e},{:e},{:e},{},{},{},{:e},{},{:.6}\n",
            r.k,
            r.f,
            history.relative_reduction(r.f),
            r.proj_grad_norm,
            r.step_size,
            r.ls_trials,
            r.n_projections,
            r.ipm_iters_total,
            r.active_fraction,
            r.operator_applies,
            r.elapsed_seconds
        ));
    }
    out
}

pub fn summary_line(label: &str, result: &SolverResult) -> String {
    let h = &result.history;
    let mut line = format!(
        "{label}: status={} iterations={} f={:e} proj_grad_norm={:e} operator_applies={} projections={} ipm_iterations={}",
        result.status,
        result.iterations(),
        h.final_f(),
        h.final_proj_grad_norm(),
        h.total_operator_applies(),
        h.total_projections(),
        h.total_ipm_iterations()
    );
    if result.x.len() <= 10 {
        let xs: Vec<String> = result.x.iter().map(|v| format!("{v:.9}")).collect();
        line.push_str(&format!(" x=[{}]", xs.join(", ")));
    }
    line
}

const SUMMARY_HEADER: &str = "solver,status,iterations,final_f,proj_grad_norm,operator_applies,projections,ipm_iterations";

fn summary_row(label: &str, r: &SolverResult) -> String {
    let h = &r.history;
    format!(
        "{label},{},{},{:e},{:e},{},{},{}",
        r.status,
        r.iterations(),
        h.final_f(),
        h.final_proj_grad_norm(),
        h.total_operator_applies(),
        h.total_projections(),
        h.total_ipm_iterations()
    )
}

fn write_file(path: &Path, contents: &str) -> Result<(), (i32, String)> {
    std::fs::write(path, contents).map_err(|e| (EXIT_IO, format!("cannot write {}: {e}", path.display())))
}

fn config_failure(e: ConfigError) -> (i32, String) {
    let code = if e.is_io() { EXIT_IO } else { EXIT_CONFIG };
    (code, e.to_string())
}

struct Context {
    cfg: RunConfig,
    out_dir: PathBuf,
    stem: String,
}

fn prepare(config: &Path, cli: &Cli) -> Result<Context, (i32, String)> {
    let mut cfg = RunConfig::load(config).map_err(config_failure)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out_dir = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let stem = match &cfg.output {
        Some(p) => p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into()),
        None => cfg.problem.kind().to_string(),
    };
    Ok(Context { cfg, out_dir, stem })
}

fn build(ctx: &Context) -> Result<(Box<dyn ObjectiveProblem>, Vector), (i32, String)> {
    ctx.cfg
        .problem
        .build(ctx.cfg.seed)
        .map_err(|e| (EXIT_CONFIG, format!("cannot build problem '{}': {e}", ctx.cfg.problem.kind())))
}

fn ensure_dir(dir: &Path) -> Result<(), (i32, String)> {
    std::fs::create_dir_all(dir).map_err(|e| (EXIT_IO, format!("cannot create {}: {e}", dir.display())))
}

fn run_one(problem: &dyn ObjectiveProblem, x0: &Vector, spec: &SolverSpec) -> Result<SolverResult, (i32, String)> {
    solve(spec.method, problem, x0, &spec.config).map_err(|e| (EXIT_FAILURE, format!("{} failed: {e}", spec.label)))
}

fn cmd_run(ctx: &Context, out: &mut dyn Write) -> Result<(), (i32, String)> {
    let (problem, x0) = build(ctx)?;
    let result = run_one(problem.as_ref(), &x0, &ctx.cfg.solver)?;
    ensure_dir(&ctx.out_dir)?;
    let path = match &ctx.cfg.output {
        Some(p) => ctx.out_dir.join(p),
        None => ctx.out_dir.join(format!("{}_{}.csv", ctx.stem, ctx.cfg.solver.label)),
    };
    write_file(&path, &history_csv(&result.history))?;
    let _ = writeln!(out, "{}", summary_line(&ctx.cfg.solver.label, &result));
    let _ = writeln!(out, "wrote {}", path.display());
    Ok(())
}

fn cmd_compare(ctx: &Context, out: &mut dyn Write) -> Result<(), (i32, String)> {
    let (problem, x0) = build(ctx)?;
    let problem = problem.as_ref();
    let results: Vec<Result<SolverResult, (i32, String)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = ctx
            .cfg
            .compare
            .iter()
            .map(|spec| scope.spawn(|| run_one(problem, &x0, spec)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err((EXIT_FAILURE, "solver thread panicked".into()))))
            .collect()
    });
    ensure_dir(&ctx.out_dir)?;
    let mut table = String::from(SUMMARY_HEADER);
    table.push('\n');
    for (spec, result) in ctx.cfg.compare.iter().zip(results) {
        let result = result?;
        let path = ctx.out_dir.join(format!("{}_{}.csv", ctx.stem, spec.label));
        write_file(&path, &history_csv(&result.history))?;
        table.push_str(&summary_row(&spec.label, &result));
        table.push('\n');
        let _ = writeln!(out, "{}", summary_line(&spec.label, &result));
    }
    let path = ctx.out_dir.join(format!("{}_summary.csv", ctx.stem));
    write_file(&path, &table)?;
    let _ = writeln!(out, "wrote {}", path.display());
    Ok(())
}

fn cmd_check(ctx: &Context, out: &mut dyn Write) -> Result<bool, (i32, String)> {
    let (problem, x0) = build(ctx)?;
    let points = random_feasible_points(problem.bounds(), &x0, ctx.cfg.check_points, ctx.cfg.seed);
    let worst = points
        .iter()
        .enumerate()
        .map(|(i, x)| check_gradient(problem.as_ref(), x, 5, ctx.cfg.seed.wrapping_add(i as u64)))
        .fold(0.0, f64::max);
    let ok = worst <= GRADIENT_CHECK_TOL;
    let _ = writeln!(
        out,
        "config ok; problem={} n={} gradient check over {} points: max relative error {:e} ({})",
        problem.name(),
        problem.dim(),
        points.len(),
        worst,
        if ok { "ok" } else { "FAILED" }
    );
    Ok(ok)
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_CONFIG;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    let mut sink = std::io::sink();
    let out: &mut dyn Write = if cli.quiet { &mut sink } else { out };
    let config = match &cli.command {
        Command::Run { config } | Command::Compare { config } | Command::Check { config } => config.clone(),
    };
    let outcome = prepare(&config, &cli).and_then(|ctx| match cli.command {
        Command::Run { .. } => cmd_run(&ctx, out).map(|_| EXIT_OK),
        Command::Compare { .. } => cmd_compare(&ctx, out).map(|_| EXIT_OK),
        Command::Check { .. } => cmd_check(&ctx, out).map(|ok| if ok { EXIT_OK } else { EXIT_FAILURE }),
    });
    match outcome {
        Ok(code) => code,
        Err((code, message)) => {
            let _ = writeln!(err, "error: {}: {message}", config.display());
            code
        }
    }
}
