//! Batch harness behind the `plaplace` binary.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use plaplace::{
    dense_lambda_p2, estimate_lambda_p, ground_state_solve, mpa_solve, run_suite, theta_sweep,
    verify_positivity,
};
use thiserror::Error;

pub mod config;
pub mod records;

use config::{Prepared, RunConfig};
use records::{path_profile_csv, summary, sweep_csv, to_json, write, LambdaRecord, SolveRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NO_CONVERGENCE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error("{0}")]
    Solver(#[from] plaplace::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver(plaplace::Error::NoConvergence { .. }) => EXIT_NO_CONVERGENCE,
            _ => EXIT_CONFIG,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "plaplace",
    version,
    about = "Ground states of the p-Laplace equation on weighted graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `out` in the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for every pseudorandom choice; overrides `seed` in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Suppress the summary on stdout.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Nehari-manifold ground state.
    Solve,
    /// Mountain-pass critical point and path profile.
    MountainPass,
    /// Potential-well sweep over theta and the Dirichlet limit.
    WellSweep,
    /// Invariant self-check suite.
    Verify,
    /// Upper estimate of the principal constant lambda_p.
    Lambda,
}

pub const DEFAULT_OUT: &str = "plaplace-out";

struct Context {
    prep: Prepared,
    out: PathBuf,
    quiet: bool,
}

impl Context {
    fn emit(&self, name: &str, contents: &str) -> Result<(), CliError> {
        write(&self.out.join(name), contents)
    }

    fn report(&self, text: &str) {
        if !self.quiet {
            print!("{text}");
        }
    }
}

fn load_context(common: &Common, cfg_path: &Path) -> Result<Context, CliError> {
    let (cfg, base) = RunConfig::load(cfg_path)?;
    let prep = cfg.prepare(&base, common.seed)?;
    let out = common
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(|o| base.join(o)))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    std::fs::create_dir_all(&out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    Ok(Context {
        prep,
        out,
        quiet: common.quiet,
    })
}

/// Runs one command and returns the process exit code.
pub fn run(cli: &Cli) -> Result<i32, CliError> {
    let pool = match cli.common.workers {
        Some(0) => return Err(CliError::Config("--workers must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?,
        None => rayon::ThreadPoolBuilder::new()
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?,
    };
    pool.install(|| dispatch(cli))
}

fn dispatch(cli: &Cli) -> Result<i32, CliError> {
    if cli.command == Command::Verify {
        return cmd_verify(&cli.common);
    }
    let path = cli
        .common
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let ctx = load_context(&cli.common, path)?;
    if ctx.prep.rho_needs_theta && cli.command != Command::WellSweep {
        return Err(CliError::Config(
            "rho = \"theta*a+b\" needs model.theta outside well-sweep".into(),
        ));
    }
    match cli.command {
        Command::Solve => cmd_solve(&ctx),
        Command::MountainPass => cmd_mountain_pass(&ctx),
        Command::WellSweep => cmd_well_sweep(&ctx),
        Command::Lambda => cmd_lambda(&ctx),
        Command::Verify => unreachable!(),
    }
}

fn converged_code(converged: bool) -> i32 {
    if converged {
        EXIT_OK
    } else {
        EXIT_NO_CONVERGENCE
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}

fn positivity_label(ctx: &Context, r: &plaplace::Solution) -> Result<String, CliError> {
    Ok(format!(
        "{:?}",
        verify_positivity(&ctx.prep.graph, &r.u, 1e-12)?
    ))
}

fn cmd_solve(ctx: &Context) -> Result<i32, CliError> {
    let r = ground_state_solve(&ctx.prep.model, &ctx.prep.solve)?;
    let g = &*ctx.prep.graph;
    ctx.emit("result.json", &to_json(&SolveRecord::new("solve", g, &r))?)?;
    ctx.emit("solution.txt", &r.u.to_text(g))?;
    let text = summary(&[
        ("command", "solve".into()),
        ("converged", r.converged.to_string()),
        ("m", fmt(r.energy)),
        ("equation_residual", fmt(r.equation_residual)),
        ("nehari_residual", fmt(r.nehari_residual)),
        ("iterations", r.iterations.to_string()),
        ("seed", records::seed_name(r.seed)),
        ("positivity", positivity_label(ctx, &r)?),
    ]);
    ctx.emit("summary.txt", &text)?;
    ctx.report(&text);
    Ok(converged_code(r.converged))
}

fn cmd_mountain_pass(ctx: &Context) -> Result<i32, CliError> {
    let out = mpa_solve(&ctx.prep.model, &ctx.prep.mountain_pass)?;
    let g = &*ctx.prep.graph;
    let r = &out.result;
    ctx.emit(
        "result.json",
        &to_json(&SolveRecord::new("mountain-pass", g, r))?,
    )?;
    ctx.emit("solution.txt", &r.u.to_text(g))?;
    ctx.emit("path_profile.csv", &path_profile_csv(&out.path)?)?;
    let text = summary(&[
        ("command", "mountain-pass".into()),
        ("converged", r.converged.to_string()),
        ("c", fmt(r.energy)),
        ("equation_residual", fmt(r.equation_residual)),
        ("nehari_residual", fmt(r.nehari_residual)),
        ("iterations", r.iterations.to_string()),
        ("segments", (out.path.nodes.len() - 1).to_string()),
        ("respacings", out.respacings.to_string()),
        ("endpoint", records::seed_name(r.seed)),
        ("positivity", positivity_label(ctx, r)?),
    ]);
    ctx.emit("summary.txt", &text)?;
    ctx.report(&text);
    Ok(converged_code(r.converged))
}

fn cmd_well_sweep(ctx: &Context) -> Result<i32, CliError> {
    let well = ctx
        .prep
        .well
        .as_ref()
        .ok_or_else(|| CliError::Config("well-sweep needs a [well] section".into()))?;
    let sweep = theta_sweep(well, &ctx.prep.model, &ctx.prep.solve)?;
    let g = &*ctx.prep.graph;
    ctx.emit("sweep.csv", &sweep_csv(&sweep)?)?;
    ctx.emit(
        "limit.json",
        &to_json(&SolveRecord::new("well-limit", g, &sweep.limit))?,
    )?;
    ctx.emit("limit_solution.txt", &sweep.limit.u.to_text(g))?;
    let mut lines = vec![
        ("command", "well-sweep".to_string()),
        ("thetas", sweep.rows.len().to_string()),
        ("m_omega", fmt(sweep.limit.energy)),
        ("omega_size", well.omega().len().to_string()),
    ];
    if let Some(last) = sweep.rows.last() {
        lines.push(("m_theta_last", fmt(last.m_theta)));
        lines.push(("tail_mass_last", fmt(last.tail_mass)));
        lines.push(("w1p_gap_last", fmt(last.w1p_gap)));
    }
    for c in &sweep.caveats {
        lines.push(("caveat", c.clone()));
    }
    if let Some(a) = &sweep.aborted {
        lines.push(("aborted", a.clone()));
    }
    let text = summary(&lines);
    ctx.emit("summary.txt", &text)?;
    ctx.report(&text);
    Ok(converged_code(sweep.aborted.is_none()))
}

fn cmd_lambda(ctx: &Context) -> Result<i32, CliError> {
    let est = estimate_lambda_p(&ctx.prep.model, &ctx.prep.lambda)?;
    let dense = if ctx.prep.model.p() == 2.0 {
        dense_lambda_p2(&ctx.prep.model).ok()
    } else {
        None
    };
    let g = &*ctx.prep.graph;
    ctx.emit("result.json", &to_json(&LambdaRecord::new(g, &est, dense))?)?;
    ctx.emit("solution.txt", &est.u.to_text(g))?;
    let mut lines = vec![
        ("command", "lambda".to_string()),
        ("lambda_upper_bound", fmt(est.lambda)),
        ("converged", est.converged.to_string()),
        ("residual", fmt(est.residual)),
        ("restarts", est.restarts.to_string()),
    ];
    if let Some(d) = dense {
        lines.push(("lambda_dense_p2", fmt(d)));
    }
    let text = summary(&lines);
    ctx.emit("summary.txt", &text)?;
    ctx.report(&text);
    Ok(converged_code(est.converged))
}

fn cmd_verify(common: &Common) -> Result<i32, CliError> {
    let report = run_suite(common.seed.unwrap_or(0));
    let table = report.table();
    if let Some(out) = &common.out {
        std::fs::create_dir_all(out)
            .map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
        write(&out.join("verify.txt"), &table)?;
    }
    if !common.quiet {
        print!("{table}");
    }
    let failed: Vec<&str> = report.failures().map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(EXIT_OK)
    } else {
        eprintln!("verify failed: {}", failed.join(", "));
        Ok(EXIT_VERIFY)
    }
}
