use clap::{Args, Parser, Subcommand};
use hyperstab_cli::commands::{
    load_config, run_conjugacy, run_inverse_check, run_norms, run_splitting, run_sweep,
};
use hyperstab_cli::config::{parse_sweep, Resolved};
use hyperstab_cli::error::{CliError, CliResult};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "hyperstab",
    about = "Invariant splittings, operator series and certified conjugacies for hyperbolic torus and circle maps"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides out_dir from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (fallback: HYPERSTAB_THREADS).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct NormsArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Field file (CSV: `i,j,u,v` on the torus, `i,u` on the circle).
    #[arg(long)]
    field: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the invariant splitting by graph-transform iteration.
    Splitting(RunArgs),
    /// Solve the conjugacy h with g h = h f and certify it.
    Conjugacy(RunArgs),
    /// Verify the series right inverse of 1 - f_sharp on random fields.
    InverseCheck(RunArgs),
    /// Norm triple of a field read from disk.
    Norms(NormsArgs),
    /// Run a pipeline over a list of parameter values.
    Sweep(RunArgs),
}

fn configure_threads(requested: Option<usize>) {
    let n = requested.or_else(|| {
        std::env::var("HYPERSTAB_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = n {
        if let Err(e) = hyperstab::exec::configure_threads(n) {
            eprintln!("hyperstab: thread pool: {e}");
        }
    }
}

fn out_dir(args: &RunArgs, cfg_out: Option<&str>) -> CliResult<PathBuf> {
    args.out
        .clone()
        .or_else(|| cfg_out.map(PathBuf::from))
        .ok_or_else(|| CliError::config("no output directory: set out_dir in the config or pass --out"))
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.cmd {
        Cmd::Splitting(args) => {
            configure_threads(args.threads);
            let mut cfg = load_config(&args.config)?;
            if let Some(seed) = args.seed {
                cfg.seed = seed;
            }
            let dir = out_dir(&args, cfg.out_dir.as_deref())?;
            let resolved = Resolved::from_config(&cfg)?;
            let out = run_splitting(&resolved, &dir)?;
            println!(
                "splitting: {} sweeps, residual {:.3e}, K^ {:.4}, ratio {:.4} -> {}",
                out.result.iterations,
                out.result.residual,
                out.result.k_hat.unwrap_or(f64::NAN),
                out.result.max_ratio,
                dir.display()
            );
        }
        Cmd::Conjugacy(args) => {
            configure_threads(args.threads);
            let mut cfg = load_config(&args.config)?;
            if let Some(seed) = args.seed {
                cfg.seed = seed;
            }
            let dir = out_dir(&args, cfg.out_dir.as_deref())?;
            let resolved = Resolved::from_config(&cfg)?;
            let out = run_conjugacy(&resolved, &dir)?;
            println!(
                "conjugacy: {} iterations, residual {:.3e}, certificate {} -> {}",
                out.result.iterations,
                out.result.residual,
                if out.certificate.positive { "positive" } else { "negative" },
                dir.display()
            );
        }
        Cmd::InverseCheck(args) => {
            configure_threads(args.threads);
            let mut cfg = load_config(&args.config)?;
            if let Some(seed) = args.seed {
                cfg.seed = seed;
            }
            let dir = out_dir(&args, cfg.out_dir.as_deref())?;
            let resolved = Resolved::from_config(&cfg)?;
            let out = run_inverse_check(&resolved, &dir)?;
            let worst = out
                .reports
                .iter()
                .map(|r| r.residual_c0)
                .fold(0.0f64, f64::max);
            println!(
                "inverse-check: {} fields, worst residual {:.3e}, decay rate {:.4} -> {}",
                out.reports.len(),
                worst,
                out.decay_rate,
                dir.display()
            );
        }
        Cmd::Norms(args) => {
            configure_threads(args.run.threads);
            let mut cfg = load_config(&args.run.config)?;
            if let Some(seed) = args.run.seed {
                cfg.seed = seed;
            }
            let dir = out_dir(&args.run, cfg.out_dir.as_deref())?;
            let resolved = Resolved::from_config(&cfg)?;
            let out = run_norms(&resolved, &args.field, &dir)?;
            println!(
                "norms: c0 {:.6e}, holder {:.6e}, df_lip {:.6e} -> {}",
                out.report.c0,
                out.report.holder,
                out.report.df_lip,
                dir.display()
            );
        }
        Cmd::Sweep(args) => {
            configure_threads(args.threads);
            let text = std::fs::read_to_string(&args.config)
                .map_err(|e| CliError::parse(format!("read {:?}: {e}", args.config)))?;
            let mut spec = parse_sweep(&text)?;
            if let Some(seed) = args.seed {
                spec.base.seed = seed;
            }
            let dir = out_dir(&args, spec.base.out_dir.as_deref())?;
            let out = run_sweep(&spec, &dir)?;
            println!(
                "sweep: {} rows ({} failed) -> {}",
                out.rows,
                out.failures,
                dir.display()
            );
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("hyperstab: {}", e.diagnostic());
        std::process::exit(e.exit_code());
    }
}
