use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use parfam_cli::benchmark::cmd_benchmark;
use parfam_cli::{cmd_expressivity, cmd_fit, cmd_generate, write_atomic, CliError, ExpressivityArgs, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "parfam", version, about = "Symbolic regression over parametric rational families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit one CSV dataset and write the result document.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `optim.seed`.
        #[arg(long, env = "PARFAM_SEED")]
        seed: Option<u64>,
        /// Seconds; overrides `search.time_budget`.
        #[arg(long)]
        time_budget: Option<f64>,
        /// Objective evaluations; overrides `search.eval_budget`.
        #[arg(long)]
        eval_budget: Option<u64>,
    },
    /// Fit every `name.csv` + `name.expr` problem of a directory.
    Benchmark {
        /// Problem directory.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory for per-problem records and the summary.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = "PARFAM_SEED")]
        seed: Option<u64>,
        /// Relative noise level added to the training targets.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        time_budget: Option<f64>,
        #[arg(long)]
        eval_budget: Option<u64>,
    },
    /// Print the expressivity ratio table and optional exact counts.
    Expressivity {
        #[arg(long, default_value_t = 4)]
        b: u32,
        #[arg(long, default_value_t = 6)]
        k_max: u32,
        #[arg(long, default_value_t = 9)]
        n_max: u32,
        /// Print exact c_l and d_l for l = 1..=L (0 disables).
        #[arg(long = "length", short = 'L', default_value_t = 0)]
        length: usize,
        #[arg(long, default_value_t = 3)]
        k: u32,
        #[arg(long, default_value_t = 4)]
        n: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate synthetic problems from the `gen.*` config keys.
    Generate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, env = "PARFAM_SEED")]
        seed: Option<u64>,
    },
}

fn load_config(path: Option<&PathBuf>, time_budget: Option<f64>, eval_budget: Option<u64>) -> Result<RunConfig, CliError> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if time_budget.is_some() {
        cfg.search.time_budget = time_budget;
    }
    if eval_budget.is_some() {
        cfg.search.eval_budget = eval_budget;
    }
    cfg.search.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fit {
            data,
            config,
            out,
            seed,
            time_budget,
            eval_budget,
        } => {
            let mut cfg = load_config(config.as_ref(), time_budget, eval_budget)?;
            if let Some(s) = seed {
                cfg.fit.seed = s;
            }
            let o = cmd_fit(&data, &cfg, out.as_deref())?;
            let r = &o.result;
            println!("{}", r.expression);
            println!(
                "r2_train={} r2_val={} r2_test={}",
                show(r.r2_train),
                show(r.r2_val),
                show(r.r2_test)
            );
            eprintln!(
                "spec {} ({} of {} fitted), {} evaluations, {:.2}s",
                r.spec_used, r.specs_fitted, r.specs_total, r.eval_count, o.wall_time
            );
        }
        Command::Benchmark {
            data,
            config,
            out,
            seed,
            noise,
            jobs,
            time_budget,
            eval_budget,
        } => {
            let cfg = load_config(config.as_ref(), time_budget, eval_budget)?;
            let seed = seed.unwrap_or(cfg.fit.seed);
            let summary = cmd_benchmark(&data, &cfg, out.as_deref(), noise, seed, jobs)?;
            print!("{}", summary.table());
        }
        Command::Expressivity {
            b,
            k_max,
            n_max,
            length,
            k,
            n,
            out,
        } => {
            let text = cmd_expressivity(&ExpressivityArgs {
                b,
                k_max,
                n_max,
                l_max: length,
                k,
                n,
            })?;
            if let Some(p) = out {
                write_atomic(&p, &text)?;
            }
            print!("{text}");
        }
        Command::Generate {
            config,
            out,
            count,
            seed,
        } => {
            let cfg = load_config(config.as_ref(), None, None)?;
            let seed = seed.unwrap_or(cfg.fit.seed);
            let s = cmd_generate(&cfg, &out, count, seed)?;
            eprintln!("wrote {} problems, rejected {} draws", s.written, s.rejected);
        }
    }
    Ok(())
}

fn show(v: Option<f64>) -> String {
    v.map_or("nan".to_string(), |v| format!("{v:.9}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
