//! `ma-opt`: run movable-antenna sweeps and inspect configs.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ma_opt::baselines::{fpa_layout, CandidateGrid};
use ma_opt::experiments::demo::run_demo;
use ma_opt::experiments::{emit_results, parse_config, run_sweep, ExperimentConfig, OutputFormat, Scheme};
use ma_opt::Error;

#[derive(Parser)]
#[command(
    name = "ma-opt",
    version,
    about = "Movable-antenna position optimization under minimum-spacing constraints"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo sweep and write results.csv + aggregate.csv.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Override `num_trials`.
        #[arg(long)]
        trials: Option<usize>,
        /// Override `base_seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Override `schemes`, e.g. `ma,fpa,as`.
        #[arg(long, value_delimiter = ',')]
        schemes: Option<Vec<String>>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Project random points out of random disk sets and compare against a
    /// brute-force grid search.
    ProjectDemo {
        #[arg(long, default_value_t = 10)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-3)]
        resolution: f64,
    },
    /// Parse a config and check that every sweep point is feasible.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn check_feasible(cfg: &ExperimentConfig) -> Result<(), Error> {
    for &a in &cfg.a_over_lambda {
        let c = cfg.constraints(a)?;
        c.check_room(cfg.m)?;
        if cfg.schemes.contains(&Scheme::Fpa) {
            fpa_layout(cfg.m, &c)?;
        }
        if cfg.schemes.contains(&Scheme::As) {
            CandidateGrid::new(cfg.as_candidates, &c)?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run {
            config,
            out,
            trials,
            seed,
            schemes,
            threads,
            format,
        } => {
            let mut cfg = parse_config(&config)?;
            if let Some(t) = trials {
                cfg.num_trials = t;
            }
            if let Some(s) = seed {
                cfg.base_seed = s;
            }
            if let Some(list) = schemes {
                cfg.schemes = list.iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
            }
            cfg.validate()?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.unwrap_or(0))
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            let rows = pool.install(|| run_sweep(&cfg))?;
            let failed = rows.iter().filter(|r| r.is_error()).count();
            let format = match format {
                Format::Csv => OutputFormat::Csv,
                Format::Jsonl => OutputFormat::JsonLines,
            };
            let (results, agg) = emit_results(&rows, &out, format)?;
            eprintln!(
                "wrote {} rows to {} ({} failed), aggregates to {}",
                rows.len(),
                results.display(),
                failed,
                agg.display()
            );
            Ok(())
        }
        Command::ProjectDemo {
            cases,
            seed,
            resolution,
        } => {
            let demo = run_demo(cases, seed, resolution)?;
            println!("query,disks,radius,projected,objective,grid_objective,gap");
            for c in &demo {
                println!(
                    "\"{}\",{},{:.4},\"{}\",{:.6},{:.6},{:.2e}",
                    c.query,
                    c.disks.centers().len(),
                    c.disks.radius(),
                    c.projected,
                    c.objective,
                    c.grid_objective,
                    c.grid_objective - c.objective
                );
            }
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = parse_config(&config)?;
            check_feasible(&cfg)?;
            eprintln!(
                "{}: ok ({} case, {} region sizes)",
                config.display(),
                cfg.case,
                cfg.a_over_lambda.len()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
