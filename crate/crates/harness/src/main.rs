use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rzasense_harness::bounds::{bounds_table, compare_with_bounds, write_bounds, write_comparison};
use rzasense_harness::output::{curves_from_rows, read_csv, write_csv};
use rzasense_harness::runner::{run_point, ConfigPoint};
use rzasense_harness::{run_sweep, ExperimentConfig, HarnessError, MseCurve, Result, Solver};

#[derive(Parser)]
#[command(name = "rzasense", version, about = "Adaptive sparse sensing Monte Carlo harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single (K, SNR, epsilon) point for each selected solver.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
        snr_db: f64,
        #[arg(long, default_value_t = 2000.0)]
        epsilon: f64,
    },
    /// Run the full sweep described by the config.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Print the closed-form bounds for every (K, SNR) of the config.
    Bounds {
        #[command(flatten)]
        common: Common,
    },
    /// Join a curve CSV with the bounds table.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Curve CSV produced by `run` or `sweep`.
        #[arg(long)]
        curves: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Output path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated subset of rza-nlmf, nlmf, omp, bpdn.
    #[arg(long, value_delimiter = ',', value_parser = str::parse::<Solver>)]
    solvers: Option<Vec<Solver>>,
    /// Write every iteration instead of every 50th.
    #[arg(long)]
    no_decimate: bool,
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::parse(&fs::read_to_string(path)?)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(trials) = self.trials {
            cfg.trials = trials;
        }
        if let Some(solvers) = &self.solvers {
            cfg.solvers = solvers.clone();
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        if self.no_decimate {
            cfg.decimate = 1;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|source| {
            HarnessError::Output {
                path: p.clone(),
                source,
            }
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn summarize(curves: &[MseCurve]) {
    for c in curves {
        let eps = c.epsilon.map_or_else(|| "-".to_string(), |e| e.to_string());
        match c.final_mse() {
            Some(mse) => eprintln!(
                "{:<8} k={:<3} snr={:<6} eps={:<8} final mse={:.4e} ({:.2} dB){}",
                c.solver,
                c.k,
                c.snr_db,
                eps,
                mse,
                10.0 * mse.log10(),
                if c.failed > 0 {
                    format!(" [{} of {} trials diverged]", c.failed, c.trials)
                } else {
                    String::new()
                }
            ),
            None => eprintln!(
                "{:<8} k={:<3} snr={:<6} eps={:<8} all {} trials diverged",
                c.solver, c.k, c.snr_db, eps, c.trials
            ),
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            common,
            k,
            snr_db,
            epsilon,
        } => {
            let mut cfg = common.load()?;
            cfg.k_list = vec![k];
            cfg.snr_list = vec![snr_db];
            cfg.epsilon_list = vec![epsilon];
            cfg.validate()?;
            let mut out = open_out(&cfg.out)?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(common.workers.max(1))
                .build()
                .map_err(|e| HarnessError::Pool(e.to_string()))?;
            let curves = pool.install(|| {
                cfg.solvers
                    .iter()
                    .map(|&solver| {
                        let point = ConfigPoint {
                            solver,
                            k,
                            snr_db,
                            epsilon: solver.is_adaptive().then_some(epsilon),
                        };
                        run_point(&cfg, &point)
                    })
                    .collect::<Result<Vec<_>>>()
            })?;
            write_csv(&mut out, &curves, cfg.decimate)?;
            summarize(&curves);
        }
        Command::Sweep { common } => {
            let cfg = common.load()?;
            if cfg.out.is_some() {
                let curves = run_sweep(&cfg, common.workers)?;
                summarize(&curves);
            } else {
                let curves = rzasense_harness::sweep_curves(&cfg, common.workers)?;
                write_csv(&mut open_out(&None)?, &curves, cfg.decimate)?;
                summarize(&curves);
            }
        }
        Command::Bounds { common } => {
            let cfg = common.load()?;
            write_bounds(&mut open_out(&cfg.out)?, &bounds_table(&cfg)?)?;
        }
        Command::Compare { common, curves } => {
            let cfg = common.load()?;
            let rows = read_csv(BufReader::new(File::open(&curves)?))?;
            let table = compare_with_bounds(&curves_from_rows(&rows), &bounds_table(&cfg)?)?;
            write_comparison(&mut open_out(&cfg.out)?, &table)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
