use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hees_harness::trace::absolute_targets;
use hees_harness::{
    budget_grid, compute_ecdf, evals_to_targets, median_trajectory, read_experiment, run_experiment,
    ExperimentConfig, HarnessError, Result, TraceField,
};

#[derive(Parser)]
#[command(name = "hees", version, about = "Run and aggregate HE-ES experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded optimizations and write traces plus summary.json.
    Run {
        #[arg(long)]
        function: String,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        budget: u64,
        #[arg(long, default_value_t = 1)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Target precision(s), comma separated.
        #[arg(long, default_value = "1e-8", value_delimiter = ',', allow_negative_numbers = true)]
        target: Vec<f64>,
        #[arg(long)]
        sigma0: Option<f64>,
        /// Initial mean, comma separated; drawn from the restart box otherwise.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        m0: Option<Vec<f64>>,
        #[arg(long)]
        lambda_pairs: Option<usize>,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        eta_a: Option<f64>,
        #[arg(long)]
        ipop: bool,
        /// Restart box as `lower,upper`.
        #[arg(long, value_delimiter = ',', num_args = 2, allow_negative_numbers = true)]
        restart_box: Option<Vec<f64>>,
        /// Randomly rotate the problem (one rotation per run seed).
        #[arg(long)]
        rotate: bool,
        /// Fitness spread that ends a run; 0 disables (default 1e-9 with --ipop, 0 otherwise).
        #[arg(long)]
        stop_std: Option<f64>,
        #[arg(long)]
        generations: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// ECDF of (run, target) pairs over a log-spaced budget grid.
    Ecdf {
        #[arg(long = "in")]
        input: PathBuf,
        /// Target precisions, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        targets: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-generation median of one trace field across runs.
    Median {
        #[arg(long = "in")]
        input: PathBuf,
        /// distance, cond_c, sigma or best_f
        #[arg(long)]
        field: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn write_columns<T: serde::Serialize>(path: &Path, header: [&str; 2], rows: impl Iterator<Item = T>) -> Result<()> {
    let csv_err = |source| HarnessError::Csv { path: path.to_owned(), source };
    let file = File::create(path).map_err(|source| HarnessError::Io { path: path.to_owned(), source })?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| HarnessError::Io { path: path.to_owned(), source })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            function,
            dim,
            budget,
            runs,
            seed,
            target,
            sigma0,
            m0,
            lambda_pairs,
            kappa,
            eta_a,
            ipop,
            restart_box,
            rotate,
            stop_std,
            generations,
            out,
            format: Format::Csv,
        } => {
            let mut config = ExperimentConfig::new(&function, dim).with_targets(target);
            config.budget = budget;
            config.runs = runs;
            config.base_seed = seed;
            config.m0 = m0;
            config.pair_count = lambda_pairs;
            config.ipop = ipop;
            config.rotate = rotate;
            config.max_generations = generations;
            config.stop_fitness_std = stop_std;
            config.out_dir = out.clone();
            if let Some(v) = sigma0 {
                config.sigma0 = v;
            }
            if let Some(v) = kappa {
                config.kappa = v;
            }
            if let Some(v) = eta_a {
                config.eta_a = v;
            }
            if let Some(b) = restart_box {
                config.restart_box = (b[0], b[1]);
            }
            let output = run_experiment(&config)?;
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            let io_err = |source| HarnessError::Io { path: PathBuf::from("<stdout>"), source };
            writeln!(w, "run\tseed\ttermination\tevals\tbest_f").map_err(io_err)?;
            for r in &output.summary.runs {
                writeln!(w, "{}\t{}\t{}\t{}\t{:e}", r.run, r.seed, r.termination, r.evals_used, r.best_f)
                    .map_err(io_err)?;
            }
            if let Some(dir) = out {
                log::info!("traces written to {}", dir.display());
            }
            Ok(())
        }
        Command::Ecdf { input, mut targets, out } => {
            targets.sort_by(|a, b| b.total_cmp(a));
            let (summary, traces) = read_experiment(&input)?;
            let thresholds = absolute_targets(summary.f_reference, &targets);
            let hits: Vec<_> = traces.iter().map(|rows| evals_to_targets(rows, &thresholds)).collect();
            let curve = compute_ecdf(&hits, &budget_grid(summary.config.budget))?;
            write_columns(&out, ["budget", "fraction"], curve.budgets.into_iter().zip(curve.fractions))
        }
        Command::Median { input, field, out } => {
            let field: TraceField = field.parse()?;
            let (_, traces) = read_experiment(&input)?;
            let medians = median_trajectory(&traces, field)?;
            write_columns(
                &out,
                ["t", field.as_str()],
                medians.into_iter().enumerate().map(|(i, m)| (i + 1, m)),
            )
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
