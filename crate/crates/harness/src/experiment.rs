use std::path::Path;

use hees::objectives::by_name;
use hees::{ipop_run, Hees, HeesOptions, IpopOptions, MeanSampler, ObjectiveProblem, RunResult, StopCriteria};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::trace::{
    absolute_targets, ensure_dir, evals_to_targets, trace_file_name, write_summary, write_trace_file,
    ExperimentSummary, RunSummary, TraceRow,
};

/// Everything one experiment produced, also written to disk when the
/// configuration names an output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub summary: ExperimentSummary,
    pub traces: Vec<Vec<TraceRow>>,
}

/// Builds the problem instance of run seed `seed`.
///
/// The instance stream (rotation seed, then the initial mean) is a separate
/// ChaCha stream, so it never overlaps with the optimizer's directions.
pub fn prepare_run(config: &ExperimentConfig, seed: u64) -> Result<(ObjectiveProblem, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut problem = by_name(&config.function, config.dim)?;
    let rotation_seed = rng.next_u64();
    if config.rotate {
        problem = problem.with_random_rotation(rotation_seed);
    }
    let m0 = match &config.m0 {
        Some(m0) => m0.clone(),
        None => {
            let (lower, upper) = config.restart_box;
            MeanSampler::UniformBox { lower, upper }.sample(config.dim, &mut rng)?.as_slice().to_vec()
        }
    };
    Ok((problem, m0))
}

fn optimize(config: &ExperimentConfig, problem: &ObjectiveProblem, m0: Vec<f64>, seed: u64) -> Result<RunResult> {
    let mut options = HeesOptions::new(m0, config.sigma0).with_kappa(config.kappa).with_eta_a(config.eta_a);
    if let Some(p) = config.pair_count {
        options = options.with_pair_count(p);
    }
    let final_target = *config.targets.last().expect("validated targets");
    let criteria = StopCriteria {
        budget: config.budget,
        target_f: problem.f_star().unwrap_or(0.0) + final_target,
        stop_fitness_std: config.effective_stop_fitness_std(),
        max_generations: config.max_generations,
    };
    let result = if config.ipop {
        let (lower, upper) = config.restart_box;
        let ipop = IpopOptions { sampler: MeanSampler::UniformBox { lower, upper }, ..IpopOptions::default() };
        ipop_run(problem, options, &criteria, &ipop, seed)?
    } else {
        Hees::new(options, seed)?.run(problem, &criteria)?
    };
    Ok(result)
}

/// Runs `config.runs` seeded optimizations in parallel. Run `k` uses seed
/// `base_seed + k`; results are identical regardless of thread count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let f_reference = by_name(&config.function, config.dim)?.f_star().unwrap_or(0.0);
    let thresholds = absolute_targets(f_reference, &config.targets);
    let out_dir = config.out_dir.as_deref().map(ensure_dir).transpose()?;

    let runs: Vec<(RunSummary, Vec<TraceRow>)> = (0..config.runs)
        .into_par_iter()
        .map(|k| {
            let seed = config.base_seed.wrapping_add(k as u64);
            let (problem, m0) = prepare_run(config, seed)?;
            let result = optimize(config, &problem, m0, seed)?;
            let rows: Vec<TraceRow> = result.records.iter().map(TraceRow::from).collect();
            let summary = RunSummary {
                run: k,
                seed,
                trace_file: trace_file_name(k),
                termination: result.termination.to_string(),
                failure: result.failure.as_ref().map(|e| e.to_string()),
                evals_used: result.evals_used,
                generations: rows.len(),
                restarts: result.restart_count,
                best_f: result.best_f,
                evals_to_target: evals_to_targets(&rows, &thresholds),
            };
            if let Some(dir) = &out_dir {
                write_trace_file(&dir.join(&summary.trace_file), &rows)?;
            }
            log::info!("run {k} (seed {seed}): {} after {} evaluations", summary.termination, summary.evals_used);
            Ok((summary, rows))
        })
        .collect::<Result<_>>()?;

    let (summaries, traces): (Vec<_>, Vec<_>) = runs.into_iter().unzip();
    let summary = ExperimentSummary { config: config.clone(), f_reference, runs: summaries };
    if let Some(dir) = &out_dir {
        write_summary(dir, &summary)?;
    }
    Ok(ExperimentOutput { summary, traces })
}

/// Runs the experiment and writes it into `dir`, overriding `config.out_dir`.
pub fn run_experiment_to(config: &ExperimentConfig, dir: &Path) -> Result<ExperimentOutput> {
    let mut config = config.clone();
    config.out_dir = Some(dir.to_owned());
    run_experiment(&config)
}
