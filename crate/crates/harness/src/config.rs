use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// One benchmark experiment: `runs` independent optimizations of one
/// function, run `k` seeded with `base_seed + k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub function: String,
    pub dim: usize,
    /// Evaluation budget per run (shared by all restarts of a run).
    pub budget: u64,
    /// Target precisions `f - f*`, sorted descending. A run stops once the
    /// last (smallest) one is reached. Problems without a known optimal value
    /// use the precisions as absolute targets.
    pub targets: Vec<f64>,
    pub runs: usize,
    pub base_seed: u64,
    pub sigma0: f64,
    /// Fixed initial mean; otherwise drawn uniformly from the restart box.
    pub m0: Option<Vec<f64>>,
    pub pair_count: Option<usize>,
    pub kappa: f64,
    pub eta_a: f64,
    pub ipop: bool,
    pub restart_box: (f64, f64),
    /// Random rotation of the search space, one instance per run seed.
    pub rotate: bool,
    /// Offspring spread that ends a run (0 disables). Defaults to the
    /// restart threshold with IPOP and to 0 without.
    pub stop_fitness_std: Option<f64>,
    pub max_generations: Option<u64>,
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(function: &str, dim: usize) -> Self {
        Self {
            function: function.to_owned(),
            dim,
            budget: 10_000 * dim as u64,
            targets: vec![1e-8],
            runs: 1,
            base_seed: 0,
            sigma0: 2.0,
            m0: None,
            pair_count: None,
            kappa: hees::curvature::DEFAULT_KAPPA,
            eta_a: hees::curvature::DEFAULT_ETA_A,
            ipop: false,
            restart_box: (-4.0, 4.0),
            rotate: false,
            stop_fitness_std: None,
            max_generations: None,
            out_dir: None,
        }
    }

    /// Per-generation cost with the configured or default pair count.
    pub fn evals_per_generation(&self) -> u64 {
        2 * self.pair_count.unwrap_or_else(|| hees::default_pair_count(self.dim)) as u64 + 1
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(HarnessError::Config(msg));
        if self.dim == 0 {
            return fail("dimension must be positive".into());
        }
        if self.runs == 0 {
            return fail("at least one run is required".into());
        }
        if self.targets.is_empty() || self.targets.iter().any(|t| !t.is_finite()) {
            return fail("targets must be finite and non-empty".into());
        }
        if self.targets.windows(2).any(|w| w[0] < w[1]) {
            return fail("targets must be sorted in descending order".into());
        }
        if self.budget < self.evals_per_generation() {
            return fail(format!(
                "budget {} is smaller than one generation ({} evaluations)",
                self.budget,
                self.evals_per_generation()
            ));
        }
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) {
            return fail(format!("sigma0 must be positive, got {}", self.sigma0));
        }
        if let Some(m0) = &self.m0 {
            if m0.len() != self.dim {
                return fail(format!("m0 has {} entries, expected {}", m0.len(), self.dim));
            }
        }
        if !(self.restart_box.0 < self.restart_box.1) {
            return fail(format!("empty restart box {:?}", self.restart_box));
        }
        Ok(())
    }

    pub fn effective_stop_fitness_std(&self) -> f64 {
        match self.stop_fitness_std {
            Some(v) => v,
            None if self.ipop => hees::optimizer::DEFAULT_STOP_FITNESS_STD,
            None => 0.0,
        }
    }

    /// Sets targets, sorting them descending.
    pub fn with_targets(mut self, mut targets: Vec<f64>) -> Self {
        targets.sort_by(|a, b| b.total_cmp(a));
        self.targets = targets;
        self
    }
}
