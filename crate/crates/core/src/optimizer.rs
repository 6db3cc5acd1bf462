//! The HE-ES generation loop.
//!
//! One generation samples `λ̃` orthogonal directions `b`, evaluates `f(m)`
//! and the mirrored offspring `m ± σ·A·b`, multiplies `A` by the curvature
//! update factor, recombines the offspring with rank-based weights and
//! finally adapts `σ` with cumulative step-size adaptation.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;

use crate::curvature::{apply_update, compute_g, DEFAULT_ETA_A, DEFAULT_KAPPA};
use crate::error::{HeesError, Result};
use crate::linalg::condition_number;
use crate::objectives::Objective;
use crate::orthogonal::sample_direction_blocks;
use crate::step_size::{CsaParams, CsaState, RecombinationWeights};
use crate::HeesRng;

/// Largest tolerated condition number of `A` before a run is abandoned.
pub const MAX_FACTOR_CONDITION: f64 = 1e14;

/// Default fitness spread below which a run counts as converged.
pub const DEFAULT_STOP_FITNESS_STD: f64 = 1e-9;

/// `2 + ⌊1.5 ln d⌋` mirrored pairs.
pub fn default_pair_count(dim: usize) -> usize {
    2 + (1.5 * (dim.max(1) as f64).ln()).floor() as usize
}

/// Optimizer settings. Everything except the start point has a default.
#[derive(Debug, Clone, PartialEq)]
pub struct HeesOptions {
    pub m0: Vec<f64>,
    pub sigma0: f64,
    /// Initial covariance factor; identity when `None`.
    pub a0: Option<DMatrix<f64>>,
    /// Number of mirrored pairs `λ̃`; [`default_pair_count`] when `None`.
    pub pair_count: Option<usize>,
    pub kappa: f64,
    pub eta_a: f64,
    /// Custom recombination weights for `2λ̃` offspring.
    pub weights: Option<Vec<f64>>,
}

impl HeesOptions {
    pub fn new(m0: Vec<f64>, sigma0: f64) -> Self {
        Self {
            m0,
            sigma0,
            a0: None,
            pair_count: None,
            kappa: DEFAULT_KAPPA,
            eta_a: DEFAULT_ETA_A,
            weights: None,
        }
    }

    pub fn with_pair_count(mut self, pair_count: usize) -> Self {
        self.pair_count = Some(pair_count);
        self
    }

    pub fn with_factor(mut self, a0: DMatrix<f64>) -> Self {
        self.a0 = Some(a0);
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_eta_a(mut self, eta_a: f64) -> Self {
        self.eta_a = eta_a;
        self
    }

    pub fn dim(&self) -> usize {
        self.m0.len()
    }
}

/// Mean, step size, covariance factor and CSA bookkeeping of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub m: DVector<f64>,
    pub a: DMatrix<f64>,
    pub csa: CsaState,
    /// Completed generations.
    pub t: u64,
    /// Evaluations spent in this run.
    pub evals: u64,
    pub pair_count: usize,
}

impl OptimizerState {
    pub fn sigma(&self) -> f64 {
        self.csa.sigma
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    /// Evaluations charged per generation: `f(m)` plus `2λ̃` offspring.
    pub fn evals_per_generation(&self) -> u64 {
        2 * self.pair_count as u64 + 1
    }
}

/// One row of the optimization trace, describing the state after a generation.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord {
    pub t: u64,
    pub evals: u64,
    pub f_m: f64,
    /// Best offspring value of this generation.
    pub best_f: f64,
    pub best_f_so_far: f64,
    pub sigma: f64,
    /// Condition number of `AᵀA`.
    pub cond_c: f64,
    /// Population standard deviation of the `2λ̃` offspring values.
    pub fitness_std: f64,
    pub restart_index: usize,
    pub pair_count: usize,
    /// `‖m - x*‖` for the updated mean, when the optimum is known.
    pub distance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TerminationReason {
    TargetHit,
    BudgetExhausted,
    NumericalFailure,
    /// Offspring values collapsed below the fitness-spread threshold.
    Stagnation,
    GenerationLimit,
}

impl TerminationReason {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::TargetHit => "target_hit",
            Self::BudgetExhausted => "budget_exhausted",
            Self::NumericalFailure => "numerical_failure",
            Self::Stagnation => "stagnation",
            Self::GenerationLimit => "generation_limit",
        }
    }
}

impl fmt::Display for TerminationReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// When to stop a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopCriteria {
    /// Maximum number of evaluations. A generation is only started when it
    /// fits entirely into the remaining budget.
    pub budget: u64,
    pub target_f: f64,
    /// Stop when the offspring spread falls below this; 0 disables.
    pub stop_fitness_std: f64,
    pub max_generations: Option<u64>,
}

impl StopCriteria {
    pub fn new(budget: u64, target_f: f64) -> Self {
        Self { budget, target_f, stop_fitness_std: DEFAULT_STOP_FITNESS_STD, max_generations: None }
    }

    pub fn with_fitness_std(mut self, threshold: f64) -> Self {
        self.stop_fitness_std = threshold;
        self
    }

    pub fn with_max_generations(mut self, generations: u64) -> Self {
        self.max_generations = Some(generations);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub best_x: Vec<f64>,
    pub best_f: f64,
    pub evals_used: u64,
    pub termination: TerminationReason,
    pub records: Vec<GenerationRecord>,
    pub restart_count: usize,
    /// Cause of a numerical failure.
    pub failure: Option<HeesError>,
}

/// Rank-based weight of every offspring. Offspring are sorted ascending by
/// value; ties keep index order. `weights[r]` goes to rank `r`.
pub fn rank_and_weight(f_values: &[f64], weights: &[f64]) -> Vec<f64> {
    debug_assert_eq!(f_values.len(), weights.len());
    let mut order: Vec<usize> = (0..f_values.len()).collect();
    order.sort_by(|&i, &j| f_values[i].total_cmp(&f_values[j]));
    let mut assigned = vec![0.0; f_values.len()];
    for (rank, idx) in order.into_iter().enumerate() {
        assigned[idx] = weights[rank];
    }
    assigned
}

fn population_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

/// A HE-ES instance: state, strategy parameters and its private generator.
#[derive(Debug, Clone)]
pub struct Hees {
    options: HeesOptions,
    state: OptimizerState,
    weights: RecombinationWeights,
    csa_params: CsaParams,
    rng: HeesRng,
    restart_index: usize,
    best: Option<(f64, DVector<f64>)>,
}

impl Hees {
    pub fn new(options: HeesOptions, seed: u64) -> Result<Self> {
        Self::with_rng(options, HeesRng::seed_from_u64(seed))
    }

    pub fn with_rng(options: HeesOptions, rng: HeesRng) -> Result<Self> {
        let dim = options.dim();
        if dim == 0 {
            return Err(HeesError::InvalidConfig("dimension must be positive".into()));
        }
        if options.m0.iter().any(|v| !v.is_finite()) {
            return Err(HeesError::InvalidConfig("initial mean must be finite".into()));
        }
        if !(options.sigma0 > 0.0 && options.sigma0.is_finite()) {
            return Err(HeesError::InvalidConfig(format!("sigma0 must be positive, got {}", options.sigma0)));
        }
        if !(options.kappa > 1.0) {
            return Err(HeesError::InvalidConfig(format!("kappa must exceed 1, got {}", options.kappa)));
        }
        if !(options.eta_a > 0.0 && options.eta_a <= 1.0) {
            return Err(HeesError::InvalidConfig(format!("eta_A must lie in (0, 1], got {}", options.eta_a)));
        }
        if let Some(a0) = &options.a0 {
            if a0.nrows() != dim || a0.ncols() != dim {
                return Err(HeesError::DimensionMismatch { expected: dim, actual: a0.nrows() });
            }
            if condition_number(a0).sqrt() > MAX_FACTOR_CONDITION {
                return Err(HeesError::InvalidConfig("initial factor A0 is singular".into()));
            }
        }
        let pair_count = options.pair_count.unwrap_or_else(|| default_pair_count(dim));
        if pair_count == 0 {
            return Err(HeesError::InvalidConfig("pair count must be positive".into()));
        }
        let m0 = DVector::from_column_slice(&options.m0);
        let (state, weights, csa_params) = Self::fresh(&options, m0, pair_count)?;
        Ok(Self { options, state, weights, csa_params, rng, restart_index: 0, best: None })
    }

    fn fresh(
        options: &HeesOptions,
        m0: DVector<f64>,
        pair_count: usize,
    ) -> Result<(OptimizerState, RecombinationWeights, CsaParams)> {
        let dim = m0.len();
        let weights = match &options.weights {
            Some(w) => RecombinationWeights::new(w.clone(), pair_count)?,
            None => RecombinationWeights::cma_default(pair_count)?,
        };
        let csa_params = CsaParams::cma_default(dim, weights.mu_eff());
        let state = OptimizerState {
            m: m0,
            a: options.a0.clone().unwrap_or_else(|| DMatrix::identity(dim, dim)),
            csa: CsaState::new(dim, options.sigma0),
            t: 0,
            evals: 0,
            pair_count,
        };
        Ok((state, weights, csa_params))
    }

    /// Starts a new run from `m0` with `pair_count` pairs. Step size and
    /// factor return to their initial values; the generator keeps its state.
    pub fn restart(&mut self, m0: DVector<f64>, pair_count: usize) -> Result<()> {
        if m0.len() != self.options.dim() {
            return Err(HeesError::DimensionMismatch { expected: self.options.dim(), actual: m0.len() });
        }
        if self.options.weights.is_some() && pair_count != self.state.pair_count {
            // custom weights are tied to one population size
            self.options.weights = None;
        }
        let (state, weights, csa_params) = Self::fresh(&self.options, m0, pair_count)?;
        self.state = state;
        self.weights = weights;
        self.csa_params = csa_params;
        self.restart_index += 1;
        self.best = None;
        Ok(())
    }

    pub fn state(&self) -> &OptimizerState {
        &self.state
    }

    pub fn options(&self) -> &HeesOptions {
        &self.options
    }

    pub fn weights(&self) -> &RecombinationWeights {
        &self.weights
    }

    pub fn csa_params(&self) -> &CsaParams {
        &self.csa_params
    }

    pub fn restart_index(&self) -> usize {
        self.restart_index
    }

    pub(crate) fn rng_mut(&mut self) -> &mut HeesRng {
        &mut self.rng
    }

    /// Best point evaluated in the current run.
    pub fn best(&self) -> Option<(f64, &DVector<f64>)> {
        self.best.as_ref().map(|(f, x)| (*f, x))
    }

    fn observe(&mut self, f: f64, x: &DVector<f64>) {
        if self.best.as_ref().is_none_or(|(b, _)| f < *b) {
            self.best = Some((f, x.clone()));
        }
    }

    /// Runs one generation.
    ///
    /// On a non-finite objective value the evaluations are charged but the
    /// state is left untouched. An `A` whose condition number exceeds
    /// [`MAX_FACTOR_CONDITION`] is reported after the update.
    pub fn step(&mut self, objective: &dyn Objective) -> Result<GenerationRecord> {
        let dim = self.state.dim();
        if objective.dim() != dim {
            return Err(HeesError::DimensionMismatch { expected: dim, actual: objective.dim() });
        }
        let pairs = self.state.pair_count;
        let sigma = self.state.sigma();
        let directions = sample_direction_blocks(dim, pairs, &mut self.rng)?;

        let m = &self.state.m;
        let a = &self.state.a;
        let offsets: Vec<DVector<f64>> = directions.used().iter().map(|b| (a * b) * sigma).collect();
        let plus: Vec<DVector<f64>> = offsets.iter().map(|o| m + o).collect();
        let minus: Vec<DVector<f64>> = offsets.iter().map(|o| m - o).collect();

        let f_m = objective.evaluate(m.as_slice());
        let mut f_plus = Vec::with_capacity(pairs);
        let mut f_minus = Vec::with_capacity(pairs);
        for (xp, xm) in plus.iter().zip(&minus) {
            f_plus.push(objective.evaluate(xp.as_slice()));
            f_minus.push(objective.evaluate(xm.as_slice()));
        }
        self.state.evals += self.state.evals_per_generation();
        if let Some(&value) = std::iter::once(&f_m).chain(&f_plus).chain(&f_minus).find(|v| !v.is_finite()) {
            return Err(HeesError::EvaluationFailure { value });
        }

        let m_old = self.state.m.clone();
        self.observe(f_m, &m_old);
        for (k, (xp, xm)) in plus.iter().zip(&minus).enumerate() {
            self.observe(f_plus[k], xp);
            self.observe(f_minus[k], xm);
        }

        // matrix adaptation uses the current m and σ
        let g = compute_g(&directions, f_m, &f_plus, &f_minus, sigma, self.options.kappa, self.options.eta_a)?;
        let a_new = apply_update(&self.state.a, &g);

        // offspring order: (+, -) for pair 0, then pair 1, ...
        let values: Vec<f64> = f_plus.iter().zip(&f_minus).flat_map(|(p, q)| [*p, *q]).collect();
        let w = rank_and_weight(&values, self.weights.weights());
        let mut direction_sum = DVector::zeros(dim);
        for (k, b) in directions.used().iter().enumerate() {
            direction_sum.axpy(w[2 * k] - w[2 * k + 1], b, 1.0);
        }

        // Σ w x = m + σ A Σ (w⁺ - w⁻) b, since the weights sum to one
        let shift = (&self.state.a * &direction_sum) * sigma;
        self.state.m += shift;
        self.state.csa.update(&self.csa_params, self.weights.mu_eff_mirrored(), &direction_sum);
        self.state.a = a_new;
        self.state.t += 1;

        let cond_c = condition_number(&self.state.a);
        let best_f = values.iter().copied().fold(f64::INFINITY, f64::min);
        let record = GenerationRecord {
            t: self.state.t,
            evals: self.state.evals,
            f_m,
            best_f,
            best_f_so_far: self.best.as_ref().map_or(best_f, |(b, _)| *b),
            sigma: self.state.sigma(),
            cond_c,
            fitness_std: population_std(&values),
            restart_index: self.restart_index,
            pair_count: pairs,
            distance: objective
                .optimum()
                .map(|x_star| (&self.state.m - DVector::from_column_slice(x_star)).norm()),
        };
        log::trace!("t={} f_m={:.3e} sigma={:.3e} cond={:.3e}", record.t, f_m, record.sigma, cond_c);
        if !(cond_c.sqrt() <= MAX_FACTOR_CONDITION) {
            return Err(HeesError::IllConditioned { condition: cond_c.sqrt() });
        }
        Ok(record)
    }

    /// Steps until the target is hit, the budget cannot fund another
    /// generation, the offspring spread collapses, the generation limit is
    /// reached or a numerical failure occurs.
    pub fn run(&mut self, objective: &dyn Objective, criteria: &StopCriteria) -> Result<RunResult> {
        let per_gen = self.state.evals_per_generation();
        if criteria.budget < self.state.evals + per_gen {
            return Err(HeesError::InvalidConfig(format!(
                "budget {} cannot fund one generation of {per_gen} evaluations",
                criteria.budget
            )));
        }
        let mut records = Vec::new();
        let mut failure = None;
        let termination = loop {
            if criteria.max_generations.is_some_and(|g| self.state.t >= g) {
                break TerminationReason::GenerationLimit;
            }
            if self.state.evals + per_gen > criteria.budget {
                break TerminationReason::BudgetExhausted;
            }
            match self.step(objective) {
                Ok(rec) => {
                    let hit = rec.best_f_so_far <= criteria.target_f;
                    let flat = rec.fitness_std < criteria.stop_fitness_std;
                    records.push(rec);
                    if hit {
                        break TerminationReason::TargetHit;
                    }
                    if flat {
                        break TerminationReason::Stagnation;
                    }
                }
                Err(e @ (HeesError::EvaluationFailure { .. } | HeesError::IllConditioned { .. })) => {
                    log::warn!("run aborted: {e}");
                    failure = Some(e);
                    break TerminationReason::NumericalFailure;
                }
                Err(e) => return Err(e),
            }
        };
        let (best_f, best_x) = match &self.best {
            Some((f, x)) => (*f, x.as_slice().to_vec()),
            None => (f64::INFINITY, self.state.m.as_slice().to_vec()),
        };
        Ok(RunResult {
            best_x,
            best_f,
            evals_used: self.state.evals,
            termination,
            records,
            restart_count: 0,
            failure,
        })
    }
}
