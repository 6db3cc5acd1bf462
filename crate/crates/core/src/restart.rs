//! IPOP restarts: whenever a run converges without reaching the target, start
//! over from a fresh mean with twice as many mirrored pairs.

use nalgebra::DVector;
use rand::Rng;

use crate::error::{HeesError, Result};
use crate::objectives::Objective;
use crate::optimizer::{Hees, HeesOptions, RunResult, StopCriteria, TerminationReason};

/// Where restarted runs place their initial mean.
#[derive(Debug, Clone, PartialEq)]
pub enum MeanSampler {
    Fixed(Vec<f64>),
    /// Uniform in the box `[lower, upper]^d`.
    UniformBox { lower: f64, upper: f64 },
}

impl Default for MeanSampler {
    fn default() -> Self {
        Self::UniformBox { lower: -4.0, upper: 4.0 }
    }
}

impl MeanSampler {
    pub fn sample<R: Rng + ?Sized>(&self, dim: usize, rng: &mut R) -> Result<DVector<f64>> {
        match self {
            Self::Fixed(m) if m.len() == dim => Ok(DVector::from_column_slice(m)),
            Self::Fixed(m) => Err(HeesError::DimensionMismatch { expected: dim, actual: m.len() }),
            Self::UniformBox { lower, upper } if lower < upper => {
                Ok(DVector::from_fn(dim, |_, _| rng.random_range(*lower..*upper)))
            }
            Self::UniformBox { lower, upper } => {
                Err(HeesError::InvalidConfig(format!("empty restart box [{lower}, {upper}]")))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IpopOptions {
    pub sampler: MeanSampler,
    /// Factor applied to the pair count at every restart.
    pub increase_factor: usize,
}

impl Default for IpopOptions {
    fn default() -> Self {
        Self { sampler: MeanSampler::default(), increase_factor: 2 }
    }
}

/// Runs HE-ES with IPOP restarts under a shared evaluation budget.
///
/// The first run starts from `options.m0`. Records carry cumulative
/// evaluation counts and a global best-so-far, with `restart_index`
/// numbering the runs.
pub fn ipop_run(
    objective: &dyn Objective,
    options: HeesOptions,
    criteria: &StopCriteria,
    ipop: &IpopOptions,
    seed: u64,
) -> Result<RunResult> {
    if ipop.increase_factor < 1 {
        return Err(HeesError::InvalidConfig("increase factor must be at least 1".into()));
    }
    let mut hees = Hees::new(options, seed)?;
    let dim = hees.state().dim();
    let mut records = Vec::new();
    let mut evals_used = 0u64;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut failure = None;

    let termination = loop {
        let remaining = criteria.budget - evals_used;
        let inner = hees.run(objective, &StopCriteria { budget: remaining, ..*criteria })?;

        for mut rec in inner.records {
            rec.evals += evals_used;
            if let Some((b, _)) = &best {
                rec.best_f_so_far = rec.best_f_so_far.min(*b);
            }
            records.push(rec);
        }
        evals_used += inner.evals_used;
        if best.as_ref().is_none_or(|(b, _)| inner.best_f < *b) {
            best = Some((inner.best_f, inner.best_x));
        }

        if inner.termination != TerminationReason::Stagnation {
            failure = inner.failure;
            break inner.termination;
        }
        let pairs = hees.state().pair_count * ipop.increase_factor;
        if criteria.budget - evals_used < 2 * pairs as u64 + 1 {
            break TerminationReason::BudgetExhausted;
        }
        let m0 = ipop.sampler.sample(dim, hees.rng_mut())?;
        log::debug!("restart {} with {pairs} pairs after {evals_used} evaluations", hees.restart_index() + 1);
        hees.restart(m0, pairs)?;
    };

    let (best_f, best_x) = best.unwrap_or((f64::INFINITY, hees.state().m.as_slice().to_vec()));
    Ok(RunResult {
        best_x,
        best_f,
        evals_used,
        termination,
        records,
        restart_count: hees.restart_index(),
        failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{from_fn, sphere};
    use crate::HeesRng;
    use rand::SeedableRng;

    #[test]
    fn sampler_box() {
        let mut rng = HeesRng::seed_from_u64(0);
        let m = MeanSampler::default().sample(50, &mut rng).unwrap();
        assert!(m.iter().all(|v| (-4.0..4.0).contains(v)));
        assert!(MeanSampler::UniformBox { lower: 1.0, upper: 1.0 }.sample(2, &mut rng).is_err());
        assert!(MeanSampler::Fixed(vec![1.0]).sample(2, &mut rng).is_err());
        assert_eq!(MeanSampler::Fixed(vec![1.0, 2.0]).sample(2, &mut rng).unwrap().as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn unimodal_target_needs_no_restart() {
        let f = sphere(4);
        let res = ipop_run(
            &f,
            HeesOptions::new(vec![1.0; 4], 0.5),
            &StopCriteria::new(50_000, 1e-10),
            &IpopOptions::default(),
            1,
        )
        .unwrap();
        assert_eq!(res.termination, TerminationReason::TargetHit);
        assert_eq!(res.restart_count, 0);
    }

    #[test]
    fn constant_objective_doubles_until_budget() {
        let f = from_fn(3, |_| 0.0);
        let budget = 200;
        let res = ipop_run(
            &f,
            HeesOptions::new(vec![0.0; 3], 1.0),
            &StopCriteria::new(budget, f64::NEG_INFINITY),
            &IpopOptions::default(),
            2,
        )
        .unwrap();
        assert_eq!(res.termination, TerminationReason::BudgetExhausted);
        // each run stagnates after one generation: 2*3+1, 2*6+1, 2*12+1, 2*24+1, 2*48+1 = 7+13+25+49+97 = 191
        let pairs: Vec<usize> = res.records.iter().map(|r| r.pair_count).collect();
        assert_eq!(pairs, vec![3, 6, 12, 24, 48]);
        assert_eq!(res.evals_used, 191);
        assert_eq!(res.restart_count, 4);
        assert!(res.evals_used <= budget);
        let idx: Vec<usize> = res.records.iter().map(|r| r.restart_index).collect();
        assert_eq!(idx, vec![0, 1, 2, 3, 4]);
        let evals: Vec<u64> = res.records.iter().map(|r| r.evals).collect();
        assert_eq!(evals, vec![7, 20, 45, 94, 191]);
    }
}
