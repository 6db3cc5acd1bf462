//! Empirical runtime distributions over (run, target) pairs.

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const POINTS_PER_DECADE: u32 = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcdfCurve {
    pub budgets: Vec<f64>,
    /// Fraction of (run, target) pairs solved within each budget.
    pub fractions: Vec<f64>,
}

/// `10^(k/20)` for `k = 0, 1, …` up to `budget`, with `budget` itself as
/// the final point.
pub fn budget_grid(budget: u64) -> Vec<f64> {
    let top = (budget.max(1)) as f64;
    let steps = (top.log10() * POINTS_PER_DECADE as f64 + 1e-9).floor() as u32;
    let mut grid: Vec<f64> = (0..=steps).map(|k| 10f64.powf(k as f64 / POINTS_PER_DECADE as f64)).collect();
    if grid.last().is_some_and(|&b| b < top * (1.0 - 1e-12)) {
        grid.push(top);
    } else if let Some(last) = grid.last_mut() {
        *last = top;
    }
    grid
}

/// `evals_to_target[run][target]` holds the evaluations a run needed for a
/// target, `None` when it never got there.
pub fn compute_ecdf(evals_to_target: &[Vec<Option<u64>>], budget_grid: &[f64]) -> Result<EcdfCurve> {
    let pairs: usize = evals_to_target.iter().map(Vec::len).sum();
    if pairs == 0 {
        return Err(HarnessError::Empty("no (run, target) pairs".into()));
    }
    let mut solved: Vec<f64> = evals_to_target.iter().flatten().filter_map(|e| e.map(|v| v as f64)).collect();
    solved.sort_by(f64::total_cmp);
    let fractions = budget_grid
        .iter()
        .map(|&b| solved.partition_point(|&e| e <= b) as f64 / pairs as f64)
        .collect();
    Ok(EcdfCurve { budgets: budget_grid.to_vec(), fractions })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spacing() {
        let g = budget_grid(1000);
        assert_eq!(g.len(), 61);
        assert_eq!(g[0], 1.0);
        assert!((g[20] - 10.0).abs() < 1e-9);
        assert_eq!(*g.last().unwrap(), 1000.0);
        let g = budget_grid(1500);
        assert_eq!(*g.last().unwrap(), 1500.0);
        assert!(g[g.len() - 2] < 1500.0);
        assert_eq!(budget_grid(1), vec![1.0]);
    }

    #[test]
    fn step_at_the_solving_budget() {
        let c = compute_ecdf(&[vec![Some(500)]], &[1.0, 499.0, 500.0, 1e4]).unwrap();
        assert_eq!(c.fractions, vec![0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn unsolved_runs_cap_the_curve() {
        let c = compute_ecdf(&[vec![Some(100)], vec![None]], &budget_grid(10_000)).unwrap();
        assert_eq!(*c.fractions.last().unwrap(), 0.5);
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(compute_ecdf(&[], &[1.0]).is_err());
        assert!(compute_ecdf(&[vec![]], &[1.0]).is_err());
    }
}
