//! Cumulative step-size adaptation for mirrored, orthogonal offspring.
//!
//! With mirrored pairs the selected step is `Σ (w⁺ - w⁻) b`, whose squared
//! length under random selection is `d / μ_eff^mirrored` rather than
//! `d / μ_eff`. Normalizing the evolution path with the mirrored selection
//! mass removes the resulting shrinking bias of the step size.

use nalgebra::DVector;

use crate::error::{HeesError, Result};

/// Largest allowed `|log(σ'/σ)|` per generation.
const MAX_LOG_STEP: f64 = 1.0;

/// Variance-effective selection mass `1 / Σ wᵢ²`.
pub fn mu_eff(weights: &[f64]) -> f64 {
    1.0 / weights.iter().map(|w| w * w).sum::<f64>()
}

/// `μ_eff / (1 - (μ_eff - 1) / (2λ̃ - 1))`.
///
/// Fails when `μ_eff` reaches `2λ̃` (all weights equal), where the expression
/// has a pole.
pub fn mu_eff_mirrored(mu_eff: f64, pair_count: usize) -> Result<f64> {
    if pair_count == 0 {
        return Err(HeesError::InvalidConfig("pair count must be positive".into()));
    }
    let lambda = 2.0 * pair_count as f64;
    let denom = 1.0 - (mu_eff - 1.0) / (lambda - 1.0);
    if !(mu_eff >= 1.0 - 1e-12) || denom <= 1e-12 {
        return Err(HeesError::InvalidConfig(format!(
            "selection mass {mu_eff} is outside [1, {lambda}) for {pair_count} mirrored pairs"
        )));
    }
    Ok(mu_eff / denom)
}

/// `E‖N(0, I_d)‖ ≈ √d (1 - 1/(4d) + 1/(21d²))`.
pub fn chi_d(d: usize) -> f64 {
    let d = d as f64;
    d.sqrt() * (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d))
}

/// Rank-based recombination weights for `2λ̃` offspring.
#[derive(Debug, Clone, PartialEq)]
pub struct RecombinationWeights {
    weights: Vec<f64>,
    pair_count: usize,
    mu_eff: f64,
    mu_eff_mirrored: f64,
}

impl RecombinationWeights {
    /// The usual CMA-ES weights for `λ = 2λ̃`: `wᵢ ∝ ln(μ + ½) - ln i` for the
    /// best `μ = λ/2` offspring and zero for the rest.
    pub fn cma_default(pair_count: usize) -> Result<Self> {
        if pair_count == 0 {
            return Err(HeesError::InvalidConfig("pair count must be positive".into()));
        }
        let lambda = 2 * pair_count;
        let mu = lambda / 2;
        let mut w: Vec<f64> = (1..=lambda)
            .map(|i| if i <= mu { (mu as f64 + 0.5).ln() - (i as f64).ln() } else { 0.0 })
            .collect();
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= total);
        Self::new(w, pair_count)
    }

    /// Validates user supplied weights: `2λ̃` nonnegative entries, sorted
    /// descending, summing to one, and not all equal.
    pub fn new(weights: Vec<f64>, pair_count: usize) -> Result<Self> {
        if weights.len() != 2 * pair_count || pair_count == 0 {
            return Err(HeesError::InvalidConfig(format!(
                "expected {} weights for {pair_count} pairs, got {}",
                2 * pair_count,
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(HeesError::InvalidConfig("weights must be finite and nonnegative".into()));
        }
        if weights.windows(2).any(|p| p[0] < p[1]) {
            return Err(HeesError::InvalidConfig("weights must be sorted in descending order".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(HeesError::InvalidConfig(format!("weights sum to {total}, not 1")));
        }
        let mu_eff = mu_eff(&weights);
        let mu_eff_mirrored = mu_eff_mirrored(mu_eff, pair_count)?;
        Ok(Self { weights, pair_count, mu_eff, mu_eff_mirrored })
    }

    /// Weight of rank `r` is `weights()[r]` (0-based, best first).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn pair_count(&self) -> usize {
        self.pair_count
    }

    pub fn mu_eff(&self) -> f64 {
        self.mu_eff
    }

    pub fn mu_eff_mirrored(&self) -> f64 {
        self.mu_eff_mirrored
    }
}

/// Learning rate `c_s`, damping `d_s` and reference length `χ_d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsaParams {
    pub c_s: f64,
    pub d_s: f64,
    pub chi_d: f64,
}

impl CsaParams {
    /// CMA-ES defaults computed from the plain `μ_eff` of `2λ̃` offspring.
    pub fn cma_default(dim: usize, mu_eff: f64) -> Self {
        let n = dim as f64;
        let c_s = (mu_eff + 2.0) / (n + mu_eff + 5.0);
        let d_s = 1.0 + 2.0 * (((mu_eff - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0) + c_s;
        Self { c_s, d_s, chi_d: chi_d(dim) }
    }
}

/// `(1 - c_s) p + √(c_s (2 - c_s) μ_eff^mirrored) · Σ (w⁺ - w⁻) b`.
pub fn update_path(
    p_s: &DVector<f64>,
    c_s: f64,
    mu_eff_mirrored: f64,
    direction_sum: &DVector<f64>,
) -> DVector<f64> {
    let gain = (c_s * (2.0 - c_s) * mu_eff_mirrored).sqrt();
    p_s * (1.0 - c_s) + direction_sum * gain
}

/// `(1 - c_s)² g + c_s (2 - c_s)`; starting from 0 this is `1 - (1 - c_s)^(2t)`.
pub fn update_gs(g_s: f64, c_s: f64) -> f64 {
    (1.0 - c_s) * (1.0 - c_s) * g_s + c_s * (2.0 - c_s)
}

/// `σ · exp((c_s/d_s) (‖p‖/χ_d - √g))`, with the exponent capped at ±1.
pub fn update_sigma(sigma: f64, p_s_new: &DVector<f64>, g_s_new: f64, c_s: f64, d_s: f64, chi_d: f64) -> f64 {
    let exponent = (c_s / d_s) * (p_s_new.norm() / chi_d - g_s_new.sqrt());
    let capped = exponent.clamp(-MAX_LOG_STEP, MAX_LOG_STEP);
    if capped != exponent {
        log::warn!("step-size change {exponent:.3} capped to {capped}");
    }
    sigma * capped.exp()
}

/// Evolution path, its normalizer and the global step size.
#[derive(Debug, Clone, PartialEq)]
pub struct CsaState {
    pub p_s: DVector<f64>,
    pub g_s: f64,
    pub sigma: f64,
}

impl CsaState {
    pub fn new(dim: usize, sigma: f64) -> Self {
        Self { p_s: DVector::zeros(dim), g_s: 0.0, sigma }
    }

    /// One CSA step given the selected direction sum `Σ (w⁺ - w⁻) b`.
    pub fn update(&mut self, params: &CsaParams, mu_eff_mirrored: f64, direction_sum: &DVector<f64>) {
        self.g_s = update_gs(self.g_s, params.c_s);
        self.p_s = update_path(&self.p_s, params.c_s, mu_eff_mirrored, direction_sum);
        self.sigma = update_sigma(self.sigma, &self.p_s, self.g_s, params.c_s, params.d_s, params.chi_d);
    }
}
