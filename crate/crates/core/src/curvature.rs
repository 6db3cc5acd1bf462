//! Curvature estimation along sampled directions and the multiplicative
//! covariance update derived from it.
//!
//! With mirrored offspring `x± = m ± σ·A·b` the central difference
//! `(f(x+) + f(x-) - 2 f(m)) / (σ² ‖b‖²)` equals `bᵀ(AᵀHA)b / ‖b‖²` exactly on
//! a quadratic with Hessian `H`. The update factor `G` rescales every sampled
//! direction by `h^(-η/4)` relative to the geometric mean of the curvatures,
//! so that after `A ← A·G` the curvatures along the sampled directions move
//! toward each other while `det(G)` stays one.

use nalgebra::DMatrix;

use crate::error::{HeesError, Result};
use crate::orthogonal::DirectionSet;

/// Default trust-region constant `κ`.
pub const DEFAULT_KAPPA: f64 = 3.0;
/// Default learning rate `η_A` of the matrix update.
pub const DEFAULT_ETA_A: f64 = 0.5;

/// Clipped curvatures and the exponents fed into the update factor.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureEstimates {
    /// Curvature per used direction after clipping to the trust region.
    pub h: Vec<f64>,
    /// Centered, learning-rate scaled log curvature for all `B * d` slots.
    /// Unused slots of the final block hold 0.
    pub q: Vec<f64>,
    /// Lower clipping bound `max(h) / κ`.
    pub trust_floor: f64,
}

/// Symmetric positive definite factor `G` of the update `A ← A·G`.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateFactor {
    matrix: DMatrix<f64>,
}

impl UpdateFactor {
    pub fn identity(dim: usize) -> Self {
        Self { matrix: DMatrix::identity(dim, dim) }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }
}

fn check_inputs(directions: &DirectionSet, f_m: f64, f_plus: &[f64], f_minus: &[f64], sigma: f64) -> Result<()> {
    let n = directions.pair_count();
    for len in [f_plus.len(), f_minus.len()] {
        if len != n {
            return Err(HeesError::DimensionMismatch { expected: n, actual: len });
        }
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(HeesError::Domain(format!("step size must be positive and finite, got {sigma}")));
    }
    if let Some(&value) = std::iter::once(&f_m)
        .chain(f_plus)
        .chain(f_minus)
        .find(|v| !v.is_finite())
    {
        return Err(HeesError::EvaluationFailure { value });
    }
    Ok(())
}

/// Second directional derivatives along the used directions,
/// `(f+ + f- - 2 f(m)) / (σ² ‖b‖²)`. Values are not clipped and may be
/// zero or negative.
pub fn estimate_curvatures(
    directions: &DirectionSet,
    f_m: f64,
    f_plus: &[f64],
    f_minus: &[f64],
    sigma: f64,
) -> Result<Vec<f64>> {
    check_inputs(directions, f_m, f_plus, f_minus, sigma)?;
    let sigma2 = sigma * sigma;
    Ok(directions
        .used()
        .iter()
        .zip(f_plus.iter().zip(f_minus))
        .map(|(b, (&fp, &fm))| (fp + fm - 2.0 * f_m) / (sigma2 * b.norm_squared()))
        .collect())
}

/// Turns raw curvatures into update exponents: clip to `[max(h)/κ, ∞)`, take
/// logs, center over the used slots and scale by `-η_A/2`. `slot_count` is
/// the total number of slots `B * d`; slots past `h.len()` get exponent 0.
///
/// Returns `None` when no curvature is positive, in which case the update
/// is the identity.
pub fn curvature_exponents(h: &[f64], slot_count: usize, kappa: f64, eta_a: f64) -> Option<CurvatureEstimates> {
    let max_h = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if h.is_empty() || max_h <= 0.0 {
        return None;
    }
    let trust_floor = max_h / kappa;
    let clipped: Vec<f64> = h.iter().map(|&v| v.max(trust_floor)).collect();
    let logs: Vec<f64> = clipped.iter().map(|v| v.ln()).collect();
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    let scale = -eta_a / 2.0;
    let mut q: Vec<f64> = logs.iter().map(|l| (l - mean) * scale).collect();
    q.resize(slot_count.max(h.len()), 0.0);
    Some(CurvatureEstimates { h: clipped, q, trust_floor })
}

fn check_params(kappa: f64, eta_a: f64) -> Result<()> {
    if !(kappa > 1.0) {
        return Err(HeesError::InvalidConfig(format!("kappa must exceed 1, got {kappa}")));
    }
    if !(eta_a > 0.0 && eta_a <= 1.0) {
        return Err(HeesError::InvalidConfig(format!("eta_A must lie in (0, 1], got {eta_a}")));
    }
    Ok(())
}

/// Builds the update factor `G = (1/B) Σ exp(q) b bᵀ / ‖b‖²` over all slots.
pub fn compute_g(
    directions: &DirectionSet,
    f_m: f64,
    f_plus: &[f64],
    f_minus: &[f64],
    sigma: f64,
    kappa: f64,
    eta_a: f64,
) -> Result<UpdateFactor> {
    check_params(kappa, eta_a)?;
    let h = estimate_curvatures(directions, f_m, f_plus, f_minus, sigma)?;
    let dim = directions.dim();
    let Some(est) = curvature_exponents(&h, directions.all().len(), kappa, eta_a) else {
        return Ok(UpdateFactor::identity(dim));
    };
    Ok(factor_from_exponents(directions, &est.q))
}

/// Assembles `G` from per-slot exponents.
pub fn factor_from_exponents(directions: &DirectionSet, q: &[f64]) -> UpdateFactor {
    let dim = directions.dim();
    let mut g = DMatrix::<f64>::zeros(dim, dim);
    for (b, &qk) in directions.all().iter().zip(q) {
        let coef = qk.exp() / b.norm_squared();
        g.ger(coef, b, b, 1.0);
    }
    let blocks = directions.block_count();
    g /= blocks as f64;
    let g = (&g + g.transpose()) * 0.5;
    // det(G) is only exactly one for a single block
    if blocks > 1 && log::log_enabled!(log::Level::Debug) {
        log::debug!("multi-block update factor: |log det G| = {:.3e}", g.determinant().ln().abs());
    }
    UpdateFactor { matrix: g }
}

/// `A·G`. The implied covariance changes from `AᵀA` to `G·AᵀA·G`.
pub fn apply_update(a: &DMatrix<f64>, g: &UpdateFactor) -> DMatrix<f64> {
    a * &g.matrix
}
