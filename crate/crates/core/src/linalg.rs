//! Small dense helpers shared by the optimizer and the benchmark tooling.

use nalgebra::DMatrix;

/// Condition number of `C = AᵀA`, i.e. `(σ_max(A) / σ_min(A))²`.
///
/// Returns `f64::INFINITY` for a rank-deficient or non-finite `A`.
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() || a.iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    let sv = a.singular_values();
    let (lo, hi) = (sv.min(), sv.max());
    if lo <= 0.0 || lo <= hi * f64::EPSILON {
        return f64::INFINITY;
    }
    let r = hi / lo;
    r * r
}

/// Condition number of the symmetric positive definite matrix `s`, the
/// ratio of its extreme eigenvalues. Infinite when `s` is not positive definite.
pub fn spd_condition_number(s: &DMatrix<f64>) -> f64 {
    let eig = s.clone().symmetric_eigenvalues();
    let (lo, hi) = (eig.min(), eig.max());
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}
