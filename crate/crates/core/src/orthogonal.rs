//! Blocks of mutually orthogonal Gaussian directions.
//!
//! Each block is produced by drawing `d` standard normal vectors, running
//! Gram-Schmidt over them and rescaling every orthonormal vector back to the
//! length of the raw draw it came from. The orthonormal frame is Haar
//! distributed and the lengths stay chi(d) distributed, so each output vector
//! still looks like a draw from `N(0, I)` on its own.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{HeesError, Result};

/// Residual below this fraction of the raw norm counts as a degenerate draw.
const DEGENERACY_TOL: f64 = 1e-12;

/// `B = ceil(pair_count / dim)` blocks of `dim` orthogonal directions each.
///
/// Directions are stored flat in block-major order: slot `j` of block `i`
/// lives at index `i * dim + j`. The first `pair_count` entries are the used
/// directions; the tail of the final block is kept for the neutral part of
/// the covariance update.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    dim: usize,
    pair_count: usize,
    directions: Vec<DVector<f64>>,
    raw_norms: Vec<f64>,
}

impl DirectionSet {
    /// Builds a set from explicit blocks. Every block must hold `dim`
    /// vectors of length `dim`, and there must be exactly
    /// `ceil(pair_count / dim)` blocks. Orthogonality is not checked.
    pub fn from_blocks(dim: usize, pair_count: usize, blocks: Vec<Vec<DVector<f64>>>) -> Result<Self> {
        if dim == 0 || pair_count == 0 {
            return Err(HeesError::InvalidConfig(
                "dimension and pair count must be positive".into(),
            ));
        }
        let expected_blocks = pair_count.div_ceil(dim);
        if blocks.len() != expected_blocks {
            return Err(HeesError::InvalidConfig(format!(
                "{pair_count} pairs in dimension {dim} need {expected_blocks} blocks, got {}",
                blocks.len()
            )));
        }
        let mut directions = Vec::with_capacity(expected_blocks * dim);
        for block in blocks {
            if block.len() != dim {
                return Err(HeesError::DimensionMismatch { expected: dim, actual: block.len() });
            }
            for v in block {
                if v.len() != dim {
                    return Err(HeesError::DimensionMismatch { expected: dim, actual: v.len() });
                }
                directions.push(v);
            }
        }
        let raw_norms = directions.iter().map(|v| v.norm()).collect();
        Ok(Self { dim, pair_count, directions, raw_norms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pair_count(&self) -> usize {
        self.pair_count
    }

    pub fn block_count(&self) -> usize {
        self.directions.len() / self.dim
    }

    /// All `B * d` slots, used or not.
    pub fn all(&self) -> &[DVector<f64>] {
        &self.directions
    }

    /// The `pair_count` directions that generate offspring.
    pub fn used(&self) -> &[DVector<f64>] {
        &self.directions[..self.pair_count]
    }

    pub fn block(&self, index: usize) -> &[DVector<f64>] {
        &self.directions[index * self.dim..(index + 1) * self.dim]
    }

    /// Number of used slots in block `index`.
    pub fn used_in_block(&self, index: usize) -> usize {
        let start = index * self.dim;
        self.pair_count.saturating_sub(start).min(self.dim)
    }

    /// Lengths of the Gaussian draws behind each slot, in slot order.
    pub fn raw_norms(&self) -> &[f64] {
        &self.raw_norms
    }
}

/// Orthogonalizes `raw` with modified Gram-Schmidt and rescales each result
/// to the norm of its raw input.
///
/// Every vector is projected against the already accepted ones twice, which
/// keeps the frame orthogonal to machine precision even for large `d`.
/// Returns `None` when a raw vector is zero or non-finite, or when a residual
/// collapses below `1e-12` of its raw norm.
pub fn orthogonalize(raw: &[DVector<f64>]) -> Option<Vec<DVector<f64>>> {
    let mut frame: Vec<DVector<f64>> = Vec::with_capacity(raw.len());
    let mut norms = Vec::with_capacity(raw.len());
    for z in raw {
        let n = z.norm();
        if !n.is_finite() || n == 0.0 {
            return None;
        }
        let mut v = z.clone();
        for _pass in 0..2 {
            for u in &frame {
                let coef = u.dot(&v);
                v.axpy(-coef, u, 1.0);
            }
        }
        let r = v.norm();
        if r < DEGENERACY_TOL * n {
            return None;
        }
        v /= r;
        frame.push(v);
        norms.push(n);
    }
    Some(frame.into_iter().zip(norms).map(|(u, n)| u * n).collect())
}

fn gaussian_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.sample(StandardNormal))
}

/// Draws `dim` pairwise orthogonal vectors whose lengths are those of `dim`
/// independent standard normal draws. A degenerate draw discards the whole
/// block and starts over.
pub fn sample_orthogonal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<DVector<f64>> {
    assert!(dim >= 1, "dimension must be positive");
    loop {
        let raw: Vec<_> = (0..dim).map(|_| gaussian_vector(dim, rng)).collect();
        if let Some(frame) = orthogonalize(&raw) {
            return frame;
        }
        log::debug!("degenerate Gram-Schmidt block in dimension {dim}; redrawing");
    }
}

/// Draws `ceil(pair_count / dim)` independent orthogonal blocks.
pub fn sample_direction_blocks<R: Rng + ?Sized>(
    dim: usize,
    pair_count: usize,
    rng: &mut R,
) -> Result<DirectionSet> {
    if dim == 0 || pair_count == 0 {
        return Err(HeesError::InvalidConfig(
            "dimension and pair count must be positive".into(),
        ));
    }
    let blocks = (0..pair_count.div_ceil(dim)).map(|_| sample_orthogonal(dim, rng)).collect();
    DirectionSet::from_blocks(dim, pair_count, blocks)
}

/// A Haar-distributed orthogonal matrix: the normalized Gram-Schmidt frame of
/// a Gaussian block, one direction per column.
pub fn random_rotation<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<f64> {
    let frame = sample_orthogonal(dim, rng);
    DMatrix::from_columns(&frame.iter().map(|v| v.normalize()).collect::<Vec<_>>())
}
