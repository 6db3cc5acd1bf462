//! Hessian estimation evolution strategy (HE-ES).
//!
//! A comparison-based black-box minimizer that samples mirrored pairs
//! `m ± σ·A·b` along random orthogonal directions, estimates the curvature of
//! the objective along every direction by central finite differences and
//! multiplies the covariance factor `A` by a determinant-preserving matrix
//! that equalizes those curvatures. Step size control is cumulative step-size
//! adaptation with a selection-mass correction for mirrored pairs.
//!
//! ```
//! use hees::{objectives, Hees, HeesOptions, StopCriteria};
//!
//! let sphere = objectives::sphere(5);
//! let options = HeesOptions::new(vec![1.0; 5], 0.5);
//! let mut opt = Hees::new(options, 7).unwrap();
//! let result = opt.run(&sphere, &StopCriteria::new(20_000, 1e-10)).unwrap();
//! assert!(result.best_f <= 1e-10);
//! ```

pub mod curvature;
mod error;
pub mod linalg;
pub mod objectives;
pub mod optimizer;
pub mod orthogonal;
pub mod restart;
pub mod step_size;

pub use curvature::{apply_update, compute_g, estimate_curvatures, CurvatureEstimates, UpdateFactor};
pub use error::{HeesError, Result};
pub use linalg::condition_number;
pub use objectives::{Objective, ObjectiveProblem};
pub use optimizer::{
    default_pair_count, rank_and_weight, GenerationRecord, Hees, HeesOptions, OptimizerState,
    RunResult, TerminationReason,
};
pub use orthogonal::{sample_direction_blocks, sample_orthogonal, DirectionSet};
pub use restart::{ipop_run, IpopOptions, MeanSampler};
pub use optimizer::StopCriteria;
pub use step_size::{CsaParams, CsaState, RecombinationWeights};

/// Generator used for every random draw made by the optimizer.
pub type HeesRng = rand_chacha::ChaCha8Rng;
