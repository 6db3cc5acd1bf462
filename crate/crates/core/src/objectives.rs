//! Benchmark objectives: convex quadratics, Rosenbrock, Rastrigin and two
//! monotone transformations of the sphere that keep its level sets.
//!
//! Every problem evaluates `g(R (x - s))` for a base function `g`, an
//! optional rotation `R` and a shift `s`, followed by an optional transform
//! of the value. Instances are reproducible from `(name, dim, seed)`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;

use crate::error::{HeesError, Result};
use crate::orthogonal::random_rotation;
use crate::HeesRng;

/// Condition number of the ill-conditioned quadratics.
pub const ILL_CONDITION: f64 = 1e6;

/// Names accepted by [`by_name`].
pub const REGISTRY: &[&str] = &[
    "sphere",
    "ellipsoid",
    "discus",
    "cigar",
    "rosenbrock",
    "rastrigin",
    "log_sphere",
    "rugged_sphere",
];

/// Something the optimizer can minimize.
pub trait Objective {
    fn dim(&self) -> usize;

    fn evaluate(&self, x: &[f64]) -> f64;

    /// Location of the minimizer, when known.
    fn optimum(&self) -> Option<&[f64]> {
        None
    }
}

/// Wraps a closure as an [`Objective`].
pub struct FnObjective<F> {
    dim: usize,
    f: F,
}

pub fn from_fn<F: Fn(&[f64]) -> f64>(dim: usize, f: F) -> FnObjective<F> {
    FnObjective { dim, f }
}

impl<F: Fn(&[f64]) -> f64> Objective for FnObjective<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Base {
    /// `½ Σ hᵢ zᵢ²`
    DiagonalQuadratic(DVector<f64>),
    /// `½ zᵀ H z`
    Quadratic(DMatrix<f64>),
    Rosenbrock,
    Rastrigin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ValueTransform {
    Identity,
    Log,
    Rugged,
}

/// Shift, rotation and the seed they were generated from.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub shift: DVector<f64>,
    pub rotation: Option<DMatrix<f64>>,
    pub seed: Option<u64>,
}

/// A `d`-dimensional test function with its known optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveProblem {
    name: String,
    dim: usize,
    base: Base,
    transform: ValueTransform,
    instance: Instance,
    /// Minimizer of the base function in rotated coordinates.
    base_optimum: DVector<f64>,
    x_star: DVector<f64>,
    f_star: Option<f64>,
}

impl ObjectiveProblem {
    fn new(name: &str, dim: usize, base: Base, transform: ValueTransform, base_optimum: DVector<f64>, f_star: Option<f64>) -> Self {
        Self {
            name: name.to_owned(),
            dim,
            base,
            transform,
            instance: Instance { shift: DVector::zeros(dim), rotation: None, seed: None },
            x_star: base_optimum.clone(),
            base_optimum,
            f_star,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn x_star(&self) -> &DVector<f64> {
        &self.x_star
    }

    /// Optimal value; `None` when the infimum is not attained (log-sphere).
    pub fn f_star(&self) -> Option<f64> {
        self.f_star
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    /// Moves the optimum by `shift`.
    pub fn with_shift(mut self, shift: DVector<f64>) -> Result<Self> {
        if shift.len() != self.dim {
            return Err(HeesError::DimensionMismatch { expected: self.dim, actual: shift.len() });
        }
        self.instance.shift = shift;
        self.refresh_optimum();
        Ok(self)
    }

    /// Applies an explicit orthogonal rotation of the search space.
    pub fn with_rotation(mut self, rotation: DMatrix<f64>) -> Result<Self> {
        if rotation.nrows() != self.dim || rotation.ncols() != self.dim {
            return Err(HeesError::DimensionMismatch { expected: self.dim, actual: rotation.nrows() });
        }
        let err = (rotation.transpose() * &rotation - DMatrix::<f64>::identity(self.dim, self.dim)).abs().max();
        if err > 1e-10 {
            return Err(HeesError::InvalidConfig(format!("rotation is not orthogonal (error {err:.2e})")));
        }
        self.instance.rotation = Some(rotation);
        self.refresh_optimum();
        Ok(self)
    }

    /// Applies a Haar-random rotation determined by `seed`.
    pub fn with_random_rotation(self, seed: u64) -> Self {
        let mut rng = HeesRng::seed_from_u64(seed);
        let rotation = random_rotation(self.dim, &mut rng);
        let mut out = self.with_rotation(rotation).expect("sampled rotation is orthogonal");
        out.instance.seed = Some(seed);
        out
    }

    fn refresh_optimum(&mut self) {
        let z = &self.base_optimum;
        let local = match &self.instance.rotation {
            Some(r) => r.transpose() * z,
            None => z.clone(),
        };
        self.x_star = local + &self.instance.shift;
    }

    fn to_local(&self, x: &[f64]) -> DVector<f64> {
        let d = DVector::from_column_slice(x) - &self.instance.shift;
        match &self.instance.rotation {
            Some(r) => r * d,
            None => d,
        }
    }

    fn base_value(&self, z: &DVector<f64>) -> f64 {
        match &self.base {
            Base::DiagonalQuadratic(h) => 0.5 * z.iter().zip(h.iter()).map(|(zi, hi)| hi * zi * zi).sum::<f64>(),
            Base::Quadratic(h) => 0.5 * z.dot(&(h * z)),
            Base::Rosenbrock => z
                .as_slice()
                .windows(2)
                .map(|p| 100.0 * (p[1] - p[0] * p[0]).powi(2) + (1.0 - p[0]).powi(2))
                .sum(),
            Base::Rastrigin => {
                let tau = std::f64::consts::TAU;
                10.0 * z.len() as f64 + z.iter().map(|v| v * v - 10.0 * (tau * v).cos()).sum::<f64>()
            }
        }
    }

    fn base_gradient(&self, z: &DVector<f64>) -> DVector<f64> {
        match &self.base {
            Base::DiagonalQuadratic(h) => z.component_mul(h),
            Base::Quadratic(h) => h * z,
            Base::Rosenbrock => {
                let n = z.len();
                let mut g = DVector::zeros(n);
                for i in 0..n - 1 {
                    let r = z[i + 1] - z[i] * z[i];
                    g[i] += -400.0 * z[i] * r - 2.0 * (1.0 - z[i]);
                    g[i + 1] += 200.0 * r;
                }
                g
            }
            Base::Rastrigin => {
                let tau = std::f64::consts::TAU;
                z.map(|v| 2.0 * v + 10.0 * tau * (tau * v).sin())
            }
        }
    }

    /// Hessian in the original coordinates, for the untransformed quadratics.
    pub fn hessian(&self) -> Option<DMatrix<f64>> {
        if self.transform != ValueTransform::Identity {
            return None;
        }
        let local = match &self.base {
            Base::DiagonalQuadratic(h) => DMatrix::from_diagonal(h),
            Base::Quadratic(h) => h.clone(),
            Base::Rosenbrock | Base::Rastrigin => return None,
        };
        Some(match &self.instance.rotation {
            Some(r) => r.transpose() * local * r,
            None => local,
        })
    }

    /// Analytic gradient. `None` for the rugged sphere, which is not smooth.
    pub fn gradient(&self, x: &[f64]) -> Option<DVector<f64>> {
        let z = self.to_local(x);
        let gz = self.base_gradient(&z);
        let outer = match self.transform {
            ValueTransform::Identity => 1.0,
            ValueTransform::Log => 1.0 / self.base_value(&z),
            ValueTransform::Rugged => return None,
        };
        let gz = gz * outer;
        Some(match &self.instance.rotation {
            Some(r) => r.transpose() * gz,
            None => gz,
        })
    }
}

impl Objective for ObjectiveProblem {
    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, x: &[f64]) -> f64 {
        let t = self.base_value(&self.to_local(x));
        match self.transform {
            ValueTransform::Identity => t,
            ValueTransform::Log => {
                if t > 0.0 {
                    t.ln()
                } else {
                    f64::MIN
                }
            }
            ValueTransform::Rugged => rugged_transform(t.max(0.0)).unwrap_or(f64::NAN),
        }
    }

    fn optimum(&self) -> Option<&[f64]> {
        Some(self.x_star.as_slice())
    }
}

/// `½ (x - x*)ᵀ H (x - x*)` for a symmetric positive definite `H`.
pub fn make_quadratic(h: DMatrix<f64>, x_star: DVector<f64>) -> Result<ObjectiveProblem> {
    let dim = h.nrows();
    if dim == 0 || h.ncols() != dim {
        return Err(HeesError::InvalidConfig("Hessian must be a non-empty square matrix".into()));
    }
    if x_star.len() != dim {
        return Err(HeesError::DimensionMismatch { expected: dim, actual: x_star.len() });
    }
    let asym = (&h - h.transpose()).abs().max();
    if asym > 1e-12 * h.abs().max().max(1.0) {
        return Err(HeesError::InvalidConfig("Hessian is not symmetric".into()));
    }
    if h.clone().cholesky().is_none() {
        return Err(HeesError::InvalidConfig("Hessian is not positive definite".into()));
    }
    ObjectiveProblem::new("quadratic", dim, Base::Quadratic(h), ValueTransform::Identity, DVector::zeros(dim), Some(0.0))
        .with_shift(x_star)
}

fn diagonal(name: &str, dim: usize, h: DVector<f64>) -> ObjectiveProblem {
    ObjectiveProblem::new(name, dim, Base::DiagonalQuadratic(h), ValueTransform::Identity, DVector::zeros(dim), Some(0.0))
}

/// `½ ‖x‖²`.
pub fn sphere(dim: usize) -> ObjectiveProblem {
    diagonal("sphere", dim, DVector::from_element(dim, 1.0))
}

/// Diagonal quadratic with eigenvalues `10^(6 (i-1)/(d-1))`.
pub fn ellipsoid(dim: usize) -> ObjectiveProblem {
    let h = DVector::from_fn(dim, |i, _| {
        if dim == 1 {
            1.0
        } else {
            ILL_CONDITION.powf(i as f64 / (dim - 1) as f64)
        }
    });
    diagonal("ellipsoid", dim, h)
}

/// One eigenvalue `10⁶`, the rest 1.
pub fn discus(dim: usize) -> ObjectiveProblem {
    diagonal("discus", dim, DVector::from_fn(dim, |i, _| if i == 0 { ILL_CONDITION } else { 1.0 }))
}

/// One eigenvalue 1, the rest `10⁶`.
pub fn cigar(dim: usize) -> ObjectiveProblem {
    diagonal("cigar", dim, DVector::from_fn(dim, |i, _| if i == 0 { 1.0 } else { ILL_CONDITION }))
}

/// `Σ 100 (x_{i+1} - xᵢ²)² + (1 - xᵢ)²`, minimum 0 at `(1, …, 1)`.
pub fn rosenbrock(dim: usize) -> Result<ObjectiveProblem> {
    if dim < 2 {
        return Err(HeesError::InvalidConfig("rosenbrock needs at least two dimensions".into()));
    }
    Ok(ObjectiveProblem::new("rosenbrock", dim, Base::Rosenbrock, ValueTransform::Identity, DVector::from_element(dim, 1.0), Some(0.0)))
}

/// `10 d + Σ xᵢ² - 10 cos(2π xᵢ)`, minimum 0 at the origin.
pub fn rastrigin(dim: usize) -> ObjectiveProblem {
    ObjectiveProblem::new("rastrigin", dim, Base::Rastrigin, ValueTransform::Identity, DVector::zeros(dim), Some(0.0))
}

/// `log(½ ‖x‖²)`; the origin maps to the most negative finite value.
pub fn log_sphere(dim: usize) -> ObjectiveProblem {
    ObjectiveProblem::new("log_sphere", dim, Base::DiagonalQuadratic(DVector::from_element(dim, 1.0)), ValueTransform::Log, DVector::zeros(dim), None)
}

/// `h(½ ‖x‖²)` with the rugged monotone transform [`rugged_transform`].
pub fn rugged_sphere(dim: usize) -> ObjectiveProblem {
    ObjectiveProblem::new("rugged_sphere", dim, Base::DiagonalQuadratic(DVector::from_element(dim, 1.0)), ValueTransform::Rugged, DVector::zeros(dim), Some(0.0))
}

/// `h(t) = exp([¼ - ½ cos(π (5 ln t - r)) + r] / 5)` with `r = ⌊5 ln t⌋`,
/// and `h(0) = 0`.
pub fn rugged_transform(t: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    if !(t > 0.0) || t.is_infinite() {
        return Err(HeesError::Domain(format!("rugged transform needs t >= 0, got {t}")));
    }
    let s = 5.0 * t.ln();
    let r = s.floor();
    let inner = 0.25 - 0.5 * (std::f64::consts::PI * (s - r)).cos() + r;
    Ok((inner / 5.0).exp())
}

/// Looks a problem up by its registry name.
pub fn by_name(name: &str, dim: usize) -> Result<ObjectiveProblem> {
    if dim == 0 {
        return Err(HeesError::InvalidConfig("dimension must be positive".into()));
    }
    Ok(match name {
        "sphere" => sphere(dim),
        "ellipsoid" => ellipsoid(dim),
        "discus" => discus(dim),
        "cigar" => cigar(dim),
        "rosenbrock" => rosenbrock(dim)?,
        "rastrigin" => rastrigin(dim),
        "log_sphere" => log_sphere(dim),
        "rugged_sphere" => rugged_sphere(dim),
        other => {
            return Err(HeesError::InvalidConfig(format!(
                "unknown function '{other}' (known: {})",
                REGISTRY.join(", ")
            )))
        }
    })
}
