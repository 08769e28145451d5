//! Gaussian reference measure: squared-exponential covariance, its Cholesky
//! factor, prior draws, the Cameron–Martin norm and exact GP regression.

use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid1D, ObservationSet};
use crate::linalg::{self, SquareMatrix};
use crate::scalar::Real;

/// `k(s, t) = gamma * exp(-((s - t) / d)^2 / 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqExpKernel<T> {
    gamma: T,
    d: T,
}

impl<T: Real> SqExpKernel<T> {
    pub fn new(gamma: T, d: T) -> Result<Self> {
        if !(gamma > T::zero() && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!("kernel gamma must be positive, got {gamma}")));
        }
        if !(d > T::zero() && d.is_finite()) {
            return Err(Error::InvalidArgument(format!("kernel length d must be positive, got {d}")));
        }
        Ok(Self { gamma, d })
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn length(&self) -> T {
        self.d
    }

    #[inline]
    pub fn eval(&self, s: T, t: T) -> T {
        let r = (s - t) / self.d;
        self.gamma * (-(r * r) / T::lit(2.0)).exp()
    }
}

/// Dense covariance matrix of the reference measure on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceOperator<T> {
    grid: Grid1D<T>,
    matrix: SquareMatrix<T>,
    jitter: T,
}

impl<T: Real> CovarianceOperator<T> {
    /// Wraps an arbitrary symmetric matrix.
    pub fn from_matrix(grid: Grid1D<T>, matrix: SquareMatrix<T>) -> Result<Self> {
        if matrix.n() != grid.n() {
            return Err(Error::LengthMismatch { expected: grid.n(), got: matrix.n() });
        }
        let n = matrix.n();
        let scale = matrix.max_abs_diagonal().max(T::min_positive_value());
        for i in 0..n {
            for j in 0..i {
                if (matrix.get(i, j) - matrix.get(j, i)).abs() > T::lit(1e-12) * scale {
                    return Err(Error::InvalidArgument(format!("matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { grid, matrix, jitter: T::zero() })
    }

    pub fn grid(&self) -> &Grid1D<T> {
        &self.grid
    }

    pub fn matrix(&self) -> &SquareMatrix<T> {
        &self.matrix
    }

    /// Diagonal shift used by the last successful [`factor`].
    pub fn jitter(&self) -> T {
        self.jitter
    }
}

/// Lower-triangular `L` with `L Lᵀ = C0 + jitter I`.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor<T> {
    grid: Grid1D<T>,
    lower: SquareMatrix<T>,
    jitter: T,
}

impl<T: Real> CholeskyFactor<T> {
    pub fn grid(&self) -> &Grid1D<T> {
        &self.grid
    }

    pub fn lower(&self) -> &SquareMatrix<T> {
        &self.lower
    }

    pub fn jitter(&self) -> T {
        self.jitter
    }

    /// `L z` as a field.
    pub fn apply(&self, z: &[T]) -> Result<Field<T>> {
        if z.len() != self.grid.n() {
            return Err(Error::LengthMismatch { expected: self.grid.n(), got: z.len() });
        }
        Ok(Field::from_parts(self.grid, linalg::lower_matvec(&self.lower, z)))
    }
}

pub fn build_covariance<T: Real>(kernel: &SqExpKernel<T>, grid: &Grid1D<T>) -> CovarianceOperator<T> {
    let pts = grid.points();
    let matrix = SquareMatrix::symmetric_from_fn(grid.n(), |i, j| kernel.eval(pts[i], pts[j]));
    CovarianceOperator { grid: *grid, matrix, jitter: T::zero() }
}

/// Jitter ladder relative to the largest diagonal entry: 0, then 1e-12 up to 1e-6 in decades.
fn jitter_ladder<T: Real>(scale: T) -> impl Iterator<Item = T> {
    std::iter::once(T::zero()).chain((0..=6).map(move |k| scale * T::lit(10f64.powi(k - 12))))
}

/// Cholesky factorization with an escalating diagonal jitter. The jitter that
/// succeeded is written back into `cov`.
pub fn factor<T: Real>(cov: &mut CovarianceOperator<T>) -> Result<CholeskyFactor<T>> {
    let scale = cov.matrix.max_abs_diagonal();
    let mut last = T::zero();
    for jitter in jitter_ladder(scale) {
        last = jitter;
        if let Some(lower) = cov.matrix.cholesky(jitter) {
            if jitter > T::zero() {
                log::debug!("covariance factored with jitter {:e}", jitter.as_f64());
            }
            cov.jitter = jitter;
            return Ok(CholeskyFactor { grid: cov.grid, lower, jitter });
        }
    }
    Err(Error::NotPositiveDefinite { jitter: last.as_f64() })
}

/// Convenience: build and factor in one go.
pub fn prior_factor<T: Real>(kernel: &SqExpKernel<T>, grid: &Grid1D<T>) -> Result<CholeskyFactor<T>> {
    factor(&mut build_covariance(kernel, grid))
}

/// Draw `L z` with `z` iid standard normal, consumed node by node from `rng`.
pub fn sample_prior<T: Real, R: Rng + ?Sized>(factor: &CholeskyFactor<T>, rng: &mut R) -> Field<T> {
    let z: Vec<T> = (0..factor.grid.n()).map(|_| T::standard_normal(rng)).collect();
    Field::from_parts(factor.grid, linalg::lower_matvec(&factor.lower, &z))
}

/// `‖L⁻¹ u‖²`.
pub fn cameron_martin_norm_sq<T: Real>(factor: &CholeskyFactor<T>, u: &Field<T>) -> Result<T> {
    if *u.grid() != factor.grid {
        return Err(Error::GridMismatch("field is not on the covariance grid".into()));
    }
    let z = linalg::forward_solve(&factor.lower, u.values());
    Ok(linalg::dot(&z, &z))
}

/// Exact posterior of the zero-mean GP under point observations.
#[derive(Debug, Clone, PartialEq)]
pub struct GpPosterior<T> {
    pub mean: Field<T>,
    pub sd: Field<T>,
}

pub fn gp_posterior_exact<T: Real>(
    kernel: &SqExpKernel<T>,
    grid: &Grid1D<T>,
    obs: &ObservationSet<T>,
) -> Result<GpPosterior<T>> {
    let pts = grid.points();
    let m = obs.len();
    if m == 0 {
        return Ok(GpPosterior {
            mean: Field::zeros(*grid),
            sd: Field::constant(*grid, kernel.gamma().sqrt()),
        });
    }
    let locs = obs.locations();
    if let Some(&t) = locs.iter().find(|&&t| !grid.contains(t)) {
        return Err(Error::OutOfDomain { t: t.as_f64(), a: grid.a().as_f64(), b: grid.b().as_f64() });
    }
    let noise_var = obs.noise_sd() * obs.noise_sd();
    let gram = SquareMatrix::symmetric_from_fn(m, |i, j| {
        kernel.eval(locs[i], locs[j]) + if i == j { noise_var } else { T::zero() }
    });
    let chol = gram.cholesky(T::zero()).ok_or(Error::NotPositiveDefinite { jitter: 0.0 })?;
    let alpha = linalg::cholesky_solve(&chol, obs.y());

    let mut mean = Vec::with_capacity(grid.n());
    let mut sd = Vec::with_capacity(grid.n());
    for &t in &pts {
        let cross: Vec<T> = locs.iter().map(|&s| kernel.eval(t, s)).collect();
        mean.push(linalg::dot(&cross, &alpha));
        let v = linalg::forward_solve(&chol, &cross);
        let var = kernel.eval(t, t) - linalg::dot(&v, &v);
        sd.push(var.max(T::zero()).sqrt());
    }
    Ok(GpPosterior { mean: Field::new(*grid, mean)?, sd: Field::new(*grid, sd)? })
}
