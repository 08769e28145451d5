//! Posterior potentials: discrete total variation, data misfit and the
//! Onsager–Machlup functional.

use crate::error::{Error, Result};
use crate::forward::ForwardModel;
use crate::gaussian::{cameron_martin_norm_sq, CholeskyFactor};
use crate::grid::{Field, ObservationSet};
use crate::scalar::Real;

/// `R(u) = lambda * TV(u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvTerm<T> {
    lambda: T,
}

impl<T: Real> TvTerm<T> {
    pub fn new(lambda: T) -> Result<Self> {
        if !(lambda > T::zero() && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("TV weight must be positive, got {lambda}")));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    #[inline]
    pub fn eval(&self, u: &Field<T>) -> T {
        self.lambda * tv_of_values(u.values())
    }
}

#[inline]
pub(crate) fn tv_of_values<T: Real>(v: &[T]) -> T {
    v.windows(2).fold(T::zero(), |acc, w| acc + (w[1] - w[0]).abs())
}

/// `sum_i |u_{i+1} - u_i|`. Grid spacing cancels between the quadrature
/// weight and the difference quotient.
pub fn tv_seminorm<T: Real>(u: &Field<T>) -> Result<T> {
    if u.len() < 2 {
        return Err(Error::InvalidArgument("TV needs at least 2 nodes".into()));
    }
    Ok(tv_of_values(u.values()))
}

pub fn regularizer<T: Real>(tv: &TvTerm<T>, u: &Field<T>) -> Result<T> {
    Ok(tv.lambda * tv_seminorm(u)?)
}

/// `½ sum_j ((G(u)_j - y_j) / sigma)^2`.
pub fn data_misfit<T: Real>(
    model: &dyn ForwardModel<T>,
    obs: &ObservationSet<T>,
    u: &Field<T>,
) -> Result<T> {
    let pred = model.apply(u)?;
    misfit_of_prediction(&pred, obs)
}

pub(crate) fn misfit_of_prediction<T: Real>(pred: &[T], obs: &ObservationSet<T>) -> Result<T> {
    if pred.len() != obs.len() {
        return Err(Error::LengthMismatch { expected: obs.len(), got: pred.len() });
    }
    let inv = T::one() / obs.noise_sd();
    let ss = pred
        .iter()
        .zip(obs.y())
        .fold(T::zero(), |acc, (&g, &y)| {
            let r = (g - y) * inv;
            acc + r * r
        });
    Ok(ss / T::lit(2.0))
}

/// `I(u) = Phi(u) + lambda TV(u) + ½ ‖u‖²_E`; its minimizer is the MAP point.
pub fn omf<T: Real>(
    factor: &CholeskyFactor<T>,
    tv: &TvTerm<T>,
    model: &dyn ForwardModel<T>,
    obs: &ObservationSet<T>,
    u: &Field<T>,
) -> Result<T> {
    let phi = data_misfit(model, obs, u)?;
    let r = regularizer(tv, u)?;
    let cm = cameron_martin_norm_sq(factor, u)?;
    Ok(phi + r + cm / T::lit(2.0))
}

/// The likelihood side of a posterior, `Phi(u)`, as seen by the samplers.
pub trait Misfit<T: Real>: Sync {
    fn misfit(&self, u: &Field<T>) -> Result<T>;
}

/// `Phi` from a forward model and an observation set.
pub struct DataMisfit<'a, T> {
    model: &'a dyn ForwardModel<T>,
    obs: &'a ObservationSet<T>,
}

impl<'a, T: Real> DataMisfit<'a, T> {
    pub fn new(model: &'a dyn ForwardModel<T>, obs: &'a ObservationSet<T>) -> Result<Self> {
        if model.output_len() != obs.len() {
            return Err(Error::LengthMismatch { expected: obs.len(), got: model.output_len() });
        }
        Ok(Self { model, obs })
    }
}

impl<T: Real> Misfit<T> for DataMisfit<'_, T> {
    fn misfit(&self, u: &Field<T>) -> Result<T> {
        data_misfit(self.model, self.obs, u)
    }
}

/// `Phi = 0`: the posterior equals the prior.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoData;

impl<T: Real> Misfit<T> for NoData {
    fn misfit(&self, _u: &Field<T>) -> Result<T> {
        Ok(T::zero())
    }
}
