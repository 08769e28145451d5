//! Observation operators `G` and synthetic data generation.

mod heat;

pub use heat::{BoundaryConvention, HeatModel, HeatRobinSetup};

use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid1D, ObservationSet};
use crate::scalar::Real;

/// Maps a field to `output_len()` predictions at `locations()`.
///
/// Implementations are pure: `apply` may be called concurrently.
pub trait ForwardModel<T: Real>: Send + Sync {
    fn output_len(&self) -> usize;

    /// Where (or when) each prediction is observed.
    fn locations(&self) -> &[T];

    fn apply(&self, u: &Field<T>) -> Result<Vec<T>>;
}

/// Pointwise evaluation by linear interpolation.
#[derive(Debug, Clone)]
pub struct DenoisingModel<T> {
    grid: Grid1D<T>,
    locations: Vec<T>,
}

impl<T: Real> DenoisingModel<T> {
    pub fn new(locations: Vec<T>, grid: &Grid1D<T>) -> Result<Self> {
        if let Some(&t) = locations.iter().find(|&&t| !grid.contains(t)) {
            return Err(Error::OutOfDomain { t: t.as_f64(), a: grid.a().as_f64(), b: grid.b().as_f64() });
        }
        if locations.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("observation locations must be strictly increasing".into()));
        }
        Ok(Self { grid: *grid, locations })
    }

    pub fn grid(&self) -> &Grid1D<T> {
        &self.grid
    }
}

impl<T: Real> ForwardModel<T> for DenoisingModel<T> {
    fn output_len(&self) -> usize {
        self.locations.len()
    }

    fn locations(&self) -> &[T] {
        &self.locations
    }

    fn apply(&self, u: &Field<T>) -> Result<Vec<T>> {
        if *u.grid() != self.grid {
            return Err(Error::GridMismatch("field grid differs from the model grid".into()));
        }
        self.locations.iter().map(|&t| u.eval_at(t)).collect()
    }
}

/// `y_j = G(truth)_j + noise_sd * z_j`, with the `z_j` drawn in order from `rng`.
pub fn generate_data<T: Real, R: Rng + ?Sized>(
    model: &dyn ForwardModel<T>,
    truth: &Field<T>,
    noise_sd: T,
    rng: &mut R,
) -> Result<ObservationSet<T>> {
    let clean = model.apply(truth)?;
    let y = clean.into_iter().map(|g| g + noise_sd * T::standard_normal(rng)).collect();
    ObservationSet::new(model.locations().to_vec(), y, noise_sd)
}
