//! Reference problem definitions: the piecewise-constant denoising signal and
//! the Robin-coefficient heat problem, with their default constants.

use crate::forward::HeatRobinSetup;
use crate::error::Result;
use crate::grid::{Field, Grid1D, ObservationSet};
use crate::scalar::Real;

pub mod denoising {
    pub const N_OBS: usize = 23;
    pub const NOISE_SD: f64 = 0.02;
    pub const GAMMA: f64 = 0.1;
    pub const D: f64 = 0.02;
    pub const LAMBDA: f64 = 500.0;
    pub const GRID_SIZES: [usize; 3] = [89, 177, 353];
    /// Length scales for the pure-Gaussian comparison.
    pub const GP_LENGTHS: [f64; 3] = [0.04, 0.08, 0.16];
}

pub mod robin {
    pub const N_OBS: usize = 100;
    pub const NOISE_SD: f64 = 0.01;
    pub const GAMMA: f64 = 0.1;
    pub const D: f64 = 0.02;
    pub const LAMBDA: f64 = 300.0;
    pub const GRID_SIZE: usize = 200;
    pub const BETA: f64 = 0.02;
    pub const INNER_STEPS: usize = 10;
    pub const NX: usize = 101;
    pub const NT: usize = 400;
    /// Stand-in truth levels (outer thirds, middle third).
    pub const RHO_LOW: f64 = 0.5;
    pub const RHO_HIGH: f64 = 1.5;
}

/// Indicator of the middle third. A node sitting exactly on a jump takes the
/// left-limit value.
pub fn middle_third<T: Real>(t: T) -> bool {
    let third = T::one() / T::lit(3.0);
    let two_thirds = T::lit(2.0) / T::lit(3.0);
    t > third && t <= two_thirds
}

/// 0 on `[0, 1/3)`, 1 on `[1/3, 2/3)`, 0 on `[2/3, 1]`.
pub fn denoising_truth<T: Real>(grid: &Grid1D<T>) -> Field<T> {
    Field::from_fn(*grid, |t| if middle_third(t) { T::one() } else { T::zero() })
        .expect("finite step values")
}

/// 23 equally spaced points on `[0, 1]`, endpoints included.
pub fn denoising_locations<T: Real>() -> Vec<T> {
    let m = denoising::N_OBS - 1;
    (0..=m)
        .map(|j| if j == m { T::one() } else { T::from_usize_lossy(j) / T::from_usize_lossy(m) })
        .collect()
}

/// `m` equally spaced times `T/m, 2T/m, ..., T` on `[0, 1]`.
pub fn heat_obs_times<T: Real>(m: usize) -> Vec<T> {
    (1..=m)
        .map(|j| if j == m { T::one() } else { T::from_usize_lossy(j) / T::from_usize_lossy(m) })
        .collect()
}

/// Initial and boundary data of the Robin problem on `[0,1] x [0,1]`:
/// `g = x^2 + 1`, `h0 = t(2t + 1)`, `h1 = 2 + t(2t + 2)`. With `rho(t) = t`
/// the exact solution is `u = x^2 + 2t + 1`.
pub fn manufactured_heat_setup<T: Real>(nx: usize, nt: usize, obs_times: Vec<T>) -> HeatRobinSetup<T> {
    let two = T::lit(2.0);
    HeatRobinSetup::from_fns(
        T::one(),
        T::one(),
        nx,
        nt,
        |x| x * x + T::one(),
        |t| t * (two * t + T::one()),
        |t| two + t * (two * t + two),
        obs_times,
    )
    .expect("valid manufactured setup")
}

/// Piecewise-linear interpolant of the data on `grid`, held constant outside
/// the observed range. Used as a chain starting point.
pub fn data_interpolant<T: Real>(obs: &ObservationSet<T>, grid: &Grid1D<T>) -> Result<Field<T>> {
    let (x, y) = (obs.locations(), obs.y());
    if x.is_empty() {
        return Ok(Field::zeros(*grid));
    }
    Field::from_fn(*grid, |t| {
        let j = x.partition_point(|&v| v <= t);
        if j == 0 {
            y[0]
        } else if j == x.len() {
            y[x.len() - 1]
        } else {
            let w = (t - x[j - 1]) / (x[j] - x[j - 1]);
            y[j - 1] + w * (y[j] - y[j - 1])
        }
    })
}

/// Piecewise-constant Robin coefficient used to generate synthetic data.
pub fn robin_truth<T: Real>(grid: &Grid1D<T>) -> Field<T> {
    let lo = T::lit(robin::RHO_LOW);
    let hi = T::lit(robin::RHO_HIGH);
    Field::from_fn(*grid, |t| if middle_third(t) { hi } else { lo }).expect("finite step values")
}
