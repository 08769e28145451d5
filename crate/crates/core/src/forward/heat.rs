//! 1-D heat conduction with a time-dependent Robin coefficient.
//!
//! `u_t = u_xx` on `[0, L] x [0, T]`, `u(x, 0) = g(x)`, with
//! `-u_x(0, t) + rho(t) u(0, t) = h0(t)` and, in the outward-normal
//! convention, `u_x(L, t) + rho(t) u(L, t) = h1(t)`. The forward map returns
//! the boundary trace `u(L, t)` at the observation times.
//!
//! Crank–Nicolson in time, central differences in space. Each Robin condition
//! is imposed through a ghost node eliminated with the central flux
//! approximation, so every step is one tridiagonal solve. `rho` is sampled at
//! the half step and the boundary data averaged over the two time levels.

use std::sync::atomic::{AtomicBool, Ordering};

use crate::error::{Error, Result};
use crate::forward::ForwardModel;
use crate::grid::{Field, Grid1D};
use crate::linalg::thomas_solve_in_place;
use crate::scalar::Real;

/// Sign of the flux term in the right-hand (`x = L`) Robin condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryConvention {
    /// `+u_x(L, t) + rho u(L, t) = h1(t)`.
    #[default]
    OutwardNormal,
    /// `-u_x(L, t) + rho u(L, t) = h1(t)`.
    Printed,
}

impl BoundaryConvention {
    fn sign<T: Real>(self) -> T {
        match self {
            BoundaryConvention::OutwardNormal => T::one(),
            BoundaryConvention::Printed => -T::one(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HeatRobinSetup<T> {
    pub space_len: T,
    pub time_len: T,
    pub nx: usize,
    pub nt: usize,
    /// Initial condition on `[0, space_len]`.
    pub g: Field<T>,
    /// Left boundary data at the `nt + 1` solver time levels.
    pub h0: Vec<T>,
    /// Right boundary data at the `nt + 1` solver time levels.
    pub h1: Vec<T>,
    pub obs_times: Vec<T>,
    pub convention: BoundaryConvention,
}

impl<T: Real> HeatRobinSetup<T> {
    /// Tabulates `g`, `h0` and `h1` from closures on the solver grids.
    #[allow(clippy::too_many_arguments)]
    pub fn from_fns(
        space_len: T,
        time_len: T,
        nx: usize,
        nt: usize,
        g: impl Fn(T) -> T,
        h0: impl Fn(T) -> T,
        h1: impl Fn(T) -> T,
        obs_times: Vec<T>,
    ) -> Result<Self> {
        let xg = Grid1D::new(nx, T::zero(), space_len)?;
        let tg = Grid1D::new(nt + 1, T::zero(), time_len)?;
        let times = tg.points();
        Ok(Self {
            space_len,
            time_len,
            nx,
            nt,
            g: Field::from_fn(xg, g)?,
            h0: times.iter().map(|&t| h0(t)).collect(),
            h1: times.iter().map(|&t| h1(t)).collect(),
            obs_times,
            convention: BoundaryConvention::OutwardNormal,
        })
    }

    pub fn with_convention(mut self, convention: BoundaryConvention) -> Self {
        self.convention = convention;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.nx < 3 {
            return Err(Error::InvalidArgument(format!("need nx >= 3, got {}", self.nx)));
        }
        if self.nt < 2 {
            return Err(Error::InvalidArgument(format!("need nt >= 2, got {}", self.nt)));
        }
        if !(self.space_len > T::zero()) || !(self.time_len > T::zero()) {
            return Err(Error::InvalidArgument("space and time lengths must be positive".into()));
        }
        for h in [&self.h0, &self.h1] {
            if h.len() != self.nt + 1 {
                return Err(Error::LengthMismatch { expected: self.nt + 1, got: h.len() });
            }
        }
        let g = self.g.grid();
        if g.a() != T::zero() || g.b() != self.space_len {
            return Err(Error::GridMismatch("initial condition must live on [0, L]".into()));
        }
        if self.obs_times.iter().any(|&t| t < T::zero() || t > self.time_len) {
            return Err(Error::InvalidArgument("observation times must lie in [0, T]".into()));
        }
        if self.obs_times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("observation times must be increasing".into()));
        }
        Ok(())
    }
}

/// Boundary-trace forward map for the Robin coefficient.
#[derive(Debug)]
pub struct HeatModel<T> {
    setup: HeatRobinSetup<T>,
    initial: Vec<T>,
    time_grid: Grid1D<T>,
    warned_negative: AtomicBool,
}

impl<T: Real> HeatModel<T> {
    pub fn new(setup: HeatRobinSetup<T>) -> Result<Self> {
        setup.validate()?;
        let xg = Grid1D::new(setup.nx, T::zero(), setup.space_len)?;
        let initial = setup.g.regrid(&xg)?.into_values();
        let time_grid = Grid1D::new(setup.nt + 1, T::zero(), setup.time_len)?;
        Ok(Self { setup, initial, time_grid, warned_negative: AtomicBool::new(false) })
    }

    pub fn setup(&self) -> &HeatRobinSetup<T> {
        &self.setup
    }

    /// `u(L, t_k)` at every solver time level `t_k = k T / nt`.
    pub fn boundary_trace(&self, rho: &Field<T>) -> Result<Field<T>> {
        let s = &self.setup;
        let rg = rho.grid();
        if rg.a() != T::zero() || rg.b() != s.time_len {
            return Err(Error::GridMismatch("Robin coefficient must live on [0, T]".into()));
        }
        if rho.values().iter().any(|&v| v < T::zero()) && !self.warned_negative.swap(true, Ordering::Relaxed) {
            log::warn!("negative Robin coefficient passed to the heat solver");
        }

        let nx = s.nx;
        let last = nx - 1;
        let dx = s.space_len / T::from_usize_lossy(nx - 1);
        let dt = s.time_len / T::from_usize_lossy(s.nt);
        let two = T::lit(2.0);
        let half = T::lit(0.5);
        let r = dt / (dx * dx);
        let sign = s.convention.sign::<T>();

        let mut u = self.initial.clone();
        let mut trace = Vec::with_capacity(s.nt + 1);
        trace.push(u[last]);

        let mut lower = vec![-half * r; nx];
        let mut diag = vec![T::one() + r; nx];
        let mut upper = vec![-half * r; nx];
        lower[0] = T::zero();
        upper[last] = T::zero();
        upper[0] = -r;
        lower[last] = -r;
        let mut rhs = vec![T::zero(); nx];
        let mut scratch = vec![T::zero(); nx];
        let rho_vals = rho.values();
        let rho_dt = rg.spacing();

        for step in 0..s.nt {
            let t_half = (T::from_usize_lossy(step) + half) * dt;
            let rho_half = lerp_uniform(rho_vals, rho_dt, t_half.min(s.time_len));
            let h0 = (s.h0[step] + s.h0[step + 1]) * half;
            let h1 = (s.h1[step] + s.h1[step + 1]) * half;

            let left = r * (T::one() + dx * rho_half);
            let right = r * (T::one() + sign * dx * rho_half);
            diag[0] = T::one() + left;
            diag[last] = T::one() + right;

            rhs[0] = (T::one() - left) * u[0] + r * u[1] + two * r * dx * h0;
            for j in 1..last {
                rhs[j] = half * r * (u[j - 1] + u[j + 1]) + (T::one() - r) * u[j];
            }
            rhs[last] = (T::one() - right) * u[last] + r * u[last - 1] + sign * two * r * dx * h1;

            thomas_solve_in_place(&lower, &diag, &upper, &mut rhs, &mut scratch)
                .map_err(|_| Error::SolverDiverged { step: step + 1 })?;
            std::mem::swap(&mut u, &mut rhs);
            if u.iter().any(|v| !v.is_finite()) {
                return Err(Error::SolverDiverged { step: step + 1 });
            }
            trace.push(u[last]);
        }
        Ok(Field::from_parts(self.time_grid, trace))
    }
}

/// Linear interpolation of nodal values on a uniform grid starting at 0.
fn lerp_uniform<T: Real>(values: &[T], h: T, t: T) -> T {
    let pos = t / h;
    let last = values.len() - 1;
    let i = pos.floor().to_usize().unwrap_or(0).min(last - 1);
    let w = pos - T::from_usize_lossy(i);
    values[i] + w * (values[i + 1] - values[i])
}

impl<T: Real> ForwardModel<T> for HeatModel<T> {
    fn output_len(&self) -> usize {
        self.setup.obs_times.len()
    }

    fn locations(&self) -> &[T] {
        &self.setup.obs_times
    }

    fn apply(&self, rho: &Field<T>) -> Result<Vec<T>> {
        let trace = self.boundary_trace(rho)?;
        self.setup.obs_times.iter().map(|&t| trace.eval_at(t)).collect()
    }
}
