//! Uniform 1-D grids, nodal fields and observation sets.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Uniform grid of `n` nodes on `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D<T> {
    n: usize,
    a: T,
    b: T,
}

impl<T: Real> Grid1D<T> {
    pub fn new(n: usize, a: T, b: T) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 nodes, got {n}")));
        }
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::InvalidGrid(format!("need a < b, got [{a}, {b}]")));
        }
        Ok(Self { n, a, b })
    }

    /// Grid on the unit interval.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(n, T::zero(), T::one())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn a(&self) -> T {
        self.a
    }

    #[inline]
    pub fn b(&self) -> T {
        self.b
    }

    #[inline]
    pub fn spacing(&self) -> T {
        (self.b - self.a) / T::from_usize_lossy(self.n - 1)
    }

    /// Node `i`; the last node is `b` exactly.
    #[inline]
    pub fn point(&self, i: usize) -> T {
        debug_assert!(i < self.n);
        if i == self.n - 1 {
            self.b
        } else {
            self.a + T::from_usize_lossy(i) * self.spacing()
        }
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    pub fn contains(&self, t: T) -> bool {
        t >= self.a && t <= self.b
    }

    pub fn same_domain(&self, other: &Self) -> bool {
        self.a == other.a && self.b == other.b
    }

    /// Index of the node nearest to `t` (clamped to the grid).
    pub fn nearest_index(&self, t: T) -> usize {
        let s = ((t - self.a) / self.spacing()).round();
        let last = T::from_usize_lossy(self.n - 1);
        s.max(T::zero()).min(last).to_usize().unwrap_or(0)
    }

    /// Interval `[i, i+1]` containing `t` and the linear weight of node `i+1`.
    /// Nodes hit exactly get weight 0 or 1, so interpolation is exact there.
    fn locate(&self, t: T) -> (usize, T) {
        let h = self.spacing();
        let s = (t - self.a) / h;
        let mut i = s.floor().to_usize().unwrap_or(0).min(self.n - 2);
        // floor can land one cell off near nodes due to rounding
        if t < self.point(i) && i > 0 {
            i -= 1;
        } else if t >= self.point(i + 1) && i + 2 < self.n {
            i += 1;
        }
        let left = self.point(i);
        let right = self.point(i + 1);
        if t == left {
            (i, T::zero())
        } else if t == right {
            (i, T::one())
        } else {
            (i, (t - left) / (right - left))
        }
    }
}

/// Real-valued nodal function on a [`Grid1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: Grid1D<T>,
    values: Vec<T>,
}

impl<T: Real> Field<T> {
    pub fn new(grid: Grid1D<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::LengthMismatch { expected: grid.n(), got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite field value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    /// Builds a field without the finiteness scan. Used on hot paths where
    /// the values come from finite arithmetic on finite inputs.
    pub(crate) fn from_parts(grid: Grid1D<T>, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        Self { grid, values }
    }

    pub fn zeros(grid: Grid1D<T>) -> Self {
        Self::constant(grid, T::zero())
    }

    pub fn constant(grid: Grid1D<T>, c: T) -> Self {
        Self { grid, values: vec![c; grid.n()] }
    }

    pub fn from_fn(grid: Grid1D<T>, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(grid, grid.points().into_iter().map(f).collect())
    }

    #[inline]
    pub fn grid(&self) -> &Grid1D<T> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    /// Piecewise-linear interpolation at `t`.
    pub fn eval_at(&self, t: T) -> Result<T> {
        if !self.grid.contains(t) {
            return Err(Error::OutOfDomain {
                t: t.as_f64(),
                a: self.grid.a().as_f64(),
                b: self.grid.b().as_f64(),
            });
        }
        let (i, w) = self.grid.locate(t);
        Ok(if w == T::zero() {
            self.values[i]
        } else if w == T::one() {
            self.values[i + 1]
        } else {
            (T::one() - w) * self.values[i] + w * self.values[i + 1]
        })
    }

    /// Piecewise-linear interpolation onto `target`, which must share the domain.
    pub fn regrid(&self, target: &Grid1D<T>) -> Result<Self> {
        if !self.grid.same_domain(target) {
            return Err(Error::GridMismatch(format!(
                "cannot regrid [{}, {}] onto [{}, {}]",
                self.grid.a(),
                self.grid.b(),
                target.a(),
                target.b()
            )));
        }
        if self.grid == *target {
            return Ok(self.clone());
        }
        let values = target
            .points()
            .into_iter()
            .map(|t| self.eval_at(t))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_parts(*target, values))
    }

    pub fn ensure_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "{} nodes on [{}, {}] vs {} nodes on [{}, {}]",
                self.grid.n(),
                self.grid.a(),
                self.grid.b(),
                other.grid.n(),
                other.grid.a(),
                other.grid.b()
            )));
        }
        Ok(())
    }

    /// `alpha * self + beta * other`.
    pub fn lincomb(&self, alpha: T, other: &Self, beta: T) -> Result<Self> {
        self.ensure_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&x, &y)| alpha * x + beta * y)
            .collect();
        Ok(Self::from_parts(self.grid, values))
    }

    pub fn scaled(&self, alpha: T) -> Self {
        Self::from_parts(self.grid, self.values.iter().map(|&v| alpha * v).collect())
    }

    /// Maximum absolute nodal difference.
    pub fn sup_distance(&self, other: &Self) -> Result<T> {
        self.ensure_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs())))
    }
}

/// Point observations `y_j` at `locations_j` with iid noise of standard deviation `noise_sd`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet<T> {
    locations: Vec<T>,
    y: Vec<T>,
    noise_sd: T,
}

impl<T: Real> ObservationSet<T> {
    pub fn new(locations: Vec<T>, y: Vec<T>, noise_sd: T) -> Result<Self> {
        if locations.len() != y.len() {
            return Err(Error::LengthMismatch { expected: locations.len(), got: y.len() });
        }
        if !(noise_sd > T::zero() && noise_sd.is_finite()) {
            return Err(Error::InvalidArgument(format!("noise_sd must be positive, got {noise_sd}")));
        }
        if locations.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("locations must be strictly increasing".into()));
        }
        if locations.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite observation".into()));
        }
        Ok(Self { locations, y, noise_sd })
    }

    pub fn locations(&self) -> &[T] {
        &self.locations
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }

    pub fn noise_sd(&self) -> T {
        self.noise_sd
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Same locations and data with a different noise level.
    pub fn with_noise_sd(&self, noise_sd: T) -> Result<Self> {
        Self::new(self.locations.clone(), self.y.clone(), noise_sd)
    }
}
