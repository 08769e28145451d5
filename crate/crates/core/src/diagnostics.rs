//! Chain summaries and mixing diagnostics.
//!
//! Conventions, fixed so numbers are comparable across runs:
//! * autocorrelations use the biased estimator (lag-`l` sum divided by `N`)
//!   of the mean-centred series;
//! * the integrated autocorrelation time sums the autocorrelations from lag 1
//!   up to, but excluding, the first negative one;
//! * `ESS = N / (1 + 2 tau)`;
//! * quantiles interpolate linearly between order statistics at position
//!   `p (n - 1)`.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::samplers::ChainOutput;
use crate::scalar::Real;

fn centred<T: Real>(series: &[T]) -> Result<(Vec<T>, T)> {
    if series.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, have: series.len() });
    }
    let n = T::from_usize_lossy(series.len());
    let mean = series.iter().copied().sum::<T>() / n;
    let x: Vec<T> = series.iter().map(|&v| v - mean).collect();
    let c0 = x.iter().map(|&v| v * v).sum::<T>() / n;
    if !(c0 > T::zero()) {
        return Err(Error::ZeroVariance);
    }
    Ok((x, c0))
}

/// Autocorrelations at lags `0..=max_lag` by direct summation.
pub fn acf<T: Real>(series: &[T], max_lag: usize) -> Result<Vec<T>> {
    if max_lag >= series.len() {
        return Err(Error::InvalidArgument(format!(
            "max_lag {max_lag} must be below the series length {}",
            series.len()
        )));
    }
    let (x, c0) = centred(series)?;
    let n = T::from_usize_lossy(x.len());
    let mut out = Vec::with_capacity(max_lag + 1);
    out.push(T::one());
    for lag in 1..=max_lag {
        let s = x[..x.len() - lag].iter().zip(&x[lag..]).map(|(&a, &b)| a * b).sum::<T>();
        out.push(s / n / c0);
    }
    Ok(out)
}

/// Autocorrelations at every lag `0..N`, computed with a zero-padded FFT.
pub fn acf_all<T: Real>(series: &[T]) -> Result<Vec<T>> {
    let (x, c0) = centred(series)?;
    let n = x.len();
    let m = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<T>> = x.iter().map(|&v| Complex::new(v, T::zero())).collect();
    buf.resize(m, Complex::new(T::zero(), T::zero()));
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex::new(c.norm_sqr(), T::zero());
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    let scale = T::from_usize_lossy(m) * T::from_usize_lossy(n) * c0;
    let mut out: Vec<T> = buf[..n].iter().map(|c| c.re / scale).collect();
    out[0] = T::one();
    Ok(out)
}

/// Integrated autocorrelation time, truncated at the first negative lag.
pub fn iact<T: Real>(series: &[T]) -> Result<T> {
    let rho = acf_all(series)?;
    let tau = rho[1..].iter().take_while(|&&r| r >= T::zero()).copied().sum::<T>();
    Ok(tau.max(T::zero()))
}

pub fn ess_from_iact<T: Real>(n: usize, tau: T) -> T {
    T::from_usize_lossy(n) / (T::one() + T::lit(2.0) * tau)
}

pub fn ess<T: Real>(series: &[T]) -> Result<T> {
    Ok(ess_from_iact(series.len(), iact(series)?))
}

/// Linear interpolation between order statistics of an ascending slice.
pub fn quantile_sorted<T: Real>(sorted: &[T], p: T) -> T {
    debug_assert!(!sorted.is_empty());
    let pos = p.max(T::zero()).min(T::one()) * T::from_usize_lossy(sorted.len() - 1);
    let lo = pos.floor().to_usize().unwrap_or(0).min(sorted.len() - 1);
    let hi = (lo + 1).min(sorted.len() - 1);
    let w = pos - T::from_usize_lossy(lo);
    if w == T::zero() {
        sorted[lo]
    } else {
        sorted[lo] + w * (sorted[hi] - sorted[lo])
    }
}

/// Values of one node across stored samples.
pub fn node_series<T: Real>(samples: &[Field<T>], node: usize) -> Vec<T> {
    samples.iter().map(|s| s.values()[node]).collect()
}

/// Pointwise posterior summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary<T> {
    pub mean: Field<T>,
    pub sd: Field<T>,
    pub ci_lo: Field<T>,
    pub ci_hi: Field<T>,
    /// Pointwise median of the stored samples.
    pub median: Field<T>,
}

pub const MIN_SAMPLES_FOR_QUANTILES: usize = 40;

/// Mean and sd from the running moments; 2.5 % / 97.5 % quantiles and median
/// from the stored samples.
pub fn summarize<T: Real>(output: &ChainOutput<T>) -> Result<Summary<T>> {
    let have = output.samples.len();
    if have < MIN_SAMPLES_FOR_QUANTILES {
        return Err(Error::TooFewSamples { needed: MIN_SAMPLES_FOR_QUANTILES, have });
    }
    let grid = *output.samples[0].grid();
    let n = grid.n();
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    let mut med = Vec::with_capacity(n);
    for node in 0..n {
        let mut col = node_series(&output.samples, node);
        col.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
        lo.push(quantile_sorted(&col, T::lit(0.025)));
        hi.push(quantile_sorted(&col, T::lit(0.975)));
        med.push(quantile_sorted(&col, T::lit(0.5)));
    }
    Ok(Summary {
        mean: output.mean(),
        sd: output.sd(),
        ci_lo: Field::new(grid, lo)?,
        ci_hi: Field::new(grid, hi)?,
        median: Field::new(grid, med)?,
    })
}

/// Per-node ESS and lag-`lag` autocorrelation over the stored samples.
pub fn per_node_ess<T: Real>(samples: &[Field<T>], lag: usize) -> Result<Vec<(T, T)>> {
    let Some(first) = samples.first() else {
        return Err(Error::TooFewSamples { needed: 2, have: 0 });
    };
    (0..first.len())
        .map(|node| {
            let s = node_series(samples, node);
            let rho = acf_all(&s)?;
            let at_lag = rho.get(lag).copied().unwrap_or(T::zero());
            let tau = rho[1..].iter().take_while(|&&r| r >= T::zero()).copied().sum::<T>();
            Ok((ess_from_iact(s.len(), tau), at_lag))
        })
        .collect()
}
