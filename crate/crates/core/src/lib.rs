//! Bayesian inversion with a TV-Gaussian prior on functions of one variable.
//!
//! The posterior is `exp(-Phi(u) - lambda TV(u))` relative to a Gaussian
//! measure `N(0, C0)` with a squared-exponential covariance. Three Markov
//! chain samplers are provided: preconditioned Crank-Nicolson (`pcn`), its
//! split variant that handles the TV term in an inner loop (`spcn`), and a
//! TV-only random walk (`rw-tv`). Two forward models ship with the crate:
//! pointwise denoising and a heat equation with an unknown Robin coefficient.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the `*64` aliases
//! below cover the common case.

pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod forward;
pub mod gaussian;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod potentials;
pub mod rng;
pub mod samplers;
pub mod scalar;

pub use diagnostics::{acf, ess, iact, summarize, Summary};
pub use error::{Error, Result};
pub use forward::{BoundaryConvention, DenoisingModel, ForwardModel, HeatModel, HeatRobinSetup};
pub use gaussian::{
    build_covariance, cameron_martin_norm_sq, gp_posterior_exact, prior_factor, sample_prior, CholeskyFactor,
    CovarianceOperator, GpPosterior, SqExpKernel,
};
pub use grid::{Field, Grid1D, ObservationSet};
pub use potentials::{data_misfit, omf, regularizer, tv_seminorm, DataMisfit, Misfit, NoData, TvTerm};
pub use rng::{seeded_rng, ChainRng};
pub use samplers::{
    run_chain, run_chain_with, ChainOutput, ChainStats, Posterior, SamplerConfig, SamplerKind,
};
pub use scalar::Real;

pub type Grid64 = Grid1D<f64>;
pub type Field64 = Field<f64>;
pub type Observations64 = ObservationSet<f64>;
pub type Kernel64 = SqExpKernel<f64>;
pub type Config64 = SamplerConfig<f64>;
pub type Grid32 = Grid1D<f32>;
pub type Field32 = Field<f32>;
pub type Observations32 = ObservationSet<f32>;
pub type Kernel32 = SqExpKernel<f32>;
pub type Config32 = SamplerConfig<f32>;
