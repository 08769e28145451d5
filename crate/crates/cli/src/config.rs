//! Flat `key = value` experiment configuration.
//!
//! Blank lines and `#` comments are ignored. `problem` selects the defaults;
//! every other key overrides one of them. Unknown keys are an error.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use tgprior::experiments::{denoising, robin};
use tgprior::{BoundaryConvention, SamplerKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    Denoising,
    HeatRobin,
    TvDenoising,
}

impl Problem {
    pub fn name(self) -> &'static str {
        match self {
            Problem::Denoising => "denoising",
            Problem::HeatRobin => "heat-robin",
            Problem::TvDenoising => "tv-denoising",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "denoising" => Problem::Denoising,
            "heat-robin" => Problem::HeatRobin,
            "tv-denoising" => Problem::TvDenoising,
            other => bail!("unknown problem '{other}' (denoising | heat-robin | tv-denoising)"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    Zero,
    Interpolant,
    Prior,
}

impl Init {
    fn name(self) -> &'static str {
        match self {
            Init::Zero => "zero",
            Init::Interpolant => "interpolant",
            Init::Prior => "prior",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: Problem,
    pub n: usize,
    pub gamma: f64,
    pub d: f64,
    pub lambda: f64,
    pub noise_sd: f64,
    pub sampler: SamplerKind,
    pub beta: f64,
    pub k: usize,
    pub n_samples: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub rw_step_sd: f64,
    pub init: Init,
    pub nx: usize,
    pub nt: usize,
    pub convention: BoundaryConvention,
    pub probes: Vec<f64>,
    pub acf_max_lag: usize,
    pub ess_lag: usize,
    pub gp_lengths: Vec<f64>,
    pub grid_sizes: Vec<usize>,
    pub mesh_tv: bool,
    /// Random-walk step for TV chains in the mesh study is this over `N`.
    pub mesh_rw_step_times_n: f64,
    pub data: Option<PathBuf>,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn defaults(problem: Problem) -> Self {
        let base = Self {
            problem,
            n: denoising::GRID_SIZES[0],
            gamma: denoising::GAMMA,
            d: denoising::D,
            lambda: denoising::LAMBDA,
            noise_sd: denoising::NOISE_SD,
            sampler: SamplerKind::Pcn,
            beta: 0.01,
            k: 10,
            n_samples: 200_000,
            burn_in: 50_000,
            thin: 100,
            rw_step_sd: 0.01,
            init: Init::Interpolant,
            nx: robin::NX,
            nt: robin::NT,
            convention: BoundaryConvention::OutwardNormal,
            probes: vec![0.2, 0.5, 0.8],
            acf_max_lag: 1000,
            ess_lag: 100,
            gp_lengths: denoising::GP_LENGTHS.to_vec(),
            grid_sizes: denoising::GRID_SIZES.to_vec(),
            mesh_tv: false,
            mesh_rw_step_times_n: 0.04,
            data: None,
            seed: 1,
        };
        match problem {
            Problem::Denoising => base,
            Problem::TvDenoising => Self { sampler: SamplerKind::RwTv, mesh_tv: true, ..base },
            Problem::HeatRobin => Self {
                n: robin::GRID_SIZE,
                gamma: robin::GAMMA,
                d: robin::D,
                lambda: robin::LAMBDA,
                noise_sd: robin::NOISE_SD,
                sampler: SamplerKind::Spcn,
                beta: robin::BETA,
                k: robin::INNER_STEPS,
                init: Init::Prior,
                ..base
            },
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .with_context(|| format!("config line {}: expected 'key = value'", idx + 1))?;
            pairs.push((idx + 1, k.trim().to_string(), v.trim().to_string()));
        }
        let problem = match pairs.iter().find(|p| p.1 == "problem") {
            Some((_, _, v)) => Problem::parse(v)?,
            None => Problem::Denoising,
        };
        let mut cfg = Self::defaults(problem);
        for (line, k, v) in &pairs {
            cfg.set(k, v).with_context(|| format!("config line {line}"))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().ok().with_context(|| format!("{key}: cannot parse '{v}'"))
        }
        fn list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
            v.split(',').map(|s| num(key, s.trim())).collect()
        }
        match key {
            "problem" => self.problem = Problem::parse(v)?,
            "n" => self.n = num(key, v)?,
            "gamma" => self.gamma = num(key, v)?,
            "d" => self.d = num(key, v)?,
            "lambda" => self.lambda = num(key, v)?,
            "noise_sd" => self.noise_sd = num(key, v)?,
            "sampler" => self.sampler = v.parse().map_err(|e| anyhow::anyhow!("sampler: {e}"))?,
            "beta" => self.beta = num(key, v)?,
            "k" => self.k = num(key, v)?,
            "n_samples" => self.n_samples = num(key, v)?,
            "burn_in" => self.burn_in = num(key, v)?,
            "thin" => self.thin = num(key, v)?,
            "rw_step_sd" => self.rw_step_sd = num(key, v)?,
            "init" => {
                self.init = match v {
                    "zero" => Init::Zero,
                    "interpolant" => Init::Interpolant,
                    "prior" => Init::Prior,
                    other => bail!("init: unknown '{other}' (zero | interpolant | prior)"),
                }
            }
            "nx" => self.nx = num(key, v)?,
            "nt" => self.nt = num(key, v)?,
            "boundary" => {
                self.convention = match v {
                    "outward" => BoundaryConvention::OutwardNormal,
                    "printed" => BoundaryConvention::Printed,
                    other => bail!("boundary: unknown '{other}' (outward | printed)"),
                }
            }
            "probes" => self.probes = list(key, v)?,
            "acf_max_lag" => self.acf_max_lag = num(key, v)?,
            "ess_lag" => self.ess_lag = num(key, v)?,
            "gp_lengths" => self.gp_lengths = list(key, v)?,
            "grid_sizes" => self.grid_sizes = list(key, v)?,
            "mesh_tv" => self.mesh_tv = num(key, v)?,
            "mesh_rw_step_times_n" => self.mesh_rw_step_times_n = num(key, v)?,
            "data" => self.data = Some(PathBuf::from(v)),
            "seed" => self.seed = num(key, v)?,
            other => bail!("unknown key '{other}'"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma", self.gamma),
            ("d", self.d),
            ("lambda", self.lambda),
            ("noise_sd", self.noise_sd),
            ("rw_step_sd", self.rw_step_sd),
            ("mesh_rw_step_times_n", self.mesh_rw_step_times_n),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                bail!("{name} must be positive, got {v}");
            }
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            bail!("beta must lie in (0, 1], got {}", self.beta);
        }
        if self.n < 2 {
            bail!("n must be at least 2");
        }
        if self.k == 0 || self.thin == 0 {
            bail!("k and thin must be at least 1");
        }
        if self.nx < 3 || self.nt < 2 {
            bail!("nx must be at least 3 and nt at least 2");
        }
        if let Some(p) = self.probes.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            bail!("probe {p} outside [0, 1]");
        }
        if self.gp_lengths.iter().any(|&d| !(d > 0.0)) {
            bail!("gp_lengths must be positive");
        }
        if self.grid_sizes.iter().any(|&n| n < 2) {
            bail!("grid_sizes must be at least 2");
        }
        Ok(())
    }

    /// Every key with its resolved value, in `parse`-compatible form.
    pub fn resolved(&self) -> String {
        fn join<T: ToString>(v: &[T]) -> String {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        }
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("problem", self.problem.name().into());
        kv("n", self.n.to_string());
        kv("gamma", self.gamma.to_string());
        kv("d", self.d.to_string());
        kv("lambda", self.lambda.to_string());
        kv("noise_sd", self.noise_sd.to_string());
        kv("sampler", self.sampler.name().into());
        kv("beta", self.beta.to_string());
        kv("k", self.k.to_string());
        kv("n_samples", self.n_samples.to_string());
        kv("burn_in", self.burn_in.to_string());
        kv("thin", self.thin.to_string());
        kv("rw_step_sd", self.rw_step_sd.to_string());
        kv("init", self.init.name().into());
        kv("nx", self.nx.to_string());
        kv("nt", self.nt.to_string());
        kv(
            "boundary",
            match self.convention {
                BoundaryConvention::OutwardNormal => "outward".into(),
                BoundaryConvention::Printed => "printed".into(),
            },
        );
        kv("probes", join(&self.probes));
        kv("acf_max_lag", self.acf_max_lag.to_string());
        kv("ess_lag", self.ess_lag.to_string());
        kv("gp_lengths", join(&self.gp_lengths));
        kv("grid_sizes", join(&self.grid_sizes));
        kv("mesh_tv", self.mesh_tv.to_string());
        kv("mesh_rw_step_times_n", self.mesh_rw_step_times_n.to_string());
        if let Some(p) = &self.data {
            kv("data", p.display().to_string());
        }
        kv("seed", self.seed.to_string());
        s
    }
}
