use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use log::{info, warn};
use tgprior::experiments;
use tgprior::forward::generate_data;
use tgprior::io;
use tgprior::*;

use crate::config::{ExperimentConfig, Init, Problem};
use crate::svg::{Band, Chart, Series};

pub struct Ctx {
    pub cfg: ExperimentConfig,
    pub out: PathBuf,
}

impl Ctx {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write(&self, name: &str, text: &str) -> Result<()> {
        let p = self.path(name);
        io::write_text(&p, text).with_context(|| format!("writing {}", p.display()))
    }

    fn echo_config(&self) -> Result<()> {
        self.write("config.resolved", &self.cfg.resolved())
    }

    fn observations(&self) -> Result<Observations64> {
        let p = self.cfg.data.clone().unwrap_or_else(|| self.path("observations.csv"));
        let text = io::read_text(&p)?;
        io::parse_observations(&text).with_context(|| format!("reading {}", p.display()))
    }

    fn grid(&self, n: usize) -> Result<Grid64> {
        Ok(Grid64::unit(n)?)
    }

    fn kernel(&self) -> Result<Kernel64> {
        Ok(SqExpKernel::new(self.cfg.gamma, self.cfg.d)?)
    }

    fn heat_model(&self, obs_times: Vec<f64>) -> Result<HeatModel<f64>> {
        let setup = experiments::manufactured_heat_setup(self.cfg.nx, self.cfg.nt, obs_times)
            .with_convention(self.cfg.convention);
        Ok(HeatModel::new(setup)?)
    }

    fn forward_model(&self, grid: &Grid64, locations: Vec<f64>) -> Result<Box<dyn ForwardModel<f64>>> {
        Ok(match self.cfg.problem {
            Problem::HeatRobin => Box::new(self.heat_model(locations)?),
            Problem::Denoising | Problem::TvDenoising => Box::new(DenoisingModel::new(locations, grid)?),
        })
    }
}

fn real(v: f64) -> String {
    io::fmt_real(v)
}

pub fn generate(ctx: &Ctx) -> Result<()> {
    let cfg = &ctx.cfg;
    let grid = ctx.grid(cfg.n)?;
    let (truth, locations) = match cfg.problem {
        Problem::HeatRobin => (experiments::robin_truth(&grid), experiments::heat_obs_times(experiments::robin::N_OBS)),
        _ => (experiments::denoising_truth(&grid), experiments::denoising_locations()),
    };
    let model = ctx.forward_model(&grid, locations)?;
    let obs = generate_data(model.as_ref(), &truth, cfg.noise_sd, &mut seeded_rng(cfg.seed))?;
    ctx.write("truth.csv", &io::field_csv(&truth))?;
    ctx.write("observations.csv", &io::observations_csv(&obs))?;
    ctx.echo_config()?;
    info!("wrote {} observations to {}", obs.len(), ctx.out.display());
    Ok(())
}

fn initial_state(ctx: &Ctx, grid: &Grid64, factor: &CholeskyFactor<f64>, obs: &Observations64) -> Result<Field64> {
    Ok(match ctx.cfg.init {
        Init::Zero => Field::zeros(*grid),
        Init::Prior => sample_prior(factor, &mut seeded_rng(ctx.cfg.seed.wrapping_add(1))),
        Init::Interpolant => {
            if ctx.cfg.problem == Problem::HeatRobin {
                bail!("init = interpolant is only meaningful for the denoising problems");
            }
            experiments::data_interpolant(obs, grid)?
        }
    })
}

pub fn sample(ctx: &Ctx) -> Result<()> {
    let cfg = &ctx.cfg;
    let obs = ctx.observations()?;
    let grid = ctx.grid(cfg.n)?;
    let factor = prior_factor(&ctx.kernel()?, &grid)?;
    let model = ctx.forward_model(&grid, obs.locations().to_vec())?;
    let misfit = DataMisfit::new(model.as_ref(), &obs).context("observations do not match the configured problem")?;
    let tv = Some(TvTerm::new(cfg.lambda)?);
    let post = match cfg.sampler {
        SamplerKind::RwTv => Posterior::lebesgue(&misfit, tv),
        _ => Posterior::new(&factor, &misfit, tv),
    };

    let mut sc = SamplerConfig::new(cfg.beta, cfg.k, cfg.n_samples, cfg.burn_in, cfg.thin, cfg.seed);
    sc.rw_step_sd = cfg.rw_step_sd;
    sc.trace_nodes = cfg.probes.iter().map(|&t| grid.nearest_index(t)).collect();
    sc.trace_nodes.dedup();

    std::fs::create_dir_all(&ctx.out).with_context(|| format!("creating {}", ctx.out.display()))?;
    let samples_path = ctx.path("samples.csv");
    let mut w = BufWriter::new(File::create(&samples_path).with_context(|| format!("creating {}", samples_path.display()))?);
    w.write_all(io::samples_csv_header(&grid).as_bytes())?;
    let mut write_err = None;
    let init = initial_state(ctx, &grid, &factor, &obs)?;
    info!("running {} for {} + {} steps", cfg.sampler.name(), cfg.burn_in, cfg.n_samples);
    let run = run_chain_with(cfg.sampler, init, &sc, &post, |_, s| {
        if write_err.is_none() {
            if let Err(e) = w.write_all(io::samples_csv_row(s).as_bytes()) {
                write_err = Some(e);
            }
        }
    });
    if let Some(e) = write_err {
        return Err(e).context("writing samples");
    }
    w.flush()?;
    let out = run.map_err(|a| anyhow::anyhow!("{a}"))?;

    let mut stats = format!("sampler = {}\n{}", cfg.sampler.name(), out.stats.summary_text());
    if !stats.ends_with('\n') {
        stats.push('\n');
    }
    ctx.write("stats.txt", &stats)?;
    ctx.echo_config()?;

    match diagnostics::summarize(&out) {
        Ok(s) => ctx.write("summary.csv", &io::summary_csv(&s)?)?,
        Err(e) => warn!("summary skipped: {e}"),
    }
    for (&t, &node) in cfg.probes.iter().zip(&sc.trace_nodes) {
        let trace = out.trace(node).expect("traced node");
        let lag = cfg.acf_max_lag.min(trace.len().saturating_sub(1));
        match diagnostics::acf(trace, lag) {
            Ok(rho) => ctx.write(&format!("acf_t{t}.csv"), &io::acf_csv(&rho))?,
            Err(e) => warn!("ACF at t = {t} skipped: {e}"),
        }
    }
    match diagnostics::per_node_ess(&out.samples, cfg.ess_lag) {
        Ok(rows) => ctx.write("ess.csv", &io::ess_csv(&grid, &rows, cfg.ess_lag)?)?,
        Err(e) => warn!("per-node ESS skipped: {e}"),
    }
    println!("{}", stats.trim_end().replace('\n', "; "));
    Ok(())
}

pub fn gp_exact(ctx: &Ctx) -> Result<()> {
    let cfg = &ctx.cfg;
    let obs = ctx.observations()?;
    let grid = ctx.grid(cfg.n)?;
    for &d in &cfg.gp_lengths {
        let kernel = SqExpKernel::new(cfg.gamma, d)?;
        let post = gp_posterior_exact(&kernel, &grid, &obs)?;
        ctx.write(&format!("gp_d{d}.csv"), &io::gp_csv(&post)?)?;
    }
    ctx.echo_config()
}

fn mesh_chain(ctx: &Ctx, obs: &Observations64, n: usize, kind: SamplerKind, fine: &Grid64) -> Result<Field64> {
    let cfg = &ctx.cfg;
    let grid = ctx.grid(n)?;
    let factor = prior_factor(&ctx.kernel()?, &grid)?;
    let model = DenoisingModel::new(obs.locations().to_vec(), &grid)?;
    let misfit = DataMisfit::new(&model, obs)?;
    let tv = Some(TvTerm::new(cfg.lambda)?);
    let post = match kind {
        SamplerKind::RwTv => Posterior::lebesgue(&misfit, tv),
        _ => Posterior::new(&factor, &misfit, tv),
    };
    let seed = cfg.seed.wrapping_add(n as u64);
    let mut sc = SamplerConfig::new(cfg.beta, cfg.k, cfg.n_samples, cfg.burn_in, cfg.n_samples.max(1), seed);
    sc.rw_step_sd = cfg.mesh_rw_step_times_n / n as f64;
    let init = experiments::data_interpolant(obs, &grid)?;
    let out = run_chain(kind, init, &sc, &post).map_err(|a| anyhow::anyhow!("N = {n}: {a}"))?;
    info!("{} N = {n}: acceptance {:.3}", kind.name(), out.stats.outer_accept_rate());
    Ok(out.mean().regrid(fine)?)
}

/// Pairwise sup-norm differences and their maximum.
fn pairwise(sizes: &[usize], means: &[Field64]) -> Result<(Vec<(usize, usize, f64)>, f64)> {
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for i in 0..means.len() {
        for j in i + 1..means.len() {
            let d = means[i].sup_distance(&means[j])?;
            worst = worst.max(d);
            rows.push((sizes[i], sizes[j], d));
        }
    }
    Ok((rows, worst))
}

fn means_csv(fine: &Grid64, sizes: &[usize], means: &[Field64]) -> String {
    let mut s = String::from("t");
    for n in sizes {
        s.push_str(&format!(",N{n}"));
    }
    s.push('\n');
    for (i, t) in fine.points().into_iter().enumerate() {
        s.push_str(&real(t));
        for m in means {
            s.push(',');
            s.push_str(&real(m.values()[i]));
        }
        s.push('\n');
    }
    s
}

pub fn mesh_study(ctx: &Ctx) -> Result<()> {
    let cfg = &ctx.cfg;
    ensure!(cfg.grid_sizes.len() >= 2, "mesh-study needs at least 2 grid sizes, got {}", cfg.grid_sizes.len());
    ensure!(cfg.problem != Problem::HeatRobin, "mesh-study runs the denoising problem only");
    let obs = ctx.observations()?;
    let fine = ctx.grid(*cfg.grid_sizes.iter().max().expect("non-empty"))?;

    let mut kinds = vec![(SamplerKind::Pcn, "tg")];
    if cfg.mesh_tv {
        kinds.push((SamplerKind::RwTv, "tv"));
    }
    let mut report = String::new();
    for (kind, tag) in kinds {
        let means: Vec<Field64> = std::thread::scope(|s| {
            let handles: Vec<_> = cfg
                .grid_sizes
                .iter()
                .map(|&n| {
                    let (obs, fine) = (&obs, &fine);
                    s.spawn(move || mesh_chain(ctx, obs, n, kind, fine))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("chain thread panicked")).collect::<Result<Vec<_>>>()
        })?;
        ctx.write(&format!("mesh_{tag}.csv"), &means_csv(&fine, &cfg.grid_sizes, &means))?;
        let (rows, worst) = pairwise(&cfg.grid_sizes, &means)?;
        for (a, b, d) in rows {
            report.push_str(&format!("{tag} {a}/{b} sup_diff={}\n", real(d)));
        }
        report.push_str(&format!("{tag} max sup_diff={}\n", real(worst)));
    }
    ctx.write("mesh_report.txt", &report)?;
    ctx.echo_config()?;
    print!("{report}");
    Ok(())
}

pub fn render(inputs: &[PathBuf], out: &Path, title: Option<&str>) -> Result<PathBuf> {
    ensure!(!inputs.is_empty(), "render needs at least one CSV");
    let mut chart = Chart::default();
    for path in inputs {
        let text = io::read_text(path)?;
        let (header, rows) = io::parse_table::<f64>(&text).with_context(|| format!("reading {}", path.display()))?;
        ensure!(!rows.is_empty(), "{}: no data rows", path.display());
        ensure!(header.len() >= 2, "{}: need at least two columns", path.display());
        let col = |name: &str| header.iter().position(|h| h == name);
        let x: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let band = match (col("ci_lo"), col("ci_hi")) {
            (Some(lo), Some(hi)) => {
                chart.bands.push(Band {
                    x: x.clone(),
                    lo: rows.iter().map(|r| r[lo]).collect(),
                    hi: rows.iter().map(|r| r[hi]).collect(),
                });
                true
            }
            _ => false,
        };
        for (j, name) in header.iter().enumerate().skip(1) {
            if band && matches!(name.as_str(), "ci_lo" | "ci_hi" | "sd") {
                continue;
            }
            let label = if inputs.len() > 1 { format!("{stem}:{name}") } else { name.clone() };
            chart.series.push(Series { label, x: x.clone(), y: rows.iter().map(|r| r[j]).collect() });
        }
        if chart.x_label.is_empty() {
            chart.x_label = header[0].clone();
        }
    }
    let first = inputs[0].file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "plot".into());
    chart.title = title.map(str::to_string).unwrap_or_else(|| first.clone());
    let target = out.join(format!("{first}.svg"));
    io::write_text(&target, &chart.render())?;
    Ok(target)
}
