//! `tgprior` experiment driver.

mod commands;
mod config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::commands::Ctx;
use crate::config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "tgprior", version, about = "TV-Gaussian posterior sampling experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Extra `key=value` override, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write the truth and a synthetic observation set.
    Generate(Common),
    /// Run a chain on existing observations and export diagnostics.
    Sample(Common),
    /// Exact Gaussian-process posterior for each configured length scale.
    GpExact(Common),
    /// Posterior means across grid sizes and their pairwise differences.
    MeshStudy(Common),
    /// Render CSV outputs as an SVG line chart.
    Render {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        title: Option<String>,
    },
}

fn context(c: Common) -> Result<Ctx> {
    // Overrides are appended to the file so that `problem` still selects the defaults.
    let mut text = match &c.config {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?,
        None => String::new(),
    };
    for kv in &c.set {
        if !kv.contains('=') || kv.contains('\n') {
            bail!("--set expects KEY=VALUE, got '{kv}'");
        }
        text.push('\n');
        text.push_str(kv);
    }
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(Ctx { cfg, out: c.out })
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Generate(c) => commands::generate(&context(c)?),
        Cmd::Sample(c) => commands::sample(&context(c)?),
        Cmd::GpExact(c) => commands::gp_exact(&context(c)?),
        Cmd::MeshStudy(c) => commands::mesh_study(&context(c)?),
        Cmd::Render { inputs, out, title } => {
            let path = commands::render(&inputs, &out, title.as_deref())?;
            println!("{}", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
