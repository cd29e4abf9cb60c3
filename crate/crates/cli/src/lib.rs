//! Command-line surface: `simulate`, `fit`, `calibrate` and
//! `emit-plot-data` over the SQUID-resonator toolkit.

// Validation deliberately uses `!(x > 0.0)` so NaN fails the check too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bundle;
pub mod calibrate;
pub mod config;
pub mod digest;
pub mod error;
pub mod io;
pub mod pipelines;
pub mod plots;
pub mod rng;
pub mod simulate;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

#[derive(Parser)]
#[command(
    name = "squidmw",
    version,
    about = "Forward modeling and parameter extraction for flux-tunable nanobridge-SQUID resonators",
    disable_help_subcommand = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args)]
pub struct CommonArgs {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Random seed for anything stochastic.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for independent per-file work.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate synthetic measurement files for one scenario.
    #[command(allow_negative_numbers = true)]
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// resonance | flux-sweep | temperature-sweep | two-tone | calibration
        #[arg(long)]
        scenario: String,
        /// Complex noise standard deviation on unit-normalized traces.
        #[arg(long, default_value_t = 0.0)]
        noise_sigma: f64,
        /// Samples per trace.
        #[arg(long, default_value_t = 801)]
        points: usize,
        /// Trace span override (Hz).
        #[arg(long)]
        span_hz: Option<f64>,
        #[arg(long, default_value_t = -0.45)]
        flux_min: f64,
        #[arg(long, default_value_t = 0.45)]
        flux_max: f64,
        #[arg(long, default_value_t = 31)]
        flux_steps: usize,
        #[arg(long, default_value_t = 2.4)]
        t_min: f64,
        #[arg(long, default_value_t = 2.8)]
        t_max: f64,
        #[arg(long, default_value_t = 9)]
        t_steps: usize,
        #[arg(long, default_value_t = -45.0)]
        power_min_dbm: f64,
        #[arg(long, default_value_t = -15.0)]
        power_max_dbm: f64,
        #[arg(long, default_value_t = 20)]
        power_steps: usize,
        /// Nonlinear damping injected into two-tone scenarios (Hz/photon).
        #[arg(long, default_value_t = 50.0)]
        kappa_nl_hz: f64,
        /// Repeated traces for the calibration scenario.
        #[arg(long, default_value_t = 200)]
        repeats: usize,
        /// Generate idealized traces without the instrument background.
        #[arg(long, default_value_t = false)]
        no_background: bool,
    },
    /// Run an extraction pipeline over measurement files.
    Fit {
        #[command(flatten)]
        common: CommonArgs,
        /// resonance | flux | thermal | kerr
        #[arg(long)]
        pipeline: String,
        /// Input trace/series files.
        #[arg(required = false)]
        inputs: Vec<PathBuf>,
        /// Resonance-free reference trace divided off before fitting.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Flux-pipeline bundle supplying the kappa_e profile (kerr only).
        #[arg(long)]
        flux_bundle: Option<PathBuf>,
    },
    /// Estimate the input-line attenuation from repeated traces.
    Calibrate {
        #[command(flatten)]
        common: CommonArgs,
        /// Repeated trace files sharing one frequency grid.
        #[arg(required = false)]
        inputs: Vec<PathBuf>,
    },
    /// Write plot-ready CSVs for one figure from a result bundle.
    EmitPlotData {
        #[command(flatten)]
        common: CommonArgs,
        /// Result bundle (result.json) produced by fit or calibrate.
        #[arg(long)]
        bundle: PathBuf,
        /// Figure id: 1f 2c 3a 3b 3c 4b 4c 4d S5 S8 S9 S10 S11 S12
        #[arg(long)]
        figure: String,
    },
}

fn require_config(common: &CommonArgs) -> Result<(RunConfig, String)> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("--config is required for this command".to_string()))?;
    let cfg = RunConfig::load(path)?;
    let digest = crate::digest::digest_file(path)
        .map_err(|e| CliError::Data(format!("cannot digest config: {e}")))?;
    Ok((cfg, digest))
}

/// Execute a parsed command; returns the process exit code.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            common,
            scenario,
            noise_sigma,
            points,
            span_hz,
            flux_min,
            flux_max,
            flux_steps,
            t_min,
            t_max,
            t_steps,
            power_min_dbm,
            power_max_dbm,
            power_steps,
            kappa_nl_hz,
            repeats,
            no_background,
        } => {
            let (cfg, _) = require_config(&common)?;
            let scenario: simulate::Scenario = scenario.parse()?;
            let opts = simulate::SimOptions {
                points,
                noise_sigma,
                span_hz,
                flux_min,
                flux_max,
                flux_steps,
                t_min,
                t_max,
                t_steps,
                power_min_dbm,
                power_max_dbm,
                power_steps,
                kappa_nl_hz,
                repeats,
                with_background: !no_background,
            };
            let files = simulate::run(&cfg, scenario, &opts, common.seed, &common.out)?;
            println!("wrote {} file(s) to {}", files.len(), common.out.display());
            Ok(())
        }
        Command::Fit { common, pipeline, inputs, reference, flux_bundle } => {
            let (cfg, digest) = require_config(&common)?;
            let pipeline: pipelines::Pipeline = pipeline.parse()?;
            if inputs.is_empty() {
                return Err(CliError::Usage("no input files given".to_string()));
            }
            let input = pipelines::PipelineInput {
                config: cfg,
                config_digest: digest,
                inputs,
                reference,
                flux_bundle,
                seed: Some(common.seed),
                jobs: common.jobs.max(1),
            };
            let bundle = pipelines::run(pipeline, &input, &common.out)?;
            println!(
                "wrote result.json and {} companion(s) to {}",
                bundle.companions.len(),
                common.out.display()
            );
            Ok(())
        }
        Command::Calibrate { common, inputs } => {
            let (cfg, digest) = require_config(&common)?;
            if inputs.is_empty() {
                return Err(CliError::Usage("no trace files given".to_string()));
            }
            let bundle =
                calibrate::run(&cfg, &digest, &inputs, Some(common.seed), &common.out)?;
            if let bundle::PipelineResults::Calibration(c) = &bundle.results {
                println!("median attenuation {:.2} dB (+-{} dB band)", c.median_db, c.band_db);
            }
            Ok(())
        }
        Command::EmitPlotData { common, bundle, figure } => {
            let bundle = bundle::ResultBundle::load(&bundle)?;
            let files = plots::emit(&bundle, &figure, &common.out)?;
            println!("wrote {} file(s) to {}", files.len(), common.out.display());
            Ok(())
        }
    }
}
