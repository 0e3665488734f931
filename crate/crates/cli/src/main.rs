//! `nanosieve` command-line tool: two-color nanofiber trapping and
//! transport simulations with reproducible, manifest-audited outputs.
//!
//! Exit codes: 0 on success, 2 for configuration/input errors, 3 for
//! numeric failures.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nanosieve::Error;

use config::Config;
use manifest::RunManifest;

#[derive(Parser)]
#[command(name = "nanosieve", version, about = "Two-color nanofiber optical sieve simulator")]
struct Cli {
    /// TOML configuration file; omitted keys take built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master random seed (overrides sim.seed from the config).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Surface-intensity-vs-diameter curves for the two wavelengths.
    Modes,
    /// Per-mW waist forces and force ratio R vs particle diameter.
    Forces,
    /// Net force profile, potential and trap report along the taper.
    Trap {
        /// Override beams.p1_mw.
        #[arg(long)]
        p1_mw: Option<f64>,
        /// Override beams.p2_mw.
        #[arg(long)]
        p2_mw: Option<f64>,
        /// Override particle.diameter_nm.
        #[arg(long)]
        diameter_nm: Option<f64>,
    },
    /// Brownian-dynamics ensemble and synthetic kymograph.
    Simulate {
        #[arg(long)]
        p1_mw: Option<f64>,
        #[arg(long)]
        p2_mw: Option<f64>,
    },
    /// Peak extraction, Hough lines and trajectories from a kymograph file.
    Analyze {
        /// Kymograph CSV or PGM (chosen by extension).
        #[arg(long)]
        input: PathBuf,
        /// Override render.pixel_pitch_um for calibration.
        #[arg(long)]
        pixel_pitch_um: Option<f64>,
        /// Override render.frame_period_s for calibration.
        #[arg(long)]
        frame_period_s: Option<f64>,
    },
    /// P1 power sweep: simulate + analyze per point, aggregate summary.
    Sweep,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Parse { .. } | Error::WavelengthRange(_) => 2,
        _ => 3,
    }
}

fn run(cli: Cli) -> nanosieve::Result<()> {
    let mut cfg = Config::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.sim.seed = seed;
    }
    let out = &cli.out;
    std::fs::create_dir_all(out)?;

    let (name, files) = match &cli.command {
        Command::Modes => ("modes", commands::cmd_modes(&cfg, out)?),
        Command::Forces => ("forces", commands::cmd_forces(&cfg, out)?),
        Command::Trap {
            p1_mw,
            p2_mw,
            diameter_nm,
        } => {
            if let Some(v) = p1_mw {
                cfg.beams.p1_mw = *v;
            }
            if let Some(v) = p2_mw {
                cfg.beams.p2_mw = *v;
            }
            if let Some(v) = diameter_nm {
                cfg.particle.diameter_nm = *v;
            }
            ("trap", commands::cmd_trap(&cfg, out)?)
        }
        Command::Simulate { p1_mw, p2_mw } => {
            if let Some(v) = p1_mw {
                cfg.beams.p1_mw = *v;
            }
            if let Some(v) = p2_mw {
                cfg.beams.p2_mw = *v;
            }
            ("simulate", commands::cmd_simulate(&cfg, out)?)
        }
        Command::Analyze {
            input,
            pixel_pitch_um,
            frame_period_s,
        } => {
            if let Some(v) = pixel_pitch_um {
                cfg.render.pixel_pitch_um = *v;
            }
            if let Some(v) = frame_period_s {
                cfg.render.frame_period_s = *v;
            }
            ("analyze", commands::cmd_analyze(&cfg, input, out)?)
        }
        Command::Sweep => ("sweep", commands::cmd_sweep(&cfg, out)?),
    };

    let mut manifest = RunManifest::new(name, cfg.sim.seed, &cfg);
    for file in &files {
        manifest.record(out, file)?;
    }
    manifest.write(out)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
