use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tap_core::{Vector3, MM};
use tap_gateway::commands::{cmd_field, cmd_profile, cmd_replay, digest_line, FieldRequest, ProfileKind, UsageError};
use tap_gateway::config::{load_config_file, CONFIG_ENV};
use tap_gateway::serve_session;

/// Airborne-ultrasound tap simulator.
#[derive(Debug, Parser)]
#[command(name = "tapsim", version)]
struct Cli {
    /// TOML configuration file; built-in defaults when absent.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Focus the rig and write a field slice as CSV and PGM.
    Field {
        /// Focus point in mm.
        #[arg(long, value_parser = parse_triple, default_value = "0,0,200")]
        focus: (f64, f64, f64),
        /// Samples along u and v, and spacing in mm.
        #[arg(long, value_parser = parse_grid, default_value = "101,101,2")]
        grid: (usize, usize, f64),
        /// Output prefix; writes PREFIX.csv and PREFIX.pgm.
        #[arg(long, default_value = "field")]
        out: PathBuf,
    },
    /// Sample one modulation profile into a waveform CSV.
    Profile {
        #[arg(value_enum)]
        kind: Kind,
        /// Sample rate in Hz; defaults to the configured control rate.
        #[arg(long)]
        rate: Option<f64>,
        /// Duration in seconds.
        #[arg(long, default_value_t = 0.2)]
        duration: f64,
        #[arg(long, default_value = "profile.csv")]
        out: PathBuf,
    },
    /// Replay a finger trace CSV through the tap engine.
    Replay {
        trace: PathBuf,
        /// Output prefix; writes PREFIX.frames.csv and PREFIX.phases.csv.
        #[arg(long, default_value = "replay")]
        out: PathBuf,
        #[arg(long)]
        rate: Option<f64>,
    },
    /// Serve live sessions over WebSocket.
    Serve {
        #[arg(long, default_value_t = 8765)]
        port: u16,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Am,
    Lm,
    Stationary,
}

impl From<Kind> for ProfileKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Am => ProfileKind::Am,
            Kind::Lm => ProfileKind::Lm,
            Kind::Stationary => ProfileKind::Stationary,
        }
    }
}

fn numbers(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("{p:?} is not a number")))
        .collect::<Result<_, _>>()?;
    if v.len() != n || !v.iter().all(|x| x.is_finite()) {
        return Err(format!("expected {n} comma-separated finite numbers"));
    }
    Ok(v)
}

fn parse_triple(s: &str) -> Result<(f64, f64, f64), String> {
    let v = numbers(s, 3)?;
    Ok((v[0], v[1], v[2]))
}

fn parse_grid(s: &str) -> Result<(usize, usize, f64), String> {
    let v = numbers(s, 3)?;
    let count = |x: f64| {
        (x >= 1.0 && x.fract() == 0.0)
            .then_some(x as usize)
            .ok_or_else(|| format!("grid counts must be positive integers, got {x}"))
    };
    Ok((count(v[0])?, count(v[1])?, v[2]))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = load_config_file(cli.config.as_deref()).map_err(|e| UsageError(e.to_string()))?;
    match cli.command {
        Command::Field { focus, grid, out } => {
            let req = FieldRequest {
                focus: Vector3::new(focus.0, focus.1, focus.2) * MM,
                nu: grid.0,
                nv: grid.1,
                spacing: grid.2 * MM,
            };
            let r = cmd_field(&config, &req, &out)?;
            let m = r.metrics;
            let mm = |w: Option<f64>| w.map_or("none".to_string(), |w| format!("{:.3}", w / MM));
            println!("peak_Pa {:.6e}", m.peak_value);
            println!(
                "peak_mm {:.3},{:.3},{:.3}",
                m.peak_location.x / MM,
                m.peak_location.y / MM,
                m.peak_location.z / MM
            );
            println!("fwhm_u_mm {}", mm(m.fwhm_u));
            println!("fwhm_v_mm {}", mm(m.fwhm_v));
            println!("wrote {} {}", r.csv.display(), r.pgm.display());
        }
        Command::Profile {
            kind,
            rate,
            duration,
            out,
        } => {
            let s = cmd_profile(&config, kind.into(), rate.unwrap_or(config.control_rate), duration, &out)?;
            println!("wrote {} ({} samples)", out.display(), s.samples.len());
        }
        Command::Replay { trace, out, rate } => {
            let r = cmd_replay(&config, &trace, &out, rate)?;
            println!("{}", digest_line(&r.digest));
            println!(
                "wrote {} {} ({} frames, {} transitions)",
                r.frames.display(),
                r.phases.display(),
                r.rendered.frames.len(),
                r.rendered.transitions.len()
            );
        }
        Command::Serve { port } => {
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(serve_session(config, port))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
