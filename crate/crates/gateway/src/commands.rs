//! Offline commands behind the `tapsim` subcommands. Each one writes its
//! files and returns a small report; printing is left to the binary.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use thiserror::Error;

use tap_core::engine::{render_trace, Rendered};
use tap_core::field::{focal_metrics, focus_phases, quantize_phases, GridSpec, SpotMetrics};
use tap_core::modulation::{sample_profile, FrameSeries, Profile};
use tap_core::{Vector3, MM};

use crate::config::AppConfig;
use crate::formats::{self, digest, field_csv, field_pgm, frames_csv, parse_trace, phase_log_csv, waveform_csv};

/// Bad command-line input, reported with exit status 2.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct UsageError(pub String);

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Appends `suffix` to the prefix's file name (`out/run` + `.csv`).
pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldRequest {
    /// World-space focus (m).
    pub focus: Vector3,
    pub nu: usize,
    pub nv: usize,
    /// Grid spacing (m).
    pub spacing: f64,
}

impl Default for FieldRequest {
    fn default() -> Self {
        Self {
            focus: Vector3::new(0.0, 0.0, 200.0 * MM),
            nu: 101,
            nv: 101,
            spacing: 2.0 * MM,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FieldReport {
    pub metrics: SpotMetrics,
    pub csv: PathBuf,
    pub pgm: PathBuf,
}

/// Focuses the configured rig, samples a horizontal grid centered on the
/// focus and writes `PREFIX.csv` and `PREFIX.pgm`.
pub fn cmd_field(config: &AppConfig, req: &FieldRequest, prefix: &Path) -> Result<FieldReport> {
    let spec = GridSpec::horizontal(req.focus, req.nu, req.nv, req.spacing).map_err(|e| usage(e.to_string()))?;
    let mut drive = focus_phases(&config.rig, &req.focus).map_err(|e| usage(e.to_string()))?;
    if let Some(bits) = config.phase_bits {
        drive = quantize_phases(&drive, bits)?;
    }
    let grid = config.field_model.sample_grid(&config.rig, &drive, &spec)?;
    let metrics = focal_metrics(&grid).map_err(|e| usage(e.to_string()))?;
    let csv = with_suffix(prefix, ".csv");
    let pgm = with_suffix(prefix, ".pgm");
    write(&csv, field_csv(&grid).as_bytes())?;
    write(&pgm, &field_pgm(&grid))?;
    Ok(FieldReport { metrics, csv, pgm })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Am,
    Lm,
    Stationary,
}

impl ProfileKind {
    pub fn profile(self, config: &AppConfig) -> Profile {
        let p = &config.profiles;
        match self {
            ProfileKind::Am => Profile::AmTap(p.am),
            ProfileKind::Lm => Profile::LmTap(p.lm),
            ProfileKind::Stationary => Profile::StationaryLm(p.stationary),
        }
    }
}

/// Samples one configured profile from t = 0 and writes the waveform CSV.
pub fn cmd_profile(config: &AppConfig, kind: ProfileKind, rate: f64, duration: f64, out: &Path) -> Result<FrameSeries> {
    let series = sample_profile(&kind.profile(config), rate, duration, 0.0).map_err(|e| usage(e.to_string()))?;
    write(out, waveform_csv(&series).as_bytes())?;
    Ok(series)
}

#[derive(Debug, Clone)]
pub struct ReplayReport {
    pub rendered: Rendered,
    /// SHA-256 over the frames file followed by the phase log.
    pub digest: String,
    pub frames: PathBuf,
    pub phases: PathBuf,
}

/// Renders a finger trace through the tap engine and writes
/// `PREFIX.frames.csv` and `PREFIX.phases.csv`.
pub fn cmd_replay(config: &AppConfig, trace: &Path, prefix: &Path, rate: Option<f64>) -> Result<ReplayReport> {
    let text = fs::read_to_string(trace).with_context(|| format!("reading {}", trace.display()))?;
    let samples = parse_trace(&text).map_err(|e| usage(format!("{}: {e}", trace.display())))?;
    let rate = rate.unwrap_or(config.control_rate);
    let rendered = render_trace(&samples, &config.scene, &config.profiles, &config.engine, rate)
        .map_err(|e| usage(e.to_string()))?;
    let frames_text = frames_csv(&rendered);
    let log_text = phase_log_csv(&rendered.transitions);
    let frames = with_suffix(prefix, ".frames.csv");
    let phases = with_suffix(prefix, ".phases.csv");
    write(&frames, frames_text.as_bytes())?;
    write(&phases, log_text.as_bytes())?;
    Ok(ReplayReport {
        digest: digest(&[frames_text.as_bytes(), log_text.as_bytes()]),
        rendered,
        frames,
        phases,
    })
}

/// `sha256 <hex>` line printed by `replay`.
pub fn digest_line(hex: &str) -> String {
    format!("{} {hex}", formats::DIGEST_NAME)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffix_keeps_directory() {
        assert_eq!(with_suffix(Path::new("out/run.1"), ".csv"), PathBuf::from("out/run.1.csv"));
    }

    #[test]
    fn profile_kinds_follow_config() {
        let c = AppConfig::default();
        assert_eq!(ProfileKind::Am.profile(&c), Profile::AmTap(c.profiles.am));
        assert!(matches!(ProfileKind::Stationary.profile(&c), Profile::StationaryLm(_)));
    }

    #[test]
    fn empty_trace_is_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let trace = dir.path().join("t.csv");
        fs::write(&trace, "t_s,x_mm,y_mm,down\n").unwrap();
        let e = cmd_replay(&AppConfig::default(), &trace, &dir.path().join("r"), None).unwrap_err();
        assert!(e.downcast_ref::<UsageError>().is_some());
    }
}
