//! Text and image formats written and read by the CLI.
//!
//! All writers use fixed precision and `\n` line endings so their bytes (and
//! the SHA-256 digests printed by `replay`) are reproducible.

use sha2::{Digest, Sha256};
use thiserror::Error;

use tap_core::engine::{FingerState, PhaseTransition, Rendered};
use tap_core::field::FieldGrid;
use tap_core::modulation::FrameSeries;
use tap_core::MM;

/// Name of the regression digest, printed next to every hash.
pub const DIGEST_NAME: &str = "sha256";

pub const FIELD_CSV_HEADER: &str = "u_mm,v_mm,re_p,im_p,radiation_Pa";
pub const WAVEFORM_CSV_HEADER: &str = "t_s,amplitude,offset_u_mm,offset_v_mm";
pub const TRACE_CSV_HEADER: &str = "t_s,x_mm,y_mm,down";
pub const PHASE_LOG_HEADER: &str = "t_s,from,to,object_id";
pub const FRAMES_CSV_HEADER: &str = "t_s,phase,object_id,amplitude,anchor_x_mm,anchor_y_mm,offset_u_mm,offset_v_mm";

/// 9 significant digits in scientific notation; negative zero prints as zero.
fn sig9(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.8e}")
}

fn micros(t: f64) -> String {
    let t = if t == 0.0 { 0.0 } else { t };
    format!("{t:.6}")
}

/// One row per cell, v-major. `u_mm`/`v_mm` are the cell position projected
/// on the grid axes.
pub fn field_csv(grid: &FieldGrid) -> String {
    let spec = grid.spec();
    let mut out = String::with_capacity(64 * spec.nu() * spec.nv());
    out.push_str(FIELD_CSV_HEADER);
    out.push('\n');
    for j in 0..spec.nv() {
        for i in 0..spec.nu() {
            let p = spec.point(i, j);
            let c = grid.complex(i, j);
            out.push_str(&format!(
                "{:.6},{:.6},{},{},{}\n",
                p.dot(&spec.axis_u()) / MM + 0.0,
                p.dot(&spec.axis_v()) / MM + 0.0,
                sig9(c.re),
                sig9(c.im),
                sig9(grid.radiation(i, j)),
            ));
        }
    }
    out
}

/// Binary 16-bit PGM of radiation pressure normalized to the grid maximum.
/// Image columns follow `axis_u`; the top row is the highest `v`.
pub fn field_pgm(grid: &FieldGrid) -> Vec<u8> {
    let spec = grid.spec();
    let (nu, nv) = (spec.nu(), spec.nv());
    let max = grid.radiation_values().iter().cloned().fold(0.0, f64::max);
    let mut out = format!("P5\n{nu} {nv}\n65535\n").into_bytes();
    out.reserve(2 * nu * nv);
    for j in (0..nv).rev() {
        for i in 0..nu {
            let level = if max > 0.0 {
                (grid.radiation(i, j) / max * 65535.0).round() as u16
            } else {
                0
            };
            out.extend_from_slice(&level.to_be_bytes());
        }
    }
    out
}

pub fn waveform_csv(series: &FrameSeries) -> String {
    let mut out = String::from(WAVEFORM_CSV_HEADER);
    out.push('\n');
    for (n, s) in series.samples.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            sig9(series.time(n)),
            sig9(s.amplitude_scale),
            sig9(s.focus_offset.x / MM),
            sig9(s.focus_offset.y / MM),
        ));
    }
    out
}

#[derive(Debug, Error, PartialEq)]
pub enum TraceError {
    #[error("trace has no samples")]
    Empty,
    #[error("trace line {line}: {message}")]
    Row { line: usize, message: String },
}

fn parse_down(s: &str) -> Option<bool> {
    match s {
        "1" | "true" | "TRUE" | "True" => Some(true),
        "0" | "false" | "FALSE" | "False" => Some(false),
        _ => None,
    }
}

/// Parses `t_s,x_mm,y_mm,down` rows. A header line, blank lines and `#`
/// comments are skipped. Positions are returned in meters.
pub fn parse_trace(text: &str) -> Result<Vec<FingerState>, TraceError> {
    let mut out: Vec<FingerState> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let row = raw.trim();
        if row.is_empty() || row.starts_with('#') || (out.is_empty() && row.starts_with("t_s")) {
            continue;
        }
        let err = |message: String| TraceError::Row { line, message };
        let cols: Vec<&str> = row.split(',').map(str::trim).collect();
        if cols.len() != 4 {
            return Err(err(format!("expected 4 columns, found {}", cols.len())));
        }
        let num = |k: usize, name: &str| -> Result<f64, TraceError> {
            cols[k]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("{name} {:?} is not a number", cols[k])))
        };
        let t = num(0, "t_s")?;
        let x = num(1, "x_mm")?;
        let y = num(2, "y_mm")?;
        let down = parse_down(cols[3]).ok_or_else(|| err(format!("down {:?} is not 0/1/true/false", cols[3])))?;
        if let Some(prev) = out.last() {
            if !(t > prev.t) {
                return Err(err(format!("timestamp {t} does not increase (previous {})", prev.t)));
            }
        }
        out.push(FingerState::new(t, x * MM, y * MM, down));
    }
    if out.is_empty() {
        return Err(TraceError::Empty);
    }
    Ok(out)
}

pub fn trace_csv(trace: &[FingerState]) -> String {
    let mut out = String::from(TRACE_CSV_HEADER);
    out.push('\n');
    for s in trace {
        out.push_str(&format!(
            "{},{:.6},{:.6},{}\n",
            micros(s.t),
            s.position.x / MM + 0.0,
            s.position.y / MM + 0.0,
            u8::from(s.down)
        ));
    }
    out
}

fn id_field(id: Option<u32>) -> String {
    id.map(|i| i.to_string()).unwrap_or_default()
}

pub fn phase_log_csv(transitions: &[PhaseTransition]) -> String {
    let mut out = String::from(PHASE_LOG_HEADER);
    out.push('\n');
    for t in transitions {
        out.push_str(&format!("{},{},{},{}\n", micros(t.t), t.from, t.to, id_field(t.object_id)));
    }
    out
}

/// Per-frame dump of a replay: phase, object, amplitude, anchor and offset.
pub fn frames_csv(rendered: &Rendered) -> String {
    let mut out = String::with_capacity(96 * rendered.frames.len());
    out.push_str(FRAMES_CSV_HEADER);
    out.push('\n');
    for f in &rendered.frames {
        let (ax, ay) = match f.anchor {
            Some(a) => (format!("{:.6}", a.x / MM + 0.0), format!("{:.6}", a.y / MM + 0.0)),
            None => (String::new(), String::new()),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            micros(f.t),
            f.phase,
            id_field(f.object_id),
            sig9(f.sample.amplitude_scale),
            ax,
            ay,
            sig9(f.sample.focus_offset.x / MM),
            sig9(f.sample.focus_offset.y / MM),
        ));
    }
    out
}

/// Hex SHA-256 over the concatenation of `parts`.
pub fn digest(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
