//! Tap stimulus schedules as pure functions of time since contact.
//!
//! - [`AmTapParams`]: amplitude oscillation whose depth decays while the mean
//!   level rises to full strength.
//! - [`LmTapParams`]: constant amplitude, lateral focus oscillation whose
//!   travel ("size") shrinks over time.
//! - [`StationaryLmParams`]: slow (5–15 Hz), sub-millimeter lateral motion for
//!   sustained pressure while contact is held.

use std::f64::consts::{FRAC_PI_2, TAU};

use crate::error::{invalid, Result};
use crate::{Vector2, MM};

pub const STATIONARY_MIN_FREQUENCY: f64 = 5.0;
pub const STATIONARY_MAX_FREQUENCY: f64 = 15.0;
pub const STATIONARY_MAX_SIZE: f64 = 1e-3;

const AXIS_TOLERANCE: f64 = 1e-9;

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive, got {v}")))
    }
}

fn amplitude(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be in (0, 1], got {v}")))
    }
}

fn unit_axis(axis: Vector2) -> Result<Vector2> {
    if (axis.norm() - 1.0).abs() <= AXIS_TOLERANCE {
        Ok(axis)
    } else {
        Err(invalid(format!("axis must be a unit vector, got ({}, {})", axis.x, axis.y)))
    }
}

fn sample_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("sample time must be >= 0, got {t}")))
    }
}

/// Amplitude-modulated tap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmTapParams {
    f_am: f64,
    tau: f64,
    t_att: f64,
    a_max: f64,
}

impl AmTapParams {
    pub fn new(f_am: f64, tau: f64, t_att: f64, a_max: f64) -> Result<Self> {
        positive("f_am", f_am)?;
        positive("tau", tau)?;
        positive("t_att", t_att)?;
        amplitude("a_max", a_max)?;
        Ok(Self { f_am, tau, t_att, a_max })
    }

    pub fn f_am(&self) -> f64 {
        self.f_am
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn t_att(&self) -> f64 {
        self.t_att
    }

    pub fn a_max(&self) -> f64 {
        self.a_max
    }

    /// Modulation depth: `exp(−t/τ)` during the attenuation window, then 0.
    pub fn depth(&self, t: f64) -> f64 {
        if t < self.t_att {
            (-t / self.tau).exp()
        } else {
            0.0
        }
    }
}

impl Default for AmTapParams {
    fn default() -> Self {
        Self {
            f_am: 200.0,
            tau: 0.030,
            t_att: 0.100,
            a_max: 1.0,
        }
    }
}

/// Laterally-modulated tap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmTapParams {
    f_lm: f64,
    size_max: f64,
    size_min: f64,
    tau: f64,
    t_att: f64,
    a_max: f64,
    axis: Vector2,
}

impl LmTapParams {
    pub fn new(f_lm: f64, size_max: f64, size_min: f64, tau: f64, t_att: f64, a_max: f64, axis: Vector2) -> Result<Self> {
        positive("f_lm", f_lm)?;
        positive("size_max", size_max)?;
        if !(size_min >= 0.0 && size_min < size_max) {
            return Err(invalid(format!(
                "size_min must satisfy 0 <= size_min < size_max, got {size_min} (size_max {size_max})"
            )));
        }
        positive("tau", tau)?;
        positive("t_att", t_att)?;
        amplitude("a_max", a_max)?;
        let axis = unit_axis(axis)?;
        Ok(Self {
            f_lm,
            size_max,
            size_min,
            tau,
            t_att,
            a_max,
            axis,
        })
    }

    pub fn f_lm(&self) -> f64 {
        self.f_lm
    }

    pub fn size_max(&self) -> f64 {
        self.size_max
    }

    pub fn size_min(&self) -> f64 {
        self.size_min
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn t_att(&self) -> f64 {
        self.t_att
    }

    pub fn a_max(&self) -> f64 {
        self.a_max
    }

    pub fn axis(&self) -> Vector2 {
        self.axis
    }

    /// Peak-to-peak travel of the focus at time `t`.
    pub fn size(&self, t: f64) -> f64 {
        if t < self.t_att {
            (self.size_max * (-t / self.tau).exp()).max(self.size_min)
        } else {
            self.size_min
        }
    }
}

impl Default for LmTapParams {
    fn default() -> Self {
        Self {
            f_lm: 100.0,
            size_max: 10.0 * MM,
            size_min: 0.6 * MM,
            tau: 0.030,
            t_att: 0.100,
            a_max: 1.0,
            axis: Vector2::x(),
        }
    }
}

/// Stationary-phase lateral modulation. Construction enforces the
/// 5–15 Hz / ≤ 1 mm regime that produces pressure with little vibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryLmParams {
    f_lm: f64,
    size: f64,
    a_max: f64,
    axis: Vector2,
}

impl StationaryLmParams {
    pub fn new(f_lm: f64, size: f64, a_max: f64, axis: Vector2) -> Result<Self> {
        if !(STATIONARY_MIN_FREQUENCY..=STATIONARY_MAX_FREQUENCY).contains(&f_lm) {
            return Err(invalid(format!(
                "stationary f_lm must be within 5-15 Hz, got {f_lm} Hz"
            )));
        }
        if !(size > 0.0 && size <= STATIONARY_MAX_SIZE) {
            return Err(invalid(format!(
                "stationary size must be in (0, 1 mm], got {} mm",
                size / MM
            )));
        }
        amplitude("a_max", a_max)?;
        let axis = unit_axis(axis)?;
        Ok(Self { f_lm, size, a_max, axis })
    }

    pub fn f_lm(&self) -> f64 {
        self.f_lm
    }

    pub fn size(&self) -> f64 {
        self.size
    }

    pub fn a_max(&self) -> f64 {
        self.a_max
    }

    pub fn axis(&self) -> Vector2 {
        self.axis
    }
}

impl Default for StationaryLmParams {
    fn default() -> Self {
        Self {
            f_lm: 10.0,
            size: 0.6 * MM,
            a_max: 1.0,
            axis: Vector2::x(),
        }
    }
}

/// One control-rate stimulus value: array amplitude scale and focus offset
/// from the contact anchor (m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSample {
    pub amplitude_scale: f64,
    pub focus_offset: Vector2,
}

impl DriveSample {
    pub const SILENT: DriveSample = DriveSample {
        amplitude_scale: 0.0,
        focus_offset: Vector2::new(0.0, 0.0),
    };
}

pub fn am_tap_sample(t: f64, p: &AmTapParams) -> Result<DriveSample> {
    sample_time(t)?;
    let m = p.depth(t);
    let swing = (1.0 + (TAU * p.f_am * t - FRAC_PI_2).sin()) / 2.0;
    Ok(DriveSample {
        amplitude_scale: p.a_max * ((1.0 - m) + m * swing),
        focus_offset: Vector2::zeros(),
    })
}

pub fn lm_tap_sample(t: f64, p: &LmTapParams) -> Result<DriveSample> {
    sample_time(t)?;
    let reach = p.size(t) / 2.0 * (TAU * p.f_lm * t).sin();
    Ok(DriveSample {
        amplitude_scale: p.a_max,
        focus_offset: p.axis * reach,
    })
}

pub fn stationary_lm_sample(t: f64, p: &StationaryLmParams) -> Result<DriveSample> {
    sample_time(t)?;
    let reach = p.size / 2.0 * (TAU * p.f_lm * t).sin();
    Ok(DriveSample {
        amplitude_scale: p.a_max,
        focus_offset: p.axis * reach,
    })
}

/// Any of the three schedules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    AmTap(AmTapParams),
    LmTap(LmTapParams),
    StationaryLm(StationaryLmParams),
}

impl Profile {
    pub fn sample(&self, t: f64) -> Result<DriveSample> {
        match self {
            Profile::AmTap(p) => am_tap_sample(t, p),
            Profile::LmTap(p) => lm_tap_sample(t, p),
            Profile::StationaryLm(p) => stationary_lm_sample(t, p),
        }
    }

    pub fn a_max(&self) -> f64 {
        match self {
            Profile::AmTap(p) => p.a_max(),
            Profile::LmTap(p) => p.a_max(),
            Profile::StationaryLm(p) => p.a_max(),
        }
    }

    /// Length of the attenuation window, if the profile has one.
    pub fn t_att(&self) -> Option<f64> {
        match self {
            Profile::AmTap(p) => Some(p.t_att()),
            Profile::LmTap(p) => Some(p.t_att()),
            Profile::StationaryLm(_) => None,
        }
    }
}

/// Samples at `t0 + n / rate`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSeries {
    pub rate: f64,
    pub t0: f64,
    pub samples: Vec<DriveSample>,
}

impl FrameSeries {
    pub fn time(&self, n: usize) -> f64 {
        frame_time(self.t0, n, self.rate)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Timestamp of frame `n` on a grid starting at `t0`.
pub fn frame_time(t0: f64, n: usize, rate: f64) -> f64 {
    t0 + n as f64 / rate
}

/// Number of whole frames in `duration` at `rate`. A relative slack of 1e-9
/// keeps products like `0.3 · 1000` from flooring to 299.
pub fn frame_count(duration: f64, rate: f64) -> usize {
    let exact = duration * rate;
    (exact + exact.abs() * 1e-9).floor() as usize
}

/// Evaluates `profile` at `floor(duration · rate)` frame times starting at
/// `t0`. Profile time is the absolute frame time.
pub fn sample_profile(profile: &Profile, rate: f64, duration: f64, t0: f64) -> Result<FrameSeries> {
    positive("rate", rate)?;
    positive("duration", duration)?;
    let n = frame_count(duration, rate);
    if n == 0 {
        return Err(invalid(format!("duration {duration} s holds no frame at {rate} Hz")));
    }
    let samples = (0..n)
        .map(|i| profile.sample(frame_time(t0, i, rate)))
        .collect::<Result<Vec<_>>>()?;
    Ok(FrameSeries { rate, t0, samples })
}
