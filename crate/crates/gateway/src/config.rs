//! TOML configuration: rig, acoustics, scene, stimulus parameters and
//! runtime rates. Every section and key is optional; missing values take the
//! defaults of the six-unit rig and the two-object demo scene. Unknown keys
//! are rejected.
//!
//! ```toml
//! control_rate_hz = 1000
//! z_panel_mm = 200
//! phase_bits = 8            # 0 keeps continuous phases
//!
//! [acoustics]
//! carrier_frequency_hz = 40000
//! sound_speed_m_s = 343
//! density_kg_m3 = 1.21
//! directivity = "piston"    # or "omni"
//! piston_radius_mm = 4.5
//! reference_pressure_pa_m = 1.0
//!
//! [[rig.units]]
//! rows = 18
//! cols = 14
//! pitch_mm = 10.16
//! translation_mm = [0, 0, 0]
//! rotation = { axis = [0, 0, 1], angle_deg = 0 }
//!
//! [[scene.objects]]
//! id = 1
//! rect_mm = [-90, -40, -30, 40]   # x0, y0, x1, y1
//! color = "red"
//! material = "am_balloon"
//!
//! [profiles.am]
//! f_am_hz = 200
//! tau_ms = 30
//! t_att_ms = 100
//! a_max = 1.0
//!
//! [profiles.lm]
//! f_lm_hz = 100
//! size_max_mm = 10
//! size_min_mm = 0.6
//! tau_ms = 30
//! t_att_ms = 100
//! a_max = 1.0
//! axis = [1, 0]
//!
//! [profiles.stationary]
//! f_lm_hz = 10
//! size_mm = 0.6
//! a_max = 1.0
//! axis = [1, 0]
//!
//! [engine]
//! anchor = "frozen"         # or "follow"
//! min_gap_ms = 0
//!
//! [server]
//! wire_rate_hz = 60
//! jitter_buffer_ms = 5
//! ```

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use tap_core::engine::{AnchorMode, DisplayColor, EngineConfig, Material, Rect, Scene, TapProfiles, VirtualObject};
use tap_core::field::{Directivity, FieldModel};
use tap_core::geometry::{self, ArrayModel, UnitLayout, UnitPose};
use tap_core::modulation::{AmTapParams, LmTapParams, StationaryLmParams};
use tap_core::{Vector2, Vector3, MM};

/// Environment variable consulted for the config path when `--config` is absent.
pub const CONFIG_ENV: &str = "TAPSIM_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid config value at `{path}`: {message}")]
    Invalid { path: String, message: String },
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn bad(path: impl Into<String>, message: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        path: path.into(),
        message: message.to_string(),
    }
}

/// Fully validated runtime configuration.
#[derive(Debug, Clone)]
pub struct AppConfig {
    pub rig: ArrayModel,
    pub field_model: FieldModel,
    pub scene: Scene,
    pub profiles: TapProfiles,
    pub engine: EngineConfig,
    /// Frame generation rate (Hz).
    pub control_rate: f64,
    /// Height of the interaction plane above the array (m).
    pub z_panel: f64,
    /// `None` keeps continuous phases.
    pub phase_bits: Option<u32>,
    /// Rate of `StateUpdate` messages on the wire (Hz).
    pub wire_rate: f64,
    /// Delay between the session clock and the wall clock in live mode (s).
    pub jitter_buffer: f64,
}

impl Default for AppConfig {
    fn default() -> Self {
        load_config("").expect("empty config is valid")
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    control_rate_hz: Option<f64>,
    z_panel_mm: Option<f64>,
    phase_bits: Option<u32>,
    acoustics: Option<RawAcoustics>,
    rig: Option<RawRig>,
    scene: Option<RawScene>,
    profiles: Option<RawProfiles>,
    engine: Option<RawEngine>,
    server: Option<RawServer>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAcoustics {
    carrier_frequency_hz: Option<f64>,
    sound_speed_m_s: Option<f64>,
    density_kg_m3: Option<f64>,
    directivity: Option<String>,
    piston_radius_mm: Option<f64>,
    reference_pressure_pa_m: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRig {
    units: Vec<RawUnit>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUnit {
    rows: Option<usize>,
    cols: Option<usize>,
    pitch_mm: Option<f64>,
    translation_mm: Option<Vec<f64>>,
    rotation: Option<RawRotation>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRotation {
    axis: Vec<f64>,
    angle_deg: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScene {
    objects: Vec<RawObject>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObject {
    id: u32,
    rect_mm: Vec<f64>,
    color: String,
    material: String,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfiles {
    am: Option<RawAm>,
    lm: Option<RawLm>,
    stationary: Option<RawStationary>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAm {
    f_am_hz: Option<f64>,
    tau_ms: Option<f64>,
    t_att_ms: Option<f64>,
    a_max: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLm {
    f_lm_hz: Option<f64>,
    size_max_mm: Option<f64>,
    size_min_mm: Option<f64>,
    tau_ms: Option<f64>,
    t_att_ms: Option<f64>,
    a_max: Option<f64>,
    axis: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStationary {
    f_lm_hz: Option<f64>,
    size_mm: Option<f64>,
    a_max: Option<f64>,
    axis: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEngine {
    anchor: Option<String>,
    min_gap_ms: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawServer {
    wire_rate_hz: Option<f64>,
    jitter_buffer_ms: Option<f64>,
}

fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, ConfigError> {
    toml::from_str(text).map_err(|e| {
        let offset = e.span().map(|s| s.start).unwrap_or(0).min(text.len());
        let before = &text[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map(|l| l.chars().count()).unwrap_or(0) + 1;
        ConfigError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })
}

/// Parses and validates a full configuration.
pub fn load_config(text: &str) -> Result<AppConfig, ConfigError> {
    let raw: RawConfig = parse(text)?;

    let control_rate = raw.control_rate_hz.unwrap_or(1000.0);
    positive("control_rate_hz", control_rate)?;
    let z_panel = raw.z_panel_mm.unwrap_or(200.0);
    positive("z_panel_mm", z_panel)?;
    let phase_bits = match raw.phase_bits.unwrap_or(8) {
        0 => None,
        b @ 1..=16 => Some(b),
        b => return Err(bad("phase_bits", format!("must be 0 (continuous) or 1-16, got {b}"))),
    };

    let acoustics = raw.acoustics.unwrap_or_default();
    let (field_model, carrier, sound_speed) = convert_acoustics(&acoustics)?;
    let rig = convert_rig(raw.rig.as_ref(), carrier, sound_speed)?;
    let scene = match &raw.scene {
        Some(s) => convert_scene(s)?,
        None => Scene::default(),
    };
    let profiles = convert_profiles(raw.profiles.unwrap_or_default())?;

    let engine_raw = raw.engine.unwrap_or_default();
    let anchor_mode = match engine_raw.anchor.as_deref().unwrap_or("frozen") {
        "frozen" => AnchorMode::Frozen,
        "follow" => AnchorMode::Follow,
        other => return Err(bad("engine.anchor", format!("expected \"frozen\" or \"follow\", got {other:?}"))),
    };
    let min_gap = engine_raw.min_gap_ms.unwrap_or(0.0);
    if !(min_gap >= 0.0 && min_gap.is_finite()) {
        return Err(bad("engine.min_gap_ms", format!("must be >= 0, got {min_gap}")));
    }

    let server = raw.server.unwrap_or_default();
    let wire_rate = server.wire_rate_hz.unwrap_or(60.0);
    positive("server.wire_rate_hz", wire_rate)?;
    if wire_rate > control_rate {
        return Err(bad(
            "server.wire_rate_hz",
            format!("{wire_rate} Hz exceeds the control rate {control_rate} Hz"),
        ));
    }
    let jitter = server.jitter_buffer_ms.unwrap_or(5.0);
    if !(jitter >= 0.0 && jitter.is_finite()) {
        return Err(bad("server.jitter_buffer_ms", format!("must be >= 0, got {jitter}")));
    }

    Ok(AppConfig {
        rig,
        field_model,
        scene,
        profiles,
        engine: EngineConfig {
            anchor_mode,
            min_gap: min_gap * 1e-3,
        },
        control_rate,
        z_panel: z_panel * MM,
        phase_bits,
        wire_rate,
        jitter_buffer: jitter * 1e-3,
    })
}

/// Reads `path`, or the `TAPSIM_CONFIG` file, or falls back to defaults.
pub fn load_config_file(path: Option<&Path>) -> Result<AppConfig, ConfigError> {
    let env_path = std::env::var_os(CONFIG_ENV).map(std::path::PathBuf::from);
    match path.map(Path::to_path_buf).or(env_path) {
        Some(p) => {
            let text = std::fs::read_to_string(&p).map_err(|source| ConfigError::Io {
                path: p.display().to_string(),
                source,
            })?;
            load_config(&text)
        }
        None => load_config(""),
    }
}

/// Parses a standalone rig file (`[[units]]` tables, same keys as `rig.units`).
pub fn load_rig(text: &str, carrier_frequency: f64, sound_speed: f64) -> Result<ArrayModel, ConfigError> {
    let raw: RawRig = parse(text)?;
    convert_rig(Some(&raw), carrier_frequency, sound_speed)
}

/// Parses a standalone scene file (`[[objects]]` tables, same keys as `scene.objects`).
pub fn load_scene(text: &str) -> Result<Scene, ConfigError> {
    let raw: RawScene = parse(text)?;
    convert_scene(&raw)
}

fn positive(path: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(path, format!("must be positive, got {v}")))
    }
}

fn vec3(path: &str, v: &[f64]) -> Result<Vector3, ConfigError> {
    match v {
        [x, y, z] if v.iter().all(|c| c.is_finite()) => Ok(Vector3::new(*x, *y, *z)),
        _ => Err(bad(path, format!("expected 3 finite numbers, got {v:?}"))),
    }
}

fn vec2(path: &str, v: &[f64]) -> Result<Vector2, ConfigError> {
    match v {
        [x, y] if v.iter().all(|c| c.is_finite()) => Ok(Vector2::new(*x, *y)),
        _ => Err(bad(path, format!("expected 2 finite numbers, got {v:?}"))),
    }
}

fn convert_acoustics(a: &RawAcoustics) -> Result<(FieldModel, f64, f64), ConfigError> {
    let carrier = a.carrier_frequency_hz.unwrap_or(geometry::DEFAULT_CARRIER_FREQUENCY);
    positive("acoustics.carrier_frequency_hz", carrier)?;
    let c = a.sound_speed_m_s.unwrap_or(geometry::DEFAULT_SOUND_SPEED);
    positive("acoustics.sound_speed_m_s", c)?;
    let defaults = FieldModel::default();
    let density = a.density_kg_m3.unwrap_or(defaults.density);
    positive("acoustics.density_kg_m3", density)?;
    let reference_pressure = a.reference_pressure_pa_m.unwrap_or(defaults.reference_pressure);
    positive("acoustics.reference_pressure_pa_m", reference_pressure)?;
    let directivity = match a.directivity.as_deref().unwrap_or("piston") {
        "piston" => {
            let r = a.piston_radius_mm.unwrap_or(tap_core::field::DEFAULT_PISTON_RADIUS / MM);
            positive("acoustics.piston_radius_mm", r)?;
            Directivity::Piston { radius: r * MM }
        }
        "omni" => Directivity::Omni,
        other => {
            return Err(bad(
                "acoustics.directivity",
                format!("expected \"piston\" or \"omni\", got {other:?}"),
            ))
        }
    };
    Ok((
        FieldModel {
            directivity,
            reference_pressure,
            density,
        },
        carrier,
        c,
    ))
}

fn convert_rig(raw: Option<&RawRig>, carrier: f64, sound_speed: f64) -> Result<ArrayModel, ConfigError> {
    let spec = match raw {
        None => geometry::tiled_rig_spec(&geometry::default_unit(), 3, 2),
        Some(r) => {
            if r.units.is_empty() {
                return Err(bad("rig.units", "rig needs at least one unit"));
            }
            r.units
                .iter()
                .enumerate()
                .map(|(i, u)| convert_unit(&format!("rig.units[{i}]"), u))
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    geometry::assemble_rig(&spec, carrier, sound_speed).map_err(|e| bad("rig", e))
}

fn convert_unit(path: &str, u: &RawUnit) -> Result<(UnitLayout, UnitPose), ConfigError> {
    let rows = u.rows.unwrap_or(geometry::DEFAULT_ROWS);
    let cols = u.cols.unwrap_or(geometry::DEFAULT_COLS);
    let pitch = u.pitch_mm.unwrap_or(geometry::DEFAULT_PITCH / MM);
    let layout = geometry::build_unit(rows, cols, pitch * MM).map_err(|e| bad(path, e))?;
    let translation = match &u.translation_mm {
        Some(t) => vec3(&format!("{path}.translation_mm"), t)? * MM,
        None => Vector3::zeros(),
    };
    let pose = match &u.rotation {
        None => UnitPose::from_translation(translation),
        Some(r) => {
            let axis = vec3(&format!("{path}.rotation.axis"), &r.axis)?;
            UnitPose::from_axis_angle(axis, r.angle_deg.to_radians(), translation)
                .map_err(|e| bad(format!("{path}.rotation"), e))?
        }
    };
    Ok((layout, pose))
}

fn convert_scene(raw: &RawScene) -> Result<Scene, ConfigError> {
    let objects = raw
        .objects
        .iter()
        .enumerate()
        .map(|(i, o)| {
            let path = format!("scene.objects[{i}]");
            let rect = match o.rect_mm.as_slice() {
                [x0, y0, x1, y1] => Rect::new(Vector2::new(*x0, *y0) * MM, Vector2::new(*x1, *y1) * MM)
                    .map_err(|e| bad(format!("{path}.rect_mm"), e))?,
                other => return Err(bad(format!("{path}.rect_mm"), format!("expected [x0, y0, x1, y1], got {other:?}"))),
            };
            let color = parse_color(&o.color).ok_or_else(|| {
                bad(format!("{path}.color"), format!("expected \"red\" or \"yellow\", got {:?}", o.color))
            })?;
            let material = parse_material(&o.material).ok_or_else(|| {
                bad(
                    format!("{path}.material"),
                    format!("expected \"am_balloon\" or \"lm_cymbal\", got {:?}", o.material),
                )
            })?;
            VirtualObject::new(o.id, rect, material, color).map_err(|e| bad(path, e))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if objects.is_empty() {
        return Err(bad("scene.objects", "scene needs at least one object"));
    }
    Scene::new(objects).map_err(|e| bad("scene.objects", e))
}

pub fn parse_color(s: &str) -> Option<DisplayColor> {
    match s.to_ascii_lowercase().as_str() {
        "red" => Some(DisplayColor::Red),
        "yellow" => Some(DisplayColor::Yellow),
        _ => None,
    }
}

pub fn color_name(c: DisplayColor) -> &'static str {
    match c {
        DisplayColor::Red => "red",
        DisplayColor::Yellow => "yellow",
    }
}

pub fn parse_material(s: &str) -> Option<Material> {
    match s.to_ascii_lowercase().as_str() {
        "am_balloon" => Some(Material::AmBalloon),
        "lm_cymbal" => Some(Material::LmCymbal),
        _ => None,
    }
}

fn convert_profiles(raw: RawProfiles) -> Result<TapProfiles, ConfigError> {
    let d = TapProfiles::default();

    let am = raw.am.unwrap_or_default();
    let am = AmTapParams::new(
        am.f_am_hz.unwrap_or(d.am.f_am()),
        am.tau_ms.map(|v| v * 1e-3).unwrap_or(d.am.tau()),
        am.t_att_ms.map(|v| v * 1e-3).unwrap_or(d.am.t_att()),
        am.a_max.unwrap_or(d.am.a_max()),
    )
    .map_err(|e| bad("profiles.am", e))?;

    let lm = raw.lm.unwrap_or_default();
    let lm_axis = match &lm.axis {
        Some(a) => vec2("profiles.lm.axis", a)?,
        None => d.lm.axis(),
    };
    let lm = LmTapParams::new(
        lm.f_lm_hz.unwrap_or(d.lm.f_lm()),
        lm.size_max_mm.map(|v| v * MM).unwrap_or(d.lm.size_max()),
        lm.size_min_mm.map(|v| v * MM).unwrap_or(d.lm.size_min()),
        lm.tau_ms.map(|v| v * 1e-3).unwrap_or(d.lm.tau()),
        lm.t_att_ms.map(|v| v * 1e-3).unwrap_or(d.lm.t_att()),
        lm.a_max.unwrap_or(d.lm.a_max()),
        lm_axis,
    )
    .map_err(|e| bad("profiles.lm", e))?;

    let st = raw.stationary.unwrap_or_default();
    let f = st.f_lm_hz.unwrap_or(d.stationary.f_lm());
    if !(5.0..=15.0).contains(&f) {
        return Err(bad(
            "profiles.stationary.f_lm_hz",
            format!("{f} Hz is outside the 5-15 Hz pressure-sensation range"),
        ));
    }
    let size = st.size_mm.map(|v| v * MM).unwrap_or(d.stationary.size());
    if !(size > 0.0 && size <= 1.0 * MM) {
        return Err(bad(
            "profiles.stationary.size_mm",
            format!("{} mm violates the bound 0 < size <= 1 mm", size / MM),
        ));
    }
    let st_axis = match &st.axis {
        Some(a) => vec2("profiles.stationary.axis", a)?,
        None => d.stationary.axis(),
    };
    let stationary = StationaryLmParams::new(f, size, st.a_max.unwrap_or(d.stationary.a_max()), st_axis)
        .map_err(|e| bad("profiles.stationary", e))?;

    Ok(TapProfiles { am, lm, stationary })
}
