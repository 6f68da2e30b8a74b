//! Contact-driven tap state machine.
//!
//! A touch on a virtual object starts the material's attenuation stimulus
//! (AM tap for the balloon, LM tap for the cymbal). If contact is held past
//! the attenuation window the session moves to the stationary LM stimulus;
//! losing contact returns it to idle at once.
//!
//! ```text
//! IDLE --contact--> ATTENUATION --t_att elapsed--> STATIONARY
//!   ^                    |                             |
//!   +----contact lost----+-----------------------------+
//! ```

use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::field::{focus_phases, quantize_phases, DriveVector};
use crate::geometry::ArrayModel;
use crate::modulation::{
    frame_count, frame_time, AmTapParams, DriveSample, FrameSeries, LmTapParams, Profile, StationaryLmParams,
};
use crate::{Vector2, Vector3, MM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Material {
    /// Soft, deformable surface rendered with the AM tap.
    AmBalloon,
    /// Rigid, resonant surface rendered with the LM tap.
    LmCymbal,
}

impl Material {
    pub fn name(&self) -> &'static str {
        match self {
            Material::AmBalloon => "AM_BALLOON",
            Material::LmCymbal => "LM_CYMBAL",
        }
    }

    pub fn color(&self) -> DisplayColor {
        match self {
            Material::AmBalloon => DisplayColor::Red,
            Material::LmCymbal => DisplayColor::Yellow,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DisplayColor {
    Red,
    Yellow,
}

/// Axis-aligned rectangle in panel coordinates (m), edges inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    min: Vector2,
    max: Vector2,
}

impl Rect {
    pub fn new(min: Vector2, max: Vector2) -> Result<Self> {
        if !(min.iter().chain(max.iter()).all(|v| v.is_finite())) {
            return Err(invalid("rectangle corners must be finite"));
        }
        if !(max.x > min.x && max.y > min.y) {
            return Err(invalid(format!(
                "rectangle needs positive area, got ({}, {})..({}, {})",
                min.x, min.y, max.x, max.y
            )));
        }
        Ok(Self { min, max })
    }

    pub fn min(&self) -> Vector2 {
        self.min
    }

    pub fn max(&self) -> Vector2 {
        self.max
    }

    pub fn center(&self) -> Vector2 {
        (self.min + self.max) / 2.0
    }

    pub fn contains(&self, p: &Vector2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirtualObject {
    id: u32,
    region: Rect,
    material: Material,
    color: DisplayColor,
}

impl VirtualObject {
    /// Red objects must be balloons and yellow objects cymbals.
    pub fn new(id: u32, region: Rect, material: Material, color: DisplayColor) -> Result<Self> {
        if material.color() != color {
            return Err(invalid(format!(
                "object {id}: {} must be displayed {:?}, got {color:?}",
                material.name(),
                material.color()
            )));
        }
        Ok(Self {
            id,
            region,
            material,
            color,
        })
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn region(&self) -> &Rect {
        &self.region
    }

    pub fn material(&self) -> Material {
        self.material
    }

    pub fn color(&self) -> DisplayColor {
        self.color
    }
}

/// Virtual objects, kept sorted by id.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    objects: Vec<VirtualObject>,
}

impl Scene {
    pub fn new(mut objects: Vec<VirtualObject>) -> Result<Self> {
        objects.sort_by_key(|o| o.id);
        if let Some(w) = objects.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(invalid(format!("duplicate object id {}", w[0].id)));
        }
        Ok(Self { objects })
    }

    pub fn objects(&self) -> &[VirtualObject] {
        &self.objects
    }

    pub fn get(&self, id: u32) -> Option<&VirtualObject> {
        self.objects.iter().find(|o| o.id == id)
    }
}

impl Default for Scene {
    /// A red balloon left of center and a yellow cymbal right of center.
    fn default() -> Self {
        let rect = |x0: f64, x1: f64| Rect::new(Vector2::new(x0, -40.0) * MM, Vector2::new(x1, 40.0) * MM).unwrap();
        Scene::new(vec![
            VirtualObject::new(1, rect(-90.0, -30.0), Material::AmBalloon, DisplayColor::Red).unwrap(),
            VirtualObject::new(2, rect(30.0, 90.0), Material::LmCymbal, DisplayColor::Yellow).unwrap(),
        ])
        .unwrap()
    }
}

/// Profile parameters for both materials plus the shared stationary stimulus.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TapProfiles {
    pub am: AmTapParams,
    pub lm: LmTapParams,
    pub stationary: StationaryLmParams,
}

impl TapProfiles {
    pub fn attenuation(&self, material: Material) -> Profile {
        match material {
            Material::AmBalloon => Profile::AmTap(self.am),
            Material::LmCymbal => Profile::LmTap(self.lm),
        }
    }

    pub fn t_att(&self, material: Material) -> f64 {
        match material {
            Material::AmBalloon => self.am.t_att(),
            Material::LmCymbal => self.lm.t_att(),
        }
    }
}

/// Latest touch-panel reading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FingerState {
    pub position: Vector2,
    pub down: bool,
    pub t: f64,
}

impl FingerState {
    pub fn new(t: f64, x: f64, y: f64, down: bool) -> Self {
        Self {
            position: Vector2::new(x, y),
            down,
            t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Idle,
    Attenuation,
    Stationary,
}

impl Phase {
    pub fn name(&self) -> &'static str {
        match self {
            Phase::Idle => "IDLE",
            Phase::Attenuation => "ATTENUATION",
            Phase::Stationary => "STATIONARY",
        }
    }

    pub fn parse(s: &str) -> Option<Phase> {
        match s {
            "IDLE" => Some(Phase::Idle),
            "ATTENUATION" => Some(Phase::Attenuation),
            "STATIONARY" => Some(Phase::Stationary),
            _ => None,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseTransition {
    pub t: f64,
    pub from: Phase,
    pub to: Phase,
    /// Object being entered, or the one just released for transitions to idle.
    pub object_id: Option<u32>,
}

/// The object under a down finger; overlaps resolve to the lowest id.
pub fn detect_contact(finger: &FingerState, scene: &Scene) -> Option<(u32, Vector2)> {
    if !finger.down {
        return None;
    }
    scene
        .objects()
        .iter()
        .find(|o| o.region.contains(&finger.position))
        .map(|o| (o.id, finger.position))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AnchorMode {
    /// Anchor fixed at the contact instant.
    #[default]
    Frozen,
    /// Anchor tracks the finger while contact lasts.
    Follow,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EngineConfig {
    pub anchor_mode: AnchorMode,
    /// Minimum idle time (s) before a new contact may start a tap.
    pub min_gap: f64,
}

/// Single-owner tap state for one finger.
#[derive(Debug, Clone)]
pub struct TapSession {
    profiles: TapProfiles,
    config: EngineConfig,
    phase: Phase,
    active_object: Option<u32>,
    material: Option<Material>,
    phase_entry_time: f64,
    contact_anchor: Vector2,
    finger: Option<FingerState>,
    last_time: f64,
    idle_since: f64,
}

impl TapSession {
    pub fn new(profiles: TapProfiles, config: EngineConfig) -> Self {
        Self {
            profiles,
            config,
            phase: Phase::Idle,
            active_object: None,
            material: None,
            phase_entry_time: f64::NEG_INFINITY,
            contact_anchor: Vector2::zeros(),
            finger: None,
            last_time: f64::NEG_INFINITY,
            idle_since: f64::NEG_INFINITY,
        }
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn active_object(&self) -> Option<u32> {
        self.active_object
    }

    pub fn material(&self) -> Option<Material> {
        self.material
    }

    pub fn phase_entry_time(&self) -> f64 {
        self.phase_entry_time
    }

    pub fn contact_anchor(&self) -> Vector2 {
        self.contact_anchor
    }

    pub fn finger(&self) -> Option<&FingerState> {
        self.finger.as_ref()
    }

    pub fn profiles(&self) -> &TapProfiles {
        &self.profiles
    }

    /// Replaces the finger state. Phase changes happen only in
    /// [`TapSession::advance`].
    pub fn ingest_pointer(&mut self, sample: FingerState) -> Result<()> {
        if !sample.t.is_finite() || !sample.position.iter().all(|v| v.is_finite()) {
            return Err(invalid("finger sample must be finite"));
        }
        if let Some(prev) = &self.finger {
            if sample.t < prev.t {
                return Err(Error::TimeRegression {
                    now: sample.t,
                    last: prev.t,
                });
            }
        }
        self.finger = Some(sample);
        Ok(())
    }

    /// Applies the transition rules at time `now`. At most one transition
    /// happens per call.
    pub fn advance(&mut self, scene: &Scene, now: f64) -> Result<Option<PhaseTransition>> {
        if !now.is_finite() {
            return Err(invalid("advance time must be finite"));
        }
        if now < self.last_time {
            return Err(Error::TimeRegression {
                now,
                last: self.last_time,
            });
        }
        self.last_time = now;
        let contact = self.finger.as_ref().and_then(|f| detect_contact(f, scene));

        let transition = match self.phase {
            Phase::Idle => match contact {
                Some((id, point)) if now - self.idle_since >= self.config.min_gap => {
                    let material = scene.get(id).map(|o| o.material);
                    self.active_object = Some(id);
                    self.material = material;
                    self.contact_anchor = point;
                    Some(self.enter(Phase::Attenuation, now, Some(id)))
                }
                _ => None,
            },
            Phase::Attenuation | Phase::Stationary => {
                let active = self.active_object;
                match contact {
                    Some((id, point)) if Some(id) == active => {
                        if self.config.anchor_mode == AnchorMode::Follow {
                            self.contact_anchor = point;
                        }
                        let material = self.material.expect("active session has a material");
                        if self.phase == Phase::Attenuation && now - self.phase_entry_time >= self.profiles.t_att(material) {
                            Some(self.enter(Phase::Stationary, now, active))
                        } else {
                            None
                        }
                    }
                    _ => {
                        let t = self.enter(Phase::Idle, now, active);
                        self.active_object = None;
                        self.material = None;
                        self.idle_since = now;
                        Some(t)
                    }
                }
            }
        };
        Ok(transition)
    }

    fn enter(&mut self, to: Phase, now: f64, object_id: Option<u32>) -> PhaseTransition {
        let from = self.phase;
        self.phase = to;
        self.phase_entry_time = now;
        PhaseTransition {
            t: now,
            from,
            to,
            object_id,
        }
    }

    /// Stimulus at time `t` plus the anchor it is offset from, or `None`
    /// while idle.
    pub fn drive_for(&self, t: f64) -> Option<(DriveSample, Vector2)> {
        let elapsed = (t - self.phase_entry_time).max(0.0);
        let profile = match (self.phase, self.material) {
            (Phase::Attenuation, Some(m)) => self.profiles.attenuation(m),
            (Phase::Stationary, Some(_)) => Profile::StationaryLm(self.profiles.stationary),
            _ => return None,
        };
        profile.sample(elapsed).ok().map(|s| (s, self.contact_anchor))
    }
}

/// One control tick of an offline replay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineFrame {
    pub t: f64,
    pub phase: Phase,
    pub object_id: Option<u32>,
    pub sample: DriveSample,
    pub anchor: Option<Vector2>,
}

impl EngineFrame {
    /// Panel-frame focus target, `anchor + offset`.
    pub fn target(&self) -> Option<Vector2> {
        self.anchor.map(|a| a + self.sample.focus_offset)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub rate: f64,
    pub t0: f64,
    pub frames: Vec<EngineFrame>,
    pub transitions: Vec<PhaseTransition>,
}

impl Rendered {
    pub fn series(&self) -> FrameSeries {
        FrameSeries {
            rate: self.rate,
            t0: self.t0,
            samples: self.frames.iter().map(|f| f.sample).collect(),
        }
    }
}

/// Replays a finger trace at a fixed frame rate. Frame `n` is at
/// `t_first + n/rate`; the finger is sampled by zero-order hold and the
/// session advanced once per frame. The frame count covers
/// `[t_first, t_last)` (at least one frame).
pub fn render_trace(
    trace: &[FingerState],
    scene: &Scene,
    profiles: &TapProfiles,
    config: &EngineConfig,
    rate: f64,
) -> Result<Rendered> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(invalid(format!("frame rate must be positive, got {rate}")));
    }
    let (first, last) = match (trace.first(), trace.last()) {
        (Some(f), Some(l)) => (f.t, l.t),
        _ => return Err(invalid("trace is empty")),
    };
    if let Some(i) = trace.windows(2).position(|w| !(w[1].t > w[0].t)) {
        return Err(invalid(format!(
            "trace timestamps must be strictly increasing (sample {} at {} s after {} s)",
            i + 1,
            trace[i + 1].t,
            trace[i].t
        )));
    }

    let mut session = TapSession::new(*profiles, *config);
    let n = frame_count(last - first, rate).max(1);
    let mut frames = Vec::with_capacity(n);
    let mut transitions = Vec::new();
    let mut next = 0;
    for k in 0..n {
        let t = frame_time(first, k, rate);
        while next < trace.len() && trace[next].t <= t {
            session.ingest_pointer(trace[next])?;
            next += 1;
        }
        if let Some(tr) = session.advance(scene, t)? {
            transitions.push(tr);
        }
        let drive = session.drive_for(t);
        frames.push(EngineFrame {
            t,
            phase: session.phase(),
            object_id: session.active_object(),
            sample: drive.map(|d| d.0).unwrap_or(DriveSample::SILENT),
            anchor: drive.map(|d| d.1),
        });
    }
    Ok(Rendered {
        rate,
        t0: first,
        frames,
        transitions,
    })
}

/// Device-rate command for the whole array.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveFrame {
    pub t: f64,
    /// World-space focus, absent while idle.
    pub focus: Option<Vector3>,
    pub amplitude_scale: f64,
    pub drive: DriveVector,
}

/// Turns engine frames into per-transducer drives by embedding the panel in
/// the horizontal plane `z = z_panel` above the array.
#[derive(Debug, Clone)]
pub struct DriveSynthesizer {
    array: ArrayModel,
    z_panel: f64,
    phase_bits: Option<u32>,
}

impl DriveSynthesizer {
    /// `phase_bits` of `None` keeps continuous phases.
    pub fn new(array: ArrayModel, z_panel: f64, phase_bits: Option<u32>) -> Result<Self> {
        if !(z_panel > 0.0 && z_panel.is_finite()) {
            return Err(invalid(format!("panel height must be positive, got {z_panel}")));
        }
        if let Some(b) = phase_bits {
            if !(1..=16).contains(&b) {
                return Err(invalid(format!("phase bits must be in 1..=16, got {b}")));
            }
        }
        Ok(Self {
            array,
            z_panel,
            phase_bits,
        })
    }

    pub fn array(&self) -> &ArrayModel {
        &self.array
    }

    pub fn panel_to_world(&self, p: &Vector2) -> Vector3 {
        Vector3::new(p.x, p.y, self.z_panel)
    }

    pub fn drive_frame(&self, frame: &EngineFrame) -> Result<DriveFrame> {
        let Some(target) = frame.target() else {
            return Ok(DriveFrame {
                t: frame.t,
                focus: None,
                amplitude_scale: 0.0,
                drive: DriveVector::off(self.array.len()),
            });
        };
        let focus = self.panel_to_world(&target);
        let mut drive = focus_phases(&self.array, &focus)?;
        if let Some(bits) = self.phase_bits {
            drive = quantize_phases(&drive, bits)?;
        }
        Ok(DriveFrame {
            t: frame.t,
            focus: Some(focus),
            amplitude_scale: frame.sample.amplitude_scale,
            drive: drive.scaled(frame.sample.amplitude_scale),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::default_rig;

    fn red_center() -> Vector2 {
        Scene::default().get(1).unwrap().region().center()
    }

    fn session() -> TapSession {
        TapSession::new(TapProfiles::default(), EngineConfig::default())
    }

    #[test]
    fn ingest_examples() {
        let mut s = session();
        s.ingest_pointer(FingerState::new(0.0, 0.1, 0.2, false)).unwrap();
        assert_eq!(s.phase(), Phase::Idle);
        s.ingest_pointer(FingerState::new(0.0, 0.1, 0.2, true)).unwrap();
        assert_eq!(s.phase(), Phase::Idle);
        assert!(matches!(
            s.ingest_pointer(FingerState::new(-0.1, 0.0, 0.0, true)),
            Err(Error::TimeRegression { .. })
        ));
    }

    #[test]
    fn contact_detection() {
        let scene = Scene::default();
        let c = red_center();
        assert_eq!(detect_contact(&FingerState::new(0.0, c.x, c.y, true), &scene), Some((1, c)));
        assert_eq!(detect_contact(&FingerState::new(0.0, 0.0, 0.0, true), &scene), None);
        assert_eq!(detect_contact(&FingerState::new(0.0, c.x, c.y, false), &scene), None);
    }

    #[test]
    fn overlap_goes_to_lowest_id() {
        let r = Rect::new(Vector2::new(0.0, 0.0), Vector2::new(1.0, 1.0)).unwrap();
        let scene = Scene::new(vec![
            VirtualObject::new(7, r, Material::LmCymbal, DisplayColor::Yellow).unwrap(),
            VirtualObject::new(3, r, Material::AmBalloon, DisplayColor::Red).unwrap(),
        ])
        .unwrap();
        let hit = detect_contact(&FingerState::new(0.0, 0.5, 0.5, true), &scene);
        assert_eq!(hit.map(|h| h.0), Some(3));
    }

    #[test]
    fn object_validation() {
        let r = Rect::new(Vector2::new(0.0, 0.0), Vector2::new(1.0, 1.0)).unwrap();
        assert!(VirtualObject::new(1, r, Material::AmBalloon, DisplayColor::Yellow).is_err());
        assert!(Rect::new(Vector2::new(0.0, 0.0), Vector2::new(0.0, 1.0)).is_err());
        let o = VirtualObject::new(1, r, Material::AmBalloon, DisplayColor::Red).unwrap();
        assert!(Scene::new(vec![o, o]).is_err());
    }

    #[test]
    fn tap_hold_release() {
        let scene = Scene::default();
        let c = red_center();
        let mut s = session();
        s.ingest_pointer(FingerState::new(0.0, c.x, c.y, true)).unwrap();
        let t = s.advance(&scene, 0.0).unwrap().unwrap();
        assert_eq!((t.from, t.to, t.object_id), (Phase::Idle, Phase::Attenuation, Some(1)));
        assert_eq!(s.contact_anchor(), c);
        assert_eq!(s.advance(&scene, 0.05).unwrap(), None);
        let t = s.advance(&scene, 0.1).unwrap().unwrap();
        assert_eq!((t.from, t.to), (Phase::Attenuation, Phase::Stationary));
        s.ingest_pointer(FingerState::new(0.3, c.x, c.y, false)).unwrap();
        let t = s.advance(&scene, 0.3).unwrap().unwrap();
        assert_eq!((t.from, t.to, t.object_id), (Phase::Stationary, Phase::Idle, Some(1)));
        assert_eq!(s.active_object(), None);
        assert!(s.drive_for(0.3).is_none());
        assert!(s.advance(&scene, 0.2).is_err());
    }

    #[test]
    fn early_release_aborts() {
        let scene = Scene::default();
        let c = red_center();
        let mut s = session();
        s.ingest_pointer(FingerState::new(0.0, c.x, c.y, true)).unwrap();
        s.advance(&scene, 0.0).unwrap();
        // sliding off the object counts as release
        s.ingest_pointer(FingerState::new(0.02, 0.0, 0.0, true)).unwrap();
        let t = s.advance(&scene, 0.02).unwrap().unwrap();
        assert_eq!(t.to, Phase::Idle);
    }

    #[test]
    fn frozen_and_follow_anchor() {
        let scene = Scene::default();
        let c = red_center();
        let moved = c + Vector2::new(5e-3, 0.0);
        for (mode, expected) in [(AnchorMode::Frozen, c), (AnchorMode::Follow, moved)] {
            let mut s = TapSession::new(
                TapProfiles::default(),
                EngineConfig {
                    anchor_mode: mode,
                    min_gap: 0.0,
                },
            );
            s.ingest_pointer(FingerState::new(0.0, c.x, c.y, true)).unwrap();
            s.advance(&scene, 0.0).unwrap();
            s.ingest_pointer(FingerState::new(0.01, moved.x, moved.y, true)).unwrap();
            s.advance(&scene, 0.01).unwrap();
            assert_eq!(s.drive_for(0.01).unwrap().1, expected);
        }
    }

    #[test]
    fn min_gap_debounces() {
        let scene = Scene::default();
        let c = red_center();
        let mut s = TapSession::new(
            TapProfiles::default(),
            EngineConfig {
                anchor_mode: AnchorMode::Frozen,
                min_gap: 0.02,
            },
        );
        s.ingest_pointer(FingerState::new(0.0, c.x, c.y, true)).unwrap();
        s.advance(&scene, 0.0).unwrap();
        s.ingest_pointer(FingerState::new(0.01, c.x, c.y, false)).unwrap();
        s.advance(&scene, 0.01).unwrap();
        s.ingest_pointer(FingerState::new(0.015, c.x, c.y, true)).unwrap();
        assert_eq!(s.advance(&scene, 0.015).unwrap(), None);
        assert_eq!(s.advance(&scene, 0.031).unwrap().map(|t| t.to), Some(Phase::Attenuation));
    }

    #[test]
    fn drive_per_phase() {
        let scene = Scene::default();
        let yellow = scene.get(2).unwrap().region().center();
        let mut s = session();
        assert!(s.drive_for(0.0).is_none());
        s.ingest_pointer(FingerState::new(0.0, yellow.x, yellow.y, true)).unwrap();
        s.advance(&scene, 0.0).unwrap();
        let lm = TapProfiles::default().lm;
        let (d, anchor) = s.drive_for(0.0125).unwrap();
        assert_eq!(anchor, yellow);
        assert_eq!(d.amplitude_scale, lm.a_max());
        assert!(d.focus_offset.norm() > 0.0);
        s.advance(&scene, 0.1).unwrap();
        assert_eq!(s.phase(), Phase::Stationary);
        for k in 0..200 {
            let (d, _) = s.drive_for(0.1 + k as f64 * 1e-3).unwrap();
            assert!(d.focus_offset.norm() <= 0.5e-3);
            assert_eq!(d.amplitude_scale, 1.0);
        }
    }

    #[test]
    fn replay_of_idle_trace() {
        let trace = [FingerState::new(0.0, 0.0, 0.0, false), FingerState::new(0.2, 0.01, 0.0, false)];
        let r = render_trace(&trace, &Scene::default(), &TapProfiles::default(), &EngineConfig::default(), 1000.0).unwrap();
        assert_eq!(r.frames.len(), 200);
        assert!(r.transitions.is_empty());
        assert!(r.frames.iter().all(|f| f.sample.amplitude_scale == 0.0 && f.phase == Phase::Idle));
    }

    #[test]
    fn replay_tap_and_hold() {
        let c = red_center();
        let trace: Vec<_> = (0..=50).map(|i| FingerState::new(i as f64 * 0.01, c.x, c.y, true)).collect();
        let r = render_trace(&trace, &Scene::default(), &TapProfiles::default(), &EngineConfig::default(), 1000.0).unwrap();
        assert_eq!(r.frames.len(), 500);
        // manual walk: contact at frame 0, t_att = 0.1 s reached at frame 100
        let phases: Vec<_> = r.transitions.iter().map(|t| (t.from, t.to)).collect();
        assert_eq!(phases, vec![(Phase::Idle, Phase::Attenuation), (Phase::Attenuation, Phase::Stationary)]);
        assert_eq!(r.transitions[0].t, 0.0);
        assert!((r.transitions[1].t - 0.1).abs() <= 1e-3 + 1e-12);
    }

    #[test]
    fn replay_two_taps() {
        let c = red_center();
        let trace = [
            FingerState::new(0.0, c.x, c.y, true),
            FingerState::new(0.05, c.x, c.y, false),
            FingerState::new(0.2, c.x, c.y, true),
            FingerState::new(0.25, c.x, c.y, false),
            FingerState::new(0.3, c.x, c.y, false),
        ];
        let r = render_trace(&trace, &Scene::default(), &TapProfiles::default(), &EngineConfig::default(), 1000.0).unwrap();
        let entries = r.transitions.iter().filter(|t| t.to == Phase::Attenuation).count();
        assert_eq!(entries, 2);
    }

    #[test]
    fn replay_rejects_bad_traces() {
        let scene = Scene::default();
        let p = TapProfiles::default();
        let c = EngineConfig::default();
        assert!(render_trace(&[], &scene, &p, &c, 1000.0).is_err());
        let unsorted = [FingerState::new(0.1, 0.0, 0.0, false), FingerState::new(0.1, 0.0, 0.0, false)];
        assert!(render_trace(&unsorted, &scene, &p, &c, 1000.0).is_err());
        assert!(render_trace(&unsorted[..1], &scene, &p, &c, 0.0).is_err());
    }

    #[test]
    fn drive_frames() {
        let synth = DriveSynthesizer::new(default_rig(), 0.2, Some(8)).unwrap();
        let idle = EngineFrame {
            t: 0.0,
            phase: Phase::Idle,
            object_id: None,
            sample: DriveSample::SILENT,
            anchor: None,
        };
        let f = synth.drive_frame(&idle).unwrap();
        assert!(f.focus.is_none());
        assert!(f.drive.amplitudes().iter().all(|a| *a == 0.0));

        let active = EngineFrame {
            t: 0.01,
            phase: Phase::Attenuation,
            object_id: Some(2),
            sample: DriveSample {
                amplitude_scale: 0.5,
                focus_offset: Vector2::new(1e-3, 0.0),
            },
            anchor: Some(Vector2::new(0.06, 0.0)),
        };
        let f = synth.drive_frame(&active).unwrap();
        assert_eq!(f.focus, Some(Vector3::new(0.061, 0.0, 0.2)));
        assert_eq!(f.drive.len(), 1512);
        assert!(f.drive.amplitudes().iter().all(|a| *a == 0.5));
        assert!(DriveSynthesizer::new(default_rig(), 0.0, None).is_err());
    }
}
