//! JSON messages exchanged over the live WebSocket session. Each text frame
//! carries one message; inbound frames may also carry several messages
//! separated by newlines.

use serde::{Deserialize, Serialize};

use tap_core::engine::{Phase, Scene};
use tap_core::MM;

use crate::config::color_name;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WirePhase {
    Idle,
    Attenuation,
    Stationary,
}

impl From<Phase> for WirePhase {
    fn from(p: Phase) -> Self {
        match p {
            Phase::Idle => WirePhase::Idle,
            Phase::Attenuation => WirePhase::Attenuation,
            Phase::Stationary => WirePhase::Stationary,
        }
    }
}

impl From<WirePhase> for Phase {
    fn from(p: WirePhase) -> Self {
        match p {
            WirePhase::Idle => Phase::Idle,
            WirePhase::Attenuation => Phase::Attenuation,
            WirePhase::Stationary => Phase::Stationary,
        }
    }
}

/// Client → server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum Inbound {
    FingerSample { t_ms: f64, x_mm: f64, y_mm: f64, down: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub id: u32,
    /// `[x0, y0, x1, y1]` in panel millimeters.
    pub rect_mm: [f64; 4],
    pub color: String,
    pub material: String,
}

/// Server → client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Outbound {
    StateUpdate {
        t_ms: f64,
        phase: WirePhase,
        object_id: Option<u32>,
        amplitude: f64,
        offset_u_mm: f64,
        offset_v_mm: f64,
    },
    PhaseTransition {
        t_ms: f64,
        from: WirePhase,
        to: WirePhase,
        object_id: Option<u32>,
    },
    /// Sent once on connect so the panel can draw the objects.
    Scene { objects: Vec<SceneObject> },
    Error { message: String },
}

impl Outbound {
    pub fn scene(scene: &Scene) -> Self {
        Outbound::Scene {
            objects: scene
                .objects()
                .iter()
                .map(|o| {
                    let (min, max) = (o.region().min() / MM, o.region().max() / MM);
                    SceneObject {
                        id: o.id(),
                        rect_mm: [min.x, min.y, max.x, max.y],
                        color: color_name(o.color()).to_string(),
                        material: o.material().name().to_string(),
                    }
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("outbound messages serialize")
    }
}

/// Parses every non-blank line of a text frame.
pub fn parse_inbound(frame: &str) -> Vec<Result<Inbound, String>> {
    frame
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str::<Inbound>(l).map_err(|e| format!("malformed message: {e}")))
        .collect()
}
