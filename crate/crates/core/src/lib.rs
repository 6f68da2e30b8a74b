//! Software model of an airborne-ultrasound tap-haptics rig.
//!
//! The crate covers the full path from a virtual finger touching a virtual
//! object to the per-transducer drive of a multi-unit 40 kHz phased array:
//!
//! - [`geometry`]: transducer units and their placement into a rig.
//! - [`field`]: focusing, complex pressure, radiation pressure and field grids.
//! - [`modulation`]: amplitude-modulated and laterally-modulated tap stimuli
//!   plus the low-frequency stationary pressure stimulus.
//! - [`engine`]: the contact-driven tap state machine and trace replay.

pub mod engine;
pub mod error;
pub mod field;
pub mod geometry;
pub mod modulation;

pub use error::{Error, Result};

/// 3D point/vector type used throughout (meters).
pub type Vector3 = nalgebra::Vector3<f64>;
/// 2D vector type used for panel coordinates (meters).
pub type Vector2 = nalgebra::Vector2<f64>;
/// Complex acoustic pressure (Pa).
pub type Complex = num_complex::Complex64;

/// Millimeters to meters.
pub const MM: f64 = 1e-3;
