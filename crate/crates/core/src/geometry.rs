//! Transducer units and multi-unit rigs.
//!
//! Coordinates are right-handed and in meters. Each unit emits along its
//! local +z axis from the z=0 plane; a rig places units in world space with a
//! rigid [`UnitPose`].

use nalgebra::{Rotation3, Unit};

use crate::error::{invalid, Result};
use crate::Vector3;

/// Transducer pitch of the default unit (m).
pub const DEFAULT_PITCH: f64 = 10.16e-3;
/// Transducers along the unit x axis in the default unit.
pub const DEFAULT_ROWS: usize = 18;
/// Transducers along the unit y axis in the default unit.
pub const DEFAULT_COLS: usize = 14;
pub const DEFAULT_CARRIER_FREQUENCY: f64 = 40_000.0;
pub const DEFAULT_SOUND_SPEED: f64 = 343.0;

const ROTATION_TOLERANCE: f64 = 1e-9;

/// Rectangular grid of transducers in a unit-local frame.
///
/// `rows` counts transducers along local x and `cols` along local y. The grid
/// is centered on the unit origin and ordered row-major (x index major).
#[derive(Debug, Clone, PartialEq)]
pub struct UnitLayout {
    rows: usize,
    cols: usize,
    pitch: f64,
    positions: Vec<Vector3>,
}

impl UnitLayout {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn positions(&self) -> &[Vector3] {
        &self.positions
    }

    /// Emission axis in the unit frame.
    pub fn normal(&self) -> Vector3 {
        Vector3::z()
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Footprint of the unit along local x and y, one pitch wider than the
    /// outermost transducer centers.
    pub fn footprint(&self) -> (f64, f64) {
        (self.rows as f64 * self.pitch, self.cols as f64 * self.pitch)
    }
}

/// Builds a centered `rows` × `cols` grid with the given pitch.
pub fn build_unit(rows: usize, cols: usize, pitch: f64) -> Result<UnitLayout> {
    if rows == 0 || cols == 0 {
        return Err(invalid(format!("unit dimensions must be >= 1, got {rows}x{cols}")));
    }
    if !(pitch > 0.0 && pitch.is_finite()) {
        return Err(invalid(format!("pitch must be positive, got {pitch}")));
    }
    let x0 = (rows - 1) as f64 / 2.0;
    let y0 = (cols - 1) as f64 / 2.0;
    let positions = (0..rows)
        .flat_map(|r| {
            (0..cols).map(move |c| {
                Vector3::new((r as f64 - x0) * pitch, (c as f64 - y0) * pitch, 0.0)
            })
        })
        .collect();
    Ok(UnitLayout {
        rows,
        cols,
        pitch,
        positions,
    })
}

/// The conventional 18×14, 10.16 mm pitch unit.
pub fn default_unit() -> UnitLayout {
    build_unit(DEFAULT_ROWS, DEFAULT_COLS, DEFAULT_PITCH).expect("default unit is valid")
}

/// Rigid placement of a unit: `world = rotation · local + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitPose {
    rotation: Rotation3<f64>,
    translation: Vector3,
}

impl UnitPose {
    pub fn identity() -> Self {
        Self {
            rotation: Rotation3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn from_translation(translation: Vector3) -> Self {
        Self {
            rotation: Rotation3::identity(),
            translation,
        }
    }

    /// Rotation given as an arbitrary 3×3 matrix; it must be orthonormal with
    /// determinant +1 to within 1e-9.
    pub fn from_matrix(rotation: nalgebra::Matrix3<f64>, translation: Vector3) -> Result<Self> {
        if !rotation.iter().all(|v| v.is_finite()) || !translation.iter().all(|v| v.is_finite()) {
            return Err(invalid("pose contains non-finite values"));
        }
        let gram = rotation.transpose() * rotation;
        let ortho_err = (gram - nalgebra::Matrix3::identity()).abs().max();
        if ortho_err > ROTATION_TOLERANCE {
            return Err(invalid(format!(
                "rotation is not orthonormal (max |RᵀR − I| = {ortho_err:.3e})"
            )));
        }
        let det = rotation.determinant();
        if (det - 1.0).abs() > ROTATION_TOLERANCE {
            return Err(invalid(format!("rotation determinant is {det}, expected +1")));
        }
        Ok(Self {
            rotation: Rotation3::from_matrix_unchecked(rotation),
            translation,
        })
    }

    /// Rotation of `angle` radians about `axis` (any non-zero length).
    pub fn from_axis_angle(axis: Vector3, angle: f64, translation: Vector3) -> Result<Self> {
        let norm = axis.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(invalid("rotation axis must be a non-zero finite vector"));
        }
        if !angle.is_finite() || !translation.iter().all(|v| v.is_finite()) {
            return Err(invalid("pose contains non-finite values"));
        }
        let axis = Unit::new_normalize(axis);
        Ok(Self {
            rotation: Rotation3::from_axis_angle(&axis, angle),
            translation,
        })
    }

    pub fn rotation(&self) -> &Rotation3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> Vector3 {
        self.translation
    }

    pub fn local_to_world(&self, p_local: &Vector3) -> Vector3 {
        self.rotation * p_local + self.translation
    }

    pub fn world_to_local(&self, p_world: &Vector3) -> Vector3 {
        self.rotation.inverse() * (p_world - self.translation)
    }

    pub fn direction_to_world(&self, d_local: &Vector3) -> Vector3 {
        self.rotation * d_local
    }
}

/// Free-function form of [`UnitPose::local_to_world`].
pub fn local_to_world(pose: &UnitPose, p_local: &Vector3) -> Vector3 {
    pose.local_to_world(p_local)
}

/// One transducer of an assembled rig.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transducer {
    pub position: Vector3,
    /// Unit-length emission axis.
    pub normal: Vector3,
    pub unit: usize,
    pub local: usize,
}

/// All transducers of a rig in world space, plus the carrier parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayModel {
    units: Vec<(UnitLayout, UnitPose)>,
    transducers: Vec<Transducer>,
    carrier_frequency: f64,
    sound_speed: f64,
}

impl ArrayModel {
    pub fn units(&self) -> &[(UnitLayout, UnitPose)] {
        &self.units
    }

    pub fn transducers(&self) -> &[Transducer] {
        &self.transducers
    }

    pub fn len(&self) -> usize {
        self.transducers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transducers.is_empty()
    }

    pub fn carrier_frequency(&self) -> f64 {
        self.carrier_frequency
    }

    pub fn sound_speed(&self) -> f64 {
        self.sound_speed
    }

    pub fn wavelength(&self) -> f64 {
        self.sound_speed / self.carrier_frequency
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength()
    }
}

/// Places every unit with its pose and flattens the transducers, unit index
/// major and local index minor.
pub fn assemble_rig(
    spec: &[(UnitLayout, UnitPose)],
    carrier_frequency: f64,
    sound_speed: f64,
) -> Result<ArrayModel> {
    if spec.is_empty() {
        return Err(invalid("rig needs at least one unit"));
    }
    if !(carrier_frequency > 0.0 && carrier_frequency.is_finite()) {
        return Err(invalid(format!("carrier frequency must be positive, got {carrier_frequency}")));
    }
    if !(sound_speed > 0.0 && sound_speed.is_finite()) {
        return Err(invalid(format!("sound speed must be positive, got {sound_speed}")));
    }
    // Poses built through the public constructors are already valid; recheck
    // so a pose assembled by other means cannot slip through.
    for (i, (_, pose)) in spec.iter().enumerate() {
        UnitPose::from_matrix(*pose.rotation.matrix(), pose.translation)
            .map_err(|e| invalid(format!("unit {i}: {e}")))?;
    }

    let transducers = spec
        .iter()
        .enumerate()
        .flat_map(|(unit, (layout, pose))| {
            let normal = pose.direction_to_world(&layout.normal()).normalize();
            layout
                .positions()
                .iter()
                .enumerate()
                .map(move |(local, p)| Transducer {
                    position: pose.local_to_world(p),
                    normal,
                    unit,
                    local,
                })
        })
        .collect();

    Ok(ArrayModel {
        units: spec.to_vec(),
        transducers,
        carrier_frequency,
        sound_speed,
    })
}

/// Coplanar tiling of identical units, `columns` along x and `rows` along y,
/// footprints touching, centered on the world origin and emitting along +z.
pub fn tiled_rig_spec(unit: &UnitLayout, columns: usize, rows: usize) -> Vec<(UnitLayout, UnitPose)> {
    let (w, h) = unit.footprint();
    let cx = (columns as f64 - 1.0) / 2.0;
    let cy = (rows as f64 - 1.0) / 2.0;
    (0..rows)
        .flat_map(|j| (0..columns).map(move |i| (i, j)))
        .map(|(i, j)| {
            let t = Vector3::new((i as f64 - cx) * w, (j as f64 - cy) * h, 0.0);
            (unit.clone(), UnitPose::from_translation(t))
        })
        .collect()
}

/// Six default units tiled 3 × 2 at 40 kHz in 343 m/s air.
pub fn default_rig() -> ArrayModel {
    let spec = tiled_rig_spec(&default_unit(), 3, 2);
    assemble_rig(&spec, DEFAULT_CARRIER_FREQUENCY, DEFAULT_SOUND_SPEED).expect("default rig is valid")
}
