//! Complex pressure, radiation pressure and focal-spot metrics for a driven
//! [`ArrayModel`].
//!
//! Each transducer is a point source with a far-field directivity:
//!
//! ```text
//! p(x) = Σ_i a_i · P_ref · D(θ_i) / d_i · exp(j(k·d_i + φ_i))
//! ```
//!
//! and the radiation pressure on a perfectly reflecting surface is
//! `2|p|² / (ρc²)`.

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::geometry::ArrayModel;
use crate::{Complex, Vector3};

/// Evaluation points closer than this to any transducer are rejected.
pub const NEAR_FIELD_GUARD: f64 = 1e-3;
pub const DEFAULT_PISTON_RADIUS: f64 = 4.5e-3;
pub const DEFAULT_AIR_DENSITY: f64 = 1.21;

/// Angular emission pattern of a single transducer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Directivity {
    Omni,
    /// Far-field rigid circular piston `2·J₁(ka·sinθ)/(ka·sinθ)`.
    Piston { radius: f64 },
}

impl Directivity {
    pub fn gain(&self, wavenumber: f64, sin_theta: f64) -> f64 {
        match *self {
            Directivity::Omni => 1.0,
            Directivity::Piston { radius } => {
                let x = wavenumber * radius * sin_theta;
                if x.abs() < 1e-8 {
                    1.0
                } else {
                    2.0 * libm::j1(x) / x
                }
            }
        }
    }
}

/// Propagation model parameters that are not part of the array geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldModel {
    pub directivity: Directivity,
    /// Pressure amplitude at 1 m on-axis for a fully driven element (Pa·m).
    pub reference_pressure: f64,
    /// Medium density (kg/m³).
    pub density: f64,
}

impl Default for FieldModel {
    fn default() -> Self {
        Self {
            directivity: Directivity::Piston {
                radius: DEFAULT_PISTON_RADIUS,
            },
            reference_pressure: 1.0,
            density: DEFAULT_AIR_DENSITY,
        }
    }
}

impl FieldModel {
    pub fn omni() -> Self {
        Self {
            directivity: Directivity::Omni,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Directivity::Piston { radius } = self.directivity {
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(invalid(format!("piston radius must be positive, got {radius}")));
            }
        }
        if !(self.reference_pressure > 0.0 && self.reference_pressure.is_finite()) {
            return Err(invalid("reference pressure must be positive"));
        }
        if !(self.density > 0.0 && self.density.is_finite()) {
            return Err(invalid("density must be positive"));
        }
        Ok(())
    }

    /// Complex pressure at `point`, summed over transducers in rig order.
    pub fn pressure_at(&self, array: &ArrayModel, drive: &DriveVector, point: &Vector3) -> Result<Complex> {
        check_drive_len(array, drive)?;
        let k = array.wavenumber();
        let mut p = Complex::new(0.0, 0.0);
        for (i, tr) in array.transducers().iter().enumerate() {
            let diff = point - tr.position;
            let d = diff.norm();
            if !(d >= NEAR_FIELD_GUARD) {
                return Err(Error::TooClose {
                    transducer: i,
                    distance: d,
                    min: NEAR_FIELD_GUARD,
                });
            }
            let amp = drive.amplitudes[i];
            if amp == 0.0 {
                continue;
            }
            let sin_theta = tr.normal.cross(&diff).norm() / d;
            let mag = amp * self.reference_pressure * self.directivity.gain(k, sin_theta) / d;
            p += Complex::from_polar(mag, k * d + drive.phases[i]);
        }
        Ok(p)
    }

    /// Magnitude each element would contribute at `point` at its own
    /// amplitude; their sum bounds `|pressure_at(point)|` for any phases.
    pub fn element_magnitudes(&self, array: &ArrayModel, drive: &DriveVector, point: &Vector3) -> Result<Vec<f64>> {
        check_drive_len(array, drive)?;
        let k = array.wavenumber();
        array
            .transducers()
            .iter()
            .enumerate()
            .map(|(i, tr)| {
                let diff = point - tr.position;
                let d = diff.norm();
                if !(d >= NEAR_FIELD_GUARD) {
                    return Err(Error::TooClose {
                        transducer: i,
                        distance: d,
                        min: NEAR_FIELD_GUARD,
                    });
                }
                let sin_theta = tr.normal.cross(&diff).norm() / d;
                Ok(drive.amplitudes[i] * self.reference_pressure * self.directivity.gain(k, sin_theta) / d)
            })
            .collect()
    }

    pub fn radiation_pressure(&self, p: Complex, sound_speed: f64) -> f64 {
        radiation_pressure(p, self.density, sound_speed)
    }

    /// Samples pressure over a planar grid. Cells are computed independently
    /// (in parallel) with [`FieldModel::pressure_at`], so each cell is
    /// bit-identical to a direct call at the same point.
    pub fn sample_grid(&self, array: &ArrayModel, drive: &DriveVector, spec: &GridSpec) -> Result<FieldGrid> {
        check_drive_len(array, drive)?;
        let nu = spec.nu;
        let cells: Vec<Result<Complex>> = (0..spec.nu * spec.nv)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx % nu, idx / nu);
                self.pressure_at(array, drive, &spec.point(i, j))
            })
            .collect();

        let mut complex_pressure = Vec::with_capacity(cells.len());
        for (idx, cell) in cells.into_iter().enumerate() {
            match cell {
                Ok(p) => complex_pressure.push(p),
                Err(e) => {
                    return Err(Error::GridCell {
                        u: idx % nu,
                        v: idx / nu,
                        source: Box::new(e),
                    })
                }
            }
        }
        let sound_speed = array.sound_speed();
        let radiation = complex_pressure
            .iter()
            .map(|p| radiation_pressure(*p, self.density, sound_speed))
            .collect();
        Ok(FieldGrid {
            spec: *spec,
            density: self.density,
            sound_speed,
            complex_pressure,
            radiation_pressure: radiation,
        })
    }
}

fn check_drive_len(array: &ArrayModel, drive: &DriveVector) -> Result<()> {
    if drive.len() != array.len() {
        return Err(invalid(format!(
            "drive has {} entries but the array has {} transducers",
            drive.len(),
            array.len()
        )));
    }
    Ok(())
}

/// Radiation pressure on a perfectly reflecting target, `2|p|²/(ρc²)`.
pub fn radiation_pressure(p: Complex, density: f64, sound_speed: f64) -> f64 {
    2.0 * p.norm_sqr() / (density * sound_speed * sound_speed)
}

/// Per-transducer phase (rad, in `[0, 2π)`) and amplitude (in `[0, 1]`).
#[derive(Debug, Clone, PartialEq)]
pub struct DriveVector {
    phases: Vec<f64>,
    amplitudes: Vec<f64>,
}

impl DriveVector {
    pub fn new(phases: Vec<f64>, amplitudes: Vec<f64>) -> Result<Self> {
        if phases.len() != amplitudes.len() {
            return Err(invalid("phase and amplitude counts differ"));
        }
        if let Some(p) = phases.iter().find(|p| !(**p >= 0.0 && **p < TAU)) {
            return Err(invalid(format!("phase {p} outside [0, 2π)")));
        }
        if let Some(a) = amplitudes.iter().find(|a| !(**a >= 0.0 && **a <= 1.0)) {
            return Err(invalid(format!("amplitude {a} outside [0, 1]")));
        }
        Ok(Self { phases, amplitudes })
    }

    /// All elements silent.
    pub fn off(n: usize) -> Self {
        Self {
            phases: vec![0.0; n],
            amplitudes: vec![0.0; n],
        }
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// Multiplies every amplitude by `scale` (clamped to `[0, 1]`).
    pub fn scaled(&self, scale: f64) -> Self {
        let s = scale.clamp(0.0, 1.0);
        Self {
            phases: self.phases.clone(),
            amplitudes: self.amplitudes.iter().map(|a| a * s).collect(),
        }
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_phase(phase: f64) -> f64 {
    let w = phase.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Single-focus solution: every element is delayed so that its wave arrives
/// at `focus` with zero phase. Amplitudes are all 1.
pub fn focus_phases(array: &ArrayModel, focus: &Vector3) -> Result<DriveVector> {
    let k = array.wavenumber();
    let phases = array
        .transducers()
        .iter()
        .enumerate()
        .map(|(i, tr)| {
            let d = (focus - tr.position).norm();
            if !(d >= NEAR_FIELD_GUARD) {
                return Err(Error::TooClose {
                    transducer: i,
                    distance: d,
                    min: NEAR_FIELD_GUARD,
                });
            }
            Ok(wrap_phase(-k * d))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = phases.len();
    Ok(DriveVector {
        phases,
        amplitudes: vec![1.0; n],
    })
}

/// Rounds every phase to the nearest multiple of `2π / 2^bits`.
pub fn quantize_phases(drive: &DriveVector, bits: u32) -> Result<DriveVector> {
    if !(1..=16).contains(&bits) {
        return Err(invalid(format!("phase bits must be in 1..=16, got {bits}")));
    }
    let levels = 1u64 << bits;
    let step = TAU / levels as f64;
    let phases = drive
        .phases
        .iter()
        .map(|p| ((p / step).round() as u64 % levels) as f64 * step)
        .collect();
    Ok(DriveVector {
        phases,
        amplitudes: drive.amplitudes.clone(),
    })
}

/// Planar sampling lattice: cell `(i, j)` sits at
/// `origin + i·spacing·axis_u + j·spacing·axis_v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    origin: Vector3,
    axis_u: Vector3,
    axis_v: Vector3,
    nu: usize,
    nv: usize,
    spacing: f64,
}

impl GridSpec {
    pub fn new(origin: Vector3, axis_u: Vector3, axis_v: Vector3, nu: usize, nv: usize, spacing: f64) -> Result<Self> {
        if nu == 0 || nv == 0 {
            return Err(invalid(format!("grid needs at least one cell, got {nu}x{nv}")));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(invalid(format!("grid spacing must be positive, got {spacing}")));
        }
        if (axis_u.norm() - 1.0).abs() > 1e-9 || (axis_v.norm() - 1.0).abs() > 1e-9 {
            return Err(invalid("grid axes must be unit vectors"));
        }
        if axis_u.dot(&axis_v).abs() > 1e-9 {
            return Err(invalid("grid axes must be orthogonal"));
        }
        if !origin.iter().all(|v| v.is_finite()) {
            return Err(invalid("grid origin must be finite"));
        }
        Ok(Self {
            origin,
            axis_u,
            axis_v,
            nu,
            nv,
            spacing,
        })
    }

    /// Grid whose middle coincides with `center`.
    pub fn centered(center: Vector3, axis_u: Vector3, axis_v: Vector3, nu: usize, nv: usize, spacing: f64) -> Result<Self> {
        let half_u = (nu.max(1) - 1) as f64 * spacing / 2.0;
        let half_v = (nv.max(1) - 1) as f64 * spacing / 2.0;
        Self::new(center - axis_u * half_u - axis_v * half_v, axis_u, axis_v, nu, nv, spacing)
    }

    /// Horizontal (x, y) grid centered at `center`.
    pub fn horizontal(center: Vector3, nu: usize, nv: usize, spacing: f64) -> Result<Self> {
        Self::centered(center, Vector3::x(), Vector3::y(), nu, nv, spacing)
    }

    pub fn point(&self, i: usize, j: usize) -> Vector3 {
        self.origin + self.axis_u * (i as f64 * self.spacing) + self.axis_v * (j as f64 * self.spacing)
    }

    pub fn origin(&self) -> Vector3 {
        self.origin
    }

    pub fn axis_u(&self) -> Vector3 {
        self.axis_u
    }

    pub fn axis_v(&self) -> Vector3 {
        self.axis_v
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn nv(&self) -> usize {
        self.nv
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }
}

/// Sampled complex and radiation pressure. Cells are stored v-major
/// (`j·nu + i`), matching image row order.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    spec: GridSpec,
    density: f64,
    sound_speed: f64,
    complex_pressure: Vec<Complex>,
    radiation_pressure: Vec<f64>,
}

impl FieldGrid {
    /// Grid built directly from radiation-pressure values, with the complex
    /// pressure reconstructed as a real amplitude. Mainly for analysis of
    /// synthetic fields.
    pub fn from_radiation(spec: GridSpec, density: f64, sound_speed: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.nu * spec.nv {
            return Err(invalid("value count does not match grid size"));
        }
        if values.iter().any(|v| !(*v >= 0.0)) {
            return Err(invalid("radiation pressure must be non-negative"));
        }
        let complex_pressure: Vec<Complex> = values
            .iter()
            .map(|v| Complex::new((v * density * sound_speed * sound_speed / 2.0).sqrt(), 0.0))
            .collect();
        let radiation_pressure = complex_pressure
            .iter()
            .map(|p| radiation_pressure(*p, density, sound_speed))
            .collect();
        Ok(Self {
            spec,
            density,
            sound_speed,
            complex_pressure,
            radiation_pressure,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn sound_speed(&self) -> f64 {
        self.sound_speed
    }

    pub fn complex(&self, i: usize, j: usize) -> Complex {
        self.complex_pressure[j * self.spec.nu + i]
    }

    pub fn radiation(&self, i: usize, j: usize) -> f64 {
        self.radiation_pressure[j * self.spec.nu + i]
    }

    pub fn complex_values(&self) -> &[Complex] {
        &self.complex_pressure
    }

    pub fn radiation_values(&self) -> &[f64] {
        &self.radiation_pressure
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpotMetrics {
    pub peak_value: f64,
    pub peak_location: Vector3,
    pub peak_index: (usize, usize),
    /// Full width at half maximum along `axis_u`, if both crossings exist.
    pub fwhm_u: Option<f64>,
    pub fwhm_v: Option<f64>,
}

/// Peak and full width at half maximum of the radiation pressure along both
/// grid axes through the peak. Ties go to the lowest `(u, v)` index.
pub fn focal_metrics(grid: &FieldGrid) -> Result<SpotMetrics> {
    let (nu, nv) = (grid.spec.nu, grid.spec.nv);
    if nu < 3 || nv < 3 {
        return Err(invalid(format!("focal metrics need at least 3x3 samples, got {nu}x{nv}")));
    }
    let mut peak = (0, 0);
    let mut peak_value = grid.radiation(0, 0);
    for i in 0..nu {
        for j in 0..nv {
            let v = grid.radiation(i, j);
            if v > peak_value {
                peak_value = v;
                peak = (i, j);
            }
        }
    }
    let row: Vec<f64> = (0..nu).map(|i| grid.radiation(i, peak.1)).collect();
    let col: Vec<f64> = (0..nv).map(|j| grid.radiation(peak.0, j)).collect();
    let spacing = grid.spec.spacing;
    Ok(SpotMetrics {
        peak_value,
        peak_location: grid.spec.point(peak.0, peak.1),
        peak_index: peak,
        fwhm_u: half_max_width(&row, peak.0).map(|w| w * spacing),
        fwhm_v: half_max_width(&col, peak.1).map(|w| w * spacing),
    })
}

/// Width in samples between the linearly interpolated half-maximum crossings
/// on either side of `peak`.
fn half_max_width(values: &[f64], peak: usize) -> Option<f64> {
    let half = values[peak] / 2.0;
    if !(half > 0.0) {
        return None;
    }
    let left = (0..peak).rev().find(|&k| values[k] < half).map(|k| {
        let (a, b) = (values[k], values[k + 1]);
        k as f64 + (half - a) / (b - a)
    })?;
    let right = (peak + 1..values.len()).find(|&k| values[k] < half).map(|k| {
        let (a, b) = (values[k - 1], values[k]);
        (k - 1) as f64 + (a - half) / (a - b)
    })?;
    Some(right - left)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{assemble_rig, build_unit, default_rig, UnitPose};
    use std::f64::consts::PI;

    fn single(freq: f64, c: f64) -> ArrayModel {
        assemble_rig(&[(build_unit(1, 1, 0.01).unwrap(), UnitPose::identity())], freq, c).unwrap()
    }

    #[test]
    fn phase_zero_at_one_wavelength() {
        let a = single(40e3, 343.0);
        let d = focus_phases(&a, &Vector3::new(0.0, 0.0, a.wavelength())).unwrap();
        let p = d.phases()[0];
        assert!(p.min(TAU - p) < 1e-12, "phase {p}");
    }

    #[test]
    fn equidistant_elements_share_phase() {
        let a = assemble_rig(&[(build_unit(2, 1, 0.02).unwrap(), UnitPose::identity())], 40e3, 343.0).unwrap();
        let d = focus_phases(&a, &Vector3::new(0.0, 0.0, 0.15)).unwrap();
        assert_eq!(d.phases()[0], d.phases()[1]);
    }

    #[test]
    fn focus_too_close() {
        let a = single(40e3, 343.0);
        assert!(matches!(
            focus_phases(&a, &Vector3::new(0.0, 0.0, 0.5e-3)),
            Err(Error::TooClose { .. })
        ));
        let drive = DriveVector::new(vec![0.0], vec![1.0]).unwrap();
        assert!(FieldModel::default().pressure_at(&a, &drive, &Vector3::new(0.0, 0.0, 0.2e-3)).is_err());
    }

    #[test]
    fn quantize_examples() {
        let d = DriveVector::new(vec![PI / 3.0, 0.0, TAU - 1e-6], vec![1.0, 0.5, 1.0]).unwrap();
        let q = quantize_phases(&d, 8).unwrap();
        let step = TAU / 256.0;
        assert_eq!(q.phases()[0], (PI / 3.0 / step).round() * step);
        assert_eq!(q.phases()[1], 0.0);
        // 2π − ε rounds to the full turn and wraps to zero
        assert_eq!(q.phases()[2], 0.0);
        assert_eq!(q.amplitudes(), d.amplitudes());
        assert!(quantize_phases(&d, 0).is_err());
        assert!(quantize_phases(&d, 17).is_err());
    }

    #[test]
    fn drive_vector_validation() {
        assert!(DriveVector::new(vec![0.0], vec![1.5]).is_err());
        assert!(DriveVector::new(vec![TAU], vec![1.0]).is_err());
        assert!(DriveVector::new(vec![-0.1], vec![1.0]).is_err());
        assert!(DriveVector::new(vec![0.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn silent_array_gives_zero() {
        let rig = default_rig();
        let p = FieldModel::default()
            .pressure_at(&rig, &DriveVector::off(rig.len()), &Vector3::new(0.0, 0.0, 0.2))
            .unwrap();
        assert_eq!(p, Complex::new(0.0, 0.0));
    }

    #[test]
    fn single_omni_element_at_one_meter() {
        let a = single(40e3, 343.0);
        let phase = wrap_phase(-a.wavenumber() * 1.0);
        let drive = DriveVector::new(vec![phase], vec![1.0]).unwrap();
        let p = FieldModel::omni().pressure_at(&a, &drive, &Vector3::new(0.0, 0.0, 1.0)).unwrap();
        assert!((p.re - 1.0).abs() < 1e-12 && p.im.abs() < 1e-12, "{p}");
    }

    #[test]
    fn radiation_pressure_law() {
        let (rho, c) = (1.21, 343.0);
        assert_eq!(radiation_pressure(Complex::new(0.0, 0.0), rho, c), 0.0);
        let p = Complex::new((rho * c * c / 2.0).sqrt(), 0.0);
        assert!((radiation_pressure(p, rho, c) - 1.0).abs() < 1e-12);
        let q = Complex::new(3.0, -4.0);
        let r = radiation_pressure(q * 2.0, rho, c) / radiation_pressure(q, rho, c);
        assert!((r - 4.0).abs() < 1e-12);
    }

    #[test]
    fn piston_directivity_shape() {
        let d = Directivity::Piston { radius: 4.5e-3 };
        let k = TAU / (343.0 / 40e3);
        assert_eq!(d.gain(k, 0.0), 1.0);
        let g = d.gain(k, 0.5);
        assert!(g > 0.0 && g < 1.0);
        // small-argument series 1 − x²/8
        let x = 1e-3;
        let s = x / (k * 4.5e-3);
        assert!((d.gain(k, s) - (1.0 - x * x / 8.0)).abs() < 1e-12);
        assert_eq!(Directivity::Omni.gain(k, 0.9), 1.0);
    }

    #[test]
    fn one_cell_grid_matches_point() {
        let rig = default_rig();
        let model = FieldModel::default();
        let q = Vector3::new(0.01, -0.02, 0.2);
        let drive = focus_phases(&rig, &Vector3::new(0.0, 0.0, 0.2)).unwrap();
        let spec = GridSpec::new(q, Vector3::x(), Vector3::y(), 1, 1, 1e-3).unwrap();
        let grid = model.sample_grid(&rig, &drive, &spec).unwrap();
        assert_eq!(grid.complex(0, 0), model.pressure_at(&rig, &drive, &q).unwrap());
    }

    #[test]
    fn grid_errors_carry_cell_index() {
        let a = single(40e3, 343.0);
        let drive = DriveVector::new(vec![0.0], vec![1.0]).unwrap();
        let spec = GridSpec::new(Vector3::new(-2e-3, 0.0, 0.0), Vector3::x(), Vector3::y(), 3, 1, 2e-3).unwrap();
        match FieldModel::default().sample_grid(&a, &drive, &spec) {
            Err(Error::GridCell { u: 1, v: 0, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn grid_spec_validation() {
        let o = Vector3::zeros();
        assert!(GridSpec::new(o, Vector3::x(), Vector3::x(), 3, 3, 1e-3).is_err());
        assert!(GridSpec::new(o, Vector3::x() * 2.0, Vector3::y(), 3, 3, 1e-3).is_err());
        assert!(GridSpec::new(o, Vector3::x(), Vector3::y(), 0, 3, 1e-3).is_err());
        assert!(GridSpec::new(o, Vector3::x(), Vector3::y(), 3, 3, 0.0).is_err());
        let c = GridSpec::horizontal(Vector3::new(0.0, 0.0, 0.2), 101, 101, 2e-3).unwrap();
        assert!((c.point(50, 50) - Vector3::new(0.0, 0.0, 0.2)).norm() < 1e-15);
    }

    fn synthetic(values: impl Fn(f64, f64) -> f64, n: usize, spacing: f64) -> FieldGrid {
        let spec = GridSpec::horizontal(Vector3::zeros(), n, n, spacing).unwrap();
        let vals = (0..n * n)
            .map(|idx| {
                let p = spec.point(idx % n, idx / n);
                values(p.x, p.y)
            })
            .collect();
        FieldGrid::from_radiation(spec, 1.21, 343.0, vals).unwrap()
    }

    #[test]
    fn gaussian_fwhm() {
        let (su, sv) = (3e-3, 5e-3);
        let g = synthetic(|x, y| (-(x * x) / (2.0 * su * su) - y * y / (2.0 * sv * sv)).exp(), 81, 0.5e-3);
        let m = focal_metrics(&g).unwrap();
        assert_eq!(m.peak_index, (40, 40));
        assert!((m.fwhm_u.unwrap() - 2.3548 * su).abs() <= 0.5e-3);
        assert!((m.fwhm_v.unwrap() - 2.3548 * sv).abs() <= 0.5e-3);
    }

    #[test]
    fn constant_grid_has_no_fwhm() {
        let m = focal_metrics(&synthetic(|_, _| 2.0, 5, 1e-3)).unwrap();
        assert_eq!(m.fwhm_u, None);
        assert_eq!(m.fwhm_v, None);
        // all equal: lowest index wins
        assert_eq!(m.peak_index, (0, 0));
    }

    #[test]
    fn one_sided_crossing_is_absent() {
        // monotone ramp along x: no crossing on the high side
        let m = focal_metrics(&synthetic(|x, _| 10.0 + x * 1e3, 11, 1e-3)).unwrap();
        assert_eq!(m.fwhm_u, None);
        assert!(focal_metrics(&synthetic(|_, _| 1.0, 2, 1e-3)).is_err());
    }

    #[test]
    fn linearity_in_amplitude() {
        let rig = default_rig();
        let model = FieldModel::default();
        let focus = Vector3::new(0.03, 0.01, 0.18);
        let drive = focus_phases(&rig, &focus).unwrap();
        let q = Vector3::new(0.035, 0.0, 0.17);
        let p = model.pressure_at(&rig, &drive, &q).unwrap();
        let s = 0.37;
        let ps = model.pressure_at(&rig, &drive.scaled(s), &q).unwrap();
        assert!((ps - p * s).norm() <= 1e-12 * p.norm());
        let r = model.radiation_pressure(ps, rig.sound_speed()) / model.radiation_pressure(p, rig.sound_speed());
        assert!((r - s * s).abs() < 1e-12);
    }
}
