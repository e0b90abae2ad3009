//! Complex field of an array of isotropic point sources on a receive plane.
//!
//! Each element contributes `s_k · λ/(4π d_k) · exp(−j 2π d_k / λ)`. The exact
//! path uses the true distance; the paraxial path replaces the amplitude with
//! `λ/(4πz)` and the distance with its second-order binomial expansion. Field
//! magnitudes carry no absolute power calibration and should be read as
//! relative values.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{ensure_positive, Error, Result};
use crate::exec::Exec;
use crate::geometry::{Cylindrical, Point3, UcaLayout, Wavelength};
use crate::modem;

/// Receive point in cylindrical coordinates.
pub type FieldPoint = Cylindrical;

/// Anything that radiates from a fixed set of element positions.
pub trait Radiator {
    fn element_positions(&self) -> Vec<Point3>;

    fn element_count(&self) -> usize {
        self.element_positions().len()
    }
}

impl Radiator for UcaLayout {
    fn element_positions(&self) -> Vec<Point3> {
        UcaLayout::element_positions(self)
    }

    fn element_count(&self) -> usize {
        UcaLayout::element_count(self)
    }
}

/// Per-element complex drive amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct Excitation(Vec<Complex64>);

impl Excitation {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::malformed(None, "excitation has non-finite entries"));
        }
        Ok(Self(values))
    }

    /// Unit amplitude on every element.
    pub fn uniform(n: usize) -> Self {
        Self(vec![Complex64::new(1.0, 0.0); n])
    }

    /// Only element `k` driven, with unit amplitude.
    pub fn one_hot(n: usize, k: usize) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[k] = Complex64::new(1.0, 0.0);
        Self(v)
    }

    /// OAM mode `l` on an `n`-element UCA: column `l` of the unit IDFT scaled by √power.
    pub fn mode(l: usize, n: usize, power: f64) -> Self {
        let amp = power.sqrt();
        Self((0..n).map(|k| amp * modem::idft_entry(n, k, l)).collect())
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Σ|s_k|².
    pub fn total_power(&self) -> f64 {
        self.0.iter().map(|s| s.norm_sqr()).sum()
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        Self(self.0.iter().map(|s| a * s).collect())
    }

    pub fn add(&self, other: &Excitation) -> Result<Self> {
        check_len("excitation sum", self.len(), other.len())?;
        Ok(Self(
            self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect(),
        ))
    }
}

impl From<Vec<Complex64>> for Excitation {
    fn from(v: Vec<Complex64>) -> Self {
        Self(v)
    }
}

fn check_len(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            actual,
        })
    }
}

/// Euclidean distance from an element to a receive point.
pub fn path_length_exact(element: Point3, point: FieldPoint) -> f64 {
    let (s, c) = point.phi.sin_cos();
    let dx = point.rho * c - element.x;
    let dy = point.rho * s - element.y;
    let dz = point.z - element.z;
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Second-order binomial expansion of the path length from an element at
/// polar position (`transmit_radius`, `element_angle`) in the z = 0 plane.
pub fn path_length_approx(element_angle: f64, transmit_radius: f64, point: FieldPoint) -> f64 {
    let (rho, r) = (point.rho, transmit_radius);
    point.z
        + (rho * rho + r * r - 2.0 * rho * r * (point.phi - element_angle).cos()) / (2.0 * point.z)
}

/// Evaluation path for fields and channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FieldMethod {
    #[default]
    Exact,
    /// Paraxial: constant amplitude λ/(4πz), binomial path length.
    Approx,
}

/// Field contribution of one element with unit drive.
///
/// The propagation phase is split into the axial part `k·Δz` and the small
/// excess `k·(d − Δz)`, each turned into a unit phasor separately, so elements
/// at a common height share bit-identical axial phasors and nulls cancel to
/// rounding.
pub(crate) fn element_response(
    element: Point3,
    point: Point3,
    lambda: f64,
    method: FieldMethod,
) -> Complex64 {
    let k = TAU / lambda;
    let dz = point.z - element.z;
    match method {
        FieldMethod::Exact => {
            let (dx, dy) = (point.x - element.x, point.y - element.y);
            let transverse = dx * dx + dy * dy;
            let d = (transverse + dz * dz).sqrt();
            let excess = transverse / (d + dz);
            let amp = lambda / (4.0 * PI * d);
            amp * Complex64::from_polar(1.0, -k * dz) * Complex64::from_polar(1.0, -k * excess)
        }
        FieldMethod::Approx => {
            let rho2 = point.x * point.x + point.y * point.y;
            let r2 = element.x * element.x + element.y * element.y;
            let cross = point.x * element.x + point.y * element.y;
            let common = Complex64::from_polar(1.0, -k * rho2 / (2.0 * dz));
            let own = Complex64::from_polar(1.0, -k * (r2 - 2.0 * cross) / (2.0 * dz));
            lambda / (4.0 * PI * dz) * Complex64::from_polar(1.0, -k * dz) * common * own
        }
    }
}

fn superpose(
    elements: &[Point3],
    excitation: &Excitation,
    point: Point3,
    lambda: f64,
    method: FieldMethod,
) -> Complex64 {
    elements
        .iter()
        .zip(excitation.as_slice())
        .map(|(e, s)| s * element_response(*e, point, lambda, method))
        .sum()
}

fn checked_elements(radiator: &impl Radiator, excitation: &Excitation) -> Result<Vec<Point3>> {
    let elements = radiator.element_positions();
    check_len("excitation length", elements.len(), excitation.len())?;
    Ok(elements)
}

pub fn field_exact(
    radiator: &impl Radiator,
    excitation: &Excitation,
    lambda: Wavelength,
    point: FieldPoint,
) -> Result<Complex64> {
    evaluate(radiator, excitation, lambda, point, FieldMethod::Exact)
}

pub fn field_approx(
    radiator: &impl Radiator,
    excitation: &Excitation,
    lambda: Wavelength,
    point: FieldPoint,
) -> Result<Complex64> {
    evaluate(radiator, excitation, lambda, point, FieldMethod::Approx)
}

pub fn evaluate(
    radiator: &impl Radiator,
    excitation: &Excitation,
    lambda: Wavelength,
    point: FieldPoint,
    method: FieldMethod,
) -> Result<Complex64> {
    let elements = checked_elements(radiator, excitation)?;
    Ok(superpose(
        &elements,
        excitation,
        point.to_cartesian(),
        lambda.get(),
        method,
    ))
}

/// Two-layer transmit array: six sub-UCAs whose centers sit on an outer circle
/// at π/3 steps.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeLayout {
    outer_radius: f64,
    sub_arrays: Vec<UcaLayout>,
}

pub const OUTER_SUB_ARRAYS: usize = 6;

pub fn composite_two_layer_layout(
    outer_radius: f64,
    inner_radius: f64,
    inner_count: usize,
) -> Result<CompositeLayout> {
    ensure_positive("outer radius", outer_radius)?;
    ensure_positive("inner radius", inner_radius)?;
    let outer = UcaLayout::transmit(outer_radius, OUTER_SUB_ARRAYS)?;
    let sub_arrays = outer
        .element_positions()
        .into_iter()
        .map(|c| UcaLayout::new(inner_radius, inner_count, c))
        .collect::<Result<_>>()?;
    Ok(CompositeLayout {
        outer_radius,
        sub_arrays,
    })
}

impl CompositeLayout {
    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    pub fn sub_arrays(&self) -> &[UcaLayout] {
        &self.sub_arrays
    }

    pub fn inner_count(&self) -> usize {
        self.sub_arrays[0].element_count()
    }

    /// Drive vector for OAM mode `l` at total power `power`.
    ///
    /// Element `j` of sub-array `i` gets the single-layer mode-`l` amplitude of
    /// outer position `i` times the sub-array's own mode-`l` phase ramp
    /// normalized by 1/√N_in, so each element carries one N_in-th of the
    /// single-layer element power and the total matches the single layer.
    pub fn mode_excitation(&self, l: usize, power: f64) -> Excitation {
        let inner = self.inner_count();
        let outer = Excitation::mode(l, OUTER_SUB_ARRAYS, power);
        let ramp = Excitation::mode(l, inner, 1.0);
        let v = outer
            .as_slice()
            .iter()
            .flat_map(|o| ramp.as_slice().iter().map(move |r| o * r))
            .collect();
        Excitation(v)
    }

    /// 36×6 (for six-element sub-arrays) map from the six outer mode streams to
    /// element drives: column `l` is the Kronecker product of the outer and
    /// inner mode-`l` vectors. Columns are orthonormal.
    pub fn mode_matrix(&self) -> nalgebra::DMatrix<Complex64> {
        let n = self.sub_arrays.len() * self.inner_count();
        nalgebra::DMatrix::from_fn(n, OUTER_SUB_ARRAYS, |row, l| {
            self.mode_excitation(l, 1.0).as_slice()[row]
        })
    }
}

impl Radiator for CompositeLayout {
    fn element_positions(&self) -> Vec<Point3> {
        self.sub_arrays
            .iter()
            .flat_map(UcaLayout::element_positions)
            .collect()
    }
}

/// Rectangular raster on a receive plane, sampled at pixel centers.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSpec {
    pub z: f64,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    pub method: FieldMethod,
}

impl MapSpec {
    /// Square map of half-width `half_width` centered on the axis.
    pub fn centered(z: f64, half_width: f64, n: usize) -> Self {
        Self {
            z,
            x_range: (-half_width, half_width),
            y_range: (-half_width, half_width),
            nx: n,
            ny: n,
            method: FieldMethod::Exact,
        }
    }

    pub fn with_method(mut self, method: FieldMethod) -> Self {
        self.method = method;
        self
    }

    fn validate(&self) -> Result<()> {
        ensure_positive("map plane z", self.z)?;
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::malformed(
                None,
                "map needs at least one sample per axis",
            ));
        }
        for (name, (lo, hi)) in [("x", self.x_range), ("y", self.y_range)] {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::malformed(
                    None,
                    format!("map {name}-range must be strictly ordered, got ({lo}, {hi})"),
                ));
            }
        }
        Ok(())
    }
}

/// Complex field samples, row-major with `ny` rows of `nx` samples (row index
/// follows y, column index follows x).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMap {
    pub z: f64,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    pub samples: Vec<Complex64>,
}

impl FieldMap {
    pub fn x_at(&self, ix: usize) -> f64 {
        pixel_center(self.x_range, self.nx, ix)
    }

    pub fn y_at(&self, iy: usize) -> f64 {
        pixel_center(self.y_range, self.ny, iy)
    }

    pub fn get(&self, ix: usize, iy: usize) -> Complex64 {
        self.samples[iy * self.nx + ix]
    }

    pub fn power(&self, ix: usize, iy: usize) -> f64 {
        self.get(ix, iy).norm_sqr()
    }

    pub fn max_power(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.norm_sqr())
            .fold(0.0, f64::max)
    }

    /// Power relative to the map maximum, in dB (−∞ for exact zeros).
    pub fn power_db(&self, ix: usize, iy: usize) -> f64 {
        10.0 * (self.power(ix, iy) / self.max_power()).log10()
    }

    /// Pixel indices nearest to (x, y), clamped to the map.
    pub fn nearest_pixel(&self, x: f64, y: f64) -> (usize, usize) {
        let idx = |v: f64, (lo, hi): (f64, f64), n: usize| {
            let f = ((v - lo) / (hi - lo) * n as f64 - 0.5).round();
            f.clamp(0.0, (n - 1) as f64) as usize
        };
        (idx(x, self.x_range, self.nx), idx(y, self.y_range, self.ny))
    }

    /// Whether pixel (ix, iy) is no brighter than any of its 8 neighbours.
    pub fn is_local_min(&self, ix: usize, iy: usize) -> bool {
        let p = self.power(ix, iy);
        let (ix, iy) = (ix as isize, iy as isize);
        (-1..=1).all(|dy| {
            (-1..=1).all(|dx| {
                let (x, y) = (ix + dx, iy + dy);
                if x < 0 || y < 0 || x >= self.nx as isize || y >= self.ny as isize {
                    return true;
                }
                p <= self.power(x as usize, y as usize)
            })
        })
    }
}

fn pixel_center((lo, hi): (f64, f64), n: usize, i: usize) -> f64 {
    lo + (i as f64 + 0.5) * (hi - lo) / n as f64
}

/// Rasterizes the field of `radiator` driven by `excitation` over `spec`.
///
/// Pixels are independent and evaluated in any order; the result does not
/// depend on `exec`.
pub fn render_field_map(
    radiator: &impl Radiator,
    excitation: &Excitation,
    lambda: Wavelength,
    spec: &MapSpec,
    exec: Exec,
) -> Result<FieldMap> {
    spec.validate()?;
    let elements = checked_elements(radiator, excitation)?;
    let lambda = lambda.get();
    let samples = exec.map_indexed(spec.nx * spec.ny, |i| {
        let (ix, iy) = (i % spec.nx, i / spec.nx);
        let p = Point3::new(
            pixel_center(spec.x_range, spec.nx, ix),
            pixel_center(spec.y_range, spec.ny, iy),
            spec.z,
        );
        superpose(&elements, excitation, p, lambda, spec.method)
    });
    Ok(FieldMap {
        z: spec.z,
        x_range: spec.x_range,
        y_range: spec.y_range,
        nx: spec.nx,
        ny: spec.ny,
        samples,
    })
}

/// Phase accumulated by `field` along a counter-clockwise circle of `radius`
/// around `center` (in the plane z = center.z), summing wrapped increments
/// between `samples` equally spaced points. Equals 2π times the enclosed
/// winding number when the circle avoids zeros and is finely sampled.
pub fn accumulated_phase(
    field: impl Fn(Point3) -> Complex64,
    center: Point3,
    radius: f64,
    samples: usize,
) -> f64 {
    let at = |i: usize| {
        let t = TAU * i as f64 / samples as f64;
        field(Point3::new(
            center.x + radius * t.cos(),
            center.y + radius * t.sin(),
            center.z,
        ))
    };
    let first = at(0);
    let mut prev = first;
    let mut total = 0.0;
    for i in 1..=samples {
        let cur = if i == samples { first } else { at(i) };
        total += (cur * prev.conj()).arg();
        prev = cur;
    }
    total
}
