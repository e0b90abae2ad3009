//! Coordinate frames, UCA element placement and the fractal-grid formulas.
//!
//! The origin sits at the transmit UCA center, the z-axis points at the receive
//! plane and the polar axis runs through transmit element 0. All functions take
//! lengths in one consistent unit together with the wavelength expressed in that
//! same unit; the harness normalizes everything to wavelengths.

use std::f64::consts::{PI, TAU};

use crate::error::{ensure_positive, Error, Result};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Radius below which fractal replicas are too ragged to be useful, in wavelengths.
pub const RECOMMENDED_MIN_RADIUS_WAVELENGTHS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Wavelength(f64);

impl Wavelength {
    pub fn new(lambda: f64) -> Result<Self> {
        ensure_positive("wavelength", lambda)?;
        Ok(Self(lambda))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// Free-space wavenumber 2π/λ.
    pub fn wavenumber(self) -> f64 {
        TAU / self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn to_cylindrical(&self) -> Cylindrical {
        Cylindrical {
            rho: self.x.hypot(self.y),
            phi: self.y.atan2(self.x),
            z: self.z,
        }
    }
}

/// Cylindrical coordinates (ρ, φ, z) sharing the z-axis and polar axis of the
/// Cartesian frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Cylindrical {
    pub rho: f64,
    pub phi: f64,
    pub z: f64,
}

impl Cylindrical {
    pub const fn new(rho: f64, phi: f64, z: f64) -> Self {
        Self { rho, phi, z }
    }

    pub fn to_cartesian(&self) -> Point3 {
        let (s, c) = self.phi.sin_cos();
        Point3::new(self.rho * c, self.rho * s, self.z)
    }
}

/// A planar uniform circular array parallel to the transmit plane.
#[derive(Debug, Clone, PartialEq)]
pub struct UcaLayout {
    radius: f64,
    element_count: usize,
    center: Point3,
    angular_offset: f64,
}

impl UcaLayout {
    pub fn new(radius: f64, element_count: usize, center: Point3) -> Result<Self> {
        ensure_positive("UCA radius", radius)?;
        if element_count == 0 {
            return Err(Error::DimensionMismatch {
                context: "UCA element count",
                expected: 1,
                actual: 0,
            });
        }
        Ok(Self {
            radius,
            element_count,
            center,
            angular_offset: 0.0,
        })
    }

    /// Transmit array: centered at the origin, element 0 on the polar axis.
    pub fn transmit(radius: f64, element_count: usize) -> Result<Self> {
        Self::new(radius, element_count, Point3::default())
    }

    /// Rotates every element by `offset` radians about the array center.
    pub fn with_angular_offset(mut self, offset: f64) -> Self {
        self.angular_offset = offset;
        self
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn element_count(&self) -> usize {
        self.element_count
    }

    pub fn center(&self) -> Point3 {
        self.center
    }

    pub fn angular_offset(&self) -> f64 {
        self.angular_offset
    }

    pub fn element_angle(&self, k: usize) -> f64 {
        TAU * k as f64 / self.element_count as f64 + self.angular_offset
    }

    pub fn element_position(&self, k: usize) -> Point3 {
        let (s, c) = self.element_angle(k).sin_cos();
        Point3::new(
            self.center.x + self.radius * c,
            self.center.y + self.radius * s,
            self.center.z,
        )
    }

    pub fn element_positions(&self) -> Vec<Point3> {
        (0..self.element_count)
            .map(|k| self.element_position(k))
            .collect()
    }
}

/// Element coordinates of a (receive) UCA in both Cartesian and cylindrical form.
///
/// The azimuth uses the full-quadrant arctangent so elements with x < 0 keep
/// their quadrant.
pub fn receive_element_coordinates(layout: &UcaLayout) -> (Vec<Point3>, Vec<Cylindrical>) {
    let cartesian = layout.element_positions();
    let cylindrical = cartesian.iter().map(Point3::to_cylindrical).collect();
    (cartesian, cylindrical)
}

/// Row/column index of a replica center in the hexagonal lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct GridIndex {
    pub m: i64,
    pub n: i64,
}

impl GridIndex {
    pub const ORIGIN: GridIndex = GridIndex { m: 0, n: 0 };

    pub const fn new(m: i64, n: i64) -> Self {
        Self { m, n }
    }
}

/// The hexagonal lattice of fractal OAM centers on the plane at `distance`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractalGrid {
    lambda: f64,
    transmit_radius: f64,
    distance: f64,
    cell_radius: f64,
    rr_bound: f64,
}

/// Builds the fractal grid for a six-element transmit UCA.
///
/// Fails when any input is non-positive or the transmit radius is below half a
/// wavelength (no replicas form). Radii under three wavelengths only log a
/// warning.
pub fn make_grid(lambda: f64, transmit_radius: f64, distance: f64) -> Result<FractalGrid> {
    ensure_positive("wavelength", lambda)?;
    ensure_positive("transmit radius", transmit_radius)?;
    ensure_positive("distance", distance)?;
    if transmit_radius < 0.5 * lambda {
        return Err(Error::TransmitRadiusTooSmall {
            radius: transmit_radius,
            half_lambda: 0.5 * lambda,
        });
    }
    if let Some(msg) = transmit_radius_warning(lambda, transmit_radius) {
        log::warn!("{msg}");
    }
    let unit = lambda * distance / transmit_radius;
    let cell_radius = 2.0 / 3.0 * unit;
    Ok(FractalGrid {
        lambda,
        transmit_radius,
        distance,
        cell_radius,
        rr_bound: SQRT3 / 3.0 * cell_radius,
    })
}

/// Non-fatal diagnostic for transmit radii that form only ragged replicas.
pub fn transmit_radius_warning(lambda: f64, transmit_radius: f64) -> Option<String> {
    (transmit_radius < RECOMMENDED_MIN_RADIUS_WAVELENGTHS * lambda).then(|| {
        format!(
            "transmit radius {:.4} lambda is below the recommended {} lambda; fractal replicas will be incomplete",
            transmit_radius / lambda,
            RECOMMENDED_MIN_RADIUS_WAVELENGTHS
        )
    })
}

/// Transmit radius that yields replicas of radius `desired_cell_radius` at `distance`.
pub fn required_transmit_radius(
    lambda: f64,
    distance: f64,
    desired_cell_radius: f64,
) -> Result<f64> {
    ensure_positive("wavelength", lambda)?;
    ensure_positive("distance", distance)?;
    ensure_positive("cell radius", desired_cell_radius)?;
    Ok(2.0 / 3.0 * lambda * distance / desired_cell_radius)
}

impl FractalGrid {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn transmit_radius(&self) -> f64 {
        self.transmit_radius
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    /// Replica radius, also the side length of each hexagon.
    pub fn cell_radius(&self) -> f64 {
        self.cell_radius
    }

    /// Largest receive UCA radius that stays inside one replica.
    pub fn rr_bound(&self) -> f64 {
        self.rr_bound
    }

    /// Center-to-center distance of neighbouring replicas.
    pub fn pitch(&self) -> f64 {
        SQRT3 * self.cell_radius
    }

    /// λz/R_t, the scale every lattice formula is written in.
    fn unit(&self) -> f64 {
        self.lambda * self.distance / self.transmit_radius
    }

    pub fn center(&self, idx: GridIndex) -> Point3 {
        grid_center(idx, self)
    }

    /// Centers with |m| ≤ `max_abs_m` and |n| ≤ `max_abs_n`, m-major then n.
    pub fn enumerate_centers(&self, max_abs_m: u32, max_abs_n: u32) -> Vec<(GridIndex, Point3)> {
        enumerate_centers(self, max_abs_m, max_abs_n)
    }
}

pub fn grid_center(idx: GridIndex, grid: &FractalGrid) -> Point3 {
    let unit = grid.unit();
    let row = if idx.n.rem_euclid(2) == 0 {
        idx.m as f64
    } else {
        0.5 + idx.m as f64
    };
    Point3::new(
        row * 2.0 * unit,
        idx.n as f64 * SQRT3 / 3.0 * unit,
        grid.distance,
    )
}

pub fn enumerate_centers(
    grid: &FractalGrid,
    max_abs_m: u32,
    max_abs_n: u32,
) -> Vec<(GridIndex, Point3)> {
    let (mm, nn) = (max_abs_m as i64, max_abs_n as i64);
    let mut out = Vec::with_capacity(((2 * mm + 1) * (2 * nn + 1)) as usize);
    for m in -mm..=mm {
        for n in -nn..=nn {
            let idx = GridIndex::new(m, n);
            out.push((idx, grid_center(idx, grid)));
        }
    }
    out
}

/// Angle of transmit element `k` of a six-element array, π/3 steps from the polar axis.
pub fn hexagon_angle(k: usize) -> f64 {
    PI / 3.0 * k as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig_hfss() -> FractalGrid {
        make_grid(10.0, 30.0, 75.0).unwrap()
    }

    /// Residual of the five grid-line families at (x, y), scaled so the integer
    /// k lands on the λz/(2R_t) lattice.
    fn line_family_residual(grid: &FractalGrid, x: f64, y: f64) -> f64 {
        let scale = grid.lambda * grid.distance / (2.0 * grid.transmit_radius);
        (1..=5)
            .map(|nt| {
                let a = PI / 6.0 * nt as f64;
                let lhs = a.sin().powi(2) * x - a.sin() * a.cos() * y;
                let k = -lhs / scale;
                (k - k.round()).abs() * scale
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn center_m0_n2_matches_hfss_placement() {
        let c = fig_hfss().center(GridIndex::new(0, 2));
        assert!(c.x.abs() < 1e-12);
        assert!((c.y - 28.87).abs() < 0.005, "{c:?}");
        assert_eq!(c.z, 75.0);
    }

    #[test]
    fn origin_center_is_on_axis() {
        let g = make_grid(1.0, 150.0, 1000.0).unwrap();
        assert_eq!(g.center(GridIndex::ORIGIN), Point3::new(0.0, 0.0, 1000.0));
    }

    #[test]
    fn center_m1_n1_lies_on_all_line_families() {
        let g = fig_hfss();
        let c = g.center(GridIndex::new(1, 1));
        assert!((c.x - 75.0).abs() < 1e-12);
        assert!((c.y - 14.4337567).abs() < 1e-6);
        let tol = 1e-9 * g.unit();
        assert!(line_family_residual(&g, c.x, c.y) < tol);
    }

    #[test]
    fn enumeration_cardinality_and_order() {
        let g = fig_hfss();
        let single = g.enumerate_centers(0, 0);
        assert_eq!(
            single,
            vec![(GridIndex::ORIGIN, Point3::new(0.0, 0.0, 75.0))]
        );
        let all = g.enumerate_centers(2, 3);
        assert_eq!(all.len(), 5 * 7);
        assert_eq!(all[0].0, GridIndex::new(-2, -3));
        assert_eq!(all[1].0, GridIndex::new(-2, -2));
        assert_eq!(all.last().unwrap().0, GridIndex::new(2, 3));
    }

    #[test]
    fn enumeration_includes_hfss_replicas() {
        let all = fig_hfss().enumerate_centers(1, 2);
        for (sx, sy) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            assert!(all
                .iter()
                .any(|(_, p)| (p.x - sx * 25.0).abs() < 0.01 && (p.y - sy * 14.43).abs() < 0.01));
        }
    }

    #[test]
    fn grid_radii() {
        let g = fig_hfss();
        assert!((g.rr_bound() - 9.62).abs() < 0.005);
        assert!((g.cell_radius() - 16.6667).abs() < 1e-4);
        let g = make_grid(1.0, 150.0, 1000.0).unwrap();
        assert!((g.rr_bound() - 2.566).abs() < 5e-4);
        assert!((g.rr_bound() - SQRT3 / 3.0 * g.cell_radius()).abs() < 1e-15);
    }

    #[test]
    fn cell_radius_cross_checks_center_spacing_on_y_axis() {
        let g = fig_hfss();
        let y0 = g.center(GridIndex::new(0, 0)).y;
        let y2 = g.center(GridIndex::new(0, 2)).y;
        assert!((SQRT3 / 3.0 * (y2 - y0) - g.cell_radius()).abs() < 1e-12);
    }

    #[test]
    fn nearest_neighbor_spacing_is_lattice_pitch() {
        let g = make_grid(1.0, 150.0, 1000.0).unwrap();
        let pts = g.enumerate_centers(3, 4);
        for (i, (_, a)) in pts.iter().enumerate() {
            let nearest = pts
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, (_, b))| a.distance(b))
                .fold(f64::INFINITY, f64::min);
            assert!((nearest - g.pitch()).abs() < 1e-9 * g.pitch());
        }
    }

    #[test]
    fn every_center_satisfies_line_families() {
        let g = make_grid(1.0, 150.0, 1000.0).unwrap();
        let tol = 1e-9 * g.unit();
        for (idx, c) in g.enumerate_centers(4, 6) {
            assert!(line_family_residual(&g, c.x, c.y) < tol, "{idx:?}");
        }
    }

    #[test]
    fn required_radius_inverts_make_grid() {
        assert!((required_transmit_radius(10.0, 75.0, 50.0 / 3.0).unwrap() - 30.0).abs() < 1e-12);
        let r = required_transmit_radius(10.0, 75.0, 16.67).unwrap();
        assert!((r - 30.0).abs() < 0.01);
        let half = required_transmit_radius(1.0, 1000.0, 2.0 * 4.444).unwrap();
        assert!((half - 0.5 * required_transmit_radius(1.0, 1000.0, 4.444).unwrap()).abs() < 1e-12);
        let rt = required_transmit_radius(1.0, 1000.0, 4.444).unwrap();
        assert!((rt - 150.0).abs() < 0.02, "{rt}");
        for cell in [0.3, 1.0, 4.444, 17.0] {
            let rt = required_transmit_radius(1.0, 500.0, cell).unwrap();
            let g = make_grid(1.0, rt, 500.0).unwrap();
            assert!((g.cell_radius() - cell).abs() <= 1e-12 * cell);
        }
    }

    #[test]
    fn grid_scaling() {
        let base = make_grid(1.0, 100.0, 800.0).unwrap();
        let zz = make_grid(1.0, 100.0, 1600.0).unwrap();
        let ll = make_grid(2.0, 100.0, 800.0).unwrap();
        let rr = make_grid(1.0, 200.0, 800.0).unwrap();
        assert!((zz.cell_radius() / base.cell_radius() - 2.0).abs() < 1e-12);
        assert!((ll.cell_radius() / base.cell_radius() - 2.0).abs() < 1e-12);
        assert!((rr.cell_radius() / base.cell_radius() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            make_grid(0.0, 30.0, 75.0),
            Err(Error::NonPositiveInput { .. })
        ));
        assert!(matches!(
            make_grid(1.0, 30.0, -1.0),
            Err(Error::NonPositiveInput { .. })
        ));
        assert!(matches!(
            make_grid(1.0, 0.4, 10.0),
            Err(Error::TransmitRadiusTooSmall { .. })
        ));
        assert!(make_grid(1.0, 0.5, 10.0).is_ok());
        assert!(transmit_radius_warning(1.0, 2.9).is_some());
        assert!(transmit_radius_warning(1.0, 3.0).is_none());
        assert!(required_transmit_radius(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn receive_elements_four_element_symmetry() {
        let uca = UcaLayout::new(2.0, 4, Point3::new(0.0, 0.0, 9.0)).unwrap();
        let (cart, _) = receive_element_coordinates(&uca);
        let expect = [(2.0, 0.0), (0.0, 2.0), (-2.0, 0.0), (0.0, -2.0)];
        for (p, (x, y)) in cart.iter().zip(expect) {
            assert!((p.x - x).abs() < 1e-15 && (p.y - y).abs() < 1e-15 && p.z == 9.0);
        }
    }

    #[test]
    fn receive_element_at_unaligned_center() {
        let center = fig_hfss().center(GridIndex::new(0, 2));
        let uca = UcaLayout::new(9.62, 6, center).unwrap();
        let (cart, cyl) = receive_element_coordinates(&uca);
        assert!((cart[0].x - 9.62).abs() < 1e-12);
        assert!((cart[0].y - 28.87).abs() < 0.005);
        assert_eq!(cart[0].z, 75.0);
        // element 3 sits at x < 0: the azimuth must stay in the second quadrant
        assert!(cyl[3].phi > PI / 2.0 && cyl[3].phi < PI);
        for (c, p) in cyl.iter().zip(&cart) {
            let back = c.to_cartesian();
            assert!((back.x - p.x).abs() <= 1e-12 * c.rho);
            assert!((back.y - p.y).abs() <= 1e-12 * c.rho);
        }
    }

    #[test]
    fn angular_offset_rotates_elements() {
        let uca = UcaLayout::transmit(1.0, 6)
            .unwrap()
            .with_angular_offset(PI / 6.0);
        let p = uca.element_position(0);
        assert!((p.x - (PI / 6.0).cos()).abs() < 1e-15);
        assert!((uca.element_angle(1) - PI / 2.0).abs() < 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn cylindrical_round_trip(x in -1e3..1e3f64, y in -1e3..1e3f64, z in 0.1..1e4f64) {
                let p = Point3::new(x, y, z);
                let q = p.to_cylindrical().to_cartesian();
                let scale = x.hypot(y).max(1e-300);
                prop_assert!((p.x - q.x).abs() <= 1e-12 * scale);
                prop_assert!((p.y - q.y).abs() <= 1e-12 * scale);
                prop_assert_eq!(p.z, q.z);
            }

            #[test]
            fn grid_scales_linearly(lambda in 0.1..10.0f64, rt in 1.0..500.0f64, z in 10.0..1e4f64, k in 0.5..4.0f64) {
                let g = make_grid(lambda, rt.max(lambda), z).unwrap();
                let gz = make_grid(lambda, rt.max(lambda), k * z).unwrap();
                prop_assert!((gz.cell_radius() / g.cell_radius() - k).abs() < 1e-12);
                let c = g.center(GridIndex::new(2, 3));
                let cz = gz.center(GridIndex::new(2, 3));
                prop_assert!((cz.x - k * c.x).abs() <= 1e-12 * cz.x.abs().max(1.0));
            }
        }
    }
}
