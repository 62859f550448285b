//! Flat geometry of the circle R/Z and the 2-torus (R/Z)^2.
//!
//! Charts are global: the exponential map is `x + v mod 1` componentwise and
//! its inverse takes the minimal lift. Distances are measured through a
//! constant linear frame (for linear toral maps, the eigenbasis), so that
//! contraction rates read off directly as eigenvalue moduli.

use crate::error::{Error, Result};
use crate::linalg::Mat2;

pub const LOG_AMBIGUITY_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ManifoldKind {
    Circle,
    Torus2,
}

impl ManifoldKind {
    pub fn dim(&self) -> usize {
        match self {
            ManifoldKind::Circle => 1,
            ManifoldKind::Torus2 => 2,
        }
    }
}

/// A point with per-dimension angle coordinates in [0,1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub c: [f64; 2],
    pub kind: ManifoldKind,
}

/// Tangent vector in chart coordinates. The second component of circle data
/// is exactly zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector {
    pub c: [f64; 2],
    pub kind: ManifoldKind,
}

fn wrap_unit(x: f64) -> f64 {
    let mut r = x.rem_euclid(1.0);
    // rem_euclid can round up to exactly 1.0 for tiny negative inputs
    if r >= 1.0 {
        r -= 1.0;
    }
    r
}

/// Minimal representative of `d` modulo 1, in [-1/2, 1/2].
pub fn min_lift(d: f64) -> f64 {
    d - d.round()
}

impl Point {
    pub fn new(kind: ManifoldKind, coords: [f64; 2]) -> Self {
        let mut c = [wrap_unit(coords[0]), wrap_unit(coords[1])];
        if kind == ManifoldKind::Circle {
            c[1] = 0.0;
        }
        Point { c, kind }
    }

    pub fn circle(x: f64) -> Self {
        Point::new(ManifoldKind::Circle, [x, 0.0])
    }

    pub fn torus(x: f64, y: f64) -> Self {
        Point::new(ManifoldKind::Torus2, [x, y])
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }
}

impl TangentVector {
    pub fn new(kind: ManifoldKind, c: [f64; 2]) -> Self {
        let mut c = c;
        if kind == ManifoldKind::Circle {
            c[1] = 0.0;
        }
        TangentVector { c, kind }
    }

    pub fn zero(kind: ManifoldKind) -> Self {
        TangentVector { c: [0.0, 0.0], kind }
    }

    pub fn norm_inf(&self) -> f64 {
        self.c[0].abs().max(self.c[1].abs())
    }

    pub fn add(&self, other: &TangentVector) -> TangentVector {
        TangentVector::new(self.kind, [self.c[0] + other.c[0], self.c[1] + other.c[1]])
    }

    pub fn sub(&self, other: &TangentVector) -> TangentVector {
        TangentVector::new(self.kind, [self.c[0] - other.c[0], self.c[1] - other.c[1]])
    }

    pub fn scale(&self, s: f64) -> TangentVector {
        TangentVector::new(self.kind, [self.c[0] * s, self.c[1] * s])
    }
}

/// Constant change-of-basis realizing the adapted metric. Vectors are
/// measured by the Euclidean norm of their `B^{-1}` coordinates; operator
/// norms of Jacobians by `|B^{-1} J B|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricFrame {
    pub basis: Mat2,
    pub basis_inv: Mat2,
    pub kind: ManifoldKind,
}

impl MetricFrame {
    pub fn identity(kind: ManifoldKind) -> Self {
        MetricFrame {
            basis: Mat2::identity(),
            basis_inv: Mat2::identity(),
            kind,
        }
    }

    pub fn new(kind: ManifoldKind, basis: Mat2) -> Result<Self> {
        let basis_inv = basis
            .inverse(kind.dim())
            .ok_or_else(|| Error::NonInvertible("frame basis".into()))?;
        let id = basis_inv.mul_mat(&basis);
        let defect = (id.a[0][0] - 1.0).abs().max((id.a[1][1] - 1.0).abs())
            .max(id.a[0][1].abs())
            .max(id.a[1][0].abs());
        if defect > 1e-12 {
            return Err(Error::NonInvertible(format!(
                "frame basis inverse residual {defect:.3e} > 1e-12"
            )));
        }
        Ok(MetricFrame { basis, basis_inv, kind })
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    /// Frame coordinates of a chart vector.
    pub fn to_frame(&self, v: [f64; 2]) -> [f64; 2] {
        self.basis_inv.mul_vec(v)
    }

    /// Norm of a tangent vector measured in this frame.
    pub fn vec_norm(&self, v: &TangentVector) -> f64 {
        let w = self.to_frame(v.c);
        match self.kind {
            ManifoldKind::Circle => w[0].abs(),
            ManifoldKind::Torus2 => (w[0] * w[0] + w[1] * w[1]).sqrt(),
        }
    }

    /// Operator norm of a Jacobian measured in this frame.
    pub fn op_norm(&self, j: &Mat2) -> f64 {
        self.basis_inv.mul_mat(j).mul_mat(&self.basis).op_norm(self.dim())
    }

    /// Diameter of the manifold under the frame metric: the largest minimal
    /// lift is (1/2, ..., 1/2).
    pub fn diameter(&self) -> f64 {
        let half = match self.kind {
            ManifoldKind::Circle => [0.5, 0.0],
            ManifoldKind::Torus2 => [0.5, 0.5],
        };
        // The frame image of the half-cell corner bounds all minimal lifts
        // only for orthogonal frames; probe the four corner sign patterns.
        let mut best: f64 = 0.0;
        for sx in [-1.0, 1.0] {
            for sy in [-1.0, 1.0] {
                let w = self.to_frame([half[0] * sx, half[1] * sy]);
                let n = match self.kind {
                    ManifoldKind::Circle => w[0].abs(),
                    ManifoldKind::Torus2 => (w[0] * w[0] + w[1] * w[1]).sqrt(),
                };
                best = best.max(n);
            }
        }
        best
    }
}

/// exp_x(v) = x + v mod 1. Rejects vectors outside the injectivity radius.
pub fn exp_point(x: &Point, v: &TangentVector) -> Result<Point> {
    debug_assert_eq!(x.kind, v.kind);
    if v.norm_inf() >= 0.5 {
        return Err(Error::ChartOverflow(format!(
            "exp displacement {:.6} >= 1/2",
            v.norm_inf()
        )));
    }
    Ok(Point::new(x.kind, [x.c[0] + v.c[0], x.c[1] + v.c[1]]))
}

/// exp_x^{-1}(y): the smallest representative lift of y - x.
pub fn log_point(x: &Point, y: &Point) -> Result<TangentVector> {
    debug_assert_eq!(x.kind, y.kind);
    let mut c = [0.0, 0.0];
    for i in 0..x.dim() {
        let d = min_lift(y.c[i] - x.c[i]);
        if d.abs() >= 0.5 - LOG_AMBIGUITY_MARGIN {
            return Err(Error::AntipodalAmbiguity(d.abs()));
        }
        c[i] = d;
    }
    Ok(TangentVector::new(x.kind, c))
}

/// Distance in the frame metric: |B^{-1} (minimal lift of y - x)|.
pub fn dist(x: &Point, y: &Point, frame: &MetricFrame) -> f64 {
    debug_assert_eq!(x.kind, y.kind);
    let mut c = [0.0, 0.0];
    for i in 0..x.dim() {
        c[i] = min_lift(y.c[i] - x.c[i]);
    }
    frame.vec_norm(&TangentVector::new(x.kind, c))
}

/// Regular grid with `resolution` points per dimension (power of two), nodes
/// at i/resolution. Row-major node order: index = i0 * res + i1 on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    pub kind: ManifoldKind,
    pub resolution: usize,
}

impl Grid {
    pub fn new(kind: ManifoldKind, resolution: usize) -> Result<Self> {
        if resolution < 4 {
            return Err(Error::ConfigInvalid(format!(
                "grid resolution {resolution} < 4"
            )));
        }
        if !resolution.is_power_of_two() {
            return Err(Error::ConfigInvalid(format!(
                "grid resolution {resolution} is not a power of two"
            )));
        }
        Ok(Grid { kind, resolution })
    }

    pub fn node_count(&self) -> usize {
        match self.kind {
            ManifoldKind::Circle => self.resolution,
            ManifoldKind::Torus2 => self.resolution * self.resolution,
        }
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.resolution as f64
    }

    pub fn point(&self, index: usize) -> Point {
        let r = self.resolution;
        match self.kind {
            ManifoldKind::Circle => Point::circle(index as f64 / r as f64),
            ManifoldKind::Torus2 => {
                let i = index / r;
                let j = index % r;
                Point::torus(i as f64 / r as f64, j as f64 / r as f64)
            }
        }
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        match self.kind {
            ManifoldKind::Circle => i % self.resolution,
            ManifoldKind::Torus2 => (i % self.resolution) * self.resolution + (j % self.resolution),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cat_frame() -> MetricFrame {
        crate::systems::ModelMap::cat_map_eigenframe().frame
    }

    #[test]
    fn exp_wraps_mod_one() {
        let x = Point::torus(0.9, 0.9);
        let v = TangentVector::new(ManifoldKind::Torus2, [0.2, 0.2]);
        let y = exp_point(&x, &v).unwrap();
        assert_relative_eq!(y.c[0], 0.1, epsilon = 1e-14);
        assert_relative_eq!(y.c[1], 0.1, epsilon = 1e-14);
    }

    #[test]
    fn exp_zero_is_identity() {
        let x = Point::torus(0.37, 0.81);
        let y = exp_point(&x, &TangentVector::zero(ManifoldKind::Torus2)).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn exp_rejects_large_displacement() {
        let x = Point::circle(0.0);
        let v = TangentVector::new(ManifoldKind::Circle, [0.5, 0.0]);
        assert!(exp_point(&x, &v).is_err());
    }

    #[test]
    fn log_takes_shortest_lift() {
        let x = Point::circle(0.1);
        let y = Point::circle(0.9);
        let v = log_point(&x, &y).unwrap();
        assert_relative_eq!(v.c[0], -0.2, epsilon = 1e-14);
    }

    #[test]
    fn log_of_equal_points_is_zero() {
        let x = Point::torus(0.3, 0.4);
        let v = log_point(&x, &x).unwrap();
        assert_eq!(v.c, [0.0, 0.0]);
    }

    #[test]
    fn log_rejects_antipodal() {
        let x = Point::circle(0.0);
        let y = Point::circle(0.5);
        assert!(log_point(&x, &y).is_err());
    }

    #[test]
    fn dist_wraps() {
        let frame = MetricFrame::identity(ManifoldKind::Torus2);
        let x = Point::torus(0.0, 0.0);
        let y = Point::torus(0.9, 0.0);
        assert_relative_eq!(dist(&x, &y, &frame), 0.1, epsilon = 1e-14);
        assert_eq!(dist(&x, &x, &frame), 0.0);
    }

    #[test]
    fn eigenframe_distance_matches_explicit_product() {
        // Independent oracle: apply B^{-1} by hand to the minimal lift.
        let frame = cat_frame();
        let x = Point::torus(0.0, 0.0);
        let y = Point::torus(0.1, 0.0);
        let lift = [0.1, 0.0];
        let b = frame.basis_inv.a;
        let w = [
            b[0][0] * lift[0] + b[0][1] * lift[1],
            b[1][0] * lift[0] + b[1][1] * lift[1],
        ];
        let expected = (w[0] * w[0] + w[1] * w[1]).sqrt();
        assert_relative_eq!(dist(&x, &y, &frame), expected, epsilon = 1e-14);
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(ManifoldKind::Torus2, 2).is_err());
        assert!(Grid::new(ManifoldKind::Torus2, 100).is_err());
        let g = Grid::new(ManifoldKind::Torus2, 8).unwrap();
        assert_eq!(g.node_count(), 64);
        let g1 = Grid::new(ManifoldKind::Circle, 8).unwrap();
        assert_eq!(g1.node_count(), 8);
    }

    proptest! {
        #[test]
        fn exp_log_roundtrip(x0 in 0.0..1.0f64, x1 in 0.0..1.0f64,
                             v0 in -0.4..0.4f64, v1 in -0.4..0.4f64) {
            let x = Point::torus(x0, x1);
            let v = TangentVector::new(ManifoldKind::Torus2, [v0, v1]);
            let y = exp_point(&x, &v).unwrap();
            let w = log_point(&x, &y).unwrap();
            prop_assert!((w.c[0] - v.c[0]).abs() < 1e-14);
            prop_assert!((w.c[1] - v.c[1]).abs() < 1e-14);
            let z = exp_point(&x, &w).unwrap();
            prop_assert!(dist(&y, &z, &MetricFrame::identity(ManifoldKind::Torus2)) < 1e-14);
        }

        #[test]
        fn metric_axioms(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let frame = cat_frame();
            for _ in 0..10 {
                let a = Point::torus(rng.gen(), rng.gen());
                let b = Point::torus(rng.gen(), rng.gen());
                let c = Point::torus(rng.gen(), rng.gen());
                let dab = dist(&a, &b, &frame);
                let dba = dist(&b, &a, &frame);
                prop_assert!(dab >= 0.0);
                prop_assert!((dab - dba).abs() < 1e-14);
                let dac = dist(&a, &c, &frame);
                let dcb = dist(&c, &b, &frame);
                prop_assert!(dab <= dac + dcb + 1e-12);
            }
        }
    }
}
