//! Discretized scalar and vector fields on grids, with periodic cubic
//! (Catmull-Rom) interpolation.
//!
//! The kernel is exact at grid nodes: for dyadic node coordinates the local
//! parameter is exactly zero and the weights reduce to (0,1,0,0), so reading
//! an interpolated field at a node returns the stored value bit for bit.
//! That makes every sweep over a grid-aligned map (integer toral matrices)
//! interpolation-free.

use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::{Grid, ManifoldKind, MetricFrame, Point, TangentVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Catmull-Rom weights at local parameter u in [0,1).
#[inline]
fn kernel(u: f64) -> [f64; 4] {
    let u2 = u * u;
    let u3 = u2 * u;
    [
        0.5 * (-u3 + 2.0 * u2 - u),
        0.5 * (3.0 * u3 - 5.0 * u2 + 2.0),
        0.5 * (-3.0 * u3 + 4.0 * u2 + u),
        0.5 * (u3 - u2),
    ]
}

#[inline]
fn cell(coord: f64, res: usize) -> (usize, f64) {
    let s = coord * res as f64;
    let mut i = s.floor();
    let mut u = s - i;
    // coord is in [0,1) but rounding can push u to 1.0
    if u >= 1.0 {
        i += 1.0;
        u -= 1.0;
    }
    let i = (i as i64).rem_euclid(res as i64) as usize;
    (i, u)
}

/// Scalar samples on a grid (sections, partition weights, coefficients).
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn from_fn(grid: Grid, f: impl Fn(Point) -> f64 + Sync + Send) -> Self {
        let values = exec::map_collect(grid.node_count(), |i| f(grid.point(i)));
        ScalarField { grid, values }
    }

    pub fn constant(grid: Grid, v: f64) -> Self {
        ScalarField { grid, values: vec![v; grid.node_count()] }
    }

    pub fn interpolate(&self, p: &Point) -> f64 {
        debug_assert_eq!(p.kind, self.grid.kind);
        let r = self.grid.resolution;
        match self.grid.kind {
            ManifoldKind::Circle => {
                let (i, u) = cell(p.c[0], r);
                let w = kernel(u);
                let mut acc = 0.0;
                for (k, wk) in w.iter().enumerate() {
                    let idx = (i as i64 + k as i64 - 1).rem_euclid(r as i64) as usize;
                    acc += wk * self.values[idx];
                }
                acc
            }
            ManifoldKind::Torus2 => {
                let (i0, u0) = cell(p.c[0], r);
                let (i1, u1) = cell(p.c[1], r);
                let w0 = kernel(u0);
                let w1 = kernel(u1);
                let mut acc = 0.0;
                for (a, wa) in w0.iter().enumerate() {
                    let ia = (i0 as i64 + a as i64 - 1).rem_euclid(r as i64) as usize;
                    let row = ia * r;
                    let mut line = 0.0;
                    for (b, wb) in w1.iter().enumerate() {
                        let ib = (i1 as i64 + b as i64 - 1).rem_euclid(r as i64) as usize;
                        line += wb * self.values[row + ib];
                    }
                    acc += wa * line;
                }
                acc
            }
        }
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Tangent-vector samples on a grid. Components are stored in chart
/// coordinates; norms are measured through the attached frame.
#[derive(Debug, Clone)]
pub struct DiscreteVectorField {
    pub grid: Grid,
    pub frame: MetricFrame,
    pub values: Vec<TangentVector>,
}

impl DiscreteVectorField {
    pub fn from_fn(
        grid: Grid,
        frame: MetricFrame,
        f: impl Fn(Point) -> TangentVector + Sync + Send,
    ) -> Self {
        let values = exec::map_collect(grid.node_count(), |i| f(grid.point(i)));
        DiscreteVectorField { grid, frame, values }
    }

    pub fn zero(grid: Grid, frame: MetricFrame) -> Self {
        let z = TangentVector::zero(grid.kind);
        DiscreteVectorField { grid, frame, values: vec![z; grid.node_count()] }
    }

    /// Seeded random trigonometric field: a handful of low wave numbers with
    /// ChaCha-drawn coefficients, normalized to unit sup norm.
    pub fn random_trig(grid: Grid, frame: MetricFrame, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let waves: &[[i32; 2]] = match grid.kind {
            ManifoldKind::Circle => &[[1, 0], [2, 0], [3, 0]],
            ManifoldKind::Torus2 => &[[1, 0], [0, 1], [1, 1], [1, -1]],
        };
        let dim = grid.kind.dim();
        let mut coeffs = Vec::new();
        for _ in 0..dim {
            let per_axis: Vec<(f64, f64)> = waves
                .iter()
                .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            coeffs.push(per_axis);
        }
        let mut field = Self::from_fn(grid, frame, |p| {
            let mut c = [0.0, 0.0];
            for (axis, per_axis) in coeffs.iter().enumerate() {
                for (w, (a, b)) in waves.iter().zip(per_axis) {
                    let phase = std::f64::consts::TAU
                        * (w[0] as f64 * p.c[0] + w[1] as f64 * p.c[1]);
                    c[axis] += a * phase.sin() + b * phase.cos();
                }
            }
            TangentVector::new(grid.kind, c)
        });
        let sup = field.c0_norm();
        if sup > 0.0 {
            field = field.scale(1.0 / sup);
        }
        field
    }

    pub fn node_count(&self) -> usize {
        self.values.len()
    }

    pub fn interpolate(&self, p: &Point) -> TangentVector {
        debug_assert_eq!(p.kind, self.grid.kind);
        let r = self.grid.resolution;
        match self.grid.kind {
            ManifoldKind::Circle => {
                let (i, u) = cell(p.c[0], r);
                let w = kernel(u);
                let mut acc = 0.0;
                for (k, wk) in w.iter().enumerate() {
                    let idx = (i as i64 + k as i64 - 1).rem_euclid(r as i64) as usize;
                    acc += wk * self.values[idx].c[0];
                }
                TangentVector::new(ManifoldKind::Circle, [acc, 0.0])
            }
            ManifoldKind::Torus2 => {
                let (i0, u0) = cell(p.c[0], r);
                let (i1, u1) = cell(p.c[1], r);
                let w0 = kernel(u0);
                let w1 = kernel(u1);
                let mut acc = [0.0, 0.0];
                for (a, wa) in w0.iter().enumerate() {
                    let ia = (i0 as i64 + a as i64 - 1).rem_euclid(r as i64) as usize;
                    let row = ia * r;
                    let mut line = [0.0, 0.0];
                    for (b, wb) in w1.iter().enumerate() {
                        let ib = (i1 as i64 + b as i64 - 1).rem_euclid(r as i64) as usize;
                        let v = &self.values[row + ib];
                        line[0] += wb * v.c[0];
                        line[1] += wb * v.c[1];
                    }
                    acc[0] += wa * line[0];
                    acc[1] += wa * line[1];
                }
                TangentVector::new(ManifoldKind::Torus2, acc)
            }
        }
    }

    /// Exact grid maximum of the frame norm.
    pub fn c0_norm(&self) -> f64 {
        let frame = self.frame;
        exec::map_collect(self.values.len(), |i| frame.vec_norm(&self.values[i]))
            .into_iter()
            .fold(0.0f64, f64::max)
    }

    pub fn scale(&self, s: f64) -> Self {
        DiscreteVectorField {
            grid: self.grid,
            frame: self.frame,
            values: self.values.iter().map(|v| v.scale(s)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.add(b))
            .collect();
        Ok(DiscreteVectorField { grid: self.grid, frame: self.frame, values })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.sub(b))
            .collect();
        Ok(DiscreteVectorField { grid: self.grid, frame: self.frame, values })
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::ConfigInvalid(
                "fields live on different grids".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ManifoldKind;
    use approx::assert_relative_eq;

    fn torus_grid(res: usize) -> Grid {
        Grid::new(ManifoldKind::Torus2, res).unwrap()
    }

    #[test]
    fn constant_field_interpolates_exactly() {
        let grid = torus_grid(16);
        let frame = MetricFrame::identity(ManifoldKind::Torus2);
        let f = DiscreteVectorField::from_fn(grid, frame, |_| {
            TangentVector::new(ManifoldKind::Torus2, [3.25, -1.5])
        });
        for &(x, y) in &[(0.1234, 0.777), (0.0, 0.0), (0.9999, 0.5)] {
            let v = f.interpolate(&Point::torus(x, y));
            assert_relative_eq!(v.c[0], 3.25, epsilon = 1e-13);
            assert_relative_eq!(v.c[1], -1.5, epsilon = 1e-13);
        }
    }

    #[test]
    fn node_reads_are_exact() {
        let grid = torus_grid(32);
        let frame = MetricFrame::identity(ManifoldKind::Torus2);
        let f = DiscreteVectorField::from_fn(grid, frame, |p| {
            TangentVector::new(
                ManifoldKind::Torus2,
                [(7.0 * p.c[0] + 3.0 * p.c[1]).sin(), p.c[0] * p.c[1]],
            )
        });
        for idx in [0usize, 5, 31, 32, 500, 1023] {
            let p = grid.point(idx);
            let v = f.interpolate(&p);
            assert_eq!(v.c, f.values[idx].c, "node {idx} not exact");
        }
    }

    #[test]
    fn smooth_field_cubic_convergence() {
        // sin(2 pi x) against the closed form; the 64 -> 128 error ratio
        // must confirm at least third-order accuracy.
        let mut errs = Vec::new();
        for res in [64usize, 128] {
            let grid = torus_grid(res);
            let frame = MetricFrame::identity(ManifoldKind::Torus2);
            let f = DiscreteVectorField::from_fn(grid, frame, |p| {
                TangentVector::new(
                    ManifoldKind::Torus2,
                    [(std::f64::consts::TAU * p.c[0]).sin(), 0.0],
                )
            });
            let mut max_err = 0.0f64;
            for k in 0..1000 {
                let x = (k as f64 + 0.382) / 1000.0;
                let y = (k as f64 * 0.6180339887).rem_euclid(1.0);
                let got = f.interpolate(&Point::torus(x, y)).c[0];
                let want = (std::f64::consts::TAU * x).sin();
                max_err = max_err.max((got - want).abs());
            }
            errs.push(max_err);
        }
        let ratio = errs[0] / errs[1];
        assert!(ratio >= 6.0, "refinement ratio {ratio} < 6 (errors {errs:?})");
        let c = errs[0] / (64f64.powi(-3));
        assert!(errs[1] <= c * 128f64.powi(-3) * 1.2);
    }

    #[test]
    fn scalar_field_circle_node_exact() {
        let grid = Grid::new(ManifoldKind::Circle, 64).unwrap();
        let s = ScalarField::from_fn(grid, |p| (std::f64::consts::TAU * p.c[0]).cos());
        for idx in [0usize, 1, 17, 63] {
            assert_eq!(s.interpolate(&grid.point(idx)), s.values[idx]);
        }
    }

    #[test]
    fn random_trig_is_seed_deterministic() {
        let grid = torus_grid(16);
        let frame = MetricFrame::identity(ManifoldKind::Torus2);
        let a = DiscreteVectorField::random_trig(grid, frame, 7);
        let b = DiscreteVectorField::random_trig(grid, frame, 7);
        let c = DiscreteVectorField::random_trig(grid, frame, 8);
        assert_eq!(a.values[3].c, b.values[3].c);
        assert_ne!(a.values[3].c, c.values[3].c);
        assert_relative_eq!(a.c0_norm(), 1.0, epsilon = 1e-12);
    }
}
