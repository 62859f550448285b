//! Concrete model diffeomorphisms: linear toral automorphisms, trigonometric
//! perturbations of them, Morse-Smale circle maps, and conjugated oracles
//! g = phi . f . phi^{-1} with a known smooth phi.
//!
//! All maps have closed-form Jacobians. Nonlinear inverses run Newton in the
//! universal cover, seeded by the linear-part inverse; integer toral matrices
//! invert exactly (adjugate over det = +-1) and map grid nodes to grid nodes,
//! which the operator-series code exploits.

use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::{dist, min_lift, Grid, ManifoldKind, MetricFrame, Point};
use crate::linalg::Mat2;

const NEWTON_TOL: f64 = 1e-14;
const NEWTON_MAX_STEPS: usize = 50;

/// One trigonometric term: adds `sin_coeff sin(2 pi w.x) + cos_coeff cos(2 pi w.x)`
/// to the displacement component `axis`. Integer waves keep the map periodic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigTerm {
    pub axis: usize,
    pub wave: [i32; 2],
    pub sin_coeff: f64,
    pub cos_coeff: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigSeries {
    pub terms: Vec<TrigTerm>,
}

impl TrigSeries {
    pub fn new(terms: Vec<TrigTerm>) -> Self {
        TrigSeries { terms }
    }

    pub fn displacement(&self, p: &Point) -> [f64; 2] {
        let mut out = [0.0, 0.0];
        for t in &self.terms {
            let arg = std::f64::consts::TAU
                * (t.wave[0] as f64 * p.c[0] + t.wave[1] as f64 * p.c[1]);
            out[t.axis] += t.sin_coeff * arg.sin() + t.cos_coeff * arg.cos();
        }
        out
    }

    /// Derivative of the displacement.
    pub fn jacobian(&self, p: &Point) -> Mat2 {
        let mut j = Mat2::zero();
        for t in &self.terms {
            let arg = std::f64::consts::TAU
                * (t.wave[0] as f64 * p.c[0] + t.wave[1] as f64 * p.c[1]);
            let d = t.sin_coeff * arg.cos() - t.cos_coeff * arg.sin();
            for k in 0..2 {
                j.a[t.axis][k] += std::f64::consts::TAU * t.wave[k] as f64 * d;
            }
        }
        j
    }
}

/// A diffeomorphism of the form phi(x) = x + amplitude * series(x).
#[derive(Debug, Clone, PartialEq)]
pub struct TrigDiffeo {
    pub series: TrigSeries,
    pub amplitude: f64,
}

impl TrigDiffeo {
    pub fn identity() -> Self {
        TrigDiffeo { series: TrigSeries::default(), amplitude: 0.0 }
    }

    pub fn apply(&self, p: &Point) -> Point {
        let d = self.series.displacement(p);
        Point::new(
            p.kind,
            [p.c[0] + self.amplitude * d[0], p.c[1] + self.amplitude * d[1]],
        )
    }

    pub fn jacobian(&self, p: &Point) -> Mat2 {
        Mat2::identity().add(&self.series.jacobian(p).scale(self.amplitude))
    }

    pub fn invert(&self, y: &Point) -> Result<Point> {
        newton_invert(y.kind, y, *y, |p| self.apply(p), |p| self.jacobian(p))
    }

    /// Smallest |det D phi| over a probe grid.
    pub fn min_jacobian_det(&self, kind: ManifoldKind) -> f64 {
        let grid = Grid::new(kind, 128).expect("probe grid");
        let dim = kind.dim();
        exec::map_collect(grid.node_count(), |i| {
            self.jacobian(&grid.point(i)).det(dim).abs()
        })
        .into_iter()
        .fold(f64::INFINITY, f64::min)
    }
}

fn newton_invert(
    kind: ManifoldKind,
    target: &Point,
    seed: Point,
    f: impl Fn(&Point) -> Point,
    jac: impl Fn(&Point) -> Mat2,
) -> Result<Point> {
    let dim = kind.dim();
    let mut x = seed;
    let mut residual = f64::INFINITY;
    for _ in 0..NEWTON_MAX_STEPS {
        let fx = f(&x);
        let mut r = [0.0, 0.0];
        for k in 0..dim {
            r[k] = min_lift(fx.c[k] - target.c[k]);
        }
        residual = r[0].abs().max(r[1].abs());
        if residual <= NEWTON_TOL {
            return Ok(x);
        }
        let j = jac(&x);
        let jinv = j
            .inverse(dim)
            .ok_or_else(|| Error::NonInvertible("singular Jacobian in Newton".into()))?;
        let step = jinv.mul_vec(r);
        x = Point::new(kind, [x.c[0] - step[0], x.c[1] - step[1]]);
    }
    Err(Error::NewtonDivergence { steps: NEWTON_MAX_STEPS, residual })
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapKind {
    /// x -> A x mod 1 with an integer matrix, |det A| = 1.
    LinearToral { matrix: [[i64; 2]; 2] },
    /// x -> A x + amplitude * series(x) mod 1.
    PerturbedToral {
        matrix: [[i64; 2]; 2],
        series: TrigSeries,
        amplitude: f64,
    },
    /// x -> x + amplitude * sin(2 pi x) on the circle.
    MorseSmaleCircle { amplitude: f64 },
    /// phi . base . phi^{-1} for a known trigonometric diffeo phi.
    Conjugated { base: Box<ModelMap>, phi: TrigDiffeo },
}

/// Hyperbolicity data: contraction rate lambda, bilateral Lipschitz bound l,
/// a Hoelder exponent with lambda l^alpha < 1, and lambda' in (lambda, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperbolicityConstants {
    pub lambda: f64,
    pub l: f64,
    pub alpha: f64,
    pub lambda_prime: f64,
}

impl HyperbolicityConstants {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::ConfigInvalid(format!(
                "lambda = {} outside (0,1)",
                self.lambda
            )));
        }
        if !(self.lambda < self.lambda_prime && self.lambda_prime < 1.0) {
            return Err(Error::ConfigInvalid(format!(
                "lambda' = {} outside (lambda, 1)",
                self.lambda_prime
            )));
        }
        if !(self.alpha > 0.0 && self.alpha <= 0.95) {
            return Err(Error::ConfigInvalid(format!(
                "alpha = {} outside (0, 0.95]",
                self.alpha
            )));
        }
        let margin = self.lambda * self.l.powf(self.alpha);
        if margin >= 1.0 {
            return Err(Error::ConfigInvalid(format!(
                "lambda * l^alpha = {margin} >= 1"
            )));
        }
        Ok(())
    }

    /// Replace alpha, revalidating the defining inequality.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        let out = HyperbolicityConstants { alpha, ..*self };
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::ConfigInvalid(format!("alpha = {alpha} outside (0,1)")));
        }
        let margin = out.lambda * out.l.powf(alpha);
        if margin >= 1.0 {
            return Err(Error::ConfigInvalid(format!(
                "lambda * l^alpha = {margin} >= 1 for alpha = {alpha}"
            )));
        }
        Ok(out)
    }
}

/// One component of the spectral decomposition.
#[derive(Debug, Clone, PartialEq)]
pub enum ComponentSet {
    WholeManifold,
    Finite(Vec<Point>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasicComponent {
    pub set: ComponentSet,
    pub stable_rank: usize,
    pub unstable_rank: usize,
    /// Radius of the neighborhood used for covers and partitions.
    pub radius: f64,
}

/// Components ordered so that stable sets of earlier components never meet
/// unstable sets of later ones (repellers before attractors on the circle).
#[derive(Debug, Clone, PartialEq)]
pub struct BasicSetData {
    pub components: Vec<BasicComponent>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelMap {
    pub kind: MapKind,
    pub frame: MetricFrame,
}

fn int_matrix_inverse(m: [[i64; 2]; 2]) -> Result<[[i64; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det != 1 && det != -1 {
        return Err(Error::ConfigInvalid(format!(
            "toral matrix determinant {det} != +-1"
        )));
    }
    Ok([
        [m[1][1] * det, -m[0][1] * det],
        [-m[1][0] * det, m[0][0] * det],
    ])
}

impl ModelMap {
    pub fn linear_toral(matrix: [[i64; 2]; 2], frame: MetricFrame) -> Result<Self> {
        int_matrix_inverse(matrix)?;
        let a = Mat2::from_int(matrix);
        let (mu0, mu1) = a
            .real_eigenvalues()
            .ok_or_else(|| Error::ConfigInvalid("toral matrix has complex spectrum".into()))?;
        if mu0.abs() <= 1.0 + 1e-12 || mu1.abs() >= 1.0 - 1e-12 {
            return Err(Error::ConfigInvalid(format!(
                "toral matrix not hyperbolic: |mu| = {}, {}",
                mu0.abs(),
                mu1.abs()
            )));
        }
        Ok(ModelMap { kind: MapKind::LinearToral { matrix }, frame })
    }

    pub fn perturbed_toral(
        matrix: [[i64; 2]; 2],
        series: TrigSeries,
        amplitude: f64,
        frame: MetricFrame,
    ) -> Result<Self> {
        ModelMap::linear_toral(matrix, frame)?;
        let m = ModelMap {
            kind: MapKind::PerturbedToral { matrix, series, amplitude },
            frame,
        };
        let probe = Grid::new(ManifoldKind::Torus2, 128)?;
        let min_det = m.min_jacobian_det(&probe);
        if min_det <= 1e-6 {
            return Err(Error::NonInvertible(format!(
                "perturbed toral map: min |det J| = {min_det:.3e}"
            )));
        }
        Ok(m)
    }

    pub fn morse_smale_circle(amplitude: f64, frame: MetricFrame) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude * std::f64::consts::TAU < 1.0) {
            return Err(Error::ConfigInvalid(format!(
                "circle amplitude {amplitude} outside (0, 1/(2 pi))"
            )));
        }
        Ok(ModelMap { kind: MapKind::MorseSmaleCircle { amplitude }, frame })
    }

    /// Conjugated oracle g = phi . base . phi^{-1}; rejects non-invertible phi.
    pub fn make_conjugated(base: ModelMap, phi: TrigDiffeo) -> Result<Self> {
        let min_det = phi.min_jacobian_det(base.manifold());
        if min_det <= 1e-6 {
            return Err(Error::NonInvertible(format!(
                "conjugating diffeo: min |det D phi| = {min_det:.3e}"
            )));
        }
        let frame = base.frame;
        Ok(ModelMap {
            kind: MapKind::Conjugated { base: Box::new(base), phi },
            frame,
        })
    }

    /// The standard cat map [[2,1],[1,1]] in the identity frame.
    pub fn cat_map() -> Self {
        ModelMap::linear_toral(
            [[2, 1], [1, 1]],
            MetricFrame::identity(ManifoldKind::Torus2),
        )
        .expect("cat map is hyperbolic")
    }

    /// The cat map measured in its eigenbasis, where the stable and unstable
    /// directions are the coordinate axes.
    pub fn cat_map_eigenframe() -> Self {
        ModelMap::cat_map().with_eigenframe().expect("cat map eigenframe")
    }

    /// Re-measure this map in the eigenbasis of its linear part.
    pub fn with_eigenframe(&self) -> Result<Self> {
        let a = Mat2::from_int(self.linear_part_matrix());
        let (mu_u, mu_s) = a
            .real_eigenvalues()
            .ok_or_else(|| Error::ConfigInvalid("complex spectrum".into()))?;
        let e_u = a
            .eigenvector(mu_u)
            .ok_or_else(|| Error::NonInvertible("unstable eigenvector".into()))?;
        let e_s = a
            .eigenvector(mu_s)
            .ok_or_else(|| Error::NonInvertible("stable eigenvector".into()))?;
        let frame = MetricFrame::new(self.manifold(), Mat2::from_columns(e_u, e_s))?;
        Ok(ModelMap { kind: self.kind.clone(), frame })
    }

    pub fn manifold(&self) -> ManifoldKind {
        match &self.kind {
            MapKind::MorseSmaleCircle { .. } => ManifoldKind::Circle,
            MapKind::Conjugated { base, .. } => base.manifold(),
            _ => ManifoldKind::Torus2,
        }
    }

    /// Integer matrix of the linear part (identity for the circle family).
    pub fn linear_part_matrix(&self) -> [[i64; 2]; 2] {
        match &self.kind {
            MapKind::LinearToral { matrix } | MapKind::PerturbedToral { matrix, .. } => *matrix,
            MapKind::MorseSmaleCircle { .. } => [[1, 0], [0, 1]],
            MapKind::Conjugated { base, .. } => base.linear_part_matrix(),
        }
    }

    pub fn evaluate(&self, x: &Point) -> Point {
        match &self.kind {
            MapKind::LinearToral { matrix } => {
                let a = Mat2::from_int(*matrix);
                Point::new(ManifoldKind::Torus2, a.mul_vec(x.c))
            }
            MapKind::PerturbedToral { matrix, series, amplitude } => {
                let a = Mat2::from_int(*matrix);
                let lin = a.mul_vec(x.c);
                let d = series.displacement(x);
                Point::new(
                    ManifoldKind::Torus2,
                    [lin[0] + amplitude * d[0], lin[1] + amplitude * d[1]],
                )
            }
            MapKind::MorseSmaleCircle { amplitude } => {
                let s = (std::f64::consts::TAU * x.c[0]).sin();
                Point::circle(x.c[0] + amplitude * s)
            }
            MapKind::Conjugated { base, phi } => {
                let z = phi.invert(x).expect("phi inverse (validated diffeo)");
                phi.apply(&base.evaluate(&z))
            }
        }
    }

    pub fn inverse(&self, y: &Point) -> Result<Point> {
        match &self.kind {
            MapKind::LinearToral { matrix } => {
                let inv = Mat2::from_int(int_matrix_inverse(*matrix)?);
                Ok(Point::new(ManifoldKind::Torus2, inv.mul_vec(y.c)))
            }
            MapKind::PerturbedToral { matrix, .. } => {
                let inv = Mat2::from_int(int_matrix_inverse(*matrix)?);
                let seed = Point::new(ManifoldKind::Torus2, inv.mul_vec(y.c));
                newton_invert(
                    ManifoldKind::Torus2,
                    y,
                    seed,
                    |p| self.evaluate(p),
                    |p| self.jacobian(p),
                )
            }
            MapKind::MorseSmaleCircle { .. } => newton_invert(
                ManifoldKind::Circle,
                y,
                *y,
                |p| self.evaluate(p),
                |p| self.jacobian(p),
            ),
            MapKind::Conjugated { base, phi } => {
                let z = phi.invert(y)?;
                Ok(phi.apply(&base.inverse(&z)?))
            }
        }
    }

    /// Exact analytic derivative in chart coordinates.
    pub fn jacobian(&self, x: &Point) -> Mat2 {
        match &self.kind {
            MapKind::LinearToral { matrix } => Mat2::from_int(*matrix),
            MapKind::PerturbedToral { matrix, series, amplitude } => {
                Mat2::from_int(*matrix).add(&series.jacobian(x).scale(*amplitude))
            }
            MapKind::MorseSmaleCircle { amplitude } => {
                let mut j = Mat2::identity();
                j.a[0][0] =
                    1.0 + std::f64::consts::TAU * amplitude * (std::f64::consts::TAU * x.c[0]).cos();
                j
            }
            MapKind::Conjugated { base, phi } => {
                let z = phi.invert(x).expect("phi inverse (validated diffeo)");
                let fz = base.evaluate(&z);
                let dphi_fz = phi.jacobian(&fz);
                let dbase = base.jacobian(&z);
                let dphi_z_inv = phi
                    .jacobian(&z)
                    .inverse(self.manifold().dim())
                    .expect("validated diffeo");
                dphi_fz.mul_mat(&dbase).mul_mat(&dphi_z_inv)
            }
        }
    }

    fn min_jacobian_det(&self, grid: &Grid) -> f64 {
        let dim = self.manifold().dim();
        exec::map_collect(grid.node_count(), |i| {
            self.jacobian(&grid.point(i)).det(dim).abs()
        })
        .into_iter()
        .fold(f64::INFINITY, f64::min)
    }

    /// Grid-sup of the frame operator norms of Tf and Tf^{-1}.
    pub fn lipschitz_bounds(&self, grid: &Grid) -> Result<(f64, f64)> {
        let dim = self.manifold().dim();
        let frame = self.frame;
        let norms = exec::map_collect(grid.node_count(), |i| {
            let j = self.jacobian(&grid.point(i));
            let fwd = frame.op_norm(&j);
            let bwd = j.inverse(dim).map(|ji| frame.op_norm(&ji)).unwrap_or(f64::INFINITY);
            (fwd, bwd)
        });
        let mut lip_f: f64 = 0.0;
        let mut lip_inv: f64 = 0.0;
        for (a, b) in norms {
            lip_f = lip_f.max(a);
            lip_inv = lip_inv.max(b);
        }
        if !lip_inv.is_finite() {
            return Err(Error::NonInvertible("singular Jacobian on grid".into()));
        }
        Ok((lip_f, lip_inv))
    }

    fn linear_lambda(&self) -> Result<f64> {
        let a = Mat2::from_int(self.linear_part_matrix());
        let (mu0, mu1) = a
            .real_eigenvalues()
            .ok_or_else(|| Error::ConfigInvalid("complex spectrum".into()))?;
        Ok((1.0 / mu0.abs()).max(mu1.abs()))
    }

    /// Contraction rate lambda, Lipschitz bound l, the default Hoelder
    /// exponent (largest with lambda l^alpha <= 0.95, capped at 0.95), and
    /// lambda' slightly above lambda.
    pub fn hyperbolicity_constants(&self) -> Result<HyperbolicityConstants> {
        let probe = Grid::new(self.manifold(), 256)?;
        let (lambda, l) = match &self.kind {
            MapKind::LinearToral { .. } => {
                let lambda = self.linear_lambda()?;
                let (lf, lb) = self.lipschitz_bounds(&probe)?;
                (lambda, lf.max(lb))
            }
            MapKind::PerturbedToral { .. } | MapKind::Conjugated { .. } => {
                // Constants are fixed at the linear part; the perturbation is
                // absorbed by a 2% safety margin.
                let lambda = (1.02 * self.linear_lambda()?).min(0.999);
                let (lf, lb) = self.lipschitz_bounds(&probe)?;
                (lambda, lf.max(lb))
            }
            MapKind::MorseSmaleCircle { amplitude } => {
                let tau_a = std::f64::consts::TAU * amplitude;
                let lambda = (1.0 / (1.0 + tau_a)).max(1.0 - tau_a);
                let l = (1.0 + tau_a).max(1.0 / (1.0 - tau_a));
                (lambda, l)
            }
        };
        if l <= 1.0 {
            return Err(Error::ConfigInvalid(format!("Lipschitz bound l = {l} <= 1")));
        }
        let alpha_max = (0.95f64 / lambda).ln() / l.ln();
        if alpha_max <= 0.0 {
            return Err(Error::ConfigInvalid(format!(
                "no alpha in (0,1) satisfies lambda * l^alpha < 1 (lambda = {lambda}, l = {l})"
            )));
        }
        let alpha = alpha_max.min(0.95);
        let lambda_prime = (1.02 * lambda).min((1.0 + lambda) / 2.0);
        let constants = HyperbolicityConstants { lambda, l, alpha, lambda_prime };
        constants.validate()?;
        Ok(constants)
    }

    /// Spectral decomposition. Anosov torus kinds report the whole manifold;
    /// the circle family locates its fixed points by Newton on f(x) - x.
    pub fn basic_sets(&self) -> BasicSetData {
        match &self.kind {
            MapKind::MorseSmaleCircle { .. } => {
                let mut fixed = Vec::new();
                let cells = 64;
                for k in 0..cells {
                    let a = k as f64 / cells as f64;
                    let b = (k + 1) as f64 / cells as f64;
                    let ga = min_lift(self.evaluate(&Point::circle(a)).c[0] - a);
                    let gb = min_lift(self.evaluate(&Point::circle(b)).c[0] - b);
                    if ga == 0.0 {
                        fixed.push(a);
                    } else if ga * gb < 0.0 {
                        // Newton on g(x) = f(x) - x from the midpoint
                        let mut x = 0.5 * (a + b);
                        for _ in 0..60 {
                            let g = min_lift(self.evaluate(&Point::circle(x)).c[0] - x);
                            let dg = self.jacobian(&Point::circle(x)).a[0][0] - 1.0;
                            if dg.abs() < 1e-15 || g.abs() < 1e-14 {
                                break;
                            }
                            x -= g / dg;
                        }
                        fixed.push(x.rem_euclid(1.0));
                    }
                }
                let mut components: Vec<BasicComponent> = fixed
                    .iter()
                    .map(|&x| {
                        let fp = self.jacobian(&Point::circle(x)).a[0][0];
                        let repelling = fp.abs() > 1.0;
                        BasicComponent {
                            set: ComponentSet::Finite(vec![Point::circle(x)]),
                            stable_rank: if repelling { 0 } else { 1 },
                            unstable_rank: if repelling { 1 } else { 0 },
                            radius: 0.1,
                        }
                    })
                    .collect();
                // repellers first: their stable sets are the points themselves
                components.sort_by_key(|c| c.stable_rank);
                BasicSetData { components }
            }
            _ => BasicSetData {
                components: vec![BasicComponent {
                    set: ComponentSet::WholeManifold,
                    stable_rank: 1,
                    unstable_rank: 1,
                    radius: 0.5,
                }],
            },
        }
    }

    /// Diffeomorphism sanity: positive Jacobian determinant on the grid and
    /// forward-inverse residual below 1e-10.
    pub fn validate_diffeomorphism(&self, grid: &Grid) -> Result<()> {
        let min_det = self.min_jacobian_det(grid);
        if min_det <= 0.0 {
            return Err(Error::NonInvertible(format!(
                "min |det J| = {min_det:.3e} on grid"
            )));
        }
        let stride = (grid.node_count() / 512).max(1);
        let mut worst = 0.0f64;
        for i in (0..grid.node_count()).step_by(stride) {
            let y = grid.point(i);
            let x = self.inverse(&y)?;
            let back = self.evaluate(&x);
            worst = worst.max(dist(&back, &y, &MetricFrame::identity(grid.kind)));
        }
        if worst > 1e-10 {
            return Err(Error::NonInvertible(format!(
                "inverse residual {worst:.3e} > 1e-10"
            )));
        }
        Ok(())
    }

    /// Newton refinement of a period-p point near `seed`: solves
    /// f^p(x) = x with the orbit Jacobian product.
    pub fn periodic_point_near(&self, seed: &Point, period: usize) -> Result<Point> {
        let kind = self.manifold();
        let dim = kind.dim();
        let mut x = *seed;
        let mut residual = f64::INFINITY;
        for _ in 0..NEWTON_MAX_STEPS {
            let mut y = x;
            let mut jac = Mat2::identity();
            for _ in 0..period {
                jac = self.jacobian(&y).mul_mat(&jac);
                y = self.evaluate(&y);
            }
            let mut r = [0.0, 0.0];
            for k in 0..dim {
                r[k] = min_lift(y.c[k] - x.c[k]);
            }
            residual = r[0].abs().max(r[1].abs());
            if residual <= NEWTON_TOL {
                return Ok(x);
            }
            // solve (Df^p - I) dx = -r
            let mut a = jac;
            for k in 0..2 {
                a.a[k][k] -= 1.0;
            }
            let ainv = a
                .inverse(dim)
                .ok_or_else(|| Error::NonInvertible("periodic point is not hyperbolic".into()))?;
            let step = ainv.mul_vec(r);
            x = Point::new(kind, [x.c[0] - step[0], x.c[1] - step[1]]);
        }
        Err(Error::NewtonDivergence { steps: NEWTON_MAX_STEPS, residual })
    }

    /// Node-index permutations (forward, backward) when the map sends grid
    /// nodes to grid nodes exactly, i.e. for integer toral matrices.
    pub fn node_permutation(&self, grid: &Grid) -> Option<(Vec<u32>, Vec<u32>)> {
        let matrix = match &self.kind {
            MapKind::LinearToral { matrix } => *matrix,
            _ => return None,
        };
        let inv = int_matrix_inverse(matrix).ok()?;
        let r = grid.resolution as i64;
        let build = |m: [[i64; 2]; 2]| -> Vec<u32> {
            (0..grid.node_count())
                .map(|idx| {
                    let i = (idx / grid.resolution) as i64;
                    let j = (idx % grid.resolution) as i64;
                    let ni = (m[0][0] * i + m[0][1] * j).rem_euclid(r) as usize;
                    let nj = (m[1][0] * i + m[1][1] * j).rem_euclid(r) as usize;
                    (ni * grid.resolution + nj) as u32
                })
                .collect()
        };
        Some((build(matrix), build(inv)))
    }
}
