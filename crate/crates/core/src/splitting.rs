//! Fiberwise graph transform and its contraction fixed point: the invariant
//! splitting of a (perturbed) Anosov torus map.
//!
//! A candidate unstable bundle is the graph of a section tau assigning to
//! each node a linear map from the reference unstable line to the reference
//! stable line (a scalar, since fibers are rank one on the 2-torus). One
//! sweep sends tau(x) to Gamma(tau(f^{-1}(x))), where Gamma acts on a fiber
//! value g through the Jacobian blocks as
//! `Gamma(g) = (F_us + F_ss g) / (F_uu + F_su g)`.
//!
//! Under the block bounds the sweep contracts with rate at most lambda3^2
//! and its fixed point is the invariant section. The stable bundle comes
//! from the same machinery applied to the inverse map with the reference
//! roles swapped.

use crate::error::{Error, Result};
use crate::exec;
use crate::field::ScalarField;
use crate::geometry::{dist, Grid, Point};
use crate::linalg::Mat2;
use crate::norms::PairSet;
use crate::systems::{HyperbolicityConstants, ModelMap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Constant global reference splitting: unit spans of the unstable and
/// stable directions of the linear part. Basis vectors are normalized to
/// unit frame norm so block entries read as frame operator norms.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceSplitting {
    pub e_u: [f64; 2],
    pub e_s: [f64; 2],
    basis_inv: Mat2,
}

const MIN_SPLITTING_ANGLE: f64 = 1e-3;

impl ReferenceSplitting {
    pub fn new(m: &ModelMap, e_u: [f64; 2], e_s: [f64; 2]) -> Result<Self> {
        use crate::geometry::TangentVector;
        let kind = m.manifold();
        let nu = m.frame.vec_norm(&TangentVector::new(kind, e_u));
        let ns = m.frame.vec_norm(&TangentVector::new(kind, e_s));
        if nu == 0.0 || ns == 0.0 {
            return Err(Error::NonInvertible("degenerate reference direction".into()));
        }
        let e_u = [e_u[0] / nu, e_u[1] / nu];
        let e_s = [e_s[0] / ns, e_s[1] / ns];
        let basis = Mat2::from_columns(e_u, e_s);
        let basis_inv = basis
            .inverse(2)
            .ok_or_else(|| Error::NonInvertible("reference splitting basis".into()))?;
        let out = ReferenceSplitting { e_u, e_s, basis_inv };
        if out.angle() < MIN_SPLITTING_ANGLE {
            return Err(Error::ConfigInvalid(format!(
                "reference splitting angle {:.3e} below 1e-3",
                out.angle()
            )));
        }
        Ok(out)
    }

    /// Eigendirections of the map's linear part.
    pub fn from_linear_part(m: &ModelMap) -> Result<Self> {
        let a = Mat2::from_int(m.linear_part_matrix());
        let (mu_u, mu_s) = a
            .real_eigenvalues()
            .ok_or_else(|| Error::ConfigInvalid("complex spectrum".into()))?;
        let e_u = a
            .eigenvector(mu_u)
            .ok_or_else(|| Error::NonInvertible("unstable eigenvector".into()))?;
        let e_s = a
            .eigenvector(mu_s)
            .ok_or_else(|| Error::NonInvertible("stable eigenvector".into()))?;
        ReferenceSplitting::new(m, e_u, e_s)
    }

    /// Swap the roles of the two directions (used for the stable-side solve).
    pub fn swapped(&self, m: &ModelMap) -> Result<Self> {
        ReferenceSplitting::new(m, self.e_s, self.e_u)
    }

    /// Angle between the two reference directions (Euclidean chart angle).
    pub fn angle(&self) -> f64 {
        let dot = self.e_u[0] * self.e_s[0] + self.e_u[1] * self.e_s[1];
        let nu = (self.e_u[0] * self.e_u[0] + self.e_u[1] * self.e_u[1]).sqrt();
        let ns = (self.e_s[0] * self.e_s[0] + self.e_s[1] * self.e_s[1]).sqrt();
        (dot / (nu * ns)).clamp(-1.0, 1.0).acos().min(
            std::f64::consts::PI - (dot / (nu * ns)).clamp(-1.0, 1.0).acos(),
        )
    }

    /// Coefficients (c_u, c_s) of a chart vector over the reference basis.
    pub fn coefficients(&self, v: [f64; 2]) -> [f64; 2] {
        self.basis_inv.mul_vec(v)
    }
}

/// Jacobian blocks over the reference splitting: the image of e_u is
/// F_uu e_u + F_us e_s at the target point, the image of e_s is
/// F_su e_u + F_ss e_s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Blocks {
    pub f_uu: f64,
    pub f_su: f64,
    pub f_us: f64,
    pub f_ss: f64,
}

fn blocks_of(j: &Mat2, r: &ReferenceSplitting) -> Blocks {
    let cu = r.coefficients(j.mul_vec(r.e_u));
    let cs = r.coefficients(j.mul_vec(r.e_s));
    Blocks { f_uu: cu[0], f_us: cu[1], f_su: cs[0], f_ss: cs[1] }
}

/// Blocks of T_x f over the reference splitting.
pub fn block_decompose(m: &ModelMap, r: &ReferenceSplitting, x: &Point) -> Blocks {
    blocks_of(&m.jacobian(x), r)
}

/// A section of the disc bundle: one scalar fiber value per node, bounded
/// by the disc radius.
#[derive(Debug, Clone)]
pub struct SplittingSection {
    pub field: ScalarField,
    pub radius: f64,
}

impl SplittingSection {
    pub fn zero(grid: Grid, radius: f64) -> Self {
        SplittingSection { field: ScalarField::constant(grid, 0.0), radius }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>, radius: f64) -> Result<Self> {
        let s = SplittingSection { field: ScalarField { grid, values }, radius };
        s.validate()?;
        Ok(s)
    }

    pub fn sup(&self) -> f64 {
        self.field.sup_abs()
    }

    pub fn validate(&self) -> Result<()> {
        let sup = self.sup();
        if !sup.is_finite() || sup > self.radius + 1e-12 {
            return Err(Error::ConfigInvalid(format!(
                "section norm {sup:.6} exceeds disc radius {}",
                self.radius
            )));
        }
        Ok(())
    }
}

/// lambda < lambda1 < lambda2 < lambda3 < 1 with lambda3^2 l^alpha < 1,
/// disc radius r >= 1, off-diagonal budget eps with r eps <= 1/lambda2 -
/// 1/lambda3, the section modulus constant K and the sweep modulus C.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphTransformConstants {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub r: f64,
    pub eps_graph: f64,
    pub k_modulus: f64,
    pub c_gamma: f64,
}

impl GraphTransformConstants {
    /// Widest-margin defaults: lambda3 capped by lambda3^2 l^alpha <= 0.98,
    /// lambda1 and lambda2 geometrically interpolated between lambda and
    /// lambda3, r = 1 and eps at its admissible maximum. K comes from the
    /// modulus recursion with the measured sweep constant C.
    pub fn auto(
        m: &ModelMap,
        reference: &ReferenceSplitting,
        h: &HyperbolicityConstants,
        grid: Grid,
        seed: u64,
    ) -> Result<Self> {
        let cap = (0.98 / h.l.powf(h.alpha)).sqrt().min(0.995);
        if cap <= h.lambda {
            return Err(Error::ConfigInvalid(format!(
                "lambda3^2 * l^alpha <= 0.98 has no solution above lambda = {}",
                h.lambda
            )));
        }
        let lambda3 = cap;
        let t = lambda3 / h.lambda;
        let lambda1 = h.lambda * t.powf(1.0 / 3.0);
        let lambda2 = h.lambda * t.powf(2.0 / 3.0);
        let r = 1.0;
        let eps_graph = (1.0 / lambda2 - 1.0 / lambda3) / r;
        let c_gamma = measure_sweep_modulus(m, reference, grid, r, h.alpha, seed)?;
        let l_alpha = h.l.powf(h.alpha);
        let k_modulus = (c_gamma * l_alpha / (1.0 - lambda3 * lambda3 * l_alpha))
            .max(c_gamma / (1.0 - lambda3 * lambda3));
        let out = GraphTransformConstants {
            lambda1,
            lambda2,
            lambda3,
            r,
            eps_graph,
            k_modulus,
            c_gamma,
        };
        out.validate(h)?;
        Ok(out)
    }

    pub fn validate(&self, h: &HyperbolicityConstants) -> Result<()> {
        if !(h.lambda < self.lambda1
            && self.lambda1 < self.lambda2
            && self.lambda2 < self.lambda3
            && self.lambda3 < 1.0)
        {
            return Err(Error::ConfigInvalid(format!(
                "need lambda < lambda1 < lambda2 < lambda3 < 1, got {} < {} < {} < {}",
                h.lambda, self.lambda1, self.lambda2, self.lambda3
            )));
        }
        let margin = self.lambda3 * self.lambda3 * h.l.powf(h.alpha);
        if margin >= 1.0 {
            return Err(Error::ConfigInvalid(format!(
                "lambda3^2 * l^alpha = {margin:.6} >= 1"
            )));
        }
        if self.r < 1.0 {
            return Err(Error::ConfigInvalid(format!("disc radius r = {} < 1", self.r)));
        }
        let budget = 1.0 / self.lambda2 - 1.0 / self.lambda3;
        if self.r * self.eps_graph > budget + 1e-12 {
            return Err(Error::ConfigInvalid(format!(
                "r * eps_graph = {:.6} exceeds 1/lambda2 - 1/lambda3 = {budget:.6}",
                self.r * self.eps_graph
            )));
        }
        Ok(())
    }

    pub fn contraction_rate(&self) -> f64 {
        self.lambda3 * self.lambda3
    }
}

/// Sampled Lipschitz/Hoelder modulus of the sweep as a function of base
/// point and fiber value.
fn measure_sweep_modulus(
    m: &ModelMap,
    reference: &ReferenceSplitting,
    grid: Grid,
    r: f64,
    alpha: f64,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frame = m.frame;
    let mut c: f64 = 0.0;
    for _ in 0..2000 {
        let x = grid.point(rng.gen_range(0..grid.node_count()));
        let y = grid.point(rng.gen_range(0..grid.node_count()));
        let g1 = rng.gen_range(-r..r);
        let g2 = rng.gen_range(-r..r);
        let bx = block_decompose(m, reference, &x);
        let by = block_decompose(m, reference, &y);
        let gx = fiber_transform(&bx, g1).ok_or_else(|| {
            Error::NonInvertible("unstable block not invertible while sampling".into())
        })?;
        let gy = fiber_transform(&by, g2).ok_or_else(|| {
            Error::NonInvertible("unstable block not invertible while sampling".into())
        })?;
        let num = (gx - gy).abs();
        let arg = (g1 - g2).abs() + dist(&x, &y, &frame);
        if arg > 1e-12 {
            let denom = arg.min(arg.powf(alpha));
            c = c.max(num / denom);
        }
    }
    Ok(c * 1.05)
}

/// The fiberwise graph transform Gamma at one fiber value; None when the
/// unstable block degenerates.
#[inline]
pub fn fiber_transform(b: &Blocks, g: f64) -> Option<f64> {
    let phi_u = b.f_uu + b.f_su * g;
    if phi_u.abs() < 1e-12 {
        return None;
    }
    Some((b.f_us + b.f_ss * g) / phi_u)
}

/// Precomputed sweep data: the pullback point of every node and the Jacobian
/// blocks there. The unstable side pulls back through f^{-1}; the stable
/// side is the unstable side of f^{-1}, which pulls back through f.
#[derive(Debug, Clone)]
pub struct GraphTransformEngine {
    pub grid: Grid,
    positions: Vec<Point>,
    blocks: Vec<Blocks>,
    pub radius: f64,
}

impl GraphTransformEngine {
    /// Sweep data for the unstable bundle of `m`.
    pub fn unstable(
        m: &ModelMap,
        reference: &ReferenceSplitting,
        grid: Grid,
        radius: f64,
    ) -> Result<Self> {
        let positions: Vec<Point> = exec::map_collect(grid.node_count(), |i| {
            m.inverse(&grid.point(i))
        })
        .into_iter()
        .collect::<Result<_>>()?;
        let blocks =
            exec::map_collect(grid.node_count(), |i| block_decompose(m, reference, &positions[i]));
        Ok(GraphTransformEngine { grid, positions, blocks, radius })
    }

    /// Sweep data for the stable bundle of `m`: unstable side of the inverse
    /// map over the swapped reference.
    pub fn stable(
        m: &ModelMap,
        reference: &ReferenceSplitting,
        grid: Grid,
        radius: f64,
    ) -> Result<Self> {
        let swapped = reference.swapped(m)?;
        let positions: Vec<Point> =
            exec::map_collect(grid.node_count(), |i| m.evaluate(&grid.point(i)));
        let dim = m.manifold().dim();
        let blocks: Vec<Blocks> = exec::map_collect(grid.node_count(), |i| {
            m.jacobian(&positions[i])
                .inverse(dim)
                .map(|jinv| blocks_of(&jinv, &swapped))
                .ok_or_else(|| Error::NonInvertible("singular Jacobian".into()))
        })
        .into_iter()
        .collect::<Result<_>>()?;
        Ok(GraphTransformEngine { grid, positions, blocks, radius })
    }

    /// One graph-transform sweep. Fails on a non-invertible unstable block,
    /// naming the offending node.
    pub fn sweep(&self, tau: &ScalarField) -> Result<ScalarField> {
        let values: Vec<f64> = exec::map_collect(self.grid.node_count(), |i| {
            let g = tau.interpolate(&self.positions[i]);
            fiber_transform(&self.blocks[i], g).ok_or(i)
        })
        .into_iter()
        .collect::<std::result::Result<_, usize>>()
        .map_err(|node| {
            Error::NonInvertible(format!(
                "graph transform: unstable block vanished at node {node}"
            ))
        })?;
        Ok(ScalarField { grid: self.grid, values })
    }
}

/// One application of the graph transform to a bounded section.
pub fn graph_transform(
    m: &ModelMap,
    reference: &ReferenceSplitting,
    tau: &SplittingSection,
) -> Result<SplittingSection> {
    tau.validate()?;
    let engine = GraphTransformEngine::unstable(m, reference, tau.field.grid, tau.radius)?;
    let field = engine.sweep(&tau.field)?;
    Ok(SplittingSection { field, radius: tau.radius })
}

/// Fixed point of the graph transform on both bundle sides.
#[derive(Debug, Clone)]
pub struct InvariantSplittingResult {
    pub section_u: SplittingSection,
    pub section_s: SplittingSection,
    pub iterations: usize,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    /// sup-norm defect of the fixed point under one extra sweep.
    pub residual: f64,
    /// Measured section modulus over a pair sample, when one is supplied.
    pub k_hat: Option<f64>,
}

fn iterate_to_fixed_point(
    engine: &GraphTransformEngine,
    start: &ScalarField,
    tol: f64,
    max_iter: usize,
) -> Result<(ScalarField, usize, Vec<f64>)> {
    let mut tau = start.clone();
    let mut ratios = Vec::new();
    let mut prev_diff: Option<f64> = None;
    for it in 1..=max_iter {
        let next = engine.sweep(&tau)?;
        let diff = exec::max_value(next.values.len(), |i| {
            (next.values[i] - tau.values[i]).abs()
        });
        if let Some(p) = prev_diff {
            if p > 0.0 {
                ratios.push(diff / p);
            }
        }
        tau = next;
        if diff <= tol {
            return Ok((tau, it, ratios));
        }
        prev_diff = Some(diff);
    }
    let last = ratios.last().copied().unwrap_or(f64::NAN);
    Err(Error::SolverDivergence {
        message: format!("graph transform: no fixed point after {max_iter} sweeps (last ratio {last:.4})"),
        ratio_trace: ratios,
    })
}

/// Iterate the graph transform from `tau0` until the sup-difference of
/// successive sweeps drops below `tol`; solve the stable side the same way;
/// report ratios, residual and (optionally) the section modulus.
pub fn solve_invariant_section(
    m: &ModelMap,
    reference: &ReferenceSplitting,
    tau0: &SplittingSection,
    tol: f64,
    max_iter: usize,
    pairs: Option<&PairSet>,
) -> Result<InvariantSplittingResult> {
    tau0.validate()?;
    let grid = tau0.field.grid;
    let radius = tau0.radius;

    let engine_u = GraphTransformEngine::unstable(m, reference, grid, radius)?;
    let (tau_u, iter_u, ratios_u) = iterate_to_fixed_point(&engine_u, &tau0.field, tol, max_iter)?;
    let resweep_u = engine_u.sweep(&tau_u)?;
    let residual_u =
        exec::max_value(tau_u.values.len(), |i| (resweep_u.values[i] - tau_u.values[i]).abs());

    let engine_s = GraphTransformEngine::stable(m, reference, grid, radius)?;
    let zero = ScalarField::constant(grid, 0.0);
    let (tau_s, iter_s, ratios_s) = iterate_to_fixed_point(&engine_s, &zero, tol, max_iter)?;
    let resweep_s = engine_s.sweep(&tau_s)?;
    let residual_s =
        exec::max_value(tau_s.values.len(), |i| (resweep_s.values[i] - tau_s.values[i]).abs());

    let mut ratios = ratios_u;
    ratios.extend(ratios_s);
    let max_ratio = ratios.iter().copied().fold(0.0f64, f64::max);
    let k_hat = pairs.map(|p| p.scalar_rho_modulus(&tau_u.values));

    Ok(InvariantSplittingResult {
        section_u: SplittingSection { field: tau_u, radius },
        section_s: SplittingSection { field: tau_s, radius },
        iterations: iter_u.max(iter_s),
        ratios,
        max_ratio,
        residual: residual_u.max(residual_s),
        k_hat,
    })
}

/// Measured section modulus: max over sampled pairs of
/// |tau(x) - tau(y)| / rho_f(x,y).
pub fn modulus_constant(section: &SplittingSection, pairs: &PairSet) -> f64 {
    pairs.scalar_rho_modulus(&section.field.values)
}

/// Invariance defect of the solved unstable bundle: at each node z, push the
/// graph vector e_u + tau(x) e_s from the preimage x = f^{-1}(z) through the
/// raw Jacobian and compare the slope of the image with the stored node
/// value tau(z). This multiplies the Jacobian directly instead of going
/// through precomputed blocks, and anchors the comparison at a node so the
/// Hoelder roughness of tau is not re-interpolated.
pub fn invariance_defect(
    m: &ModelMap,
    reference: &ReferenceSplitting,
    section: &SplittingSection,
) -> f64 {
    let grid = section.field.grid;
    exec::max_value(grid.node_count(), |i| {
        let z = grid.point(i);
        let x = m.inverse(&z).expect("validated diffeomorphism");
        let tau_x = section.field.interpolate(&x);
        let v = [
            reference.e_u[0] + tau_x * reference.e_s[0],
            reference.e_u[1] + tau_x * reference.e_s[1],
        ];
        let w = m.jacobian(&x).mul_vec(v);
        let c = reference.coefficients(w);
        if c[0].abs() < 1e-12 {
            return f64::INFINITY;
        }
        (c[1] / c[0] - section.field.values[i]).abs()
    })
}

/// Minimal chart angle between the solved unstable and stable directions.
pub fn splitting_angle(reference: &ReferenceSplitting, result: &InvariantSplittingResult) -> f64 {
    let grid = result.section_u.field.grid;
    let angles = exec::map_collect(grid.node_count(), |i| {
        let tu = result.section_u.field.values[i];
        let ts = result.section_s.field.values[i];
        let u = [
            reference.e_u[0] + tu * reference.e_s[0],
            reference.e_u[1] + tu * reference.e_s[1],
        ];
        let s = [
            reference.e_s[0] + ts * reference.e_u[0],
            reference.e_s[1] + ts * reference.e_u[1],
        ];
        let dot = u[0] * s[0] + u[1] * s[1];
        let nu = (u[0] * u[0] + u[1] * u[1]).sqrt();
        let ns = (s[0] * s[0] + s[1] * s[1]).sqrt();
        let a = (dot / (nu * ns)).clamp(-1.0, 1.0).acos();
        a.min(std::f64::consts::PI - a)
    });
    angles.into_iter().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ManifoldKind;
    use crate::norms::{DfWindow, DEFAULT_PAIR_SEED};
    use crate::systems::{TrigSeries, TrigTerm};
    use approx::assert_relative_eq;

    fn cat() -> ModelMap {
        ModelMap::cat_map_eigenframe()
    }

    fn perturbed(eps: f64) -> ModelMap {
        let series = TrigSeries::new(vec![
            TrigTerm { axis: 0, wave: [0, 1], sin_coeff: 1.0, cos_coeff: 0.0 },
            TrigTerm { axis: 1, wave: [1, 0], sin_coeff: 0.0, cos_coeff: 1.0 },
        ]);
        ModelMap::perturbed_toral([[2, 1], [1, 1]], series, eps, cat().frame).unwrap()
    }

    fn grid(res: usize) -> Grid {
        Grid::new(ManifoldKind::Torus2, res).unwrap()
    }

    #[test]
    fn cat_blocks_are_diagonal() {
        let m = cat();
        let r = ReferenceSplitting::from_linear_part(&m).unwrap();
        let b = block_decompose(&m, &r, &Point::torus(0.3, 0.7));
        let sqrt5 = 5f64.sqrt();
        assert_relative_eq!(b.f_uu, (3.0 + sqrt5) / 2.0, epsilon = 1e-12);
        assert_relative_eq!(b.f_ss, (3.0 - sqrt5) / 2.0, epsilon = 1e-12);
        assert!(b.f_su.abs() < 1e-13 && b.f_us.abs() < 1e-13);
    }

    #[test]
    fn blocks_reassemble_jacobian() {
        let m = perturbed(0.01);
        let r = ReferenceSplitting::from_linear_part(&m).unwrap();
        for &(x, y) in &[(0.1, 0.9), (0.37, 0.21), (0.5, 0.5)] {
            let p = Point::torus(x, y);
            let b = block_decompose(&m, &r, &p);
            let j = m.jacobian(&p);
            // reassemble: J e_u = f_uu e_u + f_us e_s and likewise for e_s
            for (src, cu, cs) in [(r.e_u, b.f_uu, b.f_us), (r.e_s, b.f_su, b.f_ss)] {
                let img = j.mul_vec(src);
                let rec = [
                    cu * r.e_u[0] + cs * r.e_s[0],
                    cu * r.e_u[1] + cs * r.e_s[1],
                ];
                assert!(
                    (img[0] - rec[0]).abs() < 1e-12 && (img[1] - rec[1]).abs() < 1e-12,
                    "block reassembly defect at ({x},{y})"
                );
            }
        }
    }

    #[test]
    fn perturbed_off_diagonal_scales_with_amplitude() {
        let g = grid(64);
        let mut sups = Vec::new();
        for eps in [0.005, 0.01, 0.02] {
            let m = perturbed(eps);
            let r = ReferenceSplitting::from_linear_part(&m).unwrap();
            let sup = exec::max_value(g.node_count(), |i| {
                let b = block_decompose(&m, &r, &g.point(i));
                b.f_su.abs().max(b.f_us.abs())
            });
            assert!(sup > 0.0 && sup < 20.0 * eps, "off-diagonal {sup} not O(eps)");
            sups.push(sup);
        }
        assert!(sups[0] < sups[1] && sups[1] < sups[2]);
    }

    #[test]
    fn shipped_blocks_satisfy_lambda2_bounds() {
        let m = perturbed(0.01);
        let h = m.hyperbolicity_constants().unwrap().with_alpha(0.5).unwrap();
        let r = ReferenceSplitting::from_linear_part(&m).unwrap();
        let g = grid(128);
        let c = GraphTransformConstants::auto(&m, &r, &h, g, 1).unwrap();
        for i in 0..g.node_count() {
            let b = block_decompose(&m, &r, &g.point(i));
            assert!(1.0 / b.f_uu.abs() <= c.lambda2 + 1e-12);
            assert!(b.f_ss.abs() + b.f_us.abs() <= c.lambda2 + 1e-12);
            assert!(b.f_su.abs() <= c.eps_graph + 1e-12);
        }
    }

    #[test]
    fn auto_constants_are_ordered_and_valid() {
        let m = cat();
        let h = m.hyperbolicity_constants().unwrap().with_alpha(0.5).unwrap();
        let r = ReferenceSplitting::from_linear_part(&m).unwrap();
        let c = GraphTransformConstants::auto(&m, &r, &h, grid(64), 1).unwrap();
        c.validate(&h).unwrap();
        assert!(c.lambda3 * c.lambda3 * h.l.powf(h.alpha) <= 0.98 + 1e-12);
        assert!(c.k_modulus.is_finite() && c.k_modulus >= 0.0);
    }

    #[test]
    fn zero_section_is_fixed_for_cat_map() {
        let m = cat();
        let r = ReferenceSplitting::from_linear_part(&m).unwrap();
        let tau = SplittingSection::zero(grid(64), 1.0);
        let out = graph_transform(&m, &r, &tau).unwrap();
        assert!(out.sup() <= 1e-14, "cat zero section moved by {}", out.sup());
    }

    #[test]
    fn sweep_respects_norm_bound() {
        let m = perturbed(0.01);
        let h = m.hyperbolicity_constants().unwrap().with_alpha(0.5).unwrap();
        let r = ReferenceSplitting::from_linear_part(&m).unwrap();
        let g = grid(64);
        let c = GraphTransformConstants::auto(&m, &r, &h, g, 2).unwrap();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let values: Vec<f64> = (0..g.node_count()).map(|_| rng.gen_range(-c.r..c.r)).collect();
        let tau = SplittingSection::from_values(g, values, c.r).unwrap();
        let out = graph_transform(&m, &r, &tau).unwrap();
        let bound = c.lambda3 * c.lambda2 * c.r;
        assert!(bound <= c.r);
        for v in &out.field.values {
            assert!(v.abs() <= bound + 1e-12, "node value {v} above lambda3 lambda2 r");
        }
    }

    #[test]
    fn fiber_contraction_below_lambda3_squared() {
        let m = perturbed(0.01);
        let h = m.hyperbolicity_constants().unwrap().with_alpha(0.5).unwrap();
        let r = ReferenceSplitting::from_linear_part(&m).unwrap();
        let g = grid(128);
        let c = GraphTransformConstants::auto(&m, &r, &h, g, 4).unwrap();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let x = g.point(rng.gen_range(0..g.node_count()));
            let b = block_decompose(&m, &r, &x);
            let g1 = rng.gen_range(-c.r..c.r);
            let g2 = rng.gen_range(-c.r..c.r);
            if (g1 - g2).abs() < 1e-9 {
                continue;
            }
            let d = (fiber_transform(&b, g1).unwrap() - fiber_transform(&b, g2).unwrap()).abs();
            worst = worst.max(d / (g1 - g2).abs());
        }
        assert!(
            worst <= c.contraction_rate() + 0.02,
            "fiber ratio {worst} above lambda3^2 + 0.02 = {}",
            c.contraction_rate() + 0.02
        );
    }

    #[test]
    fn cat_fixed_point_in_one_sweep() {
        let m = cat();
        let r = ReferenceSplitting::from_linear_part(&m).unwrap();
        let tau0 = SplittingSection::zero(grid(64), 1.0);
        let out = solve_invariant_section(&m, &r, &tau0, 1e-12, 50, None).unwrap();
        assert_eq!(out.iterations, 1);
        assert!(out.section_u.sup() <= 1e-14);
        assert!(out.section_s.sup() <= 1e-14);
        assert!(out.residual <= 1e-14);
    }

    #[test]
    fn perturbed_fixed_point_properties() {
        let m = perturbed(0.01);
        let h = m.hyperbolicity_constants().unwrap().with_alpha(0.5).unwrap();
        let r = ReferenceSplitting::from_linear_part(&m).unwrap();
        let g = grid(128);
        let c = GraphTransformConstants::auto(&m, &r, &h, g, 6).unwrap();
        let tol = 1e-10;
        let pairs =
            PairSet::build(&m, g, h.alpha, DfWindow::new(12), 2000, DEFAULT_PAIR_SEED).unwrap();
        let tau0 = SplittingSection::zero(g, c.r);
        let out = solve_invariant_section(&m, &r, &tau0, tol, 200, Some(&pairs)).unwrap();
        // geometric-series bound on the iteration count from the contraction rate
        let bound = (tol.ln() / c.contraction_rate().ln()).ceil() as usize + 2;
        assert!(out.iterations <= bound, "{} sweeps > bound {bound}", out.iterations);
        assert!(out.max_ratio <= c.contraction_rate() + 0.02);
        assert!(out.residual <= tol * (1.0 + c.contraction_rate()) / (1.0 - c.contraction_rate()));
        // forward-push invariance defect, independent of the sweep direction
        let defect = invariance_defect(&m, &r, &out.section_u);
        assert!(defect <= 10.0 * tol, "invariance defect {defect:.3e}");
        // measured modulus below the a-priori bound
        let k_hat = out.k_hat.unwrap();
        assert!(k_hat > 0.0 && k_hat <= c.k_modulus, "K^ = {k_hat} vs K = {}", c.k_modulus);
        // angle of the solved splitting stays above half the reference angle
        assert!(splitting_angle(&r, &out) >= 0.5 * r.angle());
    }

    #[test]
    fn modulus_stable_under_refinement() {
        let m = perturbed(0.01);
        let h = m.hyperbolicity_constants().unwrap().with_alpha(0.5).unwrap();
        let r = ReferenceSplitting::from_linear_part(&m).unwrap();
        let mut k_hats = Vec::new();
        for res in [128usize, 256] {
            let g = grid(res);
            let pairs =
                PairSet::build(&m, g, h.alpha, DfWindow::new(12), 2000, DEFAULT_PAIR_SEED).unwrap();
            let tau0 = SplittingSection::zero(g, 1.0);
            let out = solve_invariant_section(&m, &r, &tau0, 1e-10, 200, Some(&pairs)).unwrap();
            k_hats.push(out.k_hat.unwrap());
        }
        let rel = (k_hats[1] - k_hats[0]).abs() / k_hats[0];
        assert!(rel <= 0.10, "K^ moved by {:.1}% under refinement: {k_hats:?}", rel * 100.0);
    }

    #[test]
    fn constant_section_has_zero_modulus() {
        let m = cat();
        let g = grid(64);
        let pairs = PairSet::build(&m, g, 0.5, DfWindow::new(8), 2000, DEFAULT_PAIR_SEED).unwrap();
        let sec = SplittingSection::from_values(g, vec![0.25; g.node_count()], 1.0).unwrap();
        assert_eq!(modulus_constant(&sec, &pairs), 0.0);
    }
}
