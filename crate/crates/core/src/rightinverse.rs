//! The push-forward operator on vector fields and the truncated series right
//! inverse of (1 - push_forward).
//!
//! Per basic-set component the input is cut down by a partition of unity,
//! projected onto the stable/unstable directions, and summed along exact
//! map orbits: the stable part forward, the unstable part backward. Each
//! series term evaluates the map n times exactly and interpolates the
//! projected input once, so the interpolation error stays O(res^-3) instead
//! of compounding per sweep. Because a component term lives on an invariant
//! direction, the n-step Jacobian action reduces to a scalar product of
//! per-step multipliers; the expanding complementary direction is never
//! materialized and cannot amplify roundoff.

use crate::error::{Error, Result};
use crate::exec;
use crate::field::{DiscreteVectorField, ScalarField};
use crate::geometry::{dist, min_lift, Grid, ManifoldKind, Point, TangentVector};
use crate::linalg::Mat2;
use crate::norms::PairSet;
use crate::splitting::{InvariantSplittingResult, ReferenceSplitting};
use crate::systems::{BasicSetData, ComponentSet, HyperbolicityConstants, ModelMap};

/// f_sharp: nodewise Jacobian at f^{-1}(x) applied to the interpolated field.
pub fn push_forward(m: &ModelMap, eta: &DiscreteVectorField) -> Result<DiscreteVectorField> {
    let grid = eta.grid;
    let kind = grid.kind;
    let values: Vec<TangentVector> = exec::map_collect(grid.node_count(), |i| {
        let y = m.inverse(&grid.point(i))?;
        let v = eta.interpolate(&y);
        Ok(TangentVector::new(kind, m.jacobian(&y).mul_vec(v.c)))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    Ok(DiscreteVectorField { grid, frame: eta.frame, values })
}

fn quintic_step(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

/// Nonnegative smooth weights summing to one at every node, one per
/// basic-set component.
#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    pub grid: Grid,
    pub weights: Vec<ScalarField>,
}

impl PartitionOfUnity {
    /// The trivial partition of a single component covering everything.
    pub fn single(grid: Grid) -> Self {
        PartitionOfUnity { grid, weights: vec![ScalarField::constant(grid, 1.0)] }
    }

    /// Two complementary smoothstep bumps on the circle, transitioning in
    /// bands of half-width `band` around the midpoints between the repeller
    /// and the attractor. The complement is taken exactly, so the weights
    /// sum to one by construction.
    pub fn circle_pair(grid: Grid, repeller: f64, attractor: f64, band: f64) -> Result<Self> {
        if grid.kind != ManifoldKind::Circle {
            return Err(Error::ConfigInvalid("circle partition on a non-circle grid".into()));
        }
        let arc1 = (attractor - repeller).rem_euclid(1.0);
        let arc2 = 1.0 - arc1;
        if !(band > 0.0 && band < 0.49 * arc1.min(arc2)) {
            return Err(Error::ConfigInvalid(format!(
                "partition band {band} too wide for arcs {arc1:.3}/{arc2:.3}"
            )));
        }
        let mid1 = (repeller + 0.5 * arc1).rem_euclid(1.0);
        let mid2 = (attractor + 0.5 * arc2).rem_euclid(1.0);
        let att_arc = (mid2 - mid1).rem_euclid(1.0);
        let attractor_weight = move |x: f64| -> f64 {
            let d1 = min_lift(x - mid1);
            if d1.abs() <= band {
                return quintic_step((d1 + band) / (2.0 * band));
            }
            let d2 = min_lift(x - mid2);
            if d2.abs() <= band {
                return quintic_step((band - d2) / (2.0 * band));
            }
            if (x - mid1).rem_euclid(1.0) < att_arc {
                1.0
            } else {
                0.0
            }
        };
        let att = ScalarField::from_fn(grid, |p| attractor_weight(p.c[0]));
        let rep = ScalarField {
            grid,
            values: att.values.iter().map(|v| 1.0 - v).collect(),
        };
        let out = PartitionOfUnity { grid, weights: vec![rep, att] };
        out.validate()?;
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        for i in 0..self.grid.node_count() {
            let mut sum = 0.0;
            for w in &self.weights {
                let v = w.values[i];
                if v < -1e-14 {
                    return Err(Error::ConfigInvalid(format!(
                        "partition weight {v:.3e} negative at node {i}"
                    )));
                }
                sum += v;
            }
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::ConfigInvalid(format!(
                    "partition weights sum to {sum} at node {i}"
                )));
            }
        }
        Ok(())
    }
}

/// A direction field on the grid, constant or per node.
#[derive(Debug, Clone)]
pub enum DirectionField {
    Constant([f64; 2]),
    PerNode(Vec<[f64; 2]>),
}

impl DirectionField {
    fn at_node(&self, i: usize) -> [f64; 2] {
        match self {
            DirectionField::Constant(v) => *v,
            DirectionField::PerNode(vs) => vs[i],
        }
    }

    fn at_point(&self, grid: &Grid, p: &Point) -> [f64; 2] {
        match self {
            DirectionField::Constant(v) => *v,
            DirectionField::PerNode(vs) => {
                // interpolate components, then renormalize
                let fx = ScalarField { grid: *grid, values: vs.iter().map(|v| v[0]).collect() };
                let fy = ScalarField { grid: *grid, values: vs.iter().map(|v| v[1]).collect() };
                let v = [fx.interpolate(p), fy.interpolate(p)];
                let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
                if n > 0.0 {
                    [v[0] / n, v[1] / n]
                } else {
                    v
                }
            }
        }
    }
}

/// Stable/unstable basis of one component's tangent fibers.
#[derive(Debug, Clone)]
pub enum ComponentBasis {
    /// Rank-one stable and unstable lines spanning the plane.
    Plane { e_u: DirectionField, e_s: DirectionField },
    /// 1-D tangent entirely unstable (a repelling component).
    LineUnstable,
    /// 1-D tangent entirely stable (an attracting component).
    LineStable,
}

impl ComponentBasis {
    /// (c_u, c_s) coefficients of a chart vector at a node.
    fn coefficients_at(&self, _grid: &Grid, i: usize, v: [f64; 2]) -> [f64; 2] {
        match self {
            ComponentBasis::Plane { e_u, e_s } => {
                let b = Mat2::from_columns(e_u.at_node(i), e_s.at_node(i));
                b.inverse(2).expect("component basis spans the plane").mul_vec(v)
            }
            ComponentBasis::LineUnstable => [v[0], 0.0],
            ComponentBasis::LineStable => [0.0, v[0]],
        }
        .map(|c| if c.abs() < f64::MIN_POSITIVE { 0.0 } else { c })
    }

    fn direction(&self, grid: &Grid, i: usize, stable: bool) -> [f64; 2] {
        let _ = grid;
        match self {
            ComponentBasis::Plane { e_u, e_s } => {
                if stable {
                    e_s.at_node(i)
                } else {
                    e_u.at_node(i)
                }
            }
            ComponentBasis::LineUnstable | ComponentBasis::LineStable => [1.0, 0.0],
        }
    }

    fn has_stable(&self) -> bool {
        !matches!(self, ComponentBasis::LineUnstable)
    }

    fn has_unstable(&self) -> bool {
        !matches!(self, ComponentBasis::LineStable)
    }
}

/// Per-component nodewise projection data.
#[derive(Debug, Clone)]
pub struct ComponentProjectors {
    pub components: Vec<ComponentBasis>,
}

impl ComponentProjectors {
    /// Single Anosov component with the constant reference splitting.
    pub fn anosov_constant(reference: &ReferenceSplitting) -> Self {
        ComponentProjectors {
            components: vec![ComponentBasis::Plane {
                e_u: DirectionField::Constant(reference.e_u),
                e_s: DirectionField::Constant(reference.e_s),
            }],
        }
    }

    /// Single component with per-node directions taken from a solved
    /// invariant splitting.
    pub fn from_splitting_result(
        reference: &ReferenceSplitting,
        result: &InvariantSplittingResult,
    ) -> Self {
        let n = result.section_u.field.values.len();
        let mut e_u = Vec::with_capacity(n);
        let mut e_s = Vec::with_capacity(n);
        for i in 0..n {
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
            let nu = (u[0] * u[0] + u[1] * u[1]).sqrt();
            let ns = (s[0] * s[0] + s[1] * s[1]).sqrt();
            e_u.push([u[0] / nu, u[1] / nu]);
            e_s.push([s[0] / ns, s[1] / ns]);
        }
        ComponentProjectors {
            components: vec![ComponentBasis::Plane {
                e_u: DirectionField::PerNode(e_u),
                e_s: DirectionField::PerNode(e_s),
            }],
        }
    }

    /// Rank patterns of a Morse-Smale circle decomposition.
    pub fn morse_smale(basic: &BasicSetData) -> Self {
        ComponentProjectors {
            components: basic
                .components
                .iter()
                .map(|c| {
                    if c.unstable_rank > 0 {
                        ComponentBasis::LineUnstable
                    } else {
                        ComponentBasis::LineStable
                    }
                })
                .collect(),
        }
    }

    /// Largest frame operator norm among the component projectors.
    pub fn max_projector_norm(&self, m: &ModelMap, grid: &Grid) -> f64 {
        let mut worst: f64 = 0.0;
        for comp in &self.components {
            match comp {
                ComponentBasis::Plane { e_u, e_s } => {
                    let norms = exec::map_collect(grid.node_count(), |i| {
                        let b = Mat2::from_columns(e_u.at_node(i), e_s.at_node(i));
                        let binv = b.inverse(2).expect("component basis spans the plane");
                        let mut m_s = Mat2::zero();
                        let mut m_u = Mat2::zero();
                        // P_s = b diag(0,1) b^{-1}, P_u = b diag(1,0) b^{-1}
                        for r in 0..2 {
                            for c in 0..2 {
                                m_s.a[r][c] = b.a[r][1] * binv.a[1][c];
                                m_u.a[r][c] = b.a[r][0] * binv.a[0][c];
                            }
                        }
                        m.frame.op_norm(&m_s).max(m.frame.op_norm(&m_u))
                    });
                    worst = worst.max(norms.into_iter().fold(0.0f64, f64::max));
                }
                ComponentBasis::LineUnstable | ComponentBasis::LineStable => {
                    worst = worst.max(1.0);
                }
            }
        }
        worst
    }

    /// Projector Hoelder constant max_j L_alpha(P_j) over a pair sample
    /// (zero for constant projectors).
    pub fn holder_constant(&self, pairs: &PairSet) -> f64 {
        let mut worst: f64 = 0.0;
        for comp in &self.components {
            if let ComponentBasis::Plane {
                e_u: DirectionField::PerNode(eu),
                e_s: DirectionField::PerNode(es),
            } = comp
            {
                for k in 0..pairs.pairs.len() {
                    let (a, b) = pairs.pairs[k];
                    if pairs.d_alpha[k] == 0.0 {
                        continue;
                    }
                    let du = ((eu[a as usize][0] - eu[b as usize][0]).powi(2)
                        + (eu[a as usize][1] - eu[b as usize][1]).powi(2))
                    .sqrt();
                    let ds = ((es[a as usize][0] - es[b as usize][0]).powi(2)
                        + (es[a as usize][1] - es[b as usize][1]).powi(2))
                    .sqrt();
                    worst = worst.max(du.max(ds) / pairs.d_alpha[k]);
                }
            }
        }
        worst
    }
}

/// Truncation length, decay rate, prefactor and the implied geometric tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesBudget {
    pub n_trunc: usize,
    pub rho: f64,
    pub k_decay: f64,
    pub tail_bound: f64,
}

impl SeriesBudget {
    pub fn new(n_trunc: usize, rho: f64, k_decay: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::ConfigInvalid(format!("rho = {rho} outside (0,1)")));
        }
        let tail_bound = k_decay * rho.powi(n_trunc as i32 + 1) / (1.0 - rho);
        Ok(SeriesBudget { n_trunc, rho, k_decay, tail_bound })
    }

    /// rho at the geometric midpoint of its admissible interval
    /// [kappa 1.02 lambda, 0.98 l^-alpha]; K from the orbit-escape count:
    /// one for a single Anosov component, (|Tf|/rho)^{(4k+1)N} otherwise.
    pub fn auto(
        m: &ModelMap,
        h: &HyperbolicityConstants,
        kappa: f64,
        basic: &BasicSetData,
        n_trunc: usize,
    ) -> Result<Self> {
        let rho_min = kappa * 1.02 * h.lambda;
        let rho_cap = 0.98 * h.l.powf(-h.alpha);
        if rho_min >= rho_cap {
            return Err(Error::ConfigInvalid(format!(
                "rho * l^alpha <= 0.98 infeasible: kappa*1.02*lambda = {rho_min:.4} >= 0.98 l^-alpha = {rho_cap:.4}"
            )));
        }
        let rho = (rho_min * rho_cap).sqrt();
        let k = basic.components.len();
        let k_decay = if k == 1 {
            1.0
        } else {
            let probe = Grid::new(m.manifold(), 256)?;
            let (tf, _) = m.lipschitz_bounds(&probe)?;
            let cover_n = cover_iterations(m, basic, &probe)?;
            let exponent = (4 * k * cover_n + cover_n) as i32;
            (tf / rho).powi(exponent)
        };
        SeriesBudget::new(n_trunc, rho, k_decay)
    }

    /// Smallest truncation with tail below the requested tolerance.
    pub fn with_tail_below(self, tol: f64) -> Result<Self> {
        if tol <= 0.0 {
            return Err(Error::ConfigInvalid("series tolerance must be positive".into()));
        }
        let n = ((tol * (1.0 - self.rho) / self.k_decay).ln() / self.rho.ln()).ceil();
        let n = (n.max(1.0) as usize).max(1);
        SeriesBudget::new(n, self.rho, self.k_decay)
    }
}

/// Smallest N such that iterating each component neighborhood |n| <= N
/// covers the probe grid.
pub fn cover_iterations(m: &ModelMap, basic: &BasicSetData, grid: &Grid) -> Result<usize> {
    let frame = &m.frame;
    let centers: Vec<(Point, f64)> = basic
        .components
        .iter()
        .flat_map(|c| match &c.set {
            ComponentSet::WholeManifold => vec![],
            ComponentSet::Finite(pts) => pts.iter().map(|p| (*p, c.radius)).collect(),
        })
        .collect();
    if centers.is_empty() {
        return Ok(0);
    }
    let max_n = 64;
    let needed = exec::map_collect(grid.node_count(), |i| {
        let x = grid.point(i);
        let inside = |p: &Point| centers.iter().any(|(c, r)| dist(p, c, frame) <= *r);
        if inside(&x) {
            return Ok(0usize);
        }
        let (mut fwd, mut bwd) = (x, x);
        for n in 1..=max_n {
            fwd = m.evaluate(&fwd);
            if inside(&fwd) {
                return Ok(n);
            }
            bwd = m.inverse(&bwd)?;
            if inside(&bwd) {
                return Ok(n);
            }
        }
        Err(Error::ConfigInvalid(format!(
            "component neighborhoods do not cover the grid within {max_n} iterates (node {i})"
        )))
    });
    let mut worst = 0;
    for r in needed {
        worst = worst.max(r?);
    }
    Ok(worst)
}

/// Per-component stable/unstable parts of a field.
#[derive(Debug, Clone)]
pub struct ComponentFields {
    pub stable: DiscreteVectorField,
    pub unstable: DiscreteVectorField,
}

/// eta_{i,sigma} = P_{E^sigma_i}(theta_i eta) for every component.
pub fn decompose(
    eta: &DiscreteVectorField,
    projectors: &ComponentProjectors,
    partition: &PartitionOfUnity,
) -> Result<Vec<ComponentFields>> {
    if partition.len() != projectors.components.len() {
        return Err(Error::ConfigInvalid(
            "partition and projectors have different component counts".into(),
        ));
    }
    let grid = eta.grid;
    let mut out = Vec::new();
    for (basis, theta) in projectors.components.iter().zip(&partition.weights) {
        let fields = exec::map_collect(grid.node_count(), |i| {
            let w = eta.values[i].scale(theta.values[i]);
            let c = basis.coefficients_at(&grid, i, w.c);
            let du = basis.direction(&grid, i, false);
            let ds = basis.direction(&grid, i, true);
            (
                TangentVector::new(grid.kind, [c[1] * ds[0], c[1] * ds[1]]),
                TangentVector::new(grid.kind, [c[0] * du[0], c[0] * du[1]]),
            )
        });
        let mut stable = Vec::with_capacity(fields.len());
        let mut unstable = Vec::with_capacity(fields.len());
        for (s, u) in fields {
            stable.push(s);
            unstable.push(u);
        }
        out.push(ComponentFields {
            stable: DiscreteVectorField { grid, frame: eta.frame, values: stable },
            unstable: DiscreteVectorField { grid, frame: eta.frame, values: unstable },
        });
    }
    Ok(out)
}

/// Orbit walk over the grid: exact index permutation for grid-aligned maps,
/// explicit points otherwise.
enum Walk {
    Perm { perm: Vec<u32>, current: Vec<u32> },
    Points { backward: bool, current: Vec<Point> },
}

impl Walk {
    fn new(m: &ModelMap, grid: &Grid, backward: bool) -> Self {
        if let Some((fwd, bwd)) = m.node_permutation(grid) {
            let perm = if backward { bwd } else { fwd };
            let current = (0..grid.node_count() as u32).collect();
            Walk::Perm { perm, current }
        } else {
            let current = (0..grid.node_count()).map(|i| grid.point(i)).collect();
            Walk::Points { backward, current }
        }
    }

    fn from_points(points: Vec<Point>, backward: bool) -> Self {
        Walk::Points { backward, current: points }
    }

    fn len(&self) -> usize {
        match self {
            Walk::Perm { current, .. } => current.len(),
            Walk::Points { current, .. } => current.len(),
        }
    }

    fn advance(&mut self, m: &ModelMap) -> Result<()> {
        match self {
            Walk::Perm { perm, current } => {
                for c in current.iter_mut() {
                    *c = perm[*c as usize];
                }
                Ok(())
            }
            Walk::Points { backward, current } => {
                let next: Vec<Point> = if *backward {
                    exec::map_collect(current.len(), |i| m.inverse(&current[i]))
                        .into_iter()
                        .collect::<Result<_>>()?
                } else {
                    Ok::<_, Error>(exec::map_collect(current.len(), |i| m.evaluate(&current[i])))?
                };
                *current = next;
                Ok(())
            }
        }
    }

    fn read(&self, field: &ScalarField, i: usize, grid: &Grid) -> f64 {
        match self {
            Walk::Perm { current, .. } => field.values[current[i] as usize],
            Walk::Points { current, .. } => {
                let _ = grid;
                field.interpolate(&current[i])
            }
        }
    }

    fn position(&self, i: usize, grid: &Grid) -> Point {
        match self {
            Walk::Perm { current, .. } => grid.point(current[i] as usize),
            Walk::Points { current, .. } => current[i],
        }
    }
}

/// The truncated series right inverse of (1 - f_sharp) for one map, one
/// grid, one partition/projector configuration and one budget.
pub struct SeriesRightInverse {
    pub m: ModelMap,
    pub grid: Grid,
    pub budget: SeriesBudget,
    pub projectors: ComponentProjectors,
    pub partition: PartitionOfUnity,
    /// Largest n used by the decay precheck.
    decay_probe: usize,
}

/// Norms of the first few series terms, recorded by the decay precheck.
#[derive(Debug, Clone, Default)]
pub struct DecayTrace {
    pub stable: Vec<Vec<f64>>,
    pub unstable: Vec<Vec<f64>>,
}

impl SeriesRightInverse {
    pub fn new(
        m: ModelMap,
        grid: Grid,
        budget: SeriesBudget,
        projectors: ComponentProjectors,
        partition: PartitionOfUnity,
    ) -> Result<Self> {
        partition.validate()?;
        if partition.len() != projectors.components.len() {
            return Err(Error::ConfigInvalid(
                "partition and projectors have different component counts".into(),
            ));
        }
        Ok(SeriesRightInverse { m, grid, budget, projectors, partition, decay_probe: 12 })
    }

    pub fn apply(&self, eta: &DiscreteVectorField) -> Result<DiscreteVectorField> {
        Ok(self.apply_batch(std::slice::from_ref(eta))?.pop().expect("batch of one"))
    }

    /// Apply J to several fields sharing one orbit walk. The series is
    /// accumulated in ascending n with a fixed component order, so results
    /// are reproducible bit for bit.
    pub fn apply_batch(&self, etas: &[DiscreteVectorField]) -> Result<Vec<DiscreteVectorField>> {
        let (out, _) = self.apply_batch_traced(etas)?;
        Ok(out)
    }

    pub fn apply_batch_traced(
        &self,
        etas: &[DiscreteVectorField],
    ) -> Result<(Vec<DiscreteVectorField>, DecayTrace)> {
        let grid = self.grid;
        let n_nodes = grid.node_count();
        for eta in etas {
            if eta.grid != grid {
                return Err(Error::ConfigInvalid("field grid does not match engine".into()));
            }
        }
        let frame = etas.first().map(|e| e.frame).unwrap_or(self.m.frame);
        let n_batch = etas.len();
        let k = self.projectors.components.len();

        let (coeff_s, coeff_u) = self.component_coefficients(etas);

        let mut sums_s = vec![vec![vec![0.0f64; n_nodes]; n_batch]; k];
        let mut sums_u = vec![vec![vec![0.0f64; n_nodes]; n_batch]; k];
        let mut trace = DecayTrace {
            stable: vec![Vec::new(); k],
            unstable: vec![Vec::new(); k],
        };

        for (ci, basis) in self.projectors.components.iter().enumerate() {
            if basis.has_stable() {
                let walk = Walk::new(&self.m, &grid, true);
                let norms = self.sum_side(basis, &coeff_s[ci], &mut sums_s[ci], true, walk)?;
                self.check_decay(ci, "stable", &norms)?;
                trace.stable[ci] = norms;
            }
            if basis.has_unstable() {
                let walk = Walk::new(&self.m, &grid, false);
                let norms = self.sum_side(basis, &coeff_u[ci], &mut sums_u[ci], false, walk)?;
                self.check_decay(ci, "unstable", &norms)?;
                trace.unstable[ci] = norms;
            }
        }

        // materialize: J eta = sum_i [ S_i e_s(x) - U_i e_u(x) ]
        let mut out = Vec::with_capacity(n_batch);
        for b in 0..n_batch {
            let values = exec::map_collect(n_nodes, |i| {
                let mut acc = [0.0f64, 0.0];
                for (ci, basis) in self.projectors.components.iter().enumerate() {
                    if basis.has_stable() {
                        let ds = basis.direction(&grid, i, true);
                        let c = sums_s[ci][b][i];
                        acc[0] += c * ds[0];
                        acc[1] += c * ds[1];
                    }
                    if basis.has_unstable() {
                        let du = basis.direction(&grid, i, false);
                        let c = sums_u[ci][b][i];
                        acc[0] -= c * du[0];
                        acc[1] -= c * du[1];
                    }
                }
                TangentVector::new(grid.kind, acc)
            });
            out.push(DiscreteVectorField { grid, frame, values });
        }
        Ok((out, trace))
    }

    /// Coefficient fields c_u, c_s per (component, input).
    fn component_coefficients(
        &self,
        etas: &[DiscreteVectorField],
    ) -> (Vec<Vec<ScalarField>>, Vec<Vec<ScalarField>>) {
        let grid = self.grid;
        let n_nodes = grid.node_count();
        let mut coeff_s = Vec::with_capacity(self.projectors.components.len());
        let mut coeff_u = Vec::with_capacity(self.projectors.components.len());
        for (ci, basis) in self.projectors.components.iter().enumerate() {
            let theta = &self.partition.weights[ci];
            let mut per_input_s = Vec::with_capacity(etas.len());
            let mut per_input_u = Vec::with_capacity(etas.len());
            for eta in etas {
                let coeffs = exec::map_collect(n_nodes, |i| {
                    let w = eta.values[i].scale(theta.values[i]);
                    basis.coefficients_at(&grid, i, w.c)
                });
                per_input_u.push(ScalarField {
                    grid,
                    values: coeffs.iter().map(|c| c[0]).collect(),
                });
                per_input_s.push(ScalarField {
                    grid,
                    values: coeffs.iter().map(|c| c[1]).collect(),
                });
            }
            coeff_s.push(per_input_s);
            coeff_u.push(per_input_u);
        }
        (coeff_s, coeff_u)
    }

    /// Accumulate one side of the series for one component over the given
    /// walk. Returns the per-n sup norms of the terms (max over the batch).
    ///
    /// Stable side: term_n(q) = prod_{j=1..n} a_ss(f^{-j}q) * c(f^{-n}q),
    /// added for n = 0..=N. Unstable side: term_n(q) =
    /// prod_{j=0..n-1} a_uu(f^j q)^{-1} * c(f^n q), added for n = 1..=N.
    fn sum_side(
        &self,
        basis: &ComponentBasis,
        coeffs: &[ScalarField],
        sums: &mut [Vec<f64>],
        stable: bool,
        mut walk: Walk,
    ) -> Result<Vec<f64>> {
        let grid = self.grid;
        let n_eval = walk.len();
        let m = &self.m;
        let mut mult = vec![1.0f64; n_eval];
        let mut norms = Vec::with_capacity(self.budget.n_trunc + 1);

        // n = 0 term (stable side only)
        if stable {
            let mut sup: f64 = 0.0;
            for (b, c) in coeffs.iter().enumerate() {
                let reads = exec::map_collect(n_eval, |i| walk.read(c, i, &grid));
                for i in 0..n_eval {
                    sums[b][i] += reads[i];
                    sup = sup.max(reads[i].abs());
                }
            }
            norms.push(sup);
        }

        for _n in 1..=self.budget.n_trunc {
            // step multipliers: evaluated at the new position for the
            // backward walk, at the old one for the forward walk
            let step: Vec<f64> = if stable {
                let prev: Vec<Point> = exec::map_collect(n_eval, |i| walk.position(i, &grid));
                walk.advance(m)?;
                exec::map_collect(n_eval, |i| {
                    let y = walk.position(i, &grid);
                    match basis {
                        ComponentBasis::LineStable | ComponentBasis::LineUnstable => {
                            m.jacobian(&y).a[0][0]
                        }
                        ComponentBasis::Plane { e_s, .. } => {
                            let es_y = e_s.at_point(&grid, &y);
                            let img = m.jacobian(&y).mul_vec(es_y);
                            component_coefficient(basis, &grid, &prev[i], img, true)
                        }
                    }
                })
            } else {
                let old: Vec<Point> = exec::map_collect(n_eval, |i| walk.position(i, &grid));
                walk.advance(m)?;
                exec::map_collect(n_eval, |i| {
                    let z_new = walk.position(i, &grid);
                    match basis {
                        ComponentBasis::LineStable | ComponentBasis::LineUnstable => {
                            m.jacobian(&old[i]).a[0][0]
                        }
                        ComponentBasis::Plane { e_u, .. } => {
                            let eu_old = e_u.at_point(&grid, &old[i]);
                            let img = m.jacobian(&old[i]).mul_vec(eu_old);
                            component_coefficient(basis, &grid, &z_new, img, false)
                        }
                    }
                })
            };
            let mut sup: f64 = 0.0;
            for i in 0..n_eval {
                mult[i] *= if stable { step[i] } else { 1.0 / step[i] };
            }
            for (b, c) in coeffs.iter().enumerate() {
                let terms = exec::map_collect(n_eval, |i| mult[i] * walk.read(c, i, &grid));
                for i in 0..n_eval {
                    sums[b][i] += terms[i];
                    sup = sup.max(terms[i].abs());
                }
            }
            norms.push(sup);
        }
        Ok(norms)
    }

    /// Evaluate J eta at arbitrary points by walking the series from those
    /// points. Each term still interpolates the projected input exactly
    /// once, so off-grid evaluation carries the same O(res^-3) error as the
    /// node sums; the materialized node samples of J eta, which are only
    /// Hoelder-regular near fixed points, are never re-interpolated.
    pub fn eval_at_points(
        &self,
        etas: &[DiscreteVectorField],
        points: &[Point],
    ) -> Result<Vec<Vec<TangentVector>>> {
        let grid = self.grid;
        let n_eval = points.len();
        let n_batch = etas.len();
        let k = self.projectors.components.len();
        let (coeff_s, coeff_u) = self.component_coefficients(etas);
        let mut sums_s = vec![vec![vec![0.0f64; n_eval]; n_batch]; k];
        let mut sums_u = vec![vec![vec![0.0f64; n_eval]; n_batch]; k];
        for (ci, basis) in self.projectors.components.iter().enumerate() {
            if basis.has_stable() {
                let walk = Walk::from_points(points.to_vec(), true);
                self.sum_side(basis, &coeff_s[ci], &mut sums_s[ci], true, walk)?;
            }
            if basis.has_unstable() {
                let walk = Walk::from_points(points.to_vec(), false);
                self.sum_side(basis, &coeff_u[ci], &mut sums_u[ci], false, walk)?;
            }
        }
        let mut out = Vec::with_capacity(n_batch);
        for b in 0..n_batch {
            let values = exec::map_collect(n_eval, |j| {
                let mut acc = [0.0f64, 0.0];
                for (ci, basis) in self.projectors.components.iter().enumerate() {
                    if basis.has_stable() {
                        let ds = match basis {
                            ComponentBasis::Plane { e_s, .. } => e_s.at_point(&grid, &points[j]),
                            _ => [1.0, 0.0],
                        };
                        let c = sums_s[ci][b][j];
                        acc[0] += c * ds[0];
                        acc[1] += c * ds[1];
                    }
                    if basis.has_unstable() {
                        let du = match basis {
                            ComponentBasis::Plane { e_u, .. } => e_u.at_point(&grid, &points[j]),
                            _ => [1.0, 0.0],
                        };
                        let c = sums_u[ci][b][j];
                        acc[0] -= c * du[0];
                        acc[1] -= c * du[1];
                    }
                }
                TangentVector::new(grid.kind, acc)
            });
            out.push(values);
        }
        Ok(out)
    }

    /// Geometric-decay precheck over the first terms: a fitted per-step
    /// rate above rho * 1.05 signals a misconfigured splitting or cover.
    fn check_decay(&self, component: usize, side: &str, norms: &[f64]) -> Result<()> {
        let n_star = self.decay_probe.min(norms.len().saturating_sub(1));
        if n_star < 5 {
            return Ok(());
        }
        let n0 = n_star / 2;
        let (s0, s1) = (norms[n0], norms[n_star]);
        if s0 <= 1e-300 {
            return Ok(());
        }
        let rate = (s1 / s0).powf(1.0 / (n_star - n0) as f64);
        let allowed = self.budget.rho * 1.05;
        if rate > allowed {
            return Err(Error::SeriesNonDecay(format!(
                "component {component} {side} side: fitted rate {rate:.4} over n in [{n0},{n_star}] exceeds rho*1.05 = {allowed:.4}"
            )));
        }
        Ok(())
    }

    /// Residual reports of the right-inverse identity |J eta - f_sharp(J
    /// eta) - eta| at the grid nodes.
    ///
    /// For grid-exact maps the push-forward term reads J eta at exact nodes
    /// (the generic interpolating push-forward, which degenerates to node
    /// reads); otherwise J eta at the off-grid preimages is evaluated
    /// through the series, keeping one input interpolation per term.
    pub fn verify_batch(&self, etas: &[DiscreteVectorField]) -> Result<Vec<RightInverseReport>> {
        let grid = self.grid;
        let n_nodes = grid.node_count();
        let j_etas = self.apply_batch(etas)?;
        let preimages: Vec<Point> = exec::map_collect(n_nodes, |i| self.m.inverse(&grid.point(i)))
            .into_iter()
            .collect::<Result<_>>()?;
        let j_at_pre: Vec<Vec<TangentVector>> = if self.m.node_permutation(&grid).is_some() {
            j_etas
                .iter()
                .map(|f| preimages.iter().map(|p| f.interpolate(p)).collect())
                .collect()
        } else {
            self.eval_at_points(etas, &preimages)?
        };
        let jacobians: Vec<Mat2> =
            exec::map_collect(n_nodes, |i| self.m.jacobian(&preimages[i]));
        let mut out = Vec::with_capacity(etas.len());
        for (b, eta) in etas.iter().enumerate() {
            let frame = eta.frame;
            let residual_c0 = exec::max_value(n_nodes, |i| {
                let pushed = jacobians[i].mul_vec(j_at_pre[b][i].c);
                let r = TangentVector::new(
                    grid.kind,
                    [
                        j_etas[b].values[i].c[0] - pushed[0] - eta.values[i].c[0],
                        j_etas[b].values[i].c[1] - pushed[1] - eta.values[i].c[1],
                    ],
                );
                frame.vec_norm(&r)
            });
            let eta_c0 = eta.c0_norm();
            let denom = self.budget.tail_bound * eta_c0;
            out.push(RightInverseReport {
                residual_c0,
                eta_c0,
                tail_bound: self.budget.tail_bound,
                ratio_to_tail: if denom > 0.0 { residual_c0 / denom } else { 0.0 },
            });
        }
        Ok(out)
    }

    pub fn verify(&self, eta: &DiscreteVectorField) -> Result<RightInverseReport> {
        Ok(self
            .verify_batch(std::slice::from_ref(eta))?
            .pop()
            .expect("batch of one"))
    }
}

/// Coefficient of a chart vector along one side of a component basis at an
/// arbitrary point.
fn component_coefficient(
    basis: &ComponentBasis,
    grid: &Grid,
    at: &Point,
    v: [f64; 2],
    stable: bool,
) -> f64 {
    match basis {
        ComponentBasis::Plane { e_u, e_s } => {
            let b = Mat2::from_columns(e_u.at_point(grid, at), e_s.at_point(grid, at));
            let c = b.inverse(2).expect("component basis spans the plane").mul_vec(v);
            if stable {
                c[1]
            } else {
                c[0]
            }
        }
        ComponentBasis::LineStable | ComponentBasis::LineUnstable => v[0],
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RightInverseReport {
    pub residual_c0: f64,
    pub eta_c0: f64,
    pub tail_bound: f64,
    pub ratio_to_tail: f64,
}

impl RightInverseReport {
    pub fn csv_header() -> &'static str {
        "field,eta_c0,residual_c0,tail_bound,ratio_to_tail"
    }
}

/// One-shot wrapper: J eta for explicit configuration pieces.
pub fn apply_j(
    m: &ModelMap,
    eta: &DiscreteVectorField,
    projectors: &ComponentProjectors,
    partition: &PartitionOfUnity,
    budget: SeriesBudget,
) -> Result<DiscreteVectorField> {
    SeriesRightInverse::new(m.clone(), eta.grid, budget, projectors.clone(), partition.clone())?
        .apply(eta)
}

/// C0 norms of f_sharp^n zeta for n = 0..=n_max, computed by repeated
/// generic push-forward (independent of the series fast path).
pub fn measure_decay(
    m: &ModelMap,
    zeta: &DiscreteVectorField,
    n_max: usize,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut cur = zeta.clone();
    out.push(cur.c0_norm());
    for _ in 1..=n_max {
        cur = push_forward(m, &cur)?;
        out.push(cur.c0_norm());
    }
    Ok(out)
}

/// Geometric rate fitted between two indices of a norm sequence.
pub fn fitted_rate(norms: &[f64], from: usize, to: usize) -> f64 {
    if to <= from || norms[from] <= 0.0 {
        return f64::NAN;
    }
    (norms[to] / norms[from]).powf(1.0 / (to - from) as f64)
}

/// Sampled Hoelder constants of f_sharp^n zeta for n = 0..=n_max together
/// with the decay-law bound K (rho l^a)^n L_a(zeta) + C' ((rho l^a)^n -
/// rho^n) |zeta| evaluated with measured constants inflated by 1.1.
pub fn measure_holder_growth(
    m: &ModelMap,
    zeta: &DiscreteVectorField,
    n_max: usize,
    h: &HyperbolicityConstants,
    budget: &SeriesBudget,
    projectors: &ComponentProjectors,
    pairs: &PairSet,
) -> Result<Vec<(f64, f64)>> {
    let l_alpha = h.l.powf(h.alpha);
    let rho = budget.rho;
    let k = budget.k_decay;
    // C = |Tf| max_j L_alpha(P_j) + L_alpha(Tf), both sampled
    let probe = Grid::new(m.manifold(), 128)?;
    let (tf_sup, _) = m.lipschitz_bounds(&probe)?;
    let mut l_alpha_tf: f64 = 0.0;
    for idx in 0..pairs.pairs.len() {
        let (a, b) = pairs.pairs[idx];
        if pairs.d_alpha[idx] == 0.0 {
            continue;
        }
        let ja = m.jacobian(&pairs.grid.point(a as usize));
        let jb = m.jacobian(&pairs.grid.point(b as usize));
        let diff = ja.add(&jb.scale(-1.0));
        l_alpha_tf = l_alpha_tf.max(m.frame.op_norm(&diff) / pairs.d_alpha[idx]);
    }
    let c_const = tf_sup * projectors.holder_constant(pairs) + l_alpha_tf;
    let c_prime = if l_alpha > 1.0 {
        c_const * k * k * l_alpha / (rho * (l_alpha - 1.0))
    } else {
        0.0
    };

    let zeta_c0 = zeta.c0_norm();
    let zeta_holder = pairs.field_norms(zeta).holder;
    let mut cur = zeta.clone();
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            cur = push_forward(m, &cur)?;
        }
        let measured = pairs.field_norms(&cur).holder;
        let growth = (rho * l_alpha).powi(n as i32);
        let bound = 1.1 * (k * growth * zeta_holder + c_prime * (growth - rho.powi(n as i32)) * zeta_c0);
        out.push((measured, bound));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MetricFrame;
    use crate::norms::{DfWindow, DEFAULT_PAIR_SEED};
    use approx::assert_relative_eq;

    fn cat() -> ModelMap {
        ModelMap::cat_map_eigenframe()
    }

    fn cat_engine(grid: Grid, n_trunc: usize) -> SeriesRightInverse {
        let m = cat();
        let h = m.hyperbolicity_constants().unwrap().with_alpha(0.5).unwrap();
        let reference = ReferenceSplitting::from_linear_part(&m).unwrap();
        let projectors = ComponentProjectors::anosov_constant(&reference);
        let kappa = projectors.max_projector_norm(&m, &grid) * 1.01;
        let budget = SeriesBudget::auto(&m, &h, kappa, &m.basic_sets(), n_trunc).unwrap();
        let partition = PartitionOfUnity::single(grid);
        SeriesRightInverse::new(m, grid, budget, projectors, partition).unwrap()
    }

    fn ms_map() -> ModelMap {
        ModelMap::morse_smale_circle(0.05, MetricFrame::identity(ManifoldKind::Circle)).unwrap()
    }

    fn ms_engine(grid: Grid, n_trunc: usize) -> SeriesRightInverse {
        let m = ms_map();
        let h = m.hyperbolicity_constants().unwrap().with_alpha(0.5).unwrap();
        let basic = m.basic_sets();
        let projectors = ComponentProjectors::morse_smale(&basic);
        let kappa = projectors.max_projector_norm(&m, &grid) * 1.01;
        let budget = SeriesBudget::auto(&m, &h, kappa, &basic, n_trunc).unwrap();
        let rep = match &basic.components[0].set {
            ComponentSet::Finite(p) => p[0].c[0],
            _ => unreachable!(),
        };
        let att = match &basic.components[1].set {
            ComponentSet::Finite(p) => p[0].c[0],
            _ => unreachable!(),
        };
        let partition = PartitionOfUnity::circle_pair(grid, rep, att, 0.12).unwrap();
        SeriesRightInverse::new(m, grid, budget, projectors, partition).unwrap()
    }

    fn torus_grid(res: usize) -> Grid {
        Grid::new(ManifoldKind::Torus2, res).unwrap()
    }

    #[test]
    fn push_forward_basics() {
        let m = cat();
        let grid = torus_grid(64);
        let zero = DiscreteVectorField::zero(grid, m.frame);
        let out = push_forward(&m, &zero).unwrap();
        assert_eq!(out.c0_norm(), 0.0);

        // constant field goes to the constant A c
        let c = TangentVector::new(ManifoldKind::Torus2, [0.3, -0.1]);
        let field = DiscreteVectorField::from_fn(grid, m.frame, |_| c);
        let pushed = push_forward(&m, &field).unwrap();
        let expect = Mat2::from_int([[2, 1], [1, 1]]).mul_vec(c.c);
        for v in &pushed.values {
            assert_relative_eq!(v.c[0], expect[0], epsilon = 1e-13);
            assert_relative_eq!(v.c[1], expect[1], epsilon = 1e-13);
        }
    }

    #[test]
    fn push_forward_is_linear() {
        let m = cat();
        let grid = torus_grid(64);
        let a = DiscreteVectorField::random_trig(grid, m.frame, 21);
        let b = DiscreteVectorField::random_trig(grid, m.frame, 22);
        let lhs = push_forward(&m, &a.scale(2.5).add(&b.scale(-0.75)).unwrap()).unwrap();
        let rhs = push_forward(&m, &a)
            .unwrap()
            .scale(2.5)
            .add(&push_forward(&m, &b).unwrap().scale(-0.75))
            .unwrap();
        assert!(lhs.sub(&rhs).unwrap().c0_norm() <= 1e-12);
    }

    #[test]
    fn decompose_sums_back_to_field() {
        let engine = cat_engine(torus_grid(64), 10);
        let eta = DiscreteVectorField::random_trig(engine.grid, engine.m.frame, 31);
        let parts = decompose(&eta, &engine.projectors, &engine.partition).unwrap();
        assert_eq!(parts.len(), 1);
        let mut sum = DiscreteVectorField::zero(engine.grid, engine.m.frame);
        for p in &parts {
            sum = sum.add(&p.stable).unwrap().add(&p.unstable).unwrap();
        }
        assert!(sum.sub(&eta).unwrap().c0_norm() <= 1e-10);
    }

    #[test]
    fn decompose_kills_orthogonal_part() {
        let m = cat();
        let reference = ReferenceSplitting::from_linear_part(&m).unwrap();
        let grid = torus_grid(32);
        let along_s = DiscreteVectorField::from_fn(grid, m.frame, |p| {
            let amp = (std::f64::consts::TAU * p.c[0]).sin();
            TangentVector::new(
                ManifoldKind::Torus2,
                [amp * reference.e_s[0], amp * reference.e_s[1]],
            )
        });
        let projectors = ComponentProjectors::anosov_constant(&reference);
        let partition = PartitionOfUnity::single(grid);
        let parts = decompose(&along_s, &projectors, &partition).unwrap();
        assert!(parts[0].unstable.c0_norm() <= 1e-13);
    }

    #[test]
    fn decompose_morse_smale_rank_pattern() {
        let grid = Grid::new(ManifoldKind::Circle, 256).unwrap();
        let engine = ms_engine(grid, 10);
        let eta = DiscreteVectorField::random_trig(grid, engine.m.frame, 5);
        let parts = decompose(&eta, &engine.projectors, &engine.partition).unwrap();
        assert_eq!(parts.len(), 2);
        // repeller component has rank-0 stable part
        assert_eq!(parts[0].stable.c0_norm(), 0.0);
        assert_eq!(parts[1].unstable.c0_norm(), 0.0);
        let mut sum = DiscreteVectorField::zero(grid, engine.m.frame);
        for p in &parts {
            sum = sum.add(&p.stable).unwrap().add(&p.unstable).unwrap();
        }
        assert!(sum.sub(&eta).unwrap().c0_norm() <= 1e-10);
    }

    #[test]
    fn apply_j_zero_is_zero() {
        let engine = cat_engine(torus_grid(64), 20);
        let zero = DiscreteVectorField::zero(engine.grid, engine.m.frame);
        let out = engine.apply(&zero).unwrap();
        assert_eq!(out.c0_norm(), 0.0);
    }

    #[test]
    fn stable_constant_field_matches_geometric_series() {
        let engine = cat_engine(torus_grid(64), 30);
        let m = engine.m.clone();
        let reference = ReferenceSplitting::from_linear_part(&m).unwrap();
        let zeta = DiscreteVectorField::from_fn(engine.grid, m.frame, |_| {
            TangentVector::new(ManifoldKind::Torus2, reference.e_s)
        });
        let out = engine.apply(&zeta).unwrap();
        let lambda = (3.0 - 5f64.sqrt()) / 2.0;
        let partial: f64 = (1.0 - lambda.powi(31)) / (1.0 - lambda);
        for v in out.values.iter().step_by(501) {
            let c = reference.coefficients(v.c);
            assert!((c[1] - partial).abs() <= 1e-12, "stable sum {c:?} vs {partial}");
            assert!(c[0].abs() <= 1e-12);
        }
    }

    #[test]
    fn j_is_linear() {
        let engine = cat_engine(torus_grid(64), 25);
        let a = DiscreteVectorField::random_trig(engine.grid, engine.m.frame, 41);
        let b = DiscreteVectorField::random_trig(engine.grid, engine.m.frame, 42);
        let lhs = engine.apply(&a.scale(1.5).add(&b.scale(0.5)).unwrap()).unwrap();
        let rhs = engine
            .apply(&a)
            .unwrap()
            .scale(1.5)
            .add(&engine.apply(&b).unwrap().scale(0.5))
            .unwrap();
        assert!(lhs.sub(&rhs).unwrap().c0_norm() <= 1e-10);
    }

    #[test]
    fn right_inverse_residual_within_tail() {
        let engine = cat_engine(torus_grid(256), 40);
        for seed in 0..3 {
            let eta = DiscreteVectorField::random_trig(engine.grid, engine.m.frame, 100 + seed);
            let report = engine.verify(&eta).unwrap();
            assert!(
                report.ratio_to_tail <= 3.0,
                "residual {:.3e} vs tail bound {:.3e}",
                report.residual_c0,
                report.tail_bound * report.eta_c0
            );
        }
    }

    #[test]
    fn residual_shrinks_with_longer_truncation() {
        let grid = torus_grid(128);
        let short = cat_engine(grid, 20);
        let long = cat_engine(grid, 26);
        let eta = DiscreteVectorField::random_trig(grid, short.m.frame, 7);
        let r_short = short.verify(&eta).unwrap().residual_c0;
        let r_long = long.verify(&eta).unwrap().residual_c0;
        assert!(
            r_long <= 0.5 * r_short,
            "residual did not halve: {r_short:.3e} -> {r_long:.3e}"
        );
    }

    #[test]
    fn batch_matches_individual_application() {
        let engine = cat_engine(torus_grid(64), 20);
        let a = DiscreteVectorField::random_trig(engine.grid, engine.m.frame, 51);
        let b = DiscreteVectorField::random_trig(engine.grid, engine.m.frame, 52);
        let batch = engine.apply_batch(&[a.clone(), b.clone()]).unwrap();
        let ja = engine.apply(&a).unwrap();
        let jb = engine.apply(&b).unwrap();
        assert_eq!(
            batch[0].values[123].c, ja.values[123].c,
            "batch result differs from single"
        );
        assert_eq!(batch[1].values[4000].c, jb.values[4000].c);
    }

    #[test]
    fn cat_decay_rate_is_lambda() {
        let m = cat();
        let grid = torus_grid(64);
        let reference = ReferenceSplitting::from_linear_part(&m).unwrap();
        let zeta = DiscreteVectorField::from_fn(grid, m.frame, |p| {
            let amp = 1.0 + 0.5 * (std::f64::consts::TAU * p.c[1]).cos();
            TangentVector::new(
                ManifoldKind::Torus2,
                [amp * reference.e_s[0], amp * reference.e_s[1]],
            )
        });
        let norms = measure_decay(&m, &zeta, 12).unwrap();
        let rate = fitted_rate(&norms, 2, 12);
        let lambda = (3.0 - 5f64.sqrt()) / 2.0;
        assert_relative_eq!(rate, lambda, epsilon = 1e-9);
        // zero field stays zero
        let zero = DiscreteVectorField::zero(grid, m.frame);
        assert!(measure_decay(&m, &zero, 5).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn morse_smale_stable_decay_below_rho() {
        let grid = Grid::new(ManifoldKind::Circle, 4096).unwrap();
        let engine = ms_engine(grid, 10);
        let eta = DiscreteVectorField::random_trig(grid, engine.m.frame, 9);
        let parts = decompose(&eta, &engine.projectors, &engine.partition).unwrap();
        let norms = measure_decay(&engine.m, &parts[1].stable, 24).unwrap();
        let rate = fitted_rate(&norms, 12, 24);
        assert!(
            rate <= engine.budget.rho * 1.05,
            "stable decay rate {rate} above rho*1.05 = {}",
            engine.budget.rho * 1.05
        );
    }

    #[test]
    fn swapped_projectors_fail_decay_check() {
        let grid = Grid::new(ManifoldKind::Circle, 1024).unwrap();
        let mut engine = ms_engine(grid, 30);
        // swap the component patterns: the repeller component now claims a
        // stable line, seeding the forward series with expanding data
        engine.projectors.components.swap(0, 1);
        let eta = DiscreteVectorField::random_trig(grid, engine.m.frame, 10);
        match engine.apply(&eta) {
            Err(Error::SeriesNonDecay(_)) => {}
            other => panic!("expected series non-decay, got {:?}", other.map(|f| f.c0_norm())),
        }
    }

    #[test]
    fn holder_growth_within_decay_law() {
        let m = cat();
        let grid = torus_grid(128);
        let h = m.hyperbolicity_constants().unwrap().with_alpha(0.5).unwrap();
        let reference = ReferenceSplitting::from_linear_part(&m).unwrap();
        let projectors = ComponentProjectors::anosov_constant(&reference);
        let kappa = projectors.max_projector_norm(&m, &grid) * 1.01;
        let budget = SeriesBudget::auto(&m, &h, kappa, &m.basic_sets(), 20).unwrap();
        let pairs =
            PairSet::build(&m, grid, h.alpha, DfWindow::new(10), 2000, DEFAULT_PAIR_SEED).unwrap();
        let partition = PartitionOfUnity::single(grid);
        let eta = DiscreteVectorField::random_trig(grid, m.frame, 61);
        let parts = decompose(&eta, &projectors, &partition).unwrap();
        let rows = measure_holder_growth(&m, &parts[0].stable, 8, &h, &budget, &projectors, &pairs)
            .unwrap();
        for (n, (measured, bound)) in rows.iter().enumerate() {
            assert!(
                measured <= bound || *measured < 1e-12,
                "L_alpha growth at n = {n}: {measured:.3e} above bound {bound:.3e}"
            );
        }
        // constant field: only the C' term is in play, and for the linear
        // map C' = 0 and L_alpha stays zero
        let c_field = DiscreteVectorField::from_fn(grid, m.frame, |_| {
            TangentVector::new(ManifoldKind::Torus2, reference.e_s)
        });
        let rows = measure_holder_growth(&m, &c_field, 5, &h, &budget, &projectors, &pairs).unwrap();
        for (measured, bound) in rows {
            assert!(measured <= bound.max(1e-12));
        }
    }

    #[test]
    fn morse_smale_full_residual() {
        let grid = Grid::new(ManifoldKind::Circle, 16384).unwrap();
        let engine = ms_engine(grid, 60);
        let eta = DiscreteVectorField::random_trig(grid, engine.m.frame, 77);
        let report = engine.verify(&eta).unwrap();
        assert!(
            report.residual_c0 <= 1e-6,
            "MS residual {:.3e} above 1e-6",
            report.residual_c0
        );
        // the materialized node samples are themselves good to the
        // resolution-limited level when pushed through plain interpolation
        let j_eta = engine.apply(&eta).unwrap();
        let pushed = push_forward(&engine.m, &j_eta).unwrap();
        let coarse = j_eta.sub(&pushed).unwrap().sub(&eta).unwrap().c0_norm();
        assert!(coarse <= 1e-3, "interpolated-sample residual {coarse:.3e}");
    }

    #[test]
    fn budget_tail_and_cover() {
        let m = cat();
        let h = m.hyperbolicity_constants().unwrap().with_alpha(0.5).unwrap();
        let budget = SeriesBudget::auto(&m, &h, 1.01, &m.basic_sets(), 40).unwrap();
        assert_eq!(budget.k_decay, 1.0);
        let expect = budget.rho.powi(41) / (1.0 - budget.rho);
        assert_relative_eq!(budget.tail_bound, expect, epsilon = 1e-15);
        assert!(budget.rho * h.l.powf(h.alpha) < 0.99);

        let tol_driven = budget.with_tail_below(1e-10).unwrap();
        assert!(tol_driven.tail_bound <= 1e-10);

        let ms = ms_map();
        let basic = ms.basic_sets();
        let probe = Grid::new(ManifoldKind::Circle, 256).unwrap();
        let n = cover_iterations(&ms, &basic, &probe).unwrap();
        assert!(n >= 1 && n <= 16, "cover iterations {n}");
    }
}
