//! The orbit metric d_f, the modulus rho_f = min{d^alpha, d_f}, and the norm
//! triple (sup, Hoelder, d_f-Lipschitz) on discretized vector fields.
//!
//! Suprema over the continuum are estimated from below on a deterministic
//! pair sample: all grid-neighbor pairs plus a low-discrepancy batch of
//! long-range node pairs. Denominators (d and d_f) depend only on the map
//! and the pair set, so they are computed once and reused when the same
//! sample is scanned across many fields (the conjugacy solver does this
//! every iteration).

use crate::error::{Error, Result};
use crate::exec;
use crate::field::DiscreteVectorField;
use crate::geometry::{dist, Grid, ManifoldKind, Point};
use crate::systems::ModelMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seed for the sampler when the caller does not supply one.
pub const DEFAULT_PAIR_SEED: u64 = 0x5d1f_0c3a_9b42_77e1;

/// Half-width of the iterate window truncating the sup over all times.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DfWindow {
    pub w: u32,
}

impl DfWindow {
    pub fn new(w: u32) -> Self {
        DfWindow { w }
    }

    /// Window large enough that orbit separation of a pair at distance
    /// `sep` saturates: ceil(log(diam/sep) / log(1/lambda)).
    pub fn auto(diameter: f64, sep: f64, lambda: f64) -> Self {
        let w = ((diameter / sep).ln() / (1.0 / lambda).ln()).ceil();
        DfWindow { w: w.max(1.0) as u32 }
    }
}

/// max over |n| <= W of d(f^n x, f^n y), together with the attaining index.
pub fn df_distance_argmax(m: &ModelMap, x: &Point, y: &Point, w: DfWindow) -> (f64, i32) {
    let frame = &m.frame;
    let mut best = dist(x, y, frame);
    let mut best_n = 0i32;
    let (mut fx, mut fy) = (*x, *y);
    for n in 1..=w.w as i32 {
        fx = m.evaluate(&fx);
        fy = m.evaluate(&fy);
        let d = dist(&fx, &fy, frame);
        if d > best {
            best = d;
            best_n = n;
        }
    }
    let (mut bx, mut by) = (*x, *y);
    for n in 1..=w.w as i32 {
        bx = m.inverse(&bx).expect("validated diffeomorphism");
        by = m.inverse(&by).expect("validated diffeomorphism");
        let d = dist(&bx, &by, frame);
        if d > best {
            best = d;
            best_n = -n;
        }
    }
    (best, best_n)
}

pub fn df_distance(m: &ModelMap, x: &Point, y: &Point, w: DfWindow) -> f64 {
    df_distance_argmax(m, x, y, w).0
}

/// rho_f(x,y) = min{ d(x,y)^alpha, d_f(x,y) }.
pub fn rho_f(m: &ModelMap, x: &Point, y: &Point, alpha: f64, w: DfWindow) -> f64 {
    debug_assert!(alpha > 0.0 && alpha <= 1.0);
    let d = dist(x, y, &m.frame);
    let df = df_distance(m, x, y, w);
    d.powf(alpha).min(df)
}

/// The norm triple and its combination; one CSV row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport {
    pub alpha: f64,
    pub window: u32,
    pub c0: f64,
    pub holder: f64,
    pub df_lip: f64,
    pub combined: f64,
    pub pairs: usize,
}

impl NormReport {
    pub fn csv_header() -> &'static str {
        "alpha,W,c0,holder,df_lip,combined,pairs"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:.6},{},{:.12e},{:.12e},{:.12e},{:.12e},{}",
            self.alpha, self.window, self.c0, self.holder, self.df_lip, self.combined, self.pairs
        )
    }
}

/// Additive-recurrence low-discrepancy sequence in `D` dimensions.
struct Harmonious<const D: usize> {
    alphas: [f64; D],
    state: [f64; D],
}

impl<const D: usize> Harmonious<D> {
    fn new(seed: u64) -> Self {
        // phi_D is the root of x^{D+1} = x + 1
        let mut phi = 1.0f64;
        for _ in 0..64 {
            phi = (1.0 + phi).powf(1.0 / (D as f64 + 1.0));
        }
        let mut alphas = [0.0; D];
        let mut a = 1.0;
        for slot in alphas.iter_mut() {
            a /= phi;
            *slot = a;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = [0.0; D];
        for slot in state.iter_mut() {
            *slot = rng.gen::<f64>();
        }
        Harmonious { alphas, state }
    }

    fn next(&mut self) -> [f64; D] {
        for k in 0..D {
            self.state[k] = (self.state[k] + self.alphas[k]).fract();
        }
        self.state
    }
}

/// A deterministic sample of node pairs with precomputed d and d_f.
#[derive(Debug, Clone)]
pub struct PairSet {
    pub grid: Grid,
    pub alpha: f64,
    pub window: DfWindow,
    pub pairs: Vec<(u32, u32)>,
    pub d: Vec<f64>,
    pub d_alpha: Vec<f64>,
    pub df: Vec<f64>,
}

impl PairSet {
    /// All grid-neighbor pairs plus `budget` low-discrepancy long-range
    /// pairs (budget >= 1000). Deterministic for a fixed seed.
    pub fn build(
        m: &ModelMap,
        grid: Grid,
        alpha: f64,
        window: DfWindow,
        budget: usize,
        seed: u64,
    ) -> Result<Self> {
        if budget < 1000 {
            return Err(Error::ConfigInvalid(format!(
                "pair_budget {budget} < 1000"
            )));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::ConfigInvalid(format!("alpha {alpha} outside (0,1]")));
        }
        let n = grid.node_count();
        let r = grid.resolution;
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        match grid.kind {
            ManifoldKind::Circle => {
                for i in 0..n {
                    pairs.push((i as u32, ((i + 1) % r) as u32));
                }
                let mut seq = Harmonious::<2>::new(seed);
                while pairs.len() < n + budget {
                    let u = seq.next();
                    let a = (u[0] * r as f64) as usize % r;
                    let b = (u[1] * r as f64) as usize % r;
                    if a != b {
                        pairs.push((a as u32, b as u32));
                    }
                }
            }
            ManifoldKind::Torus2 => {
                for i in 0..r {
                    for j in 0..r {
                        let idx = grid.index(i, j) as u32;
                        pairs.push((idx, grid.index(i + 1, j) as u32));
                        pairs.push((idx, grid.index(i, j + 1) as u32));
                    }
                }
                let mut seq = Harmonious::<4>::new(seed);
                let target = pairs.len() + budget;
                while pairs.len() < target {
                    let u = seq.next();
                    let a = grid.index((u[0] * r as f64) as usize, (u[1] * r as f64) as usize);
                    let b = grid.index((u[2] * r as f64) as usize, (u[3] * r as f64) as usize);
                    if a != b {
                        pairs.push((a as u32, b as u32));
                    }
                }
            }
        }
        let frame = m.frame;
        let metrics = exec::map_collect(pairs.len(), |k| {
            let (a, b) = pairs[k];
            let x = grid.point(a as usize);
            let y = grid.point(b as usize);
            let d = dist(&x, &y, &frame);
            let df = df_distance(m, &x, &y, window);
            (d, df)
        });
        let mut d = Vec::with_capacity(pairs.len());
        let mut d_alpha = Vec::with_capacity(pairs.len());
        let mut df = Vec::with_capacity(pairs.len());
        for (dd, dfv) in metrics {
            d.push(dd);
            d_alpha.push(dd.powf(alpha));
            df.push(dfv);
        }
        Ok(PairSet { grid, alpha, window, pairs, d, d_alpha, df })
    }

    /// Norm triple of a vector field over this sample. c0 is the exact grid
    /// maximum; holder and df_lip are lower bounds of the true suprema.
    pub fn field_norms(&self, eta: &DiscreteVectorField) -> NormReport {
        assert_eq!(eta.grid, self.grid, "field grid does not match pair set");
        let frame = eta.frame;
        let c0 = eta.c0_norm();
        let quotients = exec::map_collect(self.pairs.len(), |k| {
            let (a, b) = self.pairs[k];
            let diff = eta.values[a as usize].sub(&eta.values[b as usize]);
            let num = frame.vec_norm(&diff);
            let h = if self.d_alpha[k] > 0.0 { num / self.d_alpha[k] } else { 0.0 };
            let l = if self.df[k] > 0.0 { num / self.df[k] } else { 0.0 };
            (h, l)
        });
        let mut holder: f64 = 0.0;
        let mut df_lip: f64 = 0.0;
        for (h, l) in quotients {
            holder = holder.max(h);
            df_lip = df_lip.max(l);
        }
        NormReport {
            alpha: self.alpha,
            window: self.window.w,
            c0,
            holder,
            df_lip,
            combined: c0.max(holder).max(df_lip),
            pairs: self.pairs.len(),
        }
    }

    /// max over pairs of |v(x) - v(y)| / rho_f(x,y) for scalar node values.
    pub fn scalar_rho_modulus(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.grid.node_count());
        let q = exec::map_collect(self.pairs.len(), |k| {
            let (a, b) = self.pairs[k];
            let num = (values[a as usize] - values[b as usize]).abs();
            let rho = self.d_alpha[k].min(self.df[k]);
            if rho > 0.0 {
                num / rho
            } else {
                0.0
            }
        });
        q.into_iter().fold(0.0f64, f64::max)
    }

    /// The same pair sample with a different Hoelder exponent (distances
    /// and orbit metrics are reused).
    pub fn with_alpha(&self, alpha: f64) -> Result<PairSet> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::ConfigInvalid(format!("alpha {alpha} outside (0,1]")));
        }
        let mut out = self.clone();
        out.alpha = alpha;
        out.d_alpha = self.d.iter().map(|d| d.powf(alpha)).collect();
        Ok(out)
    }

    /// max over pairs of |v(x) - v(y)| / d(x,y)^alpha for scalar node values.
    pub fn scalar_holder(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.grid.node_count());
        let q = exec::map_collect(self.pairs.len(), |k| {
            let (a, b) = self.pairs[k];
            let num = (values[a as usize] - values[b as usize]).abs();
            if self.d_alpha[k] > 0.0 {
                num / self.d_alpha[k]
            } else {
                0.0
            }
        });
        q.into_iter().fold(0.0f64, f64::max)
    }
}

/// Norm triple of `eta` with the default seeded pair sample.
pub fn field_norms(
    eta: &DiscreteVectorField,
    alpha: f64,
    m: &ModelMap,
    w: DfWindow,
    pair_budget: usize,
) -> Result<NormReport> {
    let pairs = PairSet::build(m, eta.grid, alpha, w, pair_budget, DEFAULT_PAIR_SEED)?;
    Ok(pairs.field_norms(eta))
}

/// Empirical Hoelder exponent: the slope of the upper envelope of
/// |eta(x) - eta(y)| against d(x,y) in log-log axes.
///
/// Pairs are taken along grid axes at dyadic separations 4h, 8h, ...,
/// with every node as a base point, so the per-scale envelope is the exact
/// maximum over the sample (node reads, no interpolation). Returns the OLS
/// slope clamped to (0, 1.1]; a constant field has no defined exponent.
pub fn estimate_exponent(eta: &DiscreteVectorField, m: &ModelMap) -> Result<f64> {
    let grid = eta.grid;
    let frame = m.frame;
    let r = grid.resolution;
    let diam = frame.diameter();
    let c0 = eta.c0_norm();
    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut k = 2usize;
    while (1usize << k) as f64 / r as f64 <= 0.25 * 1.0 && (1 << k) < r {
        let step = 1usize << k;
        let mut env: f64 = 0.0;
        let mut dref: f64 = 0.0;
        match grid.kind {
            ManifoldKind::Circle => {
                let per = exec::map_collect(r, |i| {
                    let a = &eta.values[i];
                    let b = &eta.values[(i + step) % r];
                    frame.vec_norm(&a.sub(b))
                });
                env = per.into_iter().fold(0.0f64, f64::max);
                dref = dist(&grid.point(0), &grid.point(step % r), &frame);
            }
            ManifoldKind::Torus2 => {
                for axis in 0..2 {
                    let per = exec::map_collect(grid.node_count(), |idx| {
                        let i = idx / r;
                        let j = idx % r;
                        let other = if axis == 0 {
                            grid.index(i + step, j)
                        } else {
                            grid.index(i, j + step)
                        };
                        let diff = eta.values[idx].sub(&eta.values[other]);
                        frame.vec_norm(&diff)
                    });
                    let axis_env = per.into_iter().fold(0.0f64, f64::max);
                    if axis_env > env {
                        env = axis_env;
                        let p = if axis == 0 {
                            grid.point(grid.index(step, 0))
                        } else {
                            grid.point(grid.index(0, step))
                        };
                        dref = dist(&grid.point(0), &p, &frame);
                    } else if dref == 0.0 {
                        dref = dist(&grid.point(0), &grid.point(grid.index(step, 0)), &frame);
                    }
                }
            }
        }
        if env > 1e-13 * c0.max(1.0) && dref > 0.0 && dref <= diam {
            points.push((dref.ln(), env.ln()));
        }
        k += 1;
    }
    if points.len() < 3 {
        return Err(Error::ExponentUndefined);
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-14 {
        return Err(Error::ExponentUndefined);
    }
    let slope = (n * sxy - sx * sy) / denom;
    if !(slope > 0.0) {
        return Err(Error::ExponentUndefined);
    }
    Ok(slope.min(1.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ManifoldKind, MetricFrame, TangentVector};
    use crate::linalg::Mat2;
    use crate::systems::ModelMap;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cat_eigen() -> ModelMap {
        ModelMap::cat_map_eigenframe()
    }

    #[test]
    fn df_of_equal_points_is_zero() {
        let m = cat_eigen();
        let x = Point::torus(0.3, 0.7);
        for w in [0, 4, 16] {
            assert_eq!(df_distance(&m, &x, &x, DfWindow::new(w)), 0.0);
        }
    }

    #[test]
    fn df_degenerate_window_is_distance() {
        let m = cat_eigen();
        let x = Point::torus(0.1, 0.2);
        let y = Point::torus(0.4, 0.9);
        let d0 = dist(&x, &y, &m.frame);
        assert_eq!(df_distance(&m, &x, &y, DfWindow::new(0)), d0);
    }

    #[test]
    fn df_unstable_separation_saturates() {
        // points separated along the unstable eigendirection by 1e-4
        let m = cat_eigen();
        let a = Mat2::from_int([[2, 1], [1, 1]]);
        let (mu_u, _) = a.real_eigenvalues().unwrap();
        let e_u = a.eigenvector(mu_u).unwrap();
        let x = Point::torus(0.15, 0.35);
        let y = Point::torus(0.15 + 1e-4 * e_u[0], 0.35 + 1e-4 * e_u[1]);
        let w = DfWindow::new(16);
        let (val, _) = df_distance_argmax(&m, &x, &y, w);
        // brute-force sup over the window, recomputed independently
        let mut expect: f64 = 0.0;
        let mut fx = x;
        let mut fy = y;
        expect = expect.max(dist(&x, &y, &m.frame));
        for _ in 1..=16 {
            fx = m.evaluate(&fx);
            fy = m.evaluate(&fy);
            expect = expect.max(dist(&fx, &fy, &m.frame));
        }
        let mut bx = x;
        let mut by = y;
        for _ in 1..=16 {
            bx = m.inverse(&bx).unwrap();
            by = m.inverse(&by).unwrap();
            expect = expect.max(dist(&bx, &by, &m.frame));
        }
        assert_eq!(val, expect);
        // expansion by mu^16 ~ 2e3 pushes the pair to macroscopic distance
        assert!(val > 0.2 * m.frame.diameter(), "no saturation: {val}");
    }

    #[test]
    fn df_monotone_in_window_and_bounded() {
        let m = cat_eigen();
        let diam = m.frame.diameter();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let x = Point::torus(rng.gen(), rng.gen());
            let y = Point::torus(rng.gen(), rng.gen());
            let mut prev = 0.0;
            for w in [4u32, 8, 16, 32] {
                let v = df_distance(&m, &x, &y, DfWindow::new(w));
                assert!(v >= prev - 1e-15);
                assert!(v >= dist(&x, &y, &m.frame) - 1e-15);
                assert!(v <= diam + 1e-12);
                prev = v;
            }
        }
    }

    #[test]
    fn stable_leaf_argmax_at_most_negative_index() {
        let m = cat_eigen();
        let a = Mat2::from_int([[2, 1], [1, 1]]);
        let (_, mu_s) = a.real_eigenvalues().unwrap();
        let e_s = a.eigenvector(mu_s).unwrap();
        let x = Point::torus(0.4, 0.8);
        let y = Point::torus(0.4 + 1e-6 * e_s[0], 0.8 + 1e-6 * e_s[1]);
        let (_, n) = df_distance_argmax(&m, &x, &y, DfWindow::new(8));
        assert_eq!(n, -8, "stable-leaf separation must grow backward");
    }

    #[test]
    fn rho_f_basics() {
        let m = cat_eigen();
        let w = DfWindow::new(8);
        let x = Point::torus(0.2, 0.6);
        assert_eq!(rho_f(&m, &x, &x, 0.5, w), 0.0);
        // nearby points: d^alpha below d_f
        let y = Point::torus(0.2 + 1e-5, 0.6);
        let d = dist(&x, &y, &m.frame);
        let expect = d.powf(0.5).min(df_distance(&m, &x, &y, w));
        assert_eq!(rho_f(&m, &x, &y, 0.5, w), expect);
        assert_eq!(expect, d.powf(0.5));
        // alpha = 1 with an expanding map: rho_f <= d always
        let z = Point::torus(0.9, 0.1);
        assert!(rho_f(&m, &x, &z, 1.0, w) <= dist(&x, &z, &m.frame) + 1e-15);
    }

    fn torus_pairs(m: &ModelMap, res: usize) -> PairSet {
        let grid = Grid::new(ManifoldKind::Torus2, res).unwrap();
        PairSet::build(m, grid, 0.5, DfWindow::new(8), 2000, DEFAULT_PAIR_SEED).unwrap()
    }

    #[test]
    fn pair_budget_validated() {
        let m = cat_eigen();
        let grid = Grid::new(ManifoldKind::Torus2, 16).unwrap();
        assert!(PairSet::build(&m, grid, 0.5, DfWindow::new(4), 10, 1).is_err());
    }

    #[test]
    fn constant_field_norms() {
        let m = cat_eigen();
        let pairs = torus_pairs(&m, 64);
        let c = TangentVector::new(ManifoldKind::Torus2, [0.3, -0.4]);
        let eta = DiscreteVectorField::from_fn(pairs.grid, m.frame, |_| c);
        let rep = pairs.field_norms(&eta);
        assert_relative_eq!(rep.c0, m.frame.vec_norm(&c), epsilon = 1e-14);
        assert_eq!(rep.holder, 0.0);
        assert_eq!(rep.df_lip, 0.0);
        assert_eq!(rep.combined, rep.c0);
    }

    #[test]
    fn sine_field_holder_against_dense_scan() {
        let m = ModelMap::cat_map(); // identity frame keeps the oracle 1-D
        let pairs = torus_pairs(&m, 256);
        let eta = DiscreteVectorField::from_fn(pairs.grid, m.frame, |p| {
            TangentVector::new(
                ManifoldKind::Torus2,
                [(std::f64::consts::TAU * p.c[0]).sin(), 0.0],
            )
        });
        let rep = pairs.field_norms(&eta);
        assert_relative_eq!(rep.c0, 1.0, epsilon = 1e-10);
        // dense 1-D scan of the true envelope sup_s 2 sin(pi s) / s^0.5
        let mut scan: f64 = 0.0;
        for k in 1..50_000 {
            let s = 0.5 * k as f64 / 50_000.0;
            scan = scan.max(2.0 * (std::f64::consts::PI * s).sin() / s.sqrt());
        }
        assert!(rep.holder <= scan * (1.0 + 1e-9), "sampled sup exceeds scan");
        assert!(
            rep.holder >= 0.9 * scan,
            "sampled Hoelder {} too far below dense-scan {}",
            rep.holder,
            scan
        );
    }

    #[test]
    fn norms_scale_exactly_by_powers_of_two() {
        let m = cat_eigen();
        let pairs = torus_pairs(&m, 64);
        let eta = DiscreteVectorField::random_trig(pairs.grid, m.frame, 5);
        let a = pairs.field_norms(&eta);
        let b = pairs.field_norms(&eta.scale(2.0));
        assert_eq!(b.c0, 2.0 * a.c0);
        assert_eq!(b.holder, 2.0 * a.holder);
        assert_eq!(b.df_lip, 2.0 * a.df_lip);
        assert_eq!(b.combined, 2.0 * a.combined);
    }

    #[test]
    fn norms_satisfy_triangle_on_shared_sample() {
        let m = cat_eigen();
        let pairs = torus_pairs(&m, 64);
        let eta = DiscreteVectorField::random_trig(pairs.grid, m.frame, 6);
        let zeta = DiscreteVectorField::random_trig(pairs.grid, m.frame, 7);
        let sum = eta.add(&zeta).unwrap();
        let (ra, rb, rs) = (
            pairs.field_norms(&eta),
            pairs.field_norms(&zeta),
            pairs.field_norms(&sum),
        );
        assert!(rs.c0 <= ra.c0 + rb.c0 + 1e-12);
        assert!(rs.holder <= ra.holder + rb.holder + 1e-12);
        assert!(rs.df_lip <= ra.df_lip + rb.df_lip + 1e-12);
    }

    #[test]
    fn exponent_of_smooth_field_near_one() {
        let m = cat_eigen();
        let grid = Grid::new(ManifoldKind::Torus2, 256).unwrap();
        let eta = DiscreteVectorField::from_fn(grid, m.frame, |p| {
            TangentVector::new(
                ManifoldKind::Torus2,
                [
                    (std::f64::consts::TAU * p.c[0]).sin(),
                    (std::f64::consts::TAU * (p.c[0] + p.c[1])).cos(),
                ],
            )
        });
        let a = estimate_exponent(&eta, &m).unwrap();
        assert!(a >= 0.95, "smooth field exponent {a} < 0.95");
    }

    #[test]
    fn exponent_of_sqrt_distance_field() {
        let frame = MetricFrame::identity(ManifoldKind::Circle);
        let m = ModelMap::morse_smale_circle(0.05, frame).unwrap();
        let grid = Grid::new(ManifoldKind::Circle, 1024).unwrap();
        let x0 = Point::circle(0.0);
        let eta = DiscreteVectorField::from_fn(grid, frame, |p| {
            TangentVector::new(ManifoldKind::Circle, [dist(&p, &x0, &frame).sqrt(), 0.0])
        });
        let a = estimate_exponent(&eta, &m).unwrap();
        assert!((a - 0.5).abs() <= 0.05, "sqrt field exponent {a} not 0.5 +- 0.05");
    }

    #[test]
    fn exponent_of_constant_field_undefined() {
        let m = cat_eigen();
        let grid = Grid::new(ManifoldKind::Torus2, 64).unwrap();
        let eta = DiscreteVectorField::from_fn(grid, m.frame, |_| {
            TangentVector::new(ManifoldKind::Torus2, [1.0, 2.0])
        });
        match estimate_exponent(&eta, &m) {
            Err(Error::ExponentUndefined) => {}
            other => panic!("expected undefined exponent, got {other:?}"),
        }
    }

    #[test]
    fn report_csv_shape() {
        let rep = NormReport {
            alpha: 0.5,
            window: 16,
            c0: 1.0,
            holder: 2.0,
            df_lip: 0.5,
            combined: 2.0,
            pairs: 1234,
        };
        assert_eq!(NormReport::csv_header().split(',').count(), 7);
        assert_eq!(rep.csv_row().split(',').count(), 7);
    }
}
