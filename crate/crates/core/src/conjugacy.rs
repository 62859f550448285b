//! Conjugacy solver: finds the field eta with g . h = h . f for h = exp(eta)
//! by iterating R_g(x) = J(Psi(g,x) - f_sharp(x)) from zero, where
//! Psi(g,h) = g h f^{-1} in the exponential chart and J is the series right
//! inverse of 1 - f_sharp built at the unperturbed f. The iteration never
//! re-linearizes; contraction ratios, ball confinement in the combined norm
//! and the conjugacy residual are measured along the way, and the result
//! carries a homeomorphism certificate.

use crate::error::{Error, Result};
use crate::exec;
use crate::field::DiscreteVectorField;
use crate::geometry::{dist, exp_point, log_point, ManifoldKind, Point, TangentVector};
use crate::norms::{estimate_exponent, NormReport, PairSet};
use crate::rightinverse::{push_forward, SeriesRightInverse};
use crate::systems::{HyperbolicityConstants, ModelMap};

/// Stopping threshold, iteration cap, chart-safety ball radius, combined
/// norm confinement radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub r_ball: f64,
    pub eps_ball: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tol: 1e-10, max_iter: 200, r_ball: 0.24, eps_ball: 1.0 }
    }
}

impl SolverConfig {
    pub fn validate(&self, tail_bound: f64) -> Result<()> {
        if !(self.eps_ball > 0.0 && self.eps_ball <= 1.0) {
            return Err(Error::ConfigInvalid(format!(
                "eps_ball = {} outside (0,1]",
                self.eps_ball
            )));
        }
        if !(self.r_ball > 0.0 && self.r_ball < 0.25) {
            return Err(Error::ConfigInvalid(format!(
                "r_ball = {} outside (0, 1/4)",
                self.r_ball
            )));
        }
        if self.tol <= tail_bound {
            return Err(Error::ConfigInvalid(format!(
                "tol = {:.3e} at or below the series tail floor {:.3e}",
                self.tol, tail_bound
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::ConfigInvalid("max_iter = 0".into()));
        }
        Ok(())
    }
}

/// Chart representative of g . h . f^{-1} for h = exp(eta):
/// Psi(eta)(x) = exp_x^{-1}( g( exp_{f^{-1}x}( eta(f^{-1}x) ) ) ).
pub fn psi(
    g: &ModelMap,
    f: &ModelMap,
    eta: &DiscreteVectorField,
) -> Result<DiscreteVectorField> {
    let grid = eta.grid;
    if eta.c0_norm() >= 0.5 {
        return Err(Error::ChartOverflow(format!(
            "displacement field norm {:.4} leaves the chart",
            eta.c0_norm()
        )));
    }
    let values: Vec<TangentVector> = exec::map_collect(grid.node_count(), |i| {
        let x = grid.point(i);
        let y = f.inverse(&x)?;
        let v = eta.interpolate(&y);
        let hy = exp_point(&y, &v)
            .map_err(|_| Error::ChartOverflow(format!("exp displacement too large at node {i}")))?;
        let z = g.evaluate(&hy);
        log_point(&x, &z).map_err(|_| {
            Error::ChartOverflow(format!(
                "Psi value at node {i} is antipodally ambiguous (image too far from base)"
            ))
        })
    })
    .into_iter()
    .collect::<Result<_>>()?;
    Ok(DiscreteVectorField { grid, frame: eta.frame, values })
}

/// Measured norms of Q(g,eta) = Psi(g,eta) - f_sharp(eta) and the
/// perturbation sizes they imply through the closeness inequalities.
#[derive(Debug, Clone, Copy)]
pub struct PerturbationReport {
    pub q_c0: f64,
    pub q_holder: f64,
    pub q_df: f64,
    /// eps' implied by the C0 bound |Q| <= eps'.
    pub eps_c0: f64,
    /// eps' implied by L_f(Q) <= eps'(1 + L_f(eta)).
    pub eps_df: f64,
    /// coefficient l diam^(1-alpha) + l^alpha L_alpha(eta) of the
    /// Hoelder bound.
    pub holder_coefficient: f64,
}

pub fn verify_perturbation_bounds(
    g: &ModelMap,
    f: &ModelMap,
    eta: &DiscreteVectorField,
    h: &HyperbolicityConstants,
    pairs: &PairSet,
) -> Result<PerturbationReport> {
    let q = psi(g, f, eta)?.sub(&push_forward(f, eta)?)?;
    let qn = pairs.field_norms(&q);
    let en = pairs.field_norms(eta);
    let diam = f.frame.diameter();
    let holder_coefficient = h.l * diam.powf(1.0 - pairs.alpha) + h.l.powf(pairs.alpha) * en.holder;
    Ok(PerturbationReport {
        q_c0: qn.c0,
        q_holder: qn.holder,
        q_df: qn.df_lip,
        eps_c0: qn.c0,
        eps_df: qn.df_lip / (1.0 + en.df_lip),
        holder_coefficient,
    })
}

/// Operator-norm estimates for J by probing random unit fields.
pub fn estimate_j_norms(
    j: &SeriesRightInverse,
    pairs: &PairSet,
    seed: u64,
    probes: usize,
) -> Result<(f64, f64)> {
    let fields: Vec<DiscreteVectorField> = (0..probes)
        .map(|k| DiscreteVectorField::random_trig(j.grid, j.m.frame, seed.wrapping_add(k as u64)))
        .collect();
    let images = j.apply_batch(&fields)?;
    let mut gain_c0: f64 = 0.0;
    let mut gain_combined: f64 = 0.0;
    for (eta, jeta) in fields.iter().zip(&images) {
        let ne = pairs.field_norms(eta);
        let nj = pairs.field_norms(jeta);
        if ne.c0 > 0.0 {
            gain_c0 = gain_c0.max(nj.c0 / ne.c0);
        }
        if ne.combined > 0.0 {
            gain_combined = gain_combined.max(nj.combined / ne.combined);
        }
    }
    Ok((gain_c0, gain_combined))
}

#[derive(Debug, Clone, Copy)]
pub struct TraceRow {
    pub iteration: usize,
    pub update: f64,
    pub ratio: f64,
    pub c0: f64,
    pub combined: f64,
}

/// Converged conjugating field and its diagnostics.
#[derive(Debug, Clone)]
pub struct ConjugacyResult {
    pub eta: DiscreteVectorField,
    pub iterations: usize,
    pub ratios: Vec<f64>,
    /// |R_g(eta) - eta| at the accepted fixed point.
    pub fixed_point_defect: f64,
    /// sup_x d(g(h(x)), h(f(x))) over grid nodes.
    pub residual: f64,
    pub norms: NormReport,
    pub ball_confinement: f64,
    pub j_norm_c0: f64,
    pub j_norm_combined: f64,
    pub trace: Vec<TraceRow>,
}

/// Iterate R_g from zero. `j` fixes f (= j.m), the budget and the
/// projector/partition configuration; `pairs` fixes the norm sample.
pub fn solve_conjugacy(
    g: &ModelMap,
    j: &SeriesRightInverse,
    cfg: &SolverConfig,
    pairs: &PairSet,
) -> Result<ConjugacyResult> {
    cfg.validate(j.budget.tail_bound)?;
    let f = j.m.clone();
    let grid = j.grid;
    let (j_norm_c0, j_norm_combined) = estimate_j_norms(j, pairs, 0x6a0b_35c1, 20)?;

    // perturbation gate at eta = 0
    let zero = DiscreteVectorField::zero(grid, f.frame);
    let psi0 = psi(g, &f, &zero)?;
    let q0 = psi0.c0_norm();
    let gate = cfg.r_ball / (2.0 * j_norm_c0.max(1.0));
    if q0 > gate {
        return Err(Error::SolverDivergence {
            message: format!(
                "perturbation gate failed: |Psi(g,0)| = {q0:.4e} exceeds r_ball/(2|J|) = {gate:.4e}"
            ),
            ratio_trace: Vec::new(),
        });
    }

    let mut x = zero;
    let mut ratios: Vec<f64> = Vec::new();
    let mut trace: Vec<TraceRow> = Vec::new();
    let mut prev_update: Option<f64> = None;
    let mut confinement: f64 = 0.0;
    let mut converged_at: Option<usize> = None;

    for it in 1..=cfg.max_iter {
        let w = psi(g, &f, &x)?.sub(&push_forward(&f, &x)?)?;
        let x_next = j.apply(&w)?;
        let update = x_next.sub(&x)?.c0_norm();
        let ratio = match prev_update {
            Some(p) if p > 0.0 => update / p,
            _ => f64::NAN,
        };
        if ratio.is_finite() {
            ratios.push(ratio);
        }
        let rep = pairs.field_norms(&x_next);
        confinement = confinement.max(rep.combined);
        trace.push(TraceRow { iteration: it, update, ratio, c0: rep.c0, combined: rep.combined });
        if x_next.c0_norm() > cfg.r_ball {
            return Err(Error::SolverDivergence {
                message: format!(
                    "iterate left the C0 ball: |x_{it}| = {:.4e} > r_ball = {}",
                    x_next.c0_norm(),
                    cfg.r_ball
                ),
                ratio_trace: ratios,
            });
        }
        let n = ratios.len();
        if n >= 3 && ratios[n - 3..].iter().all(|r| *r >= 0.95) {
            return Err(Error::SolverDivergence {
                message: format!("contraction ratio >= 0.95 for 3 consecutive steps at iteration {it}"),
                ratio_trace: ratios,
            });
        }
        x = x_next;
        if update <= cfg.tol {
            converged_at = Some(if update == 0.0 { it - 1 } else { it });
            break;
        }
        prev_update = Some(update);
    }

    let iterations = converged_at.ok_or_else(|| Error::SolverDivergence {
        message: format!("no convergence within {} iterations", cfg.max_iter),
        ratio_trace: ratios.clone(),
    })?;

    // a-posteriori re-checks at the accepted fixed point
    let w = psi(g, &f, &x)?.sub(&push_forward(&f, &x)?)?;
    let fixed_point_defect = j.apply(&w)?.sub(&x)?.c0_norm();
    let residual = conjugacy_residual(g, &f, &x);
    let norms = pairs.field_norms(&x);

    if confinement > cfg.eps_ball {
        return Err(Error::SolverDivergence {
            message: format!(
                "combined-norm confinement {confinement:.4} left the eps ball {}",
                cfg.eps_ball
            ),
            ratio_trace: ratios,
        });
    }

    Ok(ConjugacyResult {
        eta: x,
        iterations,
        ratios,
        fixed_point_defect,
        residual,
        norms,
        ball_confinement: confinement,
        j_norm_c0,
        j_norm_combined,
        trace,
    })
}

/// sup over grid nodes of d(g(h(x)), h(f(x))) for h = exp(eta).
pub fn conjugacy_residual(g: &ModelMap, f: &ModelMap, eta: &DiscreteVectorField) -> f64 {
    let grid = eta.grid;
    exec::max_value(grid.node_count(), |i| {
        let x = grid.point(i);
        let hx = exp_point(&x, &eta.values[i]).expect("eta stays in the chart");
        let ghx = g.evaluate(&hx);
        let fx = f.evaluate(&x);
        let v = eta.interpolate(&fx);
        let hfx = exp_point(&fx, &v).expect("eta stays in the chart");
        dist(&ghx, &hfx, &f.frame)
    })
}

/// Homeomorphism certificate: d_f-Lipschitz smallness, grid-level
/// injectivity, and degree one along the fundamental cycles.
#[derive(Debug, Clone)]
pub struct HomeoCertificate {
    pub positive: bool,
    pub df_lip: f64,
    pub df_lip_ok: bool,
    pub injective: bool,
    pub injectivity_witness: Option<(usize, usize)>,
    pub degree_ok: bool,
    pub winding: [[i64; 2]; 2],
}

pub fn check_homeomorphism(result: &ConjugacyResult, f: &ModelMap) -> HomeoCertificate {
    certify_field(&result.eta, result.norms.df_lip, f)
}

/// The certificate on a bare field (used for adversarial inputs too).
pub fn certify_field(eta: &DiscreteVectorField, df_lip: f64, f: &ModelMap) -> HomeoCertificate {
    let grid = eta.grid;
    let kind = grid.kind;
    let res = grid.resolution;
    let n = grid.node_count();

    // images of all nodes under h = exp(eta)
    let images: Vec<Point> = exec::map_collect(n, |i| {
        let x = grid.point(i);
        Point::new(
            kind,
            [x.c[0] + eta.values[i].c[0], x.c[1] + eta.values[i].c[1]],
        )
    });

    // bucketed half-cell injectivity check
    let half_cell = 0.5 * grid.spacing();
    let frame_id = crate::geometry::MetricFrame::identity(kind);
    let bucket_of = |p: &Point| -> usize {
        match kind {
            ManifoldKind::Circle => ((p.c[0] * res as f64) as usize).min(res - 1),
            ManifoldKind::Torus2 => {
                let i = ((p.c[0] * res as f64) as usize).min(res - 1);
                let j = ((p.c[1] * res as f64) as usize).min(res - 1);
                i * res + j
            }
        }
    };
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (i, p) in images.iter().enumerate() {
        buckets[bucket_of(p)].push(i as u32);
    }
    let neighborhood = |b: usize| -> Vec<usize> {
        match kind {
            ManifoldKind::Circle => (-1i64..=1)
                .map(|d| (b as i64 + d).rem_euclid(res as i64) as usize)
                .collect(),
            ManifoldKind::Torus2 => {
                let (bi, bj) = (b / res, b % res);
                let mut out = Vec::with_capacity(9);
                for di in -1i64..=1 {
                    for dj in -1i64..=1 {
                        let ni = (bi as i64 + di).rem_euclid(res as i64) as usize;
                        let nj = (bj as i64 + dj).rem_euclid(res as i64) as usize;
                        out.push(ni * res + nj);
                    }
                }
                out
            }
        }
    };
    let mut injective = true;
    let mut witness = None;
    'outer: for (b, members) in buckets.iter().enumerate() {
        for &a in members {
            for nb in neighborhood(b) {
                for &c in &buckets[nb] {
                    if c <= a {
                        continue;
                    }
                    if dist(&images[a as usize], &images[c as usize], &frame_id) < half_cell {
                        injective = false;
                        witness = Some((a as usize, c as usize));
                        break 'outer;
                    }
                }
            }
        }
    }

    // winding of h along the fundamental cycles
    let mut winding = [[0i64; 2]; 2];
    let cycles: &[usize] = match kind {
        ManifoldKind::Circle => &[0],
        ManifoldKind::Torus2 => &[0, 1],
    };
    for &axis in cycles {
        let mut total = [0.0f64, 0.0];
        let mut prev = images[0];
        for k in 1..=res {
            let idx = match kind {
                ManifoldKind::Circle => k % res,
                ManifoldKind::Torus2 => {
                    if axis == 0 {
                        grid.index(k % res, 0)
                    } else {
                        grid.index(0, k % res)
                    }
                }
            };
            let cur = images[idx];
            for d in 0..kind.dim() {
                total[d] += crate::geometry::min_lift(cur.c[d] - prev.c[d]);
            }
            prev = cur;
        }
        for d in 0..kind.dim() {
            winding[axis][d] = total[d].round() as i64;
        }
    }
    let degree_ok = match kind {
        ManifoldKind::Circle => winding[0][0] == 1,
        ManifoldKind::Torus2 => winding == [[1, 0], [0, 1]],
    };

    let df_lip_ok = df_lip <= 0.5;
    let _ = f;
    HomeoCertificate {
        positive: df_lip_ok && injective && degree_ok,
        df_lip,
        df_lip_ok,
        injective,
        injectivity_witness: witness,
        degree_ok,
        winding,
    }
}

/// Per-alpha norm reports of the conjugating field, plus the empirical
/// Hoelder exponent. Only alphas with lambda l^alpha < 1 are admissible.
pub struct HolderReportRow {
    pub alpha: f64,
    pub admissible: bool,
    pub report: NormReport,
}

pub fn holder_report(
    result: &ConjugacyResult,
    f: &ModelMap,
    h: &HyperbolicityConstants,
    pairs: &PairSet,
    alpha_grid: &[f64],
) -> Result<(Vec<HolderReportRow>, Option<f64>)> {
    let mut rows = Vec::with_capacity(alpha_grid.len());
    for &alpha in alpha_grid {
        let admissible = h.lambda * h.l.powf(alpha) < 1.0;
        let p = pairs.with_alpha(alpha)?;
        rows.push(HolderReportRow { alpha, admissible, report: p.field_norms(&result.eta) });
    }
    let exponent = estimate_exponent(&result.eta, f).ok();
    Ok((rows, exponent))
}
