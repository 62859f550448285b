//! The five pipelines behind the subcommands. Each writes its artifacts and
//! a manifest into the output directory and returns the key numbers for
//! programmatic use.

use crate::config::{
    default_projector_partition, is_trivial_target, oracle_diffeo, parse_experiment,
    section_to_rows, with_amplitude, AutoOr, ExperimentConfig, Resolved, SweepSpec,
};
use crate::error::{CliError, CliResult};
use hyperstab::conjugacy::{
    check_homeomorphism, conjugacy_residual, solve_conjugacy, ConjugacyResult, HomeoCertificate,
    SolverConfig,
};
use hyperstab::field::DiscreteVectorField;
use hyperstab::geometry::{dist, exp_point, Grid, ManifoldKind, TangentVector};
use hyperstab::io::{fmt_f64, write_csv, write_pgm16};
use hyperstab::norms::{NormReport, PairSet};
use hyperstab::rightinverse::{
    decompose, fitted_rate, measure_decay, measure_holder_growth, ComponentProjectors,
    RightInverseReport, SeriesRightInverse,
};
use hyperstab::splitting::{
    solve_invariant_section, splitting_angle, InvariantSplittingResult, ReferenceSplitting,
    SplittingSection,
};
use std::path::Path;

fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Other(format!("create {dir:?}: {e}")))
}

fn write_manifest(resolved: &Resolved, dir: &Path) -> CliResult<()> {
    let text = serde_json::to_string_pretty(&resolved.manifest())
        .map_err(|e| CliError::Other(e.to_string()))?;
    std::fs::write(dir.join("manifest.json"), text + "\n")
        .map_err(|e| CliError::Other(e.to_string()))?;
    Ok(())
}

fn build_pairs(resolved: &Resolved, map_for_df: &hyperstab::systems::ModelMap) -> CliResult<PairSet> {
    Ok(PairSet::build(
        map_for_df,
        resolved.grid,
        resolved.constants.alpha,
        resolved.window,
        resolved.config.pair_budget,
        resolved.config.seed,
    )?)
}

pub struct SplittingOutcome {
    pub result: InvariantSplittingResult,
    pub angle: f64,
    pub summary: Vec<u8>,
}

pub fn run_splitting(resolved: &Resolved, dir: &Path) -> CliResult<SplittingOutcome> {
    if resolved.grid.kind != ManifoldKind::Torus2 {
        return Err(CliError::config("splitting requires a torus model"));
    }
    let gc = resolved
        .graph_constants
        .as_ref()
        .ok_or_else(|| CliError::config("graph-transform constants unavailable"))?;
    ensure_dir(dir)?;
    write_manifest(resolved, dir)?;

    let m = &resolved.map;
    let reference = ReferenceSplitting::from_linear_part(m)?;
    let pairs = build_pairs(resolved, m)?;
    let tau0 = SplittingSection::zero(resolved.grid, gc.r);
    let result = solve_invariant_section(
        m,
        &reference,
        &tau0,
        resolved.config.splitting.tol,
        resolved.config.splitting.max_iter,
        Some(&pairs),
    )?;
    let angle = splitting_angle(&reference, &result);

    let grid = resolved.grid;
    let res = grid.resolution;
    for (name, section) in [("section_u", &result.section_u), ("section_s", &result.section_s)] {
        write_csv(
            &dir.join(format!("{name}.csv")),
            "node,x0,x1,tau",
            &section_to_rows(&grid, &section.field),
        )?;
        write_pgm16(&dir.join(format!("{name}.pgm")), res, res, &section.field.values)?;
    }

    let header = "resolution,iterations,max_ratio,residual,k_hat,angle,lambda3_sq";
    let row = vec![
        res.to_string(),
        result.iterations.to_string(),
        fmt_f64(result.max_ratio),
        fmt_f64(result.residual),
        fmt_f64(result.k_hat.unwrap_or(f64::NAN)),
        fmt_f64(angle),
        fmt_f64(gc.lambda3 * gc.lambda3),
    ];
    write_csv(&dir.join("summary.csv"), header, &[row])?;
    let summary = std::fs::read(dir.join("summary.csv")).map_err(|e| CliError::Other(e.to_string()))?;
    Ok(SplittingOutcome { result, angle, summary })
}

pub struct ConjugacyOutcome {
    pub result: ConjugacyResult,
    pub certificate: HomeoCertificate,
    pub oracle_sup_error: Option<f64>,
    pub summary: Vec<u8>,
}

/// Build the series right inverse at the base map. With `use_g_splitting`
/// the component projectors come from the solved invariant splitting of the
/// target map instead of the base eigensplitting.
fn build_right_inverse(resolved: &Resolved, g_splitting: bool) -> CliResult<SeriesRightInverse> {
    let f = resolved.base_map.clone();
    let grid = resolved.grid;
    let (projectors, partition) =
        default_projector_partition(&f, &grid, &resolved.config)?;
    let projectors = if g_splitting && grid.kind == ManifoldKind::Torus2 {
        let gc = resolved
            .graph_constants
            .as_ref()
            .ok_or_else(|| CliError::config("graph-transform constants unavailable"))?;
        let reference = ReferenceSplitting::from_linear_part(&resolved.map)?;
        let tau0 = SplittingSection::zero(grid, gc.r);
        let solved = solve_invariant_section(
            &resolved.map,
            &reference,
            &tau0,
            resolved.config.splitting.tol,
            resolved.config.splitting.max_iter,
            None,
        )?;
        ComponentProjectors::from_splitting_result(&reference, &solved)
    } else {
        projectors
    };
    Ok(SeriesRightInverse::new(f, grid, resolved.budget, projectors, partition)?)
}

pub fn run_conjugacy(resolved: &Resolved, dir: &Path) -> CliResult<ConjugacyOutcome> {
    ensure_dir(dir)?;
    write_manifest(resolved, dir)?;
    let f = resolved.base_map.clone();
    let g = resolved.map.clone();
    let grid = resolved.grid;
    let j = build_right_inverse(resolved, resolved.config.solver.use_g_splitting)?;
    let pairs = build_pairs(resolved, &f)?;
    let s = resolved.config.solver;
    let cfg = SolverConfig {
        tol: s.tol,
        max_iter: s.max_iter,
        r_ball: s.r_ball,
        eps_ball: s.eps_ball,
    };
    let result = solve_conjugacy(&g, &j, &cfg, &pairs)?;
    let certificate = check_homeomorphism(&result, &f);

    // oracle comparison against the known conjugating diffeo
    let oracle_sup_error = oracle_diffeo(&resolved.config.model).map(|phi| {
        let mut sup: f64 = 0.0;
        for i in 0..grid.node_count() {
            let x = grid.point(i);
            let hx = exp_point(&x, &result.eta.values[i]).expect("eta inside chart");
            sup = sup.max(dist(&hx, &phi.apply(&x), &f.frame));
        }
        sup
    });

    // artifacts
    let res = grid.resolution;
    let u: Vec<f64> = result.eta.values.iter().map(|v| v.c[0]).collect();
    match grid.kind {
        ManifoldKind::Torus2 => {
            let v: Vec<f64> = result.eta.values.iter().map(|v| v.c[1]).collect();
            write_pgm16(&dir.join("eta_u.pgm"), res, res, &u)?;
            write_pgm16(&dir.join("eta_v.pgm"), res, res, &v)?;
        }
        ManifoldKind::Circle => {
            write_pgm16(&dir.join("eta_u.pgm"), res, 1, &u)?;
        }
    }
    let trace_rows: Vec<Vec<String>> = result
        .trace
        .iter()
        .map(|t| {
            vec![
                t.iteration.to_string(),
                fmt_f64(t.update),
                if t.ratio.is_finite() { fmt_f64(t.ratio) } else { String::new() },
                fmt_f64(t.c0),
                fmt_f64(t.combined),
            ]
        })
        .collect();
    write_csv(&dir.join("trace.csv"), "iteration,update,ratio,c0,combined", &trace_rows)?;

    let cert_text = format!(
        "certificate: {}\nL_f(eta) = {} (<= 0.5: {})\ninjective on grid: {}{}\ndegree identity: {} (winding {:?})\n",
        if certificate.positive { "positive" } else { "negative" },
        fmt_f64(certificate.df_lip),
        certificate.df_lip_ok,
        certificate.injective,
        certificate
            .injectivity_witness
            .map(|(a, b)| format!(" (witness nodes {a}, {b})"))
            .unwrap_or_default(),
        certificate.degree_ok,
        certificate.winding,
    );
    std::fs::write(dir.join("certificate.txt"), cert_text)
        .map_err(|e| CliError::Other(e.to_string()))?;

    let header = "resolution,alpha,W,iterations,residual,fixed_point_defect,ball_confinement,eps_ball,j_norm_c0,j_norm_combined,eta_c0,eta_holder,eta_df_lip,eta_combined,certificate,oracle_sup_error";
    let row = vec![
        res.to_string(),
        fmt_f64(resolved.constants.alpha),
        resolved.window.w.to_string(),
        result.iterations.to_string(),
        fmt_f64(result.residual),
        fmt_f64(result.fixed_point_defect),
        fmt_f64(result.ball_confinement),
        fmt_f64(cfg.eps_ball),
        fmt_f64(result.j_norm_c0),
        fmt_f64(result.j_norm_combined),
        fmt_f64(result.norms.c0),
        fmt_f64(result.norms.holder),
        fmt_f64(result.norms.df_lip),
        fmt_f64(result.norms.combined),
        certificate.positive.to_string(),
        oracle_sup_error.map(fmt_f64).unwrap_or_default(),
    ];
    write_csv(&dir.join("result.csv"), header, &[row])?;
    let summary = std::fs::read(dir.join("result.csv")).map_err(|e| CliError::Other(e.to_string()))?;

    Ok(ConjugacyOutcome { result, certificate, oracle_sup_error, summary })
}

pub struct InverseCheckOutcome {
    pub reports: Vec<RightInverseReport>,
    pub decay_norms: Vec<f64>,
    pub decay_rate: f64,
    pub summary: Vec<u8>,
}

pub fn run_inverse_check(resolved: &Resolved, dir: &Path) -> CliResult<InverseCheckOutcome> {
    ensure_dir(dir)?;
    write_manifest(resolved, dir)?;
    let m = resolved.map.clone();
    let grid = resolved.grid;

    // J of the configured map itself; nonlinear torus maps project along
    // their own solved splitting
    let needs_solved_splitting = grid.kind == ManifoldKind::Torus2
        && m.node_permutation(&grid).is_none();
    let (projectors, partition) = if needs_solved_splitting {
        let gc = resolved
            .graph_constants
            .as_ref()
            .ok_or_else(|| CliError::config("graph-transform constants unavailable"))?;
        let reference = ReferenceSplitting::from_linear_part(&m)?;
        let tau0 = SplittingSection::zero(grid, gc.r);
        let solved = solve_invariant_section(
            &m,
            &reference,
            &tau0,
            resolved.config.splitting.tol,
            resolved.config.splitting.max_iter,
            None,
        )?;
        (
            ComponentProjectors::from_splitting_result(&reference, &solved),
            hyperstab::rightinverse::PartitionOfUnity::single(grid),
        )
    } else {
        default_projector_partition(&m, &grid, &resolved.config)?
    };
    let j = SeriesRightInverse::new(m.clone(), grid, resolved.budget, projectors.clone(), partition.clone())?;

    let fields: Vec<DiscreteVectorField> = (0..10)
        .map(|k| DiscreteVectorField::random_trig(grid, m.frame, resolved.config.seed + k))
        .collect();
    let reports = j.verify_batch(&fields)?;

    let rows: Vec<Vec<String>> = reports
        .iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                i.to_string(),
                fmt_f64(r.eta_c0),
                fmt_f64(r.residual_c0),
                fmt_f64(r.tail_bound),
                fmt_f64(r.ratio_to_tail),
            ]
        })
        .collect();
    write_csv(&dir.join("residuals.csv"), RightInverseReport::csv_header(), &rows)?;

    // decay and Hoelder growth of the first stable component
    let parts = decompose(&fields[0], &projectors, &partition)?;
    let stable = parts
        .iter()
        .map(|p| &p.stable)
        .max_by(|a, b| a.c0_norm().total_cmp(&b.c0_norm()))
        .expect("at least one component");
    let n_max = 14;
    let decay_norms = measure_decay(&m, stable, n_max)?;
    let decay_rate = fitted_rate(&decay_norms, n_max / 2, n_max);
    let pairs = build_pairs(resolved, &m)?;
    let growth = measure_holder_growth(
        &m,
        stable,
        n_max,
        &resolved.constants,
        &resolved.budget,
        &projectors,
        &pairs,
    )?;
    let decay_rows: Vec<Vec<String>> = decay_norms
        .iter()
        .zip(&growth)
        .enumerate()
        .map(|(n, (c0, (holder, bound)))| {
            vec![n.to_string(), fmt_f64(*c0), fmt_f64(*holder), fmt_f64(*bound)]
        })
        .collect();
    write_csv(&dir.join("decay.csv"), "n,c0,holder,bound", &decay_rows)?;

    let allowed = resolved.budget.rho * 1.05;
    if decay_rate.is_finite() && decay_rate > allowed {
        return Err(CliError::NonDecay(format!(
            "measured stable decay rate {decay_rate:.4} exceeds rho*1.05 = {allowed:.4}"
        )));
    }

    let summary =
        std::fs::read(dir.join("residuals.csv")).map_err(|e| CliError::Other(e.to_string()))?;
    Ok(InverseCheckOutcome { reports, decay_norms, decay_rate, summary })
}

pub struct NormsOutcome {
    pub report: NormReport,
    pub summary: Vec<u8>,
}

/// Parse a field file: CSV with header `i,j,u,v` (torus) or `i,u` (circle),
/// exactly one row per grid node.
pub fn parse_field_file(
    text: &str,
    grid: Grid,
    frame: hyperstab::geometry::MetricFrame,
) -> CliResult<DiscreteVectorField> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| CliError::parse("empty field file"))?;
    let expect_header = match grid.kind {
        ManifoldKind::Circle => "i,u",
        ManifoldKind::Torus2 => "i,j,u,v",
    };
    if header.trim() != expect_header {
        return Err(CliError::parse(format!(
            "field file header {header:?}, expected {expect_header:?}"
        )));
    }
    let mut values = vec![None; grid.node_count()];
    let res = grid.resolution;
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        let bad = |msg: &str| CliError::parse(format!("field file line {}: {msg}", lineno + 2));
        match grid.kind {
            ManifoldKind::Circle => {
                if cols.len() != 2 {
                    return Err(bad("expected 2 columns"));
                }
                let i: usize = cols[0].trim().parse().map_err(|_| bad("bad index"))?;
                let u: f64 = cols[1].trim().parse().map_err(|_| bad("bad value"))?;
                if i >= res {
                    return Err(bad("index out of range"));
                }
                values[i] = Some(TangentVector::new(ManifoldKind::Circle, [u, 0.0]));
            }
            ManifoldKind::Torus2 => {
                if cols.len() != 4 {
                    return Err(bad("expected 4 columns"));
                }
                let i: usize = cols[0].trim().parse().map_err(|_| bad("bad index"))?;
                let jj: usize = cols[1].trim().parse().map_err(|_| bad("bad index"))?;
                let u: f64 = cols[2].trim().parse().map_err(|_| bad("bad value"))?;
                let v: f64 = cols[3].trim().parse().map_err(|_| bad("bad value"))?;
                if i >= res || jj >= res {
                    return Err(bad("index out of range"));
                }
                values[grid.index(i, jj)] =
                    Some(TangentVector::new(ManifoldKind::Torus2, [u, v]));
            }
        }
    }
    let values: Vec<TangentVector> = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| CliError::parse(format!("field file misses node {i}"))))
        .collect::<CliResult<_>>()?;
    for (i, v) in values.iter().enumerate() {
        if !v.c[0].is_finite() || !v.c[1].is_finite() {
            return Err(CliError::parse(format!("non-finite value at node {i}")));
        }
    }
    Ok(DiscreteVectorField { grid, frame, values })
}

pub fn run_norms(resolved: &Resolved, field_path: &Path, dir: &Path) -> CliResult<NormsOutcome> {
    ensure_dir(dir)?;
    write_manifest(resolved, dir)?;
    let text = std::fs::read_to_string(field_path)
        .map_err(|e| CliError::parse(format!("read {field_path:?}: {e}")))?;
    let field = parse_field_file(&text, resolved.grid, resolved.map.frame)?;
    let pairs = build_pairs(resolved, &resolved.map)?;
    let report = pairs.field_norms(&field);
    write_csv(
        &dir.join("report.csv"),
        NormReport::csv_header(),
        &[report.csv_row().split(',').map(String::from).collect()],
    )?;
    let summary = std::fs::read(dir.join("report.csv")).map_err(|e| CliError::Other(e.to_string()))?;
    Ok(NormsOutcome { report, summary })
}

pub struct SweepOutcome {
    pub rows: usize,
    pub failures: usize,
    pub summary: Vec<u8>,
}

pub fn run_sweep(spec: &SweepSpec, dir: &Path) -> CliResult<SweepOutcome> {
    if spec.values.is_empty() {
        return Err(CliError::config("sweep value list is empty"));
    }
    ensure_dir(dir)?;
    let spec_echo = serde_json::to_string_pretty(spec).map_err(|e| CliError::Other(e.to_string()))?;
    std::fs::write(dir.join("sweep.json"), spec_echo + "\n")
        .map_err(|e| CliError::Other(e.to_string()))?;

    let header = "parameter,value,status,iterations,residual,eta_c0,l_alpha,alpha_admissible,k_hat,max_ratio";
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut failures = 0usize;

    for (i, &value) in spec.values.iter().enumerate() {
        let mut cfg = spec.base.clone();
        match spec.parameter.as_str() {
            "eps_p" => cfg.model = with_amplitude(&cfg.model, value)?,
            "resolution" => {
                cfg.resolution = value as usize;
            }
            "alpha" => cfg.alpha = AutoOr::Value(value),
            other => {
                return Err(CliError::config(format!(
                    "unknown sweep parameter {other:?} (expected eps_p, resolution or alpha)"
                )))
            }
        }
        let sub = dir.join(format!("value_{i}"));
        let outcome = run_sweep_case(&cfg, &spec.target, &sub);
        let mut row = vec![spec.parameter.clone(), fmt_f64(value)];
        match outcome {
            Ok(cells) => {
                row.push("ok".to_string());
                row.extend(cells);
            }
            Err(e) => {
                failures += 1;
                row.push(e.diagnostic().replace(',', ";"));
                row.extend(std::iter::repeat(String::new()).take(7));
            }
        }
        rows.push(row);
    }
    write_csv(&dir.join("summary.csv"), header, &rows)?;
    let summary = std::fs::read(dir.join("summary.csv")).map_err(|e| CliError::Other(e.to_string()))?;
    Ok(SweepOutcome { rows: rows.len(), failures, summary })
}

fn run_sweep_case(cfg: &ExperimentConfig, target: &str, dir: &Path) -> CliResult<Vec<String>> {
    let resolved = Resolved::from_config(cfg)?;
    match target {
        "conjugacy" => {
            let out = run_conjugacy(&resolved, dir)?;
            let admissible = resolved.constants.lambda
                * resolved.constants.l.powf(resolved.constants.alpha)
                < 1.0;
            Ok(vec![
                out.result.iterations.to_string(),
                fmt_f64(out.result.residual),
                fmt_f64(out.result.norms.c0),
                fmt_f64(out.result.norms.holder),
                admissible.to_string(),
                String::new(),
                fmt_f64(out.result.ratios.iter().copied().fold(0.0, f64::max)),
            ])
        }
        "splitting" => {
            let out = run_splitting(&resolved, dir)?;
            Ok(vec![
                out.result.iterations.to_string(),
                fmt_f64(out.result.residual),
                String::new(),
                String::new(),
                String::new(),
                fmt_f64(out.result.k_hat.unwrap_or(f64::NAN)),
                fmt_f64(out.result.max_ratio),
            ])
        }
        "inverse-check" => {
            let out = run_inverse_check(&resolved, dir)?;
            let worst = out
                .reports
                .iter()
                .map(|r| r.residual_c0)
                .fold(0.0f64, f64::max);
            Ok(vec![
                String::new(),
                fmt_f64(worst),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                fmt_f64(out.decay_rate),
            ])
        }
        other => Err(CliError::config(format!(
            "unknown sweep target {other:?} (expected conjugacy, splitting or inverse-check)"
        ))),
    }
}

/// Load, resolve and dispatch one experiment config from disk.
pub fn load_config(path: &Path) -> CliResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::parse(format!("read {path:?}: {e}")))?;
    parse_experiment(&text)
}

/// Trivial-case marker used by the conjugacy pipeline reporting.
pub fn target_is_trivial(cfg: &ExperimentConfig) -> bool {
    is_trivial_target(&cfg.model)
}

/// Residual of an externally supplied eta against the configured pair
/// (f, g); used by tests.
pub fn external_residual(resolved: &Resolved, eta: &DiscreteVectorField) -> f64 {
    conjugacy_residual(&resolved.map, &resolved.base_map, eta)
}
