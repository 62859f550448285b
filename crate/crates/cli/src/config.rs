//! Experiment configuration: one JSON document per run, with "auto" slots
//! for the derived constants. Resolution of a config validates every
//! module-level invariant before anything runs and produces the manifest
//! that is echoed into each output directory.

use crate::error::{CliError, CliResult};
use hyperstab::field::ScalarField;
use hyperstab::geometry::{Grid, ManifoldKind, MetricFrame};
use hyperstab::norms::DfWindow;
use hyperstab::rightinverse::{ComponentProjectors, PartitionOfUnity, SeriesBudget};
use hyperstab::splitting::{GraphTransformConstants, ReferenceSplitting};
use hyperstab::systems::{
    BasicSetData, ComponentSet, HyperbolicityConstants, ModelMap, TrigDiffeo, TrigSeries,
    TrigTerm,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum AutoTag {
    Auto,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum AutoOr<T> {
    Value(T),
    Auto(AutoTag),
}

impl<T> Default for AutoOr<T> {
    fn default() -> Self {
        AutoOr::Auto(AutoTag::Auto)
    }
}

impl<T: Copy> AutoOr<T> {
    pub fn value(&self) -> Option<T> {
        match self {
            AutoOr::Value(v) => Some(*v),
            AutoOr::Auto(_) => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default, PartialEq)]
pub struct TermSpec {
    pub axis: usize,
    pub wave: [i32; 2],
    #[serde(default)]
    pub sin: f64,
    #[serde(default)]
    pub cos: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DiffeoSpec {
    pub amplitude: f64,
    pub terms: Vec<TermSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    LinearToral {
        matrix: [[i64; 2]; 2],
    },
    PerturbedToral {
        matrix: [[i64; 2]; 2],
        amplitude: f64,
        terms: Vec<TermSpec>,
    },
    MorseSmaleCircle {
        amplitude: f64,
    },
    Conjugated {
        base: Box<ModelSpec>,
        phi: DiffeoSpec,
    },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Default)]
#[serde(rename_all = "snake_case")]
pub enum FrameSpec {
    Identity,
    #[default]
    Eigen,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct GraphConstantsExplicit {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub r: f64,
    pub eps_graph: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum GraphConstantsSpec {
    Explicit(GraphConstantsExplicit),
    Auto(AutoTag),
}

impl Default for GraphConstantsSpec {
    fn default() -> Self {
        GraphConstantsSpec::Auto(AutoTag::Auto)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum SeriesSpec {
    Truncation { n_trunc: usize },
    Tolerance { target_residual: f64 },
    Auto(AutoTag),
}

impl Default for SeriesSpec {
    fn default() -> Self {
        SeriesSpec::Auto(AutoTag::Auto)
    }
}

fn default_tol() -> f64 {
    1e-10
}
fn default_max_iter() -> usize {
    200
}
fn default_r_ball() -> f64 {
    0.24
}
fn default_eps_ball() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct SolverSpec {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_r_ball")]
    pub r_ball: f64,
    #[serde(default = "default_eps_ball")]
    pub eps_ball: f64,
    #[serde(default)]
    pub use_g_splitting: bool,
}

impl Default for SolverSpec {
    fn default() -> Self {
        SolverSpec {
            tol: default_tol(),
            max_iter: default_max_iter(),
            r_ball: default_r_ball(),
            eps_ball: default_eps_ball(),
            use_g_splitting: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct SplittingSpec {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

impl Default for SplittingSpec {
    fn default() -> Self {
        SplittingSpec { tol: default_tol(), max_iter: default_max_iter() }
    }
}

fn default_pair_budget() -> usize {
    2000
}
fn default_partition_band() -> f64 {
    0.12
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub frame: FrameSpec,
    pub resolution: usize,
    #[serde(default)]
    pub alpha: AutoOr<f64>,
    #[serde(default, rename = "W")]
    pub window: AutoOr<u32>,
    #[serde(default = "default_pair_budget")]
    pub pair_budget: usize,
    #[serde(default = "default_partition_band")]
    pub partition_band: f64,
    #[serde(default)]
    pub graph_constants: GraphConstantsSpec,
    #[serde(default)]
    pub series: SeriesSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub splitting: SplittingSpec,
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SweepSpec {
    /// "eps_p", "resolution" or "alpha".
    pub parameter: String,
    pub values: Vec<f64>,
    /// Pipeline to drive: "conjugacy", "splitting", "inverse-check" or "norms".
    pub target: String,
    pub base: ExperimentConfig,
}

fn build_series(spec: &ModelSpec) -> TrigSeries {
    match spec {
        ModelSpec::PerturbedToral { terms, .. } => TrigSeries::new(
            terms
                .iter()
                .map(|t| TrigTerm {
                    axis: t.axis,
                    wave: t.wave,
                    sin_coeff: t.sin,
                    cos_coeff: t.cos,
                })
                .collect(),
        ),
        _ => TrigSeries::default(),
    }
}

fn build_model(spec: &ModelSpec, frame: MetricFrame) -> CliResult<ModelMap> {
    let m = match spec {
        ModelSpec::LinearToral { matrix } => ModelMap::linear_toral(*matrix, frame)?,
        ModelSpec::PerturbedToral { matrix, amplitude, .. } => {
            ModelMap::perturbed_toral(*matrix, build_series(spec), *amplitude, frame)?
        }
        ModelSpec::MorseSmaleCircle { amplitude } => {
            ModelMap::morse_smale_circle(*amplitude, MetricFrame::identity(ManifoldKind::Circle))?
        }
        ModelSpec::Conjugated { base, phi } => {
            let base_map = build_model(base, frame)?;
            let diffeo = TrigDiffeo {
                series: TrigSeries::new(
                    phi.terms
                        .iter()
                        .map(|t| TrigTerm {
                            axis: t.axis,
                            wave: t.wave,
                            sin_coeff: t.sin,
                            cos_coeff: t.cos,
                        })
                        .collect(),
                ),
                amplitude: phi.amplitude,
            };
            ModelMap::make_conjugated(base_map, diffeo)?
        }
    };
    Ok(m)
}

/// The base (unperturbed) map the solver linearizes at.
fn base_spec(spec: &ModelSpec) -> ModelSpec {
    match spec {
        ModelSpec::PerturbedToral { matrix, .. } => ModelSpec::LinearToral { matrix: *matrix },
        ModelSpec::Conjugated { base, .. } => base_spec(base),
        other => other.clone(),
    }
}

/// Everything a pipeline needs, with all "auto" slots expanded.
pub struct Resolved {
    pub config: ExperimentConfig,
    pub map: ModelMap,
    pub base_map: ModelMap,
    pub grid: Grid,
    pub constants: HyperbolicityConstants,
    pub window: DfWindow,
    pub basic: BasicSetData,
    pub budget: SeriesBudget,
    pub kappa: f64,
    pub graph_constants: Option<GraphTransformConstants>,
}

impl Resolved {
    pub fn from_config(config: &ExperimentConfig) -> CliResult<Resolved> {
        let manifold = match &config.model {
            ModelSpec::MorseSmaleCircle { .. } => ManifoldKind::Circle,
            _ => ManifoldKind::Torus2,
        };
        let grid = Grid::new(manifold, config.resolution)?;

        // frame: identity, or the eigenbasis of the linear part
        let identity = MetricFrame::identity(manifold);
        let map0 = build_model(&config.model, identity)?;
        let map = match (config.frame, manifold) {
            (FrameSpec::Identity, _) | (_, ManifoldKind::Circle) => map0,
            (FrameSpec::Eigen, ManifoldKind::Torus2) => map0.with_eigenframe()?,
        };
        let base_map = ModelMap { kind: build_model(&base_spec(&config.model), identity)?.kind, frame: map.frame };

        map.validate_diffeomorphism(&grid)?;
        let mut constants = map.hyperbolicity_constants()?;
        if let Some(alpha) = config.alpha.value() {
            constants = constants.with_alpha(alpha)?;
        }
        let window = match config.window.value() {
            Some(w) => {
                if w < 1 {
                    return Err(CliError::config("window W must be >= 1"));
                }
                DfWindow::new(w)
            }
            None => DfWindow::auto(map.frame.diameter(), grid.spacing(), constants.lambda),
        };

        let basic = map.basic_sets();
        let projectors = default_projector_partition(&base_map, &grid, config)?.0;
        let kappa = projectors.max_projector_norm(&map, &grid) * 1.01;
        let budget = match config.series {
            SeriesSpec::Truncation { n_trunc } => {
                SeriesBudget::auto(&base_map, &constants, kappa, &base_map.basic_sets(), n_trunc)?
            }
            SeriesSpec::Tolerance { target_residual } => {
                SeriesBudget::auto(&base_map, &constants, kappa, &base_map.basic_sets(), 1)?
                    .with_tail_below(target_residual)?
            }
            SeriesSpec::Auto(_) => {
                SeriesBudget::auto(&base_map, &constants, kappa, &base_map.basic_sets(), 1)?
                    .with_tail_below(config.solver.tol * 1e-2)?
            }
        };

        let graph_constants = if manifold == ManifoldKind::Torus2 {
            let reference = ReferenceSplitting::from_linear_part(&map)?;
            let gc = match config.graph_constants {
                GraphConstantsSpec::Auto(_) => {
                    GraphTransformConstants::auto(&map, &reference, &constants, grid, config.seed)?
                }
                GraphConstantsSpec::Explicit(e) => {
                    let auto =
                        GraphTransformConstants::auto(&map, &reference, &constants, grid, config.seed)?;
                    let gc = GraphTransformConstants {
                        lambda1: e.lambda1,
                        lambda2: e.lambda2,
                        lambda3: e.lambda3,
                        r: e.r,
                        eps_graph: e.eps_graph,
                        k_modulus: auto.k_modulus,
                        c_gamma: auto.c_gamma,
                    };
                    gc.validate(&constants)?;
                    gc
                }
            };
            Some(gc)
        } else {
            None
        };

        Ok(Resolved {
            config: config.clone(),
            map,
            base_map,
            grid,
            constants,
            window,
            basic,
            budget,
            kappa,
            graph_constants,
        })
    }

    /// Fully-resolved manifest echoed into every output directory.
    pub fn manifest(&self) -> serde_json::Value {
        let c = &self.constants;
        let b = &self.budget;
        let mut v = serde_json::json!({
            "config": self.config,
            "resolved": {
                "resolution": self.grid.resolution,
                "manifold": match self.grid.kind { ManifoldKind::Circle => "circle", ManifoldKind::Torus2 => "torus2" },
                "lambda": c.lambda,
                "l": c.l,
                "alpha": c.alpha,
                "lambda_prime": c.lambda_prime,
                "W": self.window.w,
                "kappa": self.kappa,
                "series": { "N_trunc": b.n_trunc, "rho": b.rho, "K_decay": b.k_decay, "tail_bound": b.tail_bound },
                "components": self.basic.components.len(),
            }
        });
        if let Some(gc) = &self.graph_constants {
            v["resolved"]["graph_constants"] = serde_json::json!({
                "lambda1": gc.lambda1,
                "lambda2": gc.lambda2,
                "lambda3": gc.lambda3,
                "r": gc.r,
                "eps_graph": gc.eps_graph,
                "K": gc.k_modulus,
                "C": gc.c_gamma,
            });
        }
        v
    }
}

/// Natural projectors and partition for a map: constant eigensplitting for
/// toral maps (one component), rank patterns with a two-bump partition for
/// the Morse-Smale circle.
pub fn default_projector_partition(
    m: &ModelMap,
    grid: &Grid,
    config: &ExperimentConfig,
) -> CliResult<(ComponentProjectors, PartitionOfUnity)> {
    match m.manifold() {
        ManifoldKind::Torus2 => {
            let reference = ReferenceSplitting::from_linear_part(m)?;
            Ok((
                ComponentProjectors::anosov_constant(&reference),
                PartitionOfUnity::single(*grid),
            ))
        }
        ManifoldKind::Circle => {
            let basic = m.basic_sets();
            if basic.components.len() != 2 {
                return Err(CliError::config(format!(
                    "expected two circle components, found {}",
                    basic.components.len()
                )));
            }
            let at = |i: usize| -> CliResult<f64> {
                match &basic.components[i].set {
                    ComponentSet::Finite(p) => Ok(p[0].c[0]),
                    _ => Err(CliError::config("circle component is not a point set")),
                }
            };
            let partition = PartitionOfUnity::circle_pair(
                *grid,
                at(0)?,
                at(1)?,
                config.partition_band,
            )?;
            Ok((ComponentProjectors::morse_smale(&basic), partition))
        }
    }
}

/// Per-node scalar samples of a section for PGM emission.
pub fn section_to_rows(grid: &Grid, field: &ScalarField) -> Vec<Vec<String>> {
    use hyperstab::io::fmt_f64;
    (0..grid.node_count())
        .map(|i| {
            let p = grid.point(i);
            match grid.kind {
                ManifoldKind::Circle => vec![i.to_string(), fmt_f64(p.c[0]), fmt_f64(field.values[i])],
                ManifoldKind::Torus2 => vec![
                    i.to_string(),
                    fmt_f64(p.c[0]),
                    fmt_f64(p.c[1]),
                    fmt_f64(field.values[i]),
                ],
            }
        })
        .collect()
}

/// Map kind helper for sweeps: set the perturbation amplitude.
pub fn with_amplitude(spec: &ModelSpec, amplitude: f64) -> CliResult<ModelSpec> {
    match spec {
        ModelSpec::PerturbedToral { matrix, terms, .. } => Ok(ModelSpec::PerturbedToral {
            matrix: *matrix,
            amplitude,
            terms: terms.clone(),
        }),
        ModelSpec::Conjugated { base, phi } => Ok(ModelSpec::Conjugated {
            base: base.clone(),
            phi: DiffeoSpec { amplitude, terms: phi.terms.clone() },
        }),
        ModelSpec::MorseSmaleCircle { .. } => Ok(ModelSpec::MorseSmaleCircle { amplitude }),
        ModelSpec::LinearToral { .. } => {
            Err(CliError::config("eps_p sweep needs a perturbed or conjugated model"))
        }
    }
}

pub fn is_conjugated(spec: &ModelSpec) -> bool {
    matches!(spec, ModelSpec::Conjugated { .. })
}

/// The known conjugating diffeo of a conjugated model, for oracle checks.
pub fn oracle_diffeo(spec: &ModelSpec) -> Option<TrigDiffeo> {
    match spec {
        ModelSpec::Conjugated { phi, .. } => Some(TrigDiffeo {
            series: TrigSeries::new(
                phi.terms
                    .iter()
                    .map(|t| TrigTerm {
                        axis: t.axis,
                        wave: t.wave,
                        sin_coeff: t.sin,
                        cos_coeff: t.cos,
                    })
                    .collect(),
            ),
            amplitude: phi.amplitude,
        }),
        _ => None,
    }
}

/// True when the model is its own base map (g = f).
pub fn is_trivial_target(spec: &ModelSpec) -> bool {
    match spec {
        ModelSpec::LinearToral { .. } | ModelSpec::MorseSmaleCircle { .. } => true,
        ModelSpec::PerturbedToral { amplitude, .. } => *amplitude == 0.0,
        ModelSpec::Conjugated { phi, .. } => phi.amplitude == 0.0,
    }
}

pub fn parse_experiment(text: &str) -> CliResult<ExperimentConfig> {
    serde_json::from_str(text).map_err(|e| CliError::parse(format!("config JSON: {e}")))
}

pub fn parse_sweep(text: &str) -> CliResult<SweepSpec> {
    serde_json::from_str(text).map_err(|e| CliError::parse(format!("sweep JSON: {e}")))
}
