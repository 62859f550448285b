//! Ready-made experiment configurations for the shipped model families.

use crate::config::{
    AutoOr, DiffeoSpec, ExperimentConfig, FrameSpec, ModelSpec, SeriesSpec, SolverSpec,
    SplittingSpec, TermSpec,
};

pub const CAT_MATRIX: [[i64; 2]; 2] = [[2, 1], [1, 1]];

/// The symmetric off-diagonal perturbation shape used across the examples:
/// (sin 2 pi x2, sin 2 pi x1).
pub fn cross_terms() -> Vec<TermSpec> {
    vec![
        TermSpec { axis: 0, wave: [0, 1], sin: 1.0, cos: 0.0 },
        TermSpec { axis: 1, wave: [1, 0], sin: 1.0, cos: 0.0 },
    ]
}

/// A phased variant whose fixed point moves off the origin.
pub fn phased_terms() -> Vec<TermSpec> {
    vec![
        TermSpec { axis: 0, wave: [0, 1], sin: 0.8, cos: 0.6 },
        TermSpec { axis: 1, wave: [1, 0], sin: 0.7, cos: -0.5 },
    ]
}

fn base(model: ModelSpec, resolution: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        model,
        frame: FrameSpec::Eigen,
        resolution,
        alpha: AutoOr::Value(0.5),
        window: Default::default(),
        pair_budget: 2000,
        partition_band: 0.12,
        graph_constants: Default::default(),
        series: Default::default(),
        solver: SolverSpec::default(),
        splitting: SplittingSpec::default(),
        seed,
        out_dir: None,
    }
}

/// The exact cat map measured in its eigenframe.
pub fn cat_eigen(resolution: usize, n_trunc: usize, seed: u64) -> ExperimentConfig {
    let mut cfg = base(ModelSpec::LinearToral { matrix: CAT_MATRIX }, resolution, seed);
    cfg.series = SeriesSpec::Truncation { n_trunc };
    cfg
}

/// Trigonometric perturbation of the cat map.
pub fn perturbed_cat(
    amplitude: f64,
    resolution: usize,
    seed: u64,
    phased: bool,
) -> ExperimentConfig {
    let terms = if phased { phased_terms() } else { cross_terms() };
    let mut cfg = base(
        ModelSpec::PerturbedToral { matrix: CAT_MATRIX, amplitude, terms },
        resolution,
        seed,
    );
    cfg.series = SeriesSpec::Truncation { n_trunc: 40 };
    cfg
}

/// Oracle target phi . cat . phi^{-1} with a known conjugating diffeo.
pub fn conjugated_cat(amplitude: f64, resolution: usize, seed: u64) -> ExperimentConfig {
    let mut cfg = base(
        ModelSpec::Conjugated {
            base: Box::new(ModelSpec::LinearToral { matrix: CAT_MATRIX }),
            phi: DiffeoSpec { amplitude, terms: cross_terms() },
        },
        resolution,
        seed,
    );
    cfg.series = SeriesSpec::Truncation { n_trunc: 40 };
    cfg
}

/// Morse-Smale circle map with a two-component partition of unity.
pub fn morse_smale(
    amplitude: f64,
    resolution: usize,
    n_trunc: usize,
    seed: u64,
) -> ExperimentConfig {
    let mut cfg = base(ModelSpec::MorseSmaleCircle { amplitude }, resolution, seed);
    cfg.frame = FrameSpec::Identity;
    cfg.series = SeriesSpec::Truncation { n_trunc };
    cfg
}
