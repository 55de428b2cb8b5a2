//! Built-in model and deformation fixtures.
//!
//! | name | latent space | kernel | signal |
//! |------|--------------|--------|--------|
//! | `bumped-surface-eps` | bumped rectangle in ℝ³, amplitude 0.25 | ε-threshold, radius 0.25 | `f ≡ 1` |
//! | `bumped-surface-gauss` | same surface | Gaussian, bandwidth 0.15 | `f ≡ 1` |
//! | `sbm-constant-degree` | two communities, π = (1/3, 2/3) | blocks (1, 1/3; 1/3, 2/3) | `f ≡ 1` |
//! | `uniform-square-gauss` | uniform on `[0, 1]²` | Gaussian, bandwidth 0.2 | `f ≡ 1` |
//! | `uniform-line-gauss` | uniform on `[0, 1]` | Gaussian, bandwidth 0.2 | `f(x) = x` |
//! | `epsilon-line` | uniform on `[0, 1]` | ε-threshold, radius 0.2 | `f ≡ 1` |
//! | `half-constant` | uniform on `[0, 1]` | `W ≡ 1/2` | `f ≡ 1` |
//! | `complete` | uniform on `[0, 1]` | `W ≡ 1` | `f ≡ 1` |
//!
//! All fixtures are dense (`α = 1`). Declared `c_min` values are lower
//! bounds on the degree function checked by Monte Carlo in the test suite.

use super::{Deformation, Kernel, LatentSpace, NodeDistribution, RandomGraphModel, SignalFunction, Sparsity};
use crate::error::{Error, Result};

pub const MODEL_NAMES: &[&str] = &[
    "bumped-surface-eps",
    "bumped-surface-gauss",
    "sbm-constant-degree",
    "uniform-square-gauss",
    "uniform-line-gauss",
    "epsilon-line",
    "half-constant",
    "complete",
];

pub const DEFORMATION_NAMES: &[&str] = &["translation", "scaling", "gaussian-bump"];

/// Amplitude of the bumped surface.
pub const SURFACE_AMPLITUDE: f64 = 0.25;

fn surface_space() -> Result<LatentSpace> {
    LatentSpace::with_bounds(2, vec![(-0.5, 1.0), (-0.5, 1.0), (-0.5, 0.5)], "bumped rectangle in R^3")
}

fn line_space() -> Result<LatentSpace> {
    LatentSpace::new(1, 1, "unit interval")
}

pub fn model(name: &str) -> Result<RandomGraphModel> {
    let dense = Sparsity::Constant(1.0);
    match name {
        "bumped-surface-eps" => RandomGraphModel::new(
            surface_space()?,
            NodeDistribution::bumped_surface(SURFACE_AMPLITUDE),
            Kernel::epsilon(0.25, 0.08, 1)?,
            SignalFunction::ones(1),
            dense,
        ),
        "bumped-surface-gauss" => RandomGraphModel::new(
            surface_space()?,
            NodeDistribution::bumped_surface(SURFACE_AMPLITUDE),
            Kernel::gaussian(0.15, 0.06)?,
            SignalFunction::ones(1),
            dense,
        ),
        "sbm-constant-degree" => RandomGraphModel::new(
            line_space()?,
            NodeDistribution::finite_mixture(vec![1.0 / 3.0, 2.0 / 3.0], vec![vec![0.25], vec![0.75]])?,
            Kernel::sbm(vec![vec![1.0, 1.0 / 3.0], vec![1.0 / 3.0, 2.0 / 3.0]], vec![0.5], 5.0 / 9.0)?,
            SignalFunction::ones(1),
            dense,
        ),
        "uniform-square-gauss" => RandomGraphModel::new(
            LatentSpace::with_bounds(2, vec![(-0.25, 1.25); 2], "unit square with margin")?
                .with_metric_scale(1.0 / 2f64.sqrt())?,
            NodeDistribution::unit_cube(2),
            Kernel::gaussian(0.2, 0.06)?,
            SignalFunction::ones(1),
            dense,
        ),
        "uniform-line-gauss" => RandomGraphModel::new(
            line_space()?,
            NodeDistribution::unit_cube(1),
            Kernel::gaussian(0.2, 0.2)?,
            SignalFunction::coordinate(0, 1.0),
            dense,
        ),
        "epsilon-line" => RandomGraphModel::new(
            line_space()?,
            NodeDistribution::unit_cube(1),
            Kernel::epsilon(0.2, 0.2, 1)?,
            SignalFunction::ones(1),
            dense,
        ),
        "half-constant" => RandomGraphModel::new(
            line_space()?,
            NodeDistribution::unit_cube(1),
            Kernel::constant(0.5)?,
            SignalFunction::ones(1),
            dense,
        ),
        "complete" => RandomGraphModel::new(
            line_space()?,
            NodeDistribution::unit_cube(1),
            Kernel::constant(1.0)?,
            SignalFunction::ones(1),
            dense,
        ),
        other => Err(Error::config("model", format!("unknown fixture `{other}`; known: {}", MODEL_NAMES.join(", ")))),
    }
}

/// Deformation fixture of amplitude `t` on a `dimension`-dimensional space.
///
/// * `translation`: `τ(x) = t · e₁`.
/// * `scaling`: `τ(x) = t · x`.
/// * `gaussian-bump`: displacement of magnitude `0.3 t` along the last axis,
///   centred at the middle of the unit cube, width 0.2, so that
///   `‖∇τ‖_∞ = 0.3 t / (0.2 √e) ≈ 0.91 t`.
pub fn deformation(name: &str, dimension: usize, t: f64) -> Result<Deformation> {
    match name {
        "translation" => {
            let mut v = vec![0.0; dimension];
            v[0] = 1.0;
            Ok(Deformation::translation(v).with_amplitude(t))
        }
        "scaling" => Ok(Deformation::scaling(dimension, t)),
        "gaussian-bump" => {
            let mut center = vec![0.5; dimension];
            let mut direction = vec![0.0; dimension];
            direction[dimension - 1] = 0.3;
            if dimension == 3 {
                // middle of the bumped surface footprint
                let s = 1.0 / (2.0 + 4.0 * SURFACE_AMPLITUDE * SURFACE_AMPLITUDE).sqrt();
                center = vec![0.5 * s, 0.5 * s, 0.0];
            }
            Deformation::gaussian_bump(center, 0.2, direction, t)
        }
        other => Err(Error::config(
            "tau.kind",
            format!("unknown deformation `{other}`; known: {}", DEFORMATION_NAMES.join(", ")),
        )),
    }
}
