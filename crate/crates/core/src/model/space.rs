use crate::error::{Error, Result};

/// The latent space 𝒳: an axis-aligned box in ℝ^d that contains the support
/// of every node distribution used with it, together with its intrinsic
/// (Minkowski) dimension. The intrinsic dimension is metadata only.
#[derive(Clone, Debug, PartialEq)]
pub struct LatentSpace {
    ambient_dimension: usize,
    intrinsic_dimension: usize,
    bounds: Vec<(f64, f64)>,
    metric_scale: f64,
    description: String,
}

impl LatentSpace {
    /// Unit cube `[0, 1]^d`.
    pub fn new(ambient_dimension: usize, intrinsic_dimension: usize, description: impl Into<String>) -> Result<Self> {
        Self::with_bounds(intrinsic_dimension, vec![(0.0, 1.0); ambient_dimension], description)
    }

    pub fn with_bounds(
        intrinsic_dimension: usize,
        bounds: Vec<(f64, f64)>,
        description: impl Into<String>,
    ) -> Result<Self> {
        let ambient_dimension = bounds.len();
        if intrinsic_dimension == 0 || ambient_dimension < intrinsic_dimension {
            return Err(Error::config(
                "space.intrinsic_dimension",
                format!("need ambient ({ambient_dimension}) >= intrinsic ({intrinsic_dimension}) >= 1"),
            ));
        }
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::config(format!("space.bounds[{i}]"), format!("invalid interval [{lo}, {hi}]")));
            }
        }
        Ok(Self { ambient_dimension, intrinsic_dimension, bounds, metric_scale: 1.0, description: description.into() })
    }

    /// Declares the factor by which Euclidean distances are rescaled so that
    /// the support of the node distribution has diameter at most 1.
    pub fn with_metric_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::config("space.metric_scale", "must be positive"));
        }
        self.metric_scale = scale;
        Ok(self)
    }

    pub fn metric_scale(&self) -> f64 {
        self.metric_scale
    }

    pub fn ambient_dimension(&self) -> usize {
        self.ambient_dimension
    }

    pub fn intrinsic_dimension(&self) -> usize {
        self.intrinsic_dimension
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.ambient_dimension
            && x.iter().zip(&self.bounds).all(|(&v, &(lo, hi))| v >= lo - tol && v <= hi + tol)
    }
}
