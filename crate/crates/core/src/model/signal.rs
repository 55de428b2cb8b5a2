use std::fmt;
use std::sync::Arc;

use ndarray::{Array2, ArrayView2};

use super::deformation::Deformation;
use crate::error::{Error, Result};

pub type SignalFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

#[derive(Clone)]
pub enum SignalKind {
    Constant(Vec<f64>),
    /// `f(x) = x[index]`.
    Coordinate { index: usize },
    /// `f(x) = weights · x + offset`, `weights` of shape `d_z × d`.
    Linear { weights: Array2<f64>, offset: Vec<f64> },
    Custom(SignalFn),
    /// `f_τ(x) = f(x - τ(x))`.
    Deformed { base: Box<SignalFunction>, tau: Deformation },
}

impl fmt::Debug for SignalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            Self::Coordinate { index } => f.debug_struct("Coordinate").field("index", index).finish(),
            Self::Linear { weights, offset } => {
                f.debug_struct("Linear").field("weights", weights).field("offset", offset).finish()
            }
            Self::Custom(_) => write!(f, "Custom"),
            Self::Deformed { base, tau } => f.debug_struct("Deformed").field("base", base).field("tau", tau).finish(),
        }
    }
}

/// Node signal function `f: 𝒳 → ℝ^{d_z}` with a declared sup-norm bound.
#[derive(Clone, Debug)]
pub struct SignalFunction {
    pub kind: SignalKind,
    pub output_dimension: usize,
    pub sup_norm_bound: f64,
}

impl SignalFunction {
    pub fn constant(value: Vec<f64>) -> Result<Self> {
        if value.is_empty() {
            return Err(Error::config("signal.value", "must be non-empty"));
        }
        let bound = value.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok(Self { output_dimension: value.len(), sup_norm_bound: bound, kind: SignalKind::Constant(value) })
    }

    pub fn ones(d: usize) -> Self {
        Self::constant(vec![1.0; d]).expect("d > 0")
    }

    /// `f(x) = x[index]`; `sup_norm_bound` should cover the latent space.
    pub fn coordinate(index: usize, sup_norm_bound: f64) -> Self {
        Self { kind: SignalKind::Coordinate { index }, output_dimension: 1, sup_norm_bound }
    }

    pub fn linear(weights: Array2<f64>, offset: Vec<f64>, sup_norm_bound: f64) -> Result<Self> {
        if weights.nrows() != offset.len() || weights.nrows() == 0 {
            return Err(Error::shape(format!("offset of length {}", weights.nrows()), offset.len()));
        }
        Ok(Self { output_dimension: offset.len(), sup_norm_bound, kind: SignalKind::Linear { weights, offset } })
    }

    pub fn custom(output_dimension: usize, sup_norm_bound: f64, eval: SignalFn) -> Self {
        Self { kind: SignalKind::Custom(eval), output_dimension, sup_norm_bound }
    }

    /// `f_τ = f ∘ (Id - τ)`.
    pub fn deformed(&self, tau: Deformation) -> Self {
        Self {
            kind: SignalKind::Deformed { base: Box::new(self.clone()), tau },
            output_dimension: self.output_dimension,
            sup_norm_bound: self.sup_norm_bound,
        }
    }

    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        match &self.kind {
            SignalKind::Constant(c) => out.copy_from_slice(c),
            SignalKind::Coordinate { index } => out[0] = x[*index],
            SignalKind::Linear { weights, offset } => {
                for (r, o) in out.iter_mut().enumerate() {
                    *o = offset[r] + weights.row(r).iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>();
                }
            }
            SignalKind::Custom(f) => f(x, out),
            SignalKind::Deformed { base, tau } => base.eval(&tau.apply_vec(x), out),
        }
    }

    pub fn eval_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.output_dimension];
        self.eval(x, &mut out);
        out
    }

    /// Evaluates `f` on every row of `points`.
    pub fn evaluate_rows(&self, points: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = Array2::zeros((points.nrows(), self.output_dimension));
        for (x, mut o) in points.rows().into_iter().zip(out.rows_mut()) {
            let x = x.to_vec();
            self.eval(&x, o.as_slice_mut().expect("row-major"));
        }
        out
    }

    /// True when `f` is constant in space.
    pub fn is_constant(&self) -> bool {
        match &self.kind {
            SignalKind::Constant(_) => true,
            SignalKind::Deformed { base, .. } => base.is_constant(),
            _ => false,
        }
    }
}
