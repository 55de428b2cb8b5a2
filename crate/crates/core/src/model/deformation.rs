use std::fmt;
use std::sync::Arc;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::spectral_norm;

/// Displacement field `x ↦ τ(x)` written into `out`.
pub type MapFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
/// Jacobian of a displacement field at `x`, written row-major into a `d × d` matrix.
pub type JacobianFn = Arc<dyn Fn(&[f64], &mut Array2<f64>) + Send + Sync>;

/// Central-difference step used when no analytic Jacobian is available.
pub const FD_STEP: f64 = 1e-5;

#[derive(Clone)]
pub enum DeformationKind {
    Zero,
    /// `τ(x) = v`.
    Translation(Vec<f64>),
    /// `τ(x) = x`, i.e. uniform scaling by `1 - t` after amplitude `t`.
    Scaling,
    /// Localized displacement `τ(x) = direction · exp(-‖x - center‖² / (2 width²))`.
    GaussianBump { center: Vec<f64>, width: f64, direction: Vec<f64> },
    Custom { map: MapFn, jacobian: Option<JacobianFn> },
}

impl fmt::Debug for DeformationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "Zero"),
            Self::Translation(v) => f.debug_tuple("Translation").field(v).finish(),
            Self::Scaling => write!(f, "Scaling"),
            Self::GaussianBump { center, width, direction } => f
                .debug_struct("GaussianBump")
                .field("center", center)
                .field("width", width)
                .field("direction", direction)
                .finish(),
            Self::Custom { jacobian, .. } => {
                f.debug_struct("Custom").field("analytic_jacobian", &jacobian.is_some()).finish()
            }
        }
    }
}

/// A spatial deformation `t · τ_base` of the latent space.
#[derive(Clone, Debug)]
pub struct Deformation {
    kind: DeformationKind,
    dimension: usize,
    amplitude: f64,
}

impl Deformation {
    pub fn new(kind: DeformationKind, dimension: usize, amplitude: f64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::config("tau.dimension", "must be positive"));
        }
        if !amplitude.is_finite() {
            return Err(Error::config("tau.amplitude", "must be finite"));
        }
        match &kind {
            DeformationKind::Translation(v) if v.len() != dimension => {
                return Err(Error::shape(format!("translation of length {dimension}"), v.len()))
            }
            DeformationKind::GaussianBump { center, width, direction } => {
                if center.len() != dimension || direction.len() != dimension {
                    return Err(Error::shape(
                        format!("bump center/direction of length {dimension}"),
                        format!("{}/{}", center.len(), direction.len()),
                    ));
                }
                if !(*width > 0.0) {
                    return Err(Error::config("tau.width", "must be positive"));
                }
            }
            _ => {}
        }
        Ok(Self { kind, dimension, amplitude })
    }

    pub fn zero(dimension: usize) -> Self {
        Self { kind: DeformationKind::Zero, dimension, amplitude: 0.0 }
    }

    pub fn translation(v: Vec<f64>) -> Self {
        let d = v.len();
        Self { kind: DeformationKind::Translation(v), dimension: d, amplitude: 1.0 }
    }

    pub fn scaling(dimension: usize, t: f64) -> Self {
        Self { kind: DeformationKind::Scaling, dimension, amplitude: t }
    }

    pub fn gaussian_bump(center: Vec<f64>, width: f64, direction: Vec<f64>, t: f64) -> Result<Self> {
        let d = center.len();
        Self::new(DeformationKind::GaussianBump { center, width, direction }, d, t)
    }

    pub fn custom(dimension: usize, map: MapFn, jacobian: Option<JacobianFn>) -> Self {
        Self { kind: DeformationKind::Custom { map, jacobian }, dimension, amplitude: 1.0 }
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        Self { amplitude, ..self.clone() }
    }

    pub fn kind(&self) -> &DeformationKind {
        &self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// True when τ vanishes identically.
    pub fn is_zero(&self) -> bool {
        matches!(self.kind, DeformationKind::Zero) || self.amplitude == 0.0
    }

    /// Writes `τ(x)` into `out`.
    pub fn displacement(&self, x: &[f64], out: &mut [f64]) {
        let t = self.amplitude;
        match &self.kind {
            DeformationKind::Zero => out.fill(0.0),
            DeformationKind::Translation(v) => {
                for (o, vi) in out.iter_mut().zip(v) {
                    *o = t * vi;
                }
            }
            DeformationKind::Scaling => {
                for (o, xi) in out.iter_mut().zip(x) {
                    *o = t * xi;
                }
            }
            DeformationKind::GaussianBump { center, width, direction } => {
                let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                let g = t * (-r2 / (2.0 * width * width)).exp();
                for (o, di) in out.iter_mut().zip(direction) {
                    *o = g * di;
                }
            }
            DeformationKind::Custom { map, .. } => {
                map(x, out);
                out.iter_mut().for_each(|o| *o *= t);
            }
        }
    }

    /// Writes `x - τ(x)` into `out`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.displacement(x, out);
        for (o, xi) in out.iter_mut().zip(x) {
            *o = xi - *o;
        }
    }

    pub fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.apply(x, &mut out);
        out
    }

    /// Jacobian `∇τ(x)`; analytic for built-in kinds, central differences
    /// with step [`FD_STEP`] otherwise.
    pub fn jacobian(&self, x: &[f64]) -> Array2<f64> {
        let d = self.dimension;
        let t = self.amplitude;
        let mut jac = Array2::zeros((d, d));
        match &self.kind {
            DeformationKind::Zero | DeformationKind::Translation(_) => {}
            DeformationKind::Scaling => {
                for i in 0..d {
                    jac[[i, i]] = t;
                }
            }
            DeformationKind::GaussianBump { center, width, direction } => {
                let w2 = width * width;
                let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                let g = t * (-r2 / (2.0 * w2)).exp();
                for i in 0..d {
                    for j in 0..d {
                        jac[[i, j]] = -direction[i] * g * (x[j] - center[j]) / w2;
                    }
                }
            }
            DeformationKind::Custom { jacobian: Some(jf), .. } => {
                jf(x, &mut jac);
                jac.mapv_inplace(|v| v * t);
            }
            DeformationKind::Custom { jacobian: None, .. } => {
                jac = self.finite_difference_jacobian(x, FD_STEP);
            }
        }
        jac
    }

    /// Central-difference Jacobian, available for every kind.
    pub fn finite_difference_jacobian(&self, x: &[f64], h: f64) -> Array2<f64> {
        let d = self.dimension;
        let mut jac = Array2::zeros((d, d));
        let mut xp = x.to_vec();
        let mut fp = vec![0.0; d];
        let mut fm = vec![0.0; d];
        for j in 0..d {
            xp[j] = x[j] + h;
            self.displacement(&xp, &mut fp);
            xp[j] = x[j] - h;
            self.displacement(&xp, &mut fm);
            xp[j] = x[j];
            for i in 0..d {
                jac[[i, j]] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        jac
    }

    /// Spectral norm of `∇τ(x)`.
    pub fn gradient_norm(&self, x: &[f64]) -> f64 {
        spectral_norm(self.jacobian(x).view())
    }

    /// `det(I - ∇τ(x))`.
    pub fn jacobian_determinant(&self, x: &[f64]) -> f64 {
        let jac = self.jacobian(x);
        let d = self.dimension;
        let m = nalgebra::DMatrix::from_fn(d, d, |i, j| (if i == j { 1.0 } else { 0.0 }) - jac[[i, j]]);
        m.determinant()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_deformation_is_identity() {
        let tau = Deformation::zero(3);
        assert_eq!(tau.apply_vec(&[0.1, 0.2, 0.3]), vec![0.1, 0.2, 0.3]);
        assert!(tau.is_zero());
        assert_eq!(tau.gradient_norm(&[0.5, 0.5, 0.5]), 0.0);
    }

    #[test]
    fn scaling_jacobian_and_determinant() {
        let tau = Deformation::scaling(2, 0.1);
        assert!((tau.gradient_norm(&[0.3, 0.7]) - 0.1).abs() < 1e-14);
        assert!((tau.jacobian_determinant(&[0.3, 0.7]) - 0.81).abs() < 1e-14);
        let y = tau.apply_vec(&[1.0, 0.5]);
        assert!((y[0] - 0.9).abs() < 1e-15 && (y[1] - 0.45).abs() < 1e-15);
    }

    #[test]
    fn bump_analytic_jacobian_matches_finite_differences() {
        let tau = Deformation::gaussian_bump(vec![0.5, 0.5], 0.2, vec![0.3, -0.1], 0.7).unwrap();
        for x in [[0.1, 0.9], [0.45, 0.6], [0.8, 0.2]] {
            let a = tau.jacobian(&x);
            let fd = tau.finite_difference_jacobian(&x, FD_STEP);
            let diff = (&a - &fd).mapv(f64::abs).iter().cloned().fold(0.0, f64::max);
            assert!(diff < 1e-9, "{diff}");
        }
    }

    #[test]
    fn custom_without_jacobian_falls_back_to_finite_differences() {
        let map: MapFn = Arc::new(|x: &[f64], out: &mut [f64]| {
            out[0] = 0.1 * x[0] * x[0];
            out[1] = 0.05 * x[0] * x[1];
        });
        let tau = Deformation::custom(2, map, None);
        let jac = tau.jacobian(&[0.5, 0.4]);
        assert!((jac[[0, 0]] - 0.1).abs() < 1e-9);
        assert!((jac[[1, 0]] - 0.02).abs() < 1e-9);
        assert!((jac[[1, 1]] - 0.025).abs() < 1e-9);
        assert!(jac[[0, 1]].abs() < 1e-9);
    }

    #[test]
    fn bump_rejects_bad_width() {
        assert!(Deformation::gaussian_bump(vec![0.0], 0.0, vec![1.0], 1.0).is_err());
        assert!(Deformation::gaussian_bump(vec![0.0], 1.0, vec![1.0, 2.0], 1.0).is_err());
    }
}
