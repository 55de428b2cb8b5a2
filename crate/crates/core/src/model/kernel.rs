use std::fmt;
use std::sync::Arc;

use super::deformation::Deformation;
use crate::error::{Error, Result};

pub type KernelFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
/// Gradient of a translation-invariant profile `w` at `u`, written into `out`.
pub type ProfileGradientFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

#[derive(Clone)]
pub enum KernelKind {
    /// `exp(-‖x - y‖² / (2 bandwidth²))`.
    GaussianRbf { bandwidth: f64 },
    /// `1` when `‖x - y‖ ≤ radius`, else `0`.
    EpsilonThreshold { radius: f64 },
    /// Block kernel; the community of a point is the number of `thresholds`
    /// not exceeding its first coordinate.
    SbmBlock { blocks: Vec<Vec<f64>>, thresholds: Vec<f64> },
    Constant { value: f64 },
    Custom { eval: KernelFn, profile_gradient: Option<ProfileGradientFn> },
    /// `W_τ(x, y) = W(x - τ(x), y - τ(y))`.
    Deformed { base: Box<Kernel>, tau: Deformation },
}

impl fmt::Debug for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::GaussianRbf { bandwidth } => f.debug_struct("GaussianRbf").field("bandwidth", bandwidth).finish(),
            Self::EpsilonThreshold { radius } => f.debug_struct("EpsilonThreshold").field("radius", radius).finish(),
            Self::SbmBlock { blocks, thresholds } => {
                f.debug_struct("SbmBlock").field("blocks", blocks).field("thresholds", thresholds).finish()
            }
            Self::Constant { value } => f.debug_struct("Constant").field("value", value).finish(),
            Self::Custom { profile_gradient, .. } => {
                f.debug_struct("Custom").field("has_gradient", &profile_gradient.is_some()).finish()
            }
            Self::Deformed { base, tau } => f.debug_struct("Deformed").field("base", base).field("tau", tau).finish(),
        }
    }
}

/// Similarity kernel W with its declared regularity constants.
///
/// `c_lip` and `n_pieces` (piecewise-Lipschitz bookkeeping) are declared
/// metadata and are not verified.
#[derive(Clone, Debug)]
pub struct Kernel {
    pub kind: KernelKind,
    pub c_max: f64,
    pub c_min: f64,
    pub c_lip: f64,
    pub n_pieces: usize,
    pub translation_invariant: bool,
}

impl Kernel {
    /// Gaussian kernel; `c_max = 1`, `c_lip = e^{-1/2} / bandwidth` (the
    /// maximal slope of the radial profile).
    pub fn gaussian(bandwidth: f64, c_min: f64) -> Result<Self> {
        if !(bandwidth > 0.0) {
            return Err(Error::config("kernel.bandwidth", "must be positive"));
        }
        Self::checked(Kernel {
            kind: KernelKind::GaussianRbf { bandwidth },
            c_max: 1.0,
            c_min,
            c_lip: (-0.5f64).exp() / bandwidth,
            n_pieces: 1,
            translation_invariant: true,
        })
    }

    /// Threshold kernel. Its Lipschitz pieces depend on the point set, so
    /// `n_pieces` is a declared value and `c_lip = 0` within pieces.
    pub fn epsilon(radius: f64, c_min: f64, n_pieces: usize) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::config("kernel.radius", "must be positive"));
        }
        Self::checked(Kernel {
            kind: KernelKind::EpsilonThreshold { radius },
            c_max: 1.0,
            c_min,
            c_lip: 0.0,
            n_pieces: n_pieces.max(1),
            translation_invariant: true,
        })
    }

    pub fn sbm(blocks: Vec<Vec<f64>>, thresholds: Vec<f64>, c_min: f64) -> Result<Self> {
        let k = blocks.len();
        if k == 0 || blocks.iter().any(|r| r.len() != k) {
            return Err(Error::config("kernel.blocks", "block matrix must be square and non-empty"));
        }
        if thresholds.len() + 1 != k {
            return Err(Error::config("kernel.thresholds", format!("need {} thresholds for {k} blocks", k - 1)));
        }
        if thresholds.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::config("kernel.thresholds", "thresholds must be strictly increasing"));
        }
        for i in 0..k {
            for j in 0..k {
                let v = blocks[i][j];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::config("kernel.blocks", format!("entry ({i},{j}) = {v} outside [0, 1]")));
                }
                if v != blocks[j][i] {
                    return Err(Error::config("kernel.blocks", "block matrix must be symmetric"));
                }
            }
        }
        let c_max = blocks.iter().flatten().cloned().fold(0.0, f64::max);
        Self::checked(Kernel {
            kind: KernelKind::SbmBlock { blocks, thresholds },
            c_max,
            c_min,
            c_lip: 0.0,
            n_pieces: k,
            translation_invariant: false,
        })
    }

    pub fn constant(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::config("kernel.value", "must lie in [0, 1]"));
        }
        Self::checked(Kernel {
            kind: KernelKind::Constant { value },
            c_max: value,
            c_min: value,
            c_lip: 0.0,
            n_pieces: 1,
            translation_invariant: true,
        })
    }

    pub fn custom(
        eval: KernelFn,
        profile_gradient: Option<ProfileGradientFn>,
        c_max: f64,
        c_min: f64,
        translation_invariant: bool,
    ) -> Result<Self> {
        Self::checked(Kernel {
            kind: KernelKind::Custom { eval, profile_gradient },
            c_max,
            c_min,
            c_lip: 0.0,
            n_pieces: 1,
            translation_invariant,
        })
    }

    /// `W_τ`. Declared constants carry over; translation invariance is kept
    /// only for pure translations.
    pub fn deformed(&self, tau: Deformation) -> Self {
        let translation_invariant = self.translation_invariant
            && matches!(tau.kind(), super::deformation::DeformationKind::Translation(_) | super::deformation::DeformationKind::Zero);
        Kernel {
            kind: KernelKind::Deformed { base: Box::new(self.clone()), tau },
            translation_invariant,
            ..self.clone()
        }
    }

    fn checked(k: Kernel) -> Result<Self> {
        if !(k.c_max >= 0.0 && k.c_max <= 1.0) {
            return Err(Error::config("kernel.c_max", format!("{} outside [0, 1]", k.c_max)));
        }
        if !(k.c_min >= 0.0 && k.c_min.is_finite()) {
            return Err(Error::config("kernel.c_min", "must be finite and nonnegative"));
        }
        Ok(k)
    }

    pub fn with_c_min(mut self, c_min: f64) -> Result<Self> {
        self.c_min = c_min;
        Self::checked(self)
    }

    pub fn with_c_lip(mut self, c_lip: f64, n_pieces: usize) -> Self {
        self.c_lip = c_lip;
        self.n_pieces = n_pieces.max(1);
        self
    }

    /// `W(x, y)`.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match &self.kind {
            KernelKind::GaussianRbf { bandwidth } => {
                (-sq_dist(x, y) / (2.0 * bandwidth * bandwidth)).exp()
            }
            KernelKind::EpsilonThreshold { radius } => {
                if sq_dist(x, y) <= radius * radius {
                    1.0
                } else {
                    0.0
                }
            }
            KernelKind::SbmBlock { blocks, thresholds } => {
                blocks[community(thresholds, x[0])][community(thresholds, y[0])]
            }
            KernelKind::Constant { value } => *value,
            KernelKind::Custom { eval, .. } => eval(x, y),
            KernelKind::Deformed { base, tau } => {
                let xd = tau.apply_vec(x);
                let yd = tau.apply_vec(y);
                base.eval(&xd, &yd)
            }
        }
    }

    /// Community index of a point under an SBM kernel.
    pub fn community_of(&self, x: &[f64]) -> Option<usize> {
        match &self.kind {
            KernelKind::SbmBlock { thresholds, .. } => Some(community(thresholds, x[0])),
            _ => None,
        }
    }

    /// `∇w(u)` for translation-invariant kernels `W(x, y) = w(x - y)` with a
    /// differentiable profile; `None` otherwise.
    pub fn profile_gradient(&self, u: &[f64], out: &mut [f64]) -> Option<()> {
        if !self.translation_invariant {
            return None;
        }
        match &self.kind {
            KernelKind::GaussianRbf { bandwidth } => {
                let s2 = bandwidth * bandwidth;
                let w = (-u.iter().map(|v| v * v).sum::<f64>() / (2.0 * s2)).exp();
                for (o, ui) in out.iter_mut().zip(u) {
                    *o = -ui / s2 * w;
                }
                Some(())
            }
            KernelKind::Constant { .. } => {
                out.fill(0.0);
                Some(())
            }
            KernelKind::Custom { profile_gradient: Some(g), .. } => {
                g(u, out);
                Some(())
            }
            KernelKind::Deformed { base, tau } if tau.is_zero() => base.profile_gradient(u, out),
            KernelKind::Deformed { base, tau } if matches!(tau.kind(), super::deformation::DeformationKind::Translation(_)) => {
                base.profile_gradient(u, out)
            }
            _ => None,
        }
    }

    /// True when the kernel only takes values in `{0, 1}`.
    pub fn is_binary(&self) -> bool {
        match &self.kind {
            KernelKind::EpsilonThreshold { .. } => true,
            KernelKind::Constant { value } => *value == 0.0 || *value == 1.0,
            KernelKind::SbmBlock { blocks, .. } => blocks.iter().flatten().all(|v| *v == 0.0 || *v == 1.0),
            KernelKind::Deformed { base, .. } => base.is_binary(),
            _ => false,
        }
    }
}

#[inline]
pub(crate) fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    let mut s = 0.0;
    for (a, b) in x.iter().zip(y) {
        let d = a - b;
        s += d * d;
    }
    s
}

fn community(thresholds: &[f64], v: f64) -> usize {
    thresholds.iter().take_while(|t| **t <= v).count()
}
