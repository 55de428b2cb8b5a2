//! Latent-space random graph models Γ = (P, W, f) with a sparsity schedule,
//! and Monte-Carlo estimators of model-level quantities.

mod config;
mod deformation;
mod distribution;
pub mod fixtures;
mod kernel;
mod signal;
mod space;

use std::fmt;

use ndarray::Array2;
use rayon::prelude::*;

pub use config::{model_from_file, model_from_toml_str, model_from_toml_table, sparsity_from_toml_table};
pub use deformation::{Deformation, DeformationKind, JacobianFn, MapFn, FD_STEP};
pub use distribution::{DensityFn, NodeDistribution};
pub use kernel::{Kernel, KernelFn, KernelKind, ProfileGradientFn};
pub use signal::{SignalFn, SignalFunction, SignalKind};
pub use space::LatentSpace;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream};

/// Default number of Monte-Carlo samples for suprema and integrals.
pub const DEFAULT_MC_SAMPLES: usize = 10_000;

/// Sparsity schedule `α_n`, clamped to at most 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sparsity {
    Constant(f64),
    /// `c · log(n) / n`.
    LogOverN { c: f64 },
    /// `c / n^γ`.
    Power { c: f64, gamma: f64 },
}

impl Sparsity {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Sparsity::Constant(a) if !(a > 0.0 && a <= 1.0) => {
                Err(Error::config("sparsity.alpha", format!("{a} outside (0, 1]")))
            }
            Sparsity::LogOverN { c } if !(c > 0.0 && c.is_finite()) => {
                Err(Error::config("sparsity.c", "must be positive"))
            }
            Sparsity::Power { c, gamma } if !(c > 0.0 && c.is_finite() && gamma >= 0.0) => {
                Err(Error::config("sparsity.c/gamma", "need c > 0 and gamma >= 0"))
            }
            _ => Ok(()),
        }
    }

    pub fn alpha(&self, n: usize) -> f64 {
        let n = n.max(2) as f64;
        let a = match *self {
            Sparsity::Constant(a) => a,
            Sparsity::LogOverN { c } => c * n.ln() / n,
            Sparsity::Power { c, gamma } => c / n.powf(gamma),
        };
        a.min(1.0)
    }
}

impl fmt::Display for Sparsity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sparsity::Constant(a) => write!(f, "{a}"),
            Sparsity::LogOverN { c } => write!(f, "{c}*log(n)/n"),
            Sparsity::Power { c, gamma } => write!(f, "{c}/n^{gamma}"),
        }
    }
}

/// A Monte-Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// The generative object Γ = (P, W, f) plus its sparsity schedule.
#[derive(Clone, Debug)]
pub struct RandomGraphModel {
    pub space: LatentSpace,
    pub distribution: NodeDistribution,
    pub kernel: Kernel,
    pub signal: SignalFunction,
    pub sparsity: Sparsity,
}

/// Which component of Γ a deformation replaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeformTarget {
    Kernel,
    Distribution,
    Signal,
}

impl std::str::FromStr for DeformTarget {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kernel" => Ok(Self::Kernel),
            "distribution" => Ok(Self::Distribution),
            "signal" => Ok(Self::Signal),
            other => Err(Error::config("tau.target", format!("unknown target `{other}`"))),
        }
    }
}

/// Size measures of a deformation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeformationSize {
    /// `sup ‖τ(x)‖` over the sampled points.
    pub sup_tau: f64,
    /// `sup ‖∇τ(x)‖` (spectral norm) over the sampled points.
    pub sup_grad_tau: f64,
    /// `N_P(τ) = sup |q_τ - 1|`, when the density ratio is available.
    pub n_p_tau: Option<f64>,
    /// `C_{P_τ} = max(sup q_τ, sup q_τ⁻¹)`, when the density ratio is available.
    pub c_p_tau: Option<f64>,
    /// `sup_x ∫ |W(x, x')| dP(x')`.
    pub c_w: f64,
    /// `sup_x ∫ ‖∇w((x - x')/2)‖ ‖x' - x‖ dP(x')`, for translation-invariant
    /// kernels with a differentiable profile.
    pub c_grad_w: Option<f64>,
}

/// Number of candidate points for the outer supremum of the kernel integrals.
const SUP_CANDIDATES: usize = 512;

impl RandomGraphModel {
    pub fn new(
        space: LatentSpace,
        distribution: NodeDistribution,
        kernel: Kernel,
        signal: SignalFunction,
        sparsity: Sparsity,
    ) -> Result<Self> {
        if distribution.dimension() != space.ambient_dimension() {
            return Err(Error::config(
                "distribution",
                format!(
                    "distribution dimension {} does not match space dimension {}",
                    distribution.dimension(),
                    space.ambient_dimension()
                ),
            ));
        }
        sparsity.validate()?;
        Ok(Self { space, distribution, kernel, signal, sparsity })
    }

    pub fn dimension(&self) -> usize {
        self.space.ambient_dimension()
    }

    pub fn alpha(&self, n: usize) -> f64 {
        self.sparsity.alpha(n)
    }

    pub fn with_sparsity(&self, sparsity: Sparsity) -> Result<Self> {
        sparsity.validate()?;
        Ok(Self { sparsity, ..self.clone() })
    }

    pub fn with_signal(&self, signal: SignalFunction) -> Self {
        Self { signal, ..self.clone() }
    }

    /// `n` i.i.d. latent positions, deterministic per `(seed, index)`.
    pub fn sample_latents(&self, n: usize, seed: u64) -> Result<Array2<f64>> {
        if n == 0 {
            return Err(Error::config("n", "need at least one node"));
        }
        let x = self.distribution.sample(n, seed);
        if matches!(self.distribution, NodeDistribution::Pushforward { .. }) {
            for (i, row) in x.rows().into_iter().enumerate() {
                if !self.space.contains(row.as_slice().expect("row-major"), 1e-12) {
                    return Err(Error::Domain(format!("latent {i} = {row} lies outside the latent space")));
                }
            }
        }
        Ok(x)
    }

    /// Monte-Carlo estimate of the degree function `d_{W,P}(x) = ∫ W(x, y) dP(y)`.
    pub fn estimate_degree_function(&self, x: &[f64], n_mc: usize, seed: u64) -> McEstimate {
        let n_mc = n_mc.max(1);
        let ys = self.distribution.sample(n_mc, derive_seed(seed, stream::MONTE_CARLO, 0));
        let vals: Vec<f64> = ys.rows().into_iter().map(|y| self.kernel.eval(x, y.as_slice().unwrap())).collect();
        mean_with_error(&vals)
    }

    /// Replaces exactly one of W, P, f by its deformation under `Id - τ`.
    pub fn deform(&self, tau: &Deformation, target: DeformTarget) -> Result<Self> {
        if tau.dimension() != self.dimension() {
            return Err(Error::shape(format!("deformation of dimension {}", self.dimension()), tau.dimension()));
        }
        self.check_deformation_support(tau)?;
        let mut out = self.clone();
        match target {
            DeformTarget::Kernel => out.kernel = self.kernel.deformed(tau.clone()),
            DeformTarget::Distribution => {
                out.distribution = NodeDistribution::pushforward(self.distribution.clone(), tau.clone())?
            }
            DeformTarget::Signal => out.signal = self.signal.deformed(tau.clone()),
        }
        Ok(out)
    }

    /// Checks on a fixed sample of P that `Id - τ` stays inside 𝒳.
    pub fn check_deformation_support(&self, tau: &Deformation) -> Result<()> {
        if tau.is_zero() {
            return Ok(());
        }
        let xs = self.distribution.sample(2_000, derive_seed(0, stream::CHECK, 0));
        let mut y = vec![0.0; self.dimension()];
        for (i, x) in xs.rows().into_iter().enumerate() {
            tau.apply(x.as_slice().unwrap(), &mut y);
            if !self.space.contains(&y, 1e-12) {
                return Err(Error::Domain(format!(
                    "Id - tau maps sample point {i} ({x}) to {y:?}, outside the latent space"
                )));
            }
        }
        Ok(())
    }

    /// Density ratio statistics `(N_P(τ), C_{P_τ})` estimated as extrema over
    /// `n_mc` points drawn from P. Only available when P is uniform on a
    /// full-dimensional box, where `q_τ = det(I - ∇τ)⁻¹` at the preimage; the
    /// extrema are taken over preimages, which gives the same suprema since
    /// `Id - τ` is a bijection onto the support of `P_τ`.
    pub fn density_deviation(&self, tau: &Deformation, n_mc: usize, seed: u64) -> Result<(f64, f64)> {
        if tau.is_zero() {
            return Ok((0.0, 1.0));
        }
        if !self.distribution.is_uniform_full_dimensional() {
            return Err(Error::UnsupportedEstimate(
                "N_P(tau) needs a declared density or a uniform full-dimensional node distribution".into(),
            ));
        }
        let t = tau.clone();
        let q: DensityFn = std::sync::Arc::new(move |x: &[f64]| 1.0 / t.jacobian_determinant(x));
        self.density_extrema(&q, n_mc, seed)
    }

    /// Extrema of an explicitly declared density ratio `q` over draws from P.
    pub fn density_extrema(&self, q: &DensityFn, n_mc: usize, seed: u64) -> Result<(f64, f64)> {
        let xs = self.distribution.sample(n_mc.max(1), derive_seed(seed, stream::MONTE_CARLO, 1));
        let mut n_p: f64 = 0.0;
        let mut c_p: f64 = 1.0;
        for x in xs.rows() {
            let v = q(x.as_slice().unwrap());
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::UnsupportedEstimate(format!("density ratio {v} is not positive and finite")));
            }
            n_p = n_p.max((v - 1.0).abs());
            c_p = c_p.max(v).max(1.0 / v);
        }
        Ok((n_p, c_p))
    }

    /// Deformation size measures. Quantities that cannot be estimated for
    /// this model are left as `None`.
    pub fn deformation_size(&self, tau: &Deformation, n_mc: usize, seed: u64) -> Result<DeformationSize> {
        if tau.dimension() != self.dimension() {
            return Err(Error::shape(format!("deformation of dimension {}", self.dimension()), tau.dimension()));
        }
        let n_mc = n_mc.max(1);
        let xs = self.distribution.sample(n_mc, derive_seed(seed, stream::MONTE_CARLO, 2));
        let d = self.dimension();
        let mut disp = vec![0.0; d];
        let mut sup_tau: f64 = 0.0;
        let mut sup_grad: f64 = 0.0;
        if !tau.is_zero() {
            for x in xs.rows() {
                let x = x.as_slice().unwrap();
                tau.displacement(x, &mut disp);
                sup_tau = sup_tau.max(crate::linalg::norm2(&disp));
                sup_grad = sup_grad.max(tau.gradient_norm(x));
            }
        }
        let density = match self.density_deviation(tau, n_mc, seed) {
            Ok(v) => Some(v),
            Err(Error::UnsupportedEstimate(_)) => None,
            Err(e) => return Err(e),
        };
        let (c_w, c_grad_w) = self.kernel_integrals(&xs);
        Ok(DeformationSize {
            sup_tau,
            sup_grad_tau: sup_grad,
            n_p_tau: density.map(|d| d.0),
            c_p_tau: density.map(|d| d.1),
            c_w,
            c_grad_w,
        })
    }

    /// Monte-Carlo suprema of `∫|W(x, ·)| dP` and, when available,
    /// `∫ ‖∇w((x - ·)/2)‖ ‖· - x‖ dP`; the supremum runs over the first
    /// [`SUP_CANDIDATES`] samples, the integrals over all of them.
    fn kernel_integrals(&self, xs: &Array2<f64>) -> (f64, Option<f64>) {
        let n = xs.nrows();
        let d = xs.ncols();
        let has_gradient = self.kernel.profile_gradient(&vec![0.0; d], &mut vec![0.0; d]).is_some();
        let rows: Vec<&[f64]> = xs.rows().into_iter().map(|r| r.to_slice().unwrap()).collect();
        let per_candidate: Vec<(f64, f64)> = (0..n.min(SUP_CANDIDATES))
            .into_par_iter()
            .map(|i| {
                let x = rows[i];
                let mut u = vec![0.0; d];
                let mut g = vec![0.0; d];
                let mut acc_w = 0.0;
                let mut acc_g = 0.0;
                for y in &rows {
                    acc_w += self.kernel.eval(x, y).abs();
                    if has_gradient {
                        let mut dist2 = 0.0;
                        for k in 0..d {
                            u[k] = 0.5 * (x[k] - y[k]);
                            dist2 += (x[k] - y[k]) * (x[k] - y[k]);
                        }
                        self.kernel.profile_gradient(&u, &mut g);
                        acc_g += crate::linalg::norm2(&g) * dist2.sqrt();
                    }
                }
                (acc_w / n as f64, acc_g / n as f64)
            })
            .collect();
        let c_w = per_candidate.iter().map(|p| p.0).fold(0.0, f64::max);
        let c_g = per_candidate.iter().map(|p| p.1).fold(0.0, f64::max);
        (c_w, has_gradient.then_some(c_g))
    }

    /// `‖d_{W_τ,P} - d_{W,P}‖_{L²(P)}` (which equals `‖T_τ d_{W,P_τ} - d_{W,P}‖`),
    /// with `n_outer` evaluation points and `n_inner` integration points
    /// shared between both degree functions.
    pub fn deformed_degree_gap(&self, tau: &Deformation, n_outer: usize, n_inner: usize, seed: u64) -> McEstimate {
        let xs = self.distribution.sample(n_outer.max(1), derive_seed(seed, stream::MONTE_CARLO, 3));
        let ys = self.distribution.sample(n_inner.max(1), derive_seed(seed, stream::MONTE_CARLO, 4));
        let ys_def: Vec<Vec<f64>> = ys.rows().into_iter().map(|y| tau.apply_vec(y.as_slice().unwrap())).collect();
        let squares: Vec<f64> = xs
            .rows()
            .into_iter()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|x| {
                let x = x.as_slice().unwrap();
                let xd = tau.apply_vec(x);
                let mut acc = 0.0;
                for (y, yd) in ys.rows().into_iter().zip(&ys_def) {
                    acc += self.kernel.eval(&xd, yd) - self.kernel.eval(x, y.as_slice().unwrap());
                }
                let g = acc / ys_def.len() as f64;
                g * g
            })
            .collect();
        let ms = mean_with_error(&squares);
        let value = ms.value.sqrt();
        let std_error = if value > 0.0 { ms.std_error / (2.0 * value) } else { ms.std_error.sqrt() };
        McEstimate { value, std_error, samples: squares.len() }
    }

    /// `‖f‖_{L²(P)}` by Monte Carlo.
    pub fn signal_l2_norm(&self, n_mc: usize, seed: u64) -> McEstimate {
        let xs = self.distribution.sample(n_mc.max(1), derive_seed(seed, stream::MONTE_CARLO, 5));
        let squares: Vec<f64> = xs
            .rows()
            .into_iter()
            .map(|x| self.signal.eval_vec(x.as_slice().unwrap()).iter().map(|v| v * v).sum())
            .collect();
        let ms = mean_with_error(&squares);
        let value = ms.value.sqrt();
        let std_error = if value > 0.0 { ms.std_error / (2.0 * value) } else { 0.0 };
        McEstimate { value, std_error, samples: squares.len() }
    }
}

pub fn mean_with_error(vals: &[f64]) -> McEstimate {
    let n = vals.len();
    let mean = vals.iter().sum::<f64>() / n as f64;
    let var = if n > 1 { vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
    McEstimate { value: mean, std_error: (var / n as f64).sqrt(), samples: n }
}
