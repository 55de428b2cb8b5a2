use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use ndarray::Array2;
use rand::Rng;

use super::deformation::Deformation;
use crate::error::{Error, Result};
use crate::rng::{rng_for, stream};

/// Density of a pushed-forward distribution with respect to its base.
pub type DensityFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// The node distribution P.
#[derive(Clone)]
pub enum NodeDistribution {
    /// Uniform on the box `[lo, hi]`.
    UniformCube { lo: Vec<f64>, hi: Vec<f64> },
    /// `scale · (u, v, a·sin(2πu)·sin(2πv))` with `(u, v)` uniform on `[0, 1]²`.
    BumpedSurface { amplitude: f64, scale: f64 },
    /// Community `k` drawn with probability `weights[k]`; its latent is `centers[k]`.
    FiniteMixture { weights: Vec<f64>, centers: Vec<Vec<f64>> },
    /// `(Id - τ)_♯ base`, optionally with its density with respect to `base`.
    Pushforward { base: Box<NodeDistribution>, tau: Deformation, density: Option<DensityFn> },
}

impl fmt::Debug for NodeDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UniformCube { lo, hi } => f.debug_struct("UniformCube").field("lo", lo).field("hi", hi).finish(),
            Self::BumpedSurface { amplitude, scale } => {
                f.debug_struct("BumpedSurface").field("amplitude", amplitude).field("scale", scale).finish()
            }
            Self::FiniteMixture { weights, centers } => {
                f.debug_struct("FiniteMixture").field("weights", weights).field("centers", centers).finish()
            }
            Self::Pushforward { base, tau, density } => f
                .debug_struct("Pushforward")
                .field("base", base)
                .field("tau", tau)
                .field("has_density", &density.is_some())
                .finish(),
        }
    }
}

impl NodeDistribution {
    pub fn uniform_cube(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::config("distribution.lo/hi", "bounds must be non-empty and of equal length"));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::config("distribution.lo/hi", "need lo < hi in every coordinate"));
        }
        Ok(Self::UniformCube { lo, hi })
    }

    pub fn unit_cube(d: usize) -> Self {
        Self::UniformCube { lo: vec![0.0; d], hi: vec![1.0; d] }
    }

    /// Bumped rectangle rescaled so that its diameter is at most 1.
    pub fn bumped_surface(amplitude: f64) -> Self {
        let scale = 1.0 / (2.0 + 4.0 * amplitude * amplitude).sqrt();
        Self::BumpedSurface { amplitude, scale }
    }

    pub fn finite_mixture(weights: Vec<f64>, centers: Vec<Vec<f64>>) -> Result<Self> {
        if weights.is_empty() || weights.len() != centers.len() {
            return Err(Error::config("distribution.weights", "need one weight per center"));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::config("distribution.weights", "weights must be nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::config("distribution.weights", format!("weights sum to {total}, not 1")));
        }
        let d = centers[0].len();
        if d == 0 || centers.iter().any(|c| c.len() != d) {
            return Err(Error::config("distribution.centers", "centers must share a positive dimension"));
        }
        Ok(Self::FiniteMixture { weights, centers })
    }

    /// Pushforward by `Id - τ` without a declared density.
    pub fn pushforward(base: NodeDistribution, tau: Deformation) -> Result<Self> {
        if tau.dimension() != base.dimension() {
            return Err(Error::shape(format!("deformation of dimension {}", base.dimension()), tau.dimension()));
        }
        Ok(Self::Pushforward { base: Box::new(base), tau, density: None })
    }

    /// Pushforward by `Id - τ` with its density `q_τ(y) = dP_τ/dP(y)`.
    pub fn pushforward_with_density(base: NodeDistribution, tau: Deformation, density: DensityFn) -> Result<Self> {
        if tau.dimension() != base.dimension() {
            return Err(Error::shape(format!("deformation of dimension {}", base.dimension()), tau.dimension()));
        }
        Ok(Self::Pushforward { base: Box::new(base), tau, density: Some(density) })
    }

    pub fn dimension(&self) -> usize {
        match self {
            Self::UniformCube { lo, .. } => lo.len(),
            Self::BumpedSurface { .. } => 3,
            Self::FiniteMixture { centers, .. } => centers[0].len(),
            Self::Pushforward { base, .. } => base.dimension(),
        }
    }

    pub fn is_uniform_full_dimensional(&self) -> bool {
        matches!(self, Self::UniformCube { .. })
    }

    /// Density with respect to the base distribution, when declared.
    pub fn density_wrt_base(&self) -> Option<&DensityFn> {
        match self {
            Self::Pushforward { density, .. } => density.as_ref(),
            _ => None,
        }
    }

    /// Writes the `index`-th draw under `seed` into `out`. Bit-reproducible
    /// per `(seed, index)`.
    pub fn sample_point(&self, seed: u64, index: u64, out: &mut [f64]) {
        let mut rng = rng_for(seed, stream::LATENT, index);
        self.sample_with(&mut rng, out);
    }

    fn sample_with<R: Rng>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            Self::UniformCube { lo, hi } => {
                for ((o, a), b) in out.iter_mut().zip(lo).zip(hi) {
                    *o = a + (b - a) * rng.random::<f64>();
                }
            }
            Self::BumpedSurface { amplitude, scale } => {
                let u: f64 = rng.random();
                let v: f64 = rng.random();
                out[0] = scale * u;
                out[1] = scale * v;
                out[2] = scale * amplitude * (2.0 * PI * u).sin() * (2.0 * PI * v).sin();
            }
            Self::FiniteMixture { weights, centers } => {
                let k = categorical(weights, rng.random::<f64>());
                out.copy_from_slice(&centers[k]);
            }
            Self::Pushforward { base, tau, .. } => {
                let mut y = vec![0.0; out.len()];
                base.sample_with(rng, &mut y);
                tau.apply(&y, out);
            }
        }
    }

    /// `n` i.i.d. draws as an `n × d` array.
    pub fn sample(&self, n: usize, seed: u64) -> Array2<f64> {
        let d = self.dimension();
        let mut out = Array2::zeros((n, d));
        for (i, mut row) in out.rows_mut().into_iter().enumerate() {
            self.sample_point(seed, i as u64, row.as_slice_mut().expect("row-major"));
        }
        out
    }
}

fn categorical(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (k, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return k;
        }
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_cube_samples_lie_in_range_and_reproduce() {
        let p = NodeDistribution::unit_cube(1);
        let a = p.sample(3, 11);
        let b = p.sample(3, 11);
        assert_eq!(a, b);
        assert!(a.iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn mixture_fractions_follow_weights() {
        let p = NodeDistribution::finite_mixture(vec![1.0 / 3.0, 2.0 / 3.0], vec![vec![0.25], vec![0.75]]).unwrap();
        let n = 30_000;
        let x = p.sample(n, 5);
        let frac1 = x.iter().filter(|v| **v < 0.5).count() as f64 / n as f64;
        // binomial sd sqrt(2/9 / 30000) = 0.0027
        assert!((frac1 - 1.0 / 3.0).abs() < 0.01, "{frac1}");
        assert!(((1.0 - frac1) - 2.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn mixture_rejects_bad_weights() {
        assert!(NodeDistribution::finite_mixture(vec![0.5, 0.6], vec![vec![0.0], vec![1.0]]).is_err());
        assert!(NodeDistribution::finite_mixture(vec![-0.5, 1.5], vec![vec![0.0], vec![1.0]]).is_err());
        assert!(NodeDistribution::finite_mixture(vec![1.0], vec![vec![0.0], vec![1.0]]).is_err());
    }

    #[test]
    fn pushforward_by_zero_matches_base() {
        let base = NodeDistribution::bumped_surface(0.25);
        let p = NodeDistribution::pushforward(base.clone(), Deformation::zero(3)).unwrap();
        assert_eq!(base.sample(50, 9), p.sample(50, 9));
    }

    #[test]
    fn bumped_surface_has_unit_diameter_bound() {
        let p = NodeDistribution::bumped_surface(0.3);
        let x = p.sample(400, 1);
        let mut diam: f64 = 0.0;
        for i in 0..x.nrows() {
            for j in 0..i {
                let d = (&x.row(i) - &x.row(j)).mapv(|v| v * v).sum().sqrt();
                diam = diam.max(d);
            }
        }
        assert!(diam <= 1.0, "{diam}");
    }
}
