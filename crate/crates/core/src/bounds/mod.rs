//! Theoretical constants and envelopes computed from concrete network and
//! model parameters.
//!
//! Universal constants hidden by the convergence and stability statements
//! are set to 1, so every envelope is a shape curve: it has the right
//! dependence on `n`, `α`, `ρ` and the deformation size, not a certified
//! absolute bound.

use crate::gcn::GcnParams;
use crate::linalg::{abs_spectral_norm, spectral_norm};
use crate::model::{DeformationSize, RandomGraphModel};


/// Filter-norm constants of one layer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayerNorms {
    /// `Σ_k ‖B_k‖`.
    pub h2: f64,
    /// `Σ_k k ‖B_k‖`.
    pub h_partial_2: f64,
    /// `Σ_k ‖|B_k|‖ r^k` with `r = 2 c_max / c_min`.
    pub h_inf: f64,
    /// `Σ_k k ‖B_k‖ r^{k-1}`.
    pub h_partial_inf: f64,
    /// `‖B_0‖`.
    pub b0: f64,
    pub bias: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FilterNorms {
    pub layers: Vec<LayerNorms>,
    /// The ratio `2 c_max / c_min` used in the sup-norm series.
    pub ratio: f64,
}

pub fn compute_filter_norms(params: &GcnParams, c_max: f64, c_min: f64) -> FilterNorms {
    let ratio = 2.0 * c_max / c_min;
    let layers = (0..params.layers())
        .map(|l| {
            let mut n = LayerNorms { h2: 0.0, h_partial_2: 0.0, h_inf: 0.0, h_partial_inf: 0.0, b0: 0.0, bias: 0.0 };
            for k in 0..=params.order() {
                let b = params.filter(l, k);
                let s = spectral_norm(b);
                let kf = k as f64;
                n.h2 += s;
                n.h_partial_2 += kf * s;
                n.h_inf += abs_spectral_norm(b) * ratio.powi(k as i32);
                if k > 0 {
                    n.h_partial_inf += kf * s * ratio.powi(k as i32 - 1);
                } else {
                    n.b0 = s;
                }
            }
            n.bias = params.bias(l).iter().map(|v| v * v).sum::<f64>().sqrt();
            n
        })
        .collect();
    FilterNorms { layers, ratio }
}

impl FilterNorms {
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// `∏_ℓ H_2`, the Lipschitz constant of a discrete GCN on a fixed graph
    /// with respect to its input signal (Frobenius norms).
    pub fn lipschitz_constant(&self) -> f64 {
        self.layers.iter().map(|l| l.h2).product()
    }

    fn product_h2(&self, range: std::ops::Range<usize>) -> f64 {
        self.layers[range].iter().map(|l| l.h2).product()
    }

    /// Bounds on `‖f^{(ℓ)}‖` for `ℓ = 0..=M` given `‖f‖`, using `H_2` for
    /// the `L²(P)` norm or `H_∞` for the sup norm.
    pub fn layer_bounds(&self, signal_norm: f64, norm: NormKind) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.depth() + 1);
        let mut current = signal_norm;
        out.push(current);
        for l in &self.layers {
            let h = match norm {
                NormKind::L2 => l.h2,
                NormKind::Sup => l.h_inf,
            };
            current = h * current + l.bias;
            out.push(current);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    L2,
    Sup,
}

/// Kernel and signal constants of a random graph model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelConstants {
    pub c_max: f64,
    pub c_min: f64,
    pub c_lip: f64,
    /// Number of pieces `n_𝒳` of the piecewise-Lipschitz partition.
    pub n_pieces: usize,
    /// Intrinsic dimension `d_x`.
    pub intrinsic_dimension: usize,
    /// `‖f‖_∞`.
    pub signal_sup: f64,
}

impl ModelConstants {
    pub fn of(model: &RandomGraphModel) -> Self {
        Self {
            c_max: model.kernel.c_max,
            c_min: model.kernel.c_min,
            c_lip: model.kernel.c_lip,
            n_pieces: model.kernel.n_pieces.max(1),
            intrinsic_dimension: model.space.intrinsic_dimension(),
            signal_sup: model.signal.sup_norm_bound,
        }
    }
}

/// Constants of the convergence theorem for one network and one model.
#[derive(Clone, Debug, PartialEq)]
pub struct TheoremConstants {
    /// `C^{(ℓ)}` for `ℓ = 0..=M`.
    pub layer_constants: Vec<f64>,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub model: ModelConstants,
    /// `Σ_ℓ d_ℓ` over all layers, input and output included.
    pub total_width: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Theorem1Envelope {
    pub r_n: f64,
    pub invariant_bound: f64,
    /// `n ≥ D_𝒳(ρ)² + 1/ρ`.
    pub size_condition: bool,
    /// `α ≥ c_max c_min^{-2} log n / n`.
    pub sparsity_condition: bool,
}

impl TheoremConstants {
    pub fn new(norms: &FilterNorms, model: ModelConstants, theta_norm: f64, widths: &[usize]) -> Self {
        let m = norms.depth();
        let mut layer_constants = Vec::with_capacity(m + 1);
        for l in 0..=m {
            let mut c = model.signal_sup * norms.layers[..l].iter().map(|x| x.h_inf).product::<f64>();
            for s in 0..l {
                c += norms.layers[s].bias * norms.layers[s + 1..l].iter().map(|x| x.h_inf).product::<f64>();
            }
            layer_constants.push(theta_norm * c);
        }
        let (mut s1, mut s2) = (0.0, 0.0);
        for l in 0..m {
            let tail = norms.product_h2(l + 1..m);
            s1 += layer_constants[l] * norms.layers[l].h_partial_inf * tail;
            s2 += layer_constants[l] * norms.layers[l].h_partial_2 * tail;
        }
        Self {
            c1: (model.c_max + model.c_lip) / model.c_min * s1,
            c2: model.c_max / (model.c_min * model.c_min) * s2,
            c3: layer_constants[m],
            layer_constants,
            model,
            total_width: widths.iter().sum(),
        }
    }

    /// Builds the constants straight from a network and a model.
    pub fn from_network(params: &GcnParams, model: &RandomGraphModel) -> Self {
        let mc = ModelConstants::of(model);
        let norms = compute_filter_norms(params, mc.c_max, mc.c_min);
        Self::new(&norms, mc, spectral_norm(params.readout_weights()), params.widths())
    }

    /// `D_𝒳(ρ) = (c_Lip/c_min)√d_x + ((c_max + c_Lip)/c_min)√log(n_𝒳/ρ)`.
    pub fn d_x(&self, rho: f64) -> f64 {
        let m = &self.model;
        let log_term = (m.n_pieces as f64 / rho).ln().max(0.0);
        m.c_lip / m.c_min * (m.intrinsic_dimension as f64).sqrt() + (m.c_max + m.c_lip) / m.c_min * log_term.sqrt()
    }

    pub fn r_n(&self, n: usize, alpha: f64, rho: f64) -> f64 {
        let n = n as f64;
        self.c1 * self.d_x(rho / self.total_width as f64) / n.sqrt() + self.c2 / (n * alpha).sqrt()
    }

    pub fn envelope(&self, n: usize, alpha: f64, rho: f64) -> Theorem1Envelope {
        let r_n = self.r_n(n, alpha, rho);
        let nf = n as f64;
        let d = self.d_x(rho);
        let m = &self.model;
        Theorem1Envelope {
            r_n,
            invariant_bound: r_n + self.c3 * (1.0 / rho).ln().max(0.0).sqrt() / nf.sqrt(),
            size_condition: nf >= d * d + 1.0 / rho,
            sparsity_condition: alpha >= m.c_max / (m.c_min * m.c_min) * nf.ln() / nf,
        }
    }
}

/// Convergence envelope of a network on a model at size `n`, sparsity
/// `alpha` and failure probability `rho`.
pub fn theorem1_envelope(
    norms: &FilterNorms,
    model: ModelConstants,
    theta_norm: f64,
    widths: &[usize],
    n: usize,
    alpha: f64,
    rho: f64,
) -> Theorem1Envelope {
    TheoremConstants::new(norms, model, theta_norm, widths).envelope(n, alpha, rho)
}

/// Constants of the deformation-stability bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityConstants {
    /// `‖θ‖ c_min^{-2} Σ_ℓ H_∂2^{(ℓ)} ∏_{s≠ℓ} H_2^{(s)}`.
    pub c: f64,
    /// `‖θ‖ ∏_ℓ H_2^{(ℓ)}`.
    pub c_prime: f64,
}

impl StabilityConstants {
    pub fn new(norms: &FilterNorms, c_min: f64, theta_norm: f64) -> Self {
        let m = norms.depth();
        let sum: f64 = (0..m)
            .map(|l| {
                let others: f64 = (0..m).filter(|&s| s != l).map(|s| norms.layers[s].h2).product();
                norms.layers[l].h_partial_2 * others
            })
            .sum();
        Self { c: theta_norm * sum / (c_min * c_min), c_prime: theta_norm * norms.lipschitz_constant() }
    }
}

/// What the stability bounds need to know about a deformation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityInputs {
    /// `‖f‖` in `L²(P)`.
    pub signal_norm: f64,
    pub size: DeformationSize,
    /// `‖f'_τ − f‖` for the translation-invariant distribution bound.
    pub signal_gap: Option<f64>,
}

/// Right-hand sides of the four deformation bounds; `None` when an input
/// they depend on is unavailable for the model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityEnvelope {
    pub kernel: Option<f64>,
    pub distribution_translation_invariant: Option<f64>,
    pub distribution_general: Option<f64>,
    pub signal: Option<f64>,
}

pub fn stability_envelope(constants: StabilityConstants, inputs: &StabilityInputs) -> StabilityEnvelope {
    let StabilityConstants { c, c_prime } = constants;
    let s = &inputs.size;
    let f = inputs.signal_norm;
    let grad = s.sup_grad_tau;
    let kernel = s.c_grad_w.map(|cg| c * (s.c_w + cg) * f * grad);
    let distribution_translation_invariant = match (kernel, inputs.signal_gap) {
        (Some(k), Some(gap)) => Some(k + c_prime * gap),
        _ => None,
    };
    let density_term = match (s.c_p_tau, s.n_p_tau) {
        (Some(cp), Some(np)) => Some((c * cp.powi(3) * s.c_w + c_prime) * np),
        _ => None,
    };
    let distribution_general = density_term.map(|t| t * f);
    let signal = match (s.c_grad_w, s.c_p_tau, density_term) {
        (Some(cg), Some(cp), Some(t)) => Some((c * cp.sqrt() * (s.c_w + cg) * grad + t) * f),
        _ => None,
    };
    StabilityEnvelope { kernel, distribution_translation_invariant, distribution_general, signal }
}

/// Bound `C_∇w ‖∇τ‖_∞` on the gap between deformed and original degree
/// functions, when the kernel is translation invariant.
pub fn degree_deformation_bound(size: &DeformationSize) -> Option<f64> {
    size.c_grad_w.map(|cg| cg * size.sup_grad_tau)
}

/// Piecewise-Lipschitz constant of a c-GCN output for a `c_f`-Lipschitz
/// input with `‖f‖_{L²(P)} = signal_l2`. Informational only: the layer norms
/// use the `L²` layer bounds, so the constant is loose.
pub fn cgcn_lipschitz_constant(norms: &FilterNorms, model: ModelConstants, theta_norm: f64, c_f: f64, signal_l2: f64) -> f64 {
    let layer_l2 = norms.layer_bounds(signal_l2, NormKind::L2);
    let b0_product: f64 = norms.layers.iter().map(|l| l.b0).product();
    let mut sum = 0.0;
    let mut prefix = 1.0;
    for (l, ln) in norms.layers.iter().enumerate() {
        sum += ln.h2 * layer_l2[l] * prefix;
        prefix *= ln.b0;
    }
    theta_norm * (c_f * b0_product + model.c_lip * model.c_max / (model.c_min * model.c_min) * sum)
}
