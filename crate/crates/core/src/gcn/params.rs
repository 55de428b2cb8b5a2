use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, Array3, ArrayView1, ArrayView2, ArrayView3};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::spectral_norm;
use crate::rng::{rng_for, stream};

/// Pointwise nonlinearity. Every variant satisfies `|ρ(x)| ≤ |x|` and is
/// 1-Lipschitz.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Activation {
    Relu,
    Abs,
    Tanh,
}

impl Activation {
    pub const ALL: [Activation; 3] = [Activation::Relu, Activation::Abs, Activation::Tanh];

    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Abs => x.abs(),
            Activation::Tanh => x.tanh(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Abs => "abs",
            Activation::Tanh => "tanh",
        }
    }

    /// `ρ(s x) = s ρ(x)` for `s > 0`.
    pub fn is_positively_homogeneous(self) -> bool {
        !matches!(self, Activation::Tanh)
    }
}

impl FromStr for Activation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "abs" => Ok(Activation::Abs),
            "tanh" => Ok(Activation::Tanh),
            "sigmoid" => Err(Error::config(
                "network.activation",
                "sigmoid violates |rho(x)| <= |x| (rho(0) = 1/2); use tanh",
            )),
            other => Err(Error::config("network.activation", format!("unknown activation `{other}`; use relu, abs or tanh"))),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How [`GcnParams::random`] scales the Gaussian coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScalePolicy {
    /// Standard deviation `scale / (√d_ℓ (K + 1))`.
    Fixed(f64),
    /// As `Fixed(1.0)`, then each layer is rescaled so `Σ_k ‖B_k‖ = 1`.
    UnitH2,
}

impl Default for ScalePolicy {
    fn default() -> Self {
        ScalePolicy::Fixed(1.0)
    }
}

impl FromStr for ScalePolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit-h2" | "unit-H2" => Ok(ScalePolicy::UnitH2),
            "default" => Ok(ScalePolicy::Fixed(1.0)),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|v| *v >= 0.0 && v.is_finite())
                .map(ScalePolicy::Fixed)
                .ok_or_else(|| Error::config("network.scale", format!("expected `unit-h2`, `default` or a nonnegative number, got `{other}`"))),
        }
    }
}

/// Parameters of an M-layer GCN with order-K polynomial filters.
///
/// Layer `ℓ` holds coefficients of shape `(K + 1, d_{ℓ+1}, d_ℓ)`, i.e. the
/// matrices `B_0 … B_K`, and a bias of length `d_{ℓ+1}`. The readout is
/// `Z θ + 1 bᵀ` with `θ` of shape `d_M × d_out`.
#[derive(Clone, Debug, PartialEq)]
pub struct GcnParams {
    widths: Vec<usize>,
    order: usize,
    coefficients: Vec<Array3<f64>>,
    biases: Vec<Array1<f64>>,
    readout_weights: Array2<f64>,
    readout_bias: Array1<f64>,
    activation: Activation,
}

impl GcnParams {
    pub fn new(
        widths: Vec<usize>,
        order: usize,
        coefficients: Vec<Array3<f64>>,
        biases: Vec<Array1<f64>>,
        readout_weights: Array2<f64>,
        readout_bias: Array1<f64>,
        activation: Activation,
    ) -> Result<Self> {
        if widths.is_empty() || widths.contains(&0) {
            return Err(Error::config("network.widths", "need at least one positive width"));
        }
        let m = widths.len() - 1;
        if coefficients.len() != m || biases.len() != m {
            return Err(Error::shape(
                format!("{m} coefficient tensors and biases"),
                format!("{} and {}", coefficients.len(), biases.len()),
            ));
        }
        for l in 0..m {
            let expect = (order + 1, widths[l + 1], widths[l]);
            if coefficients[l].dim() != expect {
                return Err(Error::shape(format!("layer {l} coefficients {expect:?}"), format!("{:?}", coefficients[l].dim())));
            }
            if biases[l].len() != widths[l + 1] {
                return Err(Error::shape(format!("layer {l} bias of length {}", widths[l + 1]), biases[l].len()));
            }
        }
        if readout_weights.nrows() != widths[m] || readout_weights.ncols() != readout_bias.len() || readout_bias.is_empty() {
            return Err(Error::shape(
                format!("readout {} x d_out with matching bias", widths[m]),
                format!("{:?} and {}", readout_weights.dim(), readout_bias.len()),
            ));
        }
        let finite = coefficients.iter().all(|c| c.iter().all(|v| v.is_finite()))
            && biases.iter().all(|b| b.iter().all(|v| v.is_finite()))
            && readout_weights.iter().chain(readout_bias.iter()).all(|v| v.is_finite());
        if !finite {
            return Err(Error::config("network", "parameters must be finite"));
        }
        Ok(Self { widths, order, coefficients, biases, readout_weights, readout_bias, activation })
    }

    /// The zero-layer network `Z ↦ Z`.
    pub fn identity(d: usize) -> Self {
        Self::new(vec![d], 0, vec![], vec![], Array2::eye(d), Array1::zeros(d), Activation::Relu).expect("valid identity")
    }

    /// Untrained network with i.i.d. Gaussian filter coefficients, zero
    /// biases and identity readout, deterministic per `seed`.
    pub fn random(widths: &[usize], order: usize, seed: u64, policy: ScalePolicy, activation: Activation) -> Result<Self> {
        if widths.is_empty() || widths.contains(&0) {
            return Err(Error::config("network.widths", "need at least one positive width"));
        }
        let scale = match policy {
            ScalePolicy::Fixed(s) => s,
            ScalePolicy::UnitH2 => 1.0,
        };
        let mut coefficients = Vec::with_capacity(widths.len() - 1);
        for l in 0..widths.len() - 1 {
            let sd = scale / ((widths[l] as f64).sqrt() * (order + 1) as f64);
            let mut rng = rng_for(seed, stream::INIT, l as u64);
            let mut c = Array3::from_shape_simple_fn((order + 1, widths[l + 1], widths[l]), || {
                let z: f64 = StandardNormal.sample(&mut rng);
                sd * z
            });
            if policy == ScalePolicy::UnitH2 {
                let h2: f64 = (0..=order).map(|k| spectral_norm(c.index_axis(ndarray::Axis(0), k))).sum();
                if h2 > 0.0 {
                    c.mapv_inplace(|v| v / h2);
                }
            }
            coefficients.push(c);
        }
        let biases = widths[1..].iter().map(|&d| Array1::zeros(d)).collect();
        let d_m = *widths.last().unwrap();
        Self::new(widths.to_vec(), order, coefficients, biases, Array2::eye(d_m), Array1::zeros(d_m), activation)
    }

    pub fn with_biases(mut self, biases: Vec<Array1<f64>>) -> Result<Self> {
        self.biases = biases;
        Self::new(self.widths, self.order, self.coefficients, self.biases, self.readout_weights, self.readout_bias, self.activation)
    }

    pub fn with_readout(mut self, weights: Array2<f64>, bias: Array1<f64>) -> Result<Self> {
        self.readout_weights = weights;
        self.readout_bias = bias;
        Self::new(self.widths, self.order, self.coefficients, self.biases, self.readout_weights, self.readout_bias, self.activation)
    }

    pub fn with_activation(mut self, activation: Activation) -> Self {
        self.activation = activation;
        self
    }

    /// Number of layers M.
    pub fn layers(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        self.readout_bias.len()
    }

    /// Coefficient tensor of layer `l`, shape `(K + 1, d_{l+1}, d_l)`.
    pub fn coefficients(&self, l: usize) -> ArrayView3<'_, f64> {
        self.coefficients[l].view()
    }

    /// `B_k` of layer `l`, shape `d_{l+1} × d_l`.
    pub fn filter(&self, l: usize, k: usize) -> ArrayView2<'_, f64> {
        self.coefficients[l].index_axis(ndarray::Axis(0), k)
    }

    pub fn bias(&self, l: usize) -> ArrayView1<'_, f64> {
        self.biases[l].view()
    }

    pub fn readout_weights(&self) -> ArrayView2<'_, f64> {
        self.readout_weights.view()
    }

    pub fn readout_bias(&self) -> ArrayView1<'_, f64> {
        self.readout_bias.view()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }
}
