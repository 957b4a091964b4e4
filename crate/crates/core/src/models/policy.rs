//! The evaluator: a ReLU MLP with a sigmoid head, applied with shared
//! weights to each client's uploaded gradient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{gemm, sigmoid, DenseMatrix, MatRef, RngStream};

pub const DEFAULT_HIDDEN: [usize; 3] = [64, 64, 32];

/// Weights and biases for layers `shapes[0] -> shapes[1] -> ... -> 1`,
/// stored flat: for each layer, the `out × in` weight matrix row-major,
/// then its `out` biases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpPolicy {
    shapes: Vec<usize>,
    params: Vec<f64>,
}

/// Per-layer activations kept from a batched forward pass.
#[derive(Debug, Clone)]
pub struct PolicyTrace {
    /// `activations[0]` is the input; `activations[l]` the output of layer l.
    activations: Vec<DenseMatrix>,
}

impl PolicyTrace {
    /// Selection probabilities, one per input row.
    pub fn outputs(&self) -> &[f64] {
        self.activations.last().expect("non-empty trace").as_slice()
    }
}

impl MlpPolicy {
    /// He-uniform hidden layers and a zero output layer, so every
    /// probability starts at exactly 0.5.
    pub fn new(input_dim: usize, hidden: &[usize], rng: &mut RngStream) -> Result<Self> {
        if input_dim == 0 || hidden.contains(&0) {
            return Err(Error::invalid("policy layer widths must be positive"));
        }
        let mut shapes = Vec::with_capacity(hidden.len() + 2);
        shapes.push(input_dim);
        shapes.extend_from_slice(hidden);
        shapes.push(1);
        let mut params = Vec::with_capacity(Self::count_params(&shapes));
        let n_layers = shapes.len() - 1;
        for l in 0..n_layers {
            let (fan_in, fan_out) = (shapes[l], shapes[l + 1]);
            if l + 1 == n_layers {
                params.extend(std::iter::repeat_n(0.0, fan_out * fan_in + fan_out));
            } else {
                let limit = (6.0 / fan_in as f64).sqrt();
                params.extend((0..fan_out * fan_in).map(|_| (2.0 * rng.next_f64() - 1.0) * limit));
                params.extend(std::iter::repeat_n(0.0, fan_out));
            }
        }
        Ok(MlpPolicy { shapes, params })
    }

    pub fn from_parts(shapes: Vec<usize>, params: Vec<f64>) -> Result<Self> {
        if shapes.len() < 2 || *shapes.last().unwrap() != 1 || shapes.contains(&0) {
            return Err(Error::invalid(format!("bad policy shapes {shapes:?}")));
        }
        let expected = Self::count_params(&shapes);
        if params.len() != expected {
            return Err(Error::shape("policy parameters", expected, params.len()));
        }
        if params.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite policy parameter"));
        }
        Ok(MlpPolicy { shapes, params })
    }

    fn count_params(shapes: &[usize]) -> usize {
        shapes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn shapes(&self) -> &[usize] {
        &self.shapes
    }

    pub fn input_dim(&self) -> usize {
        self.shapes[0]
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    /// Offsets of layer `l`'s weights and biases in the flat vector.
    fn layer_range(&self, l: usize) -> (usize, usize, usize) {
        let start: usize = self.shapes[..=l].windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        let (fan_in, fan_out) = (self.shapes[l], self.shapes[l + 1]);
        let bias = start + fan_in * fan_out;
        (start, bias, bias + fan_out)
    }

    /// Forward pass over a batch, one input per row.
    pub fn forward_batch(&self, inputs: &DenseMatrix) -> Result<PolicyTrace> {
        if inputs.cols() != self.input_dim() {
            return Err(Error::shape("policy input", self.input_dim(), inputs.cols()));
        }
        let n_layers = self.shapes.len() - 1;
        let mut activations = Vec::with_capacity(n_layers + 1);
        activations.push(inputs.clone());
        for l in 0..n_layers {
            let (w0, b0, b1) = self.layer_range(l);
            let (fan_in, fan_out) = (self.shapes[l], self.shapes[l + 1]);
            let weights = MatRef::new(&self.params[w0..b0], fan_out, fan_in);
            let prev = activations.last().unwrap();
            let mut z = gemm(MatRef::from(prev), weights.t())?;
            let bias = &self.params[b0..b1];
            let last = l + 1 == n_layers;
            for i in 0..z.rows() {
                for (v, &b) in z.row_mut(i).iter_mut().zip(bias) {
                    let pre = *v + b;
                    *v = if last { sigmoid(pre) } else { pre.max(0.0) };
                }
            }
            activations.push(z);
        }
        Ok(PolicyTrace { activations })
    }

    /// Selection probability for a single input.
    pub fn forward(&self, input: &[f64]) -> Result<f64> {
        let batch = DenseMatrix::from_vec(1, input.len(), input.to_vec())?;
        Ok(self.forward_batch(&batch)?.outputs()[0])
    }

    /// `Σ_i upstream[i] · ∂ω_i/∂φ` for a batch traced by `forward_batch`.
    pub fn backward_batch(&self, trace: &PolicyTrace, upstream: &[f64]) -> Result<Vec<f64>> {
        let n = trace.activations[0].rows();
        if upstream.len() != n {
            return Err(Error::shape("policy upstream", n, upstream.len()));
        }
        let n_layers = self.shapes.len() - 1;
        let mut grad = vec![0.0; self.params.len()];

        // dL/dz at the output: upstream · σ'(z) = upstream · ω(1 - ω).
        let omega = trace.outputs();
        let mut delta = DenseMatrix::from_vec(
            n,
            1,
            upstream.iter().zip(omega).map(|(&u, &w)| u * w * (1.0 - w)).collect(),
        )?;

        for l in (0..n_layers).rev() {
            let (w0, b0, b1) = self.layer_range(l);
            let (fan_in, fan_out) = (self.shapes[l], self.shapes[l + 1]);
            let input = &trace.activations[l];

            let gw = gemm(MatRef::from(&delta).t(), MatRef::from(input))?;
            grad[w0..b0].copy_from_slice(gw.as_slice());
            for row in delta.iter_rows() {
                for (g, &d) in grad[b0..b1].iter_mut().zip(row) {
                    *g += d;
                }
            }
            if l == 0 {
                break;
            }
            // Back through the weights, then the ReLU of layer l - 1.
            let weights = MatRef::new(&self.params[w0..b0], fan_out, fan_in);
            let mut next = gemm(MatRef::from(&delta), weights)?;
            for i in 0..n {
                for (d, &a) in next.row_mut(i).iter_mut().zip(input.row(i)) {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            delta = next;
        }
        Ok(grad)
    }

    /// `upstream · ∂ω/∂φ` for a single input.
    pub fn backward(&self, input: &[f64], upstream: f64) -> Result<Vec<f64>> {
        let batch = DenseMatrix::from_vec(1, input.len(), input.to_vec())?;
        let trace = self.forward_batch(&batch)?;
        self.backward_batch(&trace, &[upstream])
    }
}
