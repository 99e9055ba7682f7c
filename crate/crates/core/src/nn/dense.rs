use rand::Rng;
use serde::{Deserialize, Serialize};

/// Dot product with four independent accumulators; the summation order is fixed, so results are
/// reproducible.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Fully connected layer `y = W x + b`, `W` stored row-major as `outputs x inputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    /// He-style uniform initialisation, `U(-sqrt(6 / fan_in), sqrt(6 / fan_in))`, zero bias.
    pub fn he_uniform<R: Rng + ?Sized>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let limit = (6.0 / inputs as f64).sqrt();
        let weights = (0..inputs * outputs)
            .map(|_| rng.random_range(-limit..limit))
            .collect();
        Self {
            inputs,
            outputs,
            weights,
            bias: vec![0.0; outputs],
        }
    }

    pub fn forward(&self, x: &[f64], out: &mut [f64]) {
        for (o, y) in out.iter_mut().enumerate() {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            *y = self.bias[o] + dot(row, x);
        }
    }

    /// Accumulates `dL/dW` and `dL/db` into `grad` given the pre-activation output gradient, and
    /// writes `dL/dx` into `dx` when requested.
    pub fn backward(&self, x: &[f64], dy: &[f64], grad: &mut Dense, dx: Option<&mut [f64]>) {
        for (o, &g) in dy.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            grad.bias[o] += g;
            axpy(g, x, &mut grad.weights[o * self.inputs..(o + 1) * self.inputs]);
        }
        if let Some(dx) = dx {
            dx.iter_mut().for_each(|v| *v = 0.0);
            for (o, &g) in dy.iter().enumerate() {
                if g != 0.0 {
                    axpy(g, &self.weights[o * self.inputs..(o + 1) * self.inputs], dx);
                }
            }
        }
    }
}

/// Stack of dense layers with ReLU between them. The last layer is linear unless
/// `relu_output` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Dense>,
    pub relu_output: bool,
}

/// Activations recorded by [`Mlp::forward_trace`]; entry 0 is the input, entry `l + 1` is the
/// post-activation output of layer `l`.
#[derive(Debug, Clone)]
pub struct MlpTrace {
    pub activations: Vec<Vec<f64>>,
}

impl MlpTrace {
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("trace holds the input")
    }
}

impl Mlp {
    /// `widths` lists every layer width including input and output.
    pub fn new<R: Rng + ?Sized>(widths: &[usize], relu_output: bool, rng: &mut R) -> Self {
        assert!(widths.len() >= 2, "an MLP needs input and output widths");
        let layers = widths
            .windows(2)
            .map(|w| Dense::he_uniform(w[0], w[1], rng))
            .collect();
        Self {
            layers,
            relu_output,
        }
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().expect("non-empty").outputs
    }

    fn applies_relu(&self, layer: usize) -> bool {
        layer + 1 < self.layers.len() || self.relu_output
    }

    pub fn forward_trace(&self, x: &[f64]) -> MlpTrace {
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(x.to_vec());
        for (l, layer) in self.layers.iter().enumerate() {
            let mut out = vec![0.0; layer.outputs];
            layer.forward(activations.last().expect("non-empty"), &mut out);
            if self.applies_relu(l) {
                out.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            activations.push(out);
        }
        MlpTrace { activations }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut current = x.to_vec();
        for (l, layer) in self.layers.iter().enumerate() {
            let mut out = vec![0.0; layer.outputs];
            layer.forward(&current, &mut out);
            if self.applies_relu(l) {
                out.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            current = out;
        }
        current
    }

    /// Backpropagates `d_out` (gradient w.r.t. the post-activation output) and accumulates
    /// parameter gradients into `grad`. Returns the gradient w.r.t. the input when `want_input`.
    pub fn backward(
        &self,
        trace: &MlpTrace,
        d_out: &[f64],
        grad: &mut Mlp,
        want_input: bool,
    ) -> Option<Vec<f64>> {
        let mut delta = d_out.to_vec();
        for l in (0..self.layers.len()).rev() {
            if self.applies_relu(l) {
                for (d, &a) in delta.iter_mut().zip(&trace.activations[l + 1]) {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            let layer = &self.layers[l];
            if l > 0 || want_input {
                let mut dx = vec![0.0; layer.inputs];
                layer.backward(&trace.activations[l], &delta, &mut grad.layers[l], Some(&mut dx));
                delta = dx;
            } else {
                layer.backward(&trace.activations[l], &delta, &mut grad.layers[l], None);
            }
        }
        want_input.then_some(delta)
    }

    pub(crate) fn slices(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.as_slice(), l.bias.as_slice()])
            .collect()
    }

    pub(crate) fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weights.as_mut_slice(), l.bias.as_mut_slice()])
            .collect()
    }

    pub(crate) fn check_chain(&self, what: &str) -> crate::Result<()> {
        for (i, w) in self.layers.windows(2).enumerate() {
            if w[0].outputs != w[1].inputs {
                return Err(crate::Error::Config(format!(
                    "{what}: layer {i} outputs {} but layer {} expects {}",
                    w[0].outputs,
                    i + 1,
                    w[1].inputs
                )));
            }
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.weights.len() != l.inputs * l.outputs || l.bias.len() != l.outputs {
                return Err(crate::Error::Config(format!(
                    "{what}: layer {i} storage does not match {}x{}",
                    l.outputs, l.inputs
                )));
            }
        }
        Ok(())
    }
}
