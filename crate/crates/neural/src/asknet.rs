//! The asking network: three 3×3 convolutions and two dense layers on a
//! shared trunk, with a policy head and a scalar value head.
//!
//! The same trunk backs the learned option selector; only the width of the
//! policy head differs (`2·K` logits for asking, `K` for option selection).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NeuralError, Result};
use crate::graph::{Graph, Var};
use crate::kernels::{gemm, im2col};
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetConfig {
    /// Input grid width in cells.
    pub width: usize,
    /// Input grid height in cells.
    pub height: usize,
    #[serde(default = "default_in_channels")]
    pub in_channels: usize,
    #[serde(default = "default_conv")]
    pub conv_channels: [usize; 3],
    #[serde(default = "default_hidden")]
    pub hidden: [usize; 2],
    pub policy_outputs: usize,
}

fn default_in_channels() -> usize {
    4
}

fn default_conv() -> [usize; 3] {
    [16, 32, 32]
}

fn default_hidden() -> [usize; 2] {
    [128, 64]
}

impl NetConfig {
    pub fn new(width: usize, height: usize, policy_outputs: usize) -> Self {
        Self {
            width,
            height,
            in_channels: default_in_channels(),
            conv_channels: default_conv(),
            hidden: default_hidden(),
            policy_outputs,
        }
    }

    pub fn with_widths(mut self, conv: [usize; 3], hidden: [usize; 2]) -> Self {
        self.conv_channels = conv;
        self.hidden = hidden;
        self
    }

    /// Shape of one input sample, channels first.
    pub fn input_shape(&self) -> [usize; 3] {
        [self.in_channels, self.height, self.width]
    }

    pub fn input_len(&self) -> usize {
        self.in_channels * self.height * self.width
    }

    /// Parameter shapes in declaration order.
    pub fn param_shapes(&self) -> Vec<Vec<usize>> {
        let [c1, c2, c3] = self.conv_channels;
        let [h1, h2] = self.hidden;
        let flat = c3 * self.width * self.height;
        vec![
            vec![c1, self.in_channels, 3, 3],
            vec![c1],
            vec![c2, c1, 3, 3],
            vec![c2],
            vec![c3, c2, 3, 3],
            vec![c3],
            vec![flat, h1],
            vec![h1],
            vec![h1, h2],
            vec![h2],
            vec![h2, self.policy_outputs],
            vec![self.policy_outputs],
            vec![h2, 1],
            vec![1],
        ]
    }
}

pub(crate) const POLICY_W: usize = 10;
pub(crate) const VALUE_W: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct AskNet {
    config: NetConfig,
    pub params: Vec<Tensor>,
}

/// Graph handles produced by [`AskNet::forward`].
#[derive(Debug, Clone)]
pub struct ForwardVars {
    /// `[B, policy_outputs]`
    pub logits: Var,
    /// `[B]`
    pub value: Var,
    pub params: Vec<Var>,
}

impl AskNet {
    /// Orthogonal init with gain 1 (policy head scaled by 0.01), zero biases.
    pub fn new<R: Rng + ?Sized>(config: NetConfig, rng: &mut R) -> Self {
        let params = config
            .param_shapes()
            .iter()
            .enumerate()
            .map(|(i, shape)| {
                if shape.len() == 1 {
                    return Tensor::zeros(shape);
                }
                let gain = if i == POLICY_W { 0.01 } else { 1.0 };
                // Conv weights are [out, in·9]; dense weights are [in, out].
                let (rows, cols) = if shape.len() == 4 {
                    (shape[0], shape[1] * 9)
                } else {
                    (shape[1], shape[0])
                };
                let m = orthogonal(rows, cols, gain, rng);
                let values = if shape.len() == 4 {
                    m
                } else {
                    transpose(rows, cols, &m)
                };
                Tensor::from_vec(shape, values)
            })
            .collect();
        Self { config, params }
    }

    pub fn zeros(config: NetConfig) -> Self {
        let params = config.param_shapes().iter().map(|s| Tensor::zeros(s)).collect();
        Self { config, params }
    }

    pub fn config(&self) -> &NetConfig {
        &self.config
    }

    pub fn num_params(&self) -> usize {
        self.params.iter().map(Tensor::len).sum()
    }

    pub fn zero_grad(&mut self) {
        self.params.iter_mut().for_each(Tensor::zero_grad);
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(Tensor::is_finite)
    }

    /// Record a forward pass over a batch. `input` holds `batch` samples laid
    /// out as [`NetConfig::input_shape`].
    pub fn forward(&self, g: &mut Graph, input: Vec<f64>, batch: usize) -> Result<ForwardVars> {
        let [c, h, w] = self.config.input_shape();
        if input.len() != batch * c * h * w {
            return Err(NeuralError::ShapeMismatch {
                expected: vec![batch, c, h, w],
                actual: vec![input.len()],
            });
        }
        let x = g.input(&[batch, c, h, w], input);
        Ok(self.forward_var(g, x))
    }

    /// Forward from an existing graph node of shape `[B, C, H, W]`.
    pub fn forward_var(&self, g: &mut Graph, x: Var) -> ForwardVars {
        let p: Vec<Var> = self.params.iter().map(|t| g.param(t)).collect();
        let (logits, value) = self.forward_with_params(g, x, &p);
        ForwardVars {
            logits,
            value,
            params: p,
        }
    }

    /// Forward with caller-supplied parameter nodes (declaration order).
    /// Returns `(logits [B, outputs], value [B])`.
    pub fn forward_with_params(&self, g: &mut Graph, x: Var, p: &[Var]) -> (Var, Var) {
        let batch = g.shape(x)[0];
        let mut h = x;
        for layer in 0..3 {
            h = g.conv3x3(h, p[2 * layer], p[2 * layer + 1]);
            h = g.relu(h);
        }
        let flat = self.config.conv_channels[2] * self.config.width * self.config.height;
        h = g.reshape(h, &[batch, flat]);
        h = g.linear(h, p[6], p[7]);
        h = g.relu(h);
        h = g.linear(h, p[8], p[9]);
        h = g.relu(h);
        let logits = g.linear(h, p[POLICY_W], p[POLICY_W + 1]);
        let value = g.linear(h, p[VALUE_W], p[VALUE_W + 1]);
        (logits, g.reshape(value, &[batch]))
    }

    /// Gradient-free evaluation: returns (logits `[B·outputs]`, values `[B]`).
    /// Runs the kernels directly on the parameter buffers, without a tape.
    pub fn infer(&self, input: Vec<f64>, batch: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let [c, h, w] = self.config.input_shape();
        if input.len() != batch * c * h * w {
            return Err(NeuralError::ShapeMismatch {
                expected: vec![batch, c, h, w],
                actual: vec![input.len()],
            });
        }
        let hw = h * w;
        let p = &self.params;
        let mut act = input;
        let mut ci = c;
        let mut cols = Vec::new();
        for layer in 0..3 {
            let co = self.config.conv_channels[layer];
            let (wt, bias) = (&p[2 * layer].values, &p[2 * layer + 1].values);
            cols.resize(ci * 9 * hw, 0.0);
            let mut out = vec![0.0; batch * co * hw];
            for n in 0..batch {
                im2col(&act[n * ci * hw..(n + 1) * ci * hw], ci, h, w, &mut cols);
                let o = &mut out[n * co * hw..(n + 1) * co * hw];
                for (ch, plane) in o.chunks_mut(hw).enumerate() {
                    plane.iter_mut().for_each(|v| *v = bias[ch]);
                }
                gemm(co, ci * 9, hw, wt, false, &cols, false, 1.0, o);
            }
            out.iter_mut().for_each(|v| *v = v.max(0.0));
            act = out;
            ci = co;
        }
        let dense = |x: &[f64], fin: usize, wi: usize, relu: bool| {
            let (wt, bias) = (&p[wi].values, &p[wi + 1].values);
            let fout = bias.len();
            let mut out: Vec<f64> = bias.iter().cycle().take(batch * fout).cloned().collect();
            gemm(batch, fin, fout, x, false, wt, false, 1.0, &mut out);
            if relu {
                out.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            out
        };
        let [h1, h2] = self.config.hidden;
        let z1 = dense(&act, ci * hw, 6, true);
        let z2 = dense(&z1, h1, 8, true);
        Ok((dense(&z2, h2, POLICY_W, false), dense(&z2, h2, VALUE_W, false)))
    }

    /// Add gradients recorded on `g` into the parameter accumulators.
    pub fn accumulate_grads(&mut self, g: &Graph, vars: &ForwardVars) {
        for (t, v) in self.params.iter_mut().zip(&vars.params) {
            g.accumulate_into(*v, t);
        }
    }
}

fn transpose(rows: usize, cols: usize, m: &[f64]) -> Vec<f64> {
    let mut t = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            t[c * rows + r] = m[r * cols + c];
        }
    }
    t
}

fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box-Muller; u1 is kept away from zero.
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// A `rows × cols` matrix with orthonormal rows (if rows ≤ cols) or columns
/// (otherwise), scaled by `gain`. Modified Gram-Schmidt on Gaussian draws.
pub fn orthogonal<R: Rng + ?Sized>(rows: usize, cols: usize, gain: f64, rng: &mut R) -> Vec<f64> {
    let (n, d) = if rows <= cols { (rows, cols) } else { (cols, rows) };
    let mut vecs: Vec<Vec<f64>> = Vec::with_capacity(n);
    while vecs.len() < n {
        let mut v: Vec<f64> = (0..d).map(|_| standard_normal(rng)).collect();
        for u in &vecs {
            let dot: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= dot * b);
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        v.iter_mut().for_each(|a| *a /= norm);
        vecs.push(v);
    }
    let mut m = vec![0.0; rows * cols];
    for (i, v) in vecs.iter().enumerate() {
        for (j, a) in v.iter().enumerate() {
            if rows <= cols {
                m[i * cols + j] = gain * a;
            } else {
                m[j * cols + i] = gain * a;
            }
        }
    }
    m
}
