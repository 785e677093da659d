use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 3e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Adam with bias correction. Moment buffers are kept per tensor; a tensor
/// whose gradient holds a non-finite entry is left untouched for that step.
#[derive(Debug, Clone)]
pub struct Adam {
    pub config: AdamConfig,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: Vec<u64>,
    skipped: u64,
}

impl Adam {
    pub fn new(config: AdamConfig, params: &[Tensor]) -> Self {
        Self {
            config,
            m: params.iter().map(|p| vec![0.0; p.len()]).collect(),
            v: params.iter().map(|p| vec![0.0; p.len()]).collect(),
            t: vec![0; params.len()],
            skipped: 0,
        }
    }

    /// Number of tensor updates skipped because of non-finite gradients.
    pub fn skipped(&self) -> u64 {
        self.skipped
    }

    pub fn step(&mut self, params: &mut [Tensor]) {
        assert_eq!(params.len(), self.m.len(), "optimizer state does not match parameters");
        let AdamConfig {
            lr,
            beta1,
            beta2,
            eps,
        } = self.config;
        for (i, p) in params.iter_mut().enumerate() {
            assert_eq!(p.len(), self.m[i].len(), "optimizer state does not match tensor {i}");
            if p.grad.iter().any(|g| !g.is_finite()) {
                self.skipped += 1;
                log::warn!("adam: non-finite gradient in tensor {i}, update skipped");
                continue;
            }
            self.t[i] += 1;
            let t = self.t[i] as i32;
            let bc1 = 1.0 - beta1.powi(t);
            let bc2 = 1.0 - beta2.powi(t);
            let (m, v) = (&mut self.m[i], &mut self.v[i]);
            for ((w, g), (mi, vi)) in p
                .values
                .iter_mut()
                .zip(&p.grad)
                .zip(m.iter_mut().zip(v.iter_mut()))
            {
                *mi = beta1 * *mi + (1.0 - beta1) * g;
                *vi = beta2 * *vi + (1.0 - beta2) * g * g;
                let mhat = *mi / bc1;
                let vhat = *vi / bc2;
                *w -= lr * mhat / (vhat.sqrt() + eps);
            }
        }
    }
}
