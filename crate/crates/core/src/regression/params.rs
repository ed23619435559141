//! Named parameter tensors, AdamW, the linear decay schedule and global-norm
//! gradient clipping.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Row-major matrix (or vector when `cols == 1`) with a name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    /// Weight decay applies to this tensor.
    pub decay: bool,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(name: impl Into<String>, rows: usize, cols: usize, decay: bool) -> Self {
        Self {
            name: name.into(),
            rows,
            cols,
            decay,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn filled(name: impl Into<String>, rows: usize, cols: usize, value: f64) -> Self {
        let mut t = Self::zeros(name, rows, cols, false);
        t.data.fill(value);
        t
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub tensors: Vec<Tensor>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self { tensors: Vec::new() }
    }

    /// Appends a tensor and returns its slot.
    pub fn push(&mut self, t: Tensor) -> usize {
        self.tensors.push(t);
        self.tensors.len() - 1
    }

    /// Same layout, all zeros.
    pub fn zeros_like(&self) -> Self {
        Self {
            tensors: self
                .tensors
                .iter()
                .map(|t| Tensor::zeros(t.name.clone(), t.rows, t.cols, t.decay))
                .collect(),
        }
    }

    pub fn fill_zero(&mut self) {
        for t in &mut self.tensors {
            t.data.fill(0.0);
        }
    }

    pub fn n_values(&self) -> usize {
        self.tensors.iter().map(|t| t.data.len()).sum()
    }

    pub fn get(&self, slot: usize) -> &[f64] {
        &self.tensors[slot].data
    }

    pub fn get_mut(&mut self, slot: usize) -> &mut [f64] {
        &mut self.tensors[slot].data
    }

    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.tensors.iter().flat_map(|t| t.data.iter())
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.tensors.iter_mut().flat_map(|t| t.data.iter_mut())
    }

    pub fn scale(&mut self, factor: f64) {
        self.values_mut().for_each(|v| *v *= factor);
    }

    pub fn global_norm(&self) -> f64 {
        libm::sqrt(self.values().map(|v| v * v).sum())
    }

    pub fn same_layout(&self, other: &ParamSet) -> bool {
        self.tensors.len() == other.tensors.len()
            && self
                .tensors
                .iter()
                .zip(&other.tensors)
                .all(|(a, b)| a.name == b.name && a.shape() == b.shape())
    }

    /// Flat little-endian dump of every value, in slot order.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        self.values().flat_map(|v| v.to_le_bytes()).collect()
    }

    /// Overwrites every value from a dump made by [`ParamSet::to_le_bytes`].
    pub fn load_le_bytes(&mut self, bytes: &[u8]) -> Result<()> {
        if bytes.len() != self.n_values() * 8 {
            return Err(Error::ParamLayout(format!(
                "expected {} bytes, got {}",
                self.n_values() * 8,
                bytes.len()
            )));
        }
        for (v, chunk) in self.values_mut().zip(bytes.chunks_exact(8)) {
            let mut raw = [0u8; 8];
            raw.copy_from_slice(chunk);
            *v = f64::from_le_bytes(raw);
        }
        Ok(())
    }
}

impl Default for ParamSet {
    fn default() -> Self {
        Self::new()
    }
}

/// Rescales `grads` so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_global_norm(grads: &mut ParamSet, max_norm: f64) -> f64 {
    let norm = grads.global_norm();
    if norm > max_norm {
        grads.scale(max_norm / norm);
    }
    norm
}

/// Learning rate decaying linearly from `base` at step 0 to 0 at `total`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearDecay {
    pub base: f64,
    pub total_steps: usize,
}

impl LinearDecay {
    pub fn at(&self, step: usize) -> f64 {
        if self.total_steps == 0 {
            return self.base;
        }
        let remaining = 1.0 - step as f64 / self.total_steps as f64;
        self.base * remaining.max(0.0)
    }
}

/// AdamW with decoupled weight decay.
#[derive(Debug, Clone)]
pub struct AdamW {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    step: u64,
    m: ParamSet,
    v: ParamSet,
}

impl AdamW {
    pub fn new(params: &ParamSet, weight_decay: f64) -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay,
            step: 0,
            m: params.zeros_like(),
            v: params.zeros_like(),
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    pub fn step(&mut self, params: &mut ParamSet, grads: &ParamSet, lr: f64) {
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - libm::pow(self.beta1, f64::from(t));
        let bc2 = 1.0 - libm::pow(self.beta2, f64::from(t));
        for (((p, g), m), v) in params
            .tensors
            .iter_mut()
            .zip(&grads.tensors)
            .zip(&mut self.m.tensors)
            .zip(&mut self.v.tensors)
        {
            let decay = if p.decay { lr * self.weight_decay } else { 0.0 };
            for i in 0..p.data.len() {
                let gi = g.data[i];
                m.data[i] = self.beta1 * m.data[i] + (1.0 - self.beta1) * gi;
                v.data[i] = self.beta2 * v.data[i] + (1.0 - self.beta2) * gi * gi;
                let m_hat = m.data[i] / bc1;
                let v_hat = v.data[i] / bc2;
                p.data[i] -= decay * p.data[i];
                p.data[i] -= lr * m_hat / (libm::sqrt(v_hat) + self.eps);
            }
        }
    }
}
