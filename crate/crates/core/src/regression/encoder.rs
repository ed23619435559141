//! Sequence encoders.
//!
//! [`SequenceEncoder`] is the backend contract used by the regression head:
//! tokenize words into pieces, map pieces to hidden vectors and propagate
//! gradients back into the encoder's own tensors. [`TinyTransformer`] is the
//! CPU desk-scale backend: a post-norm transformer encoder with learned
//! position embeddings, trained end to end in `f64`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::linalg::{acc_a_bt, acc_at_b, acc_col_sum, affine};
use super::params::{ParamSet, Tensor};
use super::tokenize::{HashedChunks, Piece, SubwordTokenizer};
use crate::{Error, Result};

pub trait SequenceEncoder {
    type Cache;

    fn hidden_size(&self) -> usize;

    /// Longest piece sequence (special tokens included) the encoder accepts.
    fn max_pieces(&self) -> usize;

    fn encode_words(&self, words: &[&str]) -> Vec<Piece>;

    /// Appends the encoder's initial tensors to `params`.
    fn init_params(&self, params: &mut ParamSet);

    /// Number of tensors [`SequenceEncoder::init_params`] appends; they always
    /// occupy the first slots of the model's parameter set.
    fn n_tensors(&self) -> usize;

    /// Hidden states, `pieces × hidden_size`, row-major.
    fn forward(&self, params: &ParamSet, pieces: &[Piece]) -> (Vec<f64>, Self::Cache);

    /// Accumulates encoder gradients for upstream gradient `d_hidden`.
    fn backward(&self, params: &ParamSet, cache: &Self::Cache, d_hidden: &[f64], grads: &mut ParamSet);
}

/// Word-length buckets of the shape embedding; bucket 0 marks special
/// tokens and the last bucket collects every longer word.
pub const LENGTH_BUCKETS: usize = 16;

fn length_bucket(piece: &Piece) -> usize {
    piece.word_chars.min(LENGTH_BUCKETS - 1)
}

const OUTPUT_GAIN: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeskConfig {
    pub layers: usize,
    pub hidden: usize,
    pub heads: usize,
    pub ffn: usize,
    pub vocab: usize,
    pub max_pieces: usize,
    /// Characters per hashed subword chunk.
    pub chunk: usize,
    /// Standard deviation of the (uniform) weight initialisation.
    pub init_std: f64,
    /// Seed of the encoder weights; plays the role of a checkpoint.
    pub init_seed: u64,
    /// Initial gain of the last layer norm, i.e. the scale of the hidden
    /// states the regression head reads.
    pub output_gain: f64,
}

impl Default for DeskConfig {
    fn default() -> Self {
        Self {
            layers: 2,
            hidden: 32,
            heads: 2,
            ffn: 64,
            vocab: 2048,
            max_pieces: 64,
            chunk: 3,
            init_std: 0.02,
            init_seed: 0,
            output_gain: OUTPUT_GAIN,
        }
    }
}

impl DeskConfig {
    pub fn check(&self) -> Result<()> {
        if self.hidden == 0 || self.heads == 0 || !self.hidden.is_multiple_of(self.heads) {
            return Err(Error::InvalidConfig(format!(
                "hidden {} must be a positive multiple of heads {}",
                self.hidden, self.heads
            )));
        }
        if self.vocab <= 3 || self.max_pieces < 3 || self.ffn == 0 || self.chunk == 0 {
            return Err(Error::InvalidConfig(format!("degenerate encoder config {self:?}")));
        }
        Ok(())
    }
}

const EPS: f64 = 1e-5;
const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)

fn gelu(u: f64) -> f64 {
    0.5 * u * (1.0 + libm::tanh(GELU_C * (u + 0.044715 * u * u * u)))
}

fn gelu_grad(u: f64) -> f64 {
    let t = libm::tanh(GELU_C * (u + 0.044715 * u * u * u));
    0.5 * (1.0 + t) + 0.5 * u * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * 0.044715 * u * u)
}

#[derive(Debug, Clone)]
struct NormCache {
    xhat: Vec<f64>,
    inv_std: Vec<f64>,
}

fn layer_norm(x: &[f64], gain: &[f64], bias: &[f64], d: usize, out: &mut [f64]) -> NormCache {
    let n = x.len() / d;
    let mut xhat = vec![0.0; x.len()];
    let mut inv_std = vec![0.0; n];
    for i in 0..n {
        let row = &x[i * d..(i + 1) * d];
        let mean = row.iter().sum::<f64>() / d as f64;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / d as f64;
        let s = 1.0 / libm::sqrt(var + EPS);
        inv_std[i] = s;
        for j in 0..d {
            let h = (row[j] - mean) * s;
            xhat[i * d + j] = h;
            out[i * d + j] = h * gain[j] + bias[j];
        }
    }
    NormCache { xhat, inv_std }
}

/// Returns dx and accumulates gain/bias gradients.
fn layer_norm_backward(
    cache: &NormCache,
    gain: &[f64],
    dy: &[f64],
    d: usize,
    d_gain: &mut [f64],
    d_bias: &mut [f64],
) -> Vec<f64> {
    let n = dy.len() / d;
    let mut dx = vec![0.0; dy.len()];
    let mut dxhat = vec![0.0; d];
    for i in 0..n {
        let xh = &cache.xhat[i * d..(i + 1) * d];
        let g = &dy[i * d..(i + 1) * d];
        let mut sum = 0.0;
        let mut dot = 0.0;
        for j in 0..d {
            d_gain[j] += g[j] * xh[j];
            d_bias[j] += g[j];
            dxhat[j] = g[j] * gain[j];
            sum += dxhat[j];
            dot += dxhat[j] * xh[j];
        }
        let s = cache.inv_std[i] / d as f64;
        for j in 0..d {
            dx[i * d + j] = s * (d as f64 * dxhat[j] - sum - xh[j] * dot);
        }
    }
    dx
}

#[derive(Debug, Clone)]
struct LayerCache {
    input: Vec<f64>,
    q: Vec<f64>,
    k: Vec<f64>,
    v: Vec<f64>,
    /// heads × n × n attention weights
    probs: Vec<f64>,
    context: Vec<f64>,
    norm1: NormCache,
    h1: Vec<f64>,
    pre_act: Vec<f64>,
    act: Vec<f64>,
    norm2: NormCache,
}

#[derive(Debug, Clone)]
pub struct TinyCache {
    ids: Vec<usize>,
    buckets: Vec<usize>,
    norm0: NormCache,
    layers: Vec<LayerCache>,
}

// tensor slots
const TOK: usize = 0;
const POS: usize = 1;
const LEN: usize = 2;
const EMB_G: usize = 3;
const EMB_B: usize = 4;
const PER_LAYER: usize = 16;
const WQ: usize = 0;
const BQ: usize = 1;
const WK: usize = 2;
const BK: usize = 3;
const WV: usize = 4;
const BV: usize = 5;
const WO: usize = 6;
const BO: usize = 7;
const LN1_G: usize = 8;
const LN1_B: usize = 9;
const W1: usize = 10;
const B1: usize = 11;
const W2: usize = 12;
const B2: usize = 13;
const LN2_G: usize = 14;
const LN2_B: usize = 15;

#[derive(Debug, Clone, PartialEq)]
pub struct TinyTransformer {
    config: DeskConfig,
    tokenizer: HashedChunks,
}

impl TinyTransformer {
    pub fn new(config: DeskConfig) -> Result<Self> {
        config.check()?;
        Ok(Self {
            config,
            tokenizer: HashedChunks {
                vocab_size: config.vocab,
                chunk: config.chunk,
            },
        })
    }

    pub fn config(&self) -> &DeskConfig {
        &self.config
    }

    fn slot(layer: usize, which: usize) -> usize {
        5 + layer * PER_LAYER + which
    }
}

impl SequenceEncoder for TinyTransformer {
    type Cache = TinyCache;

    fn hidden_size(&self) -> usize {
        self.config.hidden
    }

    fn max_pieces(&self) -> usize {
        self.config.max_pieces
    }

    fn encode_words(&self, words: &[&str]) -> Vec<Piece> {
        self.tokenizer.encode(words)
    }

    fn n_tensors(&self) -> usize {
        5 + PER_LAYER * self.config.layers
    }

    fn init_params(&self, params: &mut ParamSet) {
        let c = &self.config;
        let d = c.hidden;
        let mut rng = ChaCha8Rng::seed_from_u64(c.init_seed);
        // uniform with the requested standard deviation
        let bound = c.init_std * libm::sqrt(3.0);
        let mut weight = |name: &str, rows: usize, cols: usize| {
            let mut t = Tensor::zeros(name, rows, cols, true);
            for v in &mut t.data {
                *v = rng.random_range(-bound..bound);
            }
            t
        };
        let base = params.tensors.len();
        params.push(weight("embeddings.token", c.vocab, d));
        params.push(weight("embeddings.position", c.max_pieces, d));
        params.push(weight("embeddings.length", LENGTH_BUCKETS, d));
        params.push(Tensor::filled("embeddings.norm.gain", d, 1, 1.0));
        params.push(Tensor::zeros("embeddings.norm.bias", d, 1, false));
        for l in 0..c.layers {
            let p = |s: &str| format!("layer{l}.{s}");
            params.push(weight(&p("attn.query.weight"), d, d));
            params.push(Tensor::zeros(p("attn.query.bias"), d, 1, false));
            params.push(weight(&p("attn.key.weight"), d, d));
            params.push(Tensor::zeros(p("attn.key.bias"), d, 1, false));
            params.push(weight(&p("attn.value.weight"), d, d));
            params.push(Tensor::zeros(p("attn.value.bias"), d, 1, false));
            params.push(weight(&p("attn.output.weight"), d, d));
            params.push(Tensor::zeros(p("attn.output.bias"), d, 1, false));
            params.push(Tensor::filled(p("attn.norm.gain"), d, 1, 1.0));
            params.push(Tensor::zeros(p("attn.norm.bias"), d, 1, false));
            params.push(weight(&p("ffn.in.weight"), d, c.ffn));
            params.push(Tensor::zeros(p("ffn.in.bias"), c.ffn, 1, false));
            params.push(weight(&p("ffn.out.weight"), c.ffn, d));
            params.push(Tensor::zeros(p("ffn.out.bias"), d, 1, false));
            let gain = if l + 1 == c.layers { c.output_gain } else { 1.0 };
            params.push(Tensor::filled(p("ffn.norm.gain"), d, 1, gain));
            params.push(Tensor::zeros(p("ffn.norm.bias"), d, 1, false));
        }
        debug_assert_eq!(params.tensors.len() - base, self.n_tensors());
    }

    fn forward(&self, params: &ParamSet, pieces: &[Piece]) -> (Vec<f64>, TinyCache) {
        let c = &self.config;
        let (d, n, heads) = (c.hidden, pieces.len(), c.heads);
        let dh = d / heads;
        let scale = 1.0 / libm::sqrt(dh as f64);
        assert!(n <= c.max_pieces, "sequence of {n} pieces exceeds {}", c.max_pieces);

        let ids: Vec<usize> = pieces.iter().map(|p| p.id % c.vocab).collect();
        let buckets: Vec<usize> = pieces.iter().map(length_bucket).collect();
        let mut x = vec![0.0; n * d];
        let (tok, pos, len) = (params.get(TOK), params.get(POS), params.get(LEN));
        for t in 0..n {
            for j in 0..d {
                x[t * d + j] = tok[ids[t] * d + j] + pos[t * d + j] + len[buckets[t] * d + j];
            }
        }
        let mut h = vec![0.0; n * d];
        let norm0 = layer_norm(&x, params.get(EMB_G), params.get(EMB_B), d, &mut h);

        let mut layers = Vec::with_capacity(c.layers);
        for l in 0..c.layers {
            let w = |which| params.get(Self::slot(l, which));
            let mut q = vec![0.0; n * d];
            let mut k = vec![0.0; n * d];
            let mut v = vec![0.0; n * d];
            affine(&h, w(WQ), w(BQ), n, d, d, &mut q);
            affine(&h, w(WK), w(BK), n, d, d, &mut k);
            affine(&h, w(WV), w(BV), n, d, d, &mut v);

            let mut probs = vec![0.0; heads * n * n];
            let mut context = vec![0.0; n * d];
            for hd in 0..heads {
                let off = hd * dh;
                for i in 0..n {
                    let row = &mut probs[(hd * n + i) * n..(hd * n + i + 1) * n];
                    let mut max = f64::NEG_INFINITY;
                    for (jj, r) in row.iter_mut().enumerate() {
                        let mut s = 0.0;
                        for e in 0..dh {
                            s += q[i * d + off + e] * k[jj * d + off + e];
                        }
                        *r = s * scale;
                        max = max.max(*r);
                    }
                    let mut z = 0.0;
                    for r in row.iter_mut() {
                        *r = libm::exp(*r - max);
                        z += *r;
                    }
                    for r in row.iter_mut() {
                        *r /= z;
                    }
                    for (jj, &p) in row.iter().enumerate() {
                        for e in 0..dh {
                            context[i * d + off + e] += p * v[jj * d + off + e];
                        }
                    }
                }
            }

            let mut r1 = vec![0.0; n * d];
            affine(&context, w(WO), w(BO), n, d, d, &mut r1);
            for (r, x) in r1.iter_mut().zip(&h) {
                *r += x;
            }
            let mut h1 = vec![0.0; n * d];
            let norm1 = layer_norm(&r1, w(LN1_G), w(LN1_B), d, &mut h1);

            let mut pre_act = vec![0.0; n * c.ffn];
            affine(&h1, w(W1), w(B1), n, d, c.ffn, &mut pre_act);
            let act: Vec<f64> = pre_act.iter().map(|&u| gelu(u)).collect();
            let mut r2 = vec![0.0; n * d];
            affine(&act, w(W2), w(B2), n, c.ffn, d, &mut r2);
            for (r, x) in r2.iter_mut().zip(&h1) {
                *r += x;
            }
            let mut h2 = vec![0.0; n * d];
            let norm2 = layer_norm(&r2, w(LN2_G), w(LN2_B), d, &mut h2);

            layers.push(LayerCache {
                input: core::mem::replace(&mut h, h2),
                q,
                k,
                v,
                probs,
                context,
                norm1,
                h1,
                pre_act,
                act,
                norm2,
            });
        }

        (
            h,
            TinyCache {
                ids,
                buckets,
                norm0,
                layers,
            },
        )
    }

    fn backward(&self, params: &ParamSet, cache: &TinyCache, d_hidden: &[f64], grads: &mut ParamSet) {
        let c = &self.config;
        let (d, heads, f) = (c.hidden, c.heads, c.ffn);
        let n = cache.ids.len();
        let dh = d / heads;
        let scale = 1.0 / libm::sqrt(dh as f64);
        let mut dh_out = d_hidden.to_vec();

        for l in (0..c.layers).rev() {
            let lc = &cache.layers[l];
            let w = |which| params.get(Self::slot(l, which));
            let slot = |which| Self::slot(l, which);

            // h2 = norm(h1 + ffn(h1))
            let d_r2 = {
                let (g, b) = two_mut(grads, slot(LN2_G), slot(LN2_B));
                layer_norm_backward(&lc.norm2, w(LN2_G), &dh_out, d, g, b)
            };
            acc_at_b(&lc.act, &d_r2, n, f, d, grads.get_mut(slot(W2)));
            acc_col_sum(&d_r2, d, grads.get_mut(slot(B2)));
            let mut d_act = vec![0.0; n * f];
            acc_a_bt(&d_r2, w(W2), n, f, d, &mut d_act);
            for (g, &u) in d_act.iter_mut().zip(&lc.pre_act) {
                *g *= gelu_grad(u);
            }
            acc_at_b(&lc.h1, &d_act, n, d, f, grads.get_mut(slot(W1)));
            acc_col_sum(&d_act, f, grads.get_mut(slot(B1)));
            let mut d_h1 = d_r2;
            acc_a_bt(&d_act, w(W1), n, d, f, &mut d_h1);

            // h1 = norm(x + attn(x))
            let d_r1 = {
                let (g, b) = two_mut(grads, slot(LN1_G), slot(LN1_B));
                layer_norm_backward(&lc.norm1, w(LN1_G), &d_h1, d, g, b)
            };
            acc_at_b(&lc.context, &d_r1, n, d, d, grads.get_mut(slot(WO)));
            acc_col_sum(&d_r1, d, grads.get_mut(slot(BO)));
            let mut d_ctx = vec![0.0; n * d];
            acc_a_bt(&d_r1, w(WO), n, d, d, &mut d_ctx);

            let mut dq = vec![0.0; n * d];
            let mut dk = vec![0.0; n * d];
            let mut dv = vec![0.0; n * d];
            let mut d_probs = vec![0.0; n];
            for hd in 0..heads {
                let off = hd * dh;
                for i in 0..n {
                    let p_row = &lc.probs[(hd * n + i) * n..(hd * n + i + 1) * n];
                    let mut dot = 0.0;
                    for jj in 0..n {
                        let mut s = 0.0;
                        for e in 0..dh {
                            s += d_ctx[i * d + off + e] * lc.v[jj * d + off + e];
                            dv[jj * d + off + e] += p_row[jj] * d_ctx[i * d + off + e];
                        }
                        d_probs[jj] = s;
                        dot += s * p_row[jj];
                    }
                    for jj in 0..n {
                        let ds = p_row[jj] * (d_probs[jj] - dot) * scale;
                        if ds == 0.0 {
                            continue;
                        }
                        for e in 0..dh {
                            dq[i * d + off + e] += ds * lc.k[jj * d + off + e];
                            dk[jj * d + off + e] += ds * lc.q[i * d + off + e];
                        }
                    }
                }
            }

            let mut d_in = d_r1;
            for (dm, wslot, bslot) in [(&dq, WQ, BQ), (&dk, WK, BK), (&dv, WV, BV)] {
                acc_at_b(&lc.input, dm, n, d, d, grads.get_mut(slot(wslot)));
                acc_col_sum(dm, d, grads.get_mut(slot(bslot)));
                acc_a_bt(dm, w(wslot), n, d, d, &mut d_in);
            }
            dh_out = d_in;
        }

        let d_x = {
            let (g, b) = two_mut(grads, EMB_G, EMB_B);
            layer_norm_backward(&cache.norm0, params.get(EMB_G), &dh_out, d, g, b)
        };
        for t in 0..n {
            let row = &d_x[t * d..(t + 1) * d];
            for (slot, index) in [(TOK, cache.ids[t]), (POS, t), (LEN, cache.buckets[t])] {
                for (g, &v) in grads.get_mut(slot)[index * d..(index + 1) * d].iter_mut().zip(row) {
                    *g += v;
                }
            }
        }
    }
}

fn two_mut(p: &mut ParamSet, a: usize, b: usize) -> (&mut [f64], &mut [f64]) {
    assert!(a < b);
    let (lo, hi) = p.tensors.split_at_mut(b);
    (&mut lo[a].data, &mut hi[0].data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> TinyTransformer {
        TinyTransformer::new(DeskConfig {
            hidden: 8,
            heads: 2,
            ffn: 12,
            vocab: 64,
            max_pieces: 16,
            init_std: 0.5,
            output_gain: 1.0,
            ..DeskConfig::default()
        })
        .unwrap()
    }

    /// Σ hidden ⊙ weights, a scalar probe of the forward map.
    fn probe(enc: &TinyTransformer, p: &ParamSet, pieces: &[Piece], w: &[f64]) -> f64 {
        enc.forward(p, pieces).0.iter().zip(w).map(|(a, b)| a * b).sum()
    }

    #[test]
    fn encoder_gradients_match_finite_differences() {
        let enc = tiny();
        let mut params = ParamSet::new();
        enc.init_params(&mut params);
        // perturb gains and biases so every path is exercised
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for v in params.values_mut() {
            *v += rng.random_range(-0.1..0.1);
        }
        let pieces = enc.encode_words(&["gaze", "data", "is", "noisy"]);
        let n = pieces.len();
        let probe_w: Vec<f64> = (0..n * 8).map(|_| rng.random_range(-1.0..1.0)).collect();

        let (_, cache) = enc.forward(&params, &pieces);
        let mut grads = params.zeros_like();
        enc.backward(&params, &cache, &probe_w, &mut grads);

        let h = 1e-6;
        let mut checked = 0;
        for slot in 0..params.tensors.len() {
            let len = params.tensors[slot].data.len();
            for idx in (0..len).step_by(len / 5 + 1) {
                let analytic = grads.tensors[slot].data[idx];
                let mut plus = params.clone();
                plus.tensors[slot].data[idx] += h;
                let mut minus = params.clone();
                minus.tensors[slot].data[idx] -= h;
                let numeric =
                    (probe(&enc, &plus, &pieces, &probe_w) - probe(&enc, &minus, &pieces, &probe_w)) / (2.0 * h);
                // key biases shift every score of a row equally, so their gradient is zero
                let err = (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-3);
                assert!(
                    err < 1e-5,
                    "{} [{idx}]: analytic {analytic} numeric {numeric}",
                    params.tensors[slot].name
                );
                checked += 1;
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn output_shape_and_determinism() {
        let enc = tiny();
        let mut params = ParamSet::new();
        enc.init_params(&mut params);
        let pieces = enc.encode_words(&["a", "longer", "sentence"]);
        let (h1, _) = enc.forward(&params, &pieces);
        let (h2, _) = enc.forward(&params, &pieces);
        assert_eq!(h1.len(), pieces.len() * 8);
        assert_eq!(h1, h2);
    }

    #[test]
    fn rejects_bad_head_split() {
        assert!(TinyTransformer::new(DeskConfig {
            hidden: 30,
            heads: 4,
            ..DeskConfig::default()
        })
        .is_err());
    }
}
