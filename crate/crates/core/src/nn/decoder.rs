use ndarray::{s, Array2, Array4, ArrayViewD, ArrayViewMutD, Axis};
use rand::Rng;

use super::lstm::{self, GateInput, LstmParams, LstmTrace};
use super::params::{join, Affine, ParamTree};
use super::ModelConfig;
use crate::scalar::Scalar;
use crate::tokens::{PianoRoll, Track, N_TOKENS, N_TRACKS};

/// Non-autoregressive decoder for one track: `z` initialises the first
/// layer's hidden state and is the input at every step.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderParams<S> {
    /// `N_z -> H`
    pub init: Affine<S>,
    pub layers: Vec<LstmParams<S>>,
    /// `H -> 130`
    pub out: Affine<S>,
}

impl<S: Scalar> ParamTree<S> for DecoderParams<S> {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<(String, ArrayViewD<'a, S>)>) {
        self.init.collect(&join(prefix, "init"), out);
        self.layers.collect(&join(prefix, "layers"), out);
        self.out.collect(&join(prefix, "out"), out);
    }

    fn collect_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, ArrayViewMutD<'a, S>)>) {
        self.init.collect_mut(&join(prefix, "init"), out);
        self.layers.collect_mut(&join(prefix, "layers"), out);
        self.out.collect_mut(&join(prefix, "out"), out);
    }
}

pub(crate) struct DecoderCache<S> {
    traces: Vec<LstmTrace<S>>,
    /// Top-layer outputs stacked step-major: row `t * B + b`.
    top: Array2<S>,
    /// Logits, same row layout as `top`.
    pub logits: Array2<S>,
}

#[derive(Debug, Clone)]
pub struct DecoderOutput<S> {
    /// `(batch, timesteps, track, token)` probabilities.
    pub probs: Array4<S>,
    /// Argmax grid per sample.
    pub tokens: Vec<PianoRoll>,
}

impl<S: Scalar> DecoderParams<S> {
    pub fn init<R: Rng + ?Sized>(cfg: &ModelConfig, rng: &mut R) -> Self {
        let h = cfg.hidden;
        Self {
            init: Affine::init(cfg.latent_dim, h, rng),
            layers: (0..cfg.layers)
                .map(|l| LstmParams::init(if l == 0 { cfg.latent_dim } else { h }, h, rng))
                .collect(),
            out: Affine::init(h, N_TOKENS, rng),
        }
    }

    pub(crate) fn forward(&self, z: &Array2<S>, steps: usize) -> DecoderCache<S> {
        let batch = z.nrows();
        let hd = self.init.output_dim();
        let mut traces: Vec<LstmTrace<S>> = Vec::with_capacity(self.layers.len());
        for (l, layer) in self.layers.iter().enumerate() {
            let trace = if l == 0 {
                let xw = z.dot(&layer.w_x);
                let h0 = self.init.forward(z);
                lstm::forward(layer, GateInput::Constant(&xw), steps, h0, Array2::zeros((batch, hd)))
            } else {
                let below = &traces[l - 1];
                let xw: Vec<Array2<S>> = (0..steps).map(|t| below.h[t + 1].dot(&layer.w_x)).collect();
                lstm::forward(
                    layer,
                    GateInput::PerStep(&xw),
                    steps,
                    Array2::zeros((batch, hd)),
                    Array2::zeros((batch, hd)),
                )
            };
            traces.push(trace);
        }
        let last = traces.last().expect("at least one layer");
        let views: Vec<_> = last.h[1..].iter().map(|h| h.view()).collect();
        let top = ndarray::concatenate(Axis(0), &views).expect("same width");
        let logits = self.out.forward(&top);
        DecoderCache { traces, top, logits }
    }

    /// Backpropagates logit gradients (row layout of the cache) and returns
    /// the gradient w.r.t. `z`.
    pub(crate) fn backward(
        &self,
        z: &Array2<S>,
        cache: &DecoderCache<S>,
        dlogits: &Array2<S>,
        grad: &mut DecoderParams<S>,
    ) -> Array2<S> {
        let batch = z.nrows();
        let steps = cache.traces[0].h.len() - 1;
        let dtop = self.out.backward(&cache.top, dlogits, &mut grad.out);
        let mut dh: Vec<Option<Array2<S>>> =
            (0..steps).map(|t| Some(dtop.slice(s![t * batch..(t + 1) * batch, ..]).to_owned())).collect();
        let mut dz = Array2::zeros(z.raw_dim());
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let back = lstm::backward(layer, &cache.traces[l], &dh, &mut grad.layers[l]);
            if l == 0 {
                let mut dxw = back.d_gates[0].clone();
                for d in &back.d_gates[1..] {
                    dxw += d;
                }
                grad.layers[0].w_x += &z.t().dot(&dxw);
                dz += &dxw.dot(&layer.w_x.t());
                dz += &self.init.backward(z, &back.dh0, &mut grad.init);
            } else {
                let below = &cache.traces[l - 1];
                for t in 0..steps {
                    grad.layers[l].w_x += &below.h[t + 1].t().dot(&back.d_gates[t]);
                }
                dh = back.d_gates.iter().map(|d| Some(d.dot(&layer.w_x.t()))).collect();
            }
        }
        dz
    }
}

/// Row-wise softmax.
pub(crate) fn softmax_rows<S: Scalar>(logits: &Array2<S>) -> Array2<S> {
    let mut p = logits.clone();
    for mut row in p.rows_mut() {
        let m = row.fold(S::neg_infinity(), |a, &b| a.max(b));
        row.mapv_inplace(|x| (x - m).exp_fast());
        let sum = row.sum();
        row /= sum;
    }
    p
}

/// Assembles per-track logits into probabilities and argmax grids.
pub(crate) fn assemble_output<S: Scalar>(logits: &[Array2<S>], batch: usize, steps: usize) -> DecoderOutput<S> {
    let mut probs = Array4::zeros((batch, steps, N_TRACKS, N_TOKENS));
    let mut cells = vec![vec![0u8; steps * N_TRACKS]; batch];
    for (k, lg) in logits.iter().enumerate() {
        let p = softmax_rows(lg);
        for t in 0..steps {
            for (b, roll) in cells.iter_mut().enumerate() {
                let row = p.row(t * batch + b);
                probs.slice_mut(s![b, t, k, ..]).assign(&row);
                let mut best = 0;
                for (j, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = j;
                    }
                }
                roll[t * N_TRACKS + k] = best as u8;
            }
        }
    }
    let tokens = cells.into_iter().map(|c| PianoRoll::new(steps, c).expect("argmax within alphabet")).collect();
    DecoderOutput { probs, tokens }
}

impl<S: Scalar> DecoderOutput<S> {
    /// Probability of `token` at (sample, timestep, track).
    pub fn prob(&self, b: usize, t: usize, track: Track, token: u8) -> S {
        self.probs[[b, t, track.index(), token as usize]]
    }
}
