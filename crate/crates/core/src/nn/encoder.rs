use ndarray::{Array2, ArrayViewD, ArrayViewMutD, Axis};
use rand::Rng;

use super::lstm::{self, GateInput, LstmParams, LstmTrace};
use super::params::{join, Affine, ParamTree};
use super::{ModelConfig, SigmaMode};
use crate::scalar::Scalar;
use crate::tokens::{PianoRoll, N_TOKENS, N_TRACKS};

/// One bidirectional layer.
#[derive(Debug, Clone, PartialEq)]
pub struct BiLayer<S> {
    pub fwd: LstmParams<S>,
    pub bwd: LstmParams<S>,
}

impl<S: Scalar> ParamTree<S> for BiLayer<S> {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<(String, ArrayViewD<'a, S>)>) {
        self.fwd.collect(&join(prefix, "fwd"), out);
        self.bwd.collect(&join(prefix, "bwd"), out);
    }

    fn collect_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, ArrayViewMutD<'a, S>)>) {
        self.fwd.collect_mut(&join(prefix, "fwd"), out);
        self.bwd.collect_mut(&join(prefix, "bwd"), out);
    }
}

/// Bidirectional LSTM stack over one-hot tokens, a summary projection of the
/// two final states, and the `μ` / `σ_pre` heads.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams<S> {
    /// First layer's `w_x` has `4 · 130` rows, one per (track, token).
    pub layers: Vec<BiLayer<S>>,
    /// `2H -> H`
    pub summary: Affine<S>,
    pub mu: Affine<S>,
    pub sigma: Affine<S>,
    pub sigma_mode: SigmaMode,
}

impl<S: Scalar> ParamTree<S> for EncoderParams<S> {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<(String, ArrayViewD<'a, S>)>) {
        self.layers.collect(&join(prefix, "layers"), out);
        self.summary.collect(&join(prefix, "summary"), out);
        self.mu.collect(&join(prefix, "mu"), out);
        self.sigma.collect(&join(prefix, "sigma"), out);
    }

    fn collect_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, ArrayViewMutD<'a, S>)>) {
        self.layers.collect_mut(&join(prefix, "layers"), out);
        self.summary.collect_mut(&join(prefix, "summary"), out);
        self.mu.collect_mut(&join(prefix, "mu"), out);
        self.sigma.collect_mut(&join(prefix, "sigma"), out);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderOutput<S> {
    pub mu: Array2<S>,
    pub sigma: Array2<S>,
    pub z: Array2<S>,
}

pub(crate) struct EncoderCache<S> {
    tokens: Vec<Vec<[usize; N_TRACKS]>>,
    layers: Vec<(LstmTrace<S>, LstmTrace<S>)>,
    /// Inputs of layers 1.. per timestep, `[h_fwd | h_bwd]` of the layer below.
    inputs: Vec<Vec<Array2<S>>>,
    summary_in: Array2<S>,
    h: Array2<S>,
    pub sigma: Array2<S>,
    pub eps: Option<Array2<S>>,
}

/// Row index into the first layer's `w_x` for each (batch, timestep, track).
fn token_rows(rolls: &[PianoRoll]) -> Vec<Vec<[usize; N_TRACKS]>> {
    let steps = rolls[0].timesteps();
    (0..steps)
        .map(|t| {
            rolls
                .iter()
                .map(|r| {
                    let cells = &r.as_bytes()[t * N_TRACKS..(t + 1) * N_TRACKS];
                    std::array::from_fn(|k| k * N_TOKENS + cells[k] as usize)
                })
                .collect()
        })
        .collect()
}

fn concat<S: Scalar>(a: &Array2<S>, b: &Array2<S>) -> Array2<S> {
    ndarray::concatenate(Axis(1), &[a.view(), b.view()]).expect("same batch")
}

impl<S: Scalar> EncoderParams<S> {
    pub fn init<R: Rng + ?Sized>(cfg: &ModelConfig, rng: &mut R) -> Self {
        let h = cfg.hidden;
        let layers = (0..cfg.layers)
            .map(|l| {
                let input = if l == 0 { N_TRACKS * N_TOKENS } else { 2 * h };
                BiLayer { fwd: LstmParams::init(input, h, rng), bwd: LstmParams::init(input, h, rng) }
            })
            .collect();
        Self {
            layers,
            summary: Affine::init(2 * h, h, rng),
            mu: Affine::init(h, cfg.latent_dim, rng),
            sigma: Affine::init(h, cfg.latent_dim, rng),
            sigma_mode: cfg.sigma_mode,
        }
    }

    pub fn hidden(&self) -> usize {
        self.summary.output_dim()
    }

    pub fn latent_dim(&self) -> usize {
        self.mu.output_dim()
    }

    /// Runs the encoder. `eps = None` gives the deterministic code `z = μ`.
    pub(crate) fn forward(&self, rolls: &[PianoRoll], eps: Option<Array2<S>>) -> (EncoderOutput<S>, EncoderCache<S>) {
        let batch = rolls.len();
        let steps = rolls[0].timesteps();
        let hd = self.hidden();
        let tokens = token_rows(rolls);
        let mut layers = Vec::with_capacity(self.layers.len());
        let mut inputs: Vec<Vec<Array2<S>>> = Vec::new();
        for (l, layer) in self.layers.iter().enumerate() {
            let (xw_f, xw_b): (Vec<Array2<S>>, Vec<Array2<S>>) = if l == 0 {
                let gather = |w: &Array2<S>, t: usize| {
                    let mut out = Array2::<S>::zeros((batch, 4 * hd));
                    for (mut row, rows) in out.rows_mut().into_iter().zip(&tokens[t]) {
                        for &r in rows {
                            row += &w.row(r);
                        }
                    }
                    out
                };
                (
                    (0..steps).map(|t| gather(&layer.fwd.w_x, t)).collect(),
                    (0..steps).map(|s| gather(&layer.bwd.w_x, steps - 1 - s)).collect(),
                )
            } else {
                let (f, b): &(LstmTrace<S>, LstmTrace<S>) = &layers[l - 1];
                let x: Vec<Array2<S>> = (0..steps).map(|t| concat(&f.h[t + 1], &b.h[steps - t])).collect();
                let out = (
                    x.iter().map(|xt| xt.dot(&layer.fwd.w_x)).collect(),
                    (0..steps).map(|s| x[steps - 1 - s].dot(&layer.bwd.w_x)).collect(),
                );
                inputs.push(x);
                out
            };
            let zeros = || Array2::<S>::zeros((batch, hd));
            let f = lstm::forward(&layer.fwd, GateInput::PerStep(&xw_f), steps, zeros(), zeros());
            let b = lstm::forward(&layer.bwd, GateInput::PerStep(&xw_b), steps, zeros(), zeros());
            layers.push((f, b));
        }
        let (f, b) = layers.last().expect("at least one layer");
        let summary_in = concat(&f.h[steps], &b.h[steps]);
        let h = self.summary.forward(&summary_in);
        let mu = self.mu.forward(&h);
        let k = S::of(self.sigma_mode.factor());
        let sigma = self.sigma.forward(&h).mapv(|x| (k * x).exp());
        let z = match &eps {
            Some(e) => &mu + &(&sigma * e),
            None => mu.clone(),
        };
        let out = EncoderOutput { mu, sigma: sigma.clone(), z };
        (out, EncoderCache { tokens, layers, inputs, summary_in, h, sigma, eps })
    }

    /// Backpropagates a gradient w.r.t. `z` through `z = μ + σ ⊙ ε`.
    pub(crate) fn backward(&self, cache: &EncoderCache<S>, dz: &Array2<S>, grad: &mut EncoderParams<S>) {
        let dmu = dz.clone();
        let k = S::of(self.sigma_mode.factor());
        let dsigma_pre = match &cache.eps {
            Some(e) => dz * e * &cache.sigma * k,
            None => Array2::zeros(dz.raw_dim()),
        };
        let mut dh = self.mu.backward(&cache.h, &dmu, &mut grad.mu);
        dh += &self.sigma.backward(&cache.h, &dsigma_pre, &mut grad.sigma);
        let d_summary_in = self.summary.backward(&cache.summary_in, &dh, &mut grad.summary);

        let steps = cache.tokens.len();
        let hd = self.hidden();
        let mut dh_f: Vec<Option<Array2<S>>> = vec![None; steps];
        let mut dh_b: Vec<Option<Array2<S>>> = vec![None; steps];
        dh_f[steps - 1] = Some(d_summary_in.slice(ndarray::s![.., ..hd]).to_owned());
        dh_b[steps - 1] = Some(d_summary_in.slice(ndarray::s![.., hd..]).to_owned());

        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let (tf, tb) = &cache.layers[l];
            let g = &mut grad.layers[l];
            let bf = lstm::backward(&layer.fwd, tf, &dh_f, &mut g.fwd);
            let bb = lstm::backward(&layer.bwd, tb, &dh_b, &mut g.bwd);
            if l == 0 {
                for t in 0..steps {
                    let s = steps - 1 - t;
                    for (b, rows) in cache.tokens[t].iter().enumerate() {
                        let (daf, dab) = (bf.d_gates[t].row(b), bb.d_gates[s].row(b));
                        for &r in rows {
                            let mut wf = g.fwd.w_x.row_mut(r);
                            wf += &daf;
                            let mut wb = g.bwd.w_x.row_mut(r);
                            wb += &dab;
                        }
                    }
                }
            } else {
                let x = &cache.inputs[l - 1];
                let mut next_f = vec![None; steps];
                let mut next_b = vec![None; steps];
                for t in 0..steps {
                    let s = steps - 1 - t;
                    g.fwd.w_x += &x[t].t().dot(&bf.d_gates[t]);
                    g.bwd.w_x += &x[t].t().dot(&bb.d_gates[s]);
                    let dx = bf.d_gates[t].dot(&layer.fwd.w_x.t()) + bb.d_gates[s].dot(&layer.bwd.w_x.t());
                    next_f[t] = Some(dx.slice(ndarray::s![.., ..hd]).to_owned());
                    // backward direction of the layer below emitted time t at its step s
                    next_b[s] = Some(dx.slice(ndarray::s![.., hd..]).to_owned());
                }
                dh_f = next_f;
                dh_b = next_b;
            }
        }
    }
}
