use ndarray::{Array1, Array2, ArrayViewD, ArrayViewMutD, Axis};
use rand::Rng;

use super::params::{join, Affine, ParamTree};
use super::ModelConfig;
use crate::scalar::Scalar;

/// A scalar score over latent codes with an analytic input gradient.
pub trait Critic<S: Scalar> {
    fn score(&self, z: &Array2<S>) -> Array1<S>;

    /// `∇_z d(z)` for every row of `z`.
    fn input_gradient(&self, z: &Array2<S>) -> Array2<S>;
}

/// `d(z) = wᵀ z + b`; its input gradient is `w` everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearCritic<S> {
    pub w: Array1<S>,
    pub b: S,
}

impl<S: Scalar> Critic<S> for LinearCritic<S> {
    fn score(&self, z: &Array2<S>) -> Array1<S> {
        z.dot(&self.w) + self.b
    }

    fn input_gradient(&self, z: &Array2<S>) -> Array2<S> {
        let mut g = Array2::zeros(z.raw_dim());
        for mut row in g.rows_mut() {
            row.assign(&self.w);
        }
        g
    }
}

/// `affine(tanh(affine(tanh(affine(z)))))` with a single output unit.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticParams<S> {
    pub l1: Affine<S>,
    pub l2: Affine<S>,
    pub out: Affine<S>,
}

impl<S: Scalar> ParamTree<S> for CriticParams<S> {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<(String, ArrayViewD<'a, S>)>) {
        self.l1.collect(&join(prefix, "l1"), out);
        self.l2.collect(&join(prefix, "l2"), out);
        self.out.collect(&join(prefix, "out"), out);
    }

    fn collect_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, ArrayViewMutD<'a, S>)>) {
        self.l1.collect_mut(&join(prefix, "l1"), out);
        self.l2.collect_mut(&join(prefix, "l2"), out);
        self.out.collect_mut(&join(prefix, "out"), out);
    }
}

pub(crate) struct CriticCache<S> {
    z: Array2<S>,
    a1: Array2<S>,
    a2: Array2<S>,
    pub scores: Array1<S>,
}

/// Derivative of tanh expressed through its output.
fn dtanh<S: Scalar>(a: &Array2<S>) -> Array2<S> {
    a.mapv(|x| S::one() - x * x)
}

impl<S: Scalar> CriticParams<S> {
    pub fn init<R: Rng + ?Sized>(cfg: &ModelConfig, rng: &mut R) -> Self {
        Self {
            l1: Affine::init(cfg.latent_dim, cfg.hidden, rng),
            l2: Affine::init(cfg.hidden, cfg.hidden, rng),
            out: Affine::init(cfg.hidden, 1, rng),
        }
    }

    pub fn zeros(latent_dim: usize, hidden: usize) -> Self {
        Self { l1: Affine::zeros(latent_dim, hidden), l2: Affine::zeros(hidden, hidden), out: Affine::zeros(hidden, 1) }
    }

    pub(crate) fn forward(&self, z: &Array2<S>) -> CriticCache<S> {
        let a1 = self.l1.forward(z).mapv(S::tanh);
        let a2 = self.l2.forward(&a1).mapv(S::tanh);
        let scores = self.out.forward(&a2).column(0).to_owned();
        CriticCache { z: z.clone(), a1, a2, scores }
    }

    /// Input gradients `g_z`, plus the intermediate `g1 = ∂d/∂u1`.
    pub(crate) fn input_grads(&self, cache: &CriticCache<S>) -> (Array2<S>, Array2<S>, Array2<S>) {
        let w3 = self.out.w.column(0);
        let g2 = dtanh(&cache.a2) * w3;
        let m = g2.dot(&self.l2.w.t());
        let g1 = &m * &dtanh(&cache.a1);
        let gz = g1.dot(&self.l1.w.t());
        (gz, g1, m)
    }

    /// Accumulates parameter gradients of `Σ_b dscore[b] · d(z_b)` and
    /// returns the gradient w.r.t. `z`.
    pub(crate) fn backward(&self, cache: &CriticCache<S>, dscore: &Array1<S>, grad: &mut CriticParams<S>) -> Array2<S> {
        let dy = dscore.view().insert_axis(Axis(1)).to_owned();
        let da2 = self.out.backward(&cache.a2, &dy, &mut grad.out);
        let du2 = da2 * dtanh(&cache.a2);
        let da1 = self.l2.backward(&cache.a1, &du2, &mut grad.l2);
        let du1 = da1 * dtanh(&cache.a1);
        self.l1.backward(&cache.z, &du1, &mut grad.l1)
    }

    /// Gradient penalty `mean_b (‖∇_z d(ẑ_b)‖ − 1)²` at the given interpolates,
    /// accumulating `scale ×` its parameter gradient into `grad`.
    pub(crate) fn penalty_backward(&self, z_hat: &Array2<S>, scale: S, grad: &mut CriticParams<S>) -> S {
        let cache = self.forward(z_hat);
        let (gz, g1, m) = self.input_grads(&cache);
        let batch = S::of(z_hat.nrows() as f64);
        let norms: Array1<S> = gz.map_axis(Axis(1), |r| r.dot(&r).sqrt());
        let penalty = norms.iter().map(|&r| (r - S::one()) * (r - S::one())).sum::<S>() / batch;

        // q = dP/dgz
        let two = S::of(2.0);
        let mut q = gz.clone();
        for (mut row, &r) in q.rows_mut().into_iter().zip(norms.iter()) {
            let f = if r > S::zero() { scale * two * (r - S::one()) / (r * batch) } else { S::zero() };
            row *= f;
        }
        let s1 = dtanh(&cache.a1);
        let s2 = dtanh(&cache.a2);
        let w3 = self.out.w.column(0).to_owned();

        // gz = g1 W1ᵀ
        grad.l1.w += &q.t().dot(&g1);
        let dg1 = q.dot(&self.l1.w);
        // g1 = m ⊙ s1
        let dm = &dg1 * &s1;
        let ds1 = &dg1 * &m;
        // m = g2 W2ᵀ
        let g2 = &s2 * &w3;
        grad.l2.w += &dm.t().dot(&g2);
        let dg2 = dm.dot(&self.l2.w);
        // g2 = s2 ⊙ w3
        let dw3 = (&dg2 * &s2).sum_axis(Axis(0));
        grad.out.w.column_mut(0).scaled_add(S::one(), &dw3);
        let ds2 = &dg2 * &w3;
        // s = 1 − a²
        let da2 = &ds2 * &cache.a2 * (-two);
        let mut da1 = &ds1 * &cache.a1 * (-two);
        // forward path a2 = tanh(a1 W2 + b2), a1 = tanh(z W1 + b1)
        let du2 = da2 * &s2;
        da1 += &self.l2.backward(&cache.a1, &du2, &mut grad.l2);
        let du1 = da1 * &s1;
        self.l1.backward_params(z_hat, &du1, &mut grad.l1);
        penalty
    }
}

impl<S: Scalar> Critic<S> for CriticParams<S> {
    fn score(&self, z: &Array2<S>) -> Array1<S> {
        self.forward(z).scores
    }

    fn input_gradient(&self, z: &Array2<S>) -> Array2<S> {
        self.input_grads(&self.forward(z)).0
    }
}
