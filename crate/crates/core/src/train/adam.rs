use crate::nn::ParamTree;
use crate::scalar::Scalar;

/// Adam with bias correction over one parameter group.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam<S: Scalar, T: ParamTree<S>> {
    pub m: T,
    pub v: T,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    _scalar: std::marker::PhantomData<S>,
}

impl<S: Scalar, T: ParamTree<S>> Adam<S, T> {
    pub fn new(like: &T) -> Self {
        Self {
            m: like.zeroed(),
            v: like.zeroed(),
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            _scalar: std::marker::PhantomData,
        }
    }

    pub fn step(&mut self, params: &mut T, grads: &T, lr: f64) {
        self.t += 1;
        let (b1, b2) = (S::of(self.beta1), S::of(self.beta2));
        let c1 = 1.0 - self.beta1.powf(self.t as f64);
        let c2 = 1.0 - self.beta2.powf(self.t as f64);
        let step = S::of(lr * c2.sqrt() / c1);
        let eps = S::of(self.eps * c2.sqrt());
        let one = S::one();
        let grads = grads.tensors();
        let mut m = self.m.tensors_mut();
        let mut v = self.v.tensors_mut();
        for (((_, mut p), (_, g)), ((_, m), (_, v))) in
            params.tensors_mut().into_iter().zip(grads).zip(m.iter_mut().zip(v.iter_mut()))
        {
            ndarray::Zip::from(&mut p).and(&g).and(m).and(v).for_each(|p, &g, m, v| {
                *m = b1 * *m + (one - b1) * g;
                *v = b2 * *v + (one - b2) * g * g;
                *p -= step * *m / (v.sqrt() + eps);
            });
        }
    }
}
