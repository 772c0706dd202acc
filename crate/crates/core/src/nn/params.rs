use ndarray::{Array1, Array2, ArrayViewD, ArrayViewMutD, Axis};
use rand::Rng;

use crate::scalar::Scalar;

/// A named collection of parameter tensors with a stable traversal order.
///
/// Gradients, optimizer moments and checkpoints all reuse the same
/// structure, so the traversal order is the contract between them.
pub trait ParamTree<S: Scalar>: Clone {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<(String, ArrayViewD<'a, S>)>);

    fn collect_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, ArrayViewMutD<'a, S>)>);

    fn tensors(&self) -> Vec<(String, ArrayViewD<'_, S>)> {
        let mut out = Vec::new();
        self.collect("", &mut out);
        out
    }

    fn tensors_mut(&mut self) -> Vec<(String, ArrayViewMutD<'_, S>)> {
        let mut out = Vec::new();
        self.collect_mut("", &mut out);
        out
    }

    fn zeroed(&self) -> Self {
        let mut z = self.clone();
        for (_, mut t) in z.tensors_mut() {
            t.fill(S::zero());
        }
        z
    }

    fn num_params(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    fn all_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.iter().all(|x| x.is_finite()))
    }
}

pub(crate) fn join(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}.{name}")
    }
}

pub(crate) fn uniform<S: Scalar, R: Rng + ?Sized>(shape: (usize, usize), bound: f64, rng: &mut R) -> Array2<S> {
    Array2::from_shape_simple_fn(shape, || S::of(rng.random_range(-bound..=bound)))
}

/// `y = x W + b` with `W` stored as `(in, out)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine<S> {
    pub w: Array2<S>,
    pub b: Array1<S>,
}

impl<S: Scalar> Affine<S> {
    pub fn init<R: Rng + ?Sized>(input: usize, output: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (input as f64).sqrt();
        let w = uniform((input, output), bound, rng);
        let b = Array1::from_shape_simple_fn(output, || S::of(rng.random_range(-bound..=bound)));
        Self { w, b }
    }

    pub fn zeros(input: usize, output: usize) -> Self {
        Self { w: Array2::zeros((input, output)), b: Array1::zeros(output) }
    }

    pub fn input_dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.w.ncols()
    }

    pub fn forward(&self, x: &Array2<S>) -> Array2<S> {
        x.dot(&self.w) + &self.b
    }

    /// Accumulates parameter gradients and returns the input gradient.
    pub(crate) fn backward(&self, x: &Array2<S>, dy: &Array2<S>, grad: &mut Affine<S>) -> Array2<S> {
        grad.w += &x.t().dot(dy);
        grad.b += &dy.sum_axis(Axis(0));
        dy.dot(&self.w.t())
    }

    pub(crate) fn backward_params(&self, x: &Array2<S>, dy: &Array2<S>, grad: &mut Affine<S>) {
        grad.w += &x.t().dot(dy);
        grad.b += &dy.sum_axis(Axis(0));
    }
}

impl<S: Scalar> ParamTree<S> for Affine<S> {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<(String, ArrayViewD<'a, S>)>) {
        out.push((join(prefix, "w"), self.w.view().into_dyn()));
        out.push((join(prefix, "b"), self.b.view().into_dyn()));
    }

    fn collect_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, ArrayViewMutD<'a, S>)>) {
        out.push((join(prefix, "w"), self.w.view_mut().into_dyn()));
        out.push((join(prefix, "b"), self.b.view_mut().into_dyn()));
    }
}

impl<S: Scalar, T: ParamTree<S>> ParamTree<S> for Vec<T> {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<(String, ArrayViewD<'a, S>)>) {
        for (i, item) in self.iter().enumerate() {
            item.collect(&join(prefix, &i.to_string()), out);
        }
    }

    fn collect_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, ArrayViewMutD<'a, S>)>) {
        for (i, item) in self.iter_mut().enumerate() {
            item.collect_mut(&join(prefix, &i.to_string()), out);
        }
    }
}
