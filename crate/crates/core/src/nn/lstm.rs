//! Single LSTM layer with explicit backpropagation through time.
//!
//! Gate layout along the `4H` axis is `[input, forget, cell, output]`.

use ndarray::{Array1, Array2, ArrayViewD, ArrayViewMutD, Axis};
use rand::Rng;

use super::params::{join, uniform, ParamTree};
use crate::scalar::{sigmoid, tanh, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams<S> {
    /// `(input, 4H)`
    pub w_x: Array2<S>,
    /// `(H, 4H)`
    pub w_h: Array2<S>,
    /// `(4H)`
    pub b: Array1<S>,
}

impl<S: Scalar> LstmParams<S> {
    /// Uniform(±1/√H) weights, zero biases except the forget gate at 1.
    pub fn init<R: Rng + ?Sized>(input: usize, hidden: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (hidden as f64).sqrt();
        let w_x = uniform((input, 4 * hidden), bound, rng);
        let w_h = uniform((hidden, 4 * hidden), bound, rng);
        let mut b = Array1::zeros(4 * hidden);
        b.slice_mut(ndarray::s![hidden..2 * hidden]).fill(S::one());
        Self { w_x, w_h, b }
    }

    pub fn hidden(&self) -> usize {
        self.w_h.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.w_x.nrows()
    }
}

impl<S: Scalar> ParamTree<S> for LstmParams<S> {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<(String, ArrayViewD<'a, S>)>) {
        out.push((join(prefix, "w_x"), self.w_x.view().into_dyn()));
        out.push((join(prefix, "w_h"), self.w_h.view().into_dyn()));
        out.push((join(prefix, "b"), self.b.view().into_dyn()));
    }

    fn collect_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, ArrayViewMutD<'a, S>)>) {
        out.push((join(prefix, "w_x"), self.w_x.view_mut().into_dyn()));
        out.push((join(prefix, "w_h"), self.w_h.view_mut().into_dyn()));
        out.push((join(prefix, "b"), self.b.view_mut().into_dyn()));
    }
}

/// Input-to-gate contributions `x_t W_x`, excluding the bias.
pub(crate) enum GateInput<'a, S> {
    /// Same contribution at every step.
    Constant(&'a Array2<S>),
    PerStep(&'a [Array2<S>]),
}

impl<S> GateInput<'_, S> {
    fn at(&self, t: usize) -> &Array2<S> {
        match self {
            GateInput::Constant(x) => x,
            GateInput::PerStep(xs) => &xs[t],
        }
    }
}

/// Forward activations kept for the backward pass.
pub(crate) struct LstmTrace<S> {
    /// `h[0]` is the initial state, `h[t + 1]` the output of step `t`.
    pub h: Vec<Array2<S>>,
    pub c: Vec<Array2<S>>,
    /// Activated gates per step.
    gates: Vec<Array2<S>>,
    /// `tanh(c[t + 1])`
    tc: Vec<Array2<S>>,
}

pub(crate) fn forward<S: Scalar>(
    p: &LstmParams<S>,
    input: GateInput<'_, S>,
    steps: usize,
    h0: Array2<S>,
    c0: Array2<S>,
) -> LstmTrace<S> {
    let hd = p.hidden();
    let mut h = Vec::with_capacity(steps + 1);
    let mut c = Vec::with_capacity(steps + 1);
    let mut gates = Vec::with_capacity(steps);
    let mut tcs = Vec::with_capacity(steps);
    h.push(h0);
    c.push(c0);
    for t in 0..steps {
        let mut a = h[t].dot(&p.w_h);
        a += input.at(t);
        a += &p.b;
        let mut c_new = c[t].clone();
        let mut h_new = Array2::zeros(c_new.raw_dim());
        let mut tc = Array2::zeros(c_new.raw_dim());
        for (((mut ga, mut cr), mut hr), mut tr) in
            a.rows_mut().into_iter().zip(c_new.rows_mut()).zip(h_new.rows_mut()).zip(tc.rows_mut())
        {
            let ga = ga.as_slice_mut().expect("contiguous");
            // separate passes keep each loop simple enough to vectorise
            let (ifg, o) = ga.split_at_mut(3 * hd);
            let (if_, g) = ifg.split_at_mut(2 * hd);
            if_.iter_mut().chain(o.iter_mut()).for_each(|v| *v = sigmoid(*v));
            g.iter_mut().for_each(|v| *v = tanh(*v));
            let (i, f) = if_.split_at(hd);
            let cr = cr.as_slice_mut().expect("contiguous");
            let hr = hr.as_slice_mut().expect("contiguous");
            let tr = tr.as_slice_mut().expect("contiguous");
            for j in 0..hd {
                cr[j] = f[j] * cr[j] + i[j] * g[j];
            }
            tr.iter_mut().zip(cr.iter()).for_each(|(t, &c)| *t = tanh(c));
            for j in 0..hd {
                hr[j] = o[j] * tr[j];
            }
        }
        gates.push(a);
        tcs.push(tc);
        c.push(c_new);
        h.push(h_new);
    }
    LstmTrace { h, c, gates, tc: tcs }
}

/// Gradients of the gate pre-activations per step plus those of the
/// initial states.
pub(crate) struct LstmBackward<S> {
    pub d_gates: Vec<Array2<S>>,
    pub dh0: Array2<S>,
    #[allow(dead_code)]
    pub dc0: Array2<S>,
}

/// Backpropagates `dh_out[t]` (gradient w.r.t. `h[t + 1]`, `None` = zero)
/// through the layer, accumulating `w_h` and `b` gradients into `grad`.
/// `w_x` gradients are left to the caller, which knows the inputs.
pub(crate) fn backward<S: Scalar>(
    p: &LstmParams<S>,
    trace: &LstmTrace<S>,
    dh_out: &[Option<Array2<S>>],
    grad: &mut LstmParams<S>,
) -> LstmBackward<S> {
    let steps = trace.gates.len();
    let hd = p.hidden();
    let batch = trace.h[0].nrows();
    let mut dh_next = Array2::<S>::zeros((batch, hd));
    let mut dc_next = Array2::<S>::zeros((batch, hd));
    let mut d_gates = vec![Array2::zeros((0, 0)); steps];
    for t in (0..steps).rev() {
        let mut dh = dh_next;
        if let Some(d) = &dh_out[t] {
            dh += d;
        }
        let gates = &trace.gates[t];
        let mut da = Array2::<S>::zeros((batch, 4 * hd));
        for b in 0..batch {
            let g = gates.row(b);
            let g = g.as_slice().expect("contiguous");
            let c_prev = trace.c[t].row(b);
            let c_prev = c_prev.as_slice().expect("contiguous");
            let tcr = trace.tc[t].row(b);
            let tcr = tcr.as_slice().expect("contiguous");
            let dhr = dh.row(b);
            let dhr = dhr.as_slice().expect("contiguous");
            let mut dcr = dc_next.row_mut(b);
            let dcr = dcr.as_slice_mut().expect("contiguous");
            let mut dar = da.row_mut(b);
            let dar = dar.as_slice_mut().expect("contiguous");
            for j in 0..hd {
                let (i, f, gg, o) = (g[j], g[hd + j], g[2 * hd + j], g[3 * hd + j]);
                let tc = tcr[j];
                let d_o = dhr[j] * tc;
                let dc = dcr[j] + dhr[j] * o * (S::one() - tc * tc);
                let di = dc * gg;
                let dg = dc * i;
                let df = dc * c_prev[j];
                dcr[j] = dc * f;
                dar[j] = di * i * (S::one() - i);
                dar[hd + j] = df * f * (S::one() - f);
                dar[2 * hd + j] = dg * (S::one() - gg * gg);
                dar[3 * hd + j] = d_o * o * (S::one() - o);
            }
        }
        dh_next = da.dot(&p.w_h.t());
        d_gates[t] = da;
    }
    // one large product is much faster than `steps` thin ones
    let hs: Vec<_> = trace.h[..steps].iter().map(|h| h.view()).collect();
    let ds: Vec<_> = d_gates.iter().map(|d| d.view()).collect();
    let hs = ndarray::concatenate(Axis(0), &hs).expect("equal widths");
    let ds = ndarray::concatenate(Axis(0), &ds).expect("equal widths");
    grad.w_h += &hs.t().dot(&ds);
    grad.b += &ds.sum_axis(Axis(0));
    LstmBackward { d_gates, dh0: dh_next, dc0: dc_next }
}
