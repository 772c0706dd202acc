//! Floating-point abstraction shared by every numeric routine in the crate.
//!
//! Training and checkpoints run in `f32`; gradient checks and prior math
//! run in `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + LinalgScalar
    + ScalarOperand
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`, used for constants and sampled noise.
    fn of(v: f64) -> Self;

    fn f64(self) -> f64;

    /// Branch-free `exp` that the compiler can vectorise. Saturates instead
    /// of overflowing for `f32`.
    fn exp_fast(self) -> Self;
}

impl Scalar for f32 {
    #[inline]
    fn of(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn f64(self) -> f64 {
        self as f64
    }

    /// Cody-Waite reduction with a degree-6 polynomial; within 2 ulp of
    /// `f32::exp` on `[-87, 88]`.
    #[inline(always)]
    fn exp_fast(self) -> Self {
        const LOG2E: f32 = std::f32::consts::LOG2_E;
        const C1: f32 = 0.693_359_4;
        const C2: f32 = -2.121_944_4e-4;
        // adding and subtracting 1.5·2²³ rounds to the nearest integer
        const ROUND: f32 = 12_582_912.0;
        // min/max rather than clamp, and the exponent read straight from
        // the rounding sum's mantissa: both keep the loop vectorisable
        #[allow(clippy::manual_clamp)]
        let x = self.max(-87.0).min(88.0);
        let n = (x * LOG2E + ROUND) - ROUND;
        let r = x - n * C1 - n * C2;
        let p = 1.987_569_1e-4;
        let p = p * r + 1.398_2e-3;
        let p = p * r + 8.333_452e-3;
        let p = p * r + 4.166_579_6e-2;
        let p = p * r + 1.666_666_5e-1;
        let p = p * r + 5e-1;
        let y = p * r * r + r + 1.0;
        let scale = f32::from_bits((n + ROUND + 127.0).to_bits() << 23);
        y * scale
    }
}

impl Scalar for f64 {
    #[inline]
    fn of(v: f64) -> Self {
        v
    }

    #[inline]
    fn f64(self) -> f64 {
        self
    }

    #[inline(always)]
    fn exp_fast(self) -> Self {
        self.exp()
    }
}

#[inline(always)]
pub(crate) fn sigmoid<S: Scalar>(x: S) -> S {
    S::one() / (S::one() + (-x).exp_fast())
}

/// `tanh` as `2σ(2x) − 1`, avoiding libm's much slower `tanh`.
#[inline(always)]
pub(crate) fn tanh<S: Scalar>(x: S) -> S {
    let two = S::one() + S::one();
    two / (S::one() + (-two * x).exp_fast()) - S::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_exp_tracks_libm() {
        for i in -8700..=8800 {
            let x = i as f32 / 100.0;
            let (a, b) = (x.exp_fast(), x.exp());
            assert!((a - b).abs() <= 3.0 * f32::EPSILON * b, "{x}: {a} vs {b}");
        }
        assert!((-1e4f32).exp_fast() >= 0.0);
        assert!(1e4f32.exp_fast().is_finite());
    }

    #[test]
    fn activations_saturate_cleanly() {
        for x in [-1e4f32, -50.0, 0.0, 50.0, 1e4] {
            assert!((0.0..=1.0).contains(&sigmoid(x)));
            assert!((-1.0..=1.0).contains(&tanh(x)));
        }
        assert!((tanh(0.3f64) - 0.3f64.tanh()).abs() < 1e-15);
        assert!((sigmoid(-700.0f64)).is_finite());
    }
}
