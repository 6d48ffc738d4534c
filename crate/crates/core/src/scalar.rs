//! Scalar abstraction shared by the numerical kernels.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the analysis kernels are generic over.
///
/// Implemented for `f32` and `f64`. Everything in the crate is tested in
/// `f64`; `f32` is useful for quick exploratory sweeps where the reduced
/// dynamic range is acceptable.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, used for configuration constants.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Smallest relative spacing worth iterating to.
    fn tolerance() -> Self;
}

impl Real for f64 {
    fn tolerance() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn tolerance() -> Self {
        1e-6
    }
}

/// Binary entropy in nats with `H(0) = H(1) = 0`.
pub fn binary_entropy<T: Real>(p: T) -> T {
    if p <= T::zero() || p >= T::one() {
        return T::zero();
    }
    let q = T::one() - p;
    -(p * p.ln() + q * q.ln())
}

/// `ln(p / (1 - p))`.
pub fn logit<T: Real>(p: T) -> T {
    (p / (T::one() - p)).ln()
}

pub fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_edges() {
        assert_eq!(binary_entropy(0.0_f64), 0.0);
        assert_eq!(binary_entropy(1.0_f64), 0.0);
        assert!((binary_entropy(0.5_f64) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((binary_entropy(0.5_f32) - std::f32::consts::LN_2).abs() < 1e-6);
    }

    #[test]
    fn sigmoid_inverts_logit() {
        for &p in &[1e-9, 0.01, 0.3, 0.5, 0.97] {
            let back: f64 = sigmoid(logit(p));
            assert!((back - p).abs() < 1e-12 * p.max(1e-3));
        }
    }
}
