//! Scalar abstraction for the numeric core.
//!
//! Everything numeric in this crate is generic over [`Scalar`], which is
//! `f32` or `f64`; the CLI and the acceptance suite run on `f64` (see the
//! type aliases at the crate root).

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::distr::uniform::SampleUniform;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{de::DeserializeOwned, Serialize};

/// Floating-point scalar usable throughout the crate: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + SampleUniform
    + Sum
    + Serialize
    + DeserializeOwned
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from `f64` for constants and tolerances.
    fn from_f64_const(x: f64) -> Self {
        Self::from_f64(x).expect("constant representable in scalar type")
    }

    /// Lossy widening to `f64` (exact for `f32`/`f64`).
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    /// One standard-normal draw.
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

macro_rules! impl_scalar {
    ($($t:ty)*) => {$(
        impl Scalar for $t {
            fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                StandardNormal.sample(rng)
            }
        }
    )*};
}

impl_scalar!(f32 f64);

#[cfg(test)]
mod tests {
    use super::*;

    fn l2_norm<S: Scalar>(v: &[S]) -> S {
        v.iter().map(|&x| x * x).sum::<S>().sqrt()
    }

    #[test]
    fn generic_code_runs_on_both_widths() {
        assert!((l2_norm(&[3.0f32, 4.0]) - 5.0).abs() < 1e-6);
        assert!((l2_norm(&[3.0f64, 4.0]) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn f64_round_trip_is_exact() {
        let x = 0.123_456_789_012_345_f64;
        assert_eq!(f64::from_f64_const(x), x);
        assert_eq!(x.to_f64_lossy(), x);
    }
}
