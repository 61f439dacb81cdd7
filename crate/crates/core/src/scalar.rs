//! Scalar abstraction: every numeric kernel in this crate is generic over a
//! floating-point type so the same code runs at f32 or f64 precision.
//! Concrete aliases live at the crate root.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::{de::DeserializeOwned, Serialize};

/// Floating-point scalar usable throughout the toolkit: f32 or f64.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Sum
        + Debug
        + Display
        + Serialize
        + DeserializeOwned
        + Send
        + Sync
        + 'static
{
}

/// Convert an f64 constant into the working scalar type.
#[inline]
pub fn r64<R: Real>(v: f64) -> R {
    R::from_f64(v).expect("f64 constant representable in scalar type")
}

/// Lossy view of a scalar as f64, for error payloads and reports.
#[inline]
pub fn as_f64<R: Real>(v: R) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_constants() {
        assert_eq!(r64::<f64>(0.25), 0.25);
        assert_eq!(r64::<f32>(0.25), 0.25f32);
        assert_eq!(as_f64(1.5f32), 1.5);
    }
}
