//! Scalar abstraction: everything numeric in this crate is generic over the
//! floating-point type, with `f64` as the default instantiation.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating scalar the library is generic over (`f32` or `f64`).
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Conversion from an `f64` literal (rule parameters, tolerances).
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts to any Real")
    }

    /// Lossless-enough view as `f64` for reporting and hashing.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
