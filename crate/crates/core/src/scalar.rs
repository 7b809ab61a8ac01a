use std::fmt::{Debug, Display};

use num_traits::float::FloatConst;
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Scalar type the math in this crate is generic over: `f32` or `f64`.
///
/// The CLI and all file formats work in `f64`; see the type aliases at the
/// crate root.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Lift an `f64` constant into the working scalar type.
pub(crate) fn real<R: Real>(v: f64) -> R {
    R::from_f64(v).expect("finite constant")
}
