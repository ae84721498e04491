//! Scalar abstractions.
//!
//! [`Scalar`] is the minimum needed for novelty counts and rating centering
//! (field arithmetic plus an exact conversion from small counts). [`Real`]
//! adds the transcendental functions required by entropy and by the
//! differentiable core.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign, SubAssign};

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

pub trait Scalar: Num + Copy + PartialOrd + Debug + Display + Send + Sync + 'static {
    /// Exact image of a nonnegative count.
    fn from_count(n: usize) -> Self;

    /// Nearest `f64`, used for reporting and serialization.
    fn to_f64_lossy(self) -> f64;
}

pub trait Real: Scalar + Float + FromPrimitive + AddAssign + SubAssign + MulAssign + Sum {
    fn from_f64_lossy(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite f64 converts to any float")
    }
}

macro_rules! impl_float_scalar {
    ($($t:ty),*) => {$(
        impl Scalar for $t {
            #[inline]
            fn from_count(n: usize) -> Self {
                n as $t
            }
            #[inline]
            fn to_f64_lossy(self) -> f64 {
                self as f64
            }
        }
        impl Real for $t {}
    )*};
}

impl_float_scalar!(f32, f64);

macro_rules! impl_ratio_scalar {
    ($($i:ty),*) => {$(
        impl Scalar for Ratio<$i> {
            fn from_count(n: usize) -> Self {
                Ratio::from_integer(<$i>::try_from(n).expect("count fits the rational's integer type"))
            }
            fn to_f64_lossy(self) -> f64 {
                self.to_f64().unwrap_or(f64::NAN)
            }
        }
    )*};
}

impl_ratio_scalar!(i32, i64, i128);
