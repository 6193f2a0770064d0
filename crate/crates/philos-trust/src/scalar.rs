//! Scalar abstraction so the trust math runs on any float width.

use std::fmt;

use num_traits::{Float, FromPrimitive};

/// Numeric type the trust computations are generic over.
///
/// Implemented for `f32` and `f64` out of the box. Anything float-like with
/// the same trait surface (exp, ln, comparisons, conversions from integer
/// counts) works too.
pub trait Scalar: Float + FromPrimitive + fmt::Debug + fmt::Display {}

impl<T> Scalar for T where T: Float + FromPrimitive + fmt::Debug + fmt::Display {}

/// Lossless-enough conversion from a step or peer count.
///
/// Counts in this crate stay far below 2^52, so the conversion is exact for
/// `f64` and only rounds for `f32` above 2^24.
pub(crate) fn from_count<S: Scalar>(n: u64) -> S {
    S::from_u64(n).expect("count representable in scalar type")
}

/// Narrows an `f64` literal or config value into `S`, rounding if `S` is
/// narrower. Finite inputs always convert.
pub(crate) fn from_f64_lossy<S: Scalar>(x: f64) -> S {
    S::from_f64(x).expect("finite f64 converts to any scalar")
}

/// Renders a scalar for CSV cells: `.` decimal separator, no grouping,
/// 12 significant digits, trailing zeros trimmed.
pub(crate) fn csv_cell<S: Scalar>(x: S) -> String {
    let x = x.to_f64().unwrap_or(f64::NAN);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).clamp(0, 17) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
