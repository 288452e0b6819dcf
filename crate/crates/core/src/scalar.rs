//! Scalar abstraction for the numeric kernel.
//!
//! All quantities the engine computes with (tonnes, tCO2e per tonne, EUR per
//! tCO2e) are plain scalars. The math never depends on a concrete float
//! width, so the domain types and operations are generic over [`Scalar`];
//! `f64` aliases for every public type live at the crate root and are what
//! the CLI and the file loaders use.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the engine computes over: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + FromStr + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, used for configured constants.
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts to any Scalar")
    }

    /// Lossy conversion from `usize` (window lengths, counts).
    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize converts to any Scalar")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Round to `dp` decimal places with ties going to the even digit.
///
/// Used by the text renderers so that golden outputs are stable; the JSON
/// renderer keeps full precision.
pub fn round_half_even<F: Scalar>(value: F, dp: u32) -> F {
    let scale = F::from_u32(10u32.pow(dp)).expect("small power of ten");
    let scaled = value * scale;
    let floor = scaled.floor();
    let frac = scaled - floor;
    let half = F::from_f64_lossy(0.5);
    let two = F::one() + F::one();
    let odd = (floor / two).fract() != F::zero();
    let rounded = if frac > half || (frac == half && odd) {
        floor + F::one()
    } else {
        floor
    };
    rounded / scale
}

/// Fixed two-decimal rendering for EUR amounts (half-even).
pub fn format_eur<F: Scalar>(value: F) -> String {
    format!("{:.2}", round_half_even(value, 2))
}

/// Fixed six-decimal rendering for tCO2e amounts (half-even).
pub fn format_tco2e<F: Scalar>(value: F) -> String {
    format!("{:.6}", round_half_even(value, 6))
}
