use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar usable by every numerical routine in the crate.
///
/// Eigendecompositions and Schur forms come from `nalgebra`, so exact
/// rational types are not supported.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Default + Display + Debug + Send + Sync + 'static
{
    /// Lossy conversion from `f64`.
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite f64 converts to every Real")
    }

    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Rounds to `decimals` places after the point.
    fn round_to(self, decimals: u32) -> Self {
        let scale = Self::of(10f64.powi(decimals as i32));
        (self * scale).round() / scale
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(1.23456f64.round_to(4), 1.2346);
        assert_eq!((-0.00004f64).round_to(4), 0.0);
        assert_eq!(2.5f32.round_to(0), 3.0);
    }
}
