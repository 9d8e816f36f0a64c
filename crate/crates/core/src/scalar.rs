use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real scalar backing every matrix, state and metric in the crate: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Tolerance used when re-validating an evolved state at each iteration.
    const DRIFT_TOL: f64;
    /// Absolute off-diagonal norm at which the Jacobi sweep stops.
    const JACOBI_TOL: f64;
    /// Negative ergotropies this close to zero are rounding noise and clip to 0.
    const ERGOTROPY_CLIP: f64;

    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }
}

impl Real for f64 {
    const DRIFT_TOL: f64 = 1e-9;
    const JACOBI_TOL: f64 = 1e-12;
    const ERGOTROPY_CLIP: f64 = 1e-10;
}

impl Real for f32 {
    const DRIFT_TOL: f64 = 1e-4;
    const JACOBI_TOL: f64 = 1e-6;
    const ERGOTROPY_CLIP: f64 = 1e-5;
}
