//! Test functions on `[0, 1]` with Neumann ends, and the cosine family used
//! by the metric, the weak-form residual and the spectral distances.

use core::f64::consts::{PI, SQRT_2};

#[allow(unused_imports)] // shadowed by std float methods when std is linked
use num_traits::Float;

/// A `C²` function on `[0, 1]` together with its first two derivatives.
pub trait TestFunction {
    fn value(&self, x: f64) -> f64;
    fn d1(&self, x: f64) -> f64;
    fn d2(&self, x: f64) -> f64;

    /// Largest of `|f'(0)|` and `|f'(1)|`; zero for admissible test functions.
    fn neumann_defect(&self) -> f64 {
        self.d1(0.0).abs().max(self.d1(1.0).abs())
    }
}

/// `f_0 = 1`, `f_j(x) = √2 cos(jπx)` for `j ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CosineMode(pub u32);

impl CosineMode {
    #[inline]
    fn amp(&self) -> f64 {
        if self.0 == 0 {
            1.0
        } else {
            SQRT_2
        }
    }

    #[inline]
    fn freq(&self) -> f64 {
        f64::from(self.0) * PI
    }
}

impl TestFunction for CosineMode {
    #[inline]
    fn value(&self, x: f64) -> f64 {
        self.amp() * (self.freq() * x).cos()
    }

    #[inline]
    fn d1(&self, x: f64) -> f64 {
        let w = self.freq();
        -self.amp() * w * (w * x).sin()
    }

    #[inline]
    fn d2(&self, x: f64) -> f64 {
        let w = self.freq();
        -self.amp() * w * w * (w * x).cos()
    }

    fn neumann_defect(&self) -> f64 {
        0.0
    }
}

/// A test function given by three closures.
pub struct FnTest<F, G, H> {
    pub f: F,
    pub df: G,
    pub d2f: H,
}

impl<F, G, H> TestFunction for FnTest<F, G, H>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
    H: Fn(f64) -> f64,
{
    fn value(&self, x: f64) -> f64 {
        (self.f)(x)
    }
    fn d1(&self, x: f64) -> f64 {
        (self.df)(x)
    }
    fn d2(&self, x: f64) -> f64 {
        (self.d2f)(x)
    }
}
