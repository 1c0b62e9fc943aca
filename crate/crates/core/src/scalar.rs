//! Scalar abstractions shared by every numerical module.
//!
//! Exact coefficient algebra (polynomials, differential operators) only needs
//! a commutative ring, so it is written against [`Ring`] and works with
//! rational numbers as well as floats. Everything that integrates, inverts or
//! takes roots is written against [`Scalar`].

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumAssign};

/// Coefficient ring for exact polynomial and operator algebra.
pub trait Ring: Num + NumAssign + Clone + Debug + PartialEq {
    fn from_count(n: usize) -> Self {
        let mut acc = Self::zero();
        for _ in 0..n {
            acc += Self::one();
        }
        acc
    }
}

impl<T> Ring for T where T: Num + NumAssign + Clone + Debug + PartialEq {}

/// Floating point type used for quadrature, kinematics and dynamics.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Ring + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossless-enough conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Shorthand for [`Scalar::lit`].
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::lit(x)
}

/// Compensated (Neumaier) summation with a fixed, sequential order.
///
/// All integrals in the crate reduce through this so results are bit-identical
/// across runs regardless of how node values were produced.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum<T> {
    sum: T,
    comp: T,
}

impl<T: Scalar> KahanSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> T {
        self.sum + self.comp
    }
}

impl<T: Scalar> FromIterator<T> for KahanSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Sum with [`KahanSum`] in iteration order.
pub fn stable_sum<T: Scalar, I: IntoIterator<Item = T>>(iter: I) -> T {
    iter.into_iter().collect::<KahanSum<T>>().total()
}
