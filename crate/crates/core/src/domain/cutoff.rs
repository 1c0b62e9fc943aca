//! Radial partition of unity `χ + χ̄ = 1` on the unit ball.
//!
//! `χ = 0` on `[0, 1/4]`, `χ = 1` on `[3/4, 1]`, and in between
//! `χ(r) = s((r − 1/4) / (1/2))` with `s(u) = f(u) / (f(u) + f(1 − u))`,
//! `f(u) = exp(−1/u)` for `u > 0`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn f<T: Scalar>(u: T) -> T {
    if u > T::zero() {
        (-u.recip()).exp()
    } else {
        T::zero()
    }
}

fn smooth_step<T: Scalar>(u: T) -> T {
    if u <= T::zero() {
        return T::zero();
    }
    if u >= T::one() {
        return T::one();
    }
    let a = f(u);
    a / (a + f(T::one() - u))
}

/// `χ(r)` without range checking; values outside `[0, 1]` clamp to the plateaus.
pub fn chi_unchecked<T: Scalar>(r: T) -> T {
    smooth_step((r - T::lit(0.25)) / T::lit(0.5))
}

pub fn chi<T: Scalar>(r: T) -> Result<T> {
    if !(r >= T::zero() && r <= T::one()) {
        return Err(Error::Domain(format!("cutoff radius {r} outside [0, 1]")));
    }
    Ok(chi_unchecked(r))
}

/// `χ̄ = 1 − χ`.
pub fn chibar<T: Scalar>(r: T) -> Result<T> {
    chi(r).map(|c| T::one() - c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn plateaus() {
        assert_eq!(chi(0.9_f64).unwrap(), 1.0);
        assert_eq!(chi(0.1_f64).unwrap(), 0.0);
        assert_eq!(chi(0.75_f64).unwrap(), 1.0);
        assert_eq!(chi(0.25_f64).unwrap(), 0.0);
        assert!((chi(0.5_f64).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn outside_unit_interval_is_rejected() {
        assert!(chi(1.01_f64).is_err());
        assert!(chi(-0.01_f64).is_err());
        assert!(chi(f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn partition_of_unity_is_exact(r in 0.0f64..=1.0) {
            prop_assert_eq!(chi(r).unwrap() + chibar(r).unwrap(), 1.0);
        }

        #[test]
        fn monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(chi(lo).unwrap() <= chi(hi).unwrap());
        }
    }
}
