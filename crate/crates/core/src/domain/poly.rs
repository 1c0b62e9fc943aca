//! Graded monomial basis `x^a y^b z^c`, `a+b+c ≤ P`, and exact
//! coefficient-level calculus on it.
//!
//! Basis indices do not depend on `P`: degree `d` occupies the block
//! starting at `C(d+2, 3)`, and inside a block exponents are listed with
//! `a` descending, then `b` descending. Fields of different degree are
//! therefore prefix-compatible.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Ring;

pub type Exponent = [usize; 3];

/// Number of monomials of total degree `≤ degree`.
pub const fn basis_len(degree: usize) -> usize {
    (degree + 1) * (degree + 2) * (degree + 3) / 6
}

pub fn monomial_index(e: Exponent) -> usize {
    let d = e[0] + e[1] + e[2];
    let offset = if d == 0 { 0 } else { basis_len(d - 1) };
    let da = d - e[0];
    offset + da * (da + 1) / 2 + (da - e[1])
}

/// Exponents in basis order.
pub fn exponents(degree: usize) -> Vec<Exponent> {
    let mut out = Vec::with_capacity(basis_len(degree));
    for d in 0..=degree {
        for a in (0..=d).rev() {
            for b in (0..=d - a).rev() {
                out.push([a, b, d - a - b]);
            }
        }
    }
    out
}

fn check_axis(i: usize) -> Result<()> {
    if i < 3 {
        Ok(())
    } else {
        Err(Error::Argument(format!("axis {i} out of range (expected 0, 1 or 2)")))
    }
}

/// Scalar polynomial of total degree `≤ degree` in the monomial basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldRep<T> {
    degree: usize,
    coeffs: Vec<T>,
}

/// Three scalar components.
pub type VectorField<T> = [FieldRep<T>; 3];

impl<T: Ring> FieldRep<T> {
    pub fn zero(degree: usize) -> Self {
        Self {
            degree,
            coeffs: vec![T::zero(); basis_len(degree)],
        }
    }

    pub fn constant(degree: usize, c: T) -> Self {
        let mut f = Self::zero(degree);
        f.coeffs[0] = c;
        f
    }

    /// `c · x^e`; fails if `|e| > degree`.
    pub fn monomial(degree: usize, e: Exponent, c: T) -> Result<Self> {
        if e.iter().sum::<usize>() > degree {
            return Err(Error::Argument(format!("monomial {e:?} exceeds degree {degree}")));
        }
        let mut f = Self::zero(degree);
        f.coeffs[monomial_index(e)] = c;
        Ok(f)
    }

    /// The coordinate function `x_i`.
    pub fn coordinate(degree: usize, i: usize) -> Self {
        let mut e = [0; 3];
        e[i] = 1;
        Self::monomial(degree.max(1), e, T::one()).expect("degree at least one")
    }

    pub fn from_coeffs(degree: usize, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() != basis_len(degree) {
            return Err(Error::Argument(format!(
                "expected {} coefficients for degree {degree}, got {}",
                basis_len(degree),
                coeffs.len()
            )));
        }
        Ok(Self { degree, coeffs })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn coeff(&self, e: Exponent) -> T {
        let idx = monomial_index(e);
        self.coeffs.get(idx).cloned().unwrap_or_else(T::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == T::zero())
    }

    /// Highest degree carrying a nonzero coefficient (0 for the zero field).
    pub fn effective_degree(&self) -> usize {
        exponents(self.degree)
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, c)| **c != T::zero())
            .map(|(e, _)| e[0] + e[1] + e[2])
            .max()
            .unwrap_or(0)
    }

    /// Re-embeds in a basis of another degree; fails if nonzero terms would be lost.
    pub fn with_degree(&self, degree: usize) -> Result<Self> {
        if degree < self.degree && self.effective_degree() > degree {
            return Err(Error::Argument(format!(
                "field of degree {} does not fit in degree {degree}",
                self.effective_degree()
            )));
        }
        let mut coeffs = vec![T::zero(); basis_len(degree)];
        let n = coeffs.len().min(self.coeffs.len());
        coeffs[..n].clone_from_slice(&self.coeffs[..n]);
        Ok(Self { degree, coeffs })
    }

    fn map_terms(&self, degree: usize, f: impl Fn(Exponent, &T, &mut Vec<T>)) -> Self {
        let mut out = vec![T::zero(); basis_len(degree)];
        for (e, c) in exponents(self.degree).into_iter().zip(&self.coeffs) {
            if *c != T::zero() {
                f(e, c, &mut out);
            }
        }
        Self { degree, coeffs: out }
    }

    /// `∂_i`, same basis degree.
    pub fn partial(&self, i: usize) -> Result<Self> {
        check_axis(i)?;
        Ok(self.map_terms(self.degree, |e, c, out| {
            if e[i] > 0 {
                let mut t = e;
                t[i] -= 1;
                out[monomial_index(t)] += c.clone() * T::from_count(e[i]);
            }
        }))
    }

    /// `Λ = x_k ∂_k`: multiplies each homogeneous part by its degree.
    pub fn radial(&self) -> Self {
        self.map_terms(self.degree, |e, c, out| {
            out[monomial_index(e)] += c.clone() * T::from_count(e[0] + e[1] + e[2]);
        })
    }

    /// `∂̸_ij = x_i ∂_j − x_j ∂_i`; degree preserving.
    pub fn angular(&self, i: usize, j: usize) -> Result<Self> {
        check_axis(i)?;
        check_axis(j)?;
        if i == j {
            return Err(Error::Argument(format!("angular derivative needs distinct axes, got {i} twice")));
        }
        Ok(self.map_terms(self.degree, |e, c, out| {
            if e[j] > 0 {
                let mut t = e;
                t[j] -= 1;
                t[i] += 1;
                out[monomial_index(t)] += c.clone() * T::from_count(e[j]);
            }
            if e[i] > 0 {
                let mut t = e;
                t[i] -= 1;
                t[j] += 1;
                out[monomial_index(t)] -= c.clone() * T::from_count(e[i]);
            }
        }))
    }

    /// `x_i · F`, degree grows by one.
    pub fn mul_coordinate(&self, i: usize) -> Result<Self> {
        check_axis(i)?;
        Ok(self.map_terms(self.degree + 1, |e, c, out| {
            let mut t = e;
            t[i] += 1;
            out[monomial_index(t)] += c.clone();
        }))
    }

    /// Product; the result's basis degree is the sum of the factors'.
    pub fn mul_field(&self, other: &Self) -> Self {
        let degree = self.degree + other.degree;
        let ea = exponents(self.degree);
        let eb = exponents(other.degree);
        let mut out = vec![T::zero(); basis_len(degree)];
        for (a, ca) in ea.iter().zip(&self.coeffs) {
            if *ca == T::zero() {
                continue;
            }
            for (b, cb) in eb.iter().zip(&other.coeffs) {
                if *cb == T::zero() {
                    continue;
                }
                out[monomial_index([a[0] + b[0], a[1] + b[1], a[2] + b[2]])] += ca.clone() * cb.clone();
            }
        }
        Self { degree, coeffs: out }
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect(),
        }
    }

    /// Horner-free direct evaluation; fine for tests and off-grid points.
    pub fn eval(&self, x: &[T; 3]) -> T {
        let pow = |v: &T, n: usize| {
            let mut acc = T::one();
            for _ in 0..n {
                acc *= v.clone();
            }
            acc
        };
        let mut acc = T::zero();
        for (e, c) in exponents(self.degree).into_iter().zip(&self.coeffs) {
            if *c != T::zero() {
                acc += c.clone() * pow(&x[0], e[0]) * pow(&x[1], e[1]) * pow(&x[2], e[2]);
            }
        }
        acc
    }

    fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        let degree = self.degree.max(other.degree);
        let n = basis_len(degree);
        let get = |v: &Vec<T>, k: usize| v.get(k).cloned().unwrap_or_else(T::zero);
        Self {
            degree,
            coeffs: (0..n).map(|k| f(get(&self.coeffs, k), get(&other.coeffs, k))).collect(),
        }
    }
}

impl<T: Ring> Add for &FieldRep<T> {
    type Output = FieldRep<T>;
    fn add(self, rhs: Self) -> FieldRep<T> {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<T: Ring> Sub for &FieldRep<T> {
    type Output = FieldRep<T>;
    fn sub(self, rhs: Self) -> FieldRep<T> {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl<T: Ring> Neg for &FieldRep<T> {
    type Output = FieldRep<T>;
    fn neg(self) -> FieldRep<T> {
        self.scale(T::zero() - T::one())
    }
}

impl<T: Ring> Mul for &FieldRep<T> {
    type Output = FieldRep<T>;
    fn mul(self, rhs: Self) -> FieldRep<T> {
        self.mul_field(rhs)
    }
}

/// `∂̸_ij` with axes numbered 0..3.
pub fn angular_derivative<T: Ring>(f: &FieldRep<T>, i: usize, j: usize) -> Result<FieldRep<T>> {
    f.angular(i, j)
}

/// `Λ = r ∂_r`.
pub fn radial_derivative<T: Ring>(f: &FieldRep<T>) -> FieldRep<T> {
    f.radial()
}

/// Angular multi-order `(n₁, n₂, n₃)` for `∂̸₁₂^{n₁} ∂̸₁₃^{n₂} ∂̸₂₃^{n₃}`.
pub const ANGULAR_PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// `Λ^m ∂̸₁₂^{n₁} ∂̸₁₃^{n₂} ∂̸₂₃^{n₃} F`, rightmost operator applied first.
pub fn mixed_derivative<T: Ring>(f: &FieldRep<T>, m: usize, n: [usize; 3], cap: usize) -> Result<FieldRep<T>> {
    let order = m + n.iter().sum::<usize>();
    if order > cap {
        return Err(Error::Config(format!("derivative order {order} above cap {cap}")));
    }
    let mut g = f.clone();
    for (slot, &(i, j)) in ANGULAR_PAIRS.iter().enumerate().rev() {
        for _ in 0..n[slot] {
            g = g.angular(i, j)?;
        }
    }
    for _ in 0..m {
        g = g.radial();
    }
    Ok(g)
}

/// `∂₁^{k₁} ∂₂^{k₂} ∂₃^{k₃} F`.
pub fn rect_derivative<T: Ring>(f: &FieldRep<T>, k: [usize; 3], cap: usize) -> Result<FieldRep<T>> {
    let order: usize = k.iter().sum();
    if order > cap {
        return Err(Error::Config(format!("derivative order {order} above cap {cap}")));
    }
    let mut g = f.clone();
    for (axis, &times) in k.iter().enumerate() {
        for _ in 0..times {
            g = g.partial(axis)?;
        }
    }
    Ok(g)
}

/// All `(m, n̲)` with `m + |n̲| ≤ b`.
pub fn mixed_orders(b: usize) -> Vec<(usize, [usize; 3])> {
    let mut out = Vec::new();
    for m in 0..=b {
        for n1 in 0..=b - m {
            for n2 in 0..=b - m - n1 {
                for n3 in 0..=b - m - n1 - n2 {
                    out.push((m, [n1, n2, n3]));
                }
            }
        }
    }
    out
}

/// All `k̲` with `|k̲| ≤ b`.
pub fn rect_orders(b: usize) -> Vec<[usize; 3]> {
    exponents(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    type F = FieldRep<i64>;

    fn x(i: usize) -> F {
        F::coordinate(4, i)
    }

    #[test]
    fn index_formula_matches_enumeration() {
        for (k, e) in exponents(7).into_iter().enumerate() {
            assert_eq!(monomial_index(e), k);
        }
        assert_eq!(basis_len(6), 84);
    }

    #[test]
    fn angular_examples() {
        assert_eq!(x(0).angular(0, 1).unwrap(), -&x(1));
        let r2 = &(&(&x(0) * &x(0)) + &(&x(1) * &x(1))) + &(&x(2) * &x(2));
        assert!(r2.angular(0, 1).unwrap().is_zero());
        let x1x2 = (&x(0) * &x(1)).with_degree(4).unwrap();
        let expect = (&(&x(0) * &x(0)) - &(&x(1) * &x(1))).with_degree(4).unwrap();
        assert_eq!(x1x2.angular(0, 1).unwrap(), expect);
        assert!(x(0).angular(1, 1).is_err());
    }

    #[test]
    fn radial_examples() {
        let r2 = &(&(&x(0) * &x(0)) + &(&x(1) * &x(1))) + &(&x(2) * &x(2));
        assert_eq!(r2.radial(), r2.scale(2));
        assert!(F::constant(3, 5).radial().is_zero());
        let xyz = &(&x(0) * &x(1)) * &x(2);
        assert_eq!(xyz.radial(), xyz.scale(3));
    }

    #[test]
    fn mixed_and_rect_examples() {
        let f = x(0);
        assert_eq!(mixed_derivative(&f, 0, [0, 0, 0], 2).unwrap(), f);
        assert_eq!(mixed_derivative(&f, 1, [1, 0, 0], 2).unwrap(), -&x(1));
        let x1x2 = &x(0) * &x(1);
        let d = rect_derivative(&x1x2, [1, 1, 0], 2).unwrap();
        assert_eq!(d.with_degree(0).unwrap(), F::constant(0, 1));
        assert!(mixed_derivative(&f, 2, [1, 0, 0], 2).is_err());
        assert!(rect_derivative(&f, [2, 1, 0], 2).is_err());
    }

    #[test]
    fn eval_matches_monomials() {
        let f = &(&x(0) * &x(1)) + &F::constant(4, 3);
        assert_eq!(f.eval(&[2, 5, 7]), 13);
    }

    #[test]
    fn order_enumerations_have_expected_sizes() {
        assert_eq!(mixed_orders(2).len(), 15);
        assert_eq!(rect_orders(2).len(), 10);
    }
}
