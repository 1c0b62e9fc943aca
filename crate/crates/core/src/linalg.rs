//! Small dense helpers: 3-vectors, 3×3 matrices and a Householder
//! least-squares factorisation used by the field projector.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type Vec3<T> = [T; 3];
pub type Mat3<T> = [[T; 3]; 3];

#[inline]
pub fn add<T: Scalar>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub<T: Scalar>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale<T: Scalar>(s: T, a: Vec3<T>) -> Vec3<T> {
    [s * a[0], s * a[1], s * a[2]]
}

#[inline]
pub fn dot<T: Scalar>(a: Vec3<T>, b: Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm<T: Scalar>(a: Vec3<T>) -> T {
    dot(a, a).sqrt()
}

#[inline]
pub fn cross<T: Scalar>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn zero3<T: Scalar>() -> Vec3<T> {
    [T::zero(); 3]
}

pub fn identity3<T: Scalar>() -> Mat3<T> {
    let mut m = [[T::zero(); 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = T::one();
    }
    m
}

pub fn det3<T: Scalar>(m: &Mat3<T>) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Inverse by the adjugate; returns `None` for an exactly singular matrix.
pub fn inv3<T: Scalar>(m: &Mat3<T>) -> Option<Mat3<T>> {
    let det = det3(m);
    if det == T::zero() || !det.is_finite() {
        return None;
    }
    let inv_det = T::one() / det;
    let c = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    Some([
        [c(1, 2, 1, 2) * inv_det, -c(0, 2, 1, 2) * inv_det, c(0, 1, 1, 2) * inv_det],
        [-c(1, 2, 0, 2) * inv_det, c(0, 2, 0, 2) * inv_det, -c(0, 1, 0, 2) * inv_det],
        [c(1, 2, 0, 1) * inv_det, -c(0, 2, 0, 1) * inv_det, c(0, 1, 0, 1) * inv_det],
    ])
}

pub fn matmul3<T: Scalar>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

/// Max-abs entry of `a - b`.
pub fn max_abs_diff3<T: Scalar>(a: &Mat3<T>, b: &Mat3<T>) -> T {
    let mut m = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            m = m.max((a[i][j] - b[i][j]).abs());
        }
    }
    m
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> Dense<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `self · x` with a sequential accumulation order per row.
    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                let row = self.row(r);
                let mut acc = T::zero();
                for (a, b) in row.iter().zip(x) {
                    acc += *a * *b;
                }
                acc
            })
            .collect()
    }
}

/// Solves weighted least-squares problems `min ‖D(Ax − b)‖` for a fixed
/// design matrix via Householder QR, so repeated projections cost one
/// dense product.
#[derive(Clone, Debug)]
pub struct LeastSquares<T> {
    /// `pinv` maps observations (length `rows`) to coefficients (length `cols`).
    pinv: Dense<T>,
}

impl<T: Scalar> LeastSquares<T> {
    /// `design` is `rows × cols` (rows ≥ cols); `row_weights` are the
    /// nonnegative weights `D²` applied to the squared residuals.
    pub fn new(design: &Dense<T>, row_weights: &[T]) -> Result<Self> {
        let (m, n) = (design.rows, design.cols);
        if m < n {
            return Err(Error::Singular(format!("underdetermined fit: {m} rows for {n} unknowns")));
        }
        assert_eq!(row_weights.len(), m);
        let sqrt_w: Vec<T> = row_weights.iter().map(|w| w.max(T::zero()).sqrt()).collect();
        // column-major copy of D·A
        let mut a: Vec<Vec<T>> = (0..n)
            .map(|c| (0..m).map(|r| design.at(r, c) * sqrt_w[r]).collect())
            .collect();
        let mut vs: Vec<Vec<T>> = Vec::with_capacity(n);
        let mut rdiag = vec![T::zero(); n];
        for k in 0..n {
            let mut alpha = T::zero();
            for r in k..m {
                alpha += a[k][r] * a[k][r];
            }
            let mut alpha = alpha.sqrt();
            if alpha == T::zero() {
                return Err(Error::Singular(format!("rank deficient design at column {k}")));
            }
            if a[k][k] > T::zero() {
                alpha = -alpha;
            }
            let mut v: Vec<T> = vec![T::zero(); m];
            for r in k..m {
                v[r] = a[k][r];
            }
            v[k] -= alpha;
            let vnorm2: T = (k..m).map(|r| v[r] * v[r]).fold(T::zero(), |s, x| s + x);
            if vnorm2 > T::zero() {
                for col in a.iter_mut().skip(k) {
                    let mut d = T::zero();
                    for r in k..m {
                        d += v[r] * col[r];
                    }
                    let f = (d + d) / vnorm2;
                    for r in k..m {
                        col[r] -= f * v[r];
                    }
                }
            }
            rdiag[k] = a[k][k];
            vs.push(v);
        }
        let scale = rdiag.iter().fold(T::zero(), |s, d| s.max(d.abs()));
        let tiny = scale * T::epsilon() * T::lit(m as f64);
        if rdiag.iter().any(|d| d.abs() <= tiny) {
            return Err(Error::Singular("numerically rank deficient design".into()));
        }
        // Q₁ = H₀…H_{n−1}[I; 0], then pinv = R⁻¹ Q₁ᵀ D.
        let mut q1: Vec<Vec<T>> = Vec::with_capacity(n);
        for c in 0..n {
            let mut e = vec![T::zero(); m];
            e[c] = T::one();
            for (k, v) in vs.iter().enumerate().rev() {
                let vnorm2: T = (k..m).map(|r| v[r] * v[r]).fold(T::zero(), |s, x| s + x);
                if vnorm2 == T::zero() {
                    continue;
                }
                let mut d = T::zero();
                for r in k..m {
                    d += v[r] * e[r];
                }
                let f = (d + d) / vnorm2;
                for r in k..m {
                    e[r] -= f * v[r];
                }
            }
            q1.push(e);
        }
        let mut pinv = Dense::zeros(n, m);
        let mut x = vec![T::zero(); n];
        for obs in 0..m {
            for i in (0..n).rev() {
                let mut s = q1[i][obs];
                for j in i + 1..n {
                    s -= a[j][i] * x[j];
                }
                x[i] = s / a[i][i];
            }
            for (i, xi) in x.iter().enumerate() {
                pinv.set(i, obs, *xi * sqrt_w[obs]);
            }
        }
        Ok(Self { pinv })
    }

    pub fn solve(&self, observations: &[T]) -> Vec<T> {
        self.pinv.matvec(observations)
    }

    pub fn unknowns(&self) -> usize {
        self.pinv.rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_times_matrix_is_identity() {
        let m = [[2.0, 1.0, 0.5], [0.1, 3.0, -1.0], [0.0, 0.4, 1.5]];
        let inv = inv3(&m).unwrap();
        let id = matmul3(&inv, &m);
        assert!(max_abs_diff3(&id, &identity3()) < 1e-14);
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let m = [[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 1.0, 1.0]];
        assert!(inv3(&m).is_none());
    }

    #[test]
    fn least_squares_recovers_exact_line() {
        let xs = [0.0, 0.5, 1.0, 1.5, 2.0];
        let mut design = Dense::zeros(xs.len(), 2);
        for (r, x) in xs.iter().enumerate() {
            design.set(r, 0, 1.0);
            design.set(r, 1, *x);
        }
        let obs: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
        let ls = LeastSquares::new(&design, &[1.0, 2.0, 1.0, 0.5, 1.0]).unwrap();
        let c = ls.solve(&obs);
        assert!((c[0] - 3.0).abs() < 1e-13 && (c[1] + 2.0).abs() < 1e-13);
    }

    #[test]
    fn rank_deficient_design_is_rejected() {
        let mut design = Dense::zeros(3, 2);
        for r in 0..3 {
            design.set(r, 0, 1.0);
            design.set(r, 1, 2.0);
        }
        assert!(LeastSquares::new(&design, &[1.0; 3]).is_err());
    }
}
