//! Exterior Newtonian potentials of polynomial densities on the unit ball.
//!
//! For `|p| ≥ 1`, `1/|p − y| = Σ_l 4π/(2l+1) Σ_m R_lm(y) R_lm(p) / |p|^{2l+1}`
//! with real regular solid harmonics `R_lm(y) = |y|^l Y_lm(ŷ)`. A density of
//! degree `≤ P` has no harmonic content above `l = P`, so truncating at `P`
//! is exact, and the moments `∫ f R_lm` are exact on any grid integrating
//! degree `2P` polynomials.

use crate::linalg::Vec3;
use crate::scalar::Scalar;

pub fn harmonic_count(lmax: usize) -> usize {
    (lmax + 1) * (lmax + 1)
}

fn index(l: usize, m: isize) -> usize {
    ((l * l + l) as isize + m) as usize
}

/// `R_lm(y)` for `l ≤ lmax`, `|m| ≤ l`, at index `l² + l + m`.
pub fn solid_harmonics<T: Scalar>(y: &Vec3<T>, lmax: usize) -> Vec<T> {
    let (x, yy, z) = (y[0], y[1], y[2]);
    let r2 = x * x + yy * yy + z * z;
    let mut out = vec![T::zero(); harmonic_count(lmax)];
    let four_pi = T::lit(4.0) * T::PI();
    // (x + iy)^m
    let (mut cre, mut cim) = (T::one(), T::zero());
    let mut double_fact = T::one();
    for m in 0..=lmax {
        if m > 0 {
            let re = cre * x - cim * yy;
            cim = cre * yy + cim * x;
            cre = re;
            double_fact *= T::lit((2 * m - 1) as f64);
        }
        // S_l^m for l = m, m+1, ...
        let mut prev2 = T::zero();
        let mut prev = double_fact;
        for l in m..=lmax {
            let s = if l == m {
                prev
            } else {
                let v = if l == m + 1 {
                    T::lit((2 * m + 1) as f64) * z * prev
                } else {
                    (T::lit((2 * l - 1) as f64) * z * prev - T::lit((l + m - 1) as f64) * r2 * prev2)
                        / T::lit((l - m) as f64)
                };
                prev2 = prev;
                prev = v;
                v
            };
            let mut ratio = T::one();
            for k in (l - m + 1)..=(l + m) {
                ratio /= T::lit(k as f64);
            }
            let n = (T::lit((2 * l + 1) as f64) / four_pi * ratio).sqrt();
            if m == 0 {
                out[index(l, 0)] = n * s;
            } else {
                let n = n * T::lit(2.0).sqrt();
                out[index(l, m as isize)] = n * s * cre;
                out[index(l, -(m as isize))] = n * s * cim;
            }
        }
    }
    out
}

/// Multipole moments of several densities sampled on an exact grid.
#[derive(Clone, Debug)]
pub struct Multipoles<T> {
    lmax: usize,
    /// `moments[c][lm] = ∫ f_c R_lm`.
    moments: Vec<Vec<T>>,
}

impl<T: Scalar> Multipoles<T> {
    /// `harmonics[k]` holds `R_lm` at quadrature node `k`; `columns[c][k]`
    /// the density values there.
    pub fn new(lmax: usize, weights: &[T], harmonics: &[Vec<T>], columns: &[Vec<T>]) -> Self {
        let nh = harmonic_count(lmax);
        let moments = columns
            .iter()
            .map(|col| {
                let mut q = vec![T::zero(); nh];
                for (k, h) in harmonics.iter().enumerate() {
                    let f = weights[k] * col[k];
                    if f == T::zero() {
                        continue;
                    }
                    for (qi, hi) in q.iter_mut().zip(h) {
                        *qi += f * *hi;
                    }
                }
                q
            })
            .collect();
        Self { lmax, moments }
    }

    /// Potentials `∫ f_c(y)/|p − y| dy` for `|p| ≥ 1`.
    pub fn potential(&self, p: &Vec3<T>) -> Vec<T> {
        let h = solid_harmonics(p, self.lmax);
        let r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
        let r = r2.sqrt();
        let four_pi = T::lit(4.0) * T::PI();
        let mut scale = Vec::with_capacity(self.lmax + 1);
        let mut inv = r.recip();
        for l in 0..=self.lmax {
            scale.push(four_pi / T::lit((2 * l + 1) as f64) * inv);
            inv /= r2;
        }
        self.moments
            .iter()
            .map(|q| {
                let mut total = T::zero();
                for (l, s) in scale.iter().enumerate() {
                    let mut acc = T::zero();
                    for i in (l * l)..((l + 1) * (l + 1)) {
                        acc += q[i] * h[i];
                    }
                    total += *s * acc;
                }
                total
            })
            .collect()
    }
}
