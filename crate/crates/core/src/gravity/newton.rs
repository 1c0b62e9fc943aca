//! Newtonian potentials `∫_B z^e / |x − z| dz` of the basis monomials at a
//! target `|x| ≤ 1`, by polar quadrature centred on the target.
//!
//! With `z = x + s u`, the kernel cancels against the `s²` Jacobian and the
//! radial integrand is a polynomial in `s`, integrated exactly by Gauss on
//! `[0, R(u)]`, `R = −x·u + √((x·u)² + 1 − r²)`. The azimuth about `x̂` is
//! a trigonometric polynomial (uniform rule). The polar variable `c = x̂·u`
//! only enters through `R(c)`, whose branch points sit at `c = ±i√(1−r²)/r`,
//! so `c` uses composite Gauss panels split at 0 and graded toward 0.

use crate::domain::grid::basis_values;
use crate::domain::poly::basis_len;
use crate::domain::quadrature::gauss_legendre;
use crate::linalg::{cross, norm, Vec3};
use crate::scalar::Scalar;

const POINTS_PER_PANEL: usize = 10;

fn panel_breaks<T: Scalar>(r: T) -> Vec<T> {
    let one = T::one();
    if r <= T::lit(1e-14) {
        return vec![-one, T::zero(), one];
    }
    let a = (one - r * r).max(T::zero()).sqrt() / r;
    let mut pos = vec![T::zero()];
    if a > T::lit(1e-12) {
        let mut edge = a;
        while edge < one {
            pos.push(edge);
            edge = edge + edge;
        }
    }
    pos.push(one);
    let mut out: Vec<T> = pos.iter().skip(1).rev().map(|p| -*p).collect();
    out.extend(pos);
    out
}

fn orthonormal_frame<T: Scalar>(x: &Vec3<T>) -> (Vec3<T>, Vec3<T>, Vec3<T>, T) {
    let r = norm(*x);
    let e0 = if r <= T::lit(1e-14) {
        [T::zero(), T::zero(), T::one()]
    } else {
        [x[0] / r, x[1] / r, x[2] / r]
    };
    let helper = if e0[0].abs() < T::lit(0.6) {
        [T::one(), T::zero(), T::zero()]
    } else {
        [T::zero(), T::one(), T::zero()]
    };
    let e1 = cross(e0, helper);
    let n1 = norm(e1);
    let e1 = [e1[0] / n1, e1[1] / n1, e1[2] / n1];
    let e2 = cross(e0, e1);
    (e0, e1, e2, r.min(T::one()))
}

/// `∫_B z^e/|x − z| dz` for every basis monomial of total degree `≤ degree`.
pub fn basis_potentials<T: Scalar>(x: &Vec3<T>, degree: usize) -> Vec<T> {
    let nb = basis_len(degree);
    let mut out = vec![T::zero(); nb];
    let (e0, e1, e2, r) = orthonormal_frame(x);
    let n_phi = degree + 2;
    let n_s = (degree + 3) / 2;
    let (gs, ws) = gauss_legendre::<T>(n_s);
    let (gc, wc) = gauss_legendre::<T>(POINTS_PER_PANEL);
    let dphi = (T::PI() + T::PI()) / T::lit(n_phi as f64);
    let trig: Vec<(T, T)> = (0..n_phi)
        .map(|k| {
            let p = dphi * T::lit(k as f64);
            (p.cos(), p.sin())
        })
        .collect();
    let breaks = panel_breaks(r);
    let half = T::lit(0.5);
    let one_m_r2 = (T::one() - r * r).max(T::zero());
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let hc = (hi - lo) * half;
        let mc = (hi + lo) * half;
        for (tc, wcc) in gc.iter().zip(&wc) {
            let c = mc + hc * *tc;
            let wcv = *wcc * hc;
            let sin_t = (T::one() - c * c).max(T::zero()).sqrt();
            let rc = r * c;
            let big_r = -rc + (rc * rc + one_m_r2).sqrt();
            if big_r <= T::zero() {
                continue;
            }
            for (cp, sp) in &trig {
                let u = [
                    c * e0[0] + sin_t * (*cp * e1[0] + *sp * e2[0]),
                    c * e0[1] + sin_t * (*cp * e1[1] + *sp * e2[1]),
                    c * e0[2] + sin_t * (*cp * e1[2] + *sp * e2[2]),
                ];
                for (ts, wss) in gs.iter().zip(&ws) {
                    let s = big_r * half * (*ts + T::one());
                    let weight = wcv * dphi * *wss * big_r * half * s;
                    let z = [x[0] + s * u[0], x[1] + s * u[1], x[2] + s * u[2]];
                    let vals = basis_values(&z, degree);
                    for (o, v) in out.iter_mut().zip(&vals) {
                        *o += weight * *v;
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::poly::monomial_index;
    use std::f64::consts::PI;

    #[test]
    fn constant_density_potential_inside_and_on_boundary() {
        for x in [[0.0, 0.0, 0.0], [0.3, 0.1, -0.2], [0.0, 0.0, 0.999], [0.6, 0.8, 0.0]] {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            let v = basis_potentials(&x, 4)[0];
            let exact = 2.0 * PI * (1.0 - r2 / 3.0);
            assert!((v - exact).abs() < 1e-12, "{x:?}: {v} vs {exact}");
        }
    }

    #[test]
    fn r_squared_density_potential() {
        // Φ for ρ = r² inside the unit ball: π(1 − r⁴/5)... via shells:
        // 4π[ (1/r)∫₀^r s⁴ ds + ∫_r^1 s³ ds ] = 4π(r⁴/5 + (1 − r⁴)/4) = π(1 − r⁴/5)
        let x = [0.2, -0.5, 0.4];
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let v = basis_potentials(&x, 2);
        let sum = v[monomial_index([2, 0, 0])] + v[monomial_index([0, 2, 0])] + v[monomial_index([0, 0, 2])];
        let exact = PI * (1.0 - r2 * r2 / 5.0);
        assert!((sum - exact).abs() < 1e-12, "{sum} vs {exact}");
    }

    #[test]
    fn odd_degree_tables_match_the_degree_six_table() {
        let x = [0.1f64, 0.2, -0.15];
        let six = basis_potentials(&x, 6);
        for d in 1..6 {
            let v = basis_potentials(&x, d);
            for (a, b) in v.iter().zip(&six) {
                assert!((a - b).abs() < 1e-12, "degree {d}: {a} vs {b}");
            }
        }
    }
}
