//! Point-particle N-body integrator used as a trajectory oracle for fluid
//! star centroids. Units with `G = 1`; particle `i` accelerates by
//! `−Σ_{j≠i} m_j (x_i − x_j)/|x_i − x_j|³`.

use crate::domain::ReferenceGrid;
use crate::error::{Error, Result};
use crate::kinematics::StarFields;
use crate::linalg::{norm, sub, Vec3};
use crate::profiles::DensityProfile;
use crate::scalar::Scalar;

pub const DEFAULT_R_MIN: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct ParticleSystem<T> {
    pub positions: Vec<Vec3<T>>,
    pub velocities: Vec<Vec3<T>>,
    pub masses: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub positions: Vec<Vec<Vec3<T>>>,
    pub velocities: Vec<Vec<Vec3<T>>>,
}

impl<T: Scalar> ParticleSystem<T> {
    pub fn new(positions: Vec<Vec3<T>>, velocities: Vec<Vec3<T>>, masses: Vec<T>) -> Result<Self> {
        if positions.len() != velocities.len() || positions.len() != masses.len() {
            return Err(Error::Argument("particle arrays differ in length".into()));
        }
        if let Some(m) = masses.iter().find(|m| !(**m > T::zero())) {
            return Err(Error::Argument(format!("particle mass must be positive, got {m}")));
        }
        Ok(Self {
            positions,
            velocities,
            masses,
        })
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    fn accelerations(&self, x: &[Vec3<T>], r_min: T, t: T) -> Result<Vec<Vec3<T>>> {
        let n = x.len();
        let mut acc = vec![[T::zero(); 3]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = sub(x[i], x[j]);
                let r = norm(d);
                if r < r_min {
                    return Err(Error::CloseEncounter {
                        i,
                        j,
                        t: t.to_f64_lossy(),
                    });
                }
                let inv3 = (r * r * r).recip();
                for k in 0..3 {
                    acc[i][k] -= self.masses[j] * d[k] * inv3;
                    acc[j][k] += self.masses[i] * d[k] * inv3;
                }
            }
        }
        Ok(acc)
    }

    fn rk4(&self, x: &[Vec3<T>], v: &[Vec3<T>], t: T, h: T, r_min: T) -> Result<(Vec<Vec3<T>>, Vec<Vec3<T>>)> {
        let shift = |base: &[Vec3<T>], d: &[Vec3<T>], s: T| -> Vec<Vec3<T>> {
            base.iter()
                .zip(d)
                .map(|(b, dd)| [b[0] + s * dd[0], b[1] + s * dd[1], b[2] + s * dd[2]])
                .collect()
        };
        let half = h * T::lit(0.5);
        let a1 = self.accelerations(x, r_min, t)?;
        let x2 = shift(x, v, half);
        let v2 = shift(v, &a1, half);
        let a2 = self.accelerations(&x2, r_min, t + half)?;
        let x3 = shift(x, &v2, half);
        let v3 = shift(v, &a2, half);
        let a3 = self.accelerations(&x3, r_min, t + half)?;
        let x4 = shift(x, &v3, h);
        let v4 = shift(v, &a3, h);
        let a4 = self.accelerations(&x4, r_min, t + h)?;
        let sixth = h / T::lit(6.0);
        let two = T::lit(2.0);
        let mut xn = Vec::with_capacity(x.len());
        let mut vn = Vec::with_capacity(x.len());
        for i in 0..x.len() {
            let mut xi = x[i];
            let mut vi = v[i];
            for k in 0..3 {
                xi[k] += sixth * (v[i][k] + two * v2[i][k] + two * v3[i][k] + v4[i][k]);
                vi[k] += sixth * (a1[i][k] + two * a2[i][k] + two * a3[i][k] + a4[i][k]);
            }
            xn.push(xi);
            vn.push(vi);
        }
        Ok((xn, vn))
    }

    /// Integrates to each requested time (ascending, from 0) with steps of
    /// at most `dt`, recording the state there.
    pub fn integrate_to(&self, times: &[T], dt: T, r_min: T) -> Result<Trajectory<T>> {
        if !(dt > T::zero()) {
            return Err(Error::Argument(format!("time step must be positive, got {dt}")));
        }
        let mut x = self.positions.clone();
        let mut v = self.velocities.clone();
        self.accelerations(&x, r_min, T::zero())?;
        let mut t = T::zero();
        let mut out = Trajectory {
            times: Vec::with_capacity(times.len()),
            positions: Vec::with_capacity(times.len()),
            velocities: Vec::with_capacity(times.len()),
        };
        for &target in times {
            if target < t {
                return Err(Error::Argument("output times must be ascending and nonnegative".into()));
            }
            while target - t > T::zero() {
                let h = dt.min(target - t);
                let (xn, vn) = self.rk4(&x, &v, t, h, r_min)?;
                x = xn;
                v = vn;
                t = if target - t <= dt { target } else { t + h };
            }
            out.times.push(target);
            out.positions.push(x.clone());
            out.velocities.push(v.clone());
        }
        Ok(out)
    }

    /// Uniform output every `dt` up to `t_end`.
    pub fn nbody_integrate(&self, t_end: T, dt: T, r_min: T) -> Result<Trajectory<T>> {
        if !(dt > T::zero()) {
            return Err(Error::Argument(format!("time step must be positive, got {dt}")));
        }
        let steps = (t_end / dt).ceil().to_f64_lossy().max(0.0) as usize;
        let times: Vec<T> = (0..=steps).map(|k| (dt * T::lit(k as f64)).min(t_end)).collect();
        self.integrate_to(&times, dt, r_min)
    }

    pub fn total_momentum(&self, v: &[Vec3<T>]) -> Vec3<T> {
        let mut p = [T::zero(); 3];
        for (m, vi) in self.masses.iter().zip(v) {
            for k in 0..3 {
                p[k] += *m * vi[k];
            }
        }
        p
    }

    pub fn center_of_mass(&self, x: &[Vec3<T>]) -> Vec3<T> {
        let total = self.masses.iter().fold(T::zero(), |a, b| a + *b);
        let mut c = [T::zero(); 3];
        for (m, xi) in self.masses.iter().zip(x) {
            for k in 0..3 {
                c[k] += *m * xi[k] / total;
            }
        }
        c
    }

    pub fn energy(&self, x: &[Vec3<T>], v: &[Vec3<T>]) -> T {
        let mut e = T::zero();
        for i in 0..self.len() {
            e += T::lit(0.5) * self.masses[i] * (v[i][0] * v[i][0] + v[i][1] * v[i][1] + v[i][2] * v[i][2]);
            for j in (i + 1)..self.len() {
                e -= self.masses[i] * self.masses[j] / norm(sub(x[i], x[j]));
            }
        }
        e
    }

    pub fn angular_momentum(&self, x: &[Vec3<T>], v: &[Vec3<T>]) -> Vec3<T> {
        let mut l = [T::zero(); 3];
        for i in 0..self.len() {
            let c = crate::linalg::cross(x[i], v[i]);
            for k in 0..3 {
                l[k] += self.masses[i] * c[k];
            }
        }
        l
    }
}

/// Eulerian mass centroid `e^τ Σ w W̃^α ζ / Σ w W̃^α` of one star.
pub fn fluid_centroid<T: Scalar>(
    grid: &ReferenceGrid<T>,
    profile: &DensityProfile<T>,
    fields: &StarFields<T>,
    tau: T,
) -> Vec3<T> {
    let mut num = [T::zero(); 3];
    let mut den = T::zero();
    for (n, x) in grid.nodes.iter().enumerate() {
        let m = grid.weights[n] * profile.w_alpha(x);
        den += m;
        for k in 0..3 {
            num[k] += m * fields.zeta[n][k];
        }
    }
    let e = tau.exp();
    [e * num[0] / den, e * num[1] / den, e * num[2] / den]
}

/// Largest deviation between fluid centroids and matched particles over
/// the common samples. Each deviation is divided by the smallest pairwise
/// particle separation at that time; with one star it is absolute.
pub fn compare_centroids<T: Scalar>(fluid: &[Vec<Vec3<T>>], particles: &Trajectory<T>) -> Result<T> {
    if fluid.len() != particles.positions.len() {
        return Err(Error::Argument(format!(
            "{} fluid samples against {} particle samples",
            fluid.len(),
            particles.positions.len()
        )));
    }
    let mut worst = T::zero();
    for (c, p) in fluid.iter().zip(&particles.positions) {
        let mut sep = T::infinity();
        for i in 0..p.len() {
            for j in (i + 1)..p.len() {
                sep = sep.min(norm(sub(p[i], p[j])));
            }
        }
        let scale = if sep.is_finite() { sep } else { T::one() };
        for (ci, pi) in c.iter().zip(p) {
            worst = worst.max(norm(sub(*ci, *pi)) / scale);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn free_particle_moves_in_a_line() {
        let s = ParticleSystem::new(vec![[1.0, 2.0, 3.0]], vec![[0.5, -0.25, 0.0]], vec![1.0]).unwrap();
        let tr = s.nbody_integrate(2.0, 0.1, DEFAULT_R_MIN).unwrap();
        let last = tr.positions.last().unwrap()[0];
        assert!((last[0] - 2.0).abs() < 1e-14 && (last[1] - 1.5).abs() < 1e-14);
    }

    #[test]
    fn circular_binary_period() {
        let (m, d) = (1.0_f64, 2.0_f64);
        let w = (2.0 * m / (d * d * d)).sqrt();
        let v = w * d / 2.0;
        let s = ParticleSystem::new(
            vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]],
            vec![[0.0, v, 0.0], [0.0, -v, 0.0]],
            vec![m, m],
        )
        .unwrap();
        let period = 2.0 * PI / w;
        let tr = s.integrate_to(&[period], 1e-3, DEFAULT_R_MIN).unwrap();
        let p = tr.positions[0][0];
        assert!((p[0] - 1.0).abs() < 1e-3 && p[1].abs() < 1e-3);
    }

    #[test]
    fn encounter_is_reported() {
        let s = ParticleSystem::new(vec![[0.0; 3], [1e-4, 0.0, 0.0]], vec![[0.0; 3]; 2], vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            s.nbody_integrate(1.0, 0.01, DEFAULT_R_MIN),
            Err(Error::CloseEncounter { .. })
        ));
    }
}
