//! Product quadrature on the unit ball and the node/basis tables built on it.
//!
//! Radial: Gauss–Legendre in `r` on `[0, 1]` with the `r²` Jacobian folded
//! into the weights. Angular: `n_θ` Gauss points in `cos θ` times
//! `2 n_θ` equispaced azimuths, with `n_θ = ⌈√(angular_points / 2)⌉`, so the
//! realised angular count is `2 n_θ² ≥ angular_points`. The rule integrates
//! polynomials of total degree `≤ min(2·shells − 3, 2 n_θ − 1)` exactly.

use crate::domain::cutoff::chi_unchecked;
use crate::domain::poly::{basis_len, exponents, FieldRep};
use crate::domain::quadrature::{gauss_legendre, gauss_legendre_on};
use crate::error::{Error, Result};
use crate::linalg::{Dense, LeastSquares, Vec3};
use crate::scalar::{stable_sum, Scalar};

pub const DEFAULT_RADIAL_SHELLS: usize = 16;
pub const DEFAULT_ANGULAR_POINTS: usize = 110;
pub const DEFAULT_DEGREE: usize = 6;

#[derive(Clone, Debug)]
pub struct ReferenceGrid<T> {
    pub nodes: Vec<Vec3<T>>,
    pub weights: Vec<T>,
    pub radii: Vec<T>,
    pub radial_shells: usize,
    /// Realised count per shell (may exceed the requested count).
    pub angular_points: usize,
    pub chi_values: Vec<T>,
    pub chibar_values: Vec<T>,
    pub boundary_distance: Vec<T>,
    degree: usize,
    exact_degree: usize,
    /// `nodes × basis_len(degree)` monomial values.
    basis: Dense<T>,
}

/// Monomial values `x^e` in basis order.
pub fn basis_values<T: Scalar>(x: &Vec3<T>, degree: usize) -> Vec<T> {
    let mut pows = [vec![T::one(); degree + 1], vec![T::one(); degree + 1], vec![T::one(); degree + 1]];
    for (axis, p) in pows.iter_mut().enumerate() {
        for k in 1..=degree {
            p[k] = p[k - 1] * x[axis];
        }
    }
    exponents(degree)
        .into_iter()
        .map(|e| pows[0][e[0]] * pows[1][e[1]] * pows[2][e[2]])
        .collect()
}

/// Evaluates a field at an arbitrary point in floating point.
pub fn eval_at<T: Scalar>(f: &FieldRep<T>, x: &Vec3<T>) -> T {
    let vals = basis_values(x, f.degree());
    let mut acc = T::zero();
    for (c, v) in f.coeffs().iter().zip(&vals) {
        acc += *c * *v;
    }
    acc
}

/// `build_grid` with the default basis degree.
pub fn build_grid<T: Scalar>(radial_shells: usize, angular_points: usize) -> Result<ReferenceGrid<T>> {
    ReferenceGrid::new(radial_shells, angular_points, DEFAULT_DEGREE)
}

impl<T: Scalar> ReferenceGrid<T> {
    pub fn new(radial_shells: usize, angular_points: usize, degree: usize) -> Result<Self> {
        if radial_shells < 2 {
            return Err(Error::Config(format!("radial_shells = {radial_shells} below minimum 2")));
        }
        if angular_points < 6 {
            return Err(Error::Config(format!("angular_points = {angular_points} below minimum 6")));
        }
        let n_theta = ((angular_points as f64 / 2.0).sqrt().ceil() as usize).max(2);
        let n_phi = 2 * n_theta;
        let (r, wr) = gauss_legendre_on::<T>(radial_shells, T::zero(), T::one());
        let (ct, wt) = gauss_legendre::<T>(n_theta);
        let two_pi = T::PI() + T::PI();
        let dphi = two_pi / T::lit(n_phi as f64);

        let total = radial_shells * n_theta * n_phi;
        let mut nodes = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        let mut radii = Vec::with_capacity(total);
        for (ri, wri) in r.iter().zip(&wr) {
            for (c, wc) in ct.iter().zip(&wt) {
                let s = (T::one() - *c * *c).sqrt();
                for k in 0..n_phi {
                    let phi = dphi * (T::lit(k as f64) + T::lit(0.5));
                    nodes.push([*ri * s * phi.cos(), *ri * s * phi.sin(), *ri * *c]);
                    weights.push(*wri * *ri * *ri * *wc * dphi);
                    radii.push(*ri);
                }
            }
        }
        let chi_values: Vec<T> = radii.iter().map(|r| chi_unchecked(*r)).collect();
        let chibar_values = chi_values.iter().map(|c| T::one() - *c).collect();
        let boundary_distance = radii.iter().map(|r| T::one() - *r).collect();
        let nb = basis_len(degree);
        let mut basis = Dense::zeros(total, nb);
        for (i, x) in nodes.iter().enumerate() {
            basis.data[i * nb..(i + 1) * nb].copy_from_slice(&basis_values(x, degree));
        }
        Ok(Self {
            nodes,
            weights,
            radii,
            radial_shells,
            angular_points: n_theta * n_phi,
            chi_values,
            chibar_values,
            boundary_distance,
            degree,
            exact_degree: (2 * radial_shells - 3).min(2 * n_theta - 1),
            basis,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Basis degree of the cached node tables.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Total polynomial degree integrated exactly.
    pub fn exact_degree(&self) -> usize {
        self.exact_degree
    }

    pub fn basis(&self) -> &Dense<T> {
        &self.basis
    }

    /// `Σ w_i v_i` with compensated summation in node order.
    pub fn integrate(&self, values: &[T]) -> T {
        assert_eq!(values.len(), self.len());
        stable_sum(self.weights.iter().zip(values).map(|(w, v)| *w * *v))
    }

    pub fn integrate_fn(&self, f: impl Fn(&Vec3<T>) -> T) -> T {
        stable_sum(self.weights.iter().zip(&self.nodes).map(|(w, x)| *w * f(x)))
    }

    /// Node values of `f`.
    pub fn eval(&self, f: &FieldRep<T>) -> Vec<T> {
        assert!(
            f.degree() <= self.degree,
            "field degree {} exceeds grid basis degree {}",
            f.degree(),
            self.degree
        );
        let c = f.coeffs();
        let nb = c.len();
        (0..self.len())
            .map(|i| {
                let row = &self.basis.row(i)[..nb];
                let mut acc = T::zero();
                for (a, b) in row.iter().zip(c) {
                    acc += *a * *b;
                }
                acc
            })
            .collect()
    }

    /// Least-squares projector onto degree `≤ degree` fields with per-node
    /// weights `quadrature weight × extra`.
    pub fn projector(&self, degree: usize, extra_weight: Option<&[T]>) -> Result<Projector<T>> {
        if degree > self.degree {
            return Err(Error::Config(format!(
                "projection degree {degree} above grid basis degree {}",
                self.degree
            )));
        }
        let nb = basis_len(degree);
        let mut design = Dense::zeros(self.len(), nb);
        for i in 0..self.len() {
            design.data[i * nb..(i + 1) * nb].copy_from_slice(&self.basis.row(i)[..nb]);
        }
        let w: Vec<T> = match extra_weight {
            Some(e) => self.weights.iter().zip(e).map(|(a, b)| *a * *b).collect(),
            None => self.weights.clone(),
        };
        Ok(Projector {
            degree,
            ls: LeastSquares::new(&design, &w)?,
        })
    }
}

/// Maps node values to the best-fitting field of fixed degree.
#[derive(Clone, Debug)]
pub struct Projector<T> {
    degree: usize,
    ls: LeastSquares<T>,
}

impl<T: Scalar> Projector<T> {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn project(&self, values: &[T]) -> FieldRep<T> {
        FieldRep::from_coeffs(self.degree, self.ls.solve(values)).expect("projector sized to its degree")
    }

    pub fn project_vector(&self, values: &[Vec3<T>]) -> [FieldRep<T>; 3] {
        let comp = |k: usize| values.iter().map(|v| v[k]).collect::<Vec<T>>();
        [self.project(&comp(0)), self.project(&comp(1)), self.project(&comp(2))]
    }
}
