//! Admissible enthalpy profiles `W̃_κ` on the reference ball and the
//! physical-vacuum check.
//!
//! Every profile is radial, written as `W̃(x) = g(|x|²)` in reference
//! coordinates `x = y − x̄_κ`, which gives closed forms for the gradient
//! `2 g' x` and Hessian `4 g'' x xᵀ + 2 g' I`.

use crate::domain::ReferenceGrid;
use crate::error::{Error, Result};
use crate::linalg::{Mat3, Vec3};
use crate::scalar::Scalar;

pub const DEFAULT_CONE_EPSILON: f64 = 0.25;
pub const VACUUM_SAMPLES: usize = 200;

#[derive(Clone, Debug, PartialEq)]
pub enum ProfileKind<T> {
    /// `1 − r²`.
    Parabolic,
    /// `√(1 + ε²) − √(r² + ε²)`: a cone `1 − r` with the tip rounded off.
    ConeMollified { epsilon: T },
    /// `Σ_k c_k r^{2k}`.
    CustomPolynomial { coeffs: Vec<T> },
}

impl<T: Scalar> ProfileKind<T> {
    /// Parses a kind name; `params` are ignored by `parabolic`, give `[ε]`
    /// for `cone-mollified` (optional) and the `r²` coefficients for
    /// `custom-polynomial`.
    pub fn from_name(name: &str, params: &[T]) -> Result<Self> {
        match name {
            "parabolic" => Ok(Self::Parabolic),
            "cone-mollified" => Ok(Self::ConeMollified {
                epsilon: params.first().copied().unwrap_or_else(|| T::lit(DEFAULT_CONE_EPSILON)),
            }),
            "custom-polynomial" => {
                if params.is_empty() {
                    return Err(Error::Config("custom-polynomial needs coefficients".into()));
                }
                Ok(Self::CustomPolynomial { coeffs: params.to_vec() })
            }
            other => Err(Error::Config(format!("unknown profile kind '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Parabolic => "parabolic",
            Self::ConeMollified { .. } => "cone-mollified",
            Self::CustomPolynomial { .. } => "custom-polynomial",
        }
    }

    /// `(g, g', g'')` at `s = r²`.
    pub fn radial_derivatives(&self, s: T) -> (T, T, T) {
        match self {
            Self::Parabolic => (T::one() - s, -T::one(), T::zero()),
            Self::ConeMollified { epsilon } => {
                let e2 = *epsilon * *epsilon;
                let root = (s + e2).sqrt();
                let half = T::lit(0.5);
                (
                    (T::one() + e2).sqrt() - root,
                    -half / root,
                    T::lit(0.25) / (root * root * root),
                )
            }
            Self::CustomPolynomial { coeffs } => {
                let (mut g, mut d1, mut d2) = (T::zero(), T::zero(), T::zero());
                for c in coeffs.iter().rev() {
                    d2 = d2 * s + d1 + d1;
                    d1 = d1 * s + g;
                    g = g * s + *c;
                }
                (g, d1, d2)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityProfile<T> {
    pub kind: ProfileKind<T>,
    pub center: Vec3<T>,
    pub gamma: T,
    pub alpha: T,
    pub delta: T,
}

/// `α = 1/(γ − 1)`.
pub fn alpha_from_gamma<T: Scalar>(gamma: T) -> T {
    (gamma - T::one()).recip()
}

/// `β = 3/α`.
pub fn beta_from_alpha<T: Scalar>(alpha: T) -> T {
    T::lit(3.0) / alpha
}

/// `v^α`, exact repeated multiplication when `α` is a small integer.
pub fn pow_alpha<T: Scalar>(v: T, alpha: T) -> T {
    let r = alpha.round();
    if r == alpha && alpha >= T::zero() && alpha <= T::lit(64.0) {
        v.powi(alpha.to_f64_lossy() as i32)
    } else if v <= T::zero() {
        T::zero()
    } else {
        v.powf(alpha)
    }
}

/// Builds a profile and checks the admissibility invariants (interior
/// positivity, vanishing on the boundary, distance equivalence).
pub fn make_profile<T: Scalar>(kind: ProfileKind<T>, center: Vec3<T>, gamma: T, delta: T) -> Result<DensityProfile<T>> {
    if !(gamma > T::one()) {
        return Err(Error::Config(format!("gamma = {gamma} must exceed 1")));
    }
    if let ProfileKind::ConeMollified { epsilon } = &kind {
        if !(*epsilon > T::zero()) {
            return Err(Error::Config("cone-mollified epsilon must be positive".into()));
        }
    }
    let p = DensityProfile::unchecked(kind, center, gamma, delta);
    let (g1, _, _) = p.kind.radial_derivatives(T::one());
    if g1.abs() > T::lit(1e-12) {
        return Err(Error::Config(format!("profile does not vanish on the boundary (W = {g1})")));
    }
    let n = 400;
    for k in 0..n {
        let r = T::lit(k as f64 / n as f64);
        let (g, _, _) = p.kind.radial_derivatives(r * r);
        if !(g > T::zero()) {
            return Err(Error::Config(format!("profile not positive at r = {r}")));
        }
    }
    let (_, d1, _) = p.kind.radial_derivatives(T::one());
    if !(d1 < T::zero()) {
        return Err(Error::Config("profile has no linear vanishing at the boundary".into()));
    }
    Ok(p)
}

impl<T: Scalar> DensityProfile<T> {
    pub fn unchecked(kind: ProfileKind<T>, center: Vec3<T>, gamma: T, delta: T) -> Self {
        Self {
            kind,
            center,
            gamma,
            alpha: alpha_from_gamma(gamma),
            delta,
        }
    }

    pub fn beta(&self) -> T {
        beta_from_alpha(self.alpha)
    }

    /// `W̃` at reference point `x`.
    pub fn w(&self, x: &Vec3<T>) -> T {
        let s = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        self.kind.radial_derivatives(s).0
    }

    /// `W̃^α`.
    pub fn w_alpha(&self, x: &Vec3<T>) -> T {
        pow_alpha(self.w(x).max(T::zero()), self.alpha)
    }

    pub fn grad_w(&self, x: &Vec3<T>) -> Vec3<T> {
        let s = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        let (_, d1, _) = self.kind.radial_derivatives(s);
        let two = d1 + d1;
        [two * x[0], two * x[1], two * x[2]]
    }

    pub fn hess_w(&self, x: &Vec3<T>) -> Mat3<T> {
        let s = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        let (_, d1, d2) = self.kind.radial_derivatives(s);
        let four = T::lit(4.0) * d2;
        let mut h = [[T::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                h[i][j] = four * x[i] * x[j];
            }
            h[i][i] += d1 + d1;
        }
        h
    }

    /// `W` in Eulerian coordinates `y` of the initial configuration.
    pub fn w_eulerian(&self, y: &Vec3<T>) -> T {
        let x = [y[0] - self.center[0], y[1] - self.center[1], y[2] - self.center[2]];
        let s = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        if s > T::one() {
            T::zero()
        } else {
            self.w(&x)
        }
    }

    /// `∫_Ω δ^α W̃^α`.
    pub fn total_mass(&self, grid: &ReferenceGrid<T>) -> T {
        if self.delta == T::zero() {
            return T::zero();
        }
        pow_alpha(self.delta, self.alpha) * grid.integrate_fn(|x| self.w_alpha(x))
    }

    /// Largest `C` with `C⁻¹ d ≤ W̃ ≤ C d` over the grid nodes, `d = 1 − |x|`.
    pub fn equivalence_constant(&self, grid: &ReferenceGrid<T>) -> T {
        let mut c = T::one();
        for (x, d) in grid.nodes.iter().zip(&grid.boundary_distance) {
            let ratio = self.w(x) / *d;
            c = c.max(ratio).max(ratio.recip());
        }
        c
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VacuumReport<T> {
    /// `∂(c̊²)/∂n̊ = γ δ ∂W/∂n̊`, extreme values over the samples.
    pub min_slope: T,
    pub max_slope: T,
    pub boundary_value_max: T,
    pub pass: bool,
    pub reason: Option<String>,
}

/// Quasi-uniform points on the unit sphere (Fibonacci lattice).
pub fn sphere_samples<T: Scalar>(n: usize) -> Vec<Vec3<T>> {
    let golden = T::PI() * (T::lit(3.0) - T::lit(5.0).sqrt());
    (0..n)
        .map(|k| {
            let z = T::one() - (T::lit(k as f64) + T::lit(0.5)) * T::lit(2.0) / T::lit(n as f64);
            let rho = (T::one() - z * z).max(T::zero()).sqrt();
            let phi = golden * T::lit(k as f64);
            [rho * phi.cos(), rho * phi.sin(), z]
        })
        .collect()
}

pub fn check_physical_vacuum<T: Scalar>(p: &DensityProfile<T>, gamma: T) -> VacuumReport<T> {
    let samples = sphere_samples::<T>(VACUUM_SAMPLES);
    let mut min_slope = T::infinity();
    let mut max_slope = T::neg_infinity();
    let mut boundary_value_max = T::zero();
    for n in &samples {
        boundary_value_max = boundary_value_max.max(p.w(n).abs());
        let g = p.grad_w(n);
        let slope = gamma * p.delta * (g[0] * n[0] + g[1] * n[1] + g[2] * n[2]);
        min_slope = min_slope.min(slope);
        max_slope = max_slope.max(slope);
    }
    let reason = if boundary_value_max > T::lit(1e-12) {
        Some(format!("W does not vanish on the boundary (max |W| = {boundary_value_max})"))
    } else if !(max_slope < T::zero()) || !min_slope.is_finite() {
        Some(format!("boundary slope not strictly negative (max {max_slope})"))
    } else {
        None
    };
    VacuumReport {
        min_slope,
        max_slope,
        boundary_value_max,
        pass: reason.is_none(),
        reason,
    }
}
