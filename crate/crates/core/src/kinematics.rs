//! Rescaled flow maps `ζ_κ = x + e^{−τ}x̄_κ + (1 − e^{−τ})μ_κ(x) + θ_κ` and
//! the derived matrices `𝓜 = ∇ζ`, `𝓐 = 𝓜⁻¹`, `𝓙 = det 𝓜`.
//!
//! Matrices are stored row = component: `m[j][k] = ∂_k ζ^j` and
//! `a[k][i] = 𝓐^k_i`, so `Σ_k m[j][k] a[k][i] = δ_ji`.

use rayon::prelude::*;

use crate::domain::grid::basis_values;
use crate::domain::{FieldRep, ReferenceGrid, VectorField};
use crate::error::{Error, Result};
use crate::linalg::{det3, inv3, Mat3, Vec3};
use crate::scalar::Scalar;

pub const DEFAULT_J_MIN: f64 = 1e-6;

/// Repulsive velocity `μ_κ`: constant or affine `b + A x`.
#[derive(Clone, Debug, PartialEq)]
pub enum MuSpec<T> {
    Constant(Vec3<T>),
    Affine { offset: Vec3<T>, matrix: Mat3<T> },
}

impl<T: Scalar> MuSpec<T> {
    pub fn eval(&self, x: &Vec3<T>) -> Vec3<T> {
        match self {
            Self::Constant(v) => *v,
            Self::Affine { offset, matrix } => {
                let mut out = *offset;
                for (j, o) in out.iter_mut().enumerate() {
                    *o += matrix[j][0] * x[0] + matrix[j][1] * x[1] + matrix[j][2] * x[2];
                }
                out
            }
        }
    }

    /// `∂_k μ^j` as `[j][k]`.
    pub fn grad(&self) -> Mat3<T> {
        match self {
            Self::Constant(_) => [[T::zero(); 3]; 3],
            Self::Affine { matrix, .. } => *matrix,
        }
    }

    /// Mean over the unit ball with uniform weight (the affine part integrates out).
    pub fn mean(&self) -> Vec3<T> {
        match self {
            Self::Constant(v) => *v,
            Self::Affine { offset, .. } => *offset,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Self::Constant(_))
    }
}

/// Fixed per-star data entering `ζ_κ`.
#[derive(Clone, Debug, PartialEq)]
pub struct StarFrame<T> {
    pub center: Vec3<T>,
    pub mu: MuSpec<T>,
}

impl<T: Scalar> StarFrame<T> {
    /// Default `μ ≡ x̄`.
    pub fn canonical(center: Vec3<T>) -> Self {
        Self {
            center,
            mu: MuSpec::Constant(center),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowState<T> {
    pub tau: T,
    pub theta: Vec<VectorField<T>>,
    pub theta_dot: Vec<VectorField<T>>,
}

impl<T: Scalar> FlowState<T> {
    /// `θ = 0` with the given velocities.
    pub fn initial(theta_dot: Vec<VectorField<T>>) -> Self {
        let theta = theta_dot
            .iter()
            .map(|v| {
                let d = v[0].degree();
                [FieldRep::zero(d), FieldRep::zero(d), FieldRep::zero(d)]
            })
            .collect();
        Self {
            tau: T::zero(),
            theta,
            theta_dot,
        }
    }

    pub fn at_rest(stars: usize, degree: usize) -> Self {
        Self::initial(
            (0..stars)
                .map(|_| [FieldRep::zero(degree), FieldRep::zero(degree), FieldRep::zero(degree)])
                .collect(),
        )
    }

    pub fn stars(&self) -> usize {
        self.theta.len()
    }
}

/// `t = e^τ − 1`.
pub fn t_from_tau<T: Scalar>(tau: T) -> T {
    tau.exp_m1()
}

/// `τ = log(1 + t)`.
pub fn tau_from_t<T: Scalar>(t: T) -> T {
    t.ln_1p()
}

/// `ζ` at an arbitrary reference point.
pub fn zeta<T: Scalar>(frame: &StarFrame<T>, theta: &VectorField<T>, tau: T, x: &Vec3<T>) -> Vec3<T> {
    let e = (-tau).exp();
    let mu = frame.mu.eval(x);
    let vals = basis_values(x, theta[0].degree());
    let mut out = [T::zero(); 3];
    for j in 0..3 {
        let mut th = T::zero();
        for (c, v) in theta[j].coeffs().iter().zip(&vals) {
            th += *c * *v;
        }
        out[j] = x[j] + e * frame.center[j] + (T::one() - e) * mu[j] + th;
    }
    out
}

/// `ζ` and its first two derivatives at every node of a grid.
#[derive(Clone, Debug)]
pub struct StarFields<T> {
    pub zeta: Vec<Vec3<T>>,
    pub m: Vec<Mat3<T>>,
    pub a: Vec<Mat3<T>>,
    pub j: Vec<T>,
    /// `hess[n][j][k][s] = ∂_k ∂_s ζ^j`.
    pub hess: Vec<[Mat3<T>; 3]>,
}

#[derive(Clone, Debug)]
pub struct KinematicFields<T> {
    pub tau: T,
    pub stars: Vec<StarFields<T>>,
}

fn eval_on<T: Scalar>(grid: &ReferenceGrid<T>, f: &FieldRep<T>) -> Vec<T> {
    if f.degree() <= grid.degree() {
        grid.eval(f)
    } else {
        grid.nodes.iter().map(|x| crate::domain::eval_at(f, x)).collect()
    }
}

pub fn star_fields<T: Scalar>(
    frame: &StarFrame<T>,
    theta: &VectorField<T>,
    tau: T,
    grid: &ReferenceGrid<T>,
) -> StarFields<T> {
    let e = (-tau).exp();
    let dmu = frame.mu.grad();
    let th: Vec<Vec<T>> = theta.iter().map(|f| eval_on(grid, f)).collect();
    let mut d1: Vec<Vec<Vec<T>>> = Vec::with_capacity(3);
    let mut d2: Vec<Vec<Vec<Vec<T>>>> = Vec::with_capacity(3);
    for f in theta.iter() {
        let mut row = Vec::with_capacity(3);
        let mut rows2 = Vec::with_capacity(3);
        for k in 0..3 {
            let dk = f.partial(k).expect("axis in range");
            row.push(eval_on(grid, &dk));
            let mut inner = Vec::with_capacity(3);
            for s in 0..3 {
                if s < k {
                    inner.push(Vec::new());
                } else {
                    inner.push(eval_on(grid, &dk.partial(s).expect("axis in range")));
                }
            }
            rows2.push(inner);
        }
        d1.push(row);
        d2.push(rows2);
    }
    let n = grid.len();
    let mut out = StarFields {
        zeta: Vec::with_capacity(n),
        m: Vec::with_capacity(n),
        a: Vec::with_capacity(n),
        j: Vec::with_capacity(n),
        hess: Vec::with_capacity(n),
    };
    for (node, x) in grid.nodes.iter().enumerate() {
        let mu = frame.mu.eval(x);
        let mut z = [T::zero(); 3];
        let mut m = [[T::zero(); 3]; 3];
        let mut h = [[[T::zero(); 3]; 3]; 3];
        for j in 0..3 {
            z[j] = x[j] + e * frame.center[j] + (T::one() - e) * mu[j] + th[j][node];
            for k in 0..3 {
                m[j][k] = (T::one() - e) * dmu[j][k] + d1[j][k][node];
                for s in k..3 {
                    let v = d2[j][k][s][node];
                    h[j][k][s] = v;
                    h[j][s][k] = v;
                }
            }
            m[j][j] += T::one();
        }
        let det = det3(&m);
        out.a.push(inv3(&m).unwrap_or([[T::nan(); 3]; 3]));
        out.zeta.push(z);
        out.m.push(m);
        out.j.push(det);
        out.hess.push(h);
    }
    out
}

/// All stars; fails if `𝓙 ≤ j_min` anywhere.
pub fn compute_fields<T: Scalar>(
    state: &FlowState<T>,
    frames: &[StarFrame<T>],
    grid: &ReferenceGrid<T>,
    j_min: T,
) -> Result<KinematicFields<T>> {
    if frames.len() != state.stars() {
        return Err(Error::Argument(format!(
            "{} star frames for {} stars",
            frames.len(),
            state.stars()
        )));
    }
    let stars: Vec<StarFields<T>> = frames
        .par_iter()
        .zip(state.theta.par_iter())
        .map(|(f, th)| star_fields(f, th, state.tau, grid))
        .collect();
    for (k, s) in stars.iter().enumerate() {
        if let Some((node, &jac)) = s
            .j
            .iter()
            .enumerate()
            .find(|(_, j)| !(**j > j_min) || !j.is_finite())
        {
            return Err(Error::DegenerateMap {
                star: k,
                node,
                jacobian: jac.to_f64_lossy(),
                j_min: j_min.to_f64_lossy(),
            });
        }
    }
    Ok(KinematicFields { tau: state.tau, stars })
}

impl<T: Scalar> StarFields<T> {
    /// `max |𝓐𝓜 − I|`.
    pub fn inverse_residual(&self) -> T {
        let mut worst = T::zero();
        for (a, m) in self.a.iter().zip(&self.m) {
            let prod = crate::linalg::matmul3(a, m);
            worst = worst.max(crate::linalg::max_abs_diff3(&prod, &crate::linalg::identity3()));
        }
        worst
    }

    /// `‖𝓐 − I‖_∞` (max entry).
    pub fn a_deviation(&self) -> T {
        let id = crate::linalg::identity3();
        self.a
            .iter()
            .map(|a| crate::linalg::max_abs_diff3(a, &id))
            .fold(T::zero(), T::max)
    }

    /// `‖𝓙 − 1‖_∞`.
    pub fn j_deviation(&self) -> T {
        self.j.iter().map(|j| (*j - T::one()).abs()).fold(T::zero(), T::max)
    }

    pub fn j_min(&self) -> T {
        self.j.iter().copied().fold(T::infinity(), T::min)
    }

    /// `a_k = 𝓐^s_j ∂_k ∂_s ζ^j = ∂_k log 𝓙` at a node.
    pub fn log_j_gradient(&self, node: usize) -> Vec3<T> {
        let a = &self.a[node];
        let h = &self.hess[node];
        let mut out = [T::zero(); 3];
        for (k, o) in out.iter_mut().enumerate() {
            let mut acc = T::zero();
            for s in 0..3 {
                for j in 0..3 {
                    acc += a[s][j] * h[j][k][s];
                }
            }
            *o = acc;
        }
        out
    }

    /// `∂_s 𝓐^k_i = −𝓐^k_j ∂_s∂_l ζ^j 𝓐^l_i`, returned as `[s][k][i]`.
    pub fn grad_a(&self, node: usize) -> [Mat3<T>; 3] {
        let a = &self.a[node];
        let h = &self.hess[node];
        let mut out = [[[T::zero(); 3]; 3]; 3];
        for (s, slab) in out.iter_mut().enumerate() {
            for k in 0..3 {
                for i in 0..3 {
                    let mut acc = T::zero();
                    for j in 0..3 {
                        for l in 0..3 {
                            acc += a[k][j] * h[j][s][l] * a[l][i];
                        }
                    }
                    slab[k][i] = -acc;
                }
            }
        }
        out
    }
}

/// The Jacobian matrix `∇ζ` as polynomial fields (entries `[j][k]`).
pub fn jacobian_fields<T: Scalar>(frame: &StarFrame<T>, theta: &VectorField<T>, tau: T) -> [[FieldRep<T>; 3]; 3] {
    let e = (-tau).exp();
    let dmu = frame.mu.grad();
    let d = theta[0].degree();
    std::array::from_fn(|j| {
        std::array::from_fn(|k| {
            let mut c = (T::one() - e) * dmu[j][k];
            if j == k {
                c += T::one();
            }
            &theta[j].partial(k).expect("axis in range") + &FieldRep::constant(d, c)
        })
    })
}

/// Cofactor matrix `𝓙𝓐` as polynomial fields, entries `[k][i] = 𝓙 𝓐^k_i`.
pub fn cofactor_fields<T: Scalar>(m: &[[FieldRep<T>; 3]; 3]) -> [[FieldRep<T>; 3]; 3] {
    // (adj M)[k][i] = cofactor of M[i][k]
    std::array::from_fn(|k| {
        std::array::from_fn(|i| {
            let r: Vec<usize> = (0..3).filter(|&r| r != i).collect();
            let c: Vec<usize> = (0..3).filter(|&c| c != k).collect();
            let minor = &m[r[0]][c[0]].mul_field(&m[r[1]][c[1]]) - &m[r[0]][c[1]].mul_field(&m[r[1]][c[0]]);
            if (i + k) % 2 == 0 {
                minor
            } else {
                -&minor
            }
        })
    })
}

/// `det ∇ζ` as a polynomial field.
pub fn jacobian_determinant_field<T: Scalar>(m: &[[FieldRep<T>; 3]; 3]) -> FieldRep<T> {
    let cof = cofactor_fields(m);
    // det = Σ_k M[0][k] (adj M)[k][0]
    let mut acc = m[0][0].mul_field(&cof[0][0]);
    for k in 1..3 {
        acc = &acc + &m[0][k].mul_field(&cof[k][0]);
    }
    acc
}

/// `max_{nodes, i} |∂_j(𝓙𝓐^j_i)|` from the polynomial cofactor matrix.
pub fn piola_residual<T: Scalar>(frame: &StarFrame<T>, theta: &VectorField<T>, tau: T, grid: &ReferenceGrid<T>) -> T {
    let m = jacobian_fields(frame, theta, tau);
    let cof = cofactor_fields(&m);
    let mut worst = T::zero();
    for i in 0..3 {
        let mut div = cof[0][i].partial(0).expect("axis");
        for (j, row) in cof.iter().enumerate().skip(1) {
            div = &div + &row[i].partial(j).expect("axis");
        }
        for v in eval_on(grid, &div) {
            worst = worst.max(v.abs());
        }
    }
    worst
}

#[derive(Clone, Debug, PartialEq)]
pub struct DifferentiationReport<T> {
    /// `∂_s𝓐 + 𝓐 ∂_s∂ζ 𝓐`, with `∂_s𝓐` from the polynomial cofactor route.
    pub spatial_a: T,
    /// `∂_s𝓙 − 𝓙 𝓐^k_j ∂_s∂_kζ^j`.
    pub spatial_j: T,
    /// Central-difference `∂_τ𝓐` against `−𝓐 ∂_τ∇ζ 𝓐`.
    pub temporal_a: T,
    /// Central-difference `∂_τ𝓙` against `𝓙 𝓐^k_j ∂_τ∂_kζ^j`.
    pub temporal_j: T,
}

/// Checks the differentiation formulae for `𝓐` and `𝓙` on one star, moving
/// along `θ(τ + s) = θ + s θ̇`.
pub fn check_differentiation_formulae<T: Scalar>(
    frame: &StarFrame<T>,
    theta: &VectorField<T>,
    theta_dot: &VectorField<T>,
    tau: T,
    dtau: T,
    grid: &ReferenceGrid<T>,
) -> DifferentiationReport<T> {
    let fields = star_fields(frame, theta, tau, grid);
    let mpoly = jacobian_fields(frame, theta, tau);
    let cof = cofactor_fields(&mpoly);
    let jpoly = jacobian_determinant_field(&mpoly);
    let cof_vals: Vec<Vec<Vec<T>>> = cof.iter().map(|r| r.iter().map(|f| eval_on(grid, f)).collect()).collect();
    let j_vals = eval_on(grid, &jpoly);

    let mut spatial_a = T::zero();
    let mut spatial_j = T::zero();
    for s in 0..3 {
        let dj = eval_on(grid, &jpoly.partial(s).expect("axis"));
        let dcof: Vec<Vec<Vec<T>>> = cof
            .iter()
            .map(|r| r.iter().map(|f| eval_on(grid, &f.partial(s).expect("axis"))).collect())
            .collect();
        for node in 0..grid.len() {
            let a = &fields.a[node];
            let h = &fields.hess[node];
            let jn = j_vals[node];
            // ∂_s 𝓙 formula
            let mut f = T::zero();
            for k in 0..3 {
                for jj in 0..3 {
                    f += a[k][jj] * h[jj][s][k];
                }
            }
            spatial_j = spatial_j.max((dj[node] - jn * f).abs());
            let ga = fields.grad_a(node);
            for k in 0..3 {
                for i in 0..3 {
                    let direct = dcof[k][i][node] / jn - cof_vals[k][i][node] * dj[node] / (jn * jn);
                    spatial_a = spatial_a.max((direct - ga[s][k][i]).abs());
                }
            }
        }
    }

    let shifted = |ds: T| -> VectorField<T> {
        std::array::from_fn(|j| &theta[j] + &theta_dot[j].scale(ds))
    };
    let plus = star_fields(frame, &shifted(dtau), tau + dtau, grid);
    let minus = star_fields(frame, &shifted(-dtau), tau - dtau, grid);
    let e = (-tau).exp();
    let dmu = frame.mu.grad();
    let dth: Vec<Vec<Vec<T>>> = theta_dot
        .iter()
        .map(|f| (0..3).map(|k| eval_on(grid, &f.partial(k).expect("axis"))).collect())
        .collect();
    let two_dt = dtau + dtau;
    let mut temporal_a = T::zero();
    let mut temporal_j = T::zero();
    for node in 0..grid.len() {
        let a = &fields.a[node];
        let mut dm = [[T::zero(); 3]; 3];
        for j in 0..3 {
            for k in 0..3 {
                dm[j][k] = e * dmu[j][k] + dth[j][k][node];
            }
        }
        let mut tr = T::zero();
        for k in 0..3 {
            for j in 0..3 {
                tr += a[k][j] * dm[j][k];
            }
        }
        let fd_j = (plus.j[node] - minus.j[node]) / two_dt;
        temporal_j = temporal_j.max((fd_j - fields.j[node] * tr).abs());
        for k in 0..3 {
            for i in 0..3 {
                let mut acc = T::zero();
                for j in 0..3 {
                    for l in 0..3 {
                        acc += a[k][j] * dm[j][l] * a[l][i];
                    }
                }
                let fd = (plus.a[node][k][i] - minus.a[node][k][i]) / two_dt;
                temporal_a = temporal_a.max((fd + acc).abs());
            }
        }
    }
    DifferentiationReport {
        spatial_a,
        spatial_j,
        temporal_a,
        temporal_j,
    }
}

/// Eulerian position and density carried by reference node `node`.
pub fn eulerian_density<T: Scalar>(
    profile: &crate::profiles::DensityProfile<T>,
    fields: &StarFields<T>,
    tau: T,
    grid: &ReferenceGrid<T>,
    node: usize,
) -> Result<(Vec3<T>, T)> {
    let j = fields.j[node];
    if !(j > T::zero()) {
        return Err(Error::DegenerateMap {
            star: 0,
            node,
            jacobian: j.to_f64_lossy(),
            j_min: 0.0,
        });
    }
    let et = tau.exp();
    let z = fields.zeta[node];
    let eta = [et * z[0], et * z[1], et * z[2]];
    let w = profile.w_alpha(&grid.nodes[node]);
    let rho = crate::profiles::pow_alpha(profile.delta, profile.alpha) * w * (-T::lit(3.0) * tau).exp() / j;
    Ok((eta, rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::build_grid;

    fn zero_field(d: usize) -> VectorField<f64> {
        [FieldRep::zero(d), FieldRep::zero(d), FieldRep::zero(d)]
    }

    fn linear(eps: f64) -> VectorField<f64> {
        std::array::from_fn(|i| FieldRep::coordinate(6, i).scale(eps))
    }

    #[test]
    fn zeta_examples() {
        let frame = StarFrame::canonical([2.0, 0.0, 0.0]);
        let th = zero_field(6);
        let x = [0.1, 0.2, -0.3];
        assert_eq!(zeta(&frame, &th, 0.0, &x), [2.1, 0.2, -0.3]);
        let z = zeta(&frame, &th, 1.7, &x);
        assert!((z[0] - 2.1).abs() < 1e-15);
        let far = StarFrame {
            center: [2.0, 0.0, 0.0],
            mu: MuSpec::Constant([0.0, 5.0, 0.0]),
        };
        let z = zeta(&far, &th, 60.0, &x);
        assert!((z[0] - 0.1).abs() < 1e-12 && (z[1] - 5.2).abs() < 1e-12);
    }

    #[test]
    fn identity_and_dilation() {
        let g = build_grid::<f64>(4, 20).unwrap();
        let frame = StarFrame::canonical([0.0; 3]);
        let st = FlowState::at_rest(1, 6);
        let kf = compute_fields(&st, &[frame.clone()], &g, 1e-6).unwrap();
        assert_eq!(kf.stars[0].j_deviation(), 0.0);
        assert_eq!(kf.stars[0].a_deviation(), 0.0);
        let st = FlowState {
            tau: 0.0,
            theta: vec![linear(0.1)],
            theta_dot: vec![zero_field(6)],
        };
        let kf = compute_fields(&st, &[frame], &g, 1e-6).unwrap();
        for j in &kf.stars[0].j {
            assert!((j - 1.1_f64.powi(3)).abs() < 1e-13);
        }
        assert!(kf.stars[0].inverse_residual() < 1e-14);
    }

    #[test]
    fn folded_map_is_rejected() {
        let g = build_grid::<f64>(4, 20).unwrap();
        let st = FlowState {
            tau: 0.0,
            theta: vec![linear(-2.0)],
            theta_dot: vec![zero_field(6)],
        };
        let err = compute_fields(&st, &[StarFrame::canonical([0.0; 3])], &g, 1e-6).unwrap_err();
        assert!(matches!(err, Error::DegenerateMap { .. }));
    }

    #[test]
    fn piola_for_identity_and_affine_maps() {
        let g = build_grid::<f64>(6, 50).unwrap();
        let frame = StarFrame {
            center: [0.0; 3],
            mu: MuSpec::Affine {
                offset: [1.0, 0.0, 0.0],
                matrix: [[0.1, 0.2, 0.0], [0.0, -0.1, 0.3], [0.05, 0.0, 0.0]],
            },
        };
        assert_eq!(piola_residual(&StarFrame::canonical([0.0; 3]), &zero_field(6), 0.0, &g), 0.0);
        assert!(piola_residual(&frame, &linear(0.2), 0.7, &g) < 1e-14);
    }

    #[test]
    fn tau_round_trip() {
        for tau in [0.0_f64, 0.3, 1.0, 3.0] {
            assert!((tau_from_t(t_from_tau(tau)) - tau).abs() < 1e-15);
        }
    }

    #[test]
    fn static_state_has_zero_temporal_residual() {
        let g = build_grid::<f64>(4, 20).unwrap();
        let rep = check_differentiation_formulae(
            &StarFrame::canonical([1.0, 0.0, 0.0]),
            &zero_field(6),
            &zero_field(6),
            0.0,
            1e-3,
            &g,
        );
        assert_eq!(rep.temporal_a, 0.0);
        assert_eq!(rep.temporal_j, 0.0);
    }
}
