//! Operator identity suite on random polynomial fields: commutators of the
//! spherical derivatives, the rectangular decomposition, the expansion of
//! `Λ^m ∂̸^n` into rectangular derivatives, the Piola identity and the
//! `Λ`-decomposition of a vector field.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::domain::{decompose_rect, DiffOperator, FieldRep, ReferenceGrid, VectorField};
use crate::domain::poly::{basis_len, mixed_derivative, ANGULAR_PAIRS};
use crate::error::Result;
use crate::gravity::{
    curl_identity_residual, divergence_identity_residual, lambda_decomposition_residual, self_interaction, DivergenceReport,
    GravityKernel,
};
use crate::kinematics::{
    check_differentiation_formulae, piola_residual, star_fields, DifferentiationReport, MuSpec, StarFrame,
};
use crate::profiles::{make_profile, ProfileKind};
use crate::scalar::Scalar;

pub const DEFAULT_SAMPLES: usize = 50;
pub const DEFAULT_SEED: u64 = 0x5eed;

pub fn random_field<T: Scalar, R: Rng>(rng: &mut R, degree: usize, amplitude: f64) -> FieldRep<T> {
    let coeffs = (0..basis_len(degree))
        .map(|_| T::lit(amplitude * rng.gen_range(-1.0..1.0)))
        .collect();
    FieldRep::from_coeffs(degree, coeffs).expect("length matches degree")
}

pub fn random_vector_field<T: Scalar, R: Rng>(rng: &mut R, degree: usize, amplitude: f64) -> VectorField<T> {
    std::array::from_fn(|_| random_field(rng, degree, amplitude))
}

fn max_on<T: Scalar>(grid: &ReferenceGrid<T>, f: &FieldRep<T>) -> T {
    grid.nodes
        .iter()
        .map(|x| crate::domain::eval_at(f, x).abs())
        .fold(T::zero(), T::max)
}

/// Max node residuals of the four commutator relations for one field.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CommutatorReport<T> {
    /// `[∂̸_ij, Λ] = 0`.
    pub angular_radial: T,
    /// `[∂̸₁₂, ∂̸₂₃] = ∂̸₁₃`.
    pub angular_angular: T,
    /// `[∂_m, Λ] = ∂_m`.
    pub rect_radial: T,
    /// `[∂_m, ∂̸_ji] = δ_mj ∂_i − δ_mi ∂_j`.
    pub rect_angular: T,
}

impl<T: Scalar> CommutatorReport<T> {
    pub fn max(&self) -> T {
        self.angular_radial
            .max(self.angular_angular)
            .max(self.rect_radial)
            .max(self.rect_angular)
    }
}

pub fn commutators<T: Scalar>(f: &FieldRep<T>, grid: &ReferenceGrid<T>) -> Result<CommutatorReport<T>> {
    let mut rep = CommutatorReport {
        angular_radial: T::zero(),
        angular_angular: T::zero(),
        rect_radial: T::zero(),
        rect_angular: T::zero(),
    };
    for &(i, j) in &ANGULAR_PAIRS {
        let lhs = &f.radial().angular(i, j)? - &f.angular(i, j)?.radial();
        rep.angular_radial = rep.angular_radial.max(max_on(grid, &lhs));
    }
    let c = &(&f.angular(1, 2)?.angular(0, 1)? - &f.angular(0, 1)?.angular(1, 2)?) - &f.angular(0, 2)?;
    rep.angular_angular = max_on(grid, &c);
    for m in 0..3 {
        let d = &(&f.radial().partial(m)? - &f.partial(m)?.radial()) - &f.partial(m)?;
        rep.rect_radial = rep.rect_radial.max(max_on(grid, &d));
        for j in 0..3 {
            for i in 0..3 {
                if i == j {
                    continue;
                }
                let mut d = &f.angular(j, i)?.partial(m)? - &f.partial(m)?.angular(j, i)?;
                if m == j {
                    d = &d - &f.partial(i)?;
                }
                if m == i {
                    d = &d + &f.partial(j)?;
                }
                rep.rect_angular = rep.rect_angular.max(max_on(grid, &d));
            }
        }
    }
    Ok(rep)
}

/// Worst residual of `Λ^m ∂̸^n F` against its rectangular expansion over all
/// orders with `m + |n| ≤ order`.
pub fn mixed_expansion_residual<T: Scalar>(f: &FieldRep<T>, grid: &ReferenceGrid<T>, order: usize) -> Result<T> {
    let mut worst = T::zero();
    for (m, n) in crate::domain::mixed_orders(order) {
        let direct = mixed_derivative(f, m, n, order)?;
        let expanded = DiffOperator::mixed(m, n)?.apply(f)?;
        worst = worst.max(max_on(grid, &(&direct - &expanded)));
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentitySuiteReport<T> {
    pub samples: usize,
    pub commutators: CommutatorReport<T>,
    pub decomposition: T,
    pub mixed_expansion: T,
    pub piola: T,
    pub lambda_decomposition: T,
}

impl<T: Scalar> IdentitySuiteReport<T> {
    pub fn max(&self) -> T {
        self.commutators
            .max()
            .max(self.decomposition)
            .max(self.mixed_expansion)
            .max(self.piola)
            .max(self.lambda_decomposition)
    }
}

fn random_frame<T: Scalar, R: Rng>(rng: &mut R) -> StarFrame<T> {
    let mut v = || T::lit(rng.gen_range(-3.0..3.0));
    let center = [v(), v(), v()];
    let offset = [v(), v(), v()];
    let mut matrix = [[T::zero(); 3]; 3];
    for row in matrix.iter_mut() {
        for e in row.iter_mut() {
            *e = T::lit(0.05) * v();
        }
    }
    StarFrame {
        center,
        mu: MuSpec::Affine { offset, matrix },
    }
}

/// Runs every identity on `samples` random fields of degree `degree`.
pub fn identity_suite<T: Scalar>(
    grid: &ReferenceGrid<T>,
    degree: usize,
    samples: usize,
    seed: u64,
) -> Result<IdentitySuiteReport<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = IdentitySuiteReport {
        samples,
        commutators: CommutatorReport {
            angular_radial: T::zero(),
            angular_angular: T::zero(),
            rect_radial: T::zero(),
            rect_angular: T::zero(),
        },
        decomposition: T::zero(),
        mixed_expansion: T::zero(),
        piola: T::zero(),
        lambda_decomposition: T::zero(),
    };
    let r_min = T::lit(0.25);
    for _ in 0..samples {
        let f = random_field::<T, _>(&mut rng, degree, 1.0);
        let c = commutators(&f, grid)?;
        rep.commutators.angular_radial = rep.commutators.angular_radial.max(c.angular_radial);
        rep.commutators.angular_angular = rep.commutators.angular_angular.max(c.angular_angular);
        rep.commutators.rect_radial = rep.commutators.rect_radial.max(c.rect_radial);
        rep.commutators.rect_angular = rep.commutators.rect_angular.max(c.rect_angular);
        for i in 0..3 {
            rep.decomposition = rep.decomposition.max(decompose_rect(&f, i, grid, r_min)?);
        }
        rep.mixed_expansion = rep.mixed_expansion.max(mixed_expansion_residual(&f, grid, 3)?);
        let theta = random_vector_field::<T, _>(&mut rng, degree, 0.02);
        let frame = random_frame(&mut rng);
        let tau = T::lit(rng.gen_range(0.0..3.0));
        rep.piola = rep.piola.max(piola_residual(&frame, &theta, tau, grid));
        let v = random_vector_field::<T, _>(&mut rng, degree, 1.0);
        rep.lambda_decomposition = rep.lambda_decomposition.max(lambda_decomposition_residual(&v, grid));
    }
    Ok(rep)
}

/// Differentiation formulae on a random small state; the temporal residual
/// is a central difference with step `dtau`.
pub fn differentiation_check<T: Scalar>(
    grid: &ReferenceGrid<T>,
    degree: usize,
    dtau: T,
    seed: u64,
) -> DifferentiationReport<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = random_vector_field::<T, _>(&mut rng, degree, 0.02);
    let theta_dot = random_vector_field::<T, _>(&mut rng, degree, 0.05);
    let frame = random_frame(&mut rng);
    check_differentiation_formulae(&frame, &theta, &theta_dot, T::lit(0.7), dtau, grid)
}

/// Gravity identities for one parabolic star at rest, `γ = 3/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct StaticGravityReport<T> {
    pub divergence: DivergenceReport<T>,
    /// `max ‖nCurl 𝒢‖` at the nodes.
    pub curl: T,
    /// Node scale of `‖∂𝒢‖`.
    pub curl_scale: T,
}

pub fn static_gravity_check<T: Scalar>(grid: &ReferenceGrid<T>, degree: usize, delta: T, tau: T) -> Result<StaticGravityReport<T>> {
    let kernel = GravityKernel::new(grid, degree)?;
    let p = make_profile(ProfileKind::Parabolic, [T::zero(); 3], T::lit(1.5), delta)?;
    let frame = StarFrame::canonical([T::zero(); 3]);
    let theta = std::array::from_fn(|_| FieldRep::zero(degree));
    let fields = star_fields(&frame, &theta, tau, grid);
    let g = self_interaction(&kernel, grid, &p, &fields, tau);
    let divergence = divergence_identity_residual(&kernel, grid, &p, &fields, &g, tau);
    let (curl, curl_scale) = curl_identity_residual(&kernel, grid, &fields, &g);
    Ok(StaticGravityReport {
        divergence,
        curl,
        curl_scale,
    })
}

/// One row of the verification table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &'static str, value: f64, threshold: f64) -> Self {
        Self {
            name,
            value,
            threshold,
            pass: value.is_finite() && value < threshold,
        }
    }
}

pub const IDENTITY_TOL: f64 = 1e-8;
pub const SPATIAL_TOL: f64 = 1e-10;
pub const TEMPORAL_TOL: f64 = 1e-5;
pub const TEMPORAL_DTAU: f64 = 1e-3;
pub const DIVERGENCE_TOL: f64 = 0.05;
pub const CURL_TOL: f64 = 1e-6;

/// The full verification table: operator identities, differentiation
/// formulae and the static gravity identities.
pub fn verify(grid: &ReferenceGrid<f64>, degree: usize, samples: usize, seed: u64) -> Result<Vec<Check>> {
    let s = identity_suite(grid, degree, samples, seed)?;
    let d = differentiation_check(grid, degree, TEMPORAL_DTAU, seed);
    let g = static_gravity_check(grid, degree, 1.0, 0.0)?;
    Ok(vec![
        Check::new("commutator [angular, radial]", s.commutators.angular_radial, IDENTITY_TOL),
        Check::new("commutator [angular, angular]", s.commutators.angular_angular, IDENTITY_TOL),
        Check::new("commutator [rectangular, radial]", s.commutators.rect_radial, IDENTITY_TOL),
        Check::new("commutator [rectangular, angular]", s.commutators.rect_angular, IDENTITY_TOL),
        Check::new("rectangular decomposition", s.decomposition, IDENTITY_TOL),
        Check::new("mixed derivative expansion", s.mixed_expansion, IDENTITY_TOL),
        Check::new("piola", s.piola, IDENTITY_TOL),
        Check::new("lambda decomposition", s.lambda_decomposition, IDENTITY_TOL),
        Check::new("inverse jacobian, spatial", d.spatial_a, SPATIAL_TOL),
        Check::new("jacobian determinant, spatial", d.spatial_j, SPATIAL_TOL),
        Check::new("inverse jacobian, temporal", d.temporal_a, TEMPORAL_TOL),
        Check::new("jacobian determinant, temporal", d.temporal_j, TEMPORAL_TOL),
        Check::new("divergence identity", g.divergence.residual, DIVERGENCE_TOL),
        Check::new("curl identity", g.curl, CURL_TOL),
    ])
}
