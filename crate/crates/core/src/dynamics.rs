//! Evolution of `(θ_κ, ∂_τθ_κ)` under
//! `∂_ττθ + ∂_τθ = −δ e^{−βτ} W̃^{−α} ∂_k(W̃^{1+α} 𝓐^k_i 𝓙^{−1/α}) − 𝓐^k_i ∂_k ψ`,
//! with the gradient form `−∇_ζ((1+α) e^{−βτ} w̃ 𝓙^{−1/α} + ψ)` as a second
//! right-hand side for cross-checks.
//!
//! The forcing is sampled at the nodes and projected onto the evolution
//! basis with weight `W̃^α`; `θ` and `∂_τθ` stay polynomial of fixed degree.

use rayon::prelude::*;

use crate::domain::{FieldRep, Projector, ReferenceGrid, VectorField};
use crate::error::{Error, Result};
use crate::gravity::{potential_field, GravityKernel, PotentialField, DEFAULT_D_SAFE};
use crate::kinematics::{compute_fields, FlowState, KinematicFields, StarFields, StarFrame, DEFAULT_J_MIN};
use crate::linalg::{Mat3, Vec3};
use crate::profiles::DensityProfile;
use crate::scalar::Scalar;

pub const DEFAULT_DTAU: f64 = 0.01;
pub const DEFAULT_DTAU_MAX: f64 = 0.05;
pub const DEFAULT_EPSILON2: f64 = 0.1;
/// Basis and grid used for evolution unless configured otherwise.
pub const DYNAMICS_RADIAL_SHELLS: usize = 6;
pub const DYNAMICS_ANGULAR_POINTS: usize = 98;

#[derive(Clone, Debug, PartialEq)]
pub struct ModelOptions<T> {
    pub gravity: bool,
    pub j_min: T,
    pub d_safe: T,
    pub epsilon2: T,
    pub dtau_max: T,
    /// Evaluate the gradient form and curl residuals on every step.
    pub identity_checks: bool,
    /// Evolve with the gradient-form right-hand side.
    pub gradient_form: bool,
}

impl<T: Scalar> Default for ModelOptions<T> {
    fn default() -> Self {
        Self {
            gravity: true,
            j_min: T::lit(DEFAULT_J_MIN),
            d_safe: T::lit(DEFAULT_D_SAFE),
            epsilon2: T::lit(DEFAULT_EPSILON2),
            dtau_max: T::lit(DEFAULT_DTAU_MAX),
            identity_checks: false,
            gradient_form: false,
        }
    }
}

/// Everything fixed during a run.
#[derive(Clone, Debug)]
pub struct Model<T> {
    pub grid: ReferenceGrid<T>,
    pub degree: usize,
    pub kernel: GravityKernel<T>,
    pub profiles: Vec<DensityProfile<T>>,
    pub frames: Vec<StarFrame<T>>,
    pub options: ModelOptions<T>,
    projectors: Vec<Projector<T>>,
}

impl<T: Scalar> Model<T> {
    pub fn new(
        grid: ReferenceGrid<T>,
        degree: usize,
        profiles: Vec<DensityProfile<T>>,
        frames: Vec<StarFrame<T>>,
        options: ModelOptions<T>,
    ) -> Result<Self> {
        if profiles.len() != frames.len() {
            return Err(Error::Argument(format!(
                "{} profiles for {} star frames",
                profiles.len(),
                frames.len()
            )));
        }
        if profiles.is_empty() {
            return Err(Error::Argument("at least one star is required".into()));
        }
        let kernel = GravityKernel::new(&grid, degree)?;
        let projectors = profiles
            .iter()
            .map(|p| {
                let w: Vec<T> = grid.nodes.iter().map(|x| p.w_alpha(x)).collect();
                grid.projector(degree, Some(&w))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid,
            degree,
            kernel,
            profiles,
            frames,
            options,
            projectors,
        })
    }

    pub fn stars(&self) -> usize {
        self.profiles.len()
    }

    pub fn projector(&self, kappa: usize) -> &Projector<T> {
        &self.projectors[kappa]
    }

    pub fn fields(&self, state: &FlowState<T>) -> Result<KinematicFields<T>> {
        compute_fields(state, &self.frames, &self.grid, self.options.j_min)
    }

    fn gravity(&self, fields: &KinematicFields<T>, with_psi: bool) -> Result<Option<PotentialField<T>>> {
        if !self.options.gravity {
            return Ok(None);
        }
        potential_field(
            &self.kernel,
            &self.grid,
            &self.profiles,
            &fields.stars,
            fields.tau,
            self.options.d_safe,
            with_psi,
        )
        .map(Some)
    }

    /// Primary-form forcing `∂_ττθ + ∂_τθ` at the nodes and projected.
    pub fn forcing(&self, state: &FlowState<T>) -> Result<Forcing<T>> {
        let fields = self.fields(state)?;
        let gravity = self.gravity(&fields, false)?;
        let nodes: Vec<Vec<Vec3<T>>> = (0..self.stars())
            .into_par_iter()
            .map(|kappa| {
                let p = &self.profiles[kappa];
                let f = &fields.stars[kappa];
                (0..self.grid.len())
                    .map(|n| {
                        let mut v = pressure_primary(p, f, &self.grid.nodes[n], n, state.tau);
                        if let Some(g) = &gravity {
                            let gp = g.grad_psi[kappa][n];
                            for i in 0..3 {
                                v[i] -= gp[i];
                            }
                        }
                        v
                    })
                    .collect()
            })
            .collect();
        let projected = nodes
            .iter()
            .enumerate()
            .map(|(k, v)| self.projectors[k].project_vector(v))
            .collect();
        Ok(Forcing {
            fields,
            gravity,
            nodes,
            projected,
        })
    }

    /// `∂_ττθ` from the primary form, projected.
    pub fn rhs(&self, state: &FlowState<T>) -> Result<Vec<VectorField<T>>> {
        let f = self.forcing(state)?;
        Ok(subtract_damping(&f.projected, &state.theta_dot))
    }

    /// Gradient-form forcing `−𝓐∂Π` with
    /// `Π = (1+α) δ e^{−βτ} W̃ 𝓙^{−1/α} + ψ̂`. The pressure part is exact at the
    /// nodes; `ψ̂` is the unweighted projection of the sampled potential.
    pub fn gradient_form(&self, state: &FlowState<T>) -> Result<GradientForm<T>> {
        let fields = self.fields(state)?;
        let gravity = self.gravity(&fields, true)?;
        let mut nodes = Vec::with_capacity(self.stars());
        let mut curl_residual = T::zero();
        let mut potentials = Vec::with_capacity(self.stars());
        for kappa in 0..self.stars() {
            let psi_hat = match gravity.as_ref().and_then(|g| g.psi.as_ref()) {
                Some(psi) => self.kernel.projector().project(&psi[kappa]),
                None => FieldRep::zero(self.degree),
            };
            let (v, c) = gradient_form_star(
                &self.grid,
                &self.profiles[kappa],
                &fields.stars[kappa],
                &state.theta[kappa],
                &psi_hat,
                state.tau,
            );
            curl_residual = curl_residual.max(c);
            nodes.push(v);
            potentials.push(psi_hat);
        }
        let projected = nodes
            .iter()
            .enumerate()
            .map(|(k, v)| self.projectors[k].project_vector(v))
            .collect();
        Ok(GradientForm {
            potentials,
            nodes,
            projected,
            curl_residual,
        })
    }

    /// `∂_ττθ` from the gradient form, projected.
    pub fn rhs_gradient_form(&self, state: &FlowState<T>) -> Result<Vec<VectorField<T>>> {
        let g = self.gradient_form(state)?;
        Ok(subtract_damping(&g.projected, &state.theta_dot))
    }

    /// `max_nodes ‖nCurl(∂_ττθ + ∂_τθ)‖_F` for the projected primary rhs.
    pub fn curl_equation_residual(&self, state: &FlowState<T>) -> Result<T> {
        let f = self.forcing(state)?;
        Ok(self.projected_curl(&f))
    }

    fn projected_curl(&self, f: &Forcing<T>) -> T {
        let mut worst = T::zero();
        for (kappa, field) in f.projected.iter().enumerate() {
            worst = worst.max(ncurl_max(&self.grid, &f.fields.stars[kappa], field));
        }
        worst
    }

    /// Relative weighted L² difference of the two right-hand sides at the
    /// nodes, normalized by the primary rhs.
    pub fn form_difference(&self, state: &FlowState<T>, forcing: &Forcing<T>, grad: &GradientForm<T>) -> T {
        let mut num = T::zero();
        let mut den = T::zero();
        for kappa in 0..self.stars() {
            let w: Vec<T> = self.grid.nodes.iter().map(|x| self.profiles[kappa].w_alpha(x)).collect();
            let td: Vec<Vec<T>> = state.theta_dot[kappa].iter().map(|f| self.grid.eval(f)).collect();
            for n in 0..self.grid.len() {
                let q = self.grid.weights[n] * w[n];
                for i in 0..3 {
                    let a = forcing.nodes[kappa][n][i] - td[i][n];
                    let d = forcing.nodes[kappa][n][i] - grad.nodes[kappa][n][i];
                    num += q * d * d;
                    den += q * a * a;
                }
            }
        }
        if den == T::zero() {
            if num == T::zero() {
                T::zero()
            } else {
                T::infinity()
            }
        } else {
            (num / den).sqrt()
        }
    }

    /// One explicit 4-stage step with gravity refreshed at every stage.
    pub fn step(&self, state: &FlowState<T>, dtau: T) -> Result<StepOutcome<T>> {
        if !(dtau >= T::zero()) || dtau > self.options.dtau_max {
            return Err(Error::Argument(format!(
                "dτ = {dtau} outside [0, {}]",
                self.options.dtau_max
            )));
        }
        let f1 = self.forcing(state)?;
        let report = self.report(state, &f1, dtau)?;
        if dtau == T::zero() {
            return Ok(StepOutcome {
                state: state.clone(),
                report,
                forcing: f1,
            });
        }
        let half = dtau * T::lit(0.5);
        let a1 = if self.options.gradient_form {
            self.rhs_gradient_form(state)?
        } else {
            subtract_damping(&f1.projected, &state.theta_dot)
        };
        let v1 = state.theta_dot.clone();

        let s2 = advance(state, &v1, &a1, half);
        let a2 = self.stage(&s2)?;
        let v2 = s2.theta_dot.clone();

        let s3 = advance(state, &v2, &a2, half);
        let a3 = self.stage(&s3)?;
        let v3 = s3.theta_dot.clone();

        let s4 = advance(state, &v3, &a3, dtau);
        let a4 = self.stage(&s4)?;
        let v4 = s4.theta_dot.clone();

        let sixth = dtau / T::lit(6.0);
        let two = T::lit(2.0);
        let combine = |base: &[VectorField<T>], k: [&Vec<VectorField<T>>; 4]| -> Vec<VectorField<T>> {
            base.iter()
                .enumerate()
                .map(|(s, b)| {
                    std::array::from_fn(|i| {
                        let sum = &(&k[0][s][i] + &k[1][s][i].scale(two)) + &(&k[2][s][i].scale(two) + &k[3][s][i]);
                        &b[i] + &sum.scale(sixth)
                    })
                })
                .collect()
        };
        let next = FlowState {
            tau: state.tau + dtau,
            theta: combine(&state.theta, [&v1, &v2, &v3, &v4]),
            theta_dot: combine(&state.theta_dot, [&a1, &a2, &a3, &a4]),
        };
        Ok(StepOutcome {
            state: next,
            report,
            forcing: f1,
        })
    }

    fn stage(&self, state: &FlowState<T>) -> Result<Vec<VectorField<T>>> {
        if self.options.gradient_form {
            self.rhs_gradient_form(state)
        } else {
            self.rhs(state)
        }
    }

    fn report(&self, state: &FlowState<T>, f: &Forcing<T>, dtau: T) -> Result<StepReport<T>> {
        let mut j_dev = T::zero();
        let mut a_dev = T::zero();
        let mut j_min = T::infinity();
        for s in &f.fields.stars {
            j_dev = j_dev.max(s.j_deviation());
            a_dev = a_dev.max(s.a_deviation());
            j_min = j_min.min(s.j_min());
        }
        let theta_sup = theta_sup_sum(&self.grid, &state.theta);
        let eps = self.options.epsilon2;
        let identity = if self.options.identity_checks {
            let grad = self.gradient_form(state)?;
            Some(IdentityCheck {
                primary_curl: self.projected_curl(f),
                gradient_curl: grad.curl_residual,
                form_difference: self.form_difference(state, f, &grad),
            })
        } else {
            None
        };
        Ok(StepReport {
            tau: state.tau,
            dtau,
            j_deviation: j_dev,
            j_min,
            a_deviation: a_dev,
            theta_sup,
            monitor_warning: a_dev > eps || j_dev > eps || theta_sup > eps,
            identity,
        })
    }
}

/// Forcing sampled at the nodes, with the kinematics and gravity it used.
#[derive(Clone, Debug)]
pub struct Forcing<T> {
    pub fields: KinematicFields<T>,
    pub gravity: Option<PotentialField<T>>,
    pub nodes: Vec<Vec<Vec3<T>>>,
    pub projected: Vec<VectorField<T>>,
}

#[derive(Clone, Debug)]
pub struct GradientForm<T> {
    /// `ψ̂_κ`.
    pub potentials: Vec<FieldRep<T>>,
    pub nodes: Vec<Vec<Vec3<T>>>,
    pub projected: Vec<VectorField<T>>,
    /// `max ‖nCurl(−𝓐∂Π)‖_F` at the nodes, before projection.
    pub curl_residual: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCheck<T> {
    pub primary_curl: T,
    pub gradient_curl: T,
    pub form_difference: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepReport<T> {
    /// `τ` at the start of the step.
    pub tau: T,
    pub dtau: T,
    /// `max_κ ‖𝓙_κ − 1‖_∞`.
    pub j_deviation: T,
    pub j_min: T,
    /// `max_κ ‖𝓐_κ − I‖_∞`.
    pub a_deviation: T,
    /// `Σ_κ ‖θ_κ‖_∞` over the nodes.
    pub theta_sup: T,
    pub monitor_warning: bool,
    pub identity: Option<IdentityCheck<T>>,
}

#[derive(Clone, Debug)]
pub struct StepOutcome<T> {
    pub state: FlowState<T>,
    pub report: StepReport<T>,
    /// Stage-one forcing, i.e. evaluated at the incoming state.
    pub forcing: Forcing<T>,
}

fn subtract_damping<T: Scalar>(forcing: &[VectorField<T>], theta_dot: &[VectorField<T>]) -> Vec<VectorField<T>> {
    forcing
        .iter()
        .zip(theta_dot)
        .map(|(f, v)| std::array::from_fn(|i| &f[i] - &v[i]))
        .collect()
}

fn advance<T: Scalar>(state: &FlowState<T>, v: &[VectorField<T>], a: &[VectorField<T>], h: T) -> FlowState<T> {
    let axpy = |base: &[VectorField<T>], d: &[VectorField<T>]| -> Vec<VectorField<T>> {
        base.iter()
            .zip(d)
            .map(|(b, dd)| std::array::from_fn(|i| &b[i] + &dd[i].scale(h)))
            .collect()
    };
    FlowState {
        tau: state.tau + h,
        theta: axpy(&state.theta, v),
        theta_dot: axpy(&state.theta_dot, a),
    }
}

/// `Σ_κ max_nodes |θ_κ|`.
pub fn theta_sup_sum<T: Scalar>(grid: &ReferenceGrid<T>, theta: &[VectorField<T>]) -> T {
    let mut total = T::zero();
    for th in theta {
        let v: Vec<Vec<T>> = th.iter().map(|f| grid.eval(f)).collect();
        let mut m = T::zero();
        for n in 0..grid.len() {
            m = m.max((v[0][n] * v[0][n] + v[1][n] * v[1][n] + v[2][n] * v[2][n]).sqrt());
        }
        total += m;
    }
    total
}

/// Pressure forcing in the expanded form
/// `−δ e^{−βτ} [(1+α) ∂_kW̃ 𝓐^k_i 𝓙^{−1/α} + W̃ 𝓙^{−1/α}(∂_k𝓐^k_i − 𝓐^k_i a_k/α)]`.
pub fn pressure_primary<T: Scalar>(
    profile: &DensityProfile<T>,
    fields: &StarFields<T>,
    x: &Vec3<T>,
    node: usize,
    tau: T,
) -> Vec3<T> {
    let alpha = profile.alpha;
    let c = profile.delta * (-profile.beta() * tau).exp();
    let w = profile.w(x);
    let dw = profile.grad_w(x);
    let a = &fields.a[node];
    let jm = fields.j[node].powf(-alpha.recip());
    let lj = fields.log_j_gradient(node);
    let ga = fields.grad_a(node);
    let mut out = [T::zero(); 3];
    for (i, o) in out.iter_mut().enumerate() {
        let mut t1 = T::zero();
        let mut div_a = T::zero();
        let mut al = T::zero();
        for k in 0..3 {
            t1 += dw[k] * a[k][i];
            div_a += ga[k][k][i];
            al += a[k][i] * lj[k];
        }
        *o = -c * ((T::one() + alpha) * t1 * jm + w * jm * (div_a - al / alpha));
    }
    out
}

/// Gradient-form pressure `−(1+α) δ e^{−βτ} 𝓙^{−1/α} 𝓐^k_i (∂_kW̃ − W̃ a_k/α)`.
pub fn pressure_gradient_form<T: Scalar>(
    profile: &DensityProfile<T>,
    fields: &StarFields<T>,
    x: &Vec3<T>,
    node: usize,
    tau: T,
) -> Vec3<T> {
    let alpha = profile.alpha;
    let c = (T::one() + alpha) * profile.delta * (-profile.beta() * tau).exp();
    let w = profile.w(x);
    let dw = profile.grad_w(x);
    let a = &fields.a[node];
    let jm = fields.j[node].powf(-alpha.recip());
    let lj = fields.log_j_gradient(node);
    let mut out = [T::zero(); 3];
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = T::zero();
        for k in 0..3 {
            acc += a[k][i] * (dw[k] - w * lj[k] / alpha);
        }
        *o = -c * jm * acc;
    }
    out
}

/// Node values of `∂_k∂_s∂_m θ^j` as `[j][k][s][m]`.
fn third_derivatives<T: Scalar>(grid: &ReferenceGrid<T>, theta: &VectorField<T>) -> Vec<[[Mat3<T>; 3]; 3]> {
    let mut out = vec![[[[[T::zero(); 3]; 3]; 3]; 3]; grid.len()];
    for (j, f) in theta.iter().enumerate() {
        for k in 0..3 {
            let dk = f.partial(k).expect("axis");
            for s in k..3 {
                let dks = dk.partial(s).expect("axis");
                for m in s..3 {
                    let vals = grid.eval(&dks.partial(m).expect("axis"));
                    for (n, v) in vals.into_iter().enumerate() {
                        for p in permutations(k, s, m) {
                            out[n][j][p[0]][p[1]][p[2]] = v;
                        }
                    }
                }
            }
        }
    }
    out
}

fn permutations(a: usize, b: usize, c: usize) -> [[usize; 3]; 6] {
    [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]]
}

/// Gradient-form forcing of one star and `max ‖nCurl‖_F` of it, with the
/// curl taken analytically through the Hessian of `Π`.
fn gradient_form_star<T: Scalar>(
    grid: &ReferenceGrid<T>,
    profile: &DensityProfile<T>,
    fields: &StarFields<T>,
    theta: &VectorField<T>,
    psi_hat: &FieldRep<T>,
    tau: T,
) -> (Vec<Vec3<T>>, T) {
    let alpha = profile.alpha;
    let cp = (T::one() + alpha) * profile.delta * (-profile.beta() * tau).exp();
    let dpsi: Vec<Vec<T>> = (0..3).map(|k| grid.eval(&psi_hat.partial(k).expect("axis"))).collect();
    let d2psi: Vec<Vec<Vec<T>>> = (0..3)
        .map(|k| {
            let dk = psi_hat.partial(k).expect("axis");
            (0..3).map(|s| grid.eval(&dk.partial(s).expect("axis"))).collect()
        })
        .collect();
    let t3 = third_derivatives(grid, theta);
    let mut values = Vec::with_capacity(grid.len());
    let mut worst = T::zero();
    for (n, x) in grid.nodes.iter().enumerate() {
        let a = &fields.a[n];
        let h = &fields.hess[n];
        let ga = fields.grad_a(n);
        let lj = fields.log_j_gradient(n);
        let w = profile.w(x);
        let dw = profile.grad_w(x);
        let hw = profile.hess_w(x);
        let jm = fields.j[n].powf(-alpha.recip());
        // ∂_s a_k
        let mut dlj = [[T::zero(); 3]; 3];
        for s in 0..3 {
            for k in 0..3 {
                let mut acc = T::zero();
                for m in 0..3 {
                    for j in 0..3 {
                        acc += ga[s][m][j] * h[j][k][m] + a[m][j] * t3[n][j][s][k][m];
                    }
                }
                dlj[s][k] = acc;
            }
        }
        let mut dpi = [T::zero(); 3];
        let mut hpi = [[T::zero(); 3]; 3];
        for k in 0..3 {
            let g = dw[k] - w * lj[k] / alpha;
            dpi[k] = cp * jm * g + dpsi[k][n];
            for s in 0..3 {
                let inner = -lj[s] / alpha * g + hw[s][k] - (dw[s] * lj[k] + w * dlj[s][k]) / alpha;
                hpi[s][k] = cp * jm * inner + d2psi[k][s][n];
            }
        }
        let mut v = [T::zero(); 3];
        // dv[s][i] = ∂_s V^i
        let mut dv = [[T::zero(); 3]; 3];
        for i in 0..3 {
            for k in 0..3 {
                v[i] -= a[k][i] * dpi[k];
                for s in 0..3 {
                    dv[s][i] -= ga[s][k][i] * dpi[k] + a[k][i] * hpi[s][k];
                }
            }
        }
        let mut fro = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                let mut c = T::zero();
                for s in 0..3 {
                    c += a[s][j] * dv[s][i] - a[s][i] * dv[s][j];
                }
                fro += c * c;
            }
        }
        worst = worst.max(fro.sqrt());
        values.push(v);
    }
    (values, worst)
}

/// `max_nodes ‖nCurl F‖_F` for a polynomial vector field.
pub fn ncurl_max<T: Scalar>(grid: &ReferenceGrid<T>, fields: &StarFields<T>, f: &VectorField<T>) -> T {
    let d: [[Vec<T>; 3]; 3] =
        std::array::from_fn(|i| std::array::from_fn(|s| grid.eval(&f[i].partial(s).expect("axis"))));
    let mut worst = T::zero();
    for n in 0..grid.len() {
        let a = &fields.a[n];
        let mut fro = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                let mut c = T::zero();
                for s in 0..3 {
                    c += a[s][j] * d[i][s][n] - a[s][i] * d[j][s][n];
                }
                fro += c * c;
            }
        }
        worst = worst.max(fro.sqrt());
    }
    worst
}
