//! Self-interaction `𝒢_κ` and tidal `𝓘_{κ,κ'}` fields by quadrature, the
//! potential assembly, and the potential identities.
//!
//! Sign conventions. `tidal` returns the rescaled tidal integral exactly as
//! displayed, `δ^α e^{−τ} ∫ (ζ_κ(x) − ζ_κ'(z)) W̃^α / |ζ_κ(x) − ζ_κ'(z)|³`,
//! which points away from star `κ'`. The attractive field felt by star `κ`
//! is its negative, so the assembled potential gradient is
//! `𝓐∂ψ = −𝒢 + Σ 𝓘` with `𝓘` as returned here. `𝒢` itself is attractive.
//!
//! Self-interaction quadrature. With `g = ∂_k(𝓐^k_i W̃^α)` and `ĝ` its
//! degree-`P` projection,
//! `∫ g/|ζ(x) − ζ(z)| = ∫ ĝ/|x − z| + ∫ (g/|ζ(x) − ζ(z)| − ĝ/|x − z|)`.
//! The first integral is exact through the tabulated monomial potentials
//! ([`newton::basis_potentials`]); the second has a weak integrand and uses
//! the grid rule with the coincident node dropped.
//!
//! Exterior integrals `∫ f/|p − ζ(z)|` split the same way around the
//! source's mean position `c̄`: `ĝ` is integrated exactly by its multipole
//! expansion at `p − c̄`, and the remainder `f/|p − ζ| − ĝ/|p − c̄ − z|` by the
//! grid rule. Tidal fields use the divergence form
//! `∫ W̃^α (p − ζ)/|p − ζ|³ = −∫ g/|p − ζ|`.

pub mod multipole;
pub mod newton;

use rayon::prelude::*;

use crate::domain::{eval_at, FieldRep, Projector, ReferenceGrid, VectorField};
use crate::error::{Error, Result};
use crate::kinematics::StarFields;
use crate::linalg::{Dense, Vec3};
use crate::profiles::{pow_alpha, DensityProfile};
use crate::scalar::{stable_sum, Scalar};

pub const DEFAULT_D_SAFE: f64 = 0.5;

/// Beyond this distance from a source's mean position the plain grid rule
/// is already accurate to roundoff and the multipole split is skipped.
pub const FAR_FIELD: f64 = 6.0;

/// Grid-bound tables reused by every gravity evaluation.
#[derive(Clone, Debug)]
pub struct GravityKernel<T> {
    degree: usize,
    /// `nodes × basis` monomial potentials.
    newton: Dense<T>,
    projector: Projector<T>,
    /// Rule integrating degree `2P` exactly, for multipole moments.
    moment_grid: ReferenceGrid<T>,
    moment_harmonics: Vec<Vec<T>>,
}

impl<T: Scalar> GravityKernel<T> {
    pub fn new(grid: &ReferenceGrid<T>, degree: usize) -> Result<Self> {
        let projector = grid.projector(degree, None)?;
        let rows: Vec<Vec<T>> = grid
            .nodes
            .par_iter()
            .map(|x| newton::basis_potentials(x, degree))
            .collect();
        let nb = rows.first().map(|r| r.len()).unwrap_or(0);
        let mut newton = Dense::zeros(grid.len(), nb);
        for (i, r) in rows.into_iter().enumerate() {
            newton.data[i * nb..(i + 1) * nb].copy_from_slice(&r);
        }
        let moment_grid = ReferenceGrid::new(degree + 2, 2 * (degree + 1) * (degree + 1), degree)?;
        let moment_harmonics = moment_grid
            .nodes
            .iter()
            .map(|x| multipole::solid_harmonics(x, degree))
            .collect();
        Ok(Self {
            degree,
            newton,
            projector,
            moment_grid,
            moment_harmonics,
        })
    }

    /// Prepares exterior evaluation of `∫ f_c/|p − ζ(z)|` for node columns
    /// `f_c` sampled on `grid`.
    pub fn exterior_source(&self, grid: &ReferenceGrid<T>, zeta: &[Vec3<T>], columns: &[Vec<T>]) -> ExteriorSource<T> {
        let volume = stable_sum(grid.weights.iter().copied());
        let mut shift = [T::zero(); 3];
        for (i, s) in shift.iter_mut().enumerate() {
            *s = stable_sum(grid.weights.iter().zip(zeta).map(|(w, z)| *w * z[i])) / volume;
        }
        let mut moment_values = Vec::with_capacity(columns.len());
        let mut fit = Vec::with_capacity(columns.len());
        let mut raw = Vec::with_capacity(columns.len());
        for col in columns {
            let rep = self.projector.project(col);
            moment_values.push(self.moment_grid.eval(&rep));
            fit.push(grid.eval(&rep).iter().zip(&grid.weights).map(|(v, w)| *v * *w).collect());
            raw.push(col.iter().zip(&grid.weights).map(|(v, w)| *v * *w).collect());
        }
        let multipoles =
            multipole::Multipoles::new(self.degree, &self.moment_grid.weights, &self.moment_harmonics, &moment_values);
        ExteriorSource {
            shift,
            zeta: zeta.to_vec(),
            nodes: grid.nodes.clone(),
            multipoles,
            raw,
            fit,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Unweighted least-squares projector used for `ĝ` and diagnostics.
    pub fn projector(&self) -> &Projector<T> {
        &self.projector
    }
}

/// Exterior potentials of node columns on a deformed star.
#[derive(Clone, Debug)]
pub struct ExteriorSource<T> {
    shift: Vec3<T>,
    zeta: Vec<Vec3<T>>,
    nodes: Vec<Vec3<T>>,
    multipoles: multipole::Multipoles<T>,
    /// Weighted node values.
    raw: Vec<Vec<T>>,
    /// Weighted node values of the projections.
    fit: Vec<Vec<T>>,
}

impl<T: Scalar> ExteriorSource<T> {
    /// `∫ f_c/|p − ζ(z)| dz` for each column, and the smallest sampled
    /// `|p − ζ(z)|`. Points within unit distance of the mean position fall
    /// back to the plain grid rule, as do points beyond [`FAR_FIELD`].
    pub fn potentials(&self, p: &Vec3<T>) -> (Vec<T>, T) {
        let q = [p[0] - self.shift[0], p[1] - self.shift[1], p[2] - self.shift[2]];
        let qn = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
        let exact = qn >= T::one() && qn < T::lit(FAR_FIELD);
        let mut out = if exact {
            self.multipoles.potential(&q)
        } else {
            vec![T::zero(); self.raw.len()]
        };
        let mut dmin2 = T::infinity();
        let mut acc = vec![T::zero(); self.raw.len()];
        for (j, (z, y)) in self.zeta.iter().zip(&self.nodes).enumerate() {
            let d = [p[0] - z[0], p[1] - z[1], p[2] - z[2]];
            let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
            dmin2 = dmin2.min(r2);
            let inv = r2.sqrt().recip();
            if exact {
                let e = [q[0] - y[0], q[1] - y[1], q[2] - y[2]];
                let inv_ref = (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]).sqrt().recip();
                for (c, a) in acc.iter_mut().enumerate() {
                    *a += self.raw[c][j] * inv - self.fit[c][j] * inv_ref;
                }
            } else {
                for (c, a) in acc.iter_mut().enumerate() {
                    *a += self.raw[c][j] * inv;
                }
            }
        }
        for (o, a) in out.iter_mut().zip(acc) {
            *o += a;
        }
        (out, dmin2.sqrt())
    }
}

fn source_columns<T: Scalar>(grid: &ReferenceGrid<T>, profile: &DensityProfile<T>, fields: &StarFields<T>, with_potential: bool) -> Vec<Vec<T>> {
    let g = self_source(grid, profile, fields);
    let mut columns: Vec<Vec<T>> = (0..3).map(|i| g.iter().map(|v| v[i]).collect()).collect();
    if with_potential {
        columns.push(grid.nodes.iter().map(|x| profile.w_alpha(x)).collect());
    }
    columns
}

/// `δ^α e^{−τ}`.
pub fn prefactor<T: Scalar>(profile: &DensityProfile<T>, tau: T) -> T {
    if profile.delta == T::zero() {
        return T::zero();
    }
    pow_alpha(profile.delta, profile.alpha) * (-tau).exp()
}

/// `g_i = ∂_k(𝓐^k_i W̃^α)` at every node.
pub fn self_source<T: Scalar>(grid: &ReferenceGrid<T>, profile: &DensityProfile<T>, fields: &StarFields<T>) -> Vec<Vec3<T>> {
    let alpha = profile.alpha;
    (0..grid.len())
        .map(|n| {
            let x = &grid.nodes[n];
            let w = profile.w(x).max(T::zero());
            let wa = pow_alpha(w, alpha);
            let wa1 = alpha * pow_alpha(w, alpha - T::one());
            let dw = profile.grad_w(x);
            let a = &fields.a[n];
            let h = &fields.hess[n];
            let mut g = [T::zero(); 3];
            for (i, gi) in g.iter_mut().enumerate() {
                let mut div_a = T::zero();
                let mut adw = T::zero();
                for k in 0..3 {
                    adw += a[k][i] * dw[k];
                    for j in 0..3 {
                        for l in 0..3 {
                            div_a -= a[k][j] * h[j][k][l] * a[l][i];
                        }
                    }
                }
                *gi = wa * div_a + wa1 * adw;
            }
            g
        })
        .collect()
}

/// Singular integrals `∫ v_c(z)/|ζ(x) − ζ(z)| dz` for several columns `v_c`
/// sharing one pass over node pairs.
fn singular_integral<T: Scalar>(
    kernel: &GravityKernel<T>,
    grid: &ReferenceGrid<T>,
    zeta: &[Vec3<T>],
    columns: &[Vec<T>],
) -> Vec<Vec<T>> {
    let fits: Vec<FieldRep<T>> = columns.iter().map(|v| kernel.projector.project(v)).collect();
    let fit_nodes: Vec<Vec<T>> = fits.iter().map(|f| grid.eval(f)).collect();
    let smooth: Vec<Vec<T>> = fits.iter().map(|f| kernel.newton.matvec(f.coeffs())).collect();
    let nc = columns.len();
    let rows: Vec<Vec<T>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let xi = grid.nodes[i];
            let zi = zeta[i];
            let mut acc = vec![T::zero(); nc];
            for j in 0..grid.len() {
                if j == i {
                    continue;
                }
                let xj = grid.nodes[j];
                let zj = zeta[j];
                let dz = ((zi[0] - zj[0]).powi(2) + (zi[1] - zj[1]).powi(2) + (zi[2] - zj[2]).powi(2)).sqrt();
                let dx = ((xi[0] - xj[0]).powi(2) + (xi[1] - xj[1]).powi(2) + (xi[2] - xj[2]).powi(2)).sqrt();
                let w = grid.weights[j];
                let (iz, ix) = (w / dz, w / dx);
                for c in 0..nc {
                    acc[c] += columns[c][j] * iz - fit_nodes[c][j] * ix;
                }
            }
            (0..nc).map(|c| smooth[c][i] + acc[c]).collect()
        })
        .collect();
    (0..nc).map(|c| rows.iter().map(|r| r[c]).collect()).collect()
}

/// `𝒢_κ` at every node.
pub fn self_interaction<T: Scalar>(
    kernel: &GravityKernel<T>,
    grid: &ReferenceGrid<T>,
    profile: &DensityProfile<T>,
    fields: &StarFields<T>,
    tau: T,
) -> Vec<Vec3<T>> {
    let pref = prefactor(profile, tau);
    if pref == T::zero() {
        return vec![[T::zero(); 3]; grid.len()];
    }
    let g = self_source(grid, profile, fields);
    let columns: Vec<Vec<T>> = (0..3).map(|i| g.iter().map(|v| v[i]).collect()).collect();
    let comps = singular_integral(kernel, grid, &fields.zeta, &columns);
    (0..grid.len())
        .map(|n| [pref * comps[0][n], pref * comps[1][n], pref * comps[2][n]])
        .collect()
}

/// `∫ W̃^α(z)/|ζ(x) − ζ(z)| dz` at every node (no prefactor).
pub fn self_potential<T: Scalar>(
    kernel: &GravityKernel<T>,
    grid: &ReferenceGrid<T>,
    profile: &DensityProfile<T>,
    fields: &StarFields<T>,
) -> Vec<T> {
    let wa: Vec<T> = grid.nodes.iter().map(|x| profile.w_alpha(x)).collect();
    singular_integral(kernel, grid, &fields.zeta, &[wa]).remove(0)
}

/// `𝒢_κ` at an off-grid reference point `|x| ≤ 1`; `zeta_x = ζ_κ(x)`.
pub fn self_interaction_at<T: Scalar>(
    kernel: &GravityKernel<T>,
    grid: &ReferenceGrid<T>,
    profile: &DensityProfile<T>,
    fields: &StarFields<T>,
    tau: T,
    x: &Vec3<T>,
    zeta_x: &Vec3<T>,
) -> Vec3<T> {
    let pref = prefactor(profile, tau);
    let g = self_source(grid, profile, fields);
    let pot = newton::basis_potentials(x, kernel.degree);
    let mut out = [T::zero(); 3];
    for (i, o) in out.iter_mut().enumerate() {
        let vals: Vec<T> = g.iter().map(|v| v[i]).collect();
        let fit = kernel.projector.project(&vals);
        let fit_nodes = grid.eval(&fit);
        let mut smooth = T::zero();
        for (c, p) in fit.coeffs().iter().zip(&pot) {
            smooth += *c * *p;
        }
        let corr = stable_sum((0..grid.len()).map(|j| {
            let xj = grid.nodes[j];
            let zj = fields.zeta[j];
            let dz = ((zeta_x[0] - zj[0]).powi(2) + (zeta_x[1] - zj[1]).powi(2) + (zeta_x[2] - zj[2]).powi(2)).sqrt();
            let dx = ((x[0] - xj[0]).powi(2) + (x[1] - xj[1]).powi(2) + (x[2] - xj[2]).powi(2)).sqrt();
            grid.weights[j] * (vals[j] / dz - fit_nodes[j] / dx)
        }));
        *o = pref * (smooth + corr);
    }
    out
}

/// The self-interaction integral at a point `p` outside `ζ_κ(Ω)`.
pub fn self_interaction_exterior<T: Scalar>(
    kernel: &GravityKernel<T>,
    grid: &ReferenceGrid<T>,
    profile: &DensityProfile<T>,
    fields: &StarFields<T>,
    tau: T,
    p: &Vec3<T>,
) -> Vec3<T> {
    let pref = prefactor(profile, tau);
    let src = kernel.exterior_source(grid, &fields.zeta, &source_columns(grid, profile, fields, false));
    let (v, _) = src.potentials(p);
    [pref * v[0], pref * v[1], pref * v[2]]
}

/// Displayed tidal integral of source star `κ'` at point `p`, with the
/// smallest sampled distance `|p − ζ_κ'(z)|`. No near-contact guard.
pub fn tidal_raw<T: Scalar>(
    kernel: &GravityKernel<T>,
    grid: &ReferenceGrid<T>,
    source: &DensityProfile<T>,
    source_fields: &StarFields<T>,
    tau: T,
    p: &Vec3<T>,
) -> (Vec3<T>, T) {
    let pref = prefactor(source, tau);
    let src = kernel.exterior_source(grid, &source_fields.zeta, &source_columns(grid, source, source_fields, false));
    let (v, dmin) = src.potentials(p);
    ([-pref * v[0], -pref * v[1], -pref * v[2]], dmin)
}

/// `𝓘_{κ,κ'}` at node `node` of star `κ`, refusing separations below `d_safe`.
#[allow(clippy::too_many_arguments)]
pub fn tidal<T: Scalar>(
    kernel: &GravityKernel<T>,
    grid: &ReferenceGrid<T>,
    profiles: &[DensityProfile<T>],
    stars: &[StarFields<T>],
    kappa: usize,
    other: usize,
    node: usize,
    tau: T,
    d_safe: T,
) -> Result<Vec3<T>> {
    if kappa == other {
        return Err(Error::Argument("tidal term needs two distinct stars".into()));
    }
    let p = stars[kappa].zeta[node];
    let (v, dmin) = tidal_raw(kernel, grid, &profiles[other], &stars[other], tau, &p);
    if dmin <= d_safe {
        return Err(Error::NearContact {
            star: kappa,
            other,
            separation: dmin.to_f64_lossy(),
            d_safe: d_safe.to_f64_lossy(),
        });
    }
    Ok(v)
}

/// Gravity at every node of every star.
#[derive(Clone, Debug)]
pub struct PotentialField<T> {
    /// `𝒢_κ`.
    pub self_field: Vec<Vec<Vec3<T>>>,
    /// `Σ_{κ'≠κ} 𝓘_{κ,κ'}` with the displayed sign.
    pub tidal_sum: Vec<Vec<Vec3<T>>>,
    /// `𝓐∂ψ = −𝒢 + Σ𝓘`.
    pub grad_psi: Vec<Vec<Vec3<T>>>,
    /// `ψ` node values when requested.
    pub psi: Option<Vec<Vec<T>>>,
    /// Smallest sampled `|ζ_κ(x) − ζ_κ'(z)|` over all pairs.
    pub min_separation: T,
}

impl<T: Scalar> PotentialField<T> {
    pub fn zero(stars: usize, nodes: usize, with_psi: bool) -> Self {
        Self {
            self_field: vec![vec![[T::zero(); 3]; nodes]; stars],
            tidal_sum: vec![vec![[T::zero(); 3]; nodes]; stars],
            grad_psi: vec![vec![[T::zero(); 3]; nodes]; stars],
            psi: with_psi.then(|| vec![vec![T::zero(); nodes]; stars]),
            min_separation: T::infinity(),
        }
    }

    /// Grid-weighted L² norm of the tidal sum of star `κ`.
    pub fn tidal_norm(&self, grid: &ReferenceGrid<T>, kappa: usize) -> T {
        grid.integrate(
            &self.tidal_sum[kappa]
                .iter()
                .map(|v| v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
                .collect::<Vec<T>>(),
        )
        .sqrt()
    }

    pub fn self_norm(&self, grid: &ReferenceGrid<T>, kappa: usize) -> T {
        grid.integrate(
            &self.self_field[kappa]
                .iter()
                .map(|v| v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
                .collect::<Vec<T>>(),
        )
        .sqrt()
    }
}

/// Tidal field and potential of every other star at every node of `κ`.
fn tidal_block<T: Scalar>(
    kernel: &GravityKernel<T>,
    grid: &ReferenceGrid<T>,
    profiles: &[DensityProfile<T>],
    stars: &[StarFields<T>],
    kappa: usize,
    tau: T,
    with_potential: bool,
) -> (Vec<Vec3<T>>, Vec<T>, T) {
    let sources: Vec<(T, ExteriorSource<T>)> = (0..stars.len())
        .filter(|&o| o != kappa)
        .map(|o| {
            let cols = source_columns(grid, &profiles[o], &stars[o], with_potential);
            (prefactor(&profiles[o], tau), kernel.exterior_source(grid, &stars[o].zeta, &cols))
        })
        .collect();
    let rows: Vec<(Vec3<T>, T, T)> = stars[kappa]
        .zeta
        .par_iter()
        .map(|p| {
            let mut field = [T::zero(); 3];
            let mut pot = T::zero();
            let mut dmin = T::infinity();
            for (pref, src) in &sources {
                let (v, d) = src.potentials(p);
                dmin = dmin.min(d);
                for k in 0..3 {
                    field[k] -= *pref * v[k];
                }
                if with_potential {
                    pot += *pref * v[3];
                }
            }
            (field, pot, dmin)
        })
        .collect();
    let dmin = rows.iter().map(|r| r.2).fold(T::infinity(), T::min);
    (
        rows.iter().map(|r| r.0).collect(),
        rows.iter().map(|r| r.1).collect(),
        dmin,
    )
}

/// Assembles `𝒢`, `Σ𝓘` and `𝓐∂ψ` for all stars. Fails with a near-contact
/// error if any sampled tidal denominator drops to `d_safe`.
pub fn potential_field<T: Scalar>(
    kernel: &GravityKernel<T>,
    grid: &ReferenceGrid<T>,
    profiles: &[DensityProfile<T>],
    stars: &[StarFields<T>],
    tau: T,
    d_safe: T,
    with_psi: bool,
) -> Result<PotentialField<T>> {
    let n = stars.len();
    let mut out = PotentialField::zero(n, grid.len(), with_psi);
    for kappa in 0..n {
        let pref = prefactor(&profiles[kappa], tau);
        let mut psi_self = Vec::new();
        if pref != T::zero() {
            let g = self_source(grid, &profiles[kappa], &stars[kappa]);
            let mut columns: Vec<Vec<T>> = (0..3).map(|i| g.iter().map(|v| v[i]).collect()).collect();
            if with_psi {
                columns.push(grid.nodes.iter().map(|x| profiles[kappa].w_alpha(x)).collect());
            }
            let mut comps = singular_integral(kernel, grid, &stars[kappa].zeta, &columns);
            if with_psi {
                psi_self = comps.pop().expect("potential column").into_iter().map(|v| -pref * v).collect();
            }
            out.self_field[kappa] = (0..grid.len())
                .map(|n| [pref * comps[0][n], pref * comps[1][n], pref * comps[2][n]])
                .collect();
        } else if with_psi {
            psi_self = vec![T::zero(); grid.len()];
        }
        if n > 1 {
            let (field, pot, dmin) = tidal_block(kernel, grid, profiles, stars, kappa, tau, with_psi);
            if dmin <= d_safe {
                let other = (0..n).find(|&o| o != kappa).unwrap_or(kappa);
                return Err(Error::NearContact {
                    star: kappa,
                    other,
                    separation: dmin.to_f64_lossy(),
                    d_safe: d_safe.to_f64_lossy(),
                });
            }
            out.min_separation = out.min_separation.min(dmin);
            out.tidal_sum[kappa] = field;
            if with_psi {
                for (p, t) in psi_self.iter_mut().zip(&pot) {
                    *p -= *t;
                }
            }
        }
        out.grad_psi[kappa] = out.self_field[kappa]
            .iter()
            .zip(&out.tidal_sum[kappa])
            .map(|(g, i)| [i[0] - g[0], i[1] - g[1], i[2] - g[2]])
            .collect();
        if let Some(psi) = out.psi.as_mut() {
            psi[kappa] = psi_self;
        }
    }
    Ok(out)
}

/// `𝓐∂ψ` for one star: `−𝒢 + Σ𝓘`.
pub fn grad_psi<T: Scalar>(self_field: &Vec3<T>, tidal_sum: &Vec3<T>) -> Vec3<T> {
    [
        tidal_sum[0] - self_field[0],
        tidal_sum[1] - self_field[1],
        tidal_sum[2] - self_field[2],
    ]
}

fn project_vector<T: Scalar>(kernel: &GravityKernel<T>, values: &[Vec3<T>]) -> VectorField<T> {
    kernel.projector.project_vector(values)
}

fn partials<T: Scalar>(f: &VectorField<T>, grid: &ReferenceGrid<T>) -> [[Vec<T>; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|s| grid.eval(&f[i].partial(s).expect("axis"))))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DivergenceReport<T> {
    /// Against `−4π δ^α e^{−τ} W̃^α 𝓙⁻¹`.
    pub residual: T,
    /// Against the literal `+4π δ^α e^{−3τ} W̃^α 𝓙⁻¹`.
    pub residual_literal: T,
}

fn relative_l2<T: Scalar>(grid: &ReferenceGrid<T>, a: &[T], b: &[T]) -> T {
    let num = grid.integrate(&a.iter().zip(b).map(|(x, y)| (*x - *y) * (*x - *y)).collect::<Vec<T>>());
    let den = grid.integrate(&b.iter().map(|y| *y * *y).collect::<Vec<T>>());
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

/// Relative L² residual of `𝓐^j_i ∂_j 𝒢^i` against `4πρ`-type targets,
/// from the projection of the sampled `𝒢`.
pub fn divergence_identity_residual<T: Scalar>(
    kernel: &GravityKernel<T>,
    grid: &ReferenceGrid<T>,
    profile: &DensityProfile<T>,
    fields: &StarFields<T>,
    self_field: &[Vec3<T>],
    tau: T,
) -> DivergenceReport<T> {
    let f = project_vector(kernel, self_field);
    let d = partials(&f, grid);
    let da = pow_alpha(profile.delta, profile.alpha);
    let four_pi = T::lit(4.0) * T::PI();
    let mut lhs = Vec::with_capacity(grid.len());
    let mut corrected = Vec::with_capacity(grid.len());
    let mut literal = Vec::with_capacity(grid.len());
    for n in 0..grid.len() {
        let a = &fields.a[n];
        let mut div = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                div += a[j][i] * d[i][j][n];
            }
        }
        lhs.push(div);
        let rho = da * profile.w_alpha(&grid.nodes[n]) / fields.j[n];
        corrected.push(-four_pi * (-tau).exp() * rho);
        literal.push(four_pi * (-T::lit(3.0) * tau).exp() * rho);
    }
    DivergenceReport {
        residual: relative_l2(grid, &lhs, &corrected),
        residual_literal: relative_l2(grid, &lhs, &literal),
    }
}

/// `max_nodes ‖nCurl 𝒢‖_F` with `[nCurl F]^i_j = 𝓐^s_j ∂_s F^i − 𝓐^s_i ∂_s F^j`,
/// from the projection of the sampled `𝒢`. Also returns the scale
/// `max_nodes ‖∇𝒢‖_F` for relative reporting.
pub fn curl_identity_residual<T: Scalar>(
    kernel: &GravityKernel<T>,
    grid: &ReferenceGrid<T>,
    fields: &StarFields<T>,
    self_field: &[Vec3<T>],
) -> (T, T) {
    let f = project_vector(kernel, self_field);
    let d = partials(&f, grid);
    let mut worst = T::zero();
    let mut scale = T::zero();
    for n in 0..grid.len() {
        let a = &fields.a[n];
        let mut grad = [[T::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = T::zero();
                for s in 0..3 {
                    acc += a[s][j] * d[i][s][n];
                }
                grad[i][j] = acc;
            }
        }
        let mut fro = T::zero();
        let mut gfro = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                let c = grad[i][j] - grad[j][i];
                fro += c * c;
                gfro += d[i][j][n] * d[i][j][n];
            }
        }
        worst = worst.max(fro.sqrt());
        scale = scale.max(gfro.sqrt());
    }
    (worst, scale)
}

/// Same residual at arbitrary reference points, with `𝓐` supplied per point.
pub fn curl_residual_at_points<T: Scalar>(
    kernel: &GravityKernel<T>,
    self_field: &[Vec3<T>],
    points: &[Vec3<T>],
    a_at: &[crate::linalg::Mat3<T>],
) -> T {
    let f = project_vector(kernel, self_field);
    let d: [[FieldRep<T>; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|s| f[i].partial(s).expect("axis")));
    let mut worst = T::zero();
    for (x, a) in points.iter().zip(a_at) {
        let dv: [[T; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|s| eval_at(&d[i][s], x)));
        let mut fro = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                let mut c = T::zero();
                for s in 0..3 {
                    c += a[s][j] * dv[i][s] - a[s][i] * dv[j][s];
                }
                fro += c * c;
            }
        }
        worst = worst.max(fro.sqrt());
    }
    worst
}

/// `max |ΛF^i − (x^i div F − x^k [Curl F]^k_i − ∂̸_ik F^k)|` over nodes,
/// with `[Curl F]^k_i = ∂_i F^k − ∂_k F^i`.
pub fn lambda_decomposition_residual<T: Scalar>(f: &VectorField<T>, grid: &ReferenceGrid<T>) -> T {
    let d = f[0].degree();
    let mut div = FieldRep::zero(d);
    for (k, fk) in f.iter().enumerate() {
        div = &div + &fk.partial(k).expect("axis");
    }
    let mut worst = T::zero();
    for i in 0..3 {
        let lhs = f[i].radial();
        let mut rhs = div.mul_coordinate(i).expect("axis");
        for k in 0..3 {
            if k == i {
                continue;
            }
            let curl = &f[k].partial(i).expect("axis") - &f[i].partial(k).expect("axis");
            rhs = &rhs - &curl.mul_coordinate(k).expect("axis");
            rhs = &rhs - &f[k].angular(i, k).expect("distinct axes");
        }
        let diff = &lhs - &rhs;
        for x in &grid.nodes {
            worst = worst.max(eval_at(&diff, x).abs());
        }
    }
    worst
}

/// Field magnitude `M / R²` of the profile's total mass outside its support.
pub fn shell_oracle<T: Scalar>(profile: &DensityProfile<T>, grid: &ReferenceGrid<T>, distance: T) -> Result<T> {
    point_mass_field(profile.total_mass(grid), distance)
}

/// `m / R²` for `R ≥ 1`.
pub fn point_mass_field<T: Scalar>(mass: T, distance: T) -> Result<T> {
    if !(distance >= T::one()) {
        return Err(Error::Domain(format!(
            "shell oracle needs an exterior point, got distance {distance}"
        )));
    }
    Ok(mass / (distance * distance))
}

/// Interior field magnitude `M(r)/r²` of the density `δ^α (1 − r²)^α` for
/// integer `α`, with `M(r) = 4π δ^α Σ_k C(α,k) (−1)^k r^{2k+3}/(2k+3)`.
pub fn parabolic_interior_field<T: Scalar>(delta: T, alpha: u32, r: T) -> T {
    if r == T::zero() {
        return T::zero();
    }
    let mut m = T::zero();
    let mut binom = T::one();
    for k in 0..=alpha {
        let sign = if k % 2 == 0 { T::one() } else { -T::one() };
        let p = 2 * k as i32 + 3;
        m += sign * binom * r.powi(p) / T::lit(p as f64);
        binom = binom * T::lit((alpha - k) as f64) / T::lit((k + 1) as f64);
    }
    T::lit(4.0) * T::PI() * delta.powi(alpha as i32) * m / (r * r)
}
