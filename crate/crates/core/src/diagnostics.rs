//! Weighted energy norms `X^b`, `Y^b`, the energy and curl functionals, the
//! damping functional and log-linear decay fits.

use crate::domain::poly::{mixed_derivative, mixed_orders, rect_derivative, rect_orders};
use crate::domain::{eval_at, FieldRep, ReferenceGrid, VectorField};
use crate::error::{Error, Result};
use crate::gravity::PotentialField;
use crate::kinematics::{FlowState, KinematicFields, StarFields};
use crate::profiles::{pow_alpha, DensityProfile};
use crate::scalar::Scalar;

pub const DEFAULT_ORDER_CAP: usize = 2;

fn values<T: Scalar>(grid: &ReferenceGrid<T>, f: &FieldRep<T>) -> Vec<T> {
    if f.degree() <= grid.degree() {
        grid.eval(f)
    } else {
        grid.nodes.iter().map(|x| eval_at(f, x)).collect()
    }
}

fn check_order(b: usize, cap: usize) -> Result<()> {
    if b > cap {
        return Err(Error::Config(format!("norm order {b} above cap {cap}")));
    }
    Ok(())
}

/// Per-order contributions to `‖F‖²_{X^b}`: entry `t` collects the terms with
/// `m + |n| = t` and `|k| = t`.
pub fn x_norm_by_order<T: Scalar>(
    f: &VectorField<T>,
    cap: usize,
    grid: &ReferenceGrid<T>,
    profile: &DensityProfile<T>,
) -> Result<Vec<T>> {
    let w: Vec<T> = grid.nodes.iter().map(|x| profile.w(x).max(T::zero())).collect();
    let mut out = vec![T::zero(); cap + 1];
    for (m, n) in mixed_orders(cap) {
        let order = m + n.iter().sum::<usize>();
        let mut sq = vec![T::zero(); grid.len()];
        for comp in f {
            let v = values(grid, &mixed_derivative(comp, m, n, cap)?);
            for (s, x) in sq.iter_mut().zip(v) {
                *s += x * x;
            }
        }
        let weight_pow = profile.alpha + T::lit(m as f64);
        let integrand: Vec<T> = (0..grid.len())
            .map(|i| grid.chi_values[i] * pow_alpha(w[i], weight_pow) * sq[i])
            .collect();
        out[order] += grid.integrate(&integrand);
    }
    for k in rect_orders(cap) {
        let order: usize = k.iter().sum();
        let mut sq = vec![T::zero(); grid.len()];
        for comp in f {
            let v = values(grid, &rect_derivative(comp, k, cap)?);
            for (s, x) in sq.iter_mut().zip(v) {
                *s += x * x;
            }
        }
        let integrand: Vec<T> = (0..grid.len())
            .map(|i| grid.chibar_values[i] * pow_alpha(w[i], profile.alpha) * sq[i])
            .collect();
        out[order] += grid.integrate(&integrand);
    }
    Ok(out)
}

/// `‖F‖²_{X^b}`.
pub fn x_norm<T: Scalar>(
    f: &VectorField<T>,
    b: usize,
    cap: usize,
    grid: &ReferenceGrid<T>,
    profile: &DensityProfile<T>,
) -> Result<T> {
    check_order(b, cap)?;
    Ok(x_norm_by_order(f, b, grid, profile)?.into_iter().fold(T::zero(), |a, v| a + v))
}

/// The operator inside a `Y^b` seminorm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZetaOperator {
    Gradient,
    Divergence,
    Curl,
}

/// `|𝒟 G|²` at every node from the node values of `∂_s G^i` (`d[i][s]`).
fn operator_square<T: Scalar>(op: ZetaOperator, fields: &StarFields<T>, d: &[[Vec<T>; 3]; 3]) -> Vec<T> {
    (0..fields.a.len())
        .map(|n| {
            let a = &fields.a[n];
            let mut g = [[T::zero(); 3]; 3];
            for (i, row) in g.iter_mut().enumerate() {
                for (j, e) in row.iter_mut().enumerate() {
                    for s in 0..3 {
                        *e += a[s][j] * d[i][s][n];
                    }
                }
            }
            match op {
                ZetaOperator::Gradient => g.iter().flatten().map(|v| *v * *v).fold(T::zero(), |x, y| x + y),
                ZetaOperator::Divergence => {
                    let t = g[0][0] + g[1][1] + g[2][2];
                    t * t
                }
                ZetaOperator::Curl => {
                    let mut acc = T::zero();
                    for i in 0..3 {
                        for j in 0..3 {
                            let c = g[i][j] - g[j][i];
                            acc += c * c;
                        }
                    }
                    acc
                }
            }
        })
        .collect()
}

fn apply_operator<T: Scalar>(
    op: ZetaOperator,
    g: &VectorField<T>,
    grid: &ReferenceGrid<T>,
    fields: &StarFields<T>,
) -> Result<Vec<T>> {
    let mut d: [[Vec<T>; 3]; 3] = Default::default();
    for (i, gi) in g.iter().enumerate() {
        for s in 0..3 {
            d[i][s] = values(grid, &gi.partial(s)?);
        }
    }
    Ok(operator_square(op, fields, &d))
}

/// Per-order contributions to `‖F‖²_{Y^b, 𝒟}`.
pub fn y_seminorm_by_order<T: Scalar>(
    f: &VectorField<T>,
    cap: usize,
    op: ZetaOperator,
    grid: &ReferenceGrid<T>,
    profile: &DensityProfile<T>,
    fields: &StarFields<T>,
) -> Result<Vec<T>> {
    let inv_alpha = profile.alpha.recip();
    let mut base = Vec::with_capacity(grid.len());
    for (i, x) in grid.nodes.iter().enumerate() {
        let j = fields.j[i];
        if !(j > T::zero()) {
            return Err(Error::DegenerateMap {
                star: 0,
                node: i,
                jacobian: j.to_f64_lossy(),
                j_min: 0.0,
            });
        }
        base.push((profile.w(x).max(T::zero()), j.powf(-inv_alpha)));
    }
    let mut out = vec![T::zero(); cap + 1];
    for (m, n) in mixed_orders(cap) {
        let order = m + n.iter().sum::<usize>();
        let g: VectorField<T> = [
            mixed_derivative(&f[0], m, n, cap)?,
            mixed_derivative(&f[1], m, n, cap)?,
            mixed_derivative(&f[2], m, n, cap)?,
        ];
        let sq = apply_operator(op, &g, grid, fields)?;
        let p = T::one() + profile.alpha + T::lit(m as f64);
        let integrand: Vec<T> = (0..grid.len())
            .map(|i| grid.chi_values[i] * pow_alpha(base[i].0, p) * base[i].1 * sq[i])
            .collect();
        out[order] += grid.integrate(&integrand);
    }
    for k in rect_orders(cap) {
        let order: usize = k.iter().sum();
        let g: VectorField<T> = [
            rect_derivative(&f[0], k, cap)?,
            rect_derivative(&f[1], k, cap)?,
            rect_derivative(&f[2], k, cap)?,
        ];
        let sq = apply_operator(op, &g, grid, fields)?;
        let p = T::one() + profile.alpha;
        let integrand: Vec<T> = (0..grid.len())
            .map(|i| grid.chibar_values[i] * pow_alpha(base[i].0, p) * base[i].1 * sq[i])
            .collect();
        out[order] += grid.integrate(&integrand);
    }
    Ok(out)
}

/// `‖F‖²_{Y^b, 𝒟}` with weight `W̃^{1+α+m} 𝓙^{−1/α}`.
pub fn y_seminorm<T: Scalar>(
    f: &VectorField<T>,
    b: usize,
    cap: usize,
    op: ZetaOperator,
    grid: &ReferenceGrid<T>,
    profile: &DensityProfile<T>,
    fields: &StarFields<T>,
) -> Result<T> {
    check_order(b, cap)?;
    Ok(y_seminorm_by_order(f, b, op, grid, profile, fields)?
        .into_iter()
        .fold(T::zero(), |a, v| a + v))
}

fn prefix<T: Scalar>(v: &[T]) -> Vec<T> {
    let mut acc = T::zero();
    v.iter()
        .map(|x| {
            acc += *x;
            acc
        })
        .collect()
}

/// Instantaneous terms for one star, each indexed by order `b = 0..=cap`.
#[derive(Clone, Debug, PartialEq)]
pub struct StarEnergy<T> {
    /// `‖θ‖²_{X^b}`.
    pub x_theta: Vec<T>,
    /// `(1/δ) e^{βτ} ‖∂_τθ‖²_{X^b}`.
    pub x_theta_dot: Vec<T>,
    /// `‖θ‖²_{Y^b,∇ζ}`.
    pub y_grad: Vec<T>,
    /// `(1/α) ‖θ‖²_{Y^b,divζ}`.
    pub y_div: Vec<T>,
    /// `‖θ‖²_{Y^b,Curlζ}`.
    pub y_curl_theta: Vec<T>,
    /// `‖∂_τθ‖²_{Y^b,Curlζ}`.
    pub y_curl_theta_dot: Vec<T>,
}

impl<T: Scalar> StarEnergy<T> {
    /// The combination whose running supremum is `S_b^κ`.
    pub fn energy(&self, b: usize) -> T {
        self.x_theta_dot[b] + self.x_theta[b] + self.y_grad[b] + self.y_div[b]
    }

    /// The combination whose running supremum is `C_b^κ`.
    pub fn curl_energy(&self, b: usize) -> T {
        self.y_curl_theta_dot[b] + self.y_curl_theta[b]
    }
}

pub fn star_energy<T: Scalar>(
    theta: &VectorField<T>,
    theta_dot: &VectorField<T>,
    tau: T,
    cap: usize,
    grid: &ReferenceGrid<T>,
    profile: &DensityProfile<T>,
    fields: &StarFields<T>,
) -> Result<StarEnergy<T>> {
    let scale = (profile.beta() * tau).exp() / profile.delta;
    let inv_alpha = profile.alpha.recip();
    Ok(StarEnergy {
        x_theta: prefix(&x_norm_by_order(theta, cap, grid, profile)?),
        x_theta_dot: prefix(&x_norm_by_order(theta_dot, cap, grid, profile)?)
            .into_iter()
            .map(|v| v * scale)
            .collect(),
        y_grad: prefix(&y_seminorm_by_order(theta, cap, ZetaOperator::Gradient, grid, profile, fields)?),
        y_div: prefix(&y_seminorm_by_order(theta, cap, ZetaOperator::Divergence, grid, profile, fields)?)
            .into_iter()
            .map(|v| v * inv_alpha)
            .collect(),
        y_curl_theta: prefix(&y_seminorm_by_order(theta, cap, ZetaOperator::Curl, grid, profile, fields)?),
        y_curl_theta_dot: prefix(&y_seminorm_by_order(theta_dot, cap, ZetaOperator::Curl, grid, profile, fields)?),
    })
}

/// `(2 − β) Σ_κ (1/δ) e^{βτ} ‖∂_τθ_κ‖²_{X^b}`.
pub fn damping<T: Scalar>(
    state: &FlowState<T>,
    b: usize,
    grid: &ReferenceGrid<T>,
    profiles: &[DensityProfile<T>],
) -> Result<T> {
    let mut total = T::zero();
    for (v, p) in state.theta_dot.iter().zip(profiles) {
        let scale = (p.beta() * state.tau).exp() / p.delta;
        total += (T::lit(2.0) - p.beta()) * scale * x_norm(v, b, b, grid, p)?;
    }
    Ok(total)
}

/// Snapshot diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyReport<T> {
    pub tau: T,
    pub cap: usize,
    pub stars: Vec<StarEnergy<T>>,
    pub damping: T,
    /// `Σ_κ ‖Σ_κ' 𝓘_{κ,κ'}‖_{L²}`.
    pub tidal_norm: T,
    /// `Σ_κ ‖𝒢_κ‖_{L²}`.
    pub self_norm: T,
    /// Smallest sampled tidal denominator.
    pub min_separation: T,
    /// Total mass `Σ_κ ∫ ρ_κ∘η_κ e^{3τ} 𝓙_κ`.
    pub mass: T,
}

pub fn energy_report<T: Scalar>(
    state: &FlowState<T>,
    fields: &KinematicFields<T>,
    gravity: Option<&PotentialField<T>>,
    cap: usize,
    grid: &ReferenceGrid<T>,
    profiles: &[DensityProfile<T>],
) -> Result<EnergyReport<T>> {
    let mut stars = Vec::with_capacity(profiles.len());
    let mut mass = T::zero();
    let e3 = (T::lit(3.0) * state.tau).exp();
    for (k, p) in profiles.iter().enumerate() {
        let f = &fields.stars[k];
        stars.push(star_energy(&state.theta[k], &state.theta_dot[k], state.tau, cap, grid, p, f)?);
        let da = pow_alpha(p.delta, p.alpha);
        let rho_j: Vec<T> = (0..grid.len())
            .map(|n| {
                let rho = da * (-T::lit(3.0) * state.tau).exp() * p.w_alpha(&grid.nodes[n]) / f.j[n];
                rho * e3 * f.j[n]
            })
            .collect();
        mass += grid.integrate(&rho_j);
    }
    let (tidal_norm, self_norm, min_separation) = match gravity {
        Some(g) => (
            (0..profiles.len()).map(|k| g.tidal_norm(grid, k)).fold(T::zero(), |a, v| a + v),
            (0..profiles.len()).map(|k| g.self_norm(grid, k)).fold(T::zero(), |a, v| a + v),
            g.min_separation,
        ),
        None => (T::zero(), T::zero(), T::infinity()),
    };
    Ok(EnergyReport {
        tau: state.tau,
        cap,
        stars,
        damping: damping(state, cap, grid, profiles)?,
        tidal_norm,
        self_norm,
        min_separation,
        mass,
    })
}

/// Snapshot sequence feeding the running suprema.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EnergyHistory<T> {
    pub reports: Vec<EnergyReport<T>>,
}

impl<T: Scalar> EnergyHistory<T> {
    pub fn new() -> Self {
        Self { reports: Vec::new() }
    }

    pub fn push(&mut self, r: EnergyReport<T>) {
        self.reports.push(r);
    }

    pub fn len(&self) -> usize {
        self.reports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reports.is_empty()
    }

    fn sup_window(&self, t1: T, t2: T, b: usize, f: impl Fn(&StarEnergy<T>, usize) -> T) -> Result<T> {
        let stars = self.reports.first().map(|r| r.stars.len()).unwrap_or(0);
        if let Some(r) = self.reports.first() {
            if b > r.cap {
                return Err(Error::Config(format!("order {b} above cap {}", r.cap)));
            }
        }
        let mut total = T::zero();
        for k in 0..stars {
            let sup = self
                .reports
                .iter()
                .filter(|r| r.tau >= t1 && r.tau <= t2)
                .map(|r| f(&r.stars[k], b))
                .fold(T::zero(), T::max);
            total += sup;
        }
        Ok(total)
    }

    /// `S_b(τ) = Σ_κ sup_{τ' ≤ τ} (…)` over recorded snapshots.
    pub fn energy_s(&self, tau: T, b: usize) -> Result<T> {
        self.sup_window(T::neg_infinity(), tau, b, |s, b| s.energy(b))
    }

    /// `C_b(τ)`.
    pub fn curl_energy_c(&self, tau: T, b: usize) -> Result<T> {
        self.sup_window(T::neg_infinity(), tau, b, |s, b| s.curl_energy(b))
    }

    /// `S_b^κ(τ)` for one star.
    pub fn star_energy_s(&self, kappa: usize, tau: T, b: usize) -> T {
        self.reports
            .iter()
            .filter(|r| r.tau <= tau)
            .map(|r| r.stars[kappa].energy(b))
            .fold(T::zero(), T::max)
    }

    pub fn star_curl_energy_c(&self, kappa: usize, tau: T, b: usize) -> T {
        self.reports
            .iter()
            .filter(|r| r.tau <= tau)
            .map(|r| r.stars[kappa].curl_energy(b))
            .fold(T::zero(), T::max)
    }

    /// Truncated `S_b(τ₁, τ₂)`: suprema over snapshots in `[τ₁, τ₂]`.
    pub fn truncated_s(&self, t1: T, t2: T, b: usize) -> Result<T> {
        if t1 > t2 {
            return Err(Error::Argument(format!("empty window [{t1}, {t2}]")));
        }
        self.sup_window(t1, t2, b, |s, b| s.energy(b))
    }

    /// Series `(τ, S_b(τ))` at every snapshot.
    pub fn energy_series(&self, b: usize) -> Result<Vec<(T, T)>> {
        self.reports.iter().map(|r| Ok((r.tau, self.energy_s(r.tau, b)?))).collect()
    }

    /// Worst violation of `S(τ₁,τ₂) ≤ S(τ₂) ≤ S(τ₁,τ₂) + S(τ₁)` over all
    /// snapshot pairs, as `max(lhs − rhs)`; nonpositive means the chain holds.
    pub fn truncation_chain_violation(&self, b: usize) -> Result<T> {
        let taus: Vec<T> = self.reports.iter().map(|r| r.tau).collect();
        let mut worst = T::neg_infinity();
        for (i, &t1) in taus.iter().enumerate() {
            let s1 = self.energy_s(t1, b)?;
            for &t2 in &taus[i..] {
                let st = self.truncated_s(t1, t2, b)?;
                let s2 = self.energy_s(t2, b)?;
                worst = worst.max(st - s2).max(s2 - st - s1);
            }
        }
        Ok(worst)
    }
}

/// Ordinary least squares of `log(value)` against `τ`: `(slope, intercept)`.
pub fn decay_fit<T: Scalar>(series: &[(T, T)]) -> Result<(T, T)> {
    if series.len() < 5 {
        return Err(Error::Argument(format!("decay fit needs ≥ 5 samples, got {}", series.len())));
    }
    if let Some((t, v)) = series.iter().find(|(_, v)| !(*v > T::zero())) {
        return Err(Error::Argument(format!("nonpositive value {v} at τ = {t}")));
    }
    let n = T::lit(series.len() as f64);
    let mt = series.iter().map(|p| p.0).fold(T::zero(), |a, b| a + b) / n;
    let my = series.iter().map(|p| p.1.ln()).fold(T::zero(), |a, b| a + b) / n;
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    for (t, v) in series {
        let dt = *t - mt;
        sxy += dt * (v.ln() - my);
        sxx += dt * dt;
    }
    if sxx == T::zero() {
        return Err(Error::Argument("decay fit needs distinct τ values".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mt))
}

/// Ordinary least squares `value ≈ slope·t + intercept` with the largest
/// relative deviation from the fitted line.
pub fn linear_fit<T: Scalar>(series: &[(T, T)]) -> Result<(T, T, T)> {
    if series.len() < 2 {
        return Err(Error::Argument("linear fit needs ≥ 2 samples".into()));
    }
    let n = T::lit(series.len() as f64);
    let mt = series.iter().map(|p| p.0).fold(T::zero(), |a, b| a + b) / n;
    let my = series.iter().map(|p| p.1).fold(T::zero(), |a, b| a + b) / n;
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    for (t, v) in series {
        sxy += (*t - mt) * (*v - my);
        sxx += (*t - mt) * (*t - mt);
    }
    if sxx == T::zero() {
        return Err(Error::Argument("linear fit needs distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mt;
    let worst = series
        .iter()
        .map(|(t, v)| ((*v - (slope * *t + intercept)) / *v).abs())
        .fold(T::zero(), T::max);
    Ok((slope, intercept, worst))
}
