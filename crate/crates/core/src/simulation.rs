//! Run orchestration: separation gate, stepping loop and snapshot
//! diagnostics.

use crate::config::RunSetup;
use crate::diagnostics::{energy_report, EnergyHistory, EnergyReport};
use crate::dynamics::{theta_sup_sum, Model, StepReport};
use crate::error::{Error, Result};
use crate::kinematics::{t_from_tau, zeta, FlowState, StarFrame};
use crate::linalg::{norm, sub, Vec3};
use crate::pointmass::{fluid_centroid, ParticleSystem};
use crate::profiles::sphere_samples;
use crate::separation::{min_center_distance, ssc_min, DEFAULT_PAIR_SAMPLES};

pub const BOUNDARY_SAMPLES: usize = 200;

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub step: usize,
    pub tau: f64,
    pub t: f64,
    pub state: FlowState<f64>,
    pub report: StepReport<f64>,
    pub energy: EnergyReport<f64>,
    /// Eulerian diameter of each star, from boundary samples.
    pub diameters: Vec<f64>,
    /// Eulerian mass centroids.
    pub centroids: Vec<Vec3<f64>>,
    /// Smallest Eulerian distance between boundary samples of different stars.
    pub min_distance: f64,
    /// `max_κ ‖θ_κ‖_∞` over the nodes.
    pub max_theta_inf: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunStatus {
    Completed,
    Aborted(Error),
}

#[derive(Clone, Debug)]
pub struct SimulationOutput {
    pub snapshots: Vec<Snapshot>,
    pub steps: Vec<StepReport<f64>>,
    pub history: EnergyHistory<f64>,
    pub final_state: FlowState<f64>,
    pub status: RunStatus,
    pub monitor_warnings: usize,
}

impl SimulationOutput {
    pub fn completed(&self) -> bool {
        self.status == RunStatus::Completed
    }
}

/// Refuses configurations failing the strong separation condition or with
/// overlapping initial domains.
pub fn separation_gate(frames: &[StarFrame<f64>], epsilon2: f64, seed: u64) -> Result<()> {
    if frames.len() < 2 {
        return Ok(());
    }
    if let Some(d) = min_center_distance(frames) {
        if d <= 2.0 {
            return Err(Error::Overlap { min_distance: d });
        }
    }
    let r = ssc_min(frames, epsilon2, DEFAULT_PAIR_SAMPLES, seed)?;
    if !r.pass {
        return Err(Error::SeparationFailed {
            value: r.ssc_value,
            required: r.required,
        });
    }
    Ok(())
}

/// Eulerian boundary points `e^τ ζ(x)`, `|x| = 1`, for every star.
pub fn boundary_points(frames: &[StarFrame<f64>], state: &FlowState<f64>, samples: &[Vec3<f64>]) -> Vec<Vec<Vec3<f64>>> {
    let e = state.tau.exp();
    frames
        .iter()
        .zip(&state.theta)
        .map(|(f, th)| {
            samples
                .iter()
                .map(|x| {
                    let z = zeta(f, th, state.tau, x);
                    [e * z[0], e * z[1], e * z[2]]
                })
                .collect()
        })
        .collect()
}

pub fn diameter(points: &[Vec3<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            d = d.max(norm(sub(points[i], points[j])));
        }
    }
    d
}

pub fn min_set_distance(boundaries: &[Vec<Vec3<f64>>]) -> f64 {
    let mut d = f64::INFINITY;
    for k in 0..boundaries.len() {
        for k2 in (k + 1)..boundaries.len() {
            for p in &boundaries[k] {
                for q in &boundaries[k2] {
                    d = d.min(norm(sub(*p, *q)));
                }
            }
        }
    }
    d
}

/// Number of steps and the uniform step size reaching `tau_end`.
pub fn step_plan(tau_end: f64, dtau: f64) -> (usize, f64) {
    let n = ((tau_end / dtau) - 1e-9).ceil().max(1.0) as usize;
    (n, tau_end / n as f64)
}

pub fn build_model(setup: &RunSetup) -> Result<Model<f64>> {
    let grid = setup.config.build_grid()?;
    Model::new(
        grid,
        setup.config.grid.degree,
        setup.profiles.clone(),
        setup.frames.clone(),
        setup.options.clone(),
    )
}

/// Evolves `τ ∈ [0, τ_end]`. Gate failures and setup errors are returned as
/// `Err`; a degenerate map mid-run ends the run with an aborted status.
pub fn simulate(setup: &RunSetup) -> Result<SimulationOutput> {
    let cfg = &setup.config;
    separation_gate(&setup.frames, cfg.epsilon2, cfg.seed)?;
    let model = build_model(setup)?;
    let state = FlowState::initial(setup.initial_velocity.clone());
    run_model(&model, state, cfg.time.tau_end, cfg.time.dtau, cfg.time.snapshot_every, cfg.diagnostics.order_cap)
}

pub fn run_model(
    model: &Model<f64>,
    mut state: FlowState<f64>,
    tau_end: f64,
    dtau: f64,
    snapshot_every: usize,
    cap: usize,
) -> Result<SimulationOutput> {
    let (n, h) = step_plan(tau_end, dtau);
    let every = snapshot_every.max(1);
    let samples = sphere_samples::<f64>(BOUNDARY_SAMPLES);
    let mut out = SimulationOutput {
        snapshots: Vec::new(),
        steps: Vec::new(),
        history: EnergyHistory::new(),
        final_state: state.clone(),
        status: RunStatus::Completed,
        monitor_warnings: 0,
    };
    for step in 0..=n {
        let dt = if step == n { 0.0 } else { h };
        let outcome = match model.step(&state, dt) {
            Ok(o) => o,
            Err(e @ (Error::DegenerateMap { .. } | Error::NearContact { .. })) => {
                out.status = RunStatus::Aborted(e);
                break;
            }
            Err(e) => return Err(e),
        };
        if outcome.report.monitor_warning {
            out.monitor_warnings += 1;
        }
        if step % every == 0 || step == n {
            let energy = energy_report(
                &state,
                &outcome.forcing.fields,
                outcome.forcing.gravity.as_ref(),
                cap,
                &model.grid,
                &model.profiles,
            )?;
            out.history.push(energy.clone());
            out.snapshots.push(snapshot(model, step, &state, &outcome, energy, &samples));
        }
        if step < n {
            out.steps.push(outcome.report);
        }
        state = outcome.state;
        if step == n - 1 {
            // pin against accumulated rounding
            state.tau = tau_end;
        }
    }
    out.final_state = state;
    Ok(out)
}

/// Point particles matching each star: mass `δ^α ∫ W̃^α`, position the
/// initial mass centroid and velocity the `W̃^α`-weighted mean of
/// `μ + ∂_τθ(0)`.
pub fn particle_oracle(model: &Model<f64>, initial: &FlowState<f64>) -> Result<ParticleSystem<f64>> {
    let fields = model.fields(initial)?;
    let grid = &model.grid;
    let mut positions = Vec::new();
    let mut velocities = Vec::new();
    let mut masses = Vec::new();
    for (k, p) in model.profiles.iter().enumerate() {
        positions.push(fluid_centroid(grid, p, &fields.stars[k], initial.tau));
        let td: Vec<Vec<f64>> = initial.theta_dot[k].iter().map(|f| grid.eval(f)).collect();
        let mut v = [0.0; 3];
        let mut den = 0.0;
        for (n, x) in grid.nodes.iter().enumerate() {
            let q = grid.weights[n] * p.w_alpha(x);
            let mu = model.frames[k].mu.eval(x);
            den += q;
            for i in 0..3 {
                v[i] += q * (mu[i] + td[i][n]);
            }
        }
        velocities.push([v[0] / den, v[1] / den, v[2] / den]);
        masses.push(p.total_mass(grid));
    }
    ParticleSystem::new(positions, velocities, masses)
}

fn snapshot(
    model: &Model<f64>,
    step: usize,
    state: &FlowState<f64>,
    outcome: &crate::dynamics::StepOutcome<f64>,
    energy: EnergyReport<f64>,
    samples: &[Vec3<f64>],
) -> Snapshot {
    let boundaries = boundary_points(&model.frames, state, samples);
    let centroids = model
        .profiles
        .iter()
        .zip(&outcome.forcing.fields.stars)
        .map(|(p, f)| fluid_centroid(&model.grid, p, f, state.tau))
        .collect();
    let max_theta_inf = state
        .theta
        .iter()
        .map(|th| theta_sup_sum(&model.grid, std::slice::from_ref(th)))
        .fold(0.0, f64::max);
    Snapshot {
        step,
        tau: state.tau,
        t: t_from_tau(state.tau),
        state: state.clone(),
        report: outcome.report.clone(),
        energy,
        diameters: boundaries.iter().map(|b| diameter(b)).collect(),
        centroids,
        min_distance: min_set_distance(&boundaries),
        max_theta_inf,
    }
}
