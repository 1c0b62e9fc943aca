//! `vacuumstars` command line tool.
//!
//! Exit codes: 0 success, 1 other failure, 2 invalid configuration,
//! 3 separation gate, 4 degenerate map mid-run, 5 identity suite failure.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use vacuumstars::diagnostics::energy_report;
use vacuumstars::domain::{FieldRep, VectorField};
use vacuumstars::gravity::potential_field;
use vacuumstars::identities::{verify, DEFAULT_SAMPLES, DEFAULT_SEED};
use vacuumstars::kinematics::{t_from_tau, FlowState};
use vacuumstars::pointmass::DEFAULT_R_MIN;
use vacuumstars::separation::{ssc_min, DEFAULT_PAIR_SAMPLES};
use vacuumstars::simulation::{build_model, particle_oracle, simulate, RunStatus, SimulationOutput};
use vacuumstars::{Error, RunConfig};

const THREADS_ENV: &str = "VACUUMSTARS_THREADS";

#[derive(Parser)]
#[command(name = "vacuumstars", version, about = "Expanding N-star Euler–Poisson lab")]
struct Cli {
    /// Seed for randomized sampling; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a configuration and write the time series.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write a matplotlib script for the CSV.
        #[arg(long)]
        plot: bool,
    },
    /// Report the strong separation condition.
    CheckSsc {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = DEFAULT_PAIR_SAMPLES)]
        samples: usize,
    },
    /// Run the identity suite and print a pass/fail table.
    Verify {
        #[arg(long, default_value_t = 16)]
        radial_shells: usize,
        #[arg(long, default_value_t = 110)]
        angular_points: usize,
        #[arg(long, default_value_t = 6)]
        degree: usize,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long)]
        json: bool,
    },
    /// Energy report for a dumped state.
    Norms {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        state: PathBuf,
    },
    /// Point-particle trajectories for the configured stars.
    Nbody {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "nbody.csv")]
        out: PathBuf,
        /// End of the run in physical time; defaults to `e^τ_end − 1`.
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct StateDump {
    tau: f64,
    degree: usize,
    stars: Vec<StarDump>,
}

#[derive(Debug, Serialize, Deserialize)]
struct StarDump {
    theta: [Vec<f64>; 3],
    theta_dot: [Vec<f64>; 3],
}

impl StateDump {
    fn from_state(state: &FlowState<f64>) -> Self {
        let coeffs = |v: &VectorField<f64>| std::array::from_fn(|i| v[i].coeffs().to_vec());
        Self {
            tau: state.tau,
            degree: state.theta.first().map(|t| t[0].degree()).unwrap_or(0),
            stars: state
                .theta
                .iter()
                .zip(&state.theta_dot)
                .map(|(t, d)| StarDump {
                    theta: coeffs(t),
                    theta_dot: coeffs(d),
                })
                .collect(),
        }
    }

    fn to_state(&self) -> Result<FlowState<f64>> {
        let field = |c: &[Vec<f64>; 3]| -> Result<VectorField<f64>> {
            let [a, b, d] = c;
            Ok([
                FieldRep::from_coeffs(self.degree, a.clone())?,
                FieldRep::from_coeffs(self.degree, b.clone())?,
                FieldRep::from_coeffs(self.degree, d.clone())?,
            ])
        };
        let mut theta = Vec::new();
        let mut theta_dot = Vec::new();
        for s in &self.stars {
            theta.push(field(&s.theta)?);
            theta_dot.push(field(&s.theta_dot)?);
        }
        Ok(FlowState {
            tau: self.tau,
            theta,
            theta_dot,
        })
    }
}

#[derive(Serialize)]
struct NormsOutput {
    tau: f64,
    order_cap: usize,
    stars: Vec<StarNorms>,
    damping: f64,
    tidal_norm: f64,
    self_norm: f64,
    min_separation: Option<f64>,
    mass: f64,
}

#[derive(Serialize)]
struct StarNorms {
    energy: f64,
    curl_energy: f64,
    x_theta: Vec<f64>,
    x_theta_dot: Vec<f64>,
    y_grad: Vec<f64>,
    y_div: Vec<f64>,
    y_curl_theta: Vec<f64>,
    y_curl_theta_dot: Vec<f64>,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Config(_)) => 2,
        Some(Error::SeparationFailed { .. } | Error::Overlap { .. }) => 3,
        Some(Error::DegenerateMap { .. } | Error::NearContact { .. }) => 4,
        _ => 1,
    }
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .map_err(|_| Error::Config(format!("{THREADS_ENV}: not a thread count: {v}")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn load(path: &Path, seed: Option<u64>) -> Result<RunConfig> {
    let mut cfg = RunConfig::from_path(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

fn write_series(path: &Path, cfg: &RunConfig, out: &SimulationOutput) -> Result<()> {
    let b = cfg.diagnostics.order_cap;
    let stars = out.final_state.stars();
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["tau".to_string(), "t".to_string()];
    for k in 0..stars {
        header.push(format!("S{b}_{k}"));
        header.push(format!("C{b}_{k}"));
    }
    header.extend(
        [
            "damping",
            "tidal_norm",
            "min_separation",
            "max_theta_inf",
            "J_min",
            "mass",
            "diameter_max",
            "min_distance",
        ]
        .map(String::from),
    );
    w.write_record(&header)?;
    for s in &out.snapshots {
        let mut row = vec![num(s.tau), num(s.t)];
        for k in 0..stars {
            row.push(num(out.history.star_energy_s(k, s.tau, b)));
            row.push(num(out.history.star_curl_energy_c(k, s.tau, b)));
        }
        row.push(num(s.energy.damping));
        row.push(num(s.energy.tidal_norm));
        row.push(num(s.energy.min_separation));
        row.push(num(s.max_theta_inf));
        row.push(num(s.report.j_min));
        row.push(num(s.energy.mass));
        row.push(num(s.diameters.iter().copied().fold(0.0, f64::max)));
        row.push(num(s.min_distance));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

const PLOT_SCRIPT: &str = r#"import sys
import pandas as pd
import matplotlib.pyplot as plt

df = pd.read_csv(sys.argv[1] if len(sys.argv) > 1 else "timeseries.csv")
fig, ax = plt.subplots(2, 2, figsize=(10, 7))
for c in [c for c in df.columns if c.startswith("S")]:
    ax[0, 0].plot(df.tau, df[c], label=c)
ax[0, 0].set_title("S_b per star")
ax[0, 1].semilogy(df.tau, df.tidal_norm)
ax[0, 1].set_title("tidal norm")
ax[1, 0].plot(df.t, df.diameter_max)
ax[1, 0].set_title("diameter vs t")
ax[1, 1].plot(df.t, df.min_distance)
ax[1, 1].set_title("min distance vs t")
for a in ax.flat:
    a.set_xlabel("tau" if a in (ax[0, 0], ax[0, 1]) else "t")
fig.tight_layout()
fig.savefig("timeseries.png", dpi=120)
"#;

fn cmd_simulate(config: &Path, out_dir: &Path, plot: bool, seed: Option<u64>) -> Result<u8> {
    let cfg = load(config, seed)?;
    let setup = cfg.setup()?;
    let out = simulate(&setup)?;
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    write_series(&out_dir.join("timeseries.csv"), &cfg, &out)?;
    let dump = StateDump::from_state(&out.final_state);
    serde_json::to_writer(File::create(out_dir.join("final_state.json"))?, &dump)?;
    if plot {
        File::create(out_dir.join("plot.py"))?.write_all(PLOT_SCRIPT.as_bytes())?;
    }
    eprintln!(
        "{} steps, {} snapshots, {} monitor warnings",
        out.steps.len(),
        out.snapshots.len(),
        out.monitor_warnings
    );
    match out.status {
        RunStatus::Completed => Ok(0),
        RunStatus::Aborted(e) => {
            eprintln!("run aborted: {e}");
            Ok(4)
        }
    }
}

fn cmd_check_ssc(config: &Path, samples: usize, seed: Option<u64>) -> Result<u8> {
    let cfg = load(config, seed)?;
    let setup = cfg.setup()?;
    if setup.frames.len() < 2 {
        return Err(Error::Config("check-ssc needs at least two stars".into()).into());
    }
    let r = ssc_min(&setup.frames, cfg.epsilon2, samples, cfg.seed)?;
    println!("{}", serde_json::to_string_pretty(&r)?);
    Ok(if r.pass && r.overlap_pass { 0 } else { 3 })
}

fn cmd_verify(shells: usize, angular: usize, degree: usize, samples: usize, json: bool, seed: u64) -> Result<u8> {
    let grid = vacuumstars::domain::ReferenceGrid::new(shells, angular, degree).map_err(anyhow::Error::from)?;
    let checks = verify(&grid, degree, samples, seed)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&checks)?);
    } else {
        println!("{:<36} {:>12} {:>10}  result", "identity", "residual", "threshold");
        for c in &checks {
            println!(
                "{:<36} {:>12.3e} {:>10.0e}  {}",
                c.name,
                c.value,
                c.threshold,
                if c.pass { "PASS" } else { "FAIL" }
            );
        }
    }
    Ok(if checks.iter().all(|c| c.pass) { 0 } else { 5 })
}

fn cmd_norms(config: &Path, state: &Path, seed: Option<u64>) -> Result<u8> {
    let cfg = load(config, seed)?;
    let setup = cfg.setup()?;
    let dump: StateDump = serde_json::from_reader(File::open(state).with_context(|| state.display().to_string())?)?;
    let state = dump.to_state()?;
    if state.stars() != setup.frames.len() {
        return Err(Error::Config(format!(
            "state has {} stars, config {}",
            state.stars(),
            setup.frames.len()
        ))
        .into());
    }
    let model = build_model(&setup)?;
    let fields = model.fields(&state)?;
    let gravity = if cfg.toggles.gravity {
        Some(potential_field(
            &model.kernel,
            &model.grid,
            &model.profiles,
            &fields.stars,
            state.tau,
            model.options.d_safe,
            false,
        )?)
    } else {
        None
    };
    let cap = cfg.diagnostics.order_cap;
    let r = energy_report(&state, &fields, gravity.as_ref(), cap, &model.grid, &model.profiles)?;
    let out = NormsOutput {
        tau: r.tau,
        order_cap: cap,
        stars: r
            .stars
            .iter()
            .map(|s| StarNorms {
                energy: s.energy(cap),
                curl_energy: s.curl_energy(cap),
                x_theta: s.x_theta.clone(),
                x_theta_dot: s.x_theta_dot.clone(),
                y_grad: s.y_grad.clone(),
                y_div: s.y_div.clone(),
                y_curl_theta: s.y_curl_theta.clone(),
                y_curl_theta_dot: s.y_curl_theta_dot.clone(),
            })
            .collect(),
        damping: r.damping,
        tidal_norm: r.tidal_norm,
        self_norm: r.self_norm,
        min_separation: r.min_separation.is_finite().then_some(r.min_separation),
        mass: r.mass,
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(0)
}

fn cmd_nbody(config: &Path, out: &Path, t_end: Option<f64>, dt: f64, seed: Option<u64>) -> Result<u8> {
    let cfg = load(config, seed)?;
    let setup = cfg.setup()?;
    let model = build_model(&setup)?;
    let initial = FlowState::initial(setup.initial_velocity.clone());
    let system = particle_oracle(&model, &initial)?;
    let t_end = t_end.unwrap_or_else(|| t_from_tau(cfg.time.tau_end));
    let tr = system.nbody_integrate(t_end, dt, DEFAULT_R_MIN)?;
    let mut w = csv::Writer::from_path(out)?;
    let mut header = vec!["t".to_string()];
    for k in 0..system.len() {
        for c in ["x", "y", "z", "vx", "vy", "vz"] {
            header.push(format!("{c}_{k}"));
        }
    }
    w.write_record(&header)?;
    for (i, t) in tr.times.iter().enumerate() {
        let mut row = vec![num(*t)];
        for (p, v) in tr.positions[i].iter().zip(&tr.velocities[i]) {
            row.extend(p.iter().chain(v.iter()).map(|x| num(*x)));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    init_threads()?;
    match cli.command {
        Command::Simulate { config, out, plot } => cmd_simulate(&config, &out, plot, cli.seed),
        Command::CheckSsc { config, samples } => cmd_check_ssc(&config, samples, cli.seed),
        Command::Verify {
            radial_shells,
            angular_points,
            degree,
            samples,
            json,
        } => cmd_verify(
            radial_shells,
            angular_points,
            degree,
            samples,
            json,
            cli.seed.unwrap_or(DEFAULT_SEED),
        ),
        Command::Norms { config, state } => cmd_norms(&config, &state, cli.seed),
        Command::Nbody { config, out, t_end, dt } => cmd_nbody(&config, &out, t_end, dt, cli.seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
