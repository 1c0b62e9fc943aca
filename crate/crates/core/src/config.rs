//! Run configuration: a versioned TOML schema, validated into typed model
//! inputs. Unknown keys are rejected.
//!
//! ```toml
//! schema_version = 1
//! gamma = 1.5
//! delta = 1e-3
//!
//! [grid]
//! radial_shells = 6
//! angular_points = 98
//! degree = 6
//!
//! [time]
//! tau_end = 3.0
//! dtau = 0.01
//!
//! [[stars]]
//! center = [4.0, 0.0, 0.0]
//! velocity = { linear = 0.01 }
//! ```

use serde::{Deserialize, Serialize};

use crate::domain::{FieldRep, ReferenceGrid, VectorField};
use crate::dynamics::{
    ModelOptions, DEFAULT_DTAU, DEFAULT_DTAU_MAX, DEFAULT_EPSILON2, DYNAMICS_ANGULAR_POINTS, DYNAMICS_RADIAL_SHELLS,
};
use crate::error::{Error, Result};
use crate::gravity::DEFAULT_D_SAFE;
use crate::kinematics::{MuSpec, StarFrame, DEFAULT_J_MIN};
use crate::linalg::Vec3;
use crate::profiles::{make_profile, DensityProfile, ProfileKind};
use crate::separation::generate_hexagon;

pub const SCHEMA_VERSION: u32 = 1;
pub const MAX_RADIAL_SHELLS: usize = 64;
pub const MAX_ANGULAR_POINTS: usize = 4096;
pub const MAX_DEGREE: usize = 10;
pub const MAX_ORDER_CAP: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    pub delta: f64,
    #[serde(default = "default_epsilon2")]
    pub epsilon2: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub toggles: Toggles,
    #[serde(default)]
    pub stars: Vec<StarConfig>,
    /// Six stars on a regular hexagon, added after `stars`.
    #[serde(default)]
    pub hexagon: Option<HexagonConfig>,
}

fn default_gamma() -> f64 {
    1.5
}

fn default_epsilon2() -> f64 {
    DEFAULT_EPSILON2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub radial_shells: usize,
    pub angular_points: usize,
    pub degree: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            radial_shells: DYNAMICS_RADIAL_SHELLS,
            angular_points: DYNAMICS_ANGULAR_POINTS,
            degree: 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub tau_end: f64,
    pub dtau: f64,
    pub dtau_max: f64,
    /// Snapshot every this many steps.
    pub snapshot_every: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            tau_end: 3.0,
            dtau: DEFAULT_DTAU,
            dtau_max: DEFAULT_DTAU_MAX,
            snapshot_every: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsConfig {
    pub order_cap: usize,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self { order_cap: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Toggles {
    pub gravity: bool,
    /// Evolve with the gradient-form right-hand side.
    pub gradient_form: bool,
    pub identity_checks: bool,
}

impl Default for Toggles {
    fn default() -> Self {
        Self {
            gravity: true,
            gradient_form: false,
            identity_checks: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StarConfig {
    pub center: [f64; 3],
    /// Defaults to `μ ≡ center`.
    #[serde(default)]
    pub mu: Option<MuConfig>,
    #[serde(default)]
    pub profile: ProfileConfig,
    #[serde(default)]
    pub velocity: VelocityConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HexagonConfig {
    pub radius: f64,
    #[serde(default)]
    pub profile: ProfileConfig,
    #[serde(default)]
    pub velocity: VelocityConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, untagged)]
pub enum MuConfig {
    Constant { constant: [f64; 3] },
    Affine { offset: [f64; 3], matrix: [[f64; 3]; 3] },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileConfig {
    pub kind: String,
    pub params: Vec<f64>,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            kind: "parabolic".into(),
            params: Vec::new(),
        }
    }
}

/// Initial `∂_τθ = linear·x + rotation × x + constant`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VelocityConfig {
    pub linear: f64,
    pub rotation: [f64; 3],
    pub constant: [f64; 3],
}

impl VelocityConfig {
    pub fn field(&self, degree: usize) -> VectorField<f64> {
        let w = self.rotation;
        std::array::from_fn(|i| {
            let mut f = FieldRep::constant(degree, self.constant[i]);
            let x = |k: usize, c: f64| FieldRep::coordinate(degree, k).scale(c);
            f = &f + &x(i, self.linear);
            // (ω × x)_i
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            f = &f + &x(k, w[j]);
            f = &f - &x(j, w[k]);
            f
        })
    }
}

/// Membership in `{1 + 1/n : n ≥ 2} ∪ (1, 14/13)`.
pub fn gamma_admissible(gamma: f64) -> bool {
    if gamma > 1.0 && gamma < 14.0 / 13.0 {
        return true;
    }
    if !(gamma > 1.0) {
        return false;
    }
    let n = 1.0 / (gamma - 1.0);
    let r = n.round();
    r >= 2.0 && (n - r).abs() < 1e-9
}

/// Everything a run needs, built from a validated config.
#[derive(Clone, Debug)]
pub struct RunSetup {
    pub config: RunConfig,
    pub profiles: Vec<DensityProfile<f64>>,
    pub frames: Vec<StarFrame<f64>>,
    pub initial_velocity: Vec<VectorField<f64>>,
    pub options: ModelOptions<f64>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Every violation, with its field path.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            v.push(format!("schema_version: expected {SCHEMA_VERSION}, got {}", self.schema_version));
        }
        if !gamma_admissible(self.gamma) {
            v.push(format!("gamma: {} is neither 1 + 1/n (n ≥ 2) nor in (1, 14/13)", self.gamma));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            v.push(format!("delta: must be positive, got {}", self.delta));
        }
        if !(self.epsilon2 > 0.0 && self.epsilon2 < 1.0) {
            v.push(format!("epsilon2: must lie in (0, 1), got {}", self.epsilon2));
        }
        let g = &self.grid;
        if !(2..=MAX_RADIAL_SHELLS).contains(&g.radial_shells) {
            v.push(format!("grid.radial_shells: {} outside [2, {MAX_RADIAL_SHELLS}]", g.radial_shells));
        }
        if !(6..=MAX_ANGULAR_POINTS).contains(&g.angular_points) {
            v.push(format!("grid.angular_points: {} outside [6, {MAX_ANGULAR_POINTS}]", g.angular_points));
        }
        if !(1..=MAX_DEGREE).contains(&g.degree) {
            v.push(format!("grid.degree: {} outside [1, {MAX_DEGREE}]", g.degree));
        }
        let t = &self.time;
        if !(t.tau_end > 0.0 && t.tau_end.is_finite()) {
            v.push(format!("time.tau_end: must be positive, got {}", t.tau_end));
        }
        if !(t.dtau_max > 0.0) {
            v.push(format!("time.dtau_max: must be positive, got {}", t.dtau_max));
        }
        if !(t.dtau > 0.0 && t.dtau <= t.dtau_max) {
            v.push(format!("time.dtau: {} outside (0, dtau_max = {}]", t.dtau, t.dtau_max));
        }
        if t.snapshot_every == 0 {
            v.push("time.snapshot_every: must be at least 1".into());
        }
        if self.diagnostics.order_cap > MAX_ORDER_CAP {
            v.push(format!(
                "diagnostics.order_cap: {} above {MAX_ORDER_CAP}",
                self.diagnostics.order_cap
            ));
        }
        if self.stars.is_empty() && self.hexagon.is_none() {
            v.push("stars: at least one star (or a hexagon) is required".into());
        }
        if let Some(h) = &self.hexagon {
            if !(h.radius > 0.0) {
                v.push(format!("hexagon.radius: must be positive, got {}", h.radius));
            }
            if let Err(e) = ProfileKind::<f64>::from_name(&h.profile.kind, &h.profile.params) {
                v.push(format!("hexagon.profile: {e}"));
            }
        }
        for (k, s) in self.stars.iter().enumerate() {
            if s.center.iter().any(|c| !c.is_finite()) {
                v.push(format!("stars[{k}].center: not finite"));
            }
            if let Err(e) = ProfileKind::<f64>::from_name(&s.profile.kind, &s.profile.params) {
                v.push(format!("stars[{k}].profile: {e}"));
            }
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v.join("; ")))
        }
    }

    pub fn build_grid(&self) -> Result<ReferenceGrid<f64>> {
        ReferenceGrid::new(self.grid.radial_shells, self.grid.angular_points, self.grid.degree)
    }

    pub fn setup(&self) -> Result<RunSetup> {
        self.validate()?;
        let mut profiles = Vec::new();
        let mut frames = Vec::new();
        let mut velocity = Vec::new();
        let deg = self.grid.degree;
        for (k, s) in self.stars.iter().enumerate() {
            let kind = ProfileKind::from_name(&s.profile.kind, &s.profile.params)?;
            profiles.push(
                make_profile(kind, s.center, self.gamma, self.delta)
                    .map_err(|e| Error::Config(format!("stars[{k}].profile: {e}")))?,
            );
            let mu = match &s.mu {
                None => MuSpec::Constant(s.center),
                Some(MuConfig::Constant { constant }) => MuSpec::Constant(*constant),
                Some(MuConfig::Affine { offset, matrix }) => MuSpec::Affine {
                    offset: *offset,
                    matrix: *matrix,
                },
            };
            frames.push(StarFrame { center: s.center, mu });
            velocity.push(s.velocity.field(deg));
        }
        if let Some(h) = &self.hexagon {
            for f in generate_hexagon(h.radius)? {
                let kind = ProfileKind::from_name(&h.profile.kind, &h.profile.params)?;
                profiles.push(make_profile(kind, f.center, self.gamma, self.delta)?);
                velocity.push(h.velocity.field(deg));
                frames.push(f);
            }
        }
        Ok(RunSetup {
            config: self.clone(),
            profiles,
            frames,
            initial_velocity: velocity,
            options: ModelOptions {
                gravity: self.toggles.gravity,
                j_min: DEFAULT_J_MIN,
                d_safe: DEFAULT_D_SAFE,
                epsilon2: self.epsilon2,
                dtau_max: self.time.dtau_max,
                identity_checks: self.toggles.identity_checks,
                gradient_form: self.toggles.gradient_form,
            },
        })
    }
}

/// A ready-made hexagon run.
pub fn hexagon_config(radius: f64, delta: f64, velocity: VelocityConfig) -> RunConfig {
    RunConfig {
        schema_version: SCHEMA_VERSION,
        gamma: 1.5,
        delta,
        epsilon2: DEFAULT_EPSILON2,
        seed: 0,
        grid: GridConfig::default(),
        time: TimeConfig::default(),
        diagnostics: DiagnosticsConfig::default(),
        toggles: Toggles::default(),
        stars: Vec::new(),
        hexagon: Some(HexagonConfig {
            radius,
            profile: ProfileConfig::default(),
            velocity,
        }),
    }
}

/// Stars at the given centres with `μ ≡ x̄`, parabolic profiles, at rest.
pub fn stars_config(centers: &[Vec3<f64>], delta: f64) -> RunConfig {
    let mut cfg = hexagon_config(1.0, delta, VelocityConfig::default());
    cfg.hexagon = None;
    cfg.stars = centers
        .iter()
        .map(|c| StarConfig {
            center: *c,
            mu: None,
            profile: ProfileConfig::default(),
            velocity: VelocityConfig::default(),
        })
        .collect();
    cfg
}
