//! Run configuration, read from TOML.
//!
//! See `configs/` for one annotated example per command.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use selfsim::bvp::{ContinuationSchedule, MeshPolicy, NewtonSettings};
use selfsim::models::{make_diffusion, make_model, DiffusionKind, ModelDescriptor, Param};
use selfsim::system::{DiffusionModel, SpeedBand};
use selfsim::State;

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub diffusion: DiffusionConfig,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    pub wavecurve: Option<WaveCurveConfig>,
    pub relaxation: Option<RelaxationConfig>,
    #[serde(default)]
    pub validation: ValidationConfig,
    /// Default output directory; `--out` takes precedence.
    pub output: Option<PathBuf>,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    7
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum ParamValue {
    Integer(i64),
    Scalar(f64),
    Vector(Vec<f64>),
}

impl ParamValue {
    fn to_param(&self) -> Param {
        match self {
            ParamValue::Integer(v) => Param::Scalar(*v as f64),
            ParamValue::Scalar(v) => Param::Scalar(*v),
            ParamValue::Vector(v) => Param::Vector(v.clone()),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, ParamValue>,
    /// Speed bands `[[lower, upper], ...]` replacing the model defaults.
    pub bands: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DiffusionConfig {
    #[serde(default = "default_kind")]
    pub kind: String,
    #[serde(default)]
    pub eta: f64,
    #[serde(default = "default_eta_max")]
    pub eta_max: f64,
}

fn default_kind() -> String {
    "identity".into()
}

fn default_eta_max() -> f64 {
    0.2
}

impl Default for DiffusionConfig {
    fn default() -> Self {
        Self {
            kind: default_kind(),
            eta: 0.0,
            eta_max: default_eta_max(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub u_l: Option<Vec<f64>>,
    pub u_r: Option<Vec<f64>>,
    /// Boundary value for the half-space problem.
    pub u_b: Option<Vec<f64>>,
    /// Radius of the data ball; defaults to the model's ball radius.
    pub data_ball_radius: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    /// Explicit list; overrides the geometric fields when present.
    pub epsilons: Option<Vec<f64>>,
    #[serde(default = "default_start")]
    pub start: f64,
    #[serde(default = "default_factor")]
    pub factor: f64,
    #[serde(default = "default_min")]
    pub min: f64,
}

fn default_start() -> f64 {
    0.1
}
fn default_factor() -> f64 {
    0.3
}
fn default_min() -> f64 {
    1e-3
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            epsilons: None,
            start: default_start(),
            factor: default_factor(),
            min: default_min(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub initial_intervals: Option<usize>,
    pub max_nodes: Option<usize>,
    pub peclet_bound: Option<f64>,
    pub jump_fraction: Option<f64>,
    pub newton_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default = "yes")]
    pub measures: bool,
    #[serde(default = "yes")]
    pub linearized: bool,
    #[serde(default = "yes")]
    pub interactions: bool,
    #[serde(default = "yes")]
    pub entropy: bool,
    #[serde(default = "yes")]
    pub tv: bool,
    #[serde(default = "yes")]
    pub limit: bool,
    /// Fail `compare` with the assertion exit code unless the L¹ column
    /// decreases strictly.
    #[serde(default)]
    pub require_decreasing: bool,
}

fn yes() -> bool {
    true
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            measures: true,
            linearized: true,
            interactions: true,
            entropy: true,
            tv: true,
            limit: true,
            require_decreasing: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct WaveCurveConfig {
    pub family: usize,
    /// Explicit parameter grid; otherwise `m_min..=m_max` in `m_steps` intervals.
    pub m_grid: Option<Vec<f64>>,
    pub m_min: Option<f64>,
    pub m_max: Option<f64>,
    pub m_steps: Option<usize>,
    /// Cone half-width: tangents must satisfy `|l_j t| / |t| >= 1 - c`.
    #[serde(default = "default_cone")]
    pub c: f64,
    /// Viscosity at which the curve is traced; defaults to the schedule minimum.
    pub epsilon: Option<f64>,
    /// Extra base states for the Lipschitz probe (the curve base `u_l` is always included).
    #[serde(default)]
    pub lipschitz_bases: Vec<Vec<f64>>,
}

fn default_cone() -> f64 {
    0.1
}

impl WaveCurveConfig {
    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        if let Some(g) = &self.m_grid {
            if g.is_empty() || g.windows(2).any(|w| w[1] <= w[0]) {
                return Err(CliError::config("wavecurve.m_grid must be nonempty and increasing"));
            }
            return Ok(g.clone());
        }
        match (self.m_min, self.m_max, self.m_steps) {
            (Some(a), Some(b), Some(n)) if b > a && n > 0 => {
                Ok((0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect())
            }
            _ => Err(CliError::config(
                "wavecurve needs m_grid or m_min < m_max with m_steps > 0",
            )),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RelaxationConfig {
    pub speed: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    200
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            samples: default_samples(),
        }
    }
}

/// A parsed configuration together with the hash of its source text.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub hash: String,
    pub source: PathBuf,
}

pub fn load(path: &Path) -> Result<LoadedConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let config = parse(&text)?;
    Ok(LoadedConfig {
        config,
        hash: hash_text(&text),
        source: path.to_path_buf(),
    })
}

pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::config(format!("config parse error: {e}")))
}

pub fn hash_text(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Library objects built from a configuration.
pub struct Resolved {
    pub model: ModelDescriptor,
    pub diffusion: DiffusionModel,
    pub schedule: ContinuationSchedule,
    pub policy: MeshPolicy,
}

impl RunConfig {
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let params: BTreeMap<String, Param> =
            self.model.params.iter().map(|(k, v)| (k.clone(), v.to_param())).collect();
        let mut model = make_model(&self.model.name, &params).map_err(CliError::from_library)?;
        if let Some(bands) = &self.model.bands {
            if bands.len() != model.system.dimension {
                return Err(CliError::config(format!(
                    "model.bands has {} entries, system has {} families",
                    bands.len(),
                    model.system.dimension
                )));
            }
            let bands = bands.iter().map(|b| SpeedBand::new(b[0], b[1])).collect();
            model.system = model.system.clone().with_speed_bands(bands);
        }
        let kind: DiffusionKind = self.diffusion.kind.parse().map_err(CliError::from_library)?;
        let diffusion = if kind == DiffusionKind::Identity && self.diffusion.eta == 0.0 {
            let mut d = model.diffusion.clone();
            d.eta_max = self.diffusion.eta_max;
            d
        } else {
            make_diffusion(kind, self.diffusion.eta, self.diffusion.eta_max, &model.system.reference_state)
        };
        let schedule = match &self.schedule.epsilons {
            Some(list) => ContinuationSchedule::from_list(list.clone()),
            None => ContinuationSchedule::geometric(self.schedule.start, self.schedule.factor, self.schedule.min),
        }
        .map_err(CliError::from_library)?;
        let d = MeshPolicy::default();
        let policy = MeshPolicy {
            initial_intervals: self.mesh.initial_intervals.unwrap_or(d.initial_intervals),
            max_nodes: self.mesh.max_nodes.unwrap_or(d.max_nodes),
            peclet_bound: self.mesh.peclet_bound.unwrap_or(d.peclet_bound),
            jump_fraction: self.mesh.jump_fraction.unwrap_or(d.jump_fraction),
            newton: NewtonSettings {
                tolerance: self.mesh.newton_tolerance.unwrap_or(d.newton.tolerance),
                ..d.newton
            },
            ..d
        };
        Ok(Resolved {
            model,
            diffusion,
            schedule,
            policy,
        })
    }

    fn state(&self, name: &str, value: &Option<Vec<f64>>, n: usize) -> Result<State, CliError> {
        let v = value
            .as_ref()
            .ok_or_else(|| CliError::config(format!("data.{name} is required for this command")))?;
        if v.len() != n {
            return Err(CliError::config(format!(
                "data.{name} has {} components, system has {n}",
                v.len()
            )));
        }
        Ok(State::from_vec(v.clone()))
    }

    /// `(u_l, u_r)`, checked against the data ball: both within `δ1` of the
    /// reference state and `|u_r - u_l| <= 2 δ1`.
    pub fn riemann_data(&self, r: &Resolved) -> Result<(State, State), CliError> {
        let n = r.model.system.dimension;
        let ul = self.state("u_l", &self.data.u_l, n)?;
        let ur = self.state("u_r", &self.data.u_r, n)?;
        self.check_data_ball(r, &[("u_l", &ul), ("u_r", &ur)])?;
        Ok((ul, ur))
    }

    /// `(u_b, u_r)` for the half-space problem.
    pub fn boundary_data(&self, r: &Resolved) -> Result<(State, State), CliError> {
        let n = r.model.system.dimension;
        let ub = self.state("u_b", &self.data.u_b, n)?;
        let ur = self.state("u_r", &self.data.u_r, n)?;
        self.check_data_ball(r, &[("u_b", &ub), ("u_r", &ur)])?;
        Ok((ub, ur))
    }

    pub fn data_ball_radius(&self, r: &Resolved) -> f64 {
        self.data.data_ball_radius.unwrap_or(r.model.system.ball_radius)
    }

    fn check_data_ball(&self, r: &Resolved, states: &[(&str, &State); 2]) -> Result<(), CliError> {
        let delta1 = self.data_ball_radius(r);
        if !(delta1 > 0.0) {
            return Err(CliError::config("data.data_ball_radius must be positive"));
        }
        for (name, u) in states {
            let d = r.model.system.distance_from_reference(u);
            if d > delta1 {
                return Err(CliError::config(format!(
                    "data.{name} lies {d} from the reference state, outside the data ball of radius {delta1}"
                )));
            }
        }
        let gap = (states[1].1 - states[0].1).norm();
        if gap > 2.0 * delta1 {
            return Err(CliError::config(format!("|u_r - u_l| = {gap} exceeds 2 * data_ball_radius = {}", 2.0 * delta1)));
        }
        Ok(())
    }
}
