//! Shipped example systems, diffusion models and exact Riemann oracles.

mod burgers;
mod diffusion;
mod exact;
mod psystem;
mod shallow_water;
mod toy;

use std::collections::BTreeMap;

pub use burgers::burgers;
pub use diffusion::{make_diffusion, DiffusionKind};
pub use exact::{exact_riemann, Fan, RiemannSolution, Wave};
pub use psystem::{psystem, psystem_lax_curve, psystem_lax_point_with_amplitude};
pub use shallow_water::shallow_water;
pub use toy::{nonconservative_toy, nonconservative_toy_with};

use crate::error::{Error, Result};
use crate::system::{DiffusionModel, EntropyPair, HyperbolicSystem};

/// Padding added around sampled eigenvalue ranges when models build their
/// speed bands.
pub const BAND_PAD: f64 = 0.05;

/// Which closed-form or curve-intersection oracle a model carries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Oracle {
    Burgers,
    PSystem { gamma: f64 },
    ShallowWater { gravity: f64 },
}

/// A named model with its default diffusion and entropy pairs.
#[derive(Debug, Clone)]
pub struct ModelDescriptor {
    pub name: String,
    pub parameters: BTreeMap<String, Param>,
    pub system: HyperbolicSystem,
    pub diffusion: DiffusionModel,
    pub entropy_pairs: Vec<EntropyPair>,
    pub oracle: Option<Oracle>,
}

/// Constructor parameter value.
#[derive(Debug, Clone, PartialEq)]
pub enum Param {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl Param {
    pub fn scalar(&self) -> Option<f64> {
        match self {
            Param::Scalar(v) => Some(*v),
            Param::Vector(v) if v.len() == 1 => Some(v[0]),
            _ => None,
        }
    }

    pub fn vector(&self) -> Vec<f64> {
        match self {
            Param::Scalar(v) => vec![*v],
            Param::Vector(v) => v.clone(),
        }
    }
}

pub const MODEL_NAMES: [&str; 4] = ["burgers", "psystem", "shallow_water", "toy"];

fn scalar_param(params: &BTreeMap<String, Param>, key: &str, default: f64) -> Result<f64> {
    match params.get(key) {
        None => Ok(default),
        Some(p) => p
            .scalar()
            .ok_or_else(|| Error::InvalidInput(format!("parameter '{key}' must be a scalar"))),
    }
}

fn vector_param(params: &BTreeMap<String, Param>, key: &str, default: &[f64]) -> Vec<f64> {
    params.get(key).map(Param::vector).unwrap_or_else(|| default.to_vec())
}

/// Builds a model from the registry by name.
///
/// Recognized parameters (all optional):
/// - `burgers`: `reference`, `radius`, `half_width`
/// - `psystem`: `gamma`, `reference` (v*), `radius`, `half_width`
/// - `shallow_water`: `gravity`, `reference` ([h*, m*]), `radius`, `half_width`
/// - `toy`: `coupling`, `radius`, `half_width`
pub fn make_model(name: &str, params: &BTreeMap<String, Param>) -> Result<ModelDescriptor> {
    let mut model = match name {
        "burgers" => {
            let r = vector_param(params, "reference", &[0.0]);
            burgers(
                r[0],
                scalar_param(params, "radius", 0.3)?,
                scalar_param(params, "half_width", 1.0)?,
            )
        }
        "psystem" => {
            let r = vector_param(params, "reference", &[1.0]);
            psystem(
                scalar_param(params, "gamma", 2.0)?,
                r[0],
                scalar_param(params, "radius", 0.1)?,
                scalar_param(params, "half_width", 2.5)?,
            )?
        }
        "shallow_water" => {
            let r = vector_param(params, "reference", &[1.0, 0.0]);
            if r.len() != 2 {
                return Err(Error::InvalidInput("shallow_water reference must be [h, m]".into()));
            }
            shallow_water(
                scalar_param(params, "gravity", 1.0)?,
                (r[0], r[1]),
                scalar_param(params, "radius", 0.1)?,
                scalar_param(params, "half_width", 1.6)?,
            )?
        }
        "toy" => {
            let mut m = nonconservative_toy(scalar_param(params, "coupling", 0.5)?)?;
            let radius = scalar_param(params, "radius", m.system.ball_radius)?;
            let half_width = scalar_param(params, "half_width", m.system.domain_half_width)?;
            if radius != m.system.ball_radius || half_width != m.system.domain_half_width {
                m = toy::nonconservative_toy_with(
                    scalar_param(params, "coupling", 0.5)?,
                    radius,
                    half_width,
                )?;
            }
            m
        }
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown model '{other}' (known: {})",
                MODEL_NAMES.join(", ")
            )))
        }
    };
    model.parameters = params.clone();
    Ok(model)
}
