use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{ModelDescriptor, Oracle, BAND_PAD};
use crate::system::{DiffusionModel, EntropyPair, HyperbolicSystem, SpeedBand};

/// Inviscid Burgers `u_t + (u^2/2)_x = 0` on the ball `|u - reference| <= radius`.
pub fn burgers(reference: f64, radius: f64, half_width: f64) -> ModelDescriptor {
    let band = SpeedBand::new(reference - radius - BAND_PAD, reference + radius + BAND_PAD);
    let system = HyperbolicSystem::new(
        "burgers",
        DVector::from_element(1, reference),
        radius,
        Arc::new(|u| DMatrix::from_element(1, 1, u[0])),
        Some(Arc::new(|u| DVector::from_element(1, 0.5 * u[0] * u[0]))),
        half_width,
        vec![band],
    );
    let pair = EntropyPair {
        name: "square".into(),
        entropy: Arc::new(|u| 0.5 * u[0] * u[0]),
        gradient: Arc::new(|u| DVector::from_element(1, u[0])),
        hessian: Arc::new(|_| DMatrix::from_element(1, 1, 1.0)),
        flux: Arc::new(|u| u[0].powi(3) / 3.0),
        flux_gradient: Arc::new(|u| DVector::from_element(1, u[0] * u[0])),
    };
    ModelDescriptor {
        name: "burgers".into(),
        parameters: BTreeMap::new(),
        system,
        diffusion: DiffusionModel::identity(1),
        entropy_pairs: vec![pair],
        oracle: Some(Oracle::Burgers),
    }
}
