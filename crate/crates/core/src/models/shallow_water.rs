//! Shallow water in conserved variables `(h, m = h u)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{ModelDescriptor, Oracle, BAND_PAD};
use crate::error::{Error, Result};
use crate::system::{suggest_speed_bands, DiffusionModel, EntropyPair, HyperbolicSystem, Sampling};

pub fn shallow_water(
    gravity: f64,
    reference: (f64, f64),
    radius: f64,
    half_width: f64,
) -> Result<ModelDescriptor> {
    let (h0, m0) = reference;
    if h0 - radius <= 0.0 {
        return Err(Error::DomainViolation(format!(
            "shallow water ball reaches h <= 0 (h* = {h0}, radius = {radius})"
        )));
    }
    let g = gravity;
    let system = HyperbolicSystem::new(
        "shallow_water",
        DVector::from_vec(vec![h0, m0]),
        radius,
        Arc::new(move |u| {
            let (h, m) = (u[0], u[1]);
            let v = m / h;
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, g * h - v * v, 2.0 * v])
        }),
        Some(Arc::new(move |u| {
            let (h, m) = (u[0], u[1]);
            DVector::from_vec(vec![m, m * m / h + 0.5 * g * h * h])
        })),
        half_width,
        Vec::new(),
    );
    let bands = suggest_speed_bands(
        &system,
        &Sampling {
            count: 400,
            seed: 11,
            pad: BAND_PAD,
        },
    )?;
    let system = system.with_speed_bands(bands);
    let pair = EntropyPair {
        name: "energy".into(),
        entropy: Arc::new(move |u| 0.5 * u[1] * u[1] / u[0] + 0.5 * g * u[0] * u[0]),
        gradient: Arc::new(move |u| {
            let (h, m) = (u[0], u[1]);
            DVector::from_vec(vec![-0.5 * m * m / (h * h) + g * h, m / h])
        }),
        hessian: Arc::new(move |u| {
            let (h, m) = (u[0], u[1]);
            DMatrix::from_row_slice(
                2,
                2,
                &[m * m / (h * h * h) + g, -m / (h * h), -m / (h * h), 1.0 / h],
            )
        }),
        flux: Arc::new(move |u| {
            let (h, m) = (u[0], u[1]);
            0.5 * m * m * m / (h * h) + g * h * m
        }),
        flux_gradient: Arc::new(move |u| {
            let (h, m) = (u[0], u[1]);
            DVector::from_vec(vec![-m * m * m / (h * h * h) + g * m, 1.5 * m * m / (h * h) + g * h])
        }),
    };
    Ok(ModelDescriptor {
        name: "shallow_water".into(),
        parameters: BTreeMap::new(),
        system,
        diffusion: DiffusionModel::identity(2),
        entropy_pairs: vec![pair],
        oracle: Some(Oracle::ShallowWater { gravity }),
    })
}
