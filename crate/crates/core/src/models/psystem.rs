//! p-system `v_t - w_x = 0`, `w_t + p(v)_x = 0` with `p(v) = v^{-gamma}`.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, RowDVector};

use super::{ModelDescriptor, Oracle, BAND_PAD};
use crate::error::{Error, Result};
use crate::system::{DiffusionModel, EntropyPair, HyperbolicSystem, SpeedBand, State};

pub(crate) fn pressure(gamma: f64, v: f64) -> f64 {
    v.powf(-gamma)
}

/// Sound speed `sqrt(-p'(v))`.
pub(crate) fn sound_speed(gamma: f64, v: f64) -> f64 {
    (gamma * v.powf(-gamma - 1.0)).sqrt()
}

/// Inverse of [`sound_speed`].
pub(crate) fn specific_volume_for_speed(gamma: f64, c: f64) -> f64 {
    (c / gamma.sqrt()).powf(-2.0 / (gamma + 1.0))
}

/// Antiderivative of the sound speed in `v`.
pub(crate) fn speed_integral(gamma: f64, v: f64) -> f64 {
    if (gamma - 1.0).abs() < 1e-12 {
        v.ln()
    } else {
        let e = (1.0 - gamma) / 2.0;
        gamma.sqrt() * v.powf(e) / e
    }
}

pub fn psystem(gamma: f64, v_ref: f64, radius: f64, half_width: f64) -> Result<ModelDescriptor> {
    if v_ref - radius <= 0.0 {
        return Err(Error::DomainViolation(format!(
            "p-system ball reaches v <= 0 (v* = {v_ref}, radius = {radius})"
        )));
    }
    if gamma < 1.0 {
        return Err(Error::DomainViolation(format!("gamma = {gamma} < 1")));
    }
    let c_max = sound_speed(gamma, v_ref - radius);
    let c_min = sound_speed(gamma, v_ref + radius);
    let bands = vec![
        SpeedBand::new(-c_max - BAND_PAD, -c_min + BAND_PAD),
        SpeedBand::new(c_min - BAND_PAD, c_max + BAND_PAD),
    ];
    let system = HyperbolicSystem::new(
        "psystem",
        DVector::from_vec(vec![v_ref, 0.0]),
        radius,
        Arc::new(move |u| {
            let dp = -gamma * u[0].powf(-gamma - 1.0);
            DMatrix::from_row_slice(2, 2, &[0.0, -1.0, dp, 0.0])
        }),
        Some(Arc::new(move |u| DVector::from_vec(vec![-u[1], pressure(gamma, u[0])]))),
        half_width,
        bands,
    );
    // mechanical energy w^2/2 + P(v) with P' = -p
    let big_p = move |v: f64| {
        if (gamma - 1.0).abs() < 1e-12 {
            -v.ln()
        } else {
            v.powf(1.0 - gamma) / (gamma - 1.0)
        }
    };
    let pair = EntropyPair {
        name: "energy".into(),
        entropy: Arc::new(move |u| 0.5 * u[1] * u[1] + big_p(u[0])),
        gradient: Arc::new(move |u| DVector::from_vec(vec![-pressure(gamma, u[0]), u[1]])),
        hessian: Arc::new(move |u| {
            DMatrix::from_row_slice(2, 2, &[gamma * u[0].powf(-gamma - 1.0), 0.0, 0.0, 1.0])
        }),
        flux: Arc::new(move |u| pressure(gamma, u[0]) * u[1]),
        flux_gradient: Arc::new(move |u| {
            DVector::from_vec(vec![-gamma * u[0].powf(-gamma - 1.0) * u[1], pressure(gamma, u[0])])
        }),
    };
    Ok(ModelDescriptor {
        name: "psystem".into(),
        parameters: BTreeMap::new(),
        system,
        diffusion: DiffusionModel::identity(2),
        entropy_pairs: vec![pair],
        oracle: Some(Oracle::PSystem { gamma }),
    })
}

/// Forward Lax curve of family `family` (0 or 1) through `left`,
/// parametrized by the specific volume of the right state: rarefaction
/// branch where the characteristic speed increases, Hugoniot branch
/// otherwise.
pub fn psystem_lax_curve(gamma: f64, family: usize, left: &State, v: f64) -> State {
    let (vl, wl) = (left[0], left[1]);
    let pl = pressure(gamma, vl);
    let p = pressure(gamma, v);
    let w = match family {
        0 => {
            if v >= vl {
                wl + speed_integral(gamma, v) - speed_integral(gamma, vl)
            } else {
                wl - ((p - pl) * (vl - v)).sqrt()
            }
        }
        _ => {
            if v <= vl {
                wl + speed_integral(gamma, vl) - speed_integral(gamma, v)
            } else {
                wl - ((pl - p) * (v - vl)).sqrt()
            }
        }
    };
    DVector::from_vec(vec![v, w])
}

/// Point of the forward Lax curve whose projection on `covector` relative to
/// `left` equals `m`.
pub fn psystem_lax_point_with_amplitude(
    gamma: f64,
    family: usize,
    left: &State,
    covector: &RowDVector<f64>,
    m: f64,
) -> Result<State> {
    let g = |v: f64| (covector * (psystem_lax_curve(gamma, family, left, v) - left))[0] - m;
    let span = 0.5 * left[0];
    let (mut lo, mut hi) = (left[0] - span, left[0] + span);
    let (mut glo, ghi) = (g(lo), g(hi));
    if glo * ghi > 0.0 {
        return Err(Error::NoSolutionInBall(format!(
            "amplitude {m} not reachable on the family-{family} Lax curve"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if (gm < 0.0) == (glo < 0.0) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    Ok(psystem_lax_curve(gamma, family, left, 0.5 * (lo + hi)))
}
