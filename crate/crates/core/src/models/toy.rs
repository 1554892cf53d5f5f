use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{ModelDescriptor, BAND_PAD};
use crate::error::Result;
use crate::system::{suggest_speed_bands, DiffusionModel, HyperbolicSystem, Sampling};

/// Symmetric non-conservative system
/// `A(u) = [[-1 + u1, s u2], [s u2, 1 + u1]]` around the origin. For
/// `s = 1` it is the Jacobian of a flux; other couplings are genuinely
/// non-conservative.
pub fn nonconservative_toy(coupling: f64) -> Result<ModelDescriptor> {
    nonconservative_toy_with(coupling, 0.3, 2.0)
}

pub fn nonconservative_toy_with(coupling: f64, radius: f64, half_width: f64) -> Result<ModelDescriptor> {
    let s = coupling;
    let system = HyperbolicSystem::new(
        "toy",
        DVector::zeros(2),
        radius,
        Arc::new(move |u| {
            DMatrix::from_row_slice(2, 2, &[-1.0 + u[0], s * u[1], s * u[1], 1.0 + u[0]])
        }),
        None,
        half_width,
        Vec::new(),
    );
    let bands = suggest_speed_bands(
        &system,
        &Sampling {
            count: 400,
            seed: 13,
            pad: BAND_PAD,
        },
    )?;
    let mut params = BTreeMap::new();
    params.insert("coupling".to_string(), super::Param::Scalar(coupling));
    Ok(ModelDescriptor {
        name: "toy".into(),
        parameters: params,
        system: system.with_speed_bands(bands),
        diffusion: DiffusionModel::identity(2),
        entropy_pairs: Vec::new(),
        oracle: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::system::{eigendecompose, validate_system};

    #[test]
    fn speeds_at_origin() {
        let m = nonconservative_toy(0.5).unwrap();
        let fr = eigendecompose(&m.system, &DVector::zeros(2)).unwrap();
        assert_eq!(fr.eigenvalues, vec![-1.0, 1.0]);
        assert!(!m.system.is_conservative());
    }

    #[test]
    fn symmetric_closed_form_eigenvalues() {
        // [[-1+u1, u2],[u2, 1+u1]] has eigenvalues u1 -+ sqrt(1 + u2^2)
        let m = nonconservative_toy(1.0).unwrap();
        let u = DVector::from_vec(vec![0.0, 0.1]);
        let fr = eigendecompose(&m.system, &u).unwrap();
        let s = 1.01f64.sqrt();
        assert!((fr.eigenvalues[0] + s).abs() < 1e-14);
        assert!((fr.eigenvalues[1] - s).abs() < 1e-14);
        // dense symmetric solver as independent oracle
        let sym = m.system.jacobian_at(&u).symmetric_eigenvalues();
        let mut sv: Vec<f64> = sym.iter().copied().collect();
        sv.sort_by(f64::total_cmp);
        assert!((fr.eigenvalues[0] - sv[0]).abs() < 1e-14);
        assert!((fr.eigenvalues[1] - sv[1]).abs() < 1e-14);
    }

    #[test]
    fn validates_at_defaults() {
        let mut m = nonconservative_toy(0.5).unwrap();
        let r = validate_system(&m.system, &mut m.diffusion, &[], 300, 1);
        assert!(r.passed(), "{:?}", r.failures());
        assert!(r.check("flux_jacobian").is_none());
    }

    #[test]
    fn big_ball_overlaps() {
        // lambda_1 <= r - 1 and lambda_2 >= 1 - r on the ball
        let err = nonconservative_toy_with(0.5, 0.99, 4.0).unwrap_err();
        assert!(matches!(err, Error::BandsOverlap { .. }), "{err:?}");
    }
}
