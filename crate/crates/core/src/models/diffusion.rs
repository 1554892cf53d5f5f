use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::Error;
use crate::linalg::op_norm;
use crate::system::{DiffusionModel, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffusionKind {
    /// `B = Id`.
    Identity,
    /// `B = Id + eta C` with a constant symmetric `C`, `|C| = 1`.
    Constant,
    /// `B(u) = Id + eta C(u)`, `C(u)` built from sines and cosines of the
    /// offsets `u - u*`, `|C(u)| <= 1`.
    StateDependent,
}

impl FromStr for DiffusionKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "identity" => Ok(Self::Identity),
            "constant" => Ok(Self::Constant),
            "state" | "state_dependent" => Ok(Self::StateDependent),
            other => Err(Error::InvalidInput(format!(
                "unknown diffusion '{other}' (known: identity, constant, state)"
            ))),
        }
    }
}

/// Constant coupling matrix: ones on the first off-diagonals, normalized to
/// unit operator norm (`[1]` when `n = 1`).
pub fn coupling_matrix(n: usize) -> DMatrix<f64> {
    if n == 1 {
        return DMatrix::from_element(1, 1, 1.0);
    }
    let c = DMatrix::from_fn(n, n, |i, j| if i.abs_diff(j) == 1 { 1.0 } else { 0.0 });
    let norm = op_norm(&c);
    c / norm
}

fn state_coupling(u: &State, reference: &State) -> DMatrix<f64> {
    let n = u.len();
    let d = u - reference;
    if n == 1 {
        return DMatrix::from_element(1, 1, d[0].sin());
    }
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            d[i].sin()
        } else {
            (d[i] + d[j]).cos()
        }
    }) / n as f64
}

/// Builds a diffusion model of the given kind. `eta` is the nominal
/// coupling strength; the measured value is recorded by validation.
pub fn make_diffusion(kind: DiffusionKind, eta: f64, eta_max: f64, reference: &State) -> DiffusionModel {
    let n = reference.len();
    match kind {
        DiffusionKind::Identity => {
            let mut d = DiffusionModel::identity(n);
            d.eta_max = eta_max;
            d
        }
        DiffusionKind::Constant => {
            let c = coupling_matrix(n);
            let mut d = DiffusionModel::new(
                "constant",
                Arc::new(move |_| DMatrix::identity(n, n) + &c * eta),
                eta_max,
            );
            d.eta = eta.abs();
            d
        }
        DiffusionKind::StateDependent => {
            let r = reference.clone();
            let mut d = DiffusionModel::new(
                "state",
                Arc::new(move |u| DMatrix::identity(n, n) + state_coupling(u, &r) * eta),
                eta_max,
            );
            d.eta = eta.abs();
            d
        }
    }
}
