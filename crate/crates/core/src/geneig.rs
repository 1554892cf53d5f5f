//! The pencil `(-y Id + A(u), B(u))`: eigenvalues `mu_j(u, y)` with right
//! vectors `r̂_j` and left covectors `l̂_j`, normalized so that
//! `l̂_i B r̂_j = delta_ij`.

use nalgebra::{DMatrix, DVector, RowDVector};

use crate::bvp::SelfSimilarSolution;
use crate::error::{Error, Result};
use crate::linalg::{self, EigenFailure};
use crate::system::{eigendecompose_unchecked, DiffusionModel, HyperbolicSystem, State};

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedSpectrum {
    pub y: f64,
    pub state: State,
    /// Ascending; family `j` is the `j`-th entry.
    pub mu: Vec<f64>,
    /// Columns `r̂_j`, unit Euclidean norm.
    pub right: DMatrix<f64>,
    /// Rows `l̂_j`.
    pub left: DMatrix<f64>,
}

impl GeneralizedSpectrum {
    pub fn r(&self, j: usize) -> DVector<f64> {
        self.right.column(j).into_owned()
    }

    pub fn l(&self, j: usize) -> RowDVector<f64> {
        self.left.row(j).into_owned()
    }

    fn flip(&mut self, j: usize) {
        let c = -self.right.column(j);
        self.right.set_column(j, &c);
        let r = -self.left.row(j);
        self.left.set_row(j, &r);
    }

    /// Worst right and left pencil residuals.
    pub fn residuals(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> (f64, f64) {
        let n = self.mu.len();
        let shifted = a - DMatrix::identity(n, n) * self.y;
        let mut right = 0.0f64;
        let mut left = 0.0f64;
        for j in 0..n {
            let r = self.r(j);
            let l = self.l(j);
            right = right.max((&shifted * &r - b * &r * self.mu[j]).norm());
            left = left.max((&l * &shifted - &l * b * self.mu[j]).norm());
        }
        (right, left)
    }
}

/// Generalized spectrum at `(u, y)`; `u` must lie in the admissible ball.
pub fn generalized_eigen(
    system: &HyperbolicSystem,
    diffusion: &DiffusionModel,
    u: &State,
    y: f64,
) -> Result<GeneralizedSpectrum> {
    system.check_in_ball(u)?;
    generalized_eigen_unchecked(system, diffusion, u, y)
}

pub(crate) fn generalized_eigen_unchecked(
    system: &HyperbolicSystem,
    diffusion: &DiffusionModel,
    u: &State,
    y: f64,
) -> Result<GeneralizedSpectrum> {
    let n = system.dimension;
    let a = system.jacobian_at(u);
    let b = diffusion.at(u);
    let b_inv = b.clone().try_inverse().ok_or_else(|| Error::SingularDiffusion {
        state: u.iter().copied().collect(),
    })?;
    let pencil = &b_inv * (a - DMatrix::identity(n, n) * y);
    let eig = linalg::real_eigen(&pencil).map_err(|e| match e {
        EigenFailure::NonReal { imag } => Error::ComplexGeneralizedSpectrum { y, imag },
        EigenFailure::Collision { gap } => Error::DegenerateSpectrum { y, gap },
        EigenFailure::Singular => Error::DegenerateSpectrum { y, gap: 0.0 },
    })?;
    let frame = eigendecompose_unchecked(system, u)?;
    let mut right = eig.right;
    for j in 0..n {
        if right.column(j).dot(&frame.right.column(j)) < 0.0 {
            let c = -right.column(j);
            right.set_column(j, &c);
        }
    }
    let left = (&b * &right)
        .try_inverse()
        .ok_or(Error::DegenerateSpectrum { y, gap: 0.0 })?;
    Ok(GeneralizedSpectrum {
        y,
        state: u.clone(),
        mu: eig.values,
        right,
        left,
    })
}

/// Spectra at every mesh node of `solution`, sign-continuous along the mesh.
pub fn frame_along_profile(
    system: &HyperbolicSystem,
    diffusion: &DiffusionModel,
    solution: &SelfSimilarSolution,
) -> Result<Vec<GeneralizedSpectrum>> {
    let nodes = solution.mesh.nodes();
    let mut out: Vec<GeneralizedSpectrum> = Vec::with_capacity(nodes.len());
    for (k, (&y, u)) in nodes.iter().zip(&solution.states).enumerate() {
        let mut spec = generalized_eigen(system, diffusion, u, y).map_err(|e| e.at_node(k))?;
        if let Some(prev) = out.last() {
            for j in 0..system.dimension {
                if spec.right.column(j).dot(&prev.right.column(j)) < 0.0 {
                    spec.flip(j);
                }
            }
        }
        out.push(spec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use crate::system::eigendecompose;
    use std::sync::Arc;

    fn swap_c() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    #[test]
    fn identity_diffusion_shifts_the_standard_spectrum() {
        let m = models::nonconservative_toy(0.5).unwrap();
        let d = DiffusionModel::identity(2);
        let u = State::from_vec(vec![0.05, -0.1]);
        let frame = eigendecompose(&m.system, &u).unwrap();
        for y in [-1.3, 0.0, 0.4] {
            let g = generalized_eigen(&m.system, &d, &u, y).unwrap();
            for j in 0..2 {
                assert!((g.mu[j] + y - frame.eigenvalues[j]).abs() <= 1e-12);
                assert!((g.r(j) - frame.r(j)).norm() < 1e-10);
                assert!((g.l(j) - frame.l(j)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn scalar_burgers_spectrum() {
        let m = models::burgers(0.0, 0.6, 1.0);
        let d = DiffusionModel::identity(1);
        let g = generalized_eigen(&m.system, &d, &State::from_element(1, 0.5), 0.2).unwrap();
        assert!((g.mu[0] - 0.3).abs() < 1e-15);
        assert_eq!(g.right[(0, 0)], 1.0);
        assert_eq!(g.left[(0, 0)], 1.0);
    }

    #[test]
    fn perturbed_pencil_matches_closed_form_oracle() {
        // diag(-1, 1) with B = Id + 0.05 [[0,1],[1,0]] at y = 0; the 2x2
        // pencil det(A - mu B) = 0 reads mu^2 (1 - e^2) - 1 = 0.
        let sys = HyperbolicSystem::new(
            "diag",
            State::zeros(2),
            0.5,
            Arc::new(|_| DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0])),
            None,
            2.0,
            vec![
                crate::system::SpeedBand::new(-1.1, -0.9),
                crate::system::SpeedBand::new(0.9, 1.1),
            ],
        );
        let e = 0.05;
        let mut d = DiffusionModel::new(
            "constant",
            Arc::new(move |_| DMatrix::identity(2, 2) + swap_c() * e),
            0.1,
        );
        d.eta = e;
        let g = generalized_eigen(&sys, &d, &State::zeros(2), 0.0).unwrap();
        let mu = 1.0 / (1.0 - e * e).sqrt();
        assert!((g.mu[0] + mu).abs() < 1e-12);
        assert!((g.mu[1] - mu).abs() < 1e-12);
        let a = sys.jacobian_at(&State::zeros(2));
        let b = d.at(&State::zeros(2));
        let (rr, rl) = g.residuals(&a, &b);
        assert!(rr <= 1e-12 && rl <= 1e-12, "{rr} {rl}");
        let bio = &g.left * &b * &g.right;
        assert!((bio - DMatrix::identity(2, 2)).amax() < 1e-12);
    }

    #[test]
    fn singular_diffusion_is_reported() {
        let m = models::burgers(0.0, 0.5, 1.0);
        let mut d = DiffusionModel::new("zero", Arc::new(|_| DMatrix::zeros(1, 1)), 1.0);
        d.eta = 1.0;
        let err = generalized_eigen(&m.system, &d, &State::zeros(1), 0.0).unwrap_err();
        assert!(matches!(err, Error::SingularDiffusion { .. }));
    }
}
