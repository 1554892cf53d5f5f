//! Characteristic components of a profile and the coupled component system.

use nalgebra::{DMatrix, DVector};

use crate::bvp::{diffusive::centered_weights, SelfSimilarSolution};
use crate::error::Result;
use crate::geneig::{frame_along_profile, generalized_eigen_unchecked, GeneralizedSpectrum};
use crate::system::{DiffusionModel, HyperbolicSystem, State};

#[derive(Debug, Clone)]
pub struct CharacteristicDecomposition {
    pub epsilon: f64,
    pub nodes: Vec<f64>,
    /// `u'` per node: centered in the interior, one-sided second order at the ends.
    pub derivative: Vec<State>,
    /// `a[k][j] = l̂_j B(u) u'` at node `k`.
    pub a: Vec<Vec<f64>>,
    /// `alpha[k][j] = l_j(u*) u'` at node `k`.
    pub alpha: Vec<Vec<f64>>,
    pub spectra: Vec<GeneralizedSpectrum>,
}

impl CharacteristicDecomposition {
    pub fn family(&self, j: usize) -> Vec<f64> {
        self.a.iter().map(|v| v[j]).collect()
    }

    /// Worst `|sum_j a_j r̂_j - u'|` over the nodes.
    pub fn reconstruction_error(&self) -> f64 {
        self.spectra
            .iter()
            .zip(&self.a)
            .zip(&self.derivative)
            .map(|((s, a), d)| (&s.right * DVector::from_column_slice(a) - d).amax())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn node_derivatives(y: &[f64], states: &[State]) -> Vec<State> {
    let m = y.len();
    let mut out = Vec::with_capacity(m);
    let one_sided = |k0: usize, k1: usize, k2: usize| {
        // derivative at y[k0] of the parabola through the three nodes
        let (a, b, c) = (y[k0], y[k1], y[k2]);
        let w0 = (2.0 * a - b - c) / ((a - b) * (a - c));
        let w1 = (a - c) / ((b - a) * (b - c));
        let w2 = (a - b) / ((c - a) * (c - b));
        &states[k0] * w0 + &states[k1] * w1 + &states[k2] * w2
    };
    out.push(one_sided(0, 1, 2));
    for k in 1..m - 1 {
        let (wm, w0, wp) = centered_weights(y, k);
        out.push(&states[k - 1] * wm + &states[k] * w0 + &states[k + 1] * wp);
    }
    out.push(one_sided(m - 1, m - 2, m - 3));
    out
}

pub fn decompose(
    system: &HyperbolicSystem,
    diffusion: &DiffusionModel,
    solution: &SelfSimilarSolution,
) -> Result<CharacteristicDecomposition> {
    let spectra = frame_along_profile(system, diffusion, solution)?;
    let reference = system.reference_frame()?;
    let y = solution.mesh.nodes();
    let derivative = node_derivatives(y, &solution.states);
    let mut a = Vec::with_capacity(y.len());
    let mut alpha = Vec::with_capacity(y.len());
    for ((s, d), u) in spectra.iter().zip(&derivative).zip(&solution.states) {
        let w = diffusion.at(u) * d;
        a.push((&s.left * w).iter().copied().collect());
        alpha.push((&reference.left * d).iter().copied().collect());
    }
    Ok(CharacteristicDecomposition {
        epsilon: solution.epsilon,
        nodes: y.to_vec(),
        derivative,
        a,
        alpha,
        spectra,
    })
}

/// `π_ij = l̂_i B ∂_y r̂_j` (at fixed `u`) and
/// `κ_ijk = -l̂_i D_u(B r̂_k)[r̂_j]`, both by central differences.
#[derive(Debug, Clone)]
pub struct ComponentCoefficients {
    pub pi: DMatrix<f64>,
    /// `kappa[i][(j, k)]`
    pub kappa: Vec<DMatrix<f64>>,
}

impl ComponentCoefficients {
    pub fn source(&self, a: &[f64]) -> Vec<f64> {
        let av = DVector::from_column_slice(a);
        self.kappa.iter().map(|k| (av.transpose() * k * &av)[0]).collect()
    }
}

fn aligned_right(
    system: &HyperbolicSystem,
    diffusion: &DiffusionModel,
    u: &State,
    y: f64,
    like: &GeneralizedSpectrum,
) -> Result<DMatrix<f64>> {
    let mut s = generalized_eigen_unchecked(system, diffusion, u, y)?;
    for j in 0..system.dimension {
        if s.right.column(j).dot(&like.right.column(j)) < 0.0 {
            let c = -s.right.column(j);
            s.right.set_column(j, &c);
        }
    }
    Ok(s.right)
}

pub fn component_coefficients(
    system: &HyperbolicSystem,
    diffusion: &DiffusionModel,
    spectrum: &GeneralizedSpectrum,
) -> Result<ComponentCoefficients> {
    let n = system.dimension;
    let u = &spectrum.state;
    let y = spectrum.y;
    let b = diffusion.at(u);
    let dy = 1e-6 * y.abs().max(1.0);
    let rp = aligned_right(system, diffusion, u, y + dy, spectrum)?;
    let rm = aligned_right(system, diffusion, u, y - dy, spectrum)?;
    let pi = &spectrum.left * &b * (rp - rm) / (2.0 * dy);
    let mut kappa = vec![DMatrix::zeros(n, n); n];
    let du = 1e-6 * u.amax().max(1.0);
    for j in 0..n {
        let dir = spectrum.r(j);
        let up = u + &dir * du;
        let um = u - &dir * du;
        let bp = diffusion.at(&up) * aligned_right(system, diffusion, &up, y, spectrum)?;
        let bm = diffusion.at(&um) * aligned_right(system, diffusion, &um, y, spectrum)?;
        // column k of the difference is D_u(B r̂_k)[r̂_j]
        let d = -(&spectrum.left * (bp - bm)) / (2.0 * du);
        for i in 0..n {
            for k in 0..n {
                kappa[i][(j, k)] = d[(i, k)];
            }
        }
    }
    Ok(ComponentCoefficients { pi, kappa })
}

/// Residual of `eps (a_i' + sum_j π_ij a_j - Q_i) - μ_i a_i` at interior
/// nodes (zero rows at the ends), with `a'` from projections of the
/// discrete fluxes at cell midpoints.
pub fn component_residual(
    system: &HyperbolicSystem,
    diffusion: &DiffusionModel,
    solution: &SelfSimilarSolution,
    decomposition: &CharacteristicDecomposition,
) -> Result<Vec<Vec<f64>>> {
    let n = system.dimension;
    let y = solution.mesh.nodes();
    let m = y.len();
    let eps = solution.epsilon;
    let states = &solution.states;
    let mut half = Vec::with_capacity(m - 1);
    for k in 0..m - 1 {
        let h = y[k + 1] - y[k];
        let mid = (&states[k] + &states[k + 1]) * 0.5;
        let ym = 0.5 * (y[k] + y[k + 1]);
        let mut s = generalized_eigen_unchecked(system, diffusion, &mid, ym)?;
        let like = &decomposition.spectra[k];
        for j in 0..n {
            if s.right.column(j).dot(&like.right.column(j)) < 0.0 {
                let c = -s.right.column(j);
                s.right.set_column(j, &c);
                let r = -s.left.row(j);
                s.left.set_row(j, &r);
            }
        }
        let w = diffusion.at(&mid) * ((&states[k + 1] - &states[k]) / h);
        half.push(&s.left * w);
    }
    let mut out = vec![vec![0.0; n]; m];
    for k in 1..m - 1 {
        let hk = 0.5 * (y[k + 1] - y[k - 1]);
        let spec = &decomposition.spectra[k];
        let coeff = component_coefficients(system, diffusion, spec)?;
        let a = &decomposition.a[k];
        let q = coeff.source(a);
        let pa = &coeff.pi * DVector::from_column_slice(a);
        for i in 0..n {
            let da = (half[k][i] - half[k - 1][i]) / hk;
            out[k][i] = eps * (da + pa[i] - q[i]) - spec.mu[i] * a[i];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_sided_derivative_is_exact_for_quadratics() {
        let y = [0.0, 0.2, 0.5, 0.9];
        let f = |x: f64| 1.0 + 2.0 * x - 3.0 * x * x;
        let states: Vec<State> = y.iter().map(|&x| State::from_element(1, f(x))).collect();
        let d = node_derivatives(&y, &states);
        for (x, dv) in y.iter().zip(&d) {
            assert!((dv[0] - (2.0 - 6.0 * x)).abs() < 1e-12);
        }
    }
}
