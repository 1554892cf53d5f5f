//! Linearized wave measures: the uncoupled bumps `φ*_i = exp(-g_i/eps)/I_i`
//! and the coupled solutions `φ_i` of the homogeneous component system.

use nalgebra::DVector;

use super::decomposition::component_coefficients;
use crate::bvp::SelfSimilarSolution;
use crate::error::{Error, Result};
use crate::geneig::{frame_along_profile, GeneralizedSpectrum};
use crate::linalg::BandedMatrix;
use crate::system::{DiffusionModel, HyperbolicSystem};

#[derive(Debug, Clone)]
pub struct WaveMeasureSet {
    pub epsilon: f64,
    pub nodes: Vec<f64>,
    /// `mu[i][k] = μ_i(u(y_k), y_k)`
    pub mu: Vec<Vec<f64>>,
    pub rho: Vec<f64>,
    /// `rho[i]` was clamped to an endpoint (no interior zero of `μ_i`).
    pub clamped: Vec<bool>,
    pub g: Vec<Vec<f64>>,
    pub normalizer: Vec<f64>,
    pub phi_star: Vec<Vec<f64>>,
    pub coupled: Option<CoupledMeasures>,
}

#[derive(Debug, Clone)]
pub struct CoupledMeasures {
    pub phi: Vec<Vec<f64>>,
    /// Smallest `K` with `|φ_i - φ*_i| <= K η (φ*_i + eps sum_j φ*_j)`.
    pub sandwich_constant: f64,
    pub eta: f64,
    /// `max_i sup|φ_i - φ*_i| / sup φ*_i`
    pub relative_deviation: f64,
}

pub(crate) fn trapezoid(y: &[f64], f: &[f64]) -> f64 {
    y.windows(2)
        .zip(f.windows(2))
        .map(|(yy, ff)| 0.5 * (yy[1] - yy[0]) * (ff[0] + ff[1]))
        .sum()
}

impl WaveMeasureSet {
    pub fn mass(&self, i: usize) -> f64 {
        trapezoid(&self.nodes, &self.phi_star[i])
    }

    /// `g_i` at an arbitrary `y` by linear interpolation.
    pub fn g_at(&self, i: usize, y: f64) -> f64 {
        interp(&self.nodes, &self.g[i], y)
    }
}

pub(crate) fn interp(x: &[f64], f: &[f64], y: f64) -> f64 {
    if y <= x[0] {
        return f[0];
    }
    if y >= x[x.len() - 1] {
        return f[f.len() - 1];
    }
    let k = x.partition_point(|&v| v <= y).saturating_sub(1).min(x.len() - 2);
    let t = (y - x[k]) / (x[k + 1] - x[k]);
    f[k] + t * (f[k + 1] - f[k])
}

/// Zero of a node-sampled decreasing function; `(rho, clamped)`.
fn anchor(family: usize, y: &[f64], mu: &[f64]) -> Result<(f64, bool)> {
    let crossings: Vec<usize> = (0..y.len() - 1)
        .filter(|&k| (mu[k] > 0.0) != (mu[k + 1] > 0.0))
        .collect();
    match crossings.len() {
        0 => Ok(if mu[0] > 0.0 { (y[y.len() - 1], true) } else { (y[0], true) }),
        1 => {
            let k = crossings[0];
            if mu[k] <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "mu_{family} increases through its zero near y = {}",
                    y[k]
                )));
            }
            let t = mu[k] / (mu[k] - mu[k + 1]);
            Ok((y[k] + t * (y[k + 1] - y[k]), false))
        }
        count => Err(Error::MultipleZeroCrossings { family, count }),
    }
}

/// `g(y) = -∫_rho^y μ` by the trapezoid rule on the nodes (with the
/// interpolated zero as an extra node).
fn potential(y: &[f64], mu: &[f64], rho: f64) -> Vec<f64> {
    let m = y.len();
    let mut g = vec![0.0; m];
    let split = y.partition_point(|&v| v <= rho);
    // nodes right of rho
    if split < m {
        let k = split;
        let mu_rho = interp(y, mu, rho);
        g[k] = -0.5 * (y[k] - rho) * (mu_rho + mu[k]);
        for k in split + 1..m {
            g[k] = g[k - 1] - 0.5 * (y[k] - y[k - 1]) * (mu[k - 1] + mu[k]);
        }
    }
    if split > 0 {
        let k = split - 1;
        let mu_rho = interp(y, mu, rho);
        g[k] = -0.5 * (y[k] - rho) * (mu_rho + mu[k]);
        for k in (0..split - 1).rev() {
            g[k] = g[k + 1] - 0.5 * (y[k] - y[k + 1]) * (mu[k + 1] + mu[k]);
        }
    }
    for v in &mut g {
        *v = v.max(0.0);
    }
    g
}

fn mu_table(spectra: &[GeneralizedSpectrum], n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| spectra.iter().map(|s| s.mu[i]).collect()).collect()
}

pub fn uncoupled_measures(
    system: &HyperbolicSystem,
    diffusion: &DiffusionModel,
    solution: &SelfSimilarSolution,
) -> Result<WaveMeasureSet> {
    let spectra = frame_along_profile(system, diffusion, solution)?;
    uncoupled_from_spectra(solution, &spectra)
}

pub(crate) fn uncoupled_from_spectra(
    solution: &SelfSimilarSolution,
    spectra: &[GeneralizedSpectrum],
) -> Result<WaveMeasureSet> {
    let n = solution.dimension();
    let y = solution.mesh.nodes();
    let eps = solution.epsilon;
    let mu = mu_table(spectra, n);
    let mut rho = Vec::with_capacity(n);
    let mut clamped = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    let mut normalizer = Vec::with_capacity(n);
    let mut phi_star = Vec::with_capacity(n);
    for (i, mu_i) in mu.iter().enumerate() {
        let (r, c) = anchor(i, y, mu_i)?;
        let gi = potential(y, mu_i, r);
        let e: Vec<f64> = gi.iter().map(|v| (-v / eps).exp()).collect();
        let norm = trapezoid(y, &e);
        phi_star.push(e.iter().map(|v| v / norm).collect());
        rho.push(r);
        clamped.push(c);
        g.push(gi);
        normalizer.push(norm);
    }
    Ok(WaveMeasureSet {
        epsilon: eps,
        nodes: y.to_vec(),
        mu,
        rho,
        clamped,
        g,
        normalizer,
        phi_star,
        coupled: None,
    })
}

/// Solves `φ_i' - (μ_i/eps) φ_i + sum_j π_ij φ_j = 0` with `∫φ_i = 1` and
/// fits the sandwich constant against `φ*`.
///
/// The integral constraints are carried by auxiliary unknowns `s_i' = φ_i`,
/// `s_i(-L) = 0`, `s_i(L) = 1`, which keeps the system banded. Each interval
/// uses the exact integrating factor of the diagonal part, so `φ = φ*`
/// whenever `π = 0`.
pub fn linearized_measures(
    system: &HyperbolicSystem,
    diffusion: &DiffusionModel,
    solution: &SelfSimilarSolution,
    measures: &WaveMeasureSet,
) -> Result<WaveMeasureSet> {
    let spectra = frame_along_profile(system, diffusion, solution)?;
    let n = system.dimension;
    let y = &measures.nodes;
    let m = y.len();
    let eps = measures.epsilon;
    let pis: Vec<_> = spectra
        .iter()
        .map(|s| component_coefficients(system, diffusion, s).map(|c| c.pi))
        .collect::<Result<_>>()?;
    let b = 2 * n;
    let size = b * m;
    let band = 2 * b - 1;
    let mut mat = BandedMatrix::zeros(size, band, band);
    let mut rhs = vec![0.0; size];
    let phi_col = |k: usize, i: usize| k * b + i;
    let s_col = |k: usize, i: usize| k * b + n + i;
    for i in 0..n {
        mat.set(i, s_col(0, i), 1.0);
        let row = (m - 1) * b + n + i;
        mat.set(row, s_col(m - 1, i), 1.0);
        rhs[row] = 1.0;
    }
    for k in 0..m - 1 {
        let h = y[k + 1] - y[k];
        for i in 0..n {
            let expo = 0.5 * h * (measures.mu[i][k] + measures.mu[i][k + 1]) / eps;
            let e = expo.exp();
            let scale = if e > 1.0 { 1.0 / e } else { 1.0 };
            // φ-equation of interval k in block k
            let row = k * b + n + i;
            mat.add(row, phi_col(k + 1, i), scale);
            mat.add(row, phi_col(k, i), -e * scale);
            for j in 0..n {
                mat.add(row, phi_col(k + 1, j), 0.5 * h * pis[k + 1][(i, j)] * scale);
                mat.add(row, phi_col(k, j), 0.5 * h * e * pis[k][(i, j)] * scale);
            }
            // s-equation of interval k in block k + 1
            let row = (k + 1) * b + i;
            mat.add(row, s_col(k + 1, i), 1.0);
            mat.add(row, s_col(k, i), -1.0);
            mat.add(row, phi_col(k, i), -0.5 * h);
            mat.add(row, phi_col(k + 1, i), -0.5 * h);
        }
    }
    let sol = mat.factor()?.solve(&rhs);
    let phi: Vec<Vec<f64>> = (0..n).map(|i| (0..m).map(|k| sol[phi_col(k, i)]).collect()).collect();
    let eta = diffusion.eta;
    let star = &measures.phi_star;
    let total: Vec<f64> = (0..m).map(|k| (0..n).map(|j| star[j][k]).sum()).collect();
    let mut ratio = 0.0f64;
    let mut deviation = 0.0f64;
    for i in 0..n {
        let peak = star[i].iter().fold(0.0f64, |a, v| a.max(*v));
        let mut sup = 0.0f64;
        for k in 0..m {
            let d = (phi[i][k] - star[i][k]).abs();
            sup = sup.max(d);
            let den = star[i][k] + eps * total[k];
            if den >= 1e-8 * peak {
                ratio = ratio.max(d / den);
            }
        }
        deviation = deviation.max(sup / peak);
    }
    let sandwich_constant = if eta > 0.0 {
        ratio / eta
    } else if ratio <= 1e-10 {
        0.0
    } else {
        f64::INFINITY
    };
    let mut out = measures.clone();
    out.coupled = Some(CoupledMeasures {
        phi,
        sandwich_constant,
        eta,
        relative_deviation: deviation,
    });
    Ok(out)
}

/// `sup|φ_i - φ*_i|` per family, as vectors for reporting.
pub fn measure_deviation(measures: &WaveMeasureSet) -> Option<Vec<f64>> {
    let c = measures.coupled.as_ref()?;
    Some(
        c.phi
            .iter()
            .zip(&measures.phi_star)
            .map(|(p, s)| {
                let d = DVector::from_iterator(p.len(), p.iter().zip(s).map(|(a, b)| a - b));
                d.amax()
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_vanishes_at_anchor_and_is_nonnegative() {
        let y: Vec<f64> = (0..=20).map(|k| -1.0 + 0.1 * k as f64).collect();
        let mu: Vec<f64> = y.iter().map(|v| 0.13 - v).collect();
        let (rho, clamped) = anchor(0, &y, &mu).unwrap();
        assert!(!clamped);
        assert!((rho - 0.13).abs() < 1e-12);
        let g = potential(&y, &mu, rho);
        // linear μ: trapezoid is exact
        for (yy, gg) in y.iter().zip(&g) {
            assert!((gg - 0.5 * (yy - 0.13).powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn double_crossing_is_rejected() {
        let y = [0.0, 1.0, 2.0, 3.0];
        let mu = [1.0, -1.0, 1.0, -1.0];
        assert!(matches!(anchor(1, &y, &mu), Err(Error::MultipleZeroCrossings { family: 1, count: 3 })));
    }

    #[test]
    fn single_signed_mu_clamps() {
        let y = [0.0, 1.0, 2.0];
        assert_eq!(anchor(0, &y, &[3.0, 2.0, 1.0]).unwrap(), (2.0, true));
        assert_eq!(anchor(0, &y, &[-1.0, -2.0, -3.0]).unwrap(), (0.0, true));
    }
}
