//! Interaction coefficients
//! `F*_ijk(y) = φ*_i(y) ∫_{c_i}^y φ*_j φ*_k / φ*_i dx`.
//!
//! Written as `G / (I_j I_k)` with
//! `G(y) = e^{-g_i(y)/eps} ∫_{c_i}^y e^{(g_i - g_j - g_k)/eps}`; `G` is
//! marched outward from `c_i` with the trapezoid rule so that every
//! exponential has a nonpositive argument.

use super::measures::{interp, WaveMeasureSet};
use crate::error::{Error, Result};

/// Largest exponent accepted before reporting an overflow.
const EXP_GUARD: f64 = 700.0;

#[derive(Debug, Clone)]
pub struct InteractionCoefficients {
    pub epsilon: f64,
    pub nodes: Vec<f64>,
    pub anchors: Vec<f64>,
    /// `values[(i, j, k)]` over the nodes, indexed `i * n * n + j * n + k`.
    values: Vec<Vec<f64>>,
    pub dimension: usize,
}

impl InteractionCoefficients {
    pub fn get(&self, i: usize, j: usize, k: usize) -> &[f64] {
        let n = self.dimension;
        &self.values[(i * n + j) * n + k]
    }

    pub fn sup(&self, i: usize, j: usize, k: usize) -> f64 {
        self.get(i, j, k).iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let n = self.dimension;
        (0..n).flat_map(move |i| (0..n).flat_map(move |j| (0..n).map(move |k| (i, j, k))))
    }
}

fn checked_exp(x: f64, triple: (usize, usize, usize), y: f64) -> Result<f64> {
    if x > EXP_GUARD {
        let (i, j, k) = triple;
        return Err(Error::OverflowGuard { i, j, k, y });
    }
    Ok(x.exp())
}

fn march(
    y: &[f64],
    gi: &[f64],
    gjk: &[f64],
    c: f64,
    eps: f64,
    triple: (usize, usize, usize),
) -> Result<Vec<f64>> {
    let m = y.len();
    let mut out = vec![0.0; m];
    let gi_c = interp(y, gi, c);
    let gjk_c = interp(y, gjk, c);
    let split = y.partition_point(|&v| v <= c);
    // one step of G from (ya, Ga) to yb
    let step = |ya: f64, ga_i: f64, ga_jk: f64, big_g: f64, yb: f64, gb_i: f64, gb_jk: f64| -> Result<f64> {
        let h = yb - ya;
        let decay = checked_exp(-(gb_i - ga_i) / eps, triple, yb)?;
        let left = checked_exp(-(gb_i - ga_i + ga_jk) / eps, triple, yb)?;
        let right = checked_exp(-gb_jk / eps, triple, yb)?;
        Ok(decay * big_g + 0.5 * h * (left + right))
    };
    if split < m {
        let mut prev = (c, gi_c, gjk_c, 0.0);
        for k in split..m {
            let g = step(prev.0, prev.1, prev.2, prev.3, y[k], gi[k], gjk[k])?;
            out[k] = g;
            prev = (y[k], gi[k], gjk[k], g);
        }
    }
    if split > 0 {
        let mut prev = (c, gi_c, gjk_c, 0.0);
        for k in (0..split).rev() {
            let g = step(prev.0, prev.1, prev.2, prev.3, y[k], gi[k], gjk[k])?;
            out[k] = g;
            prev = (y[k], gi[k], gjk[k], g);
        }
    }
    Ok(out)
}

pub fn interaction_coefficients(measures: &WaveMeasureSet) -> Result<InteractionCoefficients> {
    let n = measures.g.len();
    let y = &measures.nodes;
    let eps = measures.epsilon;
    let mut values: Vec<Vec<f64>> = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if k < j {
                    // symmetric in (j, k)
                    let v = values[(i * n + k) * n + j].clone();
                    values.push(v);
                    continue;
                }
                let gjk: Vec<f64> = measures.g[j].iter().zip(&measures.g[k]).map(|(a, b)| a + b).collect();
                let big_g = march(y, &measures.g[i], &gjk, measures.rho[i], eps, (i, j, k))?;
                let scale = measures.normalizer[j] * measures.normalizer[k];
                values.push(big_g.iter().map(|v| v / scale).collect());
            }
        }
    }
    Ok(InteractionCoefficients {
        epsilon: eps,
        nodes: y.clone(),
        anchors: measures.rho.clone(),
        values,
        dimension: n,
    })
}

/// Direct evaluation `φ*_i(y) ∫_{c}^{y} φ*_j φ*_k / φ*_i` by the trapezoid
/// rule on the node values; overflows for small `eps`, used as a check.
pub fn interaction_direct(measures: &WaveMeasureSet, i: usize, j: usize, k: usize) -> Vec<f64> {
    let y = &measures.nodes;
    let c = measures.rho[i];
    let m = y.len();
    let ps = &measures.phi_star;
    let integrand: Vec<f64> = (0..m).map(|q| ps[j][q] * ps[k][q] / ps[i][q]).collect();
    let f_c = interp(y, &integrand, c);
    let split = y.partition_point(|&v| v <= c);
    let mut acc = vec![0.0; m];
    if split < m {
        let mut s = 0.5 * (y[split] - c) * (f_c + integrand[split]);
        acc[split] = s;
        for q in split + 1..m {
            s += 0.5 * (y[q] - y[q - 1]) * (integrand[q] + integrand[q - 1]);
            acc[q] = s;
        }
    }
    if split > 0 {
        let mut s = 0.5 * (y[split - 1] - c) * (f_c + integrand[split - 1]);
        acc[split - 1] = s;
        for q in (0..split - 1).rev() {
            s += 0.5 * (y[q] - y[q + 1]) * (integrand[q] + integrand[q + 1]);
            acc[q] = s;
        }
    }
    (0..m).map(|q| ps[i][q] * acc[q]).collect()
}
