//! Total variation, entropy residuals, L¹ distances and extraction of the
//! limiting Riemann solution from an epsilon sweep.

use nalgebra::DVector;

use super::decomposition::{decompose, node_derivatives};
use crate::bvp::{RegularizationKind, SelfSimilarSolution};
use crate::error::{Error, Result};
use crate::system::{eigendecompose_unchecked, DiffusionModel, EntropyPair, HyperbolicSystem, State};

/// `sum_k |u_{k+1} - u_k|` (Euclidean increments).
pub fn total_variation(solution: &SelfSimilarSolution) -> f64 {
    solution.states.windows(2).map(|w| (&w[1] - &w[0]).norm()).sum()
}

/// Worst signed hat-function residual of the entropy balance
/// `∫[(F∘u)' - y (U∘u)'] θ - eps ∫(∇U B u')' θ`, discretized consistently
/// with the diffusive scheme. Nonpositive for convex pairs.
pub fn entropy_residual(
    system: &HyperbolicSystem,
    diffusion: &DiffusionModel,
    solution: &SelfSimilarSolution,
    pair: &EntropyPair,
) -> Result<f64> {
    if !system.is_conservative() {
        return Err(Error::MissingFlux);
    }
    if solution.kind == RegularizationKind::Relaxation {
        return Err(Error::InvalidInput(
            "entropy balance is defined for diffusive profiles only".into(),
        ));
    }
    let y = solution.mesh.nodes();
    let u = &solution.states;
    let m = y.len();
    let eps = solution.epsilon;
    let dissipative_flux: Vec<f64> = (0..m - 1)
        .map(|k| {
            let mid = (&u[k] + &u[k + 1]) * 0.5;
            let w = diffusion.at(&mid) * ((&u[k + 1] - &u[k]) / (y[k + 1] - y[k]));
            (pair.gradient)(&mid).dot(&w)
        })
        .collect();
    let du = node_derivatives(y, u);
    let mut worst = f64::NEG_INFINITY;
    for k in 1..m - 1 {
        let hk = 0.5 * (y[k + 1] - y[k - 1]);
        let transport = ((pair.flux_gradient)(&u[k]) - (pair.gradient)(&u[k]) * y[k]).dot(&du[k]);
        let r = hk * transport - eps * (dissipative_flux[k] - dissipative_flux[k - 1]);
        worst = worst.max(r);
    }
    Ok(if worst.is_finite() { worst } else { 0.0 })
}

/// `∫ |u_h - f|` with eight midpoint samples per mesh interval.
pub fn l1_distance_to(solution: &SelfSimilarSolution, f: &dyn Fn(f64) -> State) -> f64 {
    let y = solution.mesh.nodes();
    let q = 8;
    let mut s = 0.0;
    for k in 0..y.len() - 1 {
        let h = y[k + 1] - y[k];
        for p in 0..q {
            let t = (p as f64 + 0.5) / q as f64;
            let yy = y[k] + t * h;
            s += (solution.sample(yy) - f(yy)).norm() * h / q as f64;
        }
    }
    s
}

/// `sup |u_h - f|` over the nodes.
pub fn linf_distance_to(solution: &SelfSimilarSolution, f: &dyn Fn(f64) -> State) -> f64 {
    solution
        .mesh
        .nodes()
        .iter()
        .zip(&solution.states)
        .map(|(&y, u)| (u - f(y)).norm())
        .fold(0.0, f64::max)
}

/// `∫ |u_a - u_b|` over the union of both meshes (both piecewise linear).
pub fn l1_between(a: &SelfSimilarSolution, b: &SelfSimilarSolution) -> f64 {
    let mut nodes: Vec<f64> = a.mesh.nodes().iter().chain(b.mesh.nodes()).copied().collect();
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let mut s = 0.0;
    for w in nodes.windows(2) {
        let h = w[1] - w[0];
        for t in [0.25, 0.75] {
            let yy = w[0] + t * h;
            s += 0.5 * h * (a.sample(yy) - b.sample(yy)).norm();
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitWave {
    pub family: usize,
    pub jump: State,
    /// `l_j(u*) [u]`
    pub amplitude: f64,
    /// Location of `max |a_j|` inside the band.
    pub speed: f64,
    pub rarefaction: bool,
    /// `|s [u] - [f(u)]|` for conservative systems and non-rarefaction waves.
    pub rh_residual: Option<f64>,
    /// Smallest sign-normalized hat integral `∫ α_j θ` over the band.
    pub alpha_min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitRiemannSolution {
    pub epsilon: f64,
    /// One state per gap, left to right (`N + 1` entries).
    pub plateaus: Vec<State>,
    /// `max - min` of the profile over the middle half of each gap.
    pub flatness: Vec<f64>,
    pub flatness_tolerance: f64,
    pub waves: Vec<LimitWave>,
    /// L¹ distances between consecutive entries of the sweep.
    pub cauchy_l1: Vec<f64>,
    pub cauchy_decreasing: bool,
    pub total_variation: Vec<f64>,
    /// `max TV / |u_r - u_l|` over the sweep.
    pub c0: f64,
    /// `(pair name, worst residual over the sweep)`
    pub entropy_residuals: Vec<(String, f64)>,
}

/// Middle half of a gap.
pub fn plateau_window(gap: (f64, f64)) -> (f64, f64) {
    let w = gap.1 - gap.0;
    (gap.0 + 0.25 * w, gap.1 - 0.25 * w)
}

/// `(mean, max - min)` of the profile over `[a, b]`.
pub fn plateau_statistics(solution: &SelfSimilarSolution, window: (f64, f64)) -> (State, f64) {
    let (a, b) = window;
    let samples = 200;
    let mut mean = DVector::zeros(solution.dimension());
    for q in 0..samples {
        let yy = a + (b - a) * (q as f64 + 0.5) / samples as f64;
        mean += solution.sample(yy);
    }
    mean /= samples as f64;
    let mut values: Vec<State> = solution
        .mesh
        .nodes()
        .iter()
        .zip(&solution.states)
        .filter(|(&y, _)| y >= a && y <= b)
        .map(|(_, u)| u.clone())
        .collect();
    values.push(solution.sample(a));
    values.push(solution.sample(b));
    let mut spread = 0.0f64;
    for i in 0..solution.dimension() {
        let (lo, hi) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), u| (lo.min(u[i]), hi.max(u[i])));
        spread = spread.max(hi - lo);
    }
    (mean, spread)
}

pub fn plateau_tolerance(epsilon: f64, u_l: &State, u_r: &State) -> f64 {
    (10.0 * epsilon).max(1e-6) * (u_r - u_l).norm()
}

/// Limit diagnostics of a sweep ordered by decreasing `eps`; plateaus and
/// waves are read off the last (smallest `eps`) entry.
pub fn extract_limit(
    system: &HyperbolicSystem,
    diffusion: &DiffusionModel,
    pairs: &[EntropyPair],
    sweep: &[SelfSimilarSolution],
) -> Result<LimitRiemannSolution> {
    let last = sweep
        .last()
        .ok_or_else(|| Error::InvalidInput("empty sweep".into()))?;
    if sweep.windows(2).any(|w| w[1].epsilon >= w[0].epsilon) {
        return Err(Error::InvalidInput("sweep must be ordered by decreasing epsilon".into()));
    }
    let n = system.dimension;
    let u_l = last.left_state().clone();
    let u_r = last.right_state().clone();
    let tol = plateau_tolerance(last.epsilon, &u_l, &u_r);
    let mut plateaus = Vec::with_capacity(n + 1);
    let mut flatness = Vec::with_capacity(n + 1);
    for (g, gap) in system.gaps().into_iter().enumerate() {
        let (mean, spread) = plateau_statistics(last, plateau_window(gap));
        if spread > tol {
            return Err(Error::PlateauNotFlat {
                gap: g,
                variation: spread,
                tolerance: tol,
            });
        }
        plateaus.push(mean);
        flatness.push(spread);
    }
    plateaus[0] = u_l.clone();
    plateaus[n] = u_r.clone();
    let dec = decompose(system, diffusion, last)?;
    let reference = system.reference_frame()?;
    let y = last.mesh.nodes();
    let mut waves = Vec::with_capacity(n);
    for j in 0..n {
        let band = system.speed_bands[j];
        let jump = &plateaus[j + 1] - &plateaus[j];
        let amplitude = (reference.l(j) * &jump)[0];
        let mut speed = 0.5 * (band.lower + band.upper);
        let mut best = -1.0;
        for (k, &yy) in y.iter().enumerate() {
            if band.contains(yy) && dec.a[k][j].abs() > best {
                best = dec.a[k][j].abs();
                speed = yy;
            }
        }
        let lam_l = eigendecompose_unchecked(system, &plateaus[j])?.eigenvalues[j];
        let lam_r = eigendecompose_unchecked(system, &plateaus[j + 1])?.eigenvalues[j];
        let trivial = jump.norm() <= tol.max(1e-12);
        let rarefaction = !trivial && lam_l < lam_r;
        let rh_residual = match &system.flux {
            Some(f) if !rarefaction => {
                if trivial {
                    Some(0.0)
                } else {
                    Some((&jump * speed - (f(&plateaus[j + 1]) - f(&plateaus[j]))).norm())
                }
            }
            _ => None,
        };
        let sign = if amplitude < 0.0 { -1.0 } else { 1.0 };
        let lj = reference.l(j);
        let mut alpha_min = f64::INFINITY;
        for k in 1..y.len() - 1 {
            if band.contains(y[k]) {
                let hat = 0.5 * (lj.clone() * (&last.states[k + 1] - &last.states[k - 1]))[0];
                alpha_min = alpha_min.min(sign * hat);
            }
        }
        if !alpha_min.is_finite() {
            alpha_min = 0.0;
        }
        waves.push(LimitWave {
            family: j,
            jump,
            amplitude,
            speed,
            rarefaction,
            rh_residual,
            alpha_min,
        });
    }
    let cauchy_l1: Vec<f64> = sweep.windows(2).map(|w| l1_between(&w[0], &w[1])).collect();
    let cauchy_decreasing = cauchy_l1.windows(2).all(|w| w[1] < w[0]);
    let tv: Vec<f64> = sweep.iter().map(total_variation).collect();
    let size = (&u_r - &u_l).norm();
    let c0 = if size > 0.0 {
        tv.iter().fold(0.0f64, |m, v| m.max(*v)) / size
    } else {
        0.0
    };
    let mut entropy_residuals = Vec::new();
    if system.is_conservative() && last.kind != RegularizationKind::Relaxation {
        for pair in pairs {
            let mut worst = f64::NEG_INFINITY;
            for s in sweep {
                worst = worst.max(entropy_residual(system, diffusion, s, pair)?);
            }
            entropy_residuals.push((pair.name.clone(), worst));
        }
    }
    Ok(LimitRiemannSolution {
        epsilon: last.epsilon,
        plateaus,
        flatness,
        flatness_tolerance: tol,
        waves,
        cauchy_l1,
        cauchy_decreasing,
        total_variation: tv,
        c0,
        entropy_residuals,
    })
}
