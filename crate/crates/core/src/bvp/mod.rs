//! Self-similar two-point boundary-value problems: the diffusive system on
//! `[-L, L]`, its relaxation analogue, and the half-space problem on `[0, L]`.

pub(crate) mod diffusive;
mod mesh;
pub(crate) mod newton;
mod relaxation;

pub use diffusive::{diffusive_residual, solve_boundary_diffusive, solve_riemann_diffusive};
pub use mesh::{Mesh, RefinementPass, GRADING_RATIO};
pub use newton::{NewtonReport, NewtonSettings};
pub use relaxation::{equilibrium_defect, relaxation_residual, solve_riemann_relaxation};

use crate::error::{Error, Result};
use crate::system::{HyperbolicSystem, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegularizationKind {
    Diffusive,
    Relaxation,
    BoundaryDiffusive,
}

impl RegularizationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Diffusive => "diffusive",
            Self::Relaxation => "relaxation",
            Self::BoundaryDiffusive => "boundary-diffusive",
        }
    }
}

/// Annotations of a half-space solution.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryInfo {
    /// Smallest family whose band reaches positive speeds, if any.
    pub p: Option<usize>,
    /// `0` lies strictly inside band `p`.
    pub characteristic: bool,
    /// Smallest `w` such that `[0, w]` carries 90% of the total variation.
    pub layer_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfSimilarSolution {
    pub mesh: Mesh,
    pub states: Vec<State>,
    /// Relaxation variable `v` per node.
    pub aux_states: Option<Vec<State>>,
    pub epsilon: f64,
    pub kind: RegularizationKind,
    pub relaxation_speed: Option<f64>,
    pub newton_report: NewtonReport,
    pub boundary: Option<BoundaryInfo>,
}

impl SelfSimilarSolution {
    pub fn dimension(&self) -> usize {
        self.states[0].len()
    }

    pub fn left_state(&self) -> &State {
        &self.states[0]
    }

    pub fn right_state(&self) -> &State {
        &self.states[self.states.len() - 1]
    }

    /// Piecewise-linear evaluation, clamped to the end states outside the mesh.
    pub fn sample(&self, y: f64) -> State {
        sample_piecewise(&self.mesh, &self.states, y)
    }
}

pub(crate) fn sample_piecewise(mesh: &Mesh, states: &[State], y: f64) -> State {
    if y <= mesh.start() {
        return states[0].clone();
    }
    if y >= mesh.end() {
        return states[states.len() - 1].clone();
    }
    let k = mesh.locate(y);
    let nodes = mesh.nodes();
    let t = (y - nodes[k]) / (nodes[k + 1] - nodes[k]);
    &states[k] * (1.0 - t) + &states[k + 1] * t
}

/// Piecewise-linear transfer to `new_mesh`; endpoints are copied exactly.
pub fn interpolate_solution(solution: &SelfSimilarSolution, new_mesh: &Mesh) -> Vec<State> {
    interpolate_states(&solution.mesh, &solution.states, new_mesh)
}

pub(crate) fn interpolate_states(mesh: &Mesh, states: &[State], new_mesh: &Mesh) -> Vec<State> {
    let n = new_mesh.len();
    let mut out: Vec<State> = new_mesh
        .nodes()
        .iter()
        .map(|&y| sample_piecewise(mesh, states, y))
        .collect();
    out[0] = states[0].clone();
    out[n - 1] = states[states.len() - 1].clone();
    out
}

/// Strictly decreasing sequence of viscosities.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationSchedule {
    pub epsilon_start: f64,
    pub epsilon_factor: f64,
    pub epsilon_min: f64,
    explicit: Option<Vec<f64>>,
}

impl ContinuationSchedule {
    /// `start, start * factor, ...` down to (and including) `min`.
    pub fn geometric(start: f64, factor: f64, min: f64) -> Result<Self> {
        if !(start > min && min > 0.0) || !(factor > 0.0 && factor < 1.0) {
            return Err(Error::InvalidInput(format!(
                "invalid schedule start={start} factor={factor} min={min}"
            )));
        }
        Ok(Self {
            epsilon_start: start,
            epsilon_factor: factor,
            epsilon_min: min,
            explicit: None,
        })
    }

    /// An explicit strictly decreasing list.
    pub fn from_list(list: Vec<f64>) -> Result<Self> {
        if list.is_empty() || list.iter().any(|e| !(*e > 0.0)) || list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidInput(format!(
                "epsilon list must be positive and strictly decreasing: {list:?}"
            )));
        }
        let start = list[0];
        let min = list[list.len() - 1];
        let factor = if list.len() > 1 {
            (min / start).powf(1.0 / (list.len() - 1) as f64)
        } else {
            1.0
        };
        Ok(Self {
            epsilon_start: start,
            epsilon_factor: factor,
            epsilon_min: min,
            explicit: Some(list),
        })
    }

    pub fn epsilons(&self) -> Vec<f64> {
        if let Some(list) = &self.explicit {
            return list.clone();
        }
        let mut out = Vec::new();
        let mut e = self.epsilon_start;
        while e > self.epsilon_min * (1.0 + 1e-9) {
            out.push(e);
            e *= self.epsilon_factor;
        }
        out.push(self.epsilon_min);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshPolicy {
    pub initial_intervals: usize,
    pub max_nodes: usize,
    /// Upper bound on `h max_j |mu_j| / epsilon`.
    pub peclet_bound: f64,
    /// Refine where `|u_{k+1} - u_k|` exceeds this fraction of the data jump.
    pub jump_fraction: f64,
    pub max_passes: usize,
    /// Maximal depth of intermediate-epsilon insertion on Newton failure.
    pub max_halvings: usize,
    pub newton: NewtonSettings,
}

impl Default for MeshPolicy {
    fn default() -> Self {
        Self {
            initial_intervals: 200,
            max_nodes: 400_000,
            peclet_bound: 2.0,
            jump_fraction: 0.02,
            max_passes: 40,
            max_halvings: 4,
            newton: NewtonSettings::default(),
        }
    }
}

/// Node-major unknowns (`block` per node) plus border unknowns on a mesh.
#[derive(Debug, Clone)]
pub(crate) struct Discrete {
    pub mesh: Mesh,
    pub block: usize,
    pub x: Vec<f64>,
    pub border: Vec<f64>,
}

impl Discrete {
    pub fn unknowns(&self) -> Vec<f64> {
        let mut v = self.x.clone();
        v.extend_from_slice(&self.border);
        v
    }

    pub fn with_unknowns(&self, all: Vec<f64>) -> Self {
        let n = self.x.len();
        Self {
            mesh: self.mesh.clone(),
            block: self.block,
            x: all[..n].to_vec(),
            border: all[n..].to_vec(),
        }
    }

    pub fn node(&self, k: usize) -> &[f64] {
        &self.x[k * self.block..(k + 1) * self.block]
    }

    pub fn refine(&self, marks: &[bool], epsilon: f64, max_nodes: usize) -> Result<(Self, usize)> {
        let (mesh, inserted) = self.mesh.bisect(marks, epsilon, max_nodes)?;
        if inserted == 0 {
            return Ok((self.clone(), 0));
        }
        let b = self.block;
        let old = self.mesh.nodes();
        let mut x = Vec::with_capacity(mesh.len() * b);
        for &y in mesh.nodes() {
            let k = self.mesh.locate(y);
            let t = ((y - old[k]) / (old[k + 1] - old[k])).clamp(0.0, 1.0);
            for i in 0..b {
                let a = self.x[k * b + i];
                let c = self.x[(k + 1) * b + i];
                x.push(if t == 0.0 {
                    a
                } else if t == 1.0 {
                    c
                } else {
                    a + t * (c - a)
                });
            }
        }
        Ok((
            Self {
                mesh,
                block: b,
                x,
                border: self.border.clone(),
            },
            inserted,
        ))
    }
}

/// One viscosity: refine against the guess, solve, then refine and re-solve
/// until the marker is satisfied.
pub(crate) fn solve_at_epsilon(
    epsilon: f64,
    guess: &Discrete,
    policy: &MeshPolicy,
    marker: &dyn Fn(f64, &Discrete) -> Vec<bool>,
    newton: &dyn Fn(f64, &Discrete) -> Result<(Discrete, NewtonReport)>,
) -> Result<(Discrete, NewtonReport)> {
    let mut d = guess.clone();
    for _ in 0..policy.max_passes {
        let marks = marker(epsilon, &d);
        let (nd, inserted) = d.refine(&marks, epsilon, policy.max_nodes)?;
        d = nd;
        if inserted == 0 {
            break;
        }
    }
    let (mut d, mut report) = newton(epsilon, &d)?;
    for _ in 0..policy.max_passes {
        let marks = marker(epsilon, &d);
        if !marks.iter().any(|&m| m) {
            return Ok((d, report));
        }
        let (nd, _) = d.refine(&marks, epsilon, policy.max_nodes)?;
        (d, report) = newton(epsilon, &nd)?;
    }
    Ok((d, report))
}

/// Marches through `epsilons`, inserting geometric midpoints when a step fails.
pub(crate) fn march(
    epsilons: &[f64],
    initial: Discrete,
    policy: &MeshPolicy,
    marker: &dyn Fn(f64, &Discrete) -> Vec<bool>,
    newton: &dyn Fn(f64, &Discrete) -> Result<(Discrete, NewtonReport)>,
) -> Result<Vec<(f64, Discrete, NewtonReport)>> {
    fn advance(
        from: Option<f64>,
        to: f64,
        current: &Discrete,
        depth: usize,
        policy: &MeshPolicy,
        marker: &dyn Fn(f64, &Discrete) -> Vec<bool>,
        newton: &dyn Fn(f64, &Discrete) -> Result<(Discrete, NewtonReport)>,
    ) -> Result<(Discrete, NewtonReport)> {
        match solve_at_epsilon(to, current, policy, marker, newton) {
            Ok(r) => Ok(r),
            Err(e @ Error::MeshBudgetExceeded { .. }) => Err(e),
            Err(e) => match from {
                Some(f) if depth < policy.max_halvings => {
                    let mid = (f * to).sqrt();
                    log::debug!("epsilon step {f:e} -> {to:e} failed ({e}); inserting {mid:e}");
                    let (d, _) = advance(from, mid, current, depth + 1, policy, marker, newton)?;
                    advance(Some(mid), to, &d, depth + 1, policy, marker, newton)
                }
                _ => Err(e),
            },
        }
    }
    let mut out = Vec::with_capacity(epsilons.len());
    let mut current = initial;
    let mut from = None;
    for &eps in epsilons {
        let (d, report) = advance(from, eps, &current, 0, policy, marker, newton)?;
        log::info!(
            "epsilon {eps:e}: {} nodes, {} Newton iterations, residual {:e}",
            d.mesh.len(),
            report.iterations,
            report.residual
        );
        current = d.clone();
        out.push((eps, d, report));
        from = Some(eps);
    }
    Ok(out)
}

/// Checks converged states against the admissible ball.
pub(crate) fn check_states(system: &HyperbolicSystem, states: &[State]) -> Result<()> {
    for (k, u) in states.iter().enumerate() {
        system.check_in_ball(u).map_err(|e| e.at_node(k))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_schedule_ends_at_min() {
        let s = ContinuationSchedule::geometric(0.1, 0.5, 0.01).unwrap();
        let e = s.epsilons();
        assert_eq!(e[0], 0.1);
        assert_eq!(*e.last().unwrap(), 0.01);
        assert!(e.windows(2).all(|w| w[1] < w[0]));
        assert!(ContinuationSchedule::geometric(0.01, 0.5, 0.1).is_err());
        assert!(ContinuationSchedule::from_list(vec![0.1, 0.2]).is_err());
    }

    #[test]
    fn interpolation_is_exact_on_linear_profiles() {
        let mesh = Mesh::uniform(-1.0, 1.0, 10);
        let states: Vec<State> = mesh.nodes().iter().map(|&y| State::from_vec(vec![2.0 * y + 1.0])).collect();
        let fine = Mesh::uniform(-1.0, 1.0, 37);
        let out = interpolate_states(&mesh, &states, &fine);
        for (y, u) in fine.nodes().iter().zip(&out) {
            assert!((u[0] - (2.0 * y + 1.0)).abs() < 1e-14);
        }
        assert_eq!(out[0], states[0]);
        assert_eq!(out[37], states[10]);
    }
}
