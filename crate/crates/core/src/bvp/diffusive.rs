use nalgebra::DVector;

use super::newton::{self, NewtonProblem, NewtonReport};
use super::{
    check_states, march, BoundaryInfo, ContinuationSchedule, Discrete, Mesh, MeshPolicy, RegularizationKind,
    SelfSimilarSolution,
};
use crate::error::{Error, Result};
use crate::geneig::generalized_eigen_unchecked;
use crate::linalg::op_norm;
use crate::system::{DiffusionModel, HyperbolicSystem, State};

#[derive(Debug, Clone)]
pub(crate) struct Dirichlet {
    pub left: State,
    pub right: State,
}

/// `eps (B(u) u')' - (A(u) - y) u' = 0` on the mesh nodes, Dirichlet rows at
/// both ends. Interior rows are integrated over the dual cell (multiplied by
/// `h_k`), which keeps their roundoff floor independent of the local mesh
/// width.
pub(crate) struct DiffusiveProblem<'a> {
    pub system: &'a HyperbolicSystem,
    pub diffusion: &'a DiffusionModel,
    pub epsilon: f64,
    pub nodes: &'a [f64],
    pub data: &'a Dirichlet,
}

/// Second-order gradient at interior node `k` of a nonuniform mesh.
pub(crate) fn centered_weights(y: &[f64], k: usize) -> (f64, f64, f64) {
    let hm = y[k] - y[k - 1];
    let hp = y[k + 1] - y[k];
    let den = hp * hm * (hp + hm);
    (-hp * hp / den, (hp * hp - hm * hm) / den, hm * hm / den)
}

impl DiffusiveProblem<'_> {
    /// Core rows with `right` as the right Dirichlet value.
    pub fn core_residual(&self, x: &[f64], right: &[f64]) -> Vec<f64> {
        let n = self.system.dimension;
        let y = self.nodes;
        let m = y.len();
        let u = |k: usize| DVector::from_column_slice(&x[k * n..(k + 1) * n]);
        let states: Vec<State> = (0..m).map(u).collect();
        let fluxes: Vec<DVector<f64>> = (0..m - 1)
            .map(|k| {
                let mid = (&states[k] + &states[k + 1]) * 0.5;
                self.diffusion.at(&mid) * ((&states[k + 1] - &states[k]) / (y[k + 1] - y[k]))
            })
            .collect();
        let mut r = vec![0.0; n * m];
        for i in 0..n {
            r[i] = x[i] - self.data.left[i];
            r[(m - 1) * n + i] = x[(m - 1) * n + i] - right[i];
        }
        for k in 1..m - 1 {
            let hk = 0.5 * (y[k + 1] - y[k - 1]);
            let (wm, w0, wp) = centered_weights(y, k);
            let du = &states[k - 1] * wm + &states[k] * w0 + &states[k + 1] * wp;
            let mut a = self.system.jacobian_at(&states[k]);
            for i in 0..n {
                a[(i, i)] -= y[k];
            }
            let row = (&fluxes[k] - &fluxes[k - 1]) * self.epsilon - a * du * hk;
            r[k * n..(k + 1) * n].copy_from_slice(row.as_slice());
        }
        r
    }
}

impl NewtonProblem for DiffusiveProblem<'_> {
    fn block(&self) -> usize {
        self.system.dimension
    }
    fn node_count(&self) -> usize {
        self.nodes.len()
    }
    fn residual(&self, x: &[f64]) -> Vec<f64> {
        self.core_residual(x, self.data.right.as_slice())
    }
}

/// Pointwise residual vectors `eps (B u')' - (A - y) u'` of the discrete
/// diffusive problem (the Newton rows divided by the dual cell width).
/// Boundary entries hold the Dirichlet defects.
pub fn diffusive_residual(
    system: &HyperbolicSystem,
    diffusion: &DiffusionModel,
    epsilon: f64,
    mesh: &Mesh,
    states: &[State],
    u_l: &State,
    u_r: &State,
) -> Result<Vec<State>> {
    if states.len() != mesh.len() {
        return Err(Error::InvalidInput(format!(
            "{} states for {} mesh nodes",
            states.len(),
            mesh.len()
        )));
    }
    check_states(system, states)?;
    let data = Dirichlet {
        left: u_l.clone(),
        right: u_r.clone(),
    };
    let p = DiffusiveProblem {
        system,
        diffusion,
        epsilon,
        nodes: mesh.nodes(),
        data: &data,
    };
    let x: Vec<f64> = states.iter().flat_map(|u| u.iter().copied()).collect();
    let r = p.residual(&x);
    let n = system.dimension;
    let y = mesh.nodes();
    let m = y.len();
    Ok(r.chunks(n)
        .enumerate()
        .map(|(k, row)| {
            let v = DVector::from_column_slice(row);
            if k == 0 || k == m - 1 {
                v
            } else {
                v / (0.5 * (y[k + 1] - y[k - 1]))
            }
        })
        .collect())
}

/// `max_j |mu_j(u, y)|`, bounded by the operator norm of `B^{-1}(A - y)` when
/// the pencil is not diagonalizable at a transient iterate.
pub(crate) fn max_abs_mu(system: &HyperbolicSystem, diffusion: &DiffusionModel, u: &State, y: f64) -> f64 {
    match generalized_eigen_unchecked(system, diffusion, u, y) {
        Ok(s) => s.mu.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        Err(_) => {
            let n = system.dimension;
            let mut a = system.jacobian_at(u);
            for i in 0..n {
                a[(i, i)] -= y;
            }
            match diffusion.at(u).try_inverse() {
                Some(bi) => op_norm(&(bi * a)),
                None => f64::INFINITY,
            }
        }
    }
}

/// Increments below this fraction of the jump threshold are treated as flat
/// for the Peclet test.
pub(crate) const PECLET_FLOOR: f64 = 1e-7;

pub(crate) fn layer_marker<'a>(
    system: &'a HyperbolicSystem,
    diffusion: &'a DiffusionModel,
    policy: &'a MeshPolicy,
    jump: f64,
) -> impl Fn(f64, &Discrete) -> Vec<bool> + 'a {
    move |epsilon, d| {
        let y = d.mesh.nodes();
        let mu: Vec<f64> = (0..y.len())
            .map(|k| max_abs_mu(system, diffusion, &DVector::from_column_slice(d.node(k)), y[k]))
            .collect();
        (0..y.len() - 1)
            .map(|k| {
                let h = y[k + 1] - y[k];
                let pe = h * mu[k].max(mu[k + 1]) / epsilon;
                let du: f64 = d
                    .node(k)
                    .iter()
                    .zip(d.node(k + 1))
                    .map(|(a, b)| (b - a) * (b - a))
                    .sum::<f64>()
                    .sqrt();
                (pe > policy.peclet_bound && du > PECLET_FLOOR * jump) || du > jump
            })
            .collect()
    }
}

pub(crate) fn jump_threshold(policy: &MeshPolicy, u_l: &State, u_r: &State) -> f64 {
    let size = (u_r - u_l).norm();
    if size > 0.0 {
        policy.jump_fraction * size
    } else {
        f64::INFINITY
    }
}

pub(crate) fn linear_guess(mesh: &Mesh, u_l: &State, u_r: &State) -> Vec<f64> {
    let (a, b) = (mesh.start(), mesh.end());
    let n = mesh.len();
    let mut x = Vec::with_capacity(n * u_l.len());
    for (k, &y) in mesh.nodes().iter().enumerate() {
        let u = if k == 0 {
            u_l.clone()
        } else if k == n - 1 {
            u_r.clone()
        } else {
            let t = (y - a) / (b - a);
            u_l + (u_r - u_l) * t
        };
        x.extend(u.iter());
    }
    x
}

fn to_states(d: &Discrete, n: usize) -> Vec<State> {
    d.x.chunks(n).map(DVector::from_column_slice).collect()
}

fn run_diffusive(
    system: &HyperbolicSystem,
    diffusion: &DiffusionModel,
    data: &Dirichlet,
    mesh: Mesh,
    schedule: &ContinuationSchedule,
    policy: &MeshPolicy,
) -> Result<Vec<(f64, Vec<State>, Mesh, NewtonReport)>> {
    system.check_in_ball(&data.left)?;
    system.check_in_ball(&data.right)?;
    let n = system.dimension;
    if data.left.len() != n || data.right.len() != n {
        return Err(Error::InvalidInput("data dimension mismatch".into()));
    }
    let initial = Discrete {
        x: linear_guess(&mesh, &data.left, &data.right),
        mesh,
        block: n,
        border: Vec::new(),
    };
    let jump = jump_threshold(policy, &data.left, &data.right);
    let marker = layer_marker(system, diffusion, policy, jump);
    let newton = |epsilon: f64, d: &Discrete| -> Result<(Discrete, NewtonReport)> {
        let p = DiffusiveProblem {
            system,
            diffusion,
            epsilon,
            nodes: d.mesh.nodes(),
            data,
        };
        let (x, rep) = newton::solve(&p, d.x.clone(), &policy.newton, epsilon)?;
        Ok((d.with_unknowns(x), rep))
    };
    let steps = march(&schedule.epsilons(), initial, policy, &marker, &newton)?;
    let mut out = Vec::with_capacity(steps.len());
    for (eps, d, rep) in steps {
        let mut states = to_states(&d, n);
        let last = states.len() - 1;
        states[0] = data.left.clone();
        states[last] = data.right.clone();
        check_states(system, &states)?;
        out.push((eps, states, d.mesh, rep));
    }
    Ok(out)
}

/// Self-similar viscous Riemann profiles on `[-L, L]`, one per schedule entry.
pub fn solve_riemann_diffusive(
    system: &HyperbolicSystem,
    diffusion: &DiffusionModel,
    u_l: &State,
    u_r: &State,
    schedule: &ContinuationSchedule,
    policy: &MeshPolicy,
) -> Result<Vec<SelfSimilarSolution>> {
    let l = system.domain_half_width;
    let data = Dirichlet {
        left: u_l.clone(),
        right: u_r.clone(),
    };
    let mesh = Mesh::uniform(-l, l, policy.initial_intervals);
    Ok(run_diffusive(system, diffusion, &data, mesh, schedule, policy)?
        .into_iter()
        .map(|(epsilon, states, mesh, newton_report)| SelfSimilarSolution {
            mesh,
            states,
            aux_states: None,
            epsilon,
            kind: RegularizationKind::Diffusive,
            relaxation_speed: None,
            newton_report,
            boundary: None,
        })
        .collect())
}

/// Smallest `w` such that the variation on `[y_0, w]` is 90% of the total.
pub(crate) fn layer_width(mesh: &Mesh, states: &[State]) -> f64 {
    let y = mesh.nodes();
    let incr: Vec<f64> = states.windows(2).map(|w| (&w[1] - &w[0]).norm()).collect();
    let total: f64 = incr.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    let target = 0.9 * total;
    let mut acc = 0.0;
    for (k, d) in incr.iter().enumerate() {
        if acc + d >= target {
            let t = if *d > 0.0 { (target - acc) / d } else { 0.0 };
            return y[k] + t * (y[k + 1] - y[k]) - y[0];
        }
        acc += d;
    }
    y[y.len() - 1] - y[0]
}

/// Half-space problem on `[0, L]` with `u(0) = u_b`, `u(L) = u_r`.
pub fn solve_boundary_diffusive(
    system: &HyperbolicSystem,
    diffusion: &DiffusionModel,
    u_b: &State,
    u_r: &State,
    schedule: &ContinuationSchedule,
    policy: &MeshPolicy,
) -> Result<Vec<SelfSimilarSolution>> {
    let l = system.domain_half_width;
    let p = system.speed_bands.iter().position(|b| b.upper > 0.0);
    let characteristic = p.is_some_and(|p| {
        let b = &system.speed_bands[p];
        b.lower < 0.0 && 0.0 < b.upper
    });
    let data = Dirichlet {
        left: u_b.clone(),
        right: u_r.clone(),
    };
    let mesh = Mesh::uniform(0.0, l, policy.initial_intervals);
    Ok(run_diffusive(system, diffusion, &data, mesh, schedule, policy)?
        .into_iter()
        .map(|(epsilon, states, mesh, newton_report)| {
            let layer = layer_width(&mesh, &states);
            SelfSimilarSolution {
                mesh,
                states,
                aux_states: None,
                epsilon,
                kind: RegularizationKind::BoundaryDiffusive,
                relaxation_speed: None,
                newton_report,
                boundary: Some(BoundaryInfo {
                    p,
                    characteristic,
                    layer_width: layer,
                }),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::burgers;

    fn s1(v: f64) -> State {
        State::from_element(1, v)
    }

    #[test]
    fn constants_have_zero_residual() {
        let m = burgers(0.0, 0.3, 1.0);
        let mesh = Mesh::uniform(-1.0, 1.0, 9);
        let states = vec![s1(0.1); 10];
        let r = diffusive_residual(&m.system, &m.diffusion, 0.01, &mesh, &states, &s1(0.1), &s1(0.1)).unwrap();
        assert!(r.iter().all(|v| v[0] == 0.0));
    }

    #[test]
    fn centered_weights_are_exact_for_quadratics() {
        let y = [0.0, 0.1, 0.35];
        let (a, b, c) = centered_weights(&y, 1);
        let f = |x: f64| 3.0 * x * x - x + 2.0;
        let d = a * f(y[0]) + b * f(y[1]) + c * f(y[2]);
        assert!((d - (6.0 * 0.1 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn out_of_ball_states_are_rejected() {
        let m = burgers(0.0, 0.3, 1.0);
        let mesh = Mesh::uniform(-1.0, 1.0, 2);
        let states = vec![s1(0.0), s1(0.5), s1(0.0)];
        let err = diffusive_residual(&m.system, &m.diffusion, 0.1, &mesh, &states, &s1(0.0), &s1(0.0)).unwrap_err();
        assert!(matches!(err.root(), Error::StateOutOfBall { .. }));
    }

    #[test]
    fn layer_width_of_a_ramp() {
        let mesh = Mesh::uniform(0.0, 1.0, 10);
        let states: Vec<State> = mesh.nodes().iter().map(|&y| s1(y)).collect();
        assert!((layer_width(&mesh, &states) - 0.9).abs() < 1e-12);
    }
}
