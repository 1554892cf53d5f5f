//! Self-similar relaxation system
//! `v' = y u'`, `(a^2 B(u) - y^2) u' = (f(u) - v) / eps`
//! discretized by the midpoint box scheme with unknowns `(u, v)` per node.

use nalgebra::{DMatrix, DVector};

use super::diffusive::{jump_threshold, linear_guess, Dirichlet, PECLET_FLOOR};
use super::newton::{self, NewtonProblem, NewtonReport};
use super::{check_states, march, ContinuationSchedule, Discrete, Mesh, MeshPolicy, RegularizationKind, SelfSimilarSolution};
use crate::error::{Error, Result};
use crate::linalg::{min_sym_eigenvalue, op_norm};
use crate::system::{sample_states, DiffusionModel, HyperbolicSystem, State, VectorFn};

struct RelaxationProblem<'a> {
    system: &'a HyperbolicSystem,
    diffusion: &'a DiffusionModel,
    flux: &'a VectorFn,
    speed: f64,
    epsilon: f64,
    nodes: &'a [f64],
    data: &'a Dirichlet,
}

impl RelaxationProblem<'_> {
    fn operator(&self, u: &State, y: f64) -> DMatrix<f64> {
        let n = self.system.dimension;
        self.diffusion.at(u) * (self.speed * self.speed) - DMatrix::identity(n, n) * (y * y)
    }
}

impl NewtonProblem for RelaxationProblem<'_> {
    fn block(&self) -> usize {
        2 * self.system.dimension
    }
    fn node_count(&self) -> usize {
        self.nodes.len()
    }
    /// Row block `k`: the `u`-equation of interval `k - 1` (or the left
    /// boundary), then the `v`-equation of interval `k` (or the right boundary).
    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let n = self.system.dimension;
        let b = 2 * n;
        let y = self.nodes;
        let m = y.len();
        let u = |k: usize| DVector::from_column_slice(&x[k * b..k * b + n]);
        let v = |k: usize| DVector::from_column_slice(&x[k * b + n..(k + 1) * b]);
        let mut r = vec![0.0; b * m];
        for i in 0..n {
            r[i] = x[i] - self.data.left[i];
            r[(m - 1) * b + n + i] = x[(m - 1) * b + i] - self.data.right[i];
        }
        for k in 0..m - 1 {
            let h = y[k + 1] - y[k];
            let ym = 0.5 * (y[k] + y[k + 1]);
            let (u0, u1, v0, v1) = (u(k), u(k + 1), v(k), v(k + 1));
            let du = (&u1 - &u0) / h;
            let dv = (&v1 - &v0) / h;
            let um = (&u0 + &u1) * 0.5;
            let vm = (&v0 + &v1) * 0.5;
            let veq = dv - &du * ym;
            let ueq = self.operator(&um, ym) * du * self.epsilon - ((self.flux)(&um) - vm);
            r[k * b + n..(k + 1) * b].copy_from_slice(veq.as_slice());
            r[(k + 1) * b..(k + 1) * b + n].copy_from_slice(ueq.as_slice());
        }
        r
    }
}

fn resonance_margin(diffusion: &DiffusionModel, speed: f64, u: &State, y: f64) -> f64 {
    speed * speed * min_sym_eigenvalue(&diffusion.at(u)) - y * y
}

fn check_resonance(diffusion: &DiffusionModel, speed: f64, nodes: &[f64], states: &[State]) -> Result<()> {
    for (&y, u) in nodes.iter().zip(states) {
        let margin = resonance_margin(diffusion, speed, u, y);
        if !(margin > 0.0) {
            return Err(Error::ResonanceSingular { y, margin });
        }
    }
    Ok(())
}

/// Per-node residual blocks (layout of the box scheme, `2N` rows per node).
#[allow(clippy::too_many_arguments)]
pub fn relaxation_residual(
    system: &HyperbolicSystem,
    diffusion: &DiffusionModel,
    speed: f64,
    epsilon: f64,
    mesh: &Mesh,
    states: &[State],
    aux_states: &[State],
    u_l: &State,
    u_r: &State,
) -> Result<Vec<DVector<f64>>> {
    let flux = system.flux.as_ref().ok_or(Error::MissingFlux)?;
    if states.len() != mesh.len() || aux_states.len() != mesh.len() {
        return Err(Error::InvalidInput("state count does not match mesh".into()));
    }
    check_states(system, states)?;
    let data = Dirichlet {
        left: u_l.clone(),
        right: u_r.clone(),
    };
    let p = RelaxationProblem {
        system,
        diffusion,
        flux,
        speed,
        epsilon,
        nodes: mesh.nodes(),
        data: &data,
    };
    let x: Vec<f64> = states
        .iter()
        .zip(aux_states)
        .flat_map(|(u, v)| u.iter().chain(v.iter()).copied().collect::<Vec<_>>())
        .collect();
    Ok(p.residual(&x)
        .chunks(2 * system.dimension)
        .map(DVector::from_column_slice)
        .collect())
}

/// Relaxation profiles on `[-L, L]` for relaxation speed `speed`.
pub fn solve_riemann_relaxation(
    system: &HyperbolicSystem,
    diffusion: &DiffusionModel,
    speed: f64,
    u_l: &State,
    u_r: &State,
    schedule: &ContinuationSchedule,
    policy: &MeshPolicy,
) -> Result<Vec<SelfSimilarSolution>> {
    let flux = system.flux.as_ref().ok_or(Error::MissingFlux)?;
    system.check_in_ball(u_l)?;
    system.check_in_ball(u_r)?;
    let n = system.dimension;
    let l = system.domain_half_width;
    let mut probes = sample_states(system, 64, 0);
    probes.push(system.reference_state.clone());
    for u in &probes {
        let margin = resonance_margin(diffusion, speed, u, l);
        if !(margin > 0.0) {
            return Err(Error::ResonanceSingular { y: l, margin });
        }
    }
    let mesh = Mesh::uniform(-l, l, policy.initial_intervals);
    let ux = linear_guess(&mesh, u_l, u_r);
    let mut x = Vec::with_capacity(2 * ux.len());
    for chunk in ux.chunks(n) {
        let u = DVector::from_column_slice(chunk);
        x.extend(u.iter());
        x.extend(flux(&u).iter());
    }
    let initial = Discrete {
        mesh,
        block: 2 * n,
        x,
        border: Vec::new(),
    };
    let data = Dirichlet {
        left: u_l.clone(),
        right: u_r.clone(),
    };
    let jump = jump_threshold(policy, u_l, u_r);
    let marker = |epsilon: f64, d: &Discrete| -> Vec<bool> {
        let y = d.mesh.nodes();
        (0..y.len() - 1)
            .map(|k| {
                let u0 = DVector::from_column_slice(&d.node(k)[..n]);
                let u1 = DVector::from_column_slice(&d.node(k + 1)[..n]);
                let um = (&u0 + &u1) * 0.5;
                let ym = 0.5 * (y[k] + y[k + 1]);
                let op = diffusion.at(&um) * (speed * speed) - DMatrix::identity(n, n) * (ym * ym);
                let mut a = system.jacobian_at(&um);
                for i in 0..n {
                    a[(i, i)] -= ym;
                }
                let rate = op.try_inverse().map_or(f64::INFINITY, |inv| op_norm(&inv) * op_norm(&a)) / epsilon;
                let h = y[k + 1] - y[k];
                let du = (&u1 - &u0).norm();
                (h * rate > policy.peclet_bound && du > PECLET_FLOOR * jump) || du > jump
            })
            .collect()
    };
    let newton = |epsilon: f64, d: &Discrete| -> Result<(Discrete, NewtonReport)> {
        let p = RelaxationProblem {
            system,
            diffusion,
            flux,
            speed,
            epsilon,
            nodes: d.mesh.nodes(),
            data: &data,
        };
        let (x, rep) = newton::solve(&p, d.x.clone(), &policy.newton, epsilon)?;
        Ok((d.with_unknowns(x), rep))
    };
    let steps = march(&schedule.epsilons(), initial, policy, &marker, &newton)?;
    let mut out = Vec::with_capacity(steps.len());
    for (epsilon, d, newton_report) in steps {
        let mut states = Vec::with_capacity(d.mesh.len());
        let mut aux = Vec::with_capacity(d.mesh.len());
        for k in 0..d.mesh.len() {
            states.push(DVector::from_column_slice(&d.node(k)[..n]));
            aux.push(DVector::from_column_slice(&d.node(k)[n..]));
        }
        let last = states.len() - 1;
        states[0] = u_l.clone();
        states[last] = u_r.clone();
        check_states(system, &states)?;
        check_resonance(diffusion, speed, d.mesh.nodes(), &states)?;
        out.push(SelfSimilarSolution {
            mesh: d.mesh,
            states,
            aux_states: Some(aux),
            epsilon,
            kind: RegularizationKind::Relaxation,
            relaxation_speed: Some(speed),
            newton_report,
            boundary: None,
        });
    }
    Ok(out)
}

/// `|v - f(u)|` at the two ends of a relaxation profile.
pub fn equilibrium_defect(system: &HyperbolicSystem, solution: &SelfSimilarSolution) -> Result<(f64, f64)> {
    let flux = system.flux.as_ref().ok_or(Error::MissingFlux)?;
    let aux = solution
        .aux_states
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("not a relaxation profile".into()))?;
    let last = aux.len() - 1;
    Ok((
        (&aux[0] - flux(&solution.states[0])).norm(),
        (&aux[last] - flux(&solution.states[last])).norm(),
    ))
}
