//! Viscous wave curves `m -> ψ_j(m; u_l)`: right states reachable from
//! `u_l` by a profile carrying only `j`-waves.
//!
//! Each curve point solves the diffusive problem with the right state as
//! `N` extra unknowns, closed by `N - 1` flatness rows (no `k`-wave content
//! across the foreign bands) and the amplitude row `l_j(u*) (u_r - u_l) = m`.

use nalgebra::{DMatrix, DVector, RowDVector};

use crate::analysis::{plateau_statistics, plateau_window};
use crate::bvp::diffusive::{jump_threshold, layer_marker, linear_guess, DiffusiveProblem, Dirichlet};
use crate::bvp::newton::{self, NewtonProblem, NewtonReport};
use crate::bvp::{
    check_states, march, ContinuationSchedule, Discrete, Mesh, MeshPolicy, RegularizationKind, SelfSimilarSolution,
};
use crate::error::{Error, Result};
use crate::system::{DiffusionModel, HyperbolicSystem, State};

/// Linear interpolation weights of `y` on the mesh.
fn interpolation(nodes: &[f64], y: f64) -> [(usize, f64); 2] {
    let k = nodes.partition_point(|&v| v <= y).clamp(1, nodes.len() - 1) - 1;
    let t = ((y - nodes[k]) / (nodes[k + 1] - nodes[k])).clamp(0.0, 1.0);
    [(k, 1.0 - t), (k + 1, t)]
}

/// Flatness probe points: the midpoints of the gaps on either side of each band.
fn gap_midpoints(system: &HyperbolicSystem) -> Vec<f64> {
    system.gaps().into_iter().map(|(a, b)| 0.5 * (a + b)).collect()
}

struct ExtendedProblem<'a> {
    core: DiffusiveProblem<'a>,
    /// Border rows acting on the node unknowns.
    bottom: DMatrix<f64>,
    /// Border rows acting on the right state.
    corner: DMatrix<f64>,
    rhs: DVector<f64>,
}

impl<'a> ExtendedProblem<'a> {
    #[allow(clippy::too_many_arguments)]
    fn new(
        system: &'a HyperbolicSystem,
        diffusion: &'a DiffusionModel,
        epsilon: f64,
        nodes: &'a [f64],
        data: &'a Dirichlet,
        family: usize,
        m: f64,
        left_covectors: &[RowDVector<f64>],
    ) -> Self {
        let n = system.dimension;
        let size = n * nodes.len();
        let mids = gap_midpoints(system);
        let mut bottom = DMatrix::zeros(n, size);
        let mut corner = DMatrix::zeros(n, n);
        let mut rhs = DVector::zeros(n);
        let mut row = 0;
        for (k, l) in left_covectors.iter().enumerate() {
            if k == family {
                continue;
            }
            let (right, left) = (interpolation(nodes, mids[k + 1]), interpolation(nodes, mids[k]));
            for (sign, w) in [(1.0, right), (-1.0, left)] {
                for (node, t) in w {
                    for i in 0..n {
                        bottom[(row, node * n + i)] += sign * t * l[i];
                    }
                }
            }
            row += 1;
        }
        for i in 0..n {
            corner[(row, i)] = left_covectors[family][i];
        }
        rhs[row] = m + (&left_covectors[family] * &data.left)[0];
        Self {
            core: DiffusiveProblem {
                system,
                diffusion,
                epsilon,
                nodes,
                data,
            },
            bottom,
            corner,
            rhs,
        }
    }
}

impl NewtonProblem for ExtendedProblem<'_> {
    fn block(&self) -> usize {
        self.core.system.dimension
    }
    fn node_count(&self) -> usize {
        self.core.nodes.len()
    }
    fn border(&self) -> usize {
        self.core.system.dimension
    }
    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let size = self.block() * self.node_count();
        let (nodes, right) = x.split_at(size);
        let mut r = self.core.core_residual(nodes, right);
        let border = &self.bottom * DVector::from_column_slice(nodes) + &self.corner * DVector::from_column_slice(right)
            - &self.rhs;
        r.extend(border.iter());
        r
    }
    fn border_jacobian(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        (self.bottom.clone(), self.corner.clone())
    }
}

/// One traced point of a wave curve.
#[derive(Debug, Clone)]
pub struct CurvePoint {
    pub m: f64,
    pub state: State,
    pub solution: SelfSimilarSolution,
    pub report: NewtonReport,
}

#[derive(Debug, Clone)]
pub struct WaveCurve {
    pub family: usize,
    pub base: State,
    pub epsilon: f64,
    /// Converged points in increasing `m`.
    pub points: Vec<CurvePoint>,
    /// Grid values whose solve failed, with the error message.
    pub failures: Vec<(f64, String)>,
    /// `∂_m ψ_j` by differences on the grid (one-sided at the ends).
    pub tangents: Vec<State>,
    /// `|l_j(u*) ∂_m ψ| / |∂_m ψ|`
    pub margins: Vec<f64>,
}

impl WaveCurve {
    pub fn m_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.m).collect()
    }

    pub fn states(&self) -> Vec<State> {
        self.points.iter().map(|p| p.state.clone()).collect()
    }

    /// Reachable parameter range `(m_min, m_max)`.
    pub fn range(&self) -> (f64, f64) {
        let m = self.m_values();
        (m[0], m[m.len() - 1])
    }

    /// Linear interpolation in `m`.
    pub fn at(&self, m: f64) -> State {
        let ms = self.m_values();
        if ms.len() == 1 {
            return self.points[0].state.clone();
        }
        let [(k, a), (k1, b)] = interpolation(&ms, m);
        &self.points[k].state * a + &self.points[k1].state * b
    }
}

fn differences(m: &[f64], states: &[State]) -> Vec<State> {
    let n = m.len();
    if n < 2 {
        return states.iter().map(|s| DVector::zeros(s.len())).collect();
    }
    (0..n)
        .map(|k| {
            let (a, b) = if k == 0 {
                (0, 1)
            } else if k == n - 1 {
                (n - 2, n - 1)
            } else {
                (k - 1, k + 1)
            };
            (&states[b] - &states[a]) / (m[b] - m[a])
        })
        .collect()
}

fn margin(covector: &RowDVector<f64>, tangent: &State) -> f64 {
    let norm = tangent.norm();
    if norm == 0.0 {
        0.0
    } else {
        (covector * tangent)[0].abs() / norm
    }
}

/// Default viscosity schedule used to reach the target `eps` at each point.
pub fn approach_schedule(epsilon: f64) -> Result<ContinuationSchedule> {
    if epsilon >= 0.1 {
        return ContinuationSchedule::from_list(vec![epsilon]);
    }
    ContinuationSchedule::geometric(0.1, 0.3, epsilon).map(|s| {
        let mut list = s.epsilons();
        if list.last().is_some_and(|&e| e > epsilon) {
            list.push(epsilon);
        }
        ContinuationSchedule::from_list(list).unwrap_or(s)
    })
}

/// Solves one curve point, marching in `eps` from a linear profile
/// towards `right_guess`.
#[allow(clippy::too_many_arguments)]
fn solve_point(
    system: &HyperbolicSystem,
    diffusion: &DiffusionModel,
    data: &Dirichlet,
    family: usize,
    m: f64,
    right_guess: &State,
    schedule: &ContinuationSchedule,
    policy: &MeshPolicy,
    covectors: &[RowDVector<f64>],
) -> Result<CurvePoint> {
    let n = system.dimension;
    let l = system.domain_half_width;
    let mesh = Mesh::uniform(-l, l, policy.initial_intervals);
    let initial = Discrete {
        x: linear_guess(&mesh, &data.left, right_guess),
        mesh,
        block: n,
        border: right_guess.iter().copied().collect(),
    };
    let jump = jump_threshold(policy, &data.left, right_guess);
    let marker = layer_marker(system, diffusion, policy, jump);
    let solve = |epsilon: f64, d: &Discrete| -> Result<(Discrete, NewtonReport)> {
        let p = ExtendedProblem::new(system, diffusion, epsilon, d.mesh.nodes(), data, family, m, covectors);
        let (x, rep) = newton::solve(&p, d.unknowns(), &policy.newton, epsilon)?;
        Ok((d.with_unknowns(x), rep))
    };
    let steps = march(&schedule.epsilons(), initial, policy, &marker, &solve)?;
    let (epsilon, d, report) = steps.into_iter().last().expect("schedule is never empty");
    let right = DVector::from_column_slice(&d.border);
    let mut states: Vec<State> = d.x.chunks(n).map(DVector::from_column_slice).collect();
    let last = states.len() - 1;
    states[0] = data.left.clone();
    states[last] = right.clone();
    check_states(system, &states)?;
    let solution = SelfSimilarSolution {
        mesh: d.mesh,
        states,
        aux_states: None,
        epsilon,
        kind: RegularizationKind::Diffusive,
        relaxation_speed: None,
        newton_report: report.clone(),
        boundary: None,
    };
    let tol = crate::analysis::plateau_tolerance(epsilon, &data.left, &right).max(1e-9);
    let gaps = system.gaps();
    let mut worst = (family, 0.0f64);
    for (k, l) in covectors.iter().enumerate() {
        if k == family {
            continue;
        }
        let a = plateau_statistics(&solution, plateau_window(gaps[k])).0;
        let b = plateau_statistics(&solution, plateau_window(gaps[k + 1])).0;
        let defect = (l * (b - a))[0].abs();
        if defect > worst.1 {
            worst = (k, defect);
        }
    }
    if worst.1 > tol {
        return Err(Error::FlatnessUnachievable {
            family: worst.0,
            defect: worst.1,
        });
    }
    Ok(CurvePoint {
        m,
        state: right,
        solution,
        report,
    })
}

/// Traces `ψ_j(·; u_l)` over `m_grid` at viscosity `epsilon`.
///
/// Points are continued outward from the grid value closest to zero; the
/// first failure in each direction ends that branch and is recorded.
pub fn trace_wave_curve(
    system: &HyperbolicSystem,
    diffusion: &DiffusionModel,
    u_l: &State,
    family: usize,
    m_grid: &[f64],
    epsilon: f64,
    policy: &MeshPolicy,
) -> Result<WaveCurve> {
    let n = system.dimension;
    if family >= n {
        return Err(Error::InvalidInput(format!("family {family} out of range for N = {n}")));
    }
    if m_grid.is_empty() || m_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("m grid must be nonempty and strictly increasing".into()));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
    }
    system.check_in_ball(u_l)?;
    let reference = system.reference_frame()?;
    let covectors: Vec<RowDVector<f64>> = (0..n).map(|k| reference.l(k)).collect();
    let direction = crate::system::eigendecompose(system, u_l)?.r(family);
    let scale = (&covectors[family] * &direction)[0];
    let direction = direction / scale;
    let schedule = approach_schedule(epsilon)?;
    let data = Dirichlet {
        left: u_l.clone(),
        right: u_l.clone(),
    };
    let start = (0..m_grid.len())
        .min_by(|&a, &b| m_grid[a].abs().total_cmp(&m_grid[b].abs()))
        .unwrap_or(0);
    let mut points: Vec<CurvePoint> = Vec::new();
    let mut failures = Vec::new();
    let first_guess = u_l + &direction * m_grid[start];
    let first = solve_point(
        system, diffusion, &data, family, m_grid[start], &first_guess, &schedule, policy, &covectors,
    )?;
    let mut right_branch = vec![first.clone()];
    let mut left_branch: Vec<CurvePoint> = Vec::new();
    for (forward, range) in [(true, (start + 1..m_grid.len()).collect::<Vec<_>>()), (false, (0..start).rev().collect())] {
        for idx in range {
            let m = m_grid[idx];
            let branch = if forward { &right_branch } else { &left_branch };
            let prev = branch.last().unwrap_or(&first);
            let guess = match branch.len() {
                n if n >= 2 || (!forward && n >= 1) => {
                    let before = if branch.len() >= 2 { &branch[branch.len() - 2] } else { &first };
                    let slope = (&prev.state - &before.state) / (prev.m - before.m);
                    &prev.state + slope * (m - prev.m)
                }
                _ => &prev.state + &direction * (m - prev.m),
            };
            match solve_point(system, diffusion, &data, family, m, &guess, &schedule, policy, &covectors) {
                Ok(p) => {
                    if forward {
                        right_branch.push(p)
                    } else {
                        left_branch.push(p)
                    }
                }
                Err(e) => {
                    log::warn!("wave curve family {family}: point m = {m} failed: {e}");
                    failures.push((m, e.to_string()));
                    break;
                }
            }
        }
    }
    left_branch.reverse();
    points.extend(left_branch);
    points.extend(right_branch);
    let ms: Vec<f64> = points.iter().map(|p| p.m).collect();
    let states: Vec<State> = points.iter().map(|p| p.state.clone()).collect();
    let tangents = differences(&ms, &states);
    let margins = tangents.iter().map(|t| margin(&covectors[family], t)).collect();
    Ok(WaveCurve {
        family,
        base: u_l.clone(),
        epsilon,
        points,
        failures,
        tangents,
        margins,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeReport {
    pub c: f64,
    /// Family whose left eigenvector measures the tangents.
    pub against: usize,
    pub margins: Vec<f64>,
    pub min_margin: f64,
    pub passed: bool,
}

/// Checks `|l_j(u*) ∂_m ψ| / |∂_m ψ| >= 1 - c` along the curve.
pub fn cone_check(system: &HyperbolicSystem, curve: &WaveCurve, c: f64) -> Result<ConeReport> {
    cone_check_against(system, curve, curve.family, c)
}

/// Cone margins measured with the left eigenvector of family `against`.
pub fn cone_check_against(system: &HyperbolicSystem, curve: &WaveCurve, against: usize, c: f64) -> Result<ConeReport> {
    if curve.points.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "cone check needs at least 3 curve points, got {}",
            curve.points.len()
        )));
    }
    let l = system.reference_frame()?.l(against);
    let margins: Vec<f64> = curve.tangents.iter().map(|t| margin(&l, t)).collect();
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ConeReport {
        c,
        against,
        margins,
        min_margin,
        passed: min_margin >= 1.0 - c,
    })
}

#[derive(Debug, Clone)]
pub struct LipschitzReport {
    /// `max |ψ(m; u) - ψ(m'; u')| / (|m - m'| + |u - u'|)`
    pub constant: f64,
    pub pairs: usize,
    pub curves: Vec<WaveCurve>,
}

/// Difference quotients of `ψ_j` over a grid of base states and `m` values.
pub fn lipschitz_probe(
    system: &HyperbolicSystem,
    diffusion: &DiffusionModel,
    family: usize,
    bases: &[State],
    m_grid: &[f64],
    epsilon: f64,
    policy: &MeshPolicy,
) -> Result<LipschitzReport> {
    let curves = bases
        .iter()
        .map(|b| trace_wave_curve(system, diffusion, b, family, m_grid, epsilon, policy))
        .collect::<Result<Vec<_>>>()?;
    let samples: Vec<(f64, &State, &State)> = curves
        .iter()
        .flat_map(|c| c.points.iter().map(move |p| (p.m, &c.base, &p.state)))
        .collect();
    let mut constant = 0.0f64;
    let mut pairs = 0;
    for (a, pa) in samples.iter().enumerate() {
        for pb in &samples[a + 1..] {
            let den = (pa.0 - pb.0).abs() + (pa.1 - pb.1).norm();
            if den == 0.0 {
                continue;
            }
            pairs += 1;
            constant = constant.max((pa.2 - pb.2).norm() / den);
        }
    }
    Ok(LipschitzReport {
        constant,
        pairs,
        curves,
    })
}
