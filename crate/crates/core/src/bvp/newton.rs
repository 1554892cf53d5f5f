//! Damped Newton iteration on block-banded residuals with an optional dense
//! border, using a coloured finite-difference Jacobian.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{BandedMatrix, BorderedSystem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub max_backtracks: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 60,
            max_backtracks: 30,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NewtonReport {
    pub iterations: usize,
    pub residual: f64,
    pub backtracks: usize,
}

/// A nonlinear system whose core rows at node `k` only involve the node
/// blocks `k - reach ..= k + reach` and the border unknowns. Border rows
/// must be linear; their Jacobian is supplied directly.
pub(crate) trait NewtonProblem {
    fn block(&self) -> usize;
    fn node_count(&self) -> usize;
    fn reach(&self) -> usize {
        1
    }
    fn border(&self) -> usize {
        0
    }
    /// Core rows followed by border rows. Non-finite entries mark an
    /// inadmissible iterate.
    fn residual(&self, x: &[f64]) -> Vec<f64>;
    /// `(bottom, corner)` blocks of the border rows.
    fn border_jacobian(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.block() * self.node_count();
        (DMatrix::zeros(0, n), DMatrix::zeros(0, 0))
    }
}

pub(crate) fn max_norm(r: &[f64]) -> f64 {
    r.iter().fold(0.0f64, |m, v| if v.is_finite() { m.max(v.abs()) } else { f64::INFINITY })
}

fn fd_step(x: f64) -> f64 {
    1.5e-8 * x.abs().max(1.0)
}

fn central_step(x: f64) -> f64 {
    6e-6 * x.abs().max(1.0)
}

/// Finite-difference Jacobian: forward differences against `r0`, or central
/// differences when `central` is set (twice the residual evaluations).
pub(crate) fn jacobian(problem: &dyn NewtonProblem, x: &[f64], r0: &[f64], central: bool) -> BorderedSystem {
    let b = problem.block();
    let nodes = problem.node_count();
    let n = b * nodes;
    let reach = problem.reach();
    let band = (reach + 1) * b - 1;
    let mut core = BandedMatrix::zeros(n, band, band);
    let step = if central { central_step } else { fd_step };
    let colours = 2 * reach + 1;
    let mut xp = x.to_vec();
    for colour in 0..colours {
        for m in 0..b {
            let mut steps = Vec::new();
            for k in (colour..nodes).step_by(colours) {
                let idx = k * b + m;
                let d = step(x[idx]);
                xp[idx] = x[idx] + d;
                steps.push((k, d));
            }
            let rp = problem.residual(&xp);
            let rm = if central {
                for &(k, d) in &steps {
                    xp[k * b + m] = x[k * b + m] - d;
                }
                problem.residual(&xp)
            } else {
                Vec::new()
            };
            for &(k, d) in &steps {
                let col = k * b + m;
                xp[col] = x[col];
                let lo = k.saturating_sub(reach);
                let hi = (k + reach).min(nodes - 1);
                for row_node in lo..=hi {
                    for i in 0..b {
                        let row = row_node * b + i;
                        let v = if central {
                            (rp[row] - rm[row]) / (2.0 * d)
                        } else {
                            (rp[row] - r0[row]) / d
                        };
                        if v != 0.0 {
                            core.set(row, col, v);
                        }
                    }
                }
            }
        }
    }
    let p = problem.border();
    let mut sys = BorderedSystem::new(core, p);
    for c in 0..p {
        let idx = n + c;
        let d = step(x[idx]);
        xp[idx] = x[idx] + d;
        let rp = problem.residual(&xp);
        if central {
            xp[idx] = x[idx] - d;
            let rm = problem.residual(&xp);
            for row in 0..n {
                sys.right[(row, c)] = (rp[row] - rm[row]) / (2.0 * d);
            }
        } else {
            for row in 0..n {
                sys.right[(row, c)] = (rp[row] - r0[row]) / d;
            }
        }
        xp[idx] = x[idx];
    }
    if p > 0 {
        let (bottom, corner) = problem.border_jacobian();
        sys.bottom = bottom;
        sys.corner = corner;
    }
    sys
}

/// Newton with residual-monotone backtracking (step halving).
pub(crate) fn solve(
    problem: &dyn NewtonProblem,
    x0: Vec<f64>,
    settings: &NewtonSettings,
    epsilon: f64,
) -> Result<(Vec<f64>, NewtonReport)> {
    let mut x = x0;
    let mut r = problem.residual(&x);
    let mut norm = max_norm(&r);
    let mut report = NewtonReport {
        iterations: 0,
        residual: norm,
        backtracks: 0,
    };
    let diverged = |report: &NewtonReport, x: &[f64]| Error::NewtonDiverged {
        epsilon,
        iterations: report.iterations,
        residual: report.residual,
        iterate: x.to_vec(),
    };
    if !norm.is_finite() {
        return Err(diverged(&report, &x));
    }
    while norm > settings.tolerance {
        if report.iterations >= settings.max_iterations {
            return Err(diverged(&report, &x));
        }
        report.iterations += 1;
        let neg: Vec<f64> = r.iter().map(|v| -v).collect();
        // forward differences first; central differences when the line
        // search stalls on the less accurate Jacobian
        let mut accepted = false;
        for central in [false, true] {
            let dx = match jacobian(problem, &x, &r, central).solve(&neg) {
                Ok(dx) => dx,
                Err(_) => continue,
            };
            let mut t = 1.0;
            for _ in 0..=settings.max_backtracks {
                let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + t * d).collect();
                let rt = problem.residual(&trial);
                let nt = max_norm(&rt);
                if nt < norm {
                    x = trial;
                    r = rt;
                    norm = nt;
                    accepted = true;
                    break;
                }
                t *= 0.5;
                report.backtracks += 1;
            }
            if accepted {
                break;
            }
        }
        report.residual = norm;
        if !accepted {
            return Err(diverged(&report, &x));
        }
    }
    report.residual = norm;
    Ok((x, report))
}
