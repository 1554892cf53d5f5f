//! Hyperbolic systems, diffusion matrices and entropy pairs, together with
//! sampling-based checks of the structural hypotheses.

use std::fmt;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector, RowDVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, EigenFailure};

pub type State = DVector<f64>;
pub type MatrixFn = Arc<dyn Fn(&State) -> DMatrix<f64> + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&State) -> DVector<f64> + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(&State) -> f64 + Send + Sync>;

/// Interval `[lower, upper]` confining one characteristic speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedBand {
    pub lower: f64,
    pub upper: f64,
}

impl SpeedBand {
    pub fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }

    pub fn contains(&self, y: f64) -> bool {
        y >= self.lower && y <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Strictly hyperbolic system `u_t + A(u) u_x = 0` on a ball of states.
#[derive(Clone)]
pub struct HyperbolicSystem {
    pub name: String,
    pub dimension: usize,
    pub reference_state: State,
    pub ball_radius: f64,
    pub jacobian: MatrixFn,
    pub flux: Option<VectorFn>,
    pub domain_half_width: f64,
    pub speed_bands: Vec<SpeedBand>,
    reference_frame: OnceLock<std::result::Result<EigenFrame, Error>>,
}

impl fmt::Debug for HyperbolicSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HyperbolicSystem")
            .field("name", &self.name)
            .field("dimension", &self.dimension)
            .field("reference_state", &self.reference_state.as_slice())
            .field("ball_radius", &self.ball_radius)
            .field("conservative", &self.flux.is_some())
            .field("domain_half_width", &self.domain_half_width)
            .field("speed_bands", &self.speed_bands)
            .finish()
    }
}

impl HyperbolicSystem {
    pub fn new(
        name: impl Into<String>,
        reference_state: State,
        ball_radius: f64,
        jacobian: MatrixFn,
        flux: Option<VectorFn>,
        domain_half_width: f64,
        speed_bands: Vec<SpeedBand>,
    ) -> Self {
        let dimension = reference_state.len();
        Self {
            name: name.into(),
            dimension,
            reference_state,
            ball_radius,
            jacobian,
            flux,
            domain_half_width,
            speed_bands,
            reference_frame: OnceLock::new(),
        }
    }

    /// Replaces the speed bands (and invalidates nothing else).
    pub fn with_speed_bands(mut self, bands: Vec<SpeedBand>) -> Self {
        self.speed_bands = bands;
        self
    }

    pub fn with_domain_half_width(mut self, half_width: f64) -> Self {
        self.domain_half_width = half_width;
        self
    }

    pub fn is_conservative(&self) -> bool {
        self.flux.is_some()
    }

    pub fn jacobian_at(&self, u: &State) -> DMatrix<f64> {
        (self.jacobian)(u)
    }

    pub fn flux_at(&self, u: &State) -> Result<DVector<f64>> {
        self.flux.as_ref().map(|f| f(u)).ok_or(Error::MissingFlux)
    }

    pub fn distance_from_reference(&self, u: &State) -> f64 {
        (u - &self.reference_state).norm()
    }

    pub fn in_ball(&self, u: &State) -> bool {
        self.distance_from_reference(u) <= self.ball_radius * (1.0 + 1e-12)
    }

    pub fn check_in_ball(&self, u: &State) -> Result<()> {
        let d = self.distance_from_reference(u);
        if d <= self.ball_radius * (1.0 + 1e-12) {
            Ok(())
        } else {
            Err(Error::StateOutOfBall {
                state: u.iter().copied().collect(),
                distance: d,
                radius: self.ball_radius,
            })
        }
    }

    /// Eigenframe at the reference state; sign convention: largest
    /// component of every right eigenvector is positive.
    pub fn reference_frame(&self) -> Result<EigenFrame> {
        self.reference_frame
            .get_or_init(|| {
                let u = &self.reference_state;
                let mut raw = raw_frame(&self.jacobian_at(u), u)?;
                for j in 0..self.dimension {
                    let col = raw.right.column(j);
                    let amax = col.amax();
                    let lead = col
                        .iter()
                        .find(|v| v.abs() >= amax * (1.0 - 1e-12))
                        .copied()
                        .unwrap_or(1.0);
                    if lead < 0.0 {
                        raw.flip(j);
                    }
                }
                Ok(raw)
            })
            .clone()
    }

    /// Gaps between consecutive bands plus the two end intervals, as
    /// `(start, end)` pairs ordered left to right: `N + 1` intervals.
    pub fn gaps(&self) -> Vec<(f64, f64)> {
        let l = self.domain_half_width;
        let mut out = Vec::with_capacity(self.dimension + 1);
        let mut left = -l;
        for band in &self.speed_bands {
            out.push((left, band.lower));
            left = band.upper;
        }
        out.push((left, l));
        out
    }
}

/// Eigenvalues (ascending) with left rows and right columns, `L R = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenFrame {
    pub eigenvalues: Vec<f64>,
    pub left: DMatrix<f64>,
    pub right: DMatrix<f64>,
}

impl EigenFrame {
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

    /// `sum_j lambda_j r_j l_j`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let n = self.eigenvalues.len();
        let mut a = DMatrix::zeros(n, n);
        for j in 0..n {
            a += self.r(j) * self.l(j) * self.eigenvalues[j];
        }
        a
    }
}

fn raw_frame(a: &DMatrix<f64>, u: &State) -> Result<EigenFrame> {
    match linalg::real_eigen(a) {
        Ok(e) => Ok(EigenFrame {
            eigenvalues: e.values,
            left: e.left,
            right: e.right,
        }),
        Err(EigenFailure::NonReal { imag }) => Err(Error::NonRealSpectrum {
            state: u.iter().copied().collect(),
            imag,
        }),
        Err(EigenFailure::Collision { gap }) => Err(Error::EigenvalueCollision {
            state: u.iter().copied().collect(),
            gap,
        }),
        Err(EigenFailure::Singular) => Err(Error::EigenvalueCollision {
            state: u.iter().copied().collect(),
            gap: 0.0,
        }),
    }
}

/// Eigendecomposition of `A(u)` for `u` in the admissible ball.
pub fn eigendecompose(system: &HyperbolicSystem, u: &State) -> Result<EigenFrame> {
    system.check_in_ball(u)?;
    eigendecompose_unchecked(system, u)
}

/// As [`eigendecompose`] without the ball check (used on Newton iterates).
pub fn eigendecompose_unchecked(system: &HyperbolicSystem, u: &State) -> Result<EigenFrame> {
    let reference = system.reference_frame()?;
    let mut frame = raw_frame(&system.jacobian_at(u), u)?;
    for j in 0..system.dimension {
        if frame.r(j).dot(&reference.r(j)) < 0.0 {
            frame.flip(j);
        }
    }
    Ok(frame)
}

/// Diffusion matrix `B(u)` with its measured distance `eta` from identity.
#[derive(Clone)]
pub struct DiffusionModel {
    pub name: String,
    pub matrix: MatrixFn,
    pub eta: f64,
    pub eta_max: f64,
}

impl fmt::Debug for DiffusionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiffusionModel")
            .field("name", &self.name)
            .field("eta", &self.eta)
            .field("eta_max", &self.eta_max)
            .finish()
    }
}

impl DiffusionModel {
    pub fn new(name: impl Into<String>, matrix: MatrixFn, eta_max: f64) -> Self {
        Self {
            name: name.into(),
            matrix,
            eta: f64::NAN,
            eta_max,
        }
    }

    pub fn identity(dimension: usize) -> Self {
        let mut d = Self::new(
            "identity",
            Arc::new(move |_| DMatrix::identity(dimension, dimension)),
            0.0,
        );
        d.eta = 0.0;
        d
    }

    pub fn at(&self, u: &State) -> DMatrix<f64> {
        (self.matrix)(u)
    }

    /// `|B(u) - Id|` in the operator 2-norm.
    pub fn deviation_at(&self, u: &State) -> f64 {
        let b = self.at(u);
        let n = b.nrows();
        linalg::op_norm(&(b - DMatrix::identity(n, n)))
    }
}

/// Entropy / entropy-flux pair `(U, F)` with derivative evaluators.
#[derive(Clone)]
pub struct EntropyPair {
    pub name: String,
    pub entropy: ScalarFn,
    pub gradient: VectorFn,
    pub hessian: MatrixFn,
    pub flux: ScalarFn,
    pub flux_gradient: VectorFn,
}

impl fmt::Debug for EntropyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EntropyPair").field("name", &self.name).finish()
    }
}

impl EntropyPair {
    /// The pair `(-U, -F)`; fails the convexity-like condition whenever the
    /// original pair satisfies it strictly.
    pub fn negated(&self) -> Self {
        let (u, g, h, f, fg) = (
            self.entropy.clone(),
            self.gradient.clone(),
            self.hessian.clone(),
            self.flux.clone(),
            self.flux_gradient.clone(),
        );
        Self {
            name: format!("negated {}", self.name),
            entropy: Arc::new(move |s| -u(s)),
            gradient: Arc::new(move |s| -g(s)),
            hessian: Arc::new(move |s| -h(s)),
            flux: Arc::new(move |s| -f(s)),
            flux_gradient: Arc::new(move |s| -fg(s)),
        }
    }
}

/// Deterministic sample set on the admissible ball.
///
/// The sequence is nested: the first `k` samples are the same for every
/// `count >= k`, so maxima over samples are monotone in `count`.
pub fn sample_states(system: &HyperbolicSystem, count: usize, seed: u64) -> Vec<State> {
    let n = system.dimension;
    let center = &system.reference_state;
    let r = system.ball_radius;
    let mut out = Vec::with_capacity(count);
    out.push(center.clone());
    for i in 0..n {
        for s in [-1.0, 1.0] {
            let mut u = center.clone();
            u[i] += s * r;
            out.push(u);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < count {
        let mut d = DVector::from_fn(n, |_, _| rng.random_range(-1.0..=1.0));
        let norm = d.norm();
        if norm > 1.0 || norm == 0.0 {
            continue;
        }
        d *= r;
        out.push(center + d);
    }
    out.truncate(count.max(1));
    out
}

/// Outcome of one structural check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Worst-case margin; negative when violated.
    pub margin: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub system: String,
    pub sample_count: usize,
    pub eta: f64,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const FLUX_JACOBIAN_TOL: f64 = 1e-6;
pub const ENTROPY_COMPAT_TOL: f64 = 1e-6;
pub const CONVEXITY_TOL: f64 = 1e-12;

/// Central finite-difference Jacobian of `f` at `u`.
pub fn fd_jacobian(f: &dyn Fn(&State) -> DVector<f64>, u: &State) -> DMatrix<f64> {
    let n = u.len();
    let m = f(u).len();
    let mut jac = DMatrix::zeros(m, n);
    for k in 0..n {
        let h = 1e-6 * (1.0 + u[k].abs());
        let mut up = u.clone();
        let mut dn = u.clone();
        up[k] += h;
        dn[k] -= h;
        let col = (f(&up) - f(&dn)) / (2.0 * h);
        jac.set_column(k, &col);
    }
    jac
}

/// Checks the standing hypotheses on `sample_count` sampled states and
/// records the measured `eta` into `diffusion`.
pub fn validate_system(
    system: &HyperbolicSystem,
    diffusion: &mut DiffusionModel,
    entropy_pairs: &[EntropyPair],
    sample_count: usize,
    seed: u64,
) -> ValidationReport {
    let samples = sample_states(system, sample_count, seed);
    let n = system.dimension;
    let mut checks = Vec::new();

    // strict hyperbolicity
    let mut frames = Vec::with_capacity(samples.len());
    let mut min_gap = f64::INFINITY;
    let mut hyperbolic_detail = String::new();
    for u in &samples {
        match eigendecompose(system, u) {
            Ok(fr) => {
                for w in fr.eigenvalues.windows(2) {
                    min_gap = min_gap.min(w[1] - w[0]);
                }
                frames.push(Some(fr));
            }
            Err(e) => {
                if hyperbolic_detail.is_empty() {
                    hyperbolic_detail = e.to_string();
                }
                min_gap = min_gap.min(0.0);
                frames.push(None);
            }
        }
    }
    let hyperbolic = frames.iter().all(|f| f.is_some());
    if n == 1 && hyperbolic {
        min_gap = f64::INFINITY;
    }
    checks.push(Check {
        name: "strict_hyperbolicity".into(),
        passed: hyperbolic,
        margin: if n == 1 && hyperbolic { 0.0 } else { min_gap },
        detail: if hyperbolic {
            "real distinct eigenvalues at all samples".into()
        } else {
            hyperbolic_detail
        },
    });

    // band ordering
    let l = system.domain_half_width;
    let mut edges = vec![-l];
    for b in &system.speed_bands {
        edges.push(b.lower);
        edges.push(b.upper);
    }
    edges.push(l);
    let ordering_margin = edges
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let count_ok = system.speed_bands.len() == n;
    checks.push(Check {
        name: "band_ordering".into(),
        passed: count_ok && ordering_margin > 0.0,
        margin: if count_ok { ordering_margin } else { -1.0 },
        detail: if !count_ok {
            format!("{} bands for {} families", system.speed_bands.len(), n)
        } else if ordering_margin > 0.0 {
            "-L < lower_1 < upper_1 < ... < upper_N < L".into()
        } else {
            let k = edges
                .windows(2)
                .position(|w| w[1] - w[0] <= 0.0)
                .unwrap_or(0);
            format!("ordering violated between edges {k} and {}", k + 1)
        },
    });

    // eigenvalues in bands
    if count_ok {
        let mut margin = f64::INFINITY;
        for fr in frames.iter().flatten() {
            for (j, lam) in fr.eigenvalues.iter().enumerate() {
                let b = system.speed_bands[j];
                margin = margin.min((lam - b.lower).min(b.upper - lam));
            }
        }
        checks.push(Check {
            name: "eigenvalues_in_bands".into(),
            passed: margin >= 0.0,
            margin,
            detail: "lambda_j(u) in [lower_j, upper_j] on samples".into(),
        });
    }

    // flux consistency
    if let Some(flux) = &system.flux {
        let mut worst = 0.0f64;
        for u in &samples {
            let fd = fd_jacobian(&|s: &State| flux(s), u);
            let a = system.jacobian_at(u);
            worst = worst.max((fd - &a).amax() / a.amax().max(1.0));
        }
        checks.push(Check {
            name: "flux_jacobian".into(),
            passed: worst <= FLUX_JACOBIAN_TOL,
            margin: FLUX_JACOBIAN_TOL - worst,
            detail: format!("max relative |Df - A| = {worst:e}"),
        });
    }

    // diffusion closeness and invertibility
    let mut eta = 0.0f64;
    let mut min_sv = f64::INFINITY;
    for u in &samples {
        let b = diffusion.at(u);
        eta = eta.max(linalg::op_norm(&(&b - DMatrix::identity(n, n))));
        let sv = if n == 1 {
            b[(0, 0)].abs()
        } else {
            b.singular_values().iter().fold(f64::INFINITY, |a, &s| a.min(s))
        };
        min_sv = min_sv.min(sv);
    }
    diffusion.eta = eta;
    checks.push(Check {
        name: "diffusion_near_identity".into(),
        passed: eta <= diffusion.eta_max,
        margin: diffusion.eta_max - eta,
        detail: format!("measured eta = {eta:.6e}, ceiling {:.6e}", diffusion.eta_max),
    });
    checks.push(Check {
        name: "diffusion_invertible".into(),
        passed: min_sv > 1e-12,
        margin: min_sv,
        detail: format!("min singular value of B = {min_sv:e}"),
    });

    for pair in entropy_pairs {
        if system.is_conservative() {
            let mut worst = 0.0f64;
            for u in &samples {
                let lhs = (pair.gradient)(u).transpose() * system.jacobian_at(u);
                let rhs = (pair.flux_gradient)(u).transpose();
                worst = worst.max((lhs - rhs).amax());
            }
            checks.push(Check {
                name: format!("entropy_compatibility[{}]", pair.name),
                passed: worst <= ENTROPY_COMPAT_TOL,
                margin: ENTROPY_COMPAT_TOL - worst,
                detail: format!("max |grad U A - grad F| = {worst:e}"),
            });
        }
        let mut min_eig = f64::INFINITY;
        for u in &samples {
            let hb = (pair.hessian)(u) * diffusion.at(u);
            min_eig = min_eig.min(linalg::min_sym_eigenvalue(&hb));
        }
        checks.push(Check {
            name: format!("entropy_convexity[{}]", pair.name),
            passed: min_eig >= -CONVEXITY_TOL,
            margin: min_eig,
            detail: format!("min_w w^T (D^2U B) w over unit w = {min_eig:e}"),
        });
    }

    ValidationReport {
        system: system.name.clone(),
        sample_count: samples.len(),
        eta,
        checks,
    }
}

/// Options for [`suggest_speed_bands`].
#[derive(Debug, Clone, Copy)]
pub struct Sampling {
    pub count: usize,
    pub seed: u64,
    pub pad: f64,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            count: 200,
            seed: 7,
            pad: 0.05,
        }
    }
}

/// Padded hull of the sampled eigenvalues of each family.
pub fn suggest_speed_bands(system: &HyperbolicSystem, sampling: &Sampling) -> Result<Vec<SpeedBand>> {
    let n = system.dimension;
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for u in sample_states(system, sampling.count, sampling.seed) {
        let fr = eigendecompose(system, &u)?;
        for j in 0..n {
            lo[j] = lo[j].min(fr.eigenvalues[j]);
            hi[j] = hi[j].max(fr.eigenvalues[j]);
        }
    }
    let bands: Vec<SpeedBand> = (0..n)
        .map(|j| SpeedBand::new(lo[j] - sampling.pad, hi[j] + sampling.pad))
        .collect();
    for j in 1..n {
        if bands[j - 1].upper >= bands[j].lower {
            return Err(Error::BandsOverlap {
                family: j - 1,
                next: j,
                upper: bands[j - 1].upper,
                lower: bands[j].lower,
            });
        }
    }
    Ok(bands)
}
