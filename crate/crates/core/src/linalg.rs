//! Dense and banded linear algebra used by the solvers.
//!
//! The collocation Jacobians are block-banded, sometimes with a handful of
//! dense coupling rows (integral constraints, flatness conditions). Those are
//! handled by a bordered solve around a banded LU with partial pivoting.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Square banded matrix with `kl` sub- and `ku` super-diagonals.
///
/// Each row stores the columns `[row - kl, row + ku + kl]`; the extra `kl`
/// upper diagonals absorb fill-in from row interchanges.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku + self.kl {
            0.0
        } else {
            self.data[self.slot(i, j)]
        }
    }

    /// Adds `v` at `(i, j)`. Panics when the entry lies outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            self.in_band(i, j),
            "entry ({i}, {j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            *yi = (lo..=hi).map(|j| self.get(i, j) * x[j]).sum();
        }
        y
    }

    /// LU factorization with partial pivoting.
    pub fn factor(mut self) -> Result<BandedLu> {
        let n = self.n;
        let kl = self.kl;
        let ku2 = self.ku + self.kl;
        let mut pivots = vec![0usize; n];
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.slot(k, k)].abs();
            for i in k + 1..=last_row {
                let v = self.data[self.slot(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= scale * 1e-300 || !best.is_finite() {
                return Err(Error::SingularLinearSystem { row: k, pivot: best });
            }
            pivots[k] = p;
            let last_col = (k + ku2).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a = self.slot(k, j);
                    let b = self.slot(p, j);
                    self.data.swap(a, b);
                }
            }
            let diag = self.data[self.slot(k, k)];
            for i in k + 1..=last_row {
                let s = self.slot(i, k);
                let l = self.data[s] / diag;
                self.data[s] = l;
                if l != 0.0 {
                    for j in k + 1..=last_col {
                        let kj = self.data[self.slot(k, j)];
                        let sij = self.slot(i, j);
                        self.data[sij] -= l * kj;
                    }
                }
            }
        }
        Ok(BandedLu { lu: self, pivots })
    }
}

#[derive(Debug, Clone)]
pub struct BandedLu {
    lu: BandedMatrix,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let a = &self.lu;
        let n = a.n;
        let mut b = rhs.to_vec();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                for i in k + 1..=(k + a.kl).min(n - 1) {
                    b[i] -= a.data[a.slot(i, k)] * bk;
                }
            }
        }
        let ku2 = a.ku + a.kl;
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + ku2).min(n - 1) {
                s -= a.data[a.slot(k, j)] * b[j];
            }
            b[k] = s / a.data[a.slot(k, k)];
        }
        b
    }
}

/// Linear system `[[A, E], [C, D]] [x; z] = [r1; r2]` with `A` banded and
/// the border of width `p` dense.
#[derive(Debug, Clone)]
pub struct BorderedSystem {
    pub core: BandedMatrix,
    /// `n x p` coupling of the core rows to the border unknowns.
    pub right: DMatrix<f64>,
    /// `p x n` border rows acting on the core unknowns.
    pub bottom: DMatrix<f64>,
    /// `p x p` corner.
    pub corner: DMatrix<f64>,
}

impl BorderedSystem {
    pub fn new(core: BandedMatrix, border: usize) -> Self {
        let n = core.dim();
        Self {
            core,
            right: DMatrix::zeros(n, border),
            bottom: DMatrix::zeros(border, n),
            corner: DMatrix::zeros(border, border),
        }
    }

    pub fn border(&self) -> usize {
        self.corner.nrows()
    }

    /// Solves the system via the Schur complement on the border; `rhs` is
    /// ordered core rows first, border rows last.
    pub fn solve(self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.core.dim();
        let p = self.border();
        let lu = self.core.factor()?;
        let y1 = lu.solve(&rhs[..n]);
        if p == 0 {
            return Ok(y1);
        }
        let mut x_cols = DMatrix::zeros(n, p);
        for c in 0..p {
            let col: Vec<f64> = self.right.column(c).iter().copied().collect();
            let sol = lu.solve(&col);
            x_cols.set_column(c, &DVector::from_vec(sol));
        }
        let y1v = DVector::from_vec(y1);
        let schur = &self.corner - &self.bottom * &x_cols;
        let r2 = DVector::from_row_slice(&rhs[n..]) - &self.bottom * &y1v;
        let z = schur
            .lu()
            .solve(&r2)
            .filter(|z| z.iter().all(|v| v.is_finite()))
            .ok_or(Error::SingularLinearSystem { row: n, pivot: 0.0 })?;
        let x = y1v - x_cols * &z;
        let mut out: Vec<f64> = x.iter().copied().collect();
        out.extend(z.iter());
        Ok(out)
    }
}

/// Real eigendecomposition of a small dense matrix with distinct real
/// eigenvalues. Columns of `right` have unit Euclidean norm and
/// `left = right^{-1}`, so the rows of `left` are the dual basis.
#[derive(Debug, Clone)]
pub struct RealEigen {
    pub values: Vec<f64>,
    pub right: DMatrix<f64>,
    pub left: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EigenFailure {
    NonReal { imag: f64 },
    Collision { gap: f64 },
    Singular,
}

/// Relative tolerances for [`real_eigen`].
pub const IMAG_TOL: f64 = 1e-10;
pub const GAP_TOL: f64 = 1e-9;

pub fn real_eigen(m: &DMatrix<f64>) -> std::result::Result<RealEigen, EigenFailure> {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    let scale = m.amax().max(1.0);
    if n == 1 {
        return Ok(RealEigen {
            values: vec![m[(0, 0)]],
            right: DMatrix::from_element(1, 1, 1.0),
            left: DMatrix::from_element(1, 1, 1.0),
        });
    }
    let complex = m.clone().complex_eigenvalues();
    let imag = complex.iter().fold(0.0f64, |a, c| a.max(c.im.abs()));
    if imag > IMAG_TOL * scale {
        return Err(EigenFailure::NonReal { imag });
    }
    let mut values: Vec<f64> = complex.iter().map(|c| c.re).collect();
    values.sort_by(|a, b| a.total_cmp(b));
    let gap = values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    if gap < GAP_TOL * scale {
        return Err(EigenFailure::Collision { gap });
    }
    let mut right = DMatrix::zeros(n, n);
    for (j, &lam) in values.iter().enumerate() {
        let shifted = m - DMatrix::identity(n, n) * lam;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.ok_or(EigenFailure::Singular)?;
        let (imin, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .ok_or(EigenFailure::Singular)?;
        let mut v: DVector<f64> = v_t.row(imin).transpose();
        // one step of inverse iteration tightens the residual
        let shift = lam + 1e-3 * gap.min(scale) * f64::EPSILON.sqrt();
        if let Some(w) = (m - DMatrix::identity(n, n) * shift).lu().solve(&v) {
            let nw = w.norm();
            if nw.is_finite() && nw > 0.0 {
                let w = w / nw;
                if w.dot(&v) < 0.0 {
                    v = -w;
                } else {
                    v = w;
                }
            }
        }
        right.set_column(j, &v);
    }
    let left = right.clone().try_inverse().ok_or(EigenFailure::Singular)?;
    Ok(RealEigen {
        values,
        right,
        left,
    })
}

/// Largest singular value.
pub fn op_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 1 && m.ncols() == 1 {
        return m[(0, 0)].abs();
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0f64, |a, &s| a.max(s))
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_sym_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    if sym.nrows() == 1 {
        return sym[(0, 0)];
    }
    sym.symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |a, &s| a.min(s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_of(b: &BandedMatrix) -> DMatrix<f64> {
        let n = b.dim();
        DMatrix::from_fn(n, n, |i, j| b.get(i, j))
    }

    #[test]
    fn banded_lu_matches_dense_solve() {
        let n = 23;
        let (kl, ku) = (3, 2);
        let mut b = BandedMatrix::zeros(n, kl, ku);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                // weak diagonal forces pivoting
                let v = ((i * 7 + j * 3) % 11) as f64 - 5.0 + if i == j { 0.1 } else { 0.0 };
                b.set(i, j, v);
            }
        }
        let dense = dense_of(&b);
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let expected = dense.lu().solve(&DVector::from_vec(rhs.clone())).unwrap();
        let got = b.factor().unwrap().solve(&rhs);
        for i in 0..n {
            assert!((got[i] - expected[i]).abs() < 1e-9 * (1.0 + expected[i].abs()));
        }
    }

    #[test]
    fn bordered_matches_dense() {
        let n = 12;
        let p = 2;
        let mut core = BandedMatrix::zeros(n, 1, 1);
        for i in 0..n {
            core.set(i, i, 4.0 + i as f64 * 0.1);
            if i > 0 {
                core.set(i, i - 1, -1.0);
            }
            if i + 1 < n {
                core.set(i, i + 1, -1.5);
            }
        }
        let mut sys = BorderedSystem::new(core.clone(), p);
        for i in 0..n {
            sys.right[(i, 0)] = if i == n - 1 { 1.0 } else { 0.0 };
            sys.right[(i, 1)] = 0.01 * i as f64;
            sys.bottom[(0, i)] = 1.0;
            sys.bottom[(1, i)] = (i as f64).cos();
        }
        sys.corner[(0, 0)] = 2.0;
        sys.corner[(1, 1)] = 3.0;
        sys.corner[(0, 1)] = 0.5;
        let mut dense = DMatrix::zeros(n + p, n + p);
        dense.view_mut((0, 0), (n, n)).copy_from(&dense_of(&core));
        dense.view_mut((0, n), (n, p)).copy_from(&sys.right);
        dense.view_mut((n, 0), (p, n)).copy_from(&sys.bottom);
        dense.view_mut((n, n), (p, p)).copy_from(&sys.corner);
        let rhs: Vec<f64> = (0..n + p).map(|i| 1.0 + i as f64).collect();
        let expected = dense.lu().solve(&DVector::from_vec(rhs.clone())).unwrap();
        let got = sys.solve(&rhs).unwrap();
        for i in 0..n + p {
            assert!((got[i] - expected[i]).abs() < 1e-10 * (1.0 + expected[i].abs()));
        }
    }

    #[test]
    fn singular_banded_is_reported() {
        let b = BandedMatrix::zeros(4, 1, 1);
        assert!(matches!(b.factor(), Err(Error::SingularLinearSystem { .. })));
    }

    #[test]
    fn real_eigen_of_nonsymmetric_matrix() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 0.5, -1.0, 0.3, 0.0, 0.2, 4.0]);
        let e = real_eigen(&m).unwrap();
        for j in 0..3 {
            let r = e.right.column(j);
            let res = &m * r - r * e.values[j];
            assert!(res.norm() < 1e-12);
            assert!((r.norm() - 1.0).abs() < 1e-14);
        }
        let id = &e.left * &e.right;
        assert!((id - DMatrix::identity(3, 3)).amax() < 1e-12);
        assert!(e.values.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn complex_pair_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!(matches!(real_eigen(&m), Err(EigenFailure::NonReal { .. })));
    }

    #[test]
    fn repeated_eigenvalue_rejected() {
        let m = DMatrix::<f64>::identity(2, 2);
        assert!(matches!(real_eigen(&m), Err(EigenFailure::Collision { .. })));
    }
}
