//! Dense linear algebra kernels used by the regression and the Newton
//! solvers: Householder least squares, a small pivoted LU solve and a
//! one-sided Jacobi SVD for condition numbers.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Column-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ColMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ColMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[c * self.rows + r]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[c * self.rows + r] = v;
    }

    #[inline]
    pub fn col(&self, c: usize) -> &[f64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c * self.rows..(c + 1) * self.rows]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub solution: Vec<f64>,
    pub residual_norm: f64,
    /// `min |R_kk| / max |R_kk|` of the triangular factor.
    pub diag_ratio: f64,
}

/// Solves `min ||A c - b||_2` by Householder QR. `A` is consumed as scratch.
///
/// Fails with [`Error::DegenerateFit`] when a diagonal entry of `R` drops
/// below `rank_threshold` times the largest one.
pub fn least_squares(mut a: ColMatrix, b: &[f64], rank_threshold: f64) -> Result<LeastSquares> {
    let (m, n) = (a.rows, a.cols);
    if b.len() != m {
        return Err(Error::LengthMismatch { left: m, right: b.len() });
    }
    if m < n {
        return Err(Error::InsufficientPoints { have: m, need: n });
    }
    let mut rhs = b.to_vec();
    let mut diag = vec![0.0; n];
    let mut v = vec![0.0; m];
    for k in 0..n {
        let col = &a.col(k)[k..];
        let sigma = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        if sigma == 0.0 {
            diag[k] = 0.0;
            continue;
        }
        let alpha = if col[0] > 0.0 { -sigma } else { sigma };
        let vk = &mut v[k..m];
        vk.copy_from_slice(col);
        vk[0] -= alpha;
        let vnorm_sq: f64 = vk.iter().map(|x| x * x).sum();
        diag[k] = alpha;
        if vnorm_sq == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm_sq;
        for j in k + 1..n {
            let cj = &mut a.col_mut(j)[k..];
            let s = beta * cj.iter().zip(vk.iter()).map(|(x, y)| x * y).sum::<f64>();
            cj.iter_mut().zip(vk.iter()).for_each(|(x, y)| *x -= s * y);
        }
        let s = beta * rhs[k..].iter().zip(vk.iter()).map(|(x, y)| x * y).sum::<f64>();
        rhs[k..].iter_mut().zip(vk.iter()).for_each(|(x, y)| *x -= s * y);
    }
    let dmax = diag.iter().fold(0.0_f64, |acc, d| acc.max(d.abs()));
    let dmin = diag.iter().fold(f64::INFINITY, |acc, d| acc.min(d.abs()));
    let diag_ratio = if dmax > 0.0 { dmin / dmax } else { 0.0 };
    if !(diag_ratio >= rank_threshold) {
        return Err(Error::DegenerateFit { ratio: diag_ratio });
    }
    let mut c = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = rhs[k];
        for j in k + 1..n {
            s -= a.get(k, j) * c[j];
        }
        c[k] = s / diag[k];
    }
    let residual_norm = rhs[n..].iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(LeastSquares { solution: c, residual_norm, diag_ratio })
}

/// Solves the `N x N` system `a x = b` with partial pivoting. Returns `None`
/// when a pivot falls below `1e-14` times the largest matrix entry.
pub fn solve_small<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Option<[f64; N]> {
    let amax = a.iter().flatten().fold(0.0_f64, |m, x| m.max(x.abs()));
    if !(amax > 0.0) || !amax.is_finite() {
        return None;
    }
    for k in 0..N {
        let p = (k..N).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k].abs() <= 1e-14 * amax {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..N {
            let f = a[i][k] / a[k][k];
            for j in k..N {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = [0.0; N];
    for k in (0..N).rev() {
        let mut s = b[k];
        for j in k + 1..N {
            s -= a[k][j] * x[j];
        }
        x[k] = s / a[k][k];
    }
    Some(x)
}

/// In-place partially pivoted solve of the row-major `n x n` system `a x = b`;
/// `b` receives `x`. Returns `false` under the same pivot rule as
/// [`solve_small`].
pub fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    let amax = a[..n * n].iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if !(amax > 0.0) || !amax.is_finite() {
        return false;
    }
    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if a[i * n + k].abs() > a[p * n + k].abs() {
                p = i;
            }
        }
        if a[p * n + k].abs() <= 1e-14 * amax {
            return false;
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            b.swap(k, p);
        }
        for i in k + 1..n {
            let f = a[i * n + k] / a[k * n + k];
            for j in k..n {
                a[i * n + j] -= f * a[k * n + j];
            }
            b[i] -= f * b[k];
        }
    }
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in k + 1..n {
            s -= a[k * n + j] * b[j];
        }
        b[k] = s / a[k * n + k];
    }
    true
}

/// Singular values (descending) by one-sided Jacobi rotations.
pub fn singular_values(a: &ColMatrix) -> Vec<f64> {
    let mut u = a.clone();
    let n = u.cols;
    for _sweep in 0..60 {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in p + 1..n {
                let (cp, cq) = (u.col(p), u.col(q));
                let alpha: f64 = cp.iter().map(|x| x * x).sum();
                let beta: f64 = cq.iter().map(|x| x * x).sum();
                let gamma: f64 = cp.iter().zip(cq).map(|(x, y)| x * y).sum();
                if gamma == 0.0 {
                    continue;
                }
                off = off.max(gamma.abs() / (alpha * beta).sqrt());
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..u.rows {
                    let x = u.get(r, p);
                    let y = u.get(r, q);
                    u.set(r, p, c * x - s * y);
                    u.set(r, q, s * x + c * y);
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..n).map(|j| u.col(j).iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// 2-norm condition number `sigma_max / sigma_min`.
pub fn condition_number(a: &ColMatrix) -> f64 {
    let sv = singular_values(a);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[f64]]) -> ColMatrix {
        let mut m = ColMatrix::zeros(rows.len(), rows[0].len());
        for (r, row) in rows.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                m.set(r, c, *v);
            }
        }
        m
    }

    #[test]
    fn overdetermined_line_fit() {
        // y = 1 + 2x sampled exactly
        let a = matrix(&[&[1.0, 0.0], &[1.0, 1.0], &[1.0, 2.0], &[1.0, 3.0]]);
        let ls = least_squares(a, &[1.0, 3.0, 5.0, 7.0], 1e-10).unwrap();
        assert!((ls.solution[0] - 1.0).abs() < 1e-13);
        assert!((ls.solution[1] - 2.0).abs() < 1e-13);
        assert!(ls.residual_norm < 1e-13);
    }

    #[test]
    fn least_squares_residual_matches_normal_equations() {
        // Fit a constant to {0, 1, 2}: mean 1, residual sqrt(2).
        let a = matrix(&[&[1.0], &[1.0], &[1.0]]);
        let ls = least_squares(a, &[0.0, 1.0, 2.0], 1e-10).unwrap();
        assert!((ls.solution[0] - 1.0).abs() < 1e-14);
        assert!((ls.residual_norm - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn rank_deficient_is_rejected() {
        let a = matrix(&[&[1.0, 2.0], &[2.0, 4.0], &[3.0, 6.0]]);
        assert!(matches!(least_squares(a, &[1.0, 2.0, 3.0], 1e-10), Err(Error::DegenerateFit { .. })));
    }

    #[test]
    fn underdetermined_is_rejected() {
        let a = matrix(&[&[1.0, 2.0]]);
        assert!(matches!(least_squares(a, &[1.0], 1e-10), Err(Error::InsufficientPoints { have: 1, need: 2 })));
    }

    #[test]
    fn small_solve_needs_pivoting() {
        let x = solve_small([[0.0, 1.0], [1.0, 0.0]], [2.0, 3.0]).unwrap();
        assert_eq!(x, [3.0, 2.0]);
        assert!(solve_small([[1.0, 1.0], [1.0, 1.0]], [1.0, 2.0]).is_none());
        let mut a = [0.0, 1.0, 1.0, 0.0];
        let mut b = [2.0, 3.0];
        assert!(solve_dense(&mut a, &mut b, 2));
        assert_eq!(b, [3.0, 2.0]);
        assert!(!solve_dense(&mut [1.0, 1.0, 1.0, 1.0], &mut [1.0, 2.0], 2));
    }

    #[test]
    fn singular_values_of_diagonal() {
        let a = matrix(&[&[3.0, 0.0], &[0.0, -0.5], &[0.0, 0.0]]);
        let sv = singular_values(&a);
        assert!((sv[0] - 3.0).abs() < 1e-14 && (sv[1] - 0.5).abs() < 1e-14);
        assert!((condition_number(&a) - 6.0).abs() < 1e-12);
    }
}
