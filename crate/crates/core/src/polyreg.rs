//! Total-degree polynomial regression.
//!
//! Two bases span the same space of polynomials with multi-index
//! `|alpha|_1 <= n`:
//!
//! * [`BasisKind::NewtonLagrange`] ("minter"): Lagrange polynomials `L_k`
//!   on the Chebyshev-Lobatto nodes of the lower set, `L_k(q_l) = delta_kl`,
//!   stored as Newton-form coefficients computed once per [`BasisSpec`]
//!   by multivariate divided differences;
//! * [`BasisKind::Monomial`]: plain monomials `u^alpha`.
//!
//! Both share one evaluator: a Newton basis `N_alpha(u) = prod_i prod_{j <
//! alpha_i} (u_i - p_j)` with Chebyshev-Lobatto nodes `p_j`, which reduces
//! to monomials when all `p_j = 0`. Values, gradients and Hessians are
//! analytic and chain-ruled through the [`LocalFrame`].

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::geom::Vector;
use crate::linalg::{self, ColMatrix};
use crate::{Error, Result};

/// Relative cutoff on the diagonal of `R` below which a fit is degenerate.
pub const RANK_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    NewtonLagrange,
    Monomial,
}

/// `C(degree + dim, dim)`.
pub fn coeff_count(degree: usize, dim: usize) -> Result<usize> {
    if !(2..=3).contains(&dim) {
        return Err(Error::UnsupportedDimension(dim));
    }
    let mut c = 1usize;
    for i in 1..=dim {
        c = c * (degree + i) / i;
    }
    Ok(c)
}

/// Chebyshev-Lobatto extrema `cos(j pi / n)`, `j = 0..=n`, written so that
/// the middle node is exactly zero.
pub fn chebyshev_lobatto_1d(degree: usize) -> Vec<f64> {
    let n = degree as f64;
    (0..=degree).map(|j| (PI * (n - 2.0 * j as f64) / (2.0 * n)).sin()).collect()
}

/// Multi-indices of total degree `<= degree`, graded (constant first).
fn lower_set<const D: usize>(degree: usize) -> Vec<[u8; D]> {
    let mut out = Vec::new();
    for total in 0..=degree {
        let mut alpha = [0u8; D];
        collect_total(&mut out, &mut alpha, 0, total);
    }
    out
}

fn collect_total<const D: usize>(out: &mut Vec<[u8; D]>, alpha: &mut [u8; D], axis: usize, rest: usize) {
    if axis == D - 1 {
        alpha[axis] = rest as u8;
        out.push(*alpha);
        return;
    }
    for k in (0..=rest).rev() {
        alpha[axis] = k as u8;
        collect_total(out, alpha, axis + 1, rest - k);
    }
}

/// Tensor Chebyshev-Lobatto nodes kept for `|alpha|_1 <= degree`, one node
/// per multi-index, in the basis ordering.
pub fn chebyshev_lobatto_grid<const D: usize>(degree: usize) -> Result<Vec<Vector<D>>> {
    coeff_count(degree, D)?;
    if degree == 0 {
        return Err(Error::ZeroDegreeGrid);
    }
    let p = chebyshev_lobatto_1d(degree);
    Ok(lower_set::<D>(degree).iter().map(|a| core::array::from_fn(|i| p[a[i] as usize])).collect())
}

/// A polynomial space together with its (cached) basis transformation.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSpec<const D: usize> {
    kind: BasisKind,
    degree: usize,
    exponents: Vec<[u8; D]>,
    axis_nodes: Vec<f64>,
    /// Column `k` holds the Newton coefficients of `L_k` (NewtonLagrange only).
    lagrange: Option<Vec<f64>>,
    nodes: Vec<Vector<D>>,
}

impl<const D: usize> BasisSpec<D> {
    /// Degree 0 in NewtonLagrange mode falls back to the constant basis.
    pub fn new(kind: BasisKind, degree: usize) -> Result<Self> {
        let nc = coeff_count(degree, D)?;
        let exponents = lower_set::<D>(degree);
        debug_assert_eq!(exponents.len(), nc);
        match kind {
            BasisKind::Monomial => Ok(Self {
                kind,
                degree,
                exponents,
                axis_nodes: vec![0.0; degree + 1],
                lagrange: None,
                nodes: Vec::new(),
            }),
            BasisKind::NewtonLagrange => {
                let (axis_nodes, nodes) = if degree == 0 {
                    (vec![0.0], vec![[0.0; D]])
                } else {
                    (chebyshev_lobatto_1d(degree), chebyshev_lobatto_grid::<D>(degree)?)
                };
                let mut spec = Self { kind, degree, exponents, axis_nodes, lagrange: None, nodes };
                spec.lagrange = Some(spec.divided_differences());
                Ok(spec)
            }
        }
    }

    /// Inverts the lower-triangular Newton-Vandermonde matrix
    /// `V[beta][alpha] = N_alpha(q_beta)` by forward substitution.
    fn divided_differences(&self) -> Vec<f64> {
        let nc = self.exponents.len();
        let mut v = vec![0.0; nc * nc];
        let mut row = vec![0.0; nc];
        for (b, q) in self.nodes.iter().enumerate() {
            self.newton_values(q, &mut row);
            v[b * nc..(b + 1) * nc].copy_from_slice(&row);
        }
        let mut dd = vec![0.0; nc * nc];
        for k in 0..nc {
            for b in 0..nc {
                let mut s = if b == k { 1.0 } else { 0.0 };
                for a in 0..b {
                    s -= v[b * nc + a] * dd[a * nc + k];
                }
                dd[b * nc + k] = s / v[b * nc + b];
            }
        }
        dd
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        D
    }

    pub fn coeff_count(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[[u8; D]] {
        &self.exponents
    }

    /// Unisolvent nodes (empty for the monomial basis).
    pub fn nodes(&self) -> &[Vector<D>] {
        &self.nodes
    }

    fn axis_products(&self, t: f64) -> [f64; 16] {
        let mut p = [0.0; 16];
        p[0] = 1.0;
        for k in 0..self.degree {
            p[k + 1] = p[k] * (t - self.axis_nodes[k]);
        }
        p
    }

    /// Newton basis values `N_alpha(u)`.
    pub fn newton_values(&self, u: &Vector<D>, out: &mut [f64]) {
        let tables: [[f64; 16]; D] = core::array::from_fn(|i| self.axis_products(u[i]));
        for (o, a) in out.iter_mut().zip(&self.exponents) {
            let mut v = 1.0;
            for i in 0..D {
                v *= tables[i][a[i] as usize];
            }
            *o = v;
        }
    }

    /// One row of the regression matrix: the basis functions at local `u`.
    pub fn basis_row(&self, u: &Vector<D>, out: &mut [f64]) {
        match &self.lagrange {
            None => self.newton_values(u, out),
            Some(dd) => {
                let nc = self.exponents.len();
                let mut nv = [0.0; 64];
                self.newton_values(u, &mut nv[..nc]);
                for (k, o) in out.iter_mut().enumerate().take(nc) {
                    let mut s = 0.0;
                    for a in 0..nc {
                        s += nv[a] * dd[a * nc + k];
                    }
                    *o = s;
                }
            }
        }
    }

    /// Maps basis coefficients to Newton-form coefficients.
    fn to_newton(&self, coeffs: &[f64]) -> Vec<f64> {
        match &self.lagrange {
            None => coeffs.to_vec(),
            Some(dd) => {
                let nc = self.exponents.len();
                (0..nc).map(|a| (0..nc).map(|k| dd[a * nc + k] * coeffs[k]).sum()).collect()
            }
        }
    }

    /// Value, gradient and Hessian of `sum_alpha b_alpha N_alpha(u)`.
    fn eval_newton(&self, b: &[f64], u: &Vector<D>, order: usize) -> (f64, Vector<D>, [[f64; D]; D]) {
        let mut p = [[0.0; 16]; D];
        let mut dp = [[0.0; 16]; D];
        let mut ddp = [[0.0; 16]; D];
        for i in 0..D {
            p[i][0] = 1.0;
            for k in 0..self.degree {
                let t = u[i] - self.axis_nodes[k];
                p[i][k + 1] = p[i][k] * t;
                dp[i][k + 1] = dp[i][k] * t + p[i][k];
                ddp[i][k + 1] = ddp[i][k] * t + 2.0 * dp[i][k];
            }
        }
        let mut val = 0.0;
        let mut grad = [0.0; D];
        let mut hess = [[0.0; D]; D];
        for (coef, a) in b.iter().zip(&self.exponents) {
            if *coef == 0.0 {
                continue;
            }
            let e: [usize; D] = core::array::from_fn(|i| a[i] as usize);
            let mut v = 1.0;
            for i in 0..D {
                v *= p[i][e[i]];
            }
            val += coef * v;
            if order == 0 {
                continue;
            }
            for x in 0..D {
                let mut g = dp[x][e[x]];
                for i in 0..D {
                    if i != x {
                        g *= p[i][e[i]];
                    }
                }
                grad[x] += coef * g;
                if order < 2 {
                    continue;
                }
                for y in x..D {
                    let mut h = if x == y { ddp[x][e[x]] } else { dp[x][e[x]] * dp[y][e[y]] };
                    for i in 0..D {
                        if i != x && i != y {
                            h *= p[i][e[i]];
                        }
                    }
                    hess[x][y] += coef * h;
                }
            }
        }
        for x in 0..D {
            for y in 0..x {
                hess[x][y] = hess[y][x];
            }
        }
        (val, grad, hess)
    }
}

/// Affine map `u = (x - center) / scale` into the basis coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame<const D: usize> {
    pub center: Vector<D>,
    pub scale: Vector<D>,
}

impl<const D: usize> LocalFrame<D> {
    pub fn new(center: Vector<D>, scale: f64) -> Self {
        Self { center, scale: [scale; D] }
    }

    pub fn identity() -> Self {
        Self::new([0.0; D], 1.0)
    }

    /// Frame used by the redistancing: the Lagrange basis lives on
    /// `[-1, 1]^D`, so its neighbourhood of radius `r_c` is scaled by `r_c`;
    /// monomials act on raw offsets from the center.
    pub fn for_regression(kind: BasisKind, center: Vector<D>, cutoff: f64) -> Self {
        match kind {
            BasisKind::NewtonLagrange => Self::new(center, cutoff),
            BasisKind::Monomial => Self::new(center, 1.0),
        }
    }

    #[inline]
    pub fn to_local(&self, x: &Vector<D>) -> Vector<D> {
        core::array::from_fn(|i| (x[i] - self.center[i]) / self.scale[i])
    }

    #[inline]
    pub fn to_world(&self, u: &Vector<D>) -> Vector<D> {
        core::array::from_fn(|i| self.center[i] + u[i] * self.scale[i])
    }
}

/// Regression matrix `A[r][k] = M_k(x_r)` in the given frame.
pub fn regression_matrix<const D: usize>(points: &[Vector<D>], basis: &BasisSpec<D>, frame: &LocalFrame<D>) -> ColMatrix {
    let nc = basis.coeff_count();
    let mut a = ColMatrix::zeros(points.len(), nc);
    let mut row = vec![0.0; nc];
    for (r, x) in points.iter().enumerate() {
        basis.basis_row(&frame.to_local(x), &mut row);
        for (k, v) in row.iter().enumerate() {
            a.set(r, k, *v);
        }
    }
    a
}

/// Local polynomial approximation `p(x) = sum_k c_k M_k(u(x))`.
#[derive(Debug, Clone)]
pub struct RegressionPoly<const D: usize> {
    basis: Arc<BasisSpec<D>>,
    frame: LocalFrame<D>,
    coefficients: Vec<f64>,
    newton: Vec<f64>,
    residual_norm: f64,
}

impl<const D: usize> RegressionPoly<D> {
    /// Builds a polynomial directly from basis coefficients.
    pub fn from_coefficients(basis: Arc<BasisSpec<D>>, frame: LocalFrame<D>, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != basis.coeff_count() {
            return Err(Error::LengthMismatch { left: coefficients.len(), right: basis.coeff_count() });
        }
        let newton = basis.to_newton(&coefficients);
        Ok(Self { basis, frame, coefficients, newton, residual_norm: 0.0 })
    }

    pub fn basis(&self) -> &BasisSpec<D> {
        &self.basis
    }

    pub fn frame(&self) -> &LocalFrame<D> {
        &self.frame
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn residual_norm(&self) -> f64 {
        self.residual_norm
    }

    pub fn eval(&self, x: &Vector<D>) -> f64 {
        self.basis.eval_newton(&self.newton, &self.frame.to_local(x), 0).0
    }

    pub fn grad(&self, x: &Vector<D>) -> Vector<D> {
        self.eval_grad(x).1
    }

    pub fn hess(&self, x: &Vector<D>) -> [[f64; D]; D] {
        self.eval_all(x).2
    }

    pub fn eval_grad(&self, x: &Vector<D>) -> (f64, Vector<D>) {
        let (v, g, _) = self.basis.eval_newton(&self.newton, &self.frame.to_local(x), 1);
        (v, core::array::from_fn(|i| g[i] / self.frame.scale[i]))
    }

    /// Value, world-space gradient and Hessian in one pass.
    pub fn eval_all(&self, x: &Vector<D>) -> (f64, Vector<D>, [[f64; D]; D]) {
        let (v, g, h) = self.basis.eval_newton(&self.newton, &self.frame.to_local(x), 2);
        let s = &self.frame.scale;
        let grad = core::array::from_fn(|i| g[i] / s[i]);
        let hess = core::array::from_fn(|i| core::array::from_fn(|j| h[i][j] / (s[i] * s[j])));
        (v, grad, hess)
    }
}

/// Least-squares fit of `values` at `points` (QR), interpolating when the
/// number of points equals the coefficient count.
pub fn fit<const D: usize>(
    points: &[Vector<D>],
    values: &[f64],
    basis: &Arc<BasisSpec<D>>,
    frame: LocalFrame<D>,
) -> Result<RegressionPoly<D>> {
    if points.len() != values.len() {
        return Err(Error::LengthMismatch { left: points.len(), right: values.len() });
    }
    let nc = basis.coeff_count();
    if points.len() < nc {
        return Err(Error::InsufficientPoints { have: points.len(), need: nc });
    }
    let a = regression_matrix(points, basis, &frame);
    let ls = linalg::least_squares(a, values, RANK_THRESHOLD)?;
    let newton = basis.to_newton(&ls.solution);
    Ok(RegressionPoly {
        basis: Arc::clone(basis),
        frame,
        coefficients: ls.solution,
        newton,
        residual_norm: ls.residual_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_counts() {
        assert_eq!(coeff_count(4, 2).unwrap(), 15);
        assert_eq!(coeff_count(0, 3).unwrap(), 1);
        assert_eq!(coeff_count(5, 3).unwrap(), 56);
        assert_eq!(coeff_count(2, 4), Err(Error::UnsupportedDimension(4)));
    }

    #[test]
    fn lobatto_axis_values() {
        assert_eq!(chebyshev_lobatto_1d(2), [1.0, 0.0, -1.0]);
        assert_eq!(chebyshev_lobatto_grid::<2>(2).unwrap().len(), 6);
        assert_eq!(chebyshev_lobatto_grid::<2>(0), Err(Error::ZeroDegreeGrid));
    }

    #[test]
    fn lagrange_basis_is_cardinal_on_nodes() {
        let basis = BasisSpec::<2>::new(BasisKind::NewtonLagrange, 4).unwrap();
        let mut row = vec![0.0; basis.coeff_count()];
        for (l, q) in basis.nodes().iter().enumerate() {
            basis.basis_row(q, &mut row);
            for (k, v) in row.iter().enumerate() {
                let expect = if k == l { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-12, "L_{k}(q_{l}) = {v}");
            }
        }
    }

    #[test]
    fn constant_polynomial_derivatives_vanish() {
        for kind in [BasisKind::NewtonLagrange, BasisKind::Monomial] {
            let basis = Arc::new(BasisSpec::<2>::new(kind, 3).unwrap());
            let pts: Vec<[f64; 2]> = (0..20).map(|i| [(i % 5) as f64 * 0.3 - 0.6, (i / 5) as f64 * 0.3 - 0.5]).collect();
            let p = fit(&pts, &[5.0; 20], &basis, LocalFrame::identity()).unwrap();
            let (v, g, h) = p.eval_all(&[0.1, -0.2]);
            assert!((v - 5.0).abs() < 1e-12);
            assert!(g.iter().chain(h.iter().flatten()).all(|x| x.abs() < 1e-10));
        }
    }

    #[test]
    fn paraboloid_monomial_derivatives() {
        // x^2 + y^2: exponents (2,0) and (0,2)
        let basis = Arc::new(BasisSpec::<2>::new(BasisKind::Monomial, 2).unwrap());
        let coeffs: Vec<f64> = basis.exponents().iter().map(|a| if *a == [2, 0] || *a == [0, 2] { 1.0 } else { 0.0 }).collect();
        let p = RegressionPoly::from_coefficients(basis, LocalFrame::identity(), coeffs).unwrap();
        assert_eq!(p.grad(&[1.0, 2.0]), [2.0, 4.0]);
        assert_eq!(p.hess(&[1.0, 2.0]), [[2.0, 0.0], [0.0, 2.0]]);
    }

    #[test]
    fn affine_exact_with_three_points() {
        let basis = Arc::new(BasisSpec::<2>::new(BasisKind::NewtonLagrange, 1).unwrap());
        let f = |x: &[f64; 2]| 1.0 + 2.0 * x[0] + 3.0 * x[1];
        let pts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let vals: Vec<f64> = pts.iter().map(f).collect();
        let p = fit(&pts, &vals, &basis, LocalFrame::new([0.3, 0.3], 1.0)).unwrap();
        for q in [[0.5, 0.5], [-3.0, 2.0], [10.0, -7.0]] {
            assert!((p.eval(&q) - f(&q)).abs() < 1e-12);
        }
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let basis = Arc::new(BasisSpec::<2>::new(BasisKind::NewtonLagrange, 2).unwrap());
        let pts: Vec<[f64; 2]> = (0..20).map(|i| [i as f64 * 0.05 - 0.5, 2.0 * (i as f64 * 0.05 - 0.5)]).collect();
        let vals: Vec<f64> = pts.iter().map(|p| p[0]).collect();
        assert!(matches!(fit(&pts, &vals, &basis, LocalFrame::identity()), Err(Error::DegenerateFit { .. })));
    }

    #[test]
    fn too_few_points() {
        let basis = Arc::new(BasisSpec::<2>::new(BasisKind::Monomial, 2).unwrap());
        assert_eq!(
            fit(&[[0.0, 0.0]; 5], &[0.0; 5], &basis, LocalFrame::identity()).unwrap_err(),
            Error::InsufficientPoints { have: 5, need: 6 }
        );
    }

    #[test]
    fn zero_degree_lagrange_falls_back_to_constant() {
        let basis = Arc::new(BasisSpec::<3>::new(BasisKind::NewtonLagrange, 0).unwrap());
        assert_eq!(basis.coeff_count(), 1);
        let p = fit(&[[0.0; 3], [1.0, 0.0, 0.0]], &[1.0, 3.0], &basis, LocalFrame::identity()).unwrap();
        assert!((p.eval(&[7.0, 7.0, 7.0]) - 2.0).abs() < 1e-14);
    }
}
