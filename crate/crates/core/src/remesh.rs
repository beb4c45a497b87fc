//! Particle-to-mesh interpolation baselines: the moment-conserving
//! `Lambda_{4,4}` kernel (plain and renormalized) and volume-renormalized
//! Wendland C2 / Gaussian particle approximations.
//!
//! Interpolation is written in gather form over an explicit node list, so a
//! caller may restrict work to the nodes it needs.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::geom::{self, Domain, Vector};
use crate::par::map_range;
use crate::pcp::{self, PcpParams, Redistanced};
use crate::polyreg::BasisKind;
use crate::spatial::CellList;
use crate::{Error, Result};

/// The `Lambda_{4,4}` interpolation kernel, `q >= 0`.
pub fn lambda44(q: f64) -> Result<f64> {
    if !(q >= 0.0) {
        return Err(Error::NegativeKernelArgument(q));
    }
    Ok(lambda44_unchecked(q))
}

fn horner(c: &[f64], q: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, k| acc * q + k)
}

fn lambda44_unchecked(q: f64) -> f64 {
    const B0: [f64; 10] = [1.0, 0.0, -5.0 / 4.0, 0.0, 1.0 / 4.0, -100.0 / 3.0, 455.0 / 4.0, -295.0 / 2.0, 345.0 / 4.0, -115.0 / 6.0];
    // the outer branches expanded about q = 1 and q = 2
    const B1: [f64; 10] = [0.0, -2.0 / 3.0, 2.0 / 3.0, 1.0 / 6.0, -1.0 / 6.0, 50.0 / 3.0, -455.0 / 8.0, 295.0 / 4.0, -345.0 / 8.0, 115.0 / 12.0];
    const B2: [f64; 10] = [0.0, 1.0 / 12.0, -1.0 / 24.0, -1.0 / 12.0, 1.0 / 24.0, -10.0 / 3.0, 91.0 / 8.0, -59.0 / 4.0, 69.0 / 8.0, -23.0 / 12.0];
    if q < 1.0 {
        horner(&B0, q)
    } else if q < 2.0 {
        horner(&B1, q - 1.0)
    } else if q < 3.0 {
        horner(&B2, q - 2.0)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    /// Tensor product `Lambda(|dx|/h) Lambda(|dy|/h)`; `eps` is the mesh spacing.
    Lambda44,
    WendlandC2,
    /// Truncated at `q = 3`.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    /// Smoothing length (`h` for `Lambda44`).
    pub eps: f64,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, eps: f64) -> Self {
        Self { kind, eps }
    }

    /// Radius of a ball containing the support.
    pub fn support_radius(&self, dim: usize) -> f64 {
        match self.kind {
            KernelKind::Lambda44 => 3.0 * self.eps * (dim as f64).sqrt(),
            KernelKind::WendlandC2 => 2.0 * self.eps,
            KernelKind::Gaussian => 3.0 * self.eps,
        }
    }

    /// Kernel value for the displacement `r`.
    pub fn value<const D: usize>(&self, r: &Vector<D>) -> f64 {
        let e = self.eps;
        match self.kind {
            KernelKind::Lambda44 => r.iter().map(|x| lambda44_unchecked(x.abs() / e)).product(),
            KernelKind::WendlandC2 => crate::sph::wendland_c2::<D>(geom::norm(r), e),
            KernelKind::Gaussian => {
                let q2 = geom::norm_sq(r) / (e * e);
                if q2 > 9.0 {
                    return 0.0;
                }
                let sigma = if D == 3 { 1.0 / (PI.powf(1.5) * e.powi(3)) } else { 1.0 / (PI * e * e) };
                sigma * (-q2).exp()
            }
        }
    }
}

/// Uniform Cartesian mesh `lo + i h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<const D: usize> {
    pub lo: Vector<D>,
    pub h: f64,
    pub dims: [usize; D],
    pub values: Vec<f64>,
}

pub type Mesh2D = Mesh<2>;

impl<const D: usize> Mesh<D> {
    /// Nodes of `domain` with spacing `h` (upper faces only on open axes).
    pub fn new(domain: &Domain<D>, h: f64) -> Result<Self> {
        let dims = crate::levelset::grid_shape(h, domain)?;
        let n = dims.iter().product();
        Ok(Self { lo: domain.lo, h, dims, values: alloc::vec![0.0; n] })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Position of linear node `k` (axis 0 fastest).
    pub fn node(&self, k: usize) -> Vector<D> {
        let mut rem = k;
        core::array::from_fn(|i| {
            let j = rem % self.dims[i];
            rem /= self.dims[i];
            self.lo[i] + j as f64 * self.h
        })
    }

    pub fn nodes(&self) -> Vec<Vector<D>> {
        (0..self.len()).map(|k| self.node(k)).collect()
    }
}

fn particle_index<const D: usize>(positions: &[Vector<D>], kernel: &KernelSpec, domain: &Domain<D>) -> Result<CellList<D>> {
    CellList::build(positions, kernel.support_radius(D) / 2.0, *domain)
}

/// Kernel sums `(sum_p w_p phi_p W, sum_p w_p W)` at every node.
fn gather<const D: usize>(
    index: &CellList<D>,
    values: &[f64],
    weights: Option<&[f64]>,
    nodes: &[Vector<D>],
    kernel: &KernelSpec,
) -> Vec<(f64, f64)> {
    let radius = kernel.support_radius(D);
    let domain = index.domain();
    map_range(nodes.len(), |k| {
        let (mut num, mut den) = (0.0, 0.0);
        index.for_each_within(&nodes[k], radius, |p, _| {
            let w = kernel.value(&domain.displacement(&nodes[k], &index.points()[p])) * weights.map_or(1.0, |v| v[p]);
            num += w * values[p];
            den += w;
        });
        (num, den)
    })
}

/// `phi_m = sum_p phi_p Lambda(|dx|/h) Lambda(|dy|/h)`.
pub fn p2m_basic<const D: usize>(positions: &[Vector<D>], phi: &[f64], nodes: &[Vector<D>], h: f64, domain: &Domain<D>) -> Result<Vec<f64>> {
    if positions.len() != phi.len() {
        return Err(Error::LengthMismatch { left: positions.len(), right: phi.len() });
    }
    let kernel = KernelSpec::new(KernelKind::Lambda44, h);
    let index = particle_index(positions, &kernel, domain)?;
    Ok(gather(&index, phi, None, nodes, &kernel).into_iter().map(|(n, _)| n).collect())
}

/// Weight-normalized `Lambda_{4,4}` interpolation; `None` where the total
/// weight vanishes.
pub fn p2m_renormalized<const D: usize>(
    positions: &[Vector<D>],
    phi: &[f64],
    nodes: &[Vector<D>],
    h: f64,
    domain: &Domain<D>,
) -> Result<Vec<Option<f64>>> {
    if positions.len() != phi.len() {
        return Err(Error::LengthMismatch { left: positions.len(), right: phi.len() });
    }
    let kernel = KernelSpec::new(KernelKind::Lambda44, h);
    let index = particle_index(positions, &kernel, domain)?;
    Ok(gather(&index, phi, None, nodes, &kernel).into_iter().map(|(n, d)| (d != 0.0).then(|| n / d)).collect())
}

/// `V_q = 1 / sum_p W(|x_q - x_p|)`. The flags mark isolated particles
/// (only themselves in the support).
pub fn particle_volumes<const D: usize>(positions: &[Vector<D>], kernel: &KernelSpec, domain: &Domain<D>) -> Result<(Vec<f64>, Vec<bool>)> {
    let index = particle_index(positions, kernel, domain)?;
    let radius = kernel.support_radius(D);
    let out = map_range(positions.len(), |q| {
        let (mut sum, mut others) = (0.0, 0usize);
        let xq = index.points()[q];
        index.for_each_within(&xq, radius, |p, _| {
            let w = kernel.value(&domain.displacement(&xq, &index.points()[p]));
            sum += w;
            others += (p != q && w > 0.0) as usize;
        });
        (1.0 / sum, others == 0)
    });
    Ok(out.into_iter().unzip())
}

/// Volume-weighted, weight-normalized particle approximation at the nodes.
pub fn p2m_volume_renormalized<const D: usize>(
    positions: &[Vector<D>],
    phi: &[f64],
    volumes: &[f64],
    nodes: &[Vector<D>],
    kernel: &KernelSpec,
    domain: &Domain<D>,
) -> Result<Vec<Option<f64>>> {
    if positions.len() != phi.len() {
        return Err(Error::LengthMismatch { left: positions.len(), right: phi.len() });
    }
    if positions.len() != volumes.len() {
        return Err(Error::LengthMismatch { left: positions.len(), right: volumes.len() });
    }
    let index = particle_index(positions, kernel, domain)?;
    Ok(gather(&index, phi, Some(volumes), nodes, kernel).into_iter().map(|(n, d)| (d != 0.0).then(|| n / d)).collect())
}

/// Degree-4 monomial ("Taylor 4") PCP redistancing with mesh nodes acting
/// as both regression points and queries; the other fields of `params`
/// are used as given.
pub fn remesh_then_redistance<const D: usize>(
    nodes: &[Vector<D>],
    node_values: &[f64],
    domain: &Domain<D>,
    params: &PcpParams,
    targets: &[usize],
) -> Result<Redistanced<D>> {
    let params = PcpParams { degree: 4, basis: BasisKind::Monomial, scaled_monomial: true, ..*params };
    pcp::redistance(nodes, node_values, domain, &params, targets)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda44_values() {
        assert_eq!(lambda44(0.0).unwrap(), 1.0);
        assert_eq!(lambda44(3.0).unwrap(), 0.0);
        assert!(lambda44(1.0).unwrap().abs() < 1e-12);
        assert_eq!(lambda44(2.0).unwrap(), 0.0);
        assert_eq!(lambda44(-0.1), Err(Error::NegativeKernelArgument(-0.1)));
    }

    #[test]
    fn shifted_branches_match_expanded_form() {
        let b1 = [-199.0, 5485.0 / 4.0, -32975.0 / 8.0, 28425.0 / 4.0, -61953.0 / 8.0, 33175.0 / 6.0, -20685.0 / 8.0, 3055.0 / 4.0, -1035.0 / 8.0, 115.0 / 12.0];
        let b2 = [5913.0, -89235.0 / 4.0, 297585.0 / 8.0, -143895.0 / 4.0, 177871.0 / 8.0, -54641.0 / 6.0, 19775.0 / 8.0, -1715.0 / 4.0, 345.0 / 8.0, -23.0 / 12.0];
        for q in [1.1, 1.5, 1.9, 2.2, 2.5, 2.95] {
            let c = if q < 2.0 { &b1 } else { &b2 };
            assert!((horner(c, q) - lambda44_unchecked(q)).abs() < 1e-9);
        }
    }

    #[test]
    fn lambda44_branches_are_continuous() {
        for q in [1.0, 2.0] {
            let left = lambda44_unchecked(q - 1e-12);
            let right = lambda44_unchecked(q);
            assert!((left - right).abs() < 1e-9, "jump {} at {q}", left - right);
        }
    }

    #[test]
    fn isolated_wendland_volume() {
        let k = KernelSpec::new(KernelKind::WendlandC2, 0.1);
        let d = Domain::open([-1.0, -1.0], [1.0, 1.0]);
        let (v, iso) = particle_volumes(&[[0.0, 0.0]], &k, &d).unwrap();
        assert!((v[0] - 4.0 * PI * 0.01 / 7.0).abs() < 1e-15);
        assert!(iso[0]);
    }

    #[test]
    fn grid_particles_interpolate_exactly() {
        let h = 0.1;
        let d = Domain::open([0.0, 0.0], [1.0, 1.0]);
        let mesh = Mesh2D::new(&d, h).unwrap();
        let nodes = mesh.nodes();
        let phi: Vec<f64> = nodes.iter().map(|x| x[0] * x[0] - x[1]).collect();
        let inner: Vec<[f64; 2]> = nodes.iter().copied().filter(|x| x.iter().all(|c| (0.3..=0.7).contains(c))).collect();
        let basic = p2m_basic(&nodes, &phi, &inner, h, &d).unwrap();
        let renorm = p2m_renormalized(&nodes, &phi, &inner, h, &d).unwrap();
        for (x, (b, r)) in inner.iter().zip(basic.iter().zip(&renorm)) {
            let exact = x[0] * x[0] - x[1];
            assert!((b - exact).abs() < 1e-12 && (r.unwrap() - exact).abs() < 1e-12);
        }
    }
}
