//! Particle level-set state, analytic test shapes with reference signed
//! distances, perturbed-grid generation, advection and error measures.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::geom::{self, Domain, Vector};
use crate::par::map_range;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Band {
    NarrowBand,
    Complement,
}

/// Lagrangian level-set state.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet<const D: usize> {
    pub positions: Vec<Vector<D>>,
    pub phi: Vec<f64>,
    pub band: Vec<Band>,
    pub velocities: Option<Vec<Vector<D>>>,
}

impl<const D: usize> ParticleSet<D> {
    /// All particles start in the narrow band.
    pub fn new(positions: Vec<Vector<D>>, phi: Vec<f64>) -> Result<Self> {
        if positions.len() != phi.len() {
            return Err(Error::LengthMismatch { left: positions.len(), right: phi.len() });
        }
        let band = vec![Band::NarrowBand; phi.len()];
        Ok(Self { positions, phi, band, velocities: None })
    }

    pub fn from_shape(positions: Vec<Vector<D>>, shape: &Shape) -> Self {
        let phi = init_levelset(shape, &positions);
        let band = vec![Band::NarrowBand; phi.len()];
        Self { positions, phi, band, velocities: None }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// `|phi| <= w/2` puts a particle in the narrow band. Returns the sizes
    /// of the band and its complement.
    pub fn update_band(&mut self, w: f64) -> (usize, usize) {
        let half = 0.5 * w;
        let mut inside = 0;
        for (b, p) in self.band.iter_mut().zip(&self.phi) {
            *b = if p.abs() <= half {
                inside += 1;
                Band::NarrowBand
            } else {
                Band::Complement
            };
        }
        (inside, self.phi.len() - inside)
    }

    pub fn band_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.band[i] == Band::NarrowBand).collect()
    }
}

/// Analytic test geometry.
///
/// `Circle` is a sphere when used in 3D. The ellipse and ellipsoid are
/// initialised with `1 - sqrt(sum x_i^2 / e_i^2)`, which is positive inside;
/// every other shape starts from its exact signed distance (negative
/// inside). [`Shape::orientation`] reports which convention applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Circle { center: [f64; 3], radius: f64 },
    Ellipse2D { center: [f64; 2], a: f64, b: f64 },
    Ellipsoid3D { center: [f64; 3], a: f64, b: f64, c: f64 },
    Square { center: [f64; 2], half_side: f64 },
    RoundedRectangle { center: [f64; 2], half_extents: [f64; 2], corner_radius: f64 },
}

/// Reference geometry seen from a query point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceReference<const D: usize> {
    /// Signed distance, negative inside.
    pub sdf: f64,
    pub closest_point: Vector<D>,
    /// Outward unit normal at the closest point.
    pub normal: Vector<D>,
    /// Mean curvature at the closest point (`1/R` for circles and spheres).
    pub curvature: f64,
}

impl Shape {
    pub fn circle<const D: usize>(center: Vector<D>, radius: f64) -> Self {
        let mut c = [0.0; 3];
        c[..D].copy_from_slice(&center);
        Shape::Circle { center: c, radius }
    }

    pub fn ellipse(a: f64, b: f64) -> Self {
        Shape::Ellipse2D { center: [0.0; 2], a, b }
    }

    pub fn ellipsoid(a: f64, b: f64, c: f64) -> Self {
        Shape::Ellipsoid3D { center: [0.0; 3], a, b, c }
    }

    /// Spatial dimension, `None` for the dimension-agnostic circle.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Shape::Circle { .. } => None,
            Shape::Ellipsoid3D { .. } => Some(3),
            _ => Some(2),
        }
    }

    /// `+1` if the initial level set is negative inside, `-1` if positive.
    pub fn orientation(&self) -> f64 {
        match self {
            Shape::Ellipse2D { .. } | Shape::Ellipsoid3D { .. } => -1.0,
            _ => 1.0,
        }
    }

    fn check_dim<const D: usize>(&self) {
        assert!(self.dim().map_or(D == 2 || D == 3, |d| d == D), "shape {self:?} used in {D}D");
    }

    /// Initial level-set value.
    ///
    /// # Panics
    /// If the shape does not exist in `D` dimensions.
    pub fn init_value<const D: usize>(&self, x: &Vector<D>) -> f64 {
        self.check_dim::<D>();
        match *self {
            Shape::Ellipse2D { center, a, b } => {
                let (u, v) = ((x[0] - center[0]) / a, (x[1] - center[1]) / b);
                1.0 - (u * u + v * v).sqrt()
            }
            Shape::Ellipsoid3D { center, a, b, c } => {
                let e = [a, b, c];
                1.0 - (0..3).map(|i| ((x[i] - center[i]) / e[i]).powi(2)).sum::<f64>().sqrt()
            }
            _ => self.reference_sdf(x),
        }
    }

    pub fn reference_sdf<const D: usize>(&self, x: &Vector<D>) -> f64 {
        self.reference(x).sdf
    }

    /// Signed distance, closest point, normal and curvature.
    ///
    /// # Panics
    /// If the shape does not exist in `D` dimensions.
    pub fn reference<const D: usize>(&self, x: &Vector<D>) -> SurfaceReference<D> {
        self.check_dim::<D>();
        match *self {
            Shape::Circle { center, radius } => {
                let c: Vector<D> = core::array::from_fn(|i| center[i]);
                let d = geom::sub(x, &c);
                let r = geom::norm(&d);
                let normal = if r > 0.0 {
                    geom::scale(&d, 1.0 / r)
                } else {
                    core::array::from_fn(|i| if i == 0 { 1.0 } else { 0.0 })
                };
                SurfaceReference {
                    sdf: r - radius,
                    closest_point: geom::axpy(&c, radius, &normal),
                    normal,
                    curvature: 1.0 / radius,
                }
            }
            Shape::Ellipse2D { center, a, b } => lift(ellipsoid_reference(&[a, b], &[x[0] - center[0], x[1] - center[1]], &center)),
            Shape::Ellipsoid3D { center, a, b, c } => {
                lift(ellipsoid_reference(&[a, b, c], &core::array::from_fn(|i| x[i] - center[i]), &center))
            }
            Shape::Square { center, half_side } => lift(rounded_box_reference([half_side; 2], 0.0, &[x[0], x[1]], &center)),
            Shape::RoundedRectangle { center, half_extents, corner_radius } => {
                lift(rounded_box_reference(half_extents, corner_radius, &[x[0], x[1]], &center))
            }
        }
    }

    /// Exact enclosed area (2D) or volume (3D).
    pub fn measure(&self, dim: usize) -> f64 {
        match *self {
            Shape::Circle { radius, .. } => {
                if dim == 3 {
                    4.0 / 3.0 * PI * radius.powi(3)
                } else {
                    PI * radius * radius
                }
            }
            Shape::Ellipse2D { a, b, .. } => PI * a * b,
            Shape::Ellipsoid3D { a, b, c, .. } => 4.0 / 3.0 * PI * a * b * c,
            Shape::Square { half_side, .. } => 4.0 * half_side * half_side,
            Shape::RoundedRectangle { half_extents, corner_radius, .. } => {
                4.0 * half_extents[0] * half_extents[1] - (4.0 - PI) * corner_radius * corner_radius
            }
        }
    }
}

fn lift<const N: usize, const D: usize>(r: SurfaceReference<N>) -> SurfaceReference<D> {
    SurfaceReference {
        sdf: r.sdf,
        closest_point: core::array::from_fn(|i| r.closest_point[i]),
        normal: core::array::from_fn(|i| r.normal[i]),
        curvature: r.curvature,
    }
}

/// Box `|p_i| <= half_i` with rounded corners of radius `r` (`r = 0` gives
/// sharp corners).
fn rounded_box_reference(half: [f64; 2], r: f64, x: &[f64; 2], center: &[f64; 2]) -> SurfaceReference<2> {
    let p = [x[0] - center[0], x[1] - center[1]];
    let inner = [half[0] - r, half[1] - r];
    let q = [p[0].abs() - inner[0], p[1].abs() - inner[1]];
    if q[0] > 0.0 || q[1] > 0.0 {
        let clamped = [p[0].clamp(-inner[0], inner[0]), p[1].clamp(-inner[1], inner[1])];
        let dir = geom::sub(&p, &clamped);
        let len = geom::norm(&dir);
        let normal = geom::scale(&dir, 1.0 / len);
        let cp = geom::axpy(&clamped, r, &normal);
        let curvature = if q[0] > 0.0 && q[1] > 0.0 && r > 0.0 { 1.0 / r } else { 0.0 };
        SurfaceReference { sdf: len - r, closest_point: geom::add(&cp, center), normal, curvature }
    } else {
        let k = if q[0] >= q[1] { 0 } else { 1 };
        let s = if p[k] >= 0.0 { 1.0 } else { -1.0 };
        let mut cp = p;
        cp[k] = s * half[k];
        let mut normal = [0.0; 2];
        normal[k] = s;
        SurfaceReference { sdf: q[k] - r, closest_point: geom::add(&cp, center), normal, curvature: 0.0 }
    }
}

/// Root of `sum_i (n_i / (s + r_i))^2 - 1` on the bracket where it changes
/// sign; `r_last = 1`.
fn stationarity_root<const N: usize>(r: &[f64; N], z: &[f64; N]) -> f64 {
    let n: [f64; N] = core::array::from_fn(|i| r[i] * z[i]);
    let g = |s: f64| (0..N).map(|i| (n[i] / (s + r[i])).powi(2)).sum::<f64>() - 1.0;
    let mut s0 = z[N - 1] - 1.0;
    let mut s1 = if g(0.0) < 0.0 { 0.0 } else { geom::norm(&n) - 1.0 };
    let mut s = 0.5 * (s0 + s1);
    for _ in 0..400 {
        s = 0.5 * (s0 + s1);
        if s == s0 || s == s1 || s1 - s0 <= 1e-17 * (1.0 + s.abs()) {
            break;
        }
        let v = g(s);
        if v > 0.0 {
            s0 = s;
        } else if v < 0.0 {
            s1 = s;
        } else {
            break;
        }
    }
    s
}

/// Closest point on the ellipse with semi-axes `e0 >= e1` to `y >= 0`.
fn ellipse_cp_sorted(e: [f64; 2], y: [f64; 2]) -> [f64; 2] {
    if y[1] > 0.0 {
        if y[0] > 0.0 {
            let z = [y[0] / e[0], y[1] / e[1]];
            let r = [(e[0] / e[1]).powi(2), 1.0];
            let s = stationarity_root(&r, &z);
            [r[0] * y[0] / (s + r[0]), y[1] / (s + 1.0)]
        } else {
            [0.0, e[1]]
        }
    } else {
        let numer = e[0] * y[0];
        let denom = e[0] * e[0] - e[1] * e[1];
        if numer < denom {
            let xde = numer / denom;
            [e[0] * xde, e[1] * (1.0 - xde * xde).max(0.0).sqrt()]
        } else {
            [e[0], 0.0]
        }
    }
}

/// Closest point on the ellipsoid with semi-axes `e0 >= e1 >= e2` to `y >= 0`.
fn ellipsoid_cp_sorted(e: [f64; 3], y: [f64; 3]) -> [f64; 3] {
    if y[2] > 0.0 {
        if y[1] > 0.0 {
            if y[0] > 0.0 {
                let z = [y[0] / e[0], y[1] / e[1], y[2] / e[2]];
                let r = [(e[0] / e[2]).powi(2), (e[1] / e[2]).powi(2), 1.0];
                let s = stationarity_root(&r, &z);
                [r[0] * y[0] / (s + r[0]), r[1] * y[1] / (s + r[1]), y[2] / (s + 1.0)]
            } else {
                let c = ellipse_cp_sorted([e[1], e[2]], [y[1], y[2]]);
                [0.0, c[0], c[1]]
            }
        } else if y[0] > 0.0 {
            let c = ellipse_cp_sorted([e[0], e[2]], [y[0], y[2]]);
            [c[0], 0.0, c[1]]
        } else {
            [0.0, 0.0, e[2]]
        }
    } else {
        let d0 = e[0] * e[0] - e[2] * e[2];
        let d1 = e[1] * e[1] - e[2] * e[2];
        let (n0, n1) = (e[0] * y[0], e[1] * y[1]);
        if n0 < d0 && n1 < d1 {
            let (x0, x1) = (n0 / d0, n1 / d1);
            let rest = 1.0 - x0 * x0 - x1 * x1;
            if rest > 0.0 {
                return [e[0] * x0, e[1] * x1, e[2] * rest.sqrt()];
            }
        }
        let c = ellipse_cp_sorted([e[0], e[1]], [y[0], y[1]]);
        [c[0], c[1], 0.0]
    }
}

/// Reference geometry for the axis-aligned ellipse/ellipsoid `sum
/// p_i^2/e_i^2 = 1`, `p` relative to the center.
fn ellipsoid_reference<const N: usize>(e: &[f64; N], p: &[f64; N], center: &[f64; N]) -> SurfaceReference<N> {
    let mut order: [usize; N] = core::array::from_fn(|i| i);
    order.sort_by(|&i, &j| e[j].total_cmp(&e[i]));
    let es: [f64; N] = core::array::from_fn(|k| e[order[k]]);
    let ys: [f64; N] = core::array::from_fn(|k| p[order[k]].abs());
    let cs: [f64; N] = match N {
        2 => {
            let c = ellipse_cp_sorted([es[0], es[1]], [ys[0], ys[1]]);
            core::array::from_fn(|i| c[i])
        }
        3 => {
            let c = ellipsoid_cp_sorted([es[0], es[1], es[2]], [ys[0], ys[1], ys[2]]);
            core::array::from_fn(|i| c[i])
        }
        _ => unreachable!(),
    };
    let mut cp = [0.0; N];
    for k in 0..N {
        cp[order[k]] = cs[k].copysign(p[order[k]]);
    }
    let level: f64 = (0..N).map(|i| (p[i] / e[i]).powi(2)).sum();
    let dist = geom::dist(p, &cp);
    let sdf = if level < 1.0 { -dist } else { dist };
    let g: [f64; N] = core::array::from_fn(|i| 2.0 * cp[i] / (e[i] * e[i]));
    let hess: [[f64; N]; N] = core::array::from_fn(|i| core::array::from_fn(|j| if i == j { 2.0 / (e[i] * e[i]) } else { 0.0 }));
    let div = geom::unit_gradient_divergence(&g, &hess);
    let curvature = if N == 3 { 0.5 * div } else { div };
    SurfaceReference {
        sdf,
        closest_point: geom::add(&cp, center),
        normal: geom::scale(&g, 1.0 / geom::norm(&g)),
        curvature,
    }
}

pub fn init_levelset<const D: usize>(shape: &Shape, points: &[Vector<D>]) -> Vec<f64> {
    map_range(points.len(), |i| shape.init_value(&points[i]))
}

pub fn reference_sdf<const D: usize>(shape: &Shape, points: &[Vector<D>]) -> Vec<f64> {
    map_range(points.len(), |i| shape.reference_sdf(&points[i]))
}

/// Number of Cartesian nodes `lo + i h` along each axis: the upper face is
/// included only on open axes.
pub fn grid_shape<const D: usize>(h: f64, domain: &Domain<D>) -> Result<[usize; D]> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter("grid spacing must be positive"));
    }
    let ext = domain.extent();
    Ok(core::array::from_fn(|i| {
        let n = (ext[i] / h + 1e-9).floor() as usize;
        if domain.periodic[i] {
            n.max(1)
        } else {
            n + 1
        }
    }))
}

/// Cartesian nodes shifted by `alpha h mu`, `mu ~ U[-1, 1)` per axis.
///
/// Axis `k` draws from ChaCha8 stream `k` of `seed`; particle `p` (nodes
/// numbered with axis 0 fastest) consumes 64-bit word `p` of that stream.
pub fn perturbed_grid<const D: usize>(h: f64, alpha: f64, domain: &Domain<D>, seed: u64) -> Result<Vec<Vector<D>>> {
    if !(0.0..0.5).contains(&alpha) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let dims = grid_shape(h, domain)?;
    let total: usize = dims.iter().product();
    let mut points: Vec<Vector<D>> = Vec::with_capacity(total);
    for p in 0..total {
        let mut rem = p;
        points.push(core::array::from_fn(|i| {
            let k = rem % dims[i];
            rem /= dims[i];
            domain.lo[i] + k as f64 * h
        }));
    }
    if alpha > 0.0 {
        for axis in 0..D {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(axis as u64);
            for x in points.iter_mut() {
                let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                x[axis] += alpha * h * (2.0 * u - 1.0);
            }
        }
    }
    Ok(points)
}

/// One classical fourth-order Runge-Kutta step of `dx/dt = u(x, t)`.
pub fn rk4_step<const D: usize, F>(x: &Vector<D>, t: f64, dt: f64, velocity: &F) -> Vector<D>
where
    F: Fn(&Vector<D>, f64) -> Vector<D>,
{
    let k1 = velocity(x, t);
    let k2 = velocity(&geom::axpy(x, 0.5 * dt, &k1), t + 0.5 * dt);
    let k3 = velocity(&geom::axpy(x, 0.5 * dt, &k2), t + 0.5 * dt);
    let k4 = velocity(&geom::axpy(x, dt, &k3), t + dt);
    core::array::from_fn(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Moves every particle one RK4 step; level-set values are carried along.
pub fn rk4_advect<const D: usize, F>(particles: &ParticleSet<D>, velocity: &F, t: f64, dt: f64) -> ParticleSet<D>
where
    F: Fn(&Vector<D>, f64) -> Vector<D> + Sync,
{
    let positions = map_range(particles.len(), |i| rk4_step(&particles.positions[i], t, dt, velocity));
    ParticleSet { positions, ..particles.clone() }
}

/// Reversible single-vortex field on the unit square, period 8.
pub fn spiraling_vortex(x: &Vector<2>, t: f64) -> Vector<2> {
    let f = 2.0 * (PI * t / 8.0).cos();
    let (sx, cx) = (PI * x[0]).sin_cos();
    let (sy, cy) = (PI * x[1]).sin_cos();
    [-f * sx * sx * sy * cy, f * sy * sy * sx * cx]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub linf: f64,
    /// Root mean square over the masked entries.
    pub l2: f64,
    pub count: usize,
}

pub fn error_report(computed: &[f64], reference: &[f64], mask: Option<&[bool]>) -> Result<ErrorReport> {
    if computed.len() != reference.len() {
        return Err(Error::LengthMismatch { left: computed.len(), right: reference.len() });
    }
    if let Some(m) = mask {
        if m.len() != computed.len() {
            return Err(Error::LengthMismatch { left: computed.len(), right: m.len() });
        }
    }
    let (mut linf, mut sq, mut count) = (0.0_f64, 0.0, 0usize);
    for i in 0..computed.len() {
        if mask.is_some_and(|m| !m[i]) {
            continue;
        }
        let e = (computed[i] - reference[i]).abs();
        linf = linf.max(e);
        sq += e * e;
        count += 1;
    }
    let l2 = if count > 0 { (sq / count as f64).sqrt() } else { 0.0 };
    Ok(ErrorReport { linf, l2, count })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AreaEstimator {
    /// Number of inside particles times the cell volume.
    SignCount,
    /// `sum_i V clamp(1/2 - phi_i / width, 0, 1)`, a linear Heaviside of
    /// the given width.
    Ramp { width: f64 },
}

/// Enclosed area (2D) or volume (3D) of the region where
/// `orientation * phi < 0`, each particle representing `cell_volume`.
pub fn enclosed_measure(phi: &[f64], cell_volume: f64, orientation: f64, estimator: AreaEstimator) -> f64 {
    let inside: f64 = match estimator {
        AreaEstimator::SignCount => phi.iter().filter(|p| orientation * **p < 0.0).count() as f64,
        AreaEstimator::Ramp { width } => phi.iter().map(|p| (0.5 - orientation * p / width).clamp(0.0, 1.0)).sum(),
    };
    inside * cell_volume
}

/// `|A - A_exact| / A_exact`.
pub fn relative_error(measured: f64, exact: f64) -> f64 {
    (measured - exact).abs() / exact.abs()
}

/// Least-squares slope of `log e` against `log h`.
pub fn convergence_order(h: &[f64], e: &[f64]) -> Result<f64> {
    if h.len() != e.len() {
        return Err(Error::LengthMismatch { left: h.len(), right: e.len() });
    }
    if h.len() < 2 || h.iter().chain(e).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidConvergenceData);
    }
    let n = h.len() as f64;
    let lx: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidConvergenceData);
    }
    Ok(sxy / sxx)
}
