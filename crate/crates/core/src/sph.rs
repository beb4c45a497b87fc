//! Weakly compressible two-phase SPH with continuum-surface-force surface
//! tension, the force coming either from PCP geometry or from a colorfield.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::geom::{self, Domain, Vector};
use crate::par::map_range;
use crate::pcp::{self, Diagnostics, PcpParams, SurfaceGeometry};
use crate::spatial::CellList;
use crate::{Error, Result};

fn wendland_sigma<const D: usize>(eps: f64) -> f64 {
    match D {
        1 => 5.0 / (8.0 * eps),
        2 => 7.0 / (4.0 * PI * eps * eps),
        _ => 21.0 / (16.0 * PI * eps.powi(3)),
    }
}

/// Wendland C2 kernel at distance `r`, normalised in `D` dimensions.
pub fn wendland_c2<const D: usize>(r: f64, eps: f64) -> f64 {
    let q = r / eps;
    if q >= 2.0 {
        return 0.0;
    }
    let s = 1.0 - 0.5 * q;
    wendland_sigma::<D>(eps) * s * s * s * s * (1.0 + 2.0 * q)
}

/// `dW/dr = -5 q sigma / eps (1 - q/2)^3`.
pub fn wendland_c2_dr<const D: usize>(r: f64, eps: f64) -> f64 {
    let q = r / eps;
    if q >= 2.0 {
        return 0.0;
    }
    let s = 1.0 - 0.5 * q;
    -5.0 * q * wendland_sigma::<D>(eps) / eps * s * s * s
}

/// Gradient of the kernel with respect to the first point, `r = x_i - x_j`.
pub fn wendland_c2_grad<const D: usize>(r: &Vector<D>, eps: f64) -> Vector<D> {
    let q = geom::norm(r) / eps;
    if q >= 2.0 {
        return [0.0; D];
    }
    let s = 1.0 - 0.5 * q;
    geom::scale(r, -5.0 * wendland_sigma::<D>(eps) / (eps * eps) * s * s * s)
}

/// One-dimensional Wendland C2 kernel of `|phi|`, used as the interface
/// delta.
pub fn wendland_c2_1d(phi: f64, eps: f64) -> f64 {
    let q = phi.abs() / eps;
    if q >= 2.0 {
        return 0.0;
    }
    let s = 1.0 - 0.5 * q;
    5.0 / (8.0 * eps) * s * s * s * (1.5 * q + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidParams {
    pub rho0: f64,
    /// Speed of sound.
    pub c: f64,
    pub gamma: f64,
    /// Dynamic viscosity.
    pub eta: f64,
    /// Surface tension.
    pub tau: f64,
    /// SPH smoothing length.
    pub eps: f64,
    pub h: f64,
}

impl FluidParams {
    /// Droplet fluids: `rho0 = 1`, `c = 100`, `gamma = 7`, `eta = 0.5`,
    /// `tau = 50`, `eps = 3h`.
    pub fn droplet(h: f64) -> Self {
        Self { rho0: 1.0, c: 100.0, gamma: 7.0, eta: 0.5, tau: 50.0, eps: 3.0 * h, h }
    }
}

/// Cole equation of state.
pub fn cole_eos(rho: f64, params: &FluidParams) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::NonPositiveDensity(rho));
    }
    let FluidParams { rho0, c, gamma, .. } = *params;
    Ok(c * c * rho0 / gamma * ((rho / rho0).powf(gamma) - 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphState<const D: usize> {
    pub positions: Vec<Vector<D>>,
    pub velocities: Vec<Vector<D>>,
    pub masses: Vec<f64>,
    pub densities: Vec<f64>,
    pub pressures: Vec<f64>,
    /// Volumes `1 / sum_j W_ij`.
    pub volumes: Vec<f64>,
    /// Binary phase indicator.
    pub color: Vec<f64>,
    pub phi: Vec<f64>,
}

impl<const D: usize> SphState<D> {
    /// Particles at rest with mass `rho0 |domain| / n`.
    pub fn at_rest(positions: Vec<Vector<D>>, color: Vec<f64>, phi: Vec<f64>, domain: &Domain<D>, rho0: f64) -> Result<Self> {
        let n = positions.len();
        if color.len() != n {
            return Err(Error::LengthMismatch { left: n, right: color.len() });
        }
        if phi.len() != n {
            return Err(Error::LengthMismatch { left: n, right: phi.len() });
        }
        let m = rho0 * domain.volume() / n as f64;
        Ok(Self {
            positions,
            velocities: vec![[0.0; D]; n],
            masses: vec![m; n],
            densities: vec![rho0; n],
            pressures: vec![0.0; n],
            volumes: vec![m / rho0; n],
            color,
            phi,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn kinetic_energy(&self) -> f64 {
        self.masses.iter().zip(&self.velocities).map(|(m, u)| 0.5 * m * geom::norm_sq(u)).sum()
    }

    pub fn momentum(&self) -> Vector<D> {
        let mut p = [0.0; D];
        for (m, u) in self.masses.iter().zip(&self.velocities) {
            p = geom::axpy(&p, *m, u);
        }
        p
    }

    pub fn max_speed(&self) -> f64 {
        self.velocities.iter().map(geom::norm).fold(0.0, f64::max)
    }
}

/// A neighbour `j` of particle `i` within the kernel support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor<const D: usize> {
    pub index: usize,
    /// Minimum-image `x_i - x_j`.
    pub offset: Vector<D>,
    pub distance: f64,
    /// `W(|x_i - x_j|)`.
    pub weight: f64,
    /// `W'(r) / r`, so that `grad_i W_ij = gradient_factor * offset`; zero
    /// for coincident points.
    pub gradient_factor: f64,
}

impl<const D: usize> Neighbor<D> {
    pub fn gradient(&self) -> Vector<D> {
        geom::scale(&self.offset, self.gradient_factor)
    }
}

/// Neighbour lists within `2 eps` with Wendland C2 weights, each particle
/// including itself.
#[derive(Debug, Clone)]
pub struct KernelNeighbors<const D: usize> {
    starts: Vec<usize>,
    pairs: Vec<Neighbor<D>>,
    half: Vec<(usize, usize, Neighbor<D>)>,
}

impl<const D: usize> KernelNeighbors<D> {
    pub fn build(positions: &[Vector<D>], domain: &Domain<D>, eps: f64) -> Result<Self> {
        let mut out = Self::empty();
        out.rebuild(positions, domain, eps)?;
        Ok(out)
    }

    /// Recomputes the lists in place, keeping the allocations.
    pub fn rebuild(&mut self, positions: &[Vector<D>], domain: &Domain<D>, eps: f64) -> Result<()> {
        let radius = 2.0 * eps;
        let index = CellList::build(positions, radius, *domain)?;
        let pts = index.points();
        let n = pts.len();
        self.half.clear();
        for (i, x) in pts.iter().enumerate() {
            index.for_each_within(x, radius, |j, d2| {
                if j < i {
                    return;
                }
                let r = d2.sqrt();
                let gradient_factor = if r > 0.0 { wendland_c2_dr::<D>(r, eps) / r } else { 0.0 };
                let weight = wendland_c2::<D>(r, eps);
                let offset = domain.displacement(x, &pts[j]);
                self.half.push((i, j, Neighbor { index: j, offset, distance: r, weight, gradient_factor }));
            });
        }
        self.starts.clear();
        self.starts.resize(n + 1, 0);
        for &(i, j, _) in &self.half {
            self.starts[i + 1] += 1;
            if j != i {
                self.starts[j + 1] += 1;
            }
        }
        for k in 0..n {
            self.starts[k + 1] += self.starts[k];
        }
        let blank = Neighbor { index: 0, offset: [0.0; D], distance: 0.0, weight: 0.0, gradient_factor: 0.0 };
        self.pairs.clear();
        self.pairs.resize(self.starts[n], blank);
        let mut fill = self.starts[..n].to_vec();
        for &(i, j, p) in &self.half {
            self.pairs[fill[i]] = p;
            fill[i] += 1;
            if j != i {
                self.pairs[fill[j]] = Neighbor { index: i, offset: geom::scale(&p.offset, -1.0), ..p };
                fill[j] += 1;
            }
        }
        Ok(())
    }

    fn empty() -> Self {
        Self { starts: vec![0], pairs: Vec::new(), half: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.starts.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn of(&self, i: usize) -> &[Neighbor<D>] {
        &self.pairs[self.starts[i]..self.starts[i + 1]]
    }
}

pub fn kernel_index<const D: usize>(positions: &[Vector<D>], domain: &Domain<D>, eps: f64) -> Result<KernelNeighbors<D>> {
    KernelNeighbors::build(positions, domain, eps)
}

/// `rho_i = m_i sum_j W_ij` and `V_i = 1 / sum_j W_ij`, with the weights
/// stored in `index`.
pub fn density_summation<const D: usize>(masses: &[f64], index: &KernelNeighbors<D>, _eps: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if masses.len() != index.len() {
        return Err(Error::LengthMismatch { left: masses.len(), right: index.len() });
    }
    let sums = map_range(index.len(), |i| index.of(i).iter().map(|p| p.weight).sum::<f64>());
    let rho = sums.iter().zip(masses).map(|(s, m)| m * s).collect();
    let vol = sums.iter().map(|s| 1.0 / s).collect();
    Ok((rho, vol))
}

/// Pressure and viscous accelerations plus the optional surface term.
pub fn momentum_rhs<const D: usize>(
    state: &SphState<D>,
    index: &KernelNeighbors<D>,
    params: &FluidParams,
    surface: Option<&[Vector<D>]>,
) -> Result<Vec<Vector<D>>> {
    let n = state.len();
    if index.len() != n {
        return Err(Error::LengthMismatch { left: index.len(), right: n });
    }
    if let Some(f) = surface {
        if f.len() != n {
            return Err(Error::LengthMismatch { left: f.len(), right: n });
        }
    }
    let out = map_range(n, |i| -> core::result::Result<Vector<D>, (usize, usize)> {
        let (rho_i, p_i, v_i) = (state.densities[i], state.pressures[i], state.volumes[i]);
        let mut acc = [0.0; D];
        let mut bad = None;
        for p in index.of(i) {
            let (j, dist) = (p.index, p.distance);
            if j == i {
                continue;
            }
            if dist == 0.0 {
                bad = Some(j);
                continue;
            }
            let (rho_j, p_j, v_j) = (state.densities[j], state.pressures[j], state.volumes[j]);
            let vv = v_i * v_i + v_j * v_j;
            let p_avg = (rho_i * p_j + rho_j * p_i) / (rho_i + rho_j);
            acc = geom::axpy(&acc, -vv * p_avg, &p.gradient());
            let u_ij = geom::sub(&state.velocities[i], &state.velocities[j]);
            acc = geom::axpy(&acc, params.eta * vv * p.gradient_factor, &u_ij);
        }
        if let Some(j) = bad {
            return Err((i.min(j), i.max(j)));
        }
        let mut a = geom::scale(&acc, 1.0 / state.masses[i]);
        if let Some(f) = surface {
            a = geom::add(&a, &f[i]);
        }
        Ok(a)
    });
    out.into_iter().map(|r| r.map_err(|(a, b)| Error::CoincidentParticles(a, b))).collect()
}

/// `F_i = -(tau / rho_i) kappa_i n_i W_1D(phi_i)`; zero where `|phi| >= 2 eps`.
pub fn csf_force_pcp<const D: usize>(
    densities: &[f64],
    phi: &[f64],
    geometry: &[Option<SurfaceGeometry<D>>],
    params: &FluidParams,
) -> Result<Vec<Vector<D>>> {
    if densities.len() != phi.len() {
        return Err(Error::LengthMismatch { left: densities.len(), right: phi.len() });
    }
    if geometry.len() != phi.len() {
        return Err(Error::LengthMismatch { left: geometry.len(), right: phi.len() });
    }
    let mut out = vec![[0.0; D]; phi.len()];
    for (i, f) in out.iter_mut().enumerate() {
        let delta = wendland_c2_1d(phi[i], params.eps);
        if delta == 0.0 {
            continue;
        }
        let g = geometry[i].as_ref().ok_or(Error::MissingGeometry(i))?;
        *f = geom::scale(&g.normal, -params.tau / densities[i] * g.curvature * delta);
    }
    Ok(out)
}

/// Per-stage output of [`colorfield_pipeline`].
#[derive(Debug, Clone, PartialEq)]
pub struct Colorfield<const D: usize> {
    /// Smoothed color `c_i`.
    pub smooth: Vec<f64>,
    /// Color gradient `n_hat_i`.
    pub gradient: Vec<Vector<D>>,
    /// Interface indicator `N_i`.
    pub interface: Vec<bool>,
    pub normals: Vec<Vector<D>>,
    pub curvature: Vec<f64>,
    pub force: Vec<Vector<D>>,
}

/// Colorfield normals, curvature and surface force. `n_hat_i` and the
/// curvature sums weight each neighbour by its volume `V_j`.
pub fn colorfield_pipeline<const D: usize>(
    color: &[f64],
    volumes: &[f64],
    densities: &[f64],
    index: &KernelNeighbors<D>,
    params: &FluidParams,
) -> Result<Colorfield<D>> {
    let n = index.len();
    for len in [color.len(), volumes.len(), densities.len()] {
        if len != n {
            return Err(Error::LengthMismatch { left: len, right: n });
        }
    }
    let eps = params.eps;
    let smooth = map_range(n, |i| {
        index.of(i).iter().map(|p| color[p.index] * p.weight * volumes[p.index]).sum::<f64>()
    });
    let gradient = map_range(n, |i| {
        let mut g = [0.0; D];
        for p in index.of(i) {
            let j = p.index;
            if j != i {
                g = geom::axpy(&g, (smooth[j] - smooth[i]) * volumes[j], &p.gradient());
            }
        }
        g
    });
    let threshold = 0.01 / eps;
    let interface: Vec<bool> = gradient.iter().map(|g| geom::norm(g) > threshold).collect();
    let normals: Vec<Vector<D>> = gradient
        .iter()
        .zip(&interface)
        .map(|(g, &on)| if on { geom::scale(g, 1.0 / geom::norm(g)) } else { [0.0; D] })
        .collect();
    let curvature = map_range(n, |i| {
        if !interface[i] {
            return 0.0;
        }
        let (mut weight, mut div) = (0.0, 0.0);
        for p in index.of(i) {
            let j = p.index;
            if !interface[j] {
                continue;
            }
            weight += p.weight * volumes[j];
            if j != i {
                div += geom::dot(&geom::sub(&normals[j], &normals[i]), &p.gradient()) * volumes[j];
            }
        }
        if weight > 0.0 { div / weight } else { 0.0 }
    });
    let force = (0..n).map(|i| geom::scale(&gradient[i], -params.tau / densities[i] * curvature[i])).collect();
    Ok(Colorfield { smooth, gradient, interface, normals, curvature, force })
}

/// Largest step satisfying the acoustic, viscous and surface-tension
/// bounds.
pub fn cfl_timestep(params: &FluidParams, u_max: f64) -> f64 {
    let e = params.eps;
    let acoustic = 0.25 * e / (params.c + u_max);
    let viscous = if params.eta > 0.0 { 0.125 * params.rho0 * e * e / params.eta } else { f64::INFINITY };
    let capillary = if params.tau > 0.0 { 0.25 * (params.rho0 * e.powi(3) / (2.0 * PI * params.tau)).sqrt() } else { f64::INFINITY };
    acoustic.min(viscous).min(capillary)
}

/// PCP settings for the surface force.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcpBackend {
    pub params: PcpParams,
    /// Skin pass every this many steps; the band is redistanced at every
    /// sub-step.
    pub skin_interval: usize,
}

impl PcpBackend {
    /// Skin interval `ceil(1 / (f dt))` for skin frequency `f`.
    pub fn with_frequency(params: PcpParams, frequency: f64, dt: f64) -> Result<Self> {
        if !(frequency > 0.0) || !(dt > 0.0) {
            return Err(Error::InvalidParameter("skin frequency and time step must be positive"));
        }
        params.validate()?;
        let skin_interval = ((1.0 / (frequency * dt)) - 1e-9).ceil().max(1.0) as usize;
        Ok(Self { params, skin_interval })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceBackend {
    None,
    Pcp(PcpBackend),
    Colorfield,
}

/// Curvature of the particles carrying surface force at the last
/// evaluation, in the convention that a convex inside phase is positive.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InterfaceCurvature {
    pub particles: Vec<usize>,
    pub values: Vec<f64>,
}

impl InterfaceCurvature {
    /// Mean and population standard deviation; `None` if empty.
    pub fn stats(&self) -> Option<(f64, f64)> {
        if self.values.is_empty() {
            return None;
        }
        let n = self.values.len() as f64;
        let mean = self.values.iter().sum::<f64>() / n;
        let var = self.values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Some((mean, var.sqrt()))
    }
}

/// Two-phase simulation on a periodic box. The inside phase has color 1;
/// `orientation` is `-1` if `phi > 0` inside and `+1` otherwise.
#[derive(Debug, Clone)]
pub struct Simulation<const D: usize> {
    pub state: SphState<D>,
    pub params: FluidParams,
    pub domain: Domain<D>,
    pub backend: SurfaceBackend,
    pub orientation: f64,
    pub time: f64,
    pub steps: usize,
    /// Particles redistanced at every sub-step.
    pub band: Vec<usize>,
    pub curvature: InterfaceCurvature,
    pub diagnostics: Diagnostics,
    /// Uniform acceleration added to every particle.
    pub body_force: Vector<D>,
    neighbors: KernelNeighbors<D>,
}

impl<const D: usize> Simulation<D> {
    pub fn new(state: SphState<D>, params: FluidParams, domain: Domain<D>, backend: SurfaceBackend, orientation: f64) -> Self {
        Self {
            state,
            params,
            domain,
            backend,
            orientation,
            time: 0.0,
            steps: 0,
            band: Vec::new(),
            curvature: InterfaceCurvature::default(),
            diagnostics: Diagnostics::default(),
            body_force: [0.0; D],
            neighbors: KernelNeighbors::empty(),
        }
    }

    /// Redistances every particle, with no band cutoff.
    pub fn redistance_all(&mut self) -> Result<()> {
        let SurfaceBackend::Pcp(b) = self.backend else {
            return Err(Error::InvalidParameter("full redistancing needs the PCP backend"));
        };
        let mut p = b.params;
        p.band_width = geom::norm(&self.domain.extent());
        let targets: Vec<usize> = (0..self.state.len()).collect();
        let out = pcp::redistance(&self.state.positions, &self.state.phi, &self.domain, &p, &targets)?;
        self.state.phi = out.phi;
        self.diagnostics = out.diagnostics;
        self.refresh_band(&b.params);
        Ok(())
    }

    fn refresh_band(&mut self, p: &PcpParams) {
        let half = 0.5 * p.band_width;
        self.band = (0..self.state.len()).filter(|&i| self.state.phi[i].abs() <= half).collect();
    }

    fn skin_pass(&mut self, b: &PcpBackend) -> Result<()> {
        let mut p = b.params;
        p.band_width = b.params.skin_width.max(b.params.band_width);
        let half = 0.5 * p.band_width;
        let targets: Vec<usize> = (0..self.state.len()).filter(|&i| self.state.phi[i].abs() <= half).collect();
        let out = pcp::redistance(&self.state.positions, &self.state.phi, &self.domain, &p, &targets)?;
        self.state.phi = out.phi;
        self.refresh_band(&b.params);
        Ok(())
    }

    /// Densities, pressures, volumes, surface geometry and accelerations at
    /// the current positions and velocities.
    pub fn evaluate(&mut self) -> Result<Vec<Vector<D>>> {
        self.neighbors.rebuild(&self.state.positions, &self.domain, self.params.eps)?;
        let index = &self.neighbors;
        let (rho, vol) = density_summation(&self.state.masses, index, self.params.eps)?;
        self.state.pressures = rho.iter().map(|r| cole_eos(*r, &self.params)).collect::<Result<_>>()?;
        self.state.densities = rho;
        self.state.volumes = vol;
        let surface = match self.backend {
            SurfaceBackend::None => None,
            SurfaceBackend::Pcp(b) => {
                let out = pcp::redistance(&self.state.positions, &self.state.phi, &self.domain, &b.params, &self.band)?;
                self.state.phi = out.phi;
                self.diagnostics = out.diagnostics;
                let force = csf_force_pcp(&self.state.densities, &self.state.phi, &out.geometry, &self.params)?;
                let mut curv = InterfaceCurvature::default();
                for (i, g) in out.geometry.iter().enumerate() {
                    if let Some(g) = g {
                        if wendland_c2_1d(self.state.phi[i], self.params.eps) > 0.0 {
                            curv.particles.push(i);
                            curv.values.push(self.orientation * g.curvature);
                        }
                    }
                }
                self.curvature = curv;
                Some(force)
            }
            SurfaceBackend::Colorfield => {
                let cf = colorfield_pipeline(&self.state.color, &self.state.volumes, &self.state.densities, index, &self.params)?;
                let mut curv = InterfaceCurvature::default();
                for i in (0..cf.interface.len()).filter(|&i| cf.interface[i]) {
                    curv.particles.push(i);
                    curv.values.push(-cf.curvature[i]);
                }
                self.curvature = curv;
                Some(cf.force)
            }
        };
        let mut acc = momentum_rhs(&self.state, index, &self.params, surface.as_deref())?;
        if self.body_force.iter().any(|g| *g != 0.0) {
            for a in &mut acc {
                *a = geom::add(a, &self.body_force);
            }
        }
        Ok(acc)
    }

    /// One midpoint predictor-corrector step:
    /// `x* = x + dt/2 u`, `u* = u + dt/2 a(x, u)`, then
    /// `u' = u + dt a(x*, u*)`, `x' = x + dt u*`.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        if let SurfaceBackend::Pcp(b) = self.backend {
            if self.band.is_empty() || self.steps % b.skin_interval == 0 {
                self.skin_pass(&b)?;
            }
        }
        let x0 = self.state.positions.clone();
        let u0 = self.state.velocities.clone();
        let a0 = self.evaluate()?;
        let u_half: Vec<Vector<D>> = u0.iter().zip(&a0).map(|(u, a)| geom::axpy(u, 0.5 * dt, a)).collect();
        self.state.positions = x0.iter().zip(&u0).map(|(x, u)| self.domain.wrap(&geom::axpy(x, 0.5 * dt, u))).collect();
        self.state.velocities.clone_from(&u_half);
        let a_half = self.evaluate()?;
        self.state.velocities = u0.iter().zip(&a_half).map(|(u, a)| geom::axpy(u, dt, a)).collect();
        self.state.positions = x0.iter().zip(&u_half).map(|(x, u)| self.domain.wrap(&geom::axpy(x, dt, u))).collect();
        self.time += dt;
        self.steps += 1;
        Ok(())
    }

    /// Inside measure `sum_i V_i` over particles with `orientation * phi < 0`.
    pub fn droplet_volume(&self) -> f64 {
        self.state.phi.iter().zip(&self.state.volumes).filter(|(p, _)| self.orientation * **p < 0.0).map(|(_, v)| v).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice(n: usize, h: f64) -> Vec<Vector<2>> {
        (0..n * n).map(|k| [(k % n) as f64 * h + 0.5 * h, (k / n) as f64 * h + 0.5 * h]).collect()
    }

    #[test]
    fn kernel_values() {
        let e = 0.3;
        assert_eq!(wendland_c2::<2>(0.0, e), 7.0 / (4.0 * PI * e * e));
        assert_eq!(wendland_c2::<2>(2.0 * e, e), 0.0);
        assert_eq!(wendland_c2_grad::<2>(&[2.0 * e, 0.0], e), [0.0, 0.0]);
        assert_eq!(wendland_c2_1d(0.0, e), 5.0 / (8.0 * e));
        let (r, d) = (e, 1e-6);
        let fd = (wendland_c2::<2>(r + d, e) - wendland_c2::<2>(r - d, e)) / (2.0 * d);
        assert!((fd - wendland_c2_dr::<2>(r, e)).abs() < 1e-6 * fd.abs());
        let g = wendland_c2_grad::<3>(&[0.0, 0.0, r], e);
        assert!((g[2] - wendland_c2_dr::<3>(r, e)).abs() < 1e-14);
    }

    #[test]
    fn eos_values() {
        let p = FluidParams::droplet(1.0 / 32.0);
        assert_eq!(cole_eos(1.0, &p).unwrap(), 0.0);
        let d = 1e-6;
        let slope = (cole_eos(1.0 + d, &p).unwrap() - cole_eos(1.0 - d, &p).unwrap()) / (2.0 * d);
        assert!((slope - 1e4).abs() < 1e-3);
        assert_eq!(cole_eos(0.0, &p), Err(Error::NonPositiveDensity(0.0)));
    }

    #[test]
    fn cfl_bounds() {
        let mut p = FluidParams::droplet(1.0 / 128.0);
        assert!(5e-5 <= cfl_timestep(&p, 3.0));
        let a = cfl_timestep(&p, 3.0);
        p.eta = 1e12;
        assert_eq!(cfl_timestep(&p, 3.0), 0.125 * p.eps * p.eps / p.eta);
        assert!(a > cfl_timestep(&p, 3.0));
    }

    #[test]
    fn lattice_density_and_rest() {
        let n = 24;
        let h = 1.0 / n as f64;
        let d = Domain::periodic([0.0, 0.0], [1.0, 1.0]);
        let pos = lattice(n, h);
        let mut state = SphState::at_rest(pos, vec![0.0; n * n], vec![1.0; n * n], &d, 1.0).unwrap();
        let p = FluidParams { eps: 3.0 * h, ..FluidParams::droplet(h) };
        let idx = kernel_index(&state.positions, &d, p.eps).unwrap();
        let (rho, vol) = density_summation(&state.masses, &idx, p.eps).unwrap();
        assert!(rho.iter().all(|r| (r - 1.0).abs() < 0.02));
        assert!(vol.iter().all(|v| (v - h * h).abs() < 0.02 * h * h));
        state.densities = rho;
        state.volumes = vol;
        state.pressures = state.densities.iter().map(|r| cole_eos(*r, &p).unwrap()).collect();
        let a = momentum_rhs(&state, &idx, &p, None).unwrap();
        assert!(a.iter().all(|a| geom::norm(a) < 1e-8));
    }

    #[test]
    fn coincident_particles_rejected() {
        let d = Domain::periodic([0.0, 0.0], [1.0, 1.0]);
        let state = SphState::at_rest(vec![[0.5, 0.5], [0.5, 0.5]], vec![0.0; 2], vec![1.0; 2], &d, 1.0).unwrap();
        let p = FluidParams::droplet(0.05);
        let idx = kernel_index(&state.positions, &d, p.eps).unwrap();
        assert_eq!(momentum_rhs(&state, &idx, &p, None), Err(Error::CoincidentParticles(0, 1)));
    }

    #[test]
    fn uniform_phase_has_no_interface() {
        let n = 16;
        let h = 1.0 / n as f64;
        let d = Domain::periodic([0.0, 0.0], [1.0, 1.0]);
        let p = FluidParams { eps: 2.0 * h, ..FluidParams::droplet(h) };
        let pos = lattice(n, h);
        let idx = kernel_index(&pos, &d, p.eps).unwrap();
        let (rho, vol) = density_summation(&vec![h * h; n * n], &idx, p.eps).unwrap();
        let cf = colorfield_pipeline(&vec![1.0; n * n], &vol, &rho, &idx, &p).unwrap();
        assert!(cf.interface.iter().all(|on| !on));
        assert!(cf.force.iter().all(|f| f == &[0.0, 0.0]));
    }

    #[test]
    fn skin_interval_from_frequency() {
        let b = PcpBackend::with_frequency(PcpParams::new(0.1), 100.0, 2e-4).unwrap();
        assert_eq!(b.skin_interval, 50);
    }
}
