//! Particle closest-point (PCP) redistancing.
//!
//! A redistancing pass runs in phases, each data-parallel over disjoint
//! outputs:
//!
//! 1. the close set `C`: particles with an opposite-sign neighbour within `xi`;
//! 2. one local least-squares polynomial of `phi` per seed in `C`, over the
//!    seed's `r_c` neighbourhood;
//! 3. one sample per seed, obtained by projecting the seed onto the zero
//!    set of its polynomial;
//! 4. per query particle, a constrained Newton search for the closest point
//!    on the polynomial of the nearest sample, followed by
//!    `phi = sgn(phi_old) |cp - x|`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::geom::{self, Domain, Vector};
use crate::levelset::ParticleSet;
use crate::linalg::solve_dense;
use crate::par::map_range;
use crate::polyreg::{self, BasisKind, BasisSpec, LocalFrame, RegressionPoly};
use crate::spatial::CellList;
use crate::{Error, Result};

/// Smallest magnitude a redistanced value may take.
pub const PHI_FLOOR: f64 = 1e-300;

const GRADIENT_GUARD: f64 = 1e-300;
const SINGULAR_RETRIES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcpParams {
    pub degree: usize,
    pub basis: BasisKind,
    /// Regression cutoff `r_c`.
    pub cutoff: f64,
    /// Close-set radius.
    pub xi: f64,
    /// Narrow-band width `w`.
    pub band_width: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub skin_width: f64,
    /// Fit monomials in the `r_c`-scaled frame instead of raw offsets.
    pub scaled_monomial: bool,
}

impl PcpParams {
    /// Degree-4 Newton-Lagrange regression with `r_c = 2.5h`, `xi = 1.5h`,
    /// `w = 12h`, `eps = 1e-14`, `k_max = 1000` and no skin.
    pub fn new(h: f64) -> Self {
        Self {
            degree: 4,
            basis: BasisKind::NewtonLagrange,
            cutoff: 2.5 * h,
            xi: 1.5 * h,
            band_width: 12.0 * h,
            tolerance: 1e-14,
            max_iterations: 1000,
            skin_width: 0.0,
            scaled_monomial: false,
        }
    }

    /// `r_c + xi`.
    pub fn reach(&self) -> f64 {
        self.cutoff + self.xi
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff > 0.0) {
            return Err(Error::InvalidParameter("regression cutoff must be positive"));
        }
        if !(self.xi > 0.0) {
            return Err(Error::InvalidParameter("close-set radius must be positive"));
        }
        if !(self.band_width > 0.0) {
            return Err(Error::InvalidParameter("band width must be positive"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("iteration cap must be at least 1"));
        }
        if !(self.skin_width >= 0.0) {
            return Err(Error::InvalidParameter("skin width must be non-negative"));
        }
        Ok(())
    }

    /// Checks `r_c + xi < w/2`, required when the band is maintained by
    /// skin redistancing.
    pub fn validate_skin(&self) -> Result<()> {
        self.validate()?;
        if self.reach() >= 0.5 * self.band_width {
            return Err(Error::ReachExceedsBand { reach: self.reach(), half_width: 0.5 * self.band_width });
        }
        Ok(())
    }
}

/// A point on the zero level set of its generating polynomial.
#[derive(Debug, Clone)]
pub struct SamplePoint<const D: usize> {
    /// Position in the frame of `poly` (not wrapped into a periodic box).
    pub position: Vector<D>,
    pub poly: RegressionPoly<D>,
    pub seed: usize,
}

/// Particles with a strictly opposite-sign neighbour within `xi`, ascending.
pub fn find_close_set<const D: usize>(phi: &[f64], index: &CellList<D>, xi: f64) -> Vec<usize> {
    let flags = map_range(phi.len(), |i| {
        let mut hit = false;
        if phi[i] != 0.0 {
            index.for_each_within(&index.points()[i], xi, |j, _| hit |= phi[i] * phi[j] < 0.0);
        }
        hit
    });
    (0..phi.len()).filter(|&i| flags[i]).collect()
}

/// Least-squares polynomial of `phi` over the `r_c` neighbourhood of `seed`,
/// framed at the seed.
pub fn build_local_poly<const D: usize>(
    seed: usize,
    phi: &[f64],
    index: &CellList<D>,
    params: &PcpParams,
    basis: &Arc<BasisSpec<D>>,
) -> Result<RegressionPoly<D>> {
    let center = index.points()[seed];
    let domain = index.domain();
    let mut pts = Vec::new();
    let mut vals = Vec::new();
    index.for_each_within(&center, params.cutoff, |j, _| {
        pts.push(domain.unwrap_near(&index.points()[j], &center));
        vals.push(phi[j]);
    });
    let need = basis.coeff_count();
    if pts.len() < need {
        return Err(Error::InsufficientNeighbors { seed, have: pts.len(), need });
    }
    let frame = match basis.kind() {
        BasisKind::Monomial if params.scaled_monomial => LocalFrame::new(center, params.cutoff),
        kind => LocalFrame::for_regression(kind, center, params.cutoff),
    };
    polyreg::fit(&pts, &vals, basis, frame)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection<const D: usize> {
    pub position: Vector<D>,
    pub iterations: usize,
    pub converged: bool,
}

/// `x <- x - p(x) grad p(x) / |grad p(x)|^2` until `|p(x)| < eps`.
///
/// Without convergence after `k_max` steps the last iterate is returned
/// with `converged == false`.
pub fn project_to_zero<const D: usize>(poly: &RegressionPoly<D>, x0: &Vector<D>, eps: f64, k_max: usize) -> Result<Projection<D>> {
    let mut x = *x0;
    for k in 0..=k_max {
        let (p, g) = poly.eval_grad(&x);
        if p.abs() < eps {
            return Ok(Projection { position: x, iterations: k, converged: true });
        }
        if k == k_max {
            break;
        }
        let gn2 = geom::norm_sq(&g);
        if !(gn2.sqrt() >= GRADIENT_GUARD) {
            return Err(Error::VanishingGradient);
        }
        x = geom::axpy(&x, -p / gn2, &g);
    }
    Ok(Projection { position: x, iterations: k_max, converged: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NewtonStatus {
    Converged,
    /// `k_max` reached; the iterate with the smallest residual is returned.
    MaxIterations,
    /// The bordered system stayed singular through all damped retries.
    Singular,
    /// An iterate left the admissible ball around the start point.
    Diverged,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonResult<const D: usize> {
    pub cp: Vector<D>,
    pub lambda: f64,
    pub iterations: usize,
    pub residual: f64,
    pub status: NewtonStatus,
}

/// Stationary point of `L(x, lambda) = |x - x_q|^2 / 2 + lambda p(x)`,
/// started from a sample `x_s` on the zero set.
///
/// Full Newton steps on the bordered system `[[I + lambda H, g], [g^T, 0]]`.
/// When it is singular, the step is taken with `I` in place of
/// `I + lambda H` and halved per consecutive retry, up to five times.
/// Iterates farther than `max_step` from `x_s` stop the search.
pub fn closest_point_newton<const D: usize>(
    poly: &RegressionPoly<D>,
    x_q: &Vector<D>,
    x_s: &Vector<D>,
    eps: f64,
    k_max: usize,
    max_step: f64,
) -> Result<NewtonResult<D>> {
    let n = D + 1;
    let mut x = *x_s;
    let (_, g0) = poly.eval_grad(&x);
    let gn2 = geom::norm_sq(&g0);
    if !(gn2.sqrt() >= GRADIENT_GUARD) {
        return Err(Error::VanishingGradient);
    }
    let mut lambda = geom::dot(&geom::sub(x_q, &x), &g0) / gn2;
    let mut best = NewtonResult { cp: x, lambda, iterations: 0, residual: f64::INFINITY, status: NewtonStatus::MaxIterations };
    let mut retries = 0;
    let mut m = [0.0; 16];
    let mut rhs = [0.0; 4];
    for k in 0..=k_max {
        let (p, g, hess) = poly.eval_all(&x);
        let mut res2 = p * p;
        for i in 0..D {
            let r = x[i] - x_q[i] + lambda * g[i];
            rhs[i] = -r;
            res2 += r * r;
        }
        rhs[D] = -p;
        let residual = res2.sqrt();
        if residual < best.residual {
            best = NewtonResult { cp: x, lambda, iterations: k, residual, status: NewtonStatus::MaxIterations };
        }
        if residual < eps {
            return Ok(NewtonResult { cp: x, lambda, iterations: k, residual, status: NewtonStatus::Converged });
        }
        if k == k_max {
            break;
        }
        let fill = |m: &mut [f64; 16], curvature: f64| {
            for i in 0..D {
                for j in 0..D {
                    m[i * n + j] = if i == j { 1.0 } else { 0.0 } + curvature * hess[i][j];
                }
                m[i * n + D] = g[i];
                m[D * n + i] = g[i];
            }
            m[D * n + D] = 0.0;
        };
        fill(&mut m, lambda);
        let mut step = rhs;
        let mut damping = 1.0;
        if solve_dense(&mut m[..n * n], &mut step[..n], n) {
            retries = 0;
        } else {
            retries += 1;
            if retries > SINGULAR_RETRIES {
                return Ok(NewtonResult { status: NewtonStatus::Singular, ..best });
            }
            fill(&mut m, 0.0);
            step = rhs;
            if !solve_dense(&mut m[..n * n], &mut step[..n], n) {
                return Ok(NewtonResult { status: NewtonStatus::Singular, ..best });
            }
            damping = 0.5_f64.powi(retries as i32);
        }
        for i in 0..D {
            x[i] += damping * step[i];
        }
        lambda += damping * step[D];
        if !(geom::dist(&x, x_s) <= max_step) {
            return Ok(NewtonResult { status: NewtonStatus::Diverged, ..best });
        }
    }
    Ok(best)
}

/// Unit normal `grad p / |grad p|` and mean curvature `div n` (halved in 3D).
pub fn surface_quantities<const D: usize>(poly: &RegressionPoly<D>, cp: &Vector<D>) -> Result<(Vector<D>, f64)> {
    let (_, g, hess) = poly.eval_all(cp);
    let gn = geom::norm(&g);
    if !(gn >= GRADIENT_GUARD) {
        return Err(Error::VanishingGradient);
    }
    let div = geom::unit_gradient_divergence(&g, &hess);
    let kappa = if D == 3 { 0.5 * div } else { div };
    Ok((geom::scale(&g, 1.0 / gn), kappa))
}

/// Marks `|phi| <= w/2` as narrow band; returns (band, complement) sizes.
pub fn update_band<const D: usize>(particles: &mut ParticleSet<D>, w: f64) -> (usize, usize) {
    particles.update_band(w)
}

/// Smallest admissible skin redistancing frequency
/// `u_max / (w/2 - reach)`.
pub fn skin_frequency(u_max: f64, w: f64, reach: f64) -> Result<f64> {
    let margin = 0.5 * w - reach;
    if !(margin > 0.0) {
        return Err(Error::ReachExceedsBand { reach, half_width: 0.5 * w });
    }
    Ok(u_max / margin)
}

/// Geometry recovered for a redistanced particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceGeometry<const D: usize> {
    /// Closest point, in the unwrapped frame of the query.
    pub cp: Vector<D>,
    pub normal: Vector<D>,
    pub curvature: f64,
    pub status: NewtonStatus,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub close_set: usize,
    pub fits: usize,
    pub fit_failures: usize,
    pub projection_failures: usize,
    pub samples: usize,
    pub queries: usize,
    /// `projection_iterations[k]` projections converged after `k` steps.
    pub projection_iterations: Vec<usize>,
    /// `newton_iterations[k]` Newton solves converged after `k` steps.
    pub newton_iterations: Vec<usize>,
    /// `k_max` reached; best iterate used.
    pub newton_soft_failures: usize,
    /// Distance to the nearest sample used instead.
    pub newton_hard_failures: usize,
    pub restarts: usize,
    /// No sample within `w`; old value kept.
    pub outside_queries: usize,
}

fn bump(hist: &mut Vec<usize>, k: usize) {
    if hist.len() <= k {
        hist.resize(k + 1, 0);
    }
    hist[k] += 1;
}

/// Output of [`redistance`].
#[derive(Debug, Clone)]
pub struct Redistanced<const D: usize> {
    pub phi: Vec<f64>,
    /// Per particle; `None` where no closest point was computed.
    pub geometry: Vec<Option<SurfaceGeometry<D>>>,
    pub diagnostics: Diagnostics,
}

/// Close set, fits and projections.
pub fn generate_samples<const D: usize>(
    phi: &[f64],
    index: &CellList<D>,
    params: &PcpParams,
    diagnostics: &mut Diagnostics,
) -> Result<Vec<SamplePoint<D>>> {
    params.validate()?;
    if phi.len() != index.len() {
        return Err(Error::LengthMismatch { left: phi.len(), right: index.len() });
    }
    let basis = Arc::new(BasisSpec::<D>::new(params.basis, params.degree)?);
    let close = find_close_set(phi, index, params.xi);
    diagnostics.close_set = close.len();
    let built = map_range(close.len(), |k| {
        let seed = close[k];
        let poly = build_local_poly(seed, phi, index, params, &basis).ok()?;
        let proj = project_to_zero(&poly, &index.points()[seed], params.tolerance, params.max_iterations);
        Some((poly, proj))
    });
    let mut samples = Vec::with_capacity(close.len());
    for (k, item) in built.into_iter().enumerate() {
        match item {
            None => diagnostics.fit_failures += 1,
            Some((poly, proj)) => {
                diagnostics.fits += 1;
                match proj {
                    Ok(p) if p.converged => {
                        bump(&mut diagnostics.projection_iterations, p.iterations);
                        samples.push(SamplePoint { position: p.position, poly, seed: close[k] });
                    }
                    _ => diagnostics.projection_failures += 1,
                }
            }
        }
    }
    diagnostics.samples = samples.len();
    Ok(samples)
}

struct QueryOutcome<const D: usize> {
    phi: f64,
    geometry: Option<SurfaceGeometry<D>>,
    newton_steps: Option<usize>,
    soft: bool,
    hard: bool,
    restarted: bool,
    outside: bool,
}

/// Redistances the particles listed in `targets` against existing samples.
pub fn redistance_with_samples<const D: usize>(
    positions: &[Vector<D>],
    phi: &[f64],
    domain: &Domain<D>,
    samples: &[SamplePoint<D>],
    params: &PcpParams,
    targets: &[usize],
    diagnostics: &mut Diagnostics,
) -> Result<Redistanced<D>> {
    if samples.is_empty() {
        return Err(Error::NoSamples);
    }
    if positions.len() != phi.len() {
        return Err(Error::LengthMismatch { left: positions.len(), right: phi.len() });
    }
    let sample_pos: Vec<Vector<D>> = samples.iter().map(|s| domain.wrap(&s.position)).collect();
    let sample_domain = if domain.periodic.iter().all(|p| *p) {
        *domain
    } else {
        let b = Domain::bounding(&sample_pos, params.xi);
        Domain::new(
            core::array::from_fn(|i| if domain.periodic[i] { domain.lo[i] } else { b.lo[i] }),
            core::array::from_fn(|i| if domain.periodic[i] { domain.hi[i] } else { b.hi[i] }),
            domain.periodic,
        )
    };
    let sample_index = CellList::build(&sample_pos, params.xi, sample_domain)?;
    let max_step = 2.0 * params.cutoff;
    let solve = |q: usize| -> QueryOutcome<D> {
        let x_q = positions[q];
        let old = phi[q];
        let keep = QueryOutcome { phi: old, geometry: None, newton_steps: None, soft: false, hard: false, restarted: false, outside: false };
        let Ok(first) = sample_index.nearest(&x_q) else {
            return keep;
        };
        let s_near = &samples[first];
        let xq_near = domain.unwrap_near(&x_q, &s_near.position);
        let d_near = geom::dist(&xq_near, &s_near.position);
        if d_near > params.band_width {
            return QueryOutcome { outside: true, ..keep };
        }
        let attempt = |s: &SamplePoint<D>| -> Option<(NewtonResult<D>, Vector<D>)> {
            let xq = domain.unwrap_near(&x_q, &s.position);
            let r = closest_point_newton(&s.poly, &xq, &s.position, params.tolerance, params.max_iterations, max_step).ok()?;
            Some((r, xq))
        };
        let mut restarted = false;
        let mut used = first;
        let mut result = attempt(s_near);
        if matches!(result, Some((r, _)) if r.status == NewtonStatus::Diverged) {
            restarted = true;
            if let Ok(second) = sample_index.nearest_where(&x_q, |j| j != first) {
                used = second;
                result = attempt(&samples[second]);
            }
        }
        match result {
            Some((r, xq)) if matches!(r.status, NewtonStatus::Converged | NewtonStatus::MaxIterations) => {
                let dist = geom::dist(&r.cp, &xq).max(PHI_FLOOR);
                let geometry = surface_quantities(&samples[used].poly, &r.cp)
                    .ok()
                    .map(|(normal, curvature)| SurfaceGeometry { cp: r.cp, normal, curvature, status: r.status });
                QueryOutcome {
                    phi: dist.copysign(old),
                    geometry,
                    newton_steps: (r.status == NewtonStatus::Converged).then_some(r.iterations),
                    soft: r.status == NewtonStatus::MaxIterations,
                    hard: false,
                    restarted,
                    outside: false,
                }
            }
            _ => {
                let geometry = surface_quantities(&s_near.poly, &s_near.position).ok().map(|(normal, curvature)| SurfaceGeometry {
                    cp: s_near.position,
                    normal,
                    curvature,
                    status: NewtonStatus::Diverged,
                });
                QueryOutcome {
                    phi: d_near.max(PHI_FLOOR).copysign(old),
                    geometry,
                    newton_steps: None,
                    soft: false,
                    hard: true,
                    restarted,
                    outside: false,
                }
            }
        }
    };
    let outcomes = map_range(targets.len(), |k| solve(targets[k]));
    let mut out_phi = phi.to_vec();
    let mut geometry = vec![None; phi.len()];
    diagnostics.queries += targets.len();
    for (k, o) in outcomes.into_iter().enumerate() {
        let q = targets[k];
        out_phi[q] = o.phi;
        geometry[q] = o.geometry;
        if let Some(s) = o.newton_steps {
            bump(&mut diagnostics.newton_iterations, s);
        }
        diagnostics.newton_soft_failures += o.soft as usize;
        diagnostics.newton_hard_failures += o.hard as usize;
        diagnostics.restarts += o.restarted as usize;
        diagnostics.outside_queries += o.outside as usize;
    }
    Ok(Redistanced { phi: out_phi, geometry, diagnostics: diagnostics.clone() })
}

/// Full redistancing pass over `targets`, every particle acting as a
/// regression point.
pub fn redistance<const D: usize>(
    positions: &[Vector<D>],
    phi: &[f64],
    domain: &Domain<D>,
    params: &PcpParams,
    targets: &[usize],
) -> Result<Redistanced<D>> {
    let index = CellList::build(positions, params.xi, *domain)?;
    let mut diagnostics = Diagnostics::default();
    let samples = generate_samples(phi, &index, params, &mut diagnostics)?;
    redistance_with_samples(positions, phi, domain, &samples, params, targets, &mut diagnostics)
}

/// Redistances the narrow band (`|phi| <= w/2`) of a particle set in place.
pub fn redistance_band<const D: usize>(particles: &mut ParticleSet<D>, domain: &Domain<D>, params: &PcpParams) -> Result<Redistanced<D>> {
    particles.update_band(params.band_width);
    let targets = particles.band_indices();
    let out = redistance(&particles.positions, &particles.phi, domain, params, &targets)?;
    particles.phi.clone_from(&out.phi);
    Ok(out)
}
