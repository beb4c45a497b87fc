//! Circle stretched by the reversing spiral vortex, redistanced after
//! every RK4 step.

use std::time::Instant;

use pcp_core::levelset::{self, AreaEstimator, Shape};
use pcp_core::pcp::{self, Diagnostics};
use pcp_core::{Domain, Vector};

use super::{diagnostics_line, Output};
use crate::config::ScenarioConfig;
use crate::report::Row;

/// Final-state errors: relative area error `area_rel` (inside particles
/// times `h^2`) and `area_rel_ramp` (linear Heaviside of width
/// `area_ramp h`), and SDF errors
/// `sdf_linf`, `sdf_l2` over the particles within `w/2` of the circle.
pub fn vortex(cfg: &ScenarioConfig) -> anyhow::Result<Output> {
    let v = &cfg.vortex;
    let shape = Shape::circle(v.center, v.radius);
    let unit: Domain<2> = Domain::open([0.0, 0.0], [1.0, 1.0]);
    let steps = (v.t_end / v.dt).round() as usize;
    let alpha = cfg.alpha.first().copied().unwrap_or(0.0);
    let name = cfg.scenario.name();
    let mut out = Output::default();
    for &h in &cfg.h {
        let t0 = Instant::now();
        let params = cfg.pcp.params(h, cfg.degree, cfg.pcp.bases[0]);
        let half = 0.5 * params.band_width;
        let mut x = levelset::perturbed_grid(h, alpha, &unit, cfg.seed)?;
        // the band and the enclosed interior
        x.retain(|p| shape.reference_sdf(p) <= half);
        let mut phi = levelset::reference_sdf(&shape, &x);
        let targets: Vec<usize> = (0..x.len()).collect();
        let mut totals = Diagnostics::default();
        for k in 0..steps {
            let t = k as f64 * v.dt;
            x = x.iter().map(|p| levelset::rk4_step(p, t, v.dt, &levelset::spiraling_vortex)).collect::<Vec<Vector<2>>>();
            let bounds = Domain::bounding(&x, h);
            let r = pcp::redistance(&x, &phi, &bounds, &params, &targets)?;
            phi = r.phi;
            accumulate(&mut totals, &r.diagnostics);
        }
        let sdf = levelset::reference_sdf(&shape, &x);
        let band: Vec<bool> = sdf.iter().map(|s| s.abs() <= half).collect();
        let err = levelset::error_report(&phi, &sdf, Some(&band))?;
        let cell = h * h;
        let area = levelset::enclosed_measure(&phi, cell, 1.0, AreaEstimator::Ramp { width: v.area_ramp * h });
        let area_rel = levelset::relative_error(area, shape.measure(2));
        let counted = levelset::enclosed_measure(&phi, cell, 1.0, AreaEstimator::SignCount);
        let count_rel = levelset::relative_error(counted, shape.measure(2));
        for (metric, value) in [("area_rel", count_rel), ("area_rel_ramp", area_rel), ("sdf_linf", err.linf), ("sdf_l2", err.l2)] {
            out.rows.push(Row::value(name, h, None, metric, value));
        }
        let secs = t0.elapsed().as_secs_f64();
        out.diagnostics.push(diagnostics_line(cfg, "minter", h, alpha, secs, &totals));
        out.timing.push((format!("h={h}"), secs));
    }
    Ok(out)
}

fn accumulate(total: &mut Diagnostics, d: &Diagnostics) {
    total.close_set += d.close_set;
    total.fits += d.fits;
    total.fit_failures += d.fit_failures;
    total.projection_failures += d.projection_failures;
    total.samples += d.samples;
    total.queries += d.queries;
    total.newton_soft_failures += d.newton_soft_failures;
    total.newton_hard_failures += d.newton_hard_failures;
    total.restarts += d.restarts;
    total.outside_queries += d.outside_queries;
    for (dst, src) in [(&mut total.projection_iterations, &d.projection_iterations), (&mut total.newton_iterations, &d.newton_iterations)] {
        if dst.len() < src.len() {
            dst.resize(src.len(), 0);
        }
        for (a, b) in dst.iter_mut().zip(src) {
            *a += b;
        }
    }
}
