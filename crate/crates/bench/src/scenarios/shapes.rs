//! Static shapes redistanced once on perturbed grids.

use pcp_core::geom;
use pcp_core::levelset::Shape;
use pcp_core::{Domain, Error};

use super::{diagnostics_line, sdf_errors, static_run, Output};
use crate::config::ScenarioConfig;
use crate::report::Row;

fn box_domain<const D: usize>(cfg: &ScenarioConfig) -> anyhow::Result<Domain<D>> {
    let s = &cfg.shape;
    anyhow::ensure!(s.box_lo.len() >= D && s.box_hi.len() >= D, "box corners need {D} coordinates");
    Ok(Domain::open(core::array::from_fn(|i| s.box_lo[i]), core::array::from_fn(|i| s.box_hi[i])))
}

fn ellipse(cfg: &ScenarioConfig) -> anyhow::Result<Shape> {
    anyhow::ensure!(cfg.shape.axes.len() >= 2, "ellipse needs two semi-axes");
    Ok(Shape::ellipse(cfg.shape.axes[0], cfg.shape.axes[1]))
}

fn ellipsoid(cfg: &ScenarioConfig) -> anyhow::Result<Shape> {
    let a = &cfg.shape.axes;
    anyhow::ensure!(a.len() >= 3, "ellipsoid needs three semi-axes");
    Ok(Shape::ellipsoid(a[0], a[1], a[2]))
}

/// SDF errors of one static shape per resolution and shift amplitude.
fn sdf_sweep<const D: usize>(cfg: &ScenarioConfig, shape: &Shape, tag: &str, out: &mut Output) -> anyhow::Result<()> {
    let domain = box_domain::<D>(cfg)?;
    let orientation = shape.orientation();
    for &alpha in &cfg.alpha {
        for &h in &cfg.h {
            for &basis in &cfg.pcp.bases {
                let params = cfg.pcp.params(h, cfg.degree, basis);
                let run = static_run(shape, h, alpha, cfg.seed, &domain, cfg.shape.error_band(&params), cfg.shape.target_x_min, &params)?;
                let (linf, l2) = sdf_errors(&run, orientation);
                let name = cfg.scenario.name();
                let suffix = if cfg.pcp.bases.len() > 1 { format!("_{}", basis.name()) } else { String::new() };
                out.rows.push(Row::value(name, h, Some(alpha), &format!("{tag}sdf_linf{suffix}"), linf));
                out.rows.push(Row::value(name, h, Some(alpha), &format!("{tag}sdf_l2{suffix}"), l2));
                let label = format!("{tag}{}", basis.name());
                out.diagnostics.push(diagnostics_line(cfg, &label, h, alpha, run.seconds, &run.result.diagnostics));
                out.timing.push((format!("{label} h={h} alpha={alpha}"), run.seconds));
            }
        }
    }
    Ok(())
}

pub fn ellipse2d(cfg: &ScenarioConfig) -> anyhow::Result<Output> {
    let mut out = Output::default();
    sdf_sweep::<2>(cfg, &ellipse(cfg)?, "", &mut out)?;
    Ok(out)
}

/// SDF, closest-point, normal and curvature errors on the ellipsoid.
pub fn ellipsoid3d(cfg: &ScenarioConfig) -> anyhow::Result<Output> {
    let shape = ellipsoid(cfg)?;
    let domain = box_domain::<3>(cfg)?;
    let o = shape.orientation();
    let mut out = Output::default();
    let name = cfg.scenario.name();
    for &alpha in &cfg.alpha {
        for &h in &cfg.h {
            let params = cfg.pcp.params(h, cfg.degree, cfg.pcp.bases[0]);
            let run = static_run(&shape, h, alpha, cfg.seed, &domain, cfg.shape.error_band(&params), cfg.shape.target_x_min, &params)?;
            let (sdf, _) = sdf_errors(&run, o);
            let (mut cp, mut normal, mut kappa, mut missing) = (0.0f64, 0.0f64, 0.0f64, 0usize);
            for &i in &run.targets {
                let r = &run.references[i];
                let Some(g) = run.result.geometry[i] else {
                    missing += 1;
                    continue;
                };
                cp = cp.max(geom::dist(&g.cp, &r.closest_point));
                normal = normal.max(geom::dist(&g.normal, &geom::scale(&r.normal, o)));
                kappa = kappa.max((g.curvature - o * r.curvature).abs());
            }
            for (metric, v) in [("sdf_linf", sdf), ("cp_linf", cp), ("normal_linf", normal), ("curvature_linf", kappa), ("missing_geometry", missing as f64)] {
                out.rows.push(Row::value(name, h, Some(alpha), metric, v));
            }
            out.diagnostics.push(diagnostics_line(cfg, "minter", h, alpha, run.seconds, &run.result.diagnostics));
            out.timing.push((format!("h={h} alpha={alpha}"), run.seconds));
        }
    }
    Ok(out)
}

/// Maximum SDF error on a 3D ellipsoid patch for each basis and shift
/// amplitude. A basis whose fits are all rejected reports `NaN`.
pub fn basis_robustness(cfg: &ScenarioConfig) -> anyhow::Result<Output> {
    let shape = ellipsoid(cfg)?;
    let domain = box_domain::<3>(cfg)?;
    let mut out = Output::default();
    let name = cfg.scenario.name();
    for &basis in &cfg.pcp.bases {
        for &alpha in &cfg.alpha {
            for &h in &cfg.h {
                let params = cfg.pcp.params(h, cfg.degree, basis);
                let metric = format!("sdf_linf_{}", basis.name());
                match static_run(&shape, h, alpha, cfg.seed, &domain, cfg.shape.error_band(&params), cfg.shape.target_x_min, &params) {
                    Ok(run) => {
                        let (linf, _) = sdf_errors(&run, shape.orientation());
                        out.rows.push(Row::value(name, h, Some(alpha), &metric, linf));
                        out.diagnostics.push(diagnostics_line(cfg, basis.name(), h, alpha, run.seconds, &run.result.diagnostics));
                        out.timing.push((format!("{} h={h} alpha={alpha}", basis.name()), run.seconds));
                    }
                    Err(e) if matches!(e.downcast_ref::<Error>(), Some(Error::NoSamples)) => {
                        out.rows.push(Row::value(name, h, Some(alpha), &metric, f64::NAN));
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(out)
}

/// Rounded rectangle and square, both initialised with their exact SDF.
pub fn nonsmooth(cfg: &ScenarioConfig) -> anyhow::Result<Output> {
    let s = &cfg.shape;
    anyhow::ensure!(s.rect_half_extents.len() >= 2, "rectangle needs two half extents");
    let rect = Shape::RoundedRectangle {
        center: [0.0; 2],
        half_extents: [s.rect_half_extents[0], s.rect_half_extents[1]],
        corner_radius: s.corner_radius,
    };
    let square = Shape::Square { center: [0.0; 2], half_side: s.square_half_side };
    let mut out = Output::default();
    sdf_sweep::<2>(cfg, &rect, "rounded_", &mut out)?;
    sdf_sweep::<2>(cfg, &square, "square_", &mut out)?;
    Ok(out)
}
