//! Scenario runners.

use std::time::Instant;

use anyhow::Context;
use serde::Serialize;

use pcp_core::levelset::{self, Shape, SurfaceReference};
use pcp_core::pcp::{self, Diagnostics, PcpParams, Redistanced};
use pcp_core::{Domain, Vector};

use crate::config::{Scenario, ScenarioConfig};
use crate::report::{self, Row};

pub mod droplet;
pub mod remesh;
pub mod shapes;
pub mod vortex;

/// One line of a time series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesRow {
    pub run: String,
    pub t: f64,
    pub kinetic_energy: f64,
    pub kappa_mean: f64,
    pub kappa_std: f64,
    pub volume: f64,
    pub max_density_deviation: f64,
}

/// Per-particle snapshot line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnapshotRow {
    pub run: String,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub phi: f64,
    pub color: f64,
}

/// Diagnostics of one redistancing pass, tagged with its run.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsLine {
    pub scenario: String,
    pub run: String,
    pub h: f64,
    pub alpha: f64,
    pub seconds: f64,
    pub diagnostics: DiagnosticsRecord,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsRecord {
    pub close_set: usize,
    pub fits: usize,
    pub fit_failures: usize,
    pub projection_failures: usize,
    pub samples: usize,
    pub queries: usize,
    pub projection_iterations: Vec<usize>,
    pub newton_iterations: Vec<usize>,
    pub newton_soft_failures: usize,
    pub newton_hard_failures: usize,
    pub restarts: usize,
    pub outside_queries: usize,
}

impl From<&Diagnostics> for DiagnosticsRecord {
    fn from(d: &Diagnostics) -> Self {
        Self {
            close_set: d.close_set,
            fits: d.fits,
            fit_failures: d.fit_failures,
            projection_failures: d.projection_failures,
            samples: d.samples,
            queries: d.queries,
            projection_iterations: d.projection_iterations.clone(),
            newton_iterations: d.newton_iterations.clone(),
            newton_soft_failures: d.newton_soft_failures,
            newton_hard_failures: d.newton_hard_failures,
            restarts: d.restarts,
            outside_queries: d.outside_queries,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Output {
    pub rows: Vec<Row>,
    pub series: Vec<SeriesRow>,
    pub diagnostics: Vec<DiagnosticsLine>,
    pub snapshots: Vec<SnapshotRow>,
    /// Wall time per run.
    pub timing: Vec<(String, f64)>,
}

pub fn run_scenario(cfg: &ScenarioConfig) -> anyhow::Result<Output> {
    cfg.validate()?;
    let mut out = match cfg.scenario {
        Scenario::Ellipse2d => shapes::ellipse2d(cfg),
        Scenario::Ellipsoid3d => shapes::ellipsoid3d(cfg),
        Scenario::BasisRobustness => shapes::basis_robustness(cfg),
        Scenario::Nonsmooth => shapes::nonsmooth(cfg),
        Scenario::RemeshCompare => remesh::remesh_compare(cfg),
        Scenario::Vortex => vortex::vortex(cfg),
        Scenario::Droplet2d => droplet::droplet::<2>(cfg),
        Scenario::Droplet3d => droplet::droplet::<3>(cfg),
    }
    .with_context(|| format!("scenario {}", cfg.scenario.name()))?;
    out.rows = report::with_orders(out.rows);
    Ok(out)
}

/// Result of redistancing a static shape on a perturbed grid.
pub struct StaticRun<const D: usize> {
    pub positions: Vec<Vector<D>>,
    pub targets: Vec<usize>,
    pub references: Vec<SurfaceReference<D>>,
    pub result: Redistanced<D>,
    pub seconds: f64,
}

/// Perturbed grid over `box`, cut to the points that can influence the
/// band `|sdf| <= band`, redistanced at the band points with
/// `x_0 >= x_min`.
pub fn static_run<const D: usize>(
    shape: &Shape,
    h: f64,
    alpha: f64,
    seed: u64,
    domain: &Domain<D>,
    band: f64,
    x_min: f64,
    params: &PcpParams,
) -> anyhow::Result<StaticRun<D>> {
    let t0 = Instant::now();
    let mut pts = levelset::perturbed_grid(h, alpha, domain, seed)?;
    let keep = band + params.reach() + 2.0 * h;
    pts.retain(|p| shape.reference_sdf(p).abs() <= keep);
    let phi = levelset::init_levelset(shape, &pts);
    let references: Vec<SurfaceReference<D>> = pts.iter().map(|p| shape.reference(p)).collect();
    let targets: Vec<usize> = (0..pts.len()).filter(|&i| references[i].sdf.abs() <= band && pts[i][0] >= x_min).collect();
    let bounds = Domain::bounding(&pts, h);
    let result = pcp::redistance(&pts, &phi, &bounds, params, &targets)?;
    Ok(StaticRun { positions: pts, targets, references, result, seconds: t0.elapsed().as_secs_f64() })
}

/// Maximum and RMS of `|phi - orientation * sdf|` over the targets.
pub fn sdf_errors<const D: usize>(run: &StaticRun<D>, orientation: f64) -> (f64, f64) {
    let mut linf = 0.0f64;
    let mut sq = 0.0;
    for &i in &run.targets {
        let e = (run.result.phi[i] - orientation * run.references[i].sdf).abs();
        linf = linf.max(e);
        sq += e * e;
    }
    (linf, (sq / run.targets.len().max(1) as f64).sqrt())
}

pub fn diagnostics_line(cfg: &ScenarioConfig, run: &str, h: f64, alpha: f64, seconds: f64, d: &Diagnostics) -> DiagnosticsLine {
    DiagnosticsLine { scenario: cfg.scenario.name().into(), run: run.into(), h, alpha, seconds, diagnostics: d.into() }
}

pub fn write_series(rows: &[SeriesRow], path: &std::path::Path) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_snapshots(rows: &[SnapshotRow], path: &std::path::Path) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
