//! Particle-to-mesh interpolation of the ellipse level set, alone and
//! followed by closest-point redistancing on the mesh.

use std::time::Instant;

use pcp_core::levelset::{self, Shape};
use pcp_core::remesh::{self, KernelKind, KernelSpec, Mesh};
use pcp_core::{Domain, Vector};

use super::{diagnostics_line, Output};
use crate::config::ScenarioConfig;
use crate::report::Row;

#[derive(Clone, Copy)]
enum Scheme {
    Basic,
    Renormalized,
    Volume(KernelKind),
}

impl Scheme {
    fn name(self) -> &'static str {
        match self {
            Scheme::Basic => "lambda44",
            Scheme::Renormalized => "lambda44_renorm",
            Scheme::Volume(KernelKind::WendlandC2) => "wendland_renorm",
            Scheme::Volume(_) => "gaussian_renorm",
        }
    }
}

/// Errors against the ellipse function at the band nodes after
/// interpolation (`p2m_*`) and after redistancing (`redist_*`).
pub fn remesh_compare(cfg: &ScenarioConfig) -> anyhow::Result<Output> {
    anyhow::ensure!(cfg.shape.axes.len() >= 2, "ellipse needs two semi-axes");
    let shape = Shape::ellipse(cfg.shape.axes[0], cfg.shape.axes[1]);
    let s = &cfg.shape;
    let domain: Domain<2> = Domain::periodic([s.box_lo[0], s.box_lo[1]], [s.box_hi[0], s.box_hi[1]]);

    let o = shape.orientation();
    let name = cfg.scenario.name();
    let alpha = cfg.alpha.first().copied().unwrap_or(0.0);
    let mut out = Output::default();
    for &h in &cfg.h {
        let eps_factor = cfg.remesh.eps_factor(h)?;
        let params = cfg.pcp.params(h, cfg.degree, cfg.pcp.bases[0]);
        let band = s.error_band(&params);
        let mesh = Mesh::new(&domain, h)?;
        // band nodes and their regression neighbourhoods
        let reach = band + params.reach() + 2.0 * h;
        let nodes: Vec<Vector<2>> = mesh.nodes().into_iter().filter(|x| shape.reference_sdf(x).abs() <= reach).collect();
        let node_sdf: Vec<f64> = nodes.iter().map(|x| shape.reference_sdf(x)).collect();
        let exact = levelset::init_levelset(&shape, &nodes);
        let targets: Vec<usize> = (0..nodes.len()).filter(|&i| node_sdf[i].abs() <= band).collect();
        let kernel_reach = h * (3.0 * 2f64.sqrt()).max(3.0 * eps_factor);
        let mut particles = levelset::perturbed_grid(h, alpha, &domain, cfg.seed)?;
        // particles within two kernel supports of the nodes
        particles.retain(|p| shape.reference_sdf(p).abs() <= reach + 2.0 * kernel_reach);
        let phi = levelset::init_levelset(&shape, &particles);
        for scheme in [Scheme::Basic, Scheme::Renormalized, Scheme::Volume(KernelKind::WendlandC2), Scheme::Volume(KernelKind::Gaussian)] {
            let t0 = Instant::now();
            let values: Vec<Option<f64>> = match scheme {
                Scheme::Basic => remesh::p2m_basic(&particles, &phi, &nodes, h, &domain)?.into_iter().map(Some).collect(),
                Scheme::Renormalized => remesh::p2m_renormalized(&particles, &phi, &nodes, h, &domain)?,
                Scheme::Volume(kind) => {
                    let kernel = KernelSpec::new(kind, eps_factor * h);
                    let (vol, _) = remesh::particle_volumes(&particles, &kernel, &domain)?;
                    remesh::p2m_volume_renormalized(&particles, &phi, &vol, &nodes, &kernel, &domain)?
                }
            };
            let missing = targets.iter().filter(|&&i| values[i].is_none()).count();
            let p2m = targets.iter().filter_map(|&i| values[i].map(|v| (v - exact[i]).abs())).fold(0.0f64, f64::max);
            let filled: Vec<f64> = values.iter().map(|v| v.unwrap_or(0.0)).collect();
            let red = remesh::remesh_then_redistance(&nodes, &filled, &domain, &params, &targets)?;
            let redist = targets.iter().map(|&i| (red.phi[i] - o * node_sdf[i]).abs()).fold(0.0f64, f64::max);
            let secs = t0.elapsed().as_secs_f64();
            out.rows.push(Row::value(name, h, Some(alpha), &format!("p2m_{}", scheme.name()), p2m));
            out.rows.push(Row::value(name, h, Some(alpha), &format!("redist_{}", scheme.name()), redist));
            if missing > 0 {
                out.rows.push(Row::value(name, h, Some(alpha), &format!("missing_{}", scheme.name()), missing as f64));
            }
            out.diagnostics.push(diagnostics_line(cfg, scheme.name(), h, alpha, secs, &red.diagnostics));
            out.timing.push((format!("{} h={h}", scheme.name()), secs));
        }
    }
    Ok(out)
}
