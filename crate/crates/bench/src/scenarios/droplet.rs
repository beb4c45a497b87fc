//! Oscillating droplet: an ellipse (ellipsoid) of one fluid relaxing in
//! a periodic box of another, with PCP or colorfield surface tension.

use std::time::Instant;

use anyhow::bail;

use pcp_core::levelset::{self, Shape};
use pcp_core::pcp;
use pcp_core::sph::{FluidParams, PcpBackend, Simulation, SphState, SurfaceBackend};
use pcp_core::{Domain, Vector};

use super::{diagnostics_line, Output, SeriesRow, SnapshotRow};
use crate::config::ScenarioConfig;
use crate::report::Row;

/// Lattice of cell centres covering the periodic box.
pub fn box_lattice<const D: usize>(half: f64, per_axis: usize) -> (Vec<Vector<D>>, Domain<D>, f64) {
    let h = 2.0 * half / per_axis as f64;
    let n = per_axis.pow(D as u32);
    let pts = (0..n)
        .map(|k| {
            let mut r = k;
            core::array::from_fn(|_| {
                let i = r % per_axis;
                r /= per_axis;
                -half + (i as f64 + 0.5) * h
            })
        })
        .collect();
    (pts, Domain::periodic([-half; D], [half; D]), h)
}

/// Kinetic energy, curvature statistics, droplet volume and density
/// deviation along each run, plus late-time summaries:
/// `kappa_mean_late_<backend>`, `kappa_std_late_<backend>`,
/// `volume_drift_pcp`, `max_density_deviation_<backend>`,
/// `first_peak_time_<backend>`, `energy_decay_after_peak_<backend>` and
/// `kappa_equilibrium`.
pub fn droplet<const D: usize>(cfg: &ScenarioConfig) -> anyhow::Result<Output> {
    let d = &cfg.droplet;
    let a = &cfg.shape.axes;
    let shape = match D {
        2 => Shape::ellipse(a[0], a[1]),
        _ => Shape::ellipsoid(a[0], a[1], a[2]),
    };
    let o = shape.orientation();
    let (positions, domain, h) = box_lattice::<D>(d.half_box, d.per_axis);
    let fluid = FluidParams { rho0: d.rho0, c: d.sound_speed, gamma: d.gamma, eta: d.eta, tau: d.tau, eps: d.eps_factor * h, h };
    let phi0 = levelset::init_levelset(&shape, &positions);
    let color: Vec<f64> = phi0.iter().map(|p| if o * p < 0.0 { 1.0 } else { 0.0 }).collect();
    // radius of the circle (sphere) with the initial area (volume)
    let r_eq = if D == 2 { (a[0] * a[1]).sqrt() } else { (a[0] * a[1] * a[2]).cbrt() };
    let kappa_eq = 1.0 / r_eq;
    let steps = (d.t_end / d.dt).round() as usize;
    let late_from = ((1.0 - d.late_fraction) * d.t_end).max(0.0);
    let name = cfg.scenario.name();
    let mut out = Output::default();
    out.rows.push(Row::value(name, h, None, "kappa_equilibrium", kappa_eq));
    for backend_name in &d.backends {
        let t0 = Instant::now();
        let backend = match backend_name.as_str() {
            "pcp" => {
                let params = cfg.pcp.params(h, cfg.degree, cfg.pcp.bases[0]);
                let needed = pcp::skin_frequency(d.u_max, params.band_width, 2.0 * fluid.eps)?;
                if d.skin_frequency < needed {
                    bail!("skin frequency {} below the required {needed}", d.skin_frequency);
                }
                SurfaceBackend::Pcp(PcpBackend::with_frequency(params, d.skin_frequency, d.dt)?)
            }
            "colorfield" => SurfaceBackend::Colorfield,
            "none" => SurfaceBackend::None,
            other => bail!("unknown surface backend {other}"),
        };
        let state = SphState::at_rest(positions.clone(), color.clone(), phi0.clone(), &domain, fluid.rho0)?;
        let mut sim = Simulation::new(state, fluid, domain, backend, o);
        if matches!(backend, SurfaceBackend::Pcp(_)) {
            sim.redistance_all()?;
        }
        let mut volume0 = None;
        let (mut late_mean, mut late_std, mut late_n) = (0.0, 0.0, 0usize);
        let mut max_dev = 0.0f64;
        let mut energy: Vec<(f64, f64)> = Vec::new();
        for k in 0..=steps {
            if k > 0 {
                sim.step(d.dt)?;
            } else {
                sim.evaluate()?;
            }
            let dev = sim.state.densities.iter().map(|r| (r / fluid.rho0 - 1.0).abs()).fold(0.0f64, f64::max);
            if !dev.is_finite() {
                bail!("density diverged at t = {}", sim.time);
            }
            max_dev = max_dev.max(dev);
            if k % d.sample_every != 0 && k != steps {
                continue;
            }
            let (km, ks) = sim.curvature.stats().unwrap_or((f64::NAN, f64::NAN));
            let volume = if matches!(backend, SurfaceBackend::Pcp(_)) { sim.droplet_volume() } else { f64::NAN };
            volume0.get_or_insert(volume);
            let ke = sim.state.kinetic_energy();
            energy.push((sim.time, ke));
            if sim.time >= late_from - 1e-12 && km.is_finite() {
                late_mean += km;
                late_std += ks;
                late_n += 1;
            }
            out.series.push(SeriesRow {
                run: backend_name.clone(),
                t: sim.time,
                kinetic_energy: ke,
                kappa_mean: km,
                kappa_std: ks,
                volume,
                max_density_deviation: dev,
            });
        }
        let n = late_n.max(1) as f64;
        let row = |m: &str, v: f64| Row::value(name, h, None, &format!("{m}_{backend_name}"), v);
        out.rows.push(row("kappa_mean_late", if late_n > 0 { late_mean / n } else { f64::NAN }));
        out.rows.push(row("kappa_std_late", if late_n > 0 { late_std / n } else { f64::NAN }));
        out.rows.push(row("max_density_deviation", max_dev));
        let (peak_t, peak_e, after) = first_peak(&energy);
        out.rows.push(row("first_peak_time", peak_t));
        out.rows.push(row("energy_decay_after_peak", if peak_e > 0.0 { after / peak_e } else { f64::NAN }));
        if let (SurfaceBackend::Pcp(_), Some(v0)) = (backend, volume0) {
            let v1 = sim.droplet_volume();
            out.rows.push(Row::value(name, h, None, "volume_drift_pcp", (v1 - v0) / v0));
        }
        if d.snapshots {
            for (i, x) in sim.state.positions.iter().enumerate() {
                out.snapshots.push(SnapshotRow {
                    run: backend_name.clone(),
                    x: x[0],
                    y: x[1],
                    z: if D == 3 { x[D - 1] } else { 0.0 },
                    phi: sim.state.phi[i],
                    color: sim.state.color[i],
                });
            }
        }
        let secs = t0.elapsed().as_secs_f64();
        out.diagnostics.push(diagnostics_line(cfg, backend_name, h, 0.0, secs, &sim.diagnostics));
        out.timing.push((backend_name.clone(), secs));
    }
    Ok(out)
}

/// Time and energy of the first local maximum of the kinetic energy, and
/// the largest energy seen in the last quarter of the run.
fn first_peak(series: &[(f64, f64)]) -> (f64, f64, f64) {
    let peak = (1..series.len().saturating_sub(1)).find(|&i| series[i].1 >= series[i - 1].1 && series[i].1 > series[i + 1].1);
    let Some(p) = peak else {
        return (f64::NAN, 0.0, f64::NAN);
    };
    let tail_from = series.len() - series.len() / 4;
    let after = series[tail_from.max(p + 1)..].iter().map(|e| e.1).fold(0.0f64, f64::max);
    (series[p].0, series[p].1, after)
}
