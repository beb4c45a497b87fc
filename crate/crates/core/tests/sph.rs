use std::f64::consts::PI;

use pcp_core::geom;
use pcp_core::levelset::{self, Shape};
use pcp_core::pcp::{self, PcpParams};
use pcp_core::sph::{self, FluidParams, PcpBackend, Simulation, SphState, SurfaceBackend};
use pcp_core::{Domain, Vector};
use proptest::prelude::*;

fn lattice(n: usize) -> (Vec<Vector<2>>, Domain<2>, f64) {
    let h = 1.0 / n as f64;
    let pts = (0..n * n).map(|k| [((k % n) as f64 + 0.5) * h, ((k / n) as f64 + 0.5) * h]).collect();
    (pts, Domain::periodic([0.0, 0.0], [1.0, 1.0]), h)
}

/// Composite Simpson rule on `[a, b]` with `n` (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let dx = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|k| f(a + k as f64 * dx) * if k % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + inner) * dx / 3.0
}

#[test]
fn kernels_are_normalized() {
    for eps in [0.01, 0.3, 2.0] {
        let two = simpson(|r| sph::wendland_c2::<2>(r, eps) * 2.0 * PI * r, 0.0, 2.0 * eps, 2000);
        let three = simpson(|r| sph::wendland_c2::<3>(r, eps) * 4.0 * PI * r * r, 0.0, 2.0 * eps, 2000);
        let one = simpson(|p| sph::wendland_c2_1d(p, eps), -2.0 * eps, 2.0 * eps, 4000);
        for v in [two, three, one] {
            assert!((v - 1.0).abs() < 1e-6, "eps {eps}: {v}");
        }
    }
}

#[test]
fn kernels_vanish_outside_support() {
    let eps = 0.2;
    for r in [0.4, 0.41, 3.0] {
        assert_eq!(sph::wendland_c2::<2>(r, eps), 0.0);
        assert_eq!(sph::wendland_c2::<3>(r, eps), 0.0);
        assert_eq!(sph::wendland_c2_1d(r, eps), 0.0);
        assert_eq!(sph::wendland_c2_1d(-r, eps), 0.0);
    }
}

#[test]
fn single_particle_density() {
    let d = Domain::periodic([0.0, 0.0], [1.0, 1.0]);
    let eps = 0.05;
    let index = sph::kernel_index(&[[0.3, 0.4]], &d, eps).unwrap();
    let (rho, vol) = sph::density_summation(&[2.5], &index, eps).unwrap();
    assert_eq!(rho[0], 2.5 * sph::wendland_c2::<2>(0.0, eps));
    assert_eq!(vol[0], 1.0 / sph::wendland_c2::<2>(0.0, eps));
}

#[test]
fn cole_equation_at_one_percent_compression() {
    let p = FluidParams::droplet(1.0 / 32.0);
    let expect = 1e4 / 7.0 * (1.01f64.powi(7) - 1.0);
    assert!((sph::cole_eos(1.01, &p).unwrap() - expect).abs() < 1e-9 * expect);
}

#[test]
fn acoustic_bound_is_linear_in_eps() {
    let p = FluidParams { eta: 0.0, tau: 0.0, ..FluidParams::droplet(1.0 / 64.0) };
    let q = FluidParams { eps: 2.0 * p.eps, ..p };
    assert!((sph::cfl_timestep(&q, 3.0) / sph::cfl_timestep(&p, 3.0) - 2.0).abs() < 1e-12);
    assert!(5e-5 <= sph::cfl_timestep(&FluidParams::droplet(1.0 / 128.0), 3.0));
}

fn random_state(pts: &[Vector<2>], vel: &[Vector<2>], rho: &[f64], d: &Domain<2>) -> SphState<2> {
    let n = pts.len();
    let mut s = SphState::at_rest(pts.to_vec(), vec![0.0; n], vec![1.0; n], d, 1.0).unwrap();
    s.velocities = vel.to_vec();
    s.densities = rho.to_vec();
    let p = FluidParams::droplet(0.05);
    s.pressures = rho.iter().map(|r| sph::cole_eos(*r, &p).unwrap()).collect();
    s.volumes = rho.iter().zip(&s.masses).map(|(r, m)| m / r).collect();
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pair_forces_conserve_momentum(
        pts in prop::collection::vec(prop::array::uniform2(0.0..1.0f64), 2..120),
        seed in prop::collection::vec((prop::array::uniform2(-1.0..1.0f64), 0.95..1.05f64), 120),
    ) {
        let d = Domain::periodic([0.0, 0.0], [1.0, 1.0]);
        let n = pts.len();
        let vel: Vec<Vector<2>> = seed[..n].iter().map(|s| s.0).collect();
        let rho: Vec<f64> = seed[..n].iter().map(|s| s.1).collect();
        let state = random_state(&pts, &vel, &rho, &d);
        let p = FluidParams::droplet(0.05);
        let index = sph::kernel_index(&state.positions, &d, p.eps).unwrap();
        let acc = sph::momentum_rhs(&state, &index, &p, None).unwrap();
        let mut total = [0.0; 2];
        let mut scale = 0.0f64;
        for (m, a) in state.masses.iter().zip(&acc) {
            total = geom::axpy(&total, *m, a);
            scale = scale.max(m * geom::norm(a));
        }
        prop_assert!(geom::norm(&total) <= 1e-12 * scale.max(1e-300) * n as f64, "{total:?} vs {scale}");
    }

    #[test]
    fn density_is_translation_invariant(
        shift in prop::array::uniform2(-0.5..0.5f64),
    ) {
        let (pts, d, h) = lattice(16);
        let eps = 2.0 * h;
        let moved: Vec<Vector<2>> = pts.iter().map(|p| d.wrap(&geom::add(p, &shift))).collect();
        let m = vec![h * h; pts.len()];
        let (a, _) = sph::density_summation(&m, &sph::kernel_index(&pts, &d, eps).unwrap(), eps).unwrap();
        let (b, _) = sph::density_summation(&m, &sph::kernel_index(&moved, &d, eps).unwrap(), eps).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn two_particles_exchange_equal_and_opposite_forces() {
    let d = Domain::periodic([0.0, 0.0], [1.0, 1.0]);
    let state = random_state(&[[0.5, 0.5], [0.53, 0.51]], &[[0.1, 0.0], [-0.2, 0.3]], &[1.01, 0.99], &d);
    let p = FluidParams::droplet(0.05);
    let index = sph::kernel_index(&state.positions, &d, p.eps).unwrap();
    let acc = sph::momentum_rhs(&state, &index, &p, None).unwrap();
    let total = geom::add(&geom::scale(&acc[0], state.masses[0]), &geom::scale(&acc[1], state.masses[1]));
    assert!(geom::norm(&total) < 1e-12 * state.masses[0] * geom::norm(&acc[0]));
    assert!(geom::norm(&acc[0]) > 0.0);
}

#[test]
fn steps_conserve_momentum_and_mass() {
    let (mut pts, d, h) = lattice(24);
    for (k, p) in pts.iter_mut().enumerate() {
        p[0] += 0.2 * h * ((k as f64 * 0.7).sin());
        p[1] += 0.2 * h * ((k as f64 * 1.3).cos());
    }
    let n = pts.len();
    let mut state = SphState::at_rest(pts, vec![0.0; n], vec![1.0; n], &d, 1.0).unwrap();
    state.velocities = (0..n).map(|k| [(k as f64 * 0.37).sin(), (k as f64 * 0.11).cos()]).collect();
    let params = FluidParams { eps: 2.0 * h, ..FluidParams::droplet(h) };
    let masses = state.masses.clone();
    let mut sim = Simulation::new(state, params, d, SurfaceBackend::None, 1.0);
    let p0 = sim.state.momentum();
    for _ in 0..5 {
        sim.step(1e-4).unwrap();
        let p = sim.state.momentum();
        assert!(geom::dist(&p, &p0) < 1e-10, "{p:?} vs {p0:?}");
    }
    assert_eq!(sim.state.masses, masses);
    assert!(sim.state.densities.iter().all(|r| *r > 0.0));
}

#[test]
fn uniform_motion_is_pure_translation() {
    let (pts, d, h) = lattice(20);
    let n = pts.len();
    let mut state = SphState::at_rest(pts.clone(), vec![0.0; n], vec![1.0; n], &d, 1.0).unwrap();
    let u = [0.3, -0.2];
    state.velocities = vec![u; n];
    let params = FluidParams { eps: 2.0 * h, ..FluidParams::droplet(h) };
    let mut sim = Simulation::new(state, params, d, SurfaceBackend::None, 1.0);
    let dt = 1e-3;
    sim.step(dt).unwrap();
    for (x, x0) in sim.state.positions.iter().zip(&pts) {
        let moved = d.wrap(&geom::axpy(x0, dt, &u));
        assert!(d.distance(x, &moved) < 1e-12);
    }
    assert!(sim.state.velocities.iter().all(|v| geom::dist(v, &u) < 1e-9));
}

#[test]
fn constant_acceleration_step_is_second_order() {
    let (pts, d, h) = lattice(20);
    let n = pts.len();
    let u = [0.3, -0.2];
    let g = [1.5, 4.0];
    let dt = 1e-3;
    let mut state = SphState::at_rest(pts.clone(), vec![0.0; n], vec![1.0; n], &d, 1.0).unwrap();
    state.velocities = vec![u; n];
    let params = FluidParams { eps: 2.0 * h, ..FluidParams::droplet(h) };
    let mut sim = Simulation::new(state, params, d, SurfaceBackend::None, 1.0);
    sim.body_force = g;
    sim.step(dt).unwrap();
    for (x, x0) in sim.state.positions.iter().zip(&pts) {
        let expect = d.wrap(&geom::axpy(&geom::axpy(x0, dt, &u), 0.5 * dt * dt, &g));
        assert!(d.distance(x, &expect) < 1e-12);
    }
    for v in &sim.state.velocities {
        assert!(geom::dist(v, &geom::axpy(&u, dt, &g)) < 1e-9);
    }
}

/// Viscous acceleration of `u = (sin 2 pi y, 0)` against `eta Laplace u / rho`.
fn shear_error(n: usize, eta: f64) -> (f64, f64) {
    let (pts, d, h) = lattice(n);
    let m = pts.len();
    let mut state = SphState::at_rest(pts, vec![0.0; m], vec![1.0; m], &d, 1.0).unwrap();
    state.velocities = state.positions.iter().map(|x| [(2.0 * PI * x[1]).sin(), 0.0]).collect();
    let params = FluidParams { eta, eps: 3.0 * h, ..FluidParams::droplet(h) };
    let index = sph::kernel_index(&state.positions, &d, params.eps).unwrap();
    let (rho, vol) = sph::density_summation(&state.masses, &index, params.eps).unwrap();
    state.volumes = vol;
    state.densities = rho;
    state.pressures = vec![0.0; m];
    let acc = sph::momentum_rhs(&state, &index, &params, None).unwrap();
    let (mut err, mut peak, mut agree) = (0.0f64, 0.0f64, 0.0);
    for (i, a) in acc.iter().enumerate() {
        let exact = -eta * 4.0 * PI * PI * (2.0 * PI * state.positions[i][1]).sin() / state.densities[i];
        err = err.max((a[0] - exact).abs());
        peak = peak.max(exact.abs());
        agree += a[0] * exact;
    }
    assert!(agree > 0.0);
    (err / peak, acc.iter().map(|a| a[0].abs()).fold(0.0, f64::max))
}

#[test]
fn viscous_term_follows_the_laplacian() {
    let (coarse, _) = shear_error(32, 0.5);
    let (fine, strong) = (shear_error(64, 0.5).0, shear_error(64, 0.5).1);
    assert!(fine < 0.05, "relative error {fine}");
    assert!(fine < coarse, "{coarse} -> {fine}");
    let weak = shear_error(64, 1e-3).1;
    assert!((weak / strong - 2e-3).abs() < 1e-9);
}

#[test]
fn circle_surface_force_has_no_net_resultant() {
    let n = 64;
    let (pts, d, h) = lattice(n);
    let shape = Shape::circle([0.5, 0.5], 0.25);
    let phi = levelset::reference_sdf(&shape, &pts);
    let params = FluidParams::droplet(h);
    let pcp_params = PcpParams { cutoff: 2.8 * h, band_width: 15.0 * h, tolerance: 1e-12, ..PcpParams::new(h) };
    let band: Vec<usize> = (0..pts.len()).filter(|&i| phi[i].abs() <= 7.5 * h).collect();
    let out = pcp::redistance(&pts, &phi, &d, &pcp_params, &band).unwrap();
    let rho = vec![1.0; pts.len()];
    let f = sph::csf_force_pcp(&rho, &out.phi, &out.geometry, &params).unwrap();
    let mut net = [0.0; 2];
    let mut peak = 0.0f64;
    for v in &f {
        net = geom::add(&net, v);
        peak = peak.max(geom::norm(v));
    }
    assert!(peak > 0.0);
    assert!(geom::norm(&net) < 1e-6 * peak, "net {net:?}, peak {peak}");
}

fn colorfield_for(n: usize, color: impl Fn(&Vector<2>) -> f64) -> (Vec<Vector<2>>, sph::Colorfield<2>, FluidParams) {
    let (pts, d, h) = lattice(n);
    let params = FluidParams::droplet(h);
    let c: Vec<f64> = pts.iter().map(&color).collect();
    let index = sph::kernel_index(&pts, &d, params.eps).unwrap();
    let (rho, vol) = sph::density_summation(&vec![h * h; pts.len()], &index, params.eps).unwrap();
    let cf = sph::colorfield_pipeline(&c, &vol, &rho, &index, &params).unwrap();
    (pts, cf, params)
}

#[test]
fn colorfield_flat_interface() {
    let n = 64;
    let h = 1.0 / n as f64;
    let (pts, cf, params) = colorfield_for(n, |x| if (0.25..0.75).contains(&x[1]) { 1.0 } else { 0.0 });
    let mut centre = 0;
    for i in (0..pts.len()).filter(|&i| cf.interface[i]) {
        assert!(cf.normals[i][0].abs() < 1e-2);
        assert!((cf.normals[i][1].abs() - 1.0).abs() < 1e-2);
        if (pts[i][1] - 0.25).abs() < h || (pts[i][1] - 0.75).abs() < h {
            assert!(cf.curvature[i].abs() < 0.5 / params.eps);
            centre += 1;
        }
    }
    assert!(centre > 0);
}

#[test]
fn colorfield_circle_curvature() {
    let r = 0.25;
    let (_, cf, _) = colorfield_for(64, |x| if geom::dist(x, &[0.5, 0.5]) < r { 1.0 } else { 0.0 });
    let values: Vec<f64> = (0..cf.interface.len()).filter(|&i| cf.interface[i]).map(|i| -cf.curvature[i]).collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    assert!((mean * r - 1.0).abs() < 0.2, "mean curvature {mean}, expected {}", 1.0 / r);
}

#[test]
fn pcp_curvature_spread_is_below_colorfield_at_rest() {
    let n = 32;
    let (pts, d, h) = lattice(n);
    let shape = Shape::circle([0.5, 0.5], 0.25);
    let phi = levelset::reference_sdf(&shape, &pts);
    let color: Vec<f64> = phi.iter().map(|p| if *p < 0.0 { 1.0 } else { 0.0 }).collect();
    let params = FluidParams::droplet(h);
    let pcp_params = PcpParams { cutoff: 2.8 * h, band_width: 15.0 * h, tolerance: 1e-12, skin_width: 45.0 * h, ..PcpParams::new(h) };
    let std_of = |backend| {
        let state = SphState::at_rest(pts.clone(), color.clone(), phi.clone(), &d, 1.0).unwrap();
        let mut sim = Simulation::new(state, params, d, backend, 1.0);
        if matches!(backend, SurfaceBackend::Pcp(_)) {
            sim.redistance_all().unwrap();
        }
        sim.evaluate().unwrap();
        let (mean, std) = sim.curvature.stats().unwrap();
        assert!((mean * 0.25 - 1.0).abs() < 0.2, "{backend:?}: mean {mean}");
        std
    };
    let pcp_std = std_of(SurfaceBackend::Pcp(PcpBackend::with_frequency(pcp_params, 100.0, 2e-4).unwrap()));
    let cf_std = std_of(SurfaceBackend::Colorfield);
    assert!(pcp_std < cf_std, "{pcp_std} vs {cf_std}");
}
