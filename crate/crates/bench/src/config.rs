//! Scenario configuration. Defaults depend on the scenario; a TOML file
//! overrides any subset of fields.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use pcp_core::pcp::PcpParams;
use pcp_core::polyreg::BasisKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Scenario {
    Ellipse2d,
    Ellipsoid3d,
    BasisRobustness,
    RemeshCompare,
    Nonsmooth,
    Vortex,
    Droplet2d,
    Droplet3d,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Ellipse2d => "ellipse2d",
            Scenario::Ellipsoid3d => "ellipsoid3d",
            Scenario::BasisRobustness => "basis_robustness",
            Scenario::RemeshCompare => "remesh_compare",
            Scenario::Nonsmooth => "nonsmooth",
            Scenario::Vortex => "vortex",
            Scenario::Droplet2d => "droplet2d",
            Scenario::Droplet3d => "droplet3d",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Minter,
    Monomial,
}

impl Basis {
    pub fn kind(self) -> BasisKind {
        match self {
            Basis::Minter => BasisKind::NewtonLagrange,
            Basis::Monomial => BasisKind::Monomial,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Basis::Minter => "minter",
            Basis::Monomial => "monomial",
        }
    }
}

/// Redistancing parameters; lengths are multiples of `h` unless noted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PcpConfig {
    pub bases: Vec<Basis>,
    pub cutoff: f64,
    pub xi: f64,
    pub band_width: f64,
    /// Absolute lower bound on the band width.
    pub min_band_width: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Skin width as a multiple of the band width.
    pub skin_factor: f64,
}

impl PcpConfig {
    pub fn params(&self, h: f64, degree: usize, basis: Basis) -> PcpParams {
        let band_width = (self.band_width * h).max(self.min_band_width);
        PcpParams {
            degree,
            basis: basis.kind(),
            cutoff: self.cutoff * h,
            xi: self.xi * h,
            band_width,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            skin_width: self.skin_factor * band_width,
            scaled_monomial: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeConfig {
    /// Ellipse and ellipsoid semi-axes.
    pub axes: Vec<f64>,
    /// Half width of the band of points where errors are measured; half
    /// the narrow band when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_band: Option<f64>,
    /// Lower and upper corners of the particle box.
    pub box_lo: Vec<f64>,
    pub box_hi: Vec<f64>,
    /// Errors only where `x >= target_x_min` (restricts a patch run to its
    /// interior).
    pub target_x_min: f64,
    pub square_half_side: f64,
    pub rect_half_extents: Vec<f64>,
    pub corner_radius: f64,
}

impl ShapeConfig {
    pub fn error_band(&self, params: &PcpParams) -> f64 {
        self.error_band.unwrap_or(0.5 * params.band_width)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemeshConfig {
    /// `(h, eps / h)` pairs for the Wendland and Gaussian kernels.
    pub eps_schedule: Vec<(f64, f64)>,
}

impl RemeshConfig {
    pub fn eps_factor(&self, h: f64) -> anyhow::Result<f64> {
        self.eps_schedule
            .iter()
            .find(|(hh, _)| (hh - h).abs() <= 1e-9 * h)
            .map(|(_, f)| *f)
            .with_context(|| format!("no smoothing factor scheduled for h = {h}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VortexConfig {
    pub center: [f64; 2],
    pub radius: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Width of the linear Heaviside used for the enclosed area, in `h`.
    pub area_ramp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DropletConfig {
    /// Half width of the periodic box.
    pub half_box: f64,
    /// Particles per axis.
    pub per_axis: usize,
    pub eps_factor: f64,
    pub dt: f64,
    pub t_end: f64,
    pub rho0: f64,
    pub sound_speed: f64,
    pub gamma: f64,
    pub eta: f64,
    pub tau: f64,
    /// Skin redistancing frequency.
    pub skin_frequency: f64,
    /// Velocity bound used for the time step and skin checks.
    pub u_max: f64,
    /// Time-series stride in steps.
    pub sample_every: usize,
    /// Fraction of the run, counted from the end, averaged for late-time
    /// statistics.
    pub late_fraction: f64,
    pub backends: Vec<String>,
    /// Write final particle positions and level-set values.
    pub snapshots: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    /// Particle spacings, coarse to fine.
    pub h: Vec<f64>,
    pub degree: usize,
    pub alpha: Vec<f64>,
    pub seed: u64,
    pub out: PathBuf,
    pub full_scale: bool,
    pub pcp: PcpConfig,
    pub shape: ShapeConfig,
    pub remesh: RemeshConfig,
    pub vortex: VortexConfig,
    pub droplet: DropletConfig,
}

fn inv(n: &[f64]) -> Vec<f64> {
    n.iter().map(|n| 1.0 / n).collect()
}

impl ScenarioConfig {
    /// Defaults; `full_scale` extends the resolution lists.
    pub fn defaults(scenario: Scenario, full_scale: bool) -> Self {
        let mut pcp = PcpConfig {
            bases: vec![Basis::Minter],
            cutoff: 2.5,
            xi: 1.5,
            band_width: 12.0,
            min_band_width: 0.0,
            tolerance: 1e-14,
            max_iterations: 1000,
            skin_factor: 0.0,
        };
        let mut shape = ShapeConfig {
            // ellipse A = 0.75, B = 0.5; ellipsoid adds C = 0.5
            axes: vec![0.75, 0.5, 0.5],
            error_band: Some(1.0 / 16.0),
            box_lo: vec![-1.0, -1.0, -1.0],
            box_hi: vec![1.0, 1.0, 1.0],
            target_x_min: f64::NEG_INFINITY,
            square_half_side: 0.5,
            rect_half_extents: vec![0.6, 0.4],
            corner_radius: 0.2,
        };
        let (h, alpha) = match scenario {
            Scenario::Ellipse2d => {
                // w = 1/4 at every h
                pcp.min_band_width = 4.0 / 16.0;
                let n: &[f64] = if full_scale { &[32.0, 64.0, 128.0, 256.0, 512.0] } else { &[32.0, 64.0, 128.0, 256.0] };
                (inv(n), vec![0.3])
            }
            Scenario::Ellipsoid3d => {
                pcp.cutoff = 2.4;
                shape.error_band = None;
                let n: &[f64] = if full_scale { &[32.0, 64.0, 128.0] } else { &[32.0, 64.0] };
                (inv(n), vec![0.3])
            }
            Scenario::BasisRobustness => {
                pcp.bases = vec![Basis::Minter, Basis::Monomial];
                pcp.cutoff = 2.4;
                shape.box_lo = vec![0.5, -0.36, -0.36];
                shape.box_hi = vec![0.8, 0.36, 0.36];
                shape.target_x_min = 0.6;
                shape.error_band = Some(6.0 / 256.0);
                (vec![1.0 / 256.0], vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.45])
            }
            Scenario::RemeshCompare => {
                pcp.min_band_width = 4.0 / 16.0;
                let n: &[f64] = if full_scale { &[32.0, 64.0, 128.0, 256.0, 512.0, 1024.0] } else { &[32.0, 64.0, 128.0, 256.0, 512.0] };
                (inv(n), vec![0.3])
            }
            Scenario::Nonsmooth => {
                pcp.min_band_width = 4.0 / 16.0;
                let n: &[f64] = if full_scale { &[32.0, 64.0, 128.0, 256.0] } else { &[32.0, 64.0, 128.0] };
                (inv(n), vec![0.3])
            }
            Scenario::Vortex => {
                // eps = 1e-10, r_c = 15h, k_max = 100, w = 40h
                pcp.cutoff = 15.0;
                pcp.band_width = 40.0;
                pcp.tolerance = 1e-10;
                pcp.max_iterations = 100;
                let n: &[f64] = if full_scale { &[32.0, 64.0, 128.0, 256.0] } else { &[32.0, 64.0, 128.0] };
                (inv(n), vec![0.0])
            }
            Scenario::Droplet2d | Scenario::Droplet3d => {
                // eps = 1e-12, r_c = 2.8h, w = 15h, skin 3w
                pcp.cutoff = 2.8;
                pcp.band_width = 15.0;
                pcp.tolerance = 1e-12;
                pcp.skin_factor = 3.0;
                let n: &[f64] = if full_scale && scenario == Scenario::Droplet2d { &[32.0, 64.0, 128.0] } else { &[32.0] };
                (inv(n), vec![0.0])
            }
        };
        let droplet = if scenario == Scenario::Droplet3d {
            // 3D: eps = 2h, w = 10h
            pcp.band_width = 10.0;
            DropletConfig { eps_factor: 2.0, t_end: if full_scale { 1.0 } else { 0.05 }, ..droplet_defaults() }
        } else {
            droplet_defaults()
        };
        Self {
            scenario,
            h,
            degree: 4,
            alpha,
            seed: 42,
            out: PathBuf::from("results"),
            full_scale,
            pcp,
            shape,
            remesh: RemeshConfig {
                eps_schedule: vec![
                    (1.0 / 32.0, 1.3),
                    (1.0 / 64.0, 2.0),
                    (1.0 / 128.0, 3.0),
                    (1.0 / 256.0, 4.0),
                    (1.0 / 512.0, 5.0),
                    (1.0 / 1024.0, 6.0),
                    (1.0 / 2048.0, 6.0),
                ],
            },
            vortex: VortexConfig { center: [0.5, 0.75], radius: 0.15, dt: 1.0 / 30.0, t_end: 8.0, area_ramp: 1.0 },
            droplet,
        }
    }

    /// Overrides fields from a TOML document.
    pub fn merge_toml(&self, text: &str) -> anyhow::Result<Self> {
        let overrides: toml::Table = toml::from_str(text).context("parsing config")?;
        let mut base = toml::Table::try_from(self).context("serializing defaults")?;
        merge(&mut base, overrides);
        let cfg: Self = base.try_into().context("invalid config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn merge_file(&self, path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        self.merge_toml(&text)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.h.is_empty() || self.h.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            bail!("invalid resolution list {:?}", self.h);
        }
        if self.alpha.iter().any(|a| !(0.0..0.5).contains(a)) {
            bail!("shift amplitudes must lie in [0, 0.5), got {:?}", self.alpha);
        }
        if self.pcp.bases.is_empty() {
            bail!("no regression basis selected");
        }
        Ok(())
    }
}

fn droplet_defaults() -> DropletConfig {
    DropletConfig {
        // box (-1.22, 1.22) with 78 particles per axis, h close to 1/32
        half_box: 1.22,
        per_axis: 78,
        eps_factor: 3.0,
        dt: 2e-4,
        t_end: 1.0,
        rho0: 1.0,
        sound_speed: 100.0,
        gamma: 7.0,
        eta: 0.5,
        tau: 50.0,
        skin_frequency: 100.0,
        u_max: 3.0,
        sample_every: 50,
        late_fraction: 0.2,
        backends: vec!["pcp".into(), "colorfield".into()],
        snapshots: false,
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}
