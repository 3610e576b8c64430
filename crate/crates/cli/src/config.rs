//! Experiment configuration: a TOML file with strictly validated keys.
//! Every field has a default, so experiments run without a config file;
//! unknown keys are rejected with the offending key named.

use anyhow::{bail, Context};
use mgtlab::grid::RadialGrid;
use mgtlab::params::{FrequencyZones, PhysParams};
use mgtlab::profile::{algebraic_tail_profile, gaussian_profile, DataTriple, RadialProfile};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_m")]
    pub m: f64,
    #[serde(default)]
    pub allow_unstable: bool,
    #[serde(default)]
    pub zones: ZonesConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub oscint: OscintConfig,
    #[serde(default)]
    pub inviscid: InviscidConfig,
    #[serde(default)]
    pub nonlinear: NonlinearConfig,
    #[serde(default)]
    pub kernels: KernelsConfig,
}

fn default_tau() -> f64 {
    1.0
}
fn default_delta() -> f64 {
    1.0
}
fn default_m() -> f64 {
    0.5
}

impl Default for Config {
    fn default() -> Self {
        toml::from_str("").expect("empty config is valid")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZonesConfig {
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(rename = "N", default = "default_cap_n")]
    pub cap_n: f64,
}

fn default_eps() -> f64 {
    0.05
}
fn default_cap_n() -> f64 {
    20.0
}

impl Default for ZonesConfig {
    fn default() -> Self {
        Self {
            eps: default_eps(),
            cap_n: default_cap_n(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_rmax")]
    pub rmax: f64,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
}

fn default_rmax() -> f64 {
    50.0
}
fn default_nodes() -> usize {
    2400
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            rmax: default_rmax(),
            nodes: default_nodes(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    /// "gaussian" (params: amplitude, width) or
    /// "algebraic_tail" (params: a).
    #[serde(default = "default_family")]
    pub family: String,
    #[serde(default = "default_data_params")]
    pub params: Vec<f64>,
    /// Spatial dimension of the radial pipeline (any real n > 0).
    #[serde(default = "default_dim")]
    pub n: f64,
}

fn default_family() -> String {
    "gaussian".into()
}
fn default_data_params() -> Vec<f64> {
    vec![1.0, 1.0]
}
fn default_dim() -> f64 {
    3.0
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            family: default_family(),
            params: default_data_params(),
            n: default_dim(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    #[serde(default = "default_t_min")]
    pub t_min: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Sobolev index of the fitted norm.
    #[serde(default)]
    pub s: f64,
    /// Time-derivative order of the fitted norm.
    #[serde(default)]
    pub k: usize,
    #[serde(default = "default_rate_tol")]
    pub tolerance: f64,
}

fn default_t_min() -> f64 {
    10.0
}
fn default_t_max() -> f64 {
    1e4
}
fn default_samples() -> usize {
    25
}
fn default_rate_tol() -> f64 {
    0.05
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            t_min: default_t_min(),
            t_max: default_t_max(),
            samples: default_samples(),
            s: 0.0,
            k: 0,
            tolerance: default_rate_tol(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscintConfig {
    #[serde(default = "default_dim")]
    pub n: f64,
    #[serde(default)]
    pub s: f64,
    #[serde(default = "default_osc_c")]
    pub c: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_osc_t_min")]
    pub t_min: f64,
    #[serde(default = "default_osc_t_max")]
    pub t_max: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_osc_c() -> f64 {
    1.0
}
fn default_osc_t_min() -> f64 {
    1e2
}
fn default_osc_t_max() -> f64 {
    1e5
}

impl Default for OscintConfig {
    fn default() -> Self {
        Self {
            n: default_dim(),
            s: 0.0,
            c: default_osc_c(),
            eps: default_eps(),
            t_min: default_osc_t_min(),
            t_max: default_osc_t_max(),
            samples: default_samples(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InviscidConfig {
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    #[serde(default = "default_s0")]
    pub s0: f64,
    #[serde(default = "default_inv_t_min")]
    pub t_min: f64,
    #[serde(default = "default_inv_t_points")]
    pub t_points: usize,
}

fn default_deltas() -> Vec<f64> {
    vec![1e-1, 1e-2, 1e-3, 1e-4]
}
fn default_s0() -> f64 {
    6.0
}
fn default_inv_t_min() -> f64 {
    1e-2
}
fn default_inv_t_points() -> usize {
    60
}

impl Default for InviscidConfig {
    fn default() -> Self {
        Self {
            deltas: default_deltas(),
            s0: default_s0(),
            t_min: default_inv_t_min(),
            t_points: default_inv_t_points(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearConfig {
    /// "westervelt" or "kuznetsov"
    #[serde(default = "default_kind")]
    pub kind: String,
    #[serde(default = "default_k_ab")]
    pub k_ab: f64,
    #[serde(default = "default_box_len", rename = "L")]
    pub box_length: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "default_width")]
    pub width: f64,
    #[serde(default = "default_t_end", rename = "T")]
    pub t_end: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_lattice_dim")]
    pub dim: usize,
    #[serde(default = "default_dealias")]
    pub dealias: f64,
    #[serde(default)]
    pub s: f64,
}

fn default_kind() -> String {
    "westervelt".into()
}
fn default_k_ab() -> f64 {
    0.5
}
fn default_box_len() -> f64 {
    512.0 * std::f64::consts::PI
}
fn default_points() -> usize {
    2048
}
fn default_amplitude() -> f64 {
    1e-2
}
fn default_width() -> f64 {
    2.0
}
fn default_t_end() -> f64 {
    500.0
}
fn default_dt() -> f64 {
    0.1
}
fn default_tol() -> f64 {
    1e-9
}
fn default_lattice_dim() -> usize {
    1
}
fn default_dealias() -> f64 {
    2.0 / 3.0
}

impl Default for NonlinearConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelsConfig {
    #[serde(default = "default_cal_points")]
    pub r_points: usize,
    #[serde(default = "default_cal_points")]
    pub t_points: usize,
    #[serde(default = "default_cal_t_min")]
    pub t_min: f64,
    #[serde(default = "default_cal_t_max")]
    pub t_max: f64,
}

fn default_cal_points() -> usize {
    50
}
fn default_cal_t_min() -> f64 {
    0.05
}
fn default_cal_t_max() -> f64 {
    80.0
}

impl Default for KernelsConfig {
    fn default() -> Self {
        Self {
            r_points: default_cal_points(),
            t_points: default_cal_points(),
            t_min: default_cal_t_min(),
            t_max: default_cal_t_max(),
        }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                let cfg: Config = toml::from_str(&text)
                    .with_context(|| format!("parsing config {}", p.display()))?;
                Ok(cfg)
            }
        }
    }

    pub fn phys_params(&self) -> anyhow::Result<PhysParams> {
        Ok(PhysParams::new(
            self.tau,
            self.delta,
            self.m,
            self.allow_unstable,
        )?)
    }

    pub fn frequency_zones(&self) -> anyhow::Result<FrequencyZones> {
        Ok(FrequencyZones::new(self.zones.eps, self.zones.cap_n)?)
    }

    pub fn radial_grid(&self) -> anyhow::Result<RadialGrid> {
        Ok(RadialGrid::decay_default(self.grid.rmax, self.grid.nodes)?)
    }

    /// The configured data family sampled on the configured grid,
    /// identical profile in all three slots.
    pub fn data_triple(&self) -> anyhow::Result<DataTriple> {
        let grid = self.radial_grid()?;
        let n = self.data.n;
        let profile: RadialProfile = match self.data.family.as_str() {
            "gaussian" => {
                let amp = self.data.params.first().copied().unwrap_or(1.0);
                let width = self.data.params.get(1).copied().unwrap_or(1.0);
                gaussian_profile(n, amp, width, &grid)?
            }
            "algebraic_tail" => {
                let a = self.data.params.first().copied().unwrap_or(n / 2.0 + 1.0);
                algebraic_tail_profile(n, a, &grid)?
            }
            other => bail!("unknown data family `{other}` (use gaussian | algebraic_tail)"),
        };
        Ok(DataTriple::new(profile.clone(), profile.clone(), profile)?)
    }
}
