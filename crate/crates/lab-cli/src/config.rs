//! Scenario configuration (TOML) and its validation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Gaussian,
    Sphere,
    Profile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiKind {
    Identity,
    RadialScaling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub kind: ModelKind,
    pub n: usize,
    /// Sphere offset in `s(τ) = 2(n−1)(τ + c)`.
    #[serde(default = "one")]
    pub c: f64,
    /// Breather time range `[0, horizon]`; must cover 1.
    #[serde(default = "one")]
    pub horizon: f64,
    /// Profile models: CSV with header `r,psi`.
    #[serde(default)]
    pub profile_csv: Option<String>,
    /// Profile models: integrator tolerance.
    #[serde(default = "default_flow_rtol")]
    pub rtol: f64,
    /// Profile models: end of the integrated history.
    #[serde(default = "default_tau_end")]
    pub tau_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BreatherBlock {
    pub alpha: f64,
    pub phi: PhiKind,
    /// Radial scaling factor; defaults to `√α`.
    #[serde(default)]
    pub lambda: Option<f64>,
    pub i_max: usize,
    #[serde(default)]
    pub p0: f64,
    #[serde(default = "default_cert_tol")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LgeoBlock {
    pub r_window: [f64; 2],
    pub tau_window: [f64; 2],
    pub nr: usize,
    pub nt: usize,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default = "default_v_min")]
    pub v_min: f64,
    #[serde(default = "default_v_max")]
    pub v_max: f64,
    #[serde(default = "default_brackets")]
    pub brackets: usize,
    #[serde(default = "default_dtau_rel")]
    pub dtau_rel: f64,
    #[serde(default = "default_dr_metric")]
    pub dr_metric: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RvolBlock {
    pub taus: Vec<f64>,
    #[serde(default = "default_rvol_nodes")]
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlowdownBlock {
    pub stages: Vec<usize>,
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_window_nodes")]
    pub nr: usize,
    #[serde(default = "default_window_nodes")]
    pub nt: usize,
    /// Stages whose reduced volume at `τ = 1` feeds the density limit.
    pub density_stages: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_flow_tol")]
    pub flow: f64,
    #[serde(default = "default_junction_tol")]
    pub junction: f64,
    #[serde(default = "default_identity_tol")]
    pub identity: f64,
    #[serde(default = "default_gradient_tol")]
    pub gradient: f64,
    #[serde(default = "default_rvol_excess")]
    pub rvol_excess: f64,
    #[serde(default = "default_monotone_tol")]
    pub monotone: f64,
    /// Allowed growth of a stage constant when the last stage is added.
    #[serde(default = "default_stability")]
    pub stability: f64,
    #[serde(default = "default_trend_floor")]
    pub trend_floor: f64,
    #[serde(default = "default_residual_cap")]
    pub residual_cap: f64,
    #[serde(default = "default_density_tol")]
    pub density: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        toml::from_str("").expect("tolerance defaults")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultBlock {
    /// Multiplies `α` after certification data is fixed.
    #[serde(default = "one")]
    pub alpha_factor: f64,
    /// Multiplies the computed `l` field.
    #[serde(default = "one")]
    pub l_scale: f64,
}

impl Default for FaultBlock {
    fn default() -> Self {
        Self { alpha_factor: 1.0, l_scale: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default = "yes")]
    pub plots: bool,
    /// Reserved for stochastic quadrature fallbacks; all current paths are deterministic.
    #[serde(default)]
    pub seed: u64,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self { dir: default_dir(), plots: true, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    pub model: ModelBlock,
    pub breather: BreatherBlock,
    pub lgeo: LgeoBlock,
    pub rvol: RvolBlock,
    pub blowdown: BlowdownBlock,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub fault: FaultBlock,
    #[serde(default)]
    pub output: OutputBlock,
    /// Directory of the config file, for relative paths.
    #[serde(skip)]
    pub base_dir: std::path::PathBuf,
}

fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn default_dir() -> String {
    "out".into()
}
fn default_flow_rtol() -> f64 {
    1e-3
}
fn default_tau_end() -> f64 {
    4e-3
}
fn default_cert_tol() -> f64 {
    ricci_lab::splice::CERT_TOL
}
fn default_rtol() -> f64 {
    1e-11
}
fn default_atol() -> f64 {
    1e-13
}
fn default_v_min() -> f64 {
    1e-4
}
fn default_v_max() -> f64 {
    1e3
}
fn default_brackets() -> usize {
    64
}
fn default_dtau_rel() -> f64 {
    2e-3
}
fn default_dr_metric() -> f64 {
    2e-2
}
fn default_rvol_nodes() -> usize {
    97
}
fn default_eps() -> f64 {
    0.1
}
fn default_window_nodes() -> usize {
    9
}
fn default_flow_tol() -> f64 {
    1e-8
}
fn default_junction_tol() -> f64 {
    1e-6
}
fn default_identity_tol() -> f64 {
    1e-6
}
fn default_gradient_tol() -> f64 {
    1e-3
}
fn default_rvol_excess() -> f64 {
    1e-4
}
fn default_monotone_tol() -> f64 {
    1e-6
}
fn default_stability() -> f64 {
    0.1
}
fn default_trend_floor() -> f64 {
    1e-8
}
fn default_residual_cap() -> f64 {
    1e-3
}
fn default_density_tol() -> f64 {
    1e-3
}

fn check(ok: bool, path: &str, msg: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(format!("{path}: {msg}")))
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: Self = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        if cfg.name.is_empty() {
            cfg.name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let m = &self.model;
        check(m.n >= 2, "model.n", "must be at least 2")?;
        check(m.c > 0.0, "model.c", "must be positive")?;
        check(m.horizon >= 1.0, "model.horizon", "must cover the breather interval [0, 1]")?;
        check(m.rtol > 0.0, "model.rtol", "must be positive")?;
        check(m.tau_end > 0.0, "model.tau_end", "must be positive")?;
        check(
            m.kind != ModelKind::Profile || m.profile_csv.is_some(),
            "model.profile_csv",
            "required for profile models",
        )?;
        let b = &self.breather;
        check(b.alpha > 0.0 && b.alpha < 1.0, "breather.alpha", "must lie in (0, 1)")?;
        check(b.lambda.is_none_or(|l| l > 0.0), "breather.lambda", "must be positive")?;
        check(b.tolerance > 0.0, "breather.tolerance", "must be positive")?;
        check(b.i_max >= 2, "breather.i_max", "must be at least 2")?;
        let l = &self.lgeo;
        check(l.r_window[0] >= 0.0 && l.r_window[1] >= l.r_window[0], "lgeo.r_window", "must be 0 <= lo <= hi")?;
        check(l.tau_window[0] > 0.0 && l.tau_window[1] >= l.tau_window[0], "lgeo.tau_window", "must be 0 < lo <= hi")?;
        check(l.nr >= 1 && l.nt >= 1, "lgeo.nr", "lattice needs at least one node per axis")?;
        for (v, p) in [(l.rtol, "lgeo.rtol"), (l.atol, "lgeo.atol"), (l.dtau_rel, "lgeo.dtau_rel"), (l.dr_metric, "lgeo.dr_metric")] {
            check(v > 0.0, p, "must be positive")?;
        }
        check(l.v_min > 0.0 && l.v_max > l.v_min, "lgeo.v_min", "scan range must satisfy 0 < v_min < v_max")?;
        check(l.brackets >= 4, "lgeo.brackets", "must be at least 4")?;
        check(self.rvol.taus.len() >= 3, "rvol.taus", "needs at least 3 times")?;
        check(self.rvol.taus.iter().all(|&t| t > 0.0), "rvol.taus", "times must be positive")?;
        check(self.rvol.taus.windows(2).all(|w| w[0] < w[1]), "rvol.taus", "must be strictly increasing")?;
        check(self.rvol.nodes >= 5, "rvol.nodes", "must be at least 5")?;
        let d = &self.blowdown;
        check(!d.stages.is_empty(), "blowdown.stages", "must not be empty")?;
        check(d.stages.windows(2).all(|w| w[0] < w[1]), "blowdown.stages", "must be sorted and distinct")?;
        check(d.density_stages.windows(2).all(|w| w[0] < w[1]), "blowdown.density_stages", "must be sorted and distinct")?;
        let top = d.stages.iter().chain(&d.density_stages).copied().max().unwrap_or(0);
        check(top < b.i_max, "blowdown.stages", "every stage must be below breather.i_max")?;
        check(d.radius > 0.0, "blowdown.radius", "must be positive")?;
        check(d.eps >= 0.0 && d.eps < 0.5, "blowdown.eps", "must lie in [0, 1/2)")?;
        check(d.nr >= 1 && d.nt >= 1, "blowdown.nr", "window needs at least one node per axis")?;
        let t = &self.tolerances;
        for (v, p) in [
            (t.flow, "tolerances.flow"),
            (t.junction, "tolerances.junction"),
            (t.identity, "tolerances.identity"),
            (t.gradient, "tolerances.gradient"),
            (t.rvol_excess, "tolerances.rvol_excess"),
            (t.monotone, "tolerances.monotone"),
            (t.stability, "tolerances.stability"),
            (t.trend_floor, "tolerances.trend_floor"),
            (t.residual_cap, "tolerances.residual_cap"),
            (t.density, "tolerances.density"),
        ] {
            check(v > 0.0, p, "must be positive")?;
        }
        check(self.fault.alpha_factor > 0.0, "fault.alpha_factor", "must be positive")?;
        check(self.fault.l_scale > 0.0, "fault.l_scale", "must be positive")?;
        Ok(())
    }

    /// The config as resolved (defaults filled in), for embedding in outputs.
    pub fn resolved(&self) -> String {
        toml::to_string_pretty(self).unwrap_or_default()
    }
}
