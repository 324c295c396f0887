//! Flows and settings assembled from a configuration.

use std::sync::Arc;

use ricci_lab::flow::{evolve_backward, exact_flow, ExactFlow, Flow, FlowHistory};
use ricci_lab::lgeo::{BvpSettings, FieldSpec, ShootSettings};
use ricci_lab::metric::{ModelGeometry, Profile};
use ricci_lab::monitor::BlowdownSettings;
use ricci_lab::numerics::ode::StepControl;
use ricci_lab::splice::{splice_unchecked, BreatherSpec, Diffeo, SplicedFlow};
use ricci_lab::MetricSnapshot;

use crate::config::{ModelKind, PhiKind, ScenarioConfig};
use crate::CliError;

/// The breather flow `g₀` of a scenario.
pub fn breather_flow(cfg: &ScenarioConfig) -> Result<FlowHistory<f64>, CliError> {
    let m = &cfg.model;
    match m.kind {
        ModelKind::Gaussian => Ok(exact_flow(ExactFlow::GaussianStatic { n: m.n }, 0.0, m.horizon)?),
        ModelKind::Sphere => Ok(exact_flow(ExactFlow::ShrinkingSphere { n: m.n, c: m.c }, 0.0, m.horizon)?),
        ModelKind::Profile => Err(CliError::Config(
            "model.kind: profile models support the model and evolve subcommands only".into(),
        )),
    }
}

/// Initial profile of a profile scenario.
pub fn profile(cfg: &ScenarioConfig) -> Result<Profile<f64>, CliError> {
    let rel = cfg.model.profile_csv.as_deref().ok_or_else(|| CliError::Config("model.profile_csv: missing".into()))?;
    let path = cfg.base_dir.join(rel);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Config(format!("model.profile_csv: cannot read {}: {e}", path.display())))?;
    Profile::from_csv(cfg.model.n, &text).map_err(|e| CliError::Config(format!("model.profile_csv: {e}")))
}

/// The model history used by the `model` and `evolve` subcommands.
pub fn model_history(cfg: &ScenarioConfig) -> Result<FlowHistory<f64>, CliError> {
    match cfg.model.kind {
        ModelKind::Profile => {
            let p = profile(cfg)?;
            let snap = MetricSnapshot::new(0.0, ModelGeometry::RotSymPlane { profile: Arc::new(p) }, 1.0)?;
            let control = StepControl::new(cfg.model.rtol, cfg.model.rtol * 1e-3);
            Ok(evolve_backward(&snap, cfg.model.tau_end, control)?)
        }
        _ => breather_flow(cfg),
    }
}

pub fn diffeo(cfg: &ScenarioConfig) -> Diffeo<f64> {
    match cfg.breather.phi {
        PhiKind::Identity => Diffeo::Identity,
        PhiKind::RadialScaling => Diffeo::RadialScaling(cfg.breather.lambda.unwrap_or(cfg.breather.alpha.sqrt())),
    }
}

/// The breather as configured, with `α` multiplied by the fault factor.
pub fn breather(cfg: &ScenarioConfig) -> Result<BreatherSpec<f64>, CliError> {
    let g0: Arc<dyn Flow<f64>> = Arc::new(breather_flow(cfg)?);
    let alpha = cfg.breather.alpha * cfg.fault.alpha_factor;
    Ok(BreatherSpec::new(g0, alpha, diffeo(cfg), cfg.breather.tolerance)?)
}

/// The spliced flow, built even when the breather is not certified so that
/// every certificate can still be evaluated.
pub fn spliced(cfg: &ScenarioConfig) -> Result<Arc<SplicedFlow<f64>>, CliError> {
    Ok(Arc::new(splice_unchecked(breather(cfg)?, cfg.breather.i_max)?))
}

pub fn bvp(cfg: &ScenarioConfig) -> BvpSettings<f64> {
    let l = &cfg.lgeo;
    BvpSettings {
        shoot: ShootSettings { control: StepControl::new(l.rtol, l.atol), ..ShootSettings::default() },
        v_min: l.v_min,
        v_max: l.v_max,
        brackets: l.brackets,
        ..BvpSettings::default()
    }
}

pub fn field_spec(cfg: &ScenarioConfig) -> FieldSpec<f64> {
    let l = &cfg.lgeo;
    let mut spec = FieldSpec::uniform((l.r_window[0], l.r_window[1]), (l.tau_window[0], l.tau_window[1]), l.nr, l.nt);
    spec.dtau_rel = l.dtau_rel;
    spec.dr_metric = l.dr_metric;
    spec.bvp = bvp(cfg);
    spec
}

pub fn blowdown_settings(cfg: &ScenarioConfig) -> BlowdownSettings<f64> {
    let b = &cfg.blowdown;
    BlowdownSettings { radius: b.radius, eps: b.eps, nr: b.nr, nt: b.nt, bvp: bvp(cfg) }
}
