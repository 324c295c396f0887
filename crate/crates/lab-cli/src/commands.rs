//! Subcommands that tabulate one stage of the pipeline.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ricci_lab::flow::Flow;
use ricci_lab::lgeo::{identity_residuals, reduced_field, FieldSpec};
use ricci_lab::monitor::{
    blowdown, reduced_volume, stage_residuals, volume_radii, volume_series, weighted_gradient_bound, BlowdownStage,
    VolumeSample,
};
use ricci_lab::splice::{junction_certificate, RescaledFlow, SplicedFlow};
use ricci_lab::{LabError, ReducedField};

use crate::config::ScenarioConfig;
use crate::{num, scenario, CliError};

/// Output location and switches shared by every subcommand.
#[derive(Debug, Clone)]
pub struct RunOpts {
    pub out: PathBuf,
    /// Overrides `blowdown.stages`.
    pub stages: Option<Vec<usize>>,
    pub plots: bool,
}

impl RunOpts {
    pub fn from_config(cfg: &ScenarioConfig, out: Option<PathBuf>, stages: Option<Vec<usize>>, no_plots: bool) -> Self {
        let out = out.unwrap_or_else(|| cfg.base_dir.join(&cfg.output.dir));
        Self { out, stages, plots: cfg.output.plots && !no_plots }
    }
}

/// Creates the output directory and records the resolved configuration.
pub fn prepare(cfg: &ScenarioConfig, opts: &RunOpts) -> Result<(), CliError> {
    std::fs::create_dir_all(&opts.out)?;
    write(&opts.out, "config.resolved.toml", &cfg.resolved())
}

pub fn write(dir: &Path, name: &str, body: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Validated blow-down stages, honouring the command-line override.
pub fn stages(cfg: &ScenarioConfig, opts: &RunOpts) -> Result<Vec<usize>, CliError> {
    let s = opts.stages.clone().unwrap_or_else(|| cfg.blowdown.stages.clone());
    if s.is_empty() || s.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Config("--stages: must be non-empty, sorted and distinct".into()));
    }
    if let Some(&i) = s.iter().find(|&&i| i >= cfg.breather.i_max) {
        return Err(CliError::Config(format!("--stages: stage {i} is not below breather.i_max")));
    }
    Ok(s)
}

/// Model curvature at `τ = 0`.
pub fn model(cfg: &ScenarioConfig, opts: &RunOpts) -> Result<(), CliError> {
    let hist = scenario::model_history(cfg)?;
    let (lo, _) = hist.tau_range();
    let snap = hist.snapshot(lo)?;
    let r_hi = snap.coordinate_limit().unwrap_or(cfg.lgeo.r_window[1].max(1.0));
    let mut out = String::from("r,phi,psi,scalar,ric_rad,ric_tan\n");
    for k in 0..=64 {
        let r = r_hi * k as f64 / 64.0;
        let g = snap.radial(r)?;
        let _ = writeln!(out, "{},{},{},{},{},{}", num(r), num(g.phi), num(g.psi), num(g.scalar), num(g.ric_rad), num(g.ric_tan));
    }
    write(&opts.out, "model.csv", &out)
}

/// Backward history with its metadata sidecar.
pub fn evolve(cfg: &ScenarioConfig, opts: &RunOpts) -> Result<(), CliError> {
    let hist = scenario::model_history(cfg)?;
    write(&opts.out, "history.csv", &hist.to_csv(65))?;
    let meta = serde_json::to_string_pretty(&hist.meta()).map_err(|e| CliError::Io(e.to_string()))?;
    write(&opts.out, "history.json", &meta)
}

/// Junction gaps of orders 0 to 2 and the test-curve bounds on `l(x_i, τ_i)`.
pub fn splice(cfg: &ScenarioConfig, opts: &RunOpts) -> Result<(), CliError> {
    let sp = scenario::spliced(cfg)?;
    let rows = junction_certificate(sp.as_ref(), 2, 0.05)?;
    let mut out = String::from("i,tau_i,gap0,gap1,gap2\n");
    for r in &rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.i, num(r.tau), num(r.gaps[0]), num(r.gaps[1]), num(r.gaps[2]));
    }
    write(&opts.out, "junctions.csv", &out)?;
    let mut out = String::from("i,upper_bound\n");
    for i in 1..=sp.i_max() {
        let _ = writeln!(out, "{i},{}", num(sp.test_curve_bound(cfg.breather.p0, i - 1)?));
    }
    write(&opts.out, "lbound.csv", &out)
}

/// The reduced-distance field on the configured window of the spliced flow,
/// with `fault.l_scale` applied.
pub fn lgeo_field(cfg: &ScenarioConfig, sp: &SplicedFlow<f64>) -> Result<ReducedField, CliError> {
    let field = reduced_field(sp, &scenario::field_spec(cfg))?;
    Ok(if cfg.fault.l_scale == 1.0 { field } else { field.scaled(cfg.fault.l_scale) })
}

pub fn lgeo(cfg: &ScenarioConfig, opts: &RunOpts) -> Result<(), CliError> {
    let sp = scenario::spliced(cfg)?;
    let field = lgeo_field(cfg, &sp)?;
    let mut out = String::from("tau,r,l,grad_l,lap_l,smooth\n");
    for nd in &field.nodes {
        let _ = writeln!(out, "{},{},{},{},{},{}", num(nd.tau), num(nd.r), num(nd.l), num(nd.grad_l), num(nd.lap_l), nd.smooth as u8);
    }
    write(&opts.out, "lfield.csv", &out)?;
    let mut out = String::from("tau,r,res1,res2,res3\n");
    for r in identity_residuals(&field) {
        let _ = writeln!(out, "{},{},{},{},{}", num(r.tau), num(r.r), num(r.res1), num(r.res2), num(r.res3));
    }
    write(&opts.out, "residuals.csv", &out)
}

/// Reduced volume and weighted gradient integral of blow-down stage `i` at `τ = 1`.
pub struct StageVolume {
    pub i: usize,
    pub tau_i: f64,
    pub volume: VolumeSample<f64>,
    pub weighted: VolumeSample<f64>,
}

pub fn stage_volume(cfg: &ScenarioConfig, sp: &Arc<SplicedFlow<f64>>, i: usize) -> Result<StageVolume, LabError> {
    let tau_i = *sp.junctions.get(i).ok_or(LabError::Horizon { needed: i as f64, available: sp.i_max() as f64 })?;
    let flow = RescaledFlow::new(sp.clone() as Arc<dyn Flow<f64>>, tau_i)?;
    let radii = volume_radii(&flow, 1.0, cfg.rvol.nodes, 12.0)?;
    let mut spec = FieldSpec::lattice(radii, vec![1.0]).values_only();
    spec.bvp = scenario::bvp(cfg);
    let field = reduced_field(&flow, &spec)?;
    Ok(StageVolume { i, tau_i, volume: reduced_volume(&flow, &field, 0)?, weighted: weighted_gradient_bound(&flow, &field, 0)? })
}

pub fn stage_volumes(cfg: &ScenarioConfig, sp: &Arc<SplicedFlow<f64>>, stages: &[usize]) -> Result<Vec<StageVolume>, LabError> {
    use rayon::prelude::*;
    stages.par_iter().map(|&i| stage_volume(cfg, sp, i)).collect()
}

fn volume_rows(out: &mut String, i: usize, s: &VolumeSample<f64>, tau: f64) {
    let _ = writeln!(out, "{i},{},{},{}", num(tau), num(s.v), num(s.tail));
}

/// `V(τ)` of the spliced flow (`i = 0`) and of the density stages at `τ = 1`
/// (`tau` holds `τ_i`).
pub fn rvol(cfg: &ScenarioConfig, opts: &RunOpts) -> Result<(), CliError> {
    let sp = scenario::spliced(cfg)?;
    let series = volume_series(sp.as_ref(), &cfg.rvol.taus, cfg.rvol.nodes, &scenario::bvp(cfg))?;
    let mut out = String::from("i,tau,V,tail\n");
    for s in &series.samples {
        volume_rows(&mut out, 0, s, s.tau);
    }
    for s in stage_volumes(cfg, &sp, &cfg.blowdown.density_stages)? {
        volume_rows(&mut out, s.i, &s.volume, s.tau_i);
    }
    write(&opts.out, "rvol.csv", &out)
}

pub fn run_blowdown(cfg: &ScenarioConfig, sp: &Arc<SplicedFlow<f64>>, stages: &[usize]) -> Result<Vec<BlowdownStage<f64>>, LabError> {
    let mut out = blowdown(sp.clone(), cfg.breather.p0, stages, &scenario::blowdown_settings(cfg))?;
    if cfg.fault.l_scale != 1.0 {
        for s in &mut out {
            s.field = s.field.scaled(cfg.fault.l_scale);
        }
    }
    Ok(out)
}

/// Per-stage diagnostics, residual fields and stage volumes.
pub fn blowdown_cmd(cfg: &ScenarioConfig, opts: &RunOpts) -> Result<(), CliError> {
    let sp = scenario::spliced(cfg)?;
    let list = stages(cfg, opts)?;
    let result = run_blowdown(cfg, &sp, &list)?;
    let mut out = String::from("i,tau_i,l_at_base,curv_bound,K_i,inj_proxy\n");
    for s in &result {
        let d = &s.diagnostics;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            s.i,
            num(s.tau_i),
            num(d.l_at_base),
            num(d.curv_bound),
            num(d.ricci_lower),
            num(d.inj_proxy)
        );
        let mut res = String::from("tau,r,soliton,conjheat,v,lll1,lll2\n");
        for nd in &stage_residuals(&s.field).nodes {
            let _ = writeln!(
                res,
                "{},{},{},{},{},{},{}",
                num(nd.tau),
                num(nd.r),
                num(nd.soliton),
                num(nd.conjheat),
                num(nd.v),
                num(nd.lll1),
                num(nd.lll2)
            );
        }
        write(&opts.out, &format!("residuals_{}.csv", s.i), &res)?;
    }
    write(&opts.out, "stages.csv", &out)?;
    let mut out = String::from("i,tau,V,tail\n");
    for s in stage_volumes(cfg, &sp, &list)? {
        volume_rows(&mut out, s.i, &s.volume, s.tau_i);
    }
    write(&opts.out, "rvol.csv", &out)
}
