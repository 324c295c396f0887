//! The certificate battery behind `verify`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use ricci_lab::flow::flow_residual;
use ricci_lab::lgeo::identity_residuals;
use ricci_lab::monitor::{
    base_point_l, gaussian_density_limit, local_bounds, monotonicity_certificate, round_shrinker_density,
    stage_residuals, volume_series, DensityVerdict, ResidualMaxima,
};
use ricci_lab::splice::{junction_certificate, SplicedFlow};
use ricci_lab::LabError;

use crate::commands::{self, RunOpts};
use crate::config::{ModelKind, ScenarioConfig};
use crate::{scenario, CliError};

/// Every certificate, in report order.
pub const KEYS: [&str; 18] = [
    "flow_eq",
    "breather_identity",
    "junction_smoothness",
    "tau_sandwich",
    "l_base_bound",
    "eq_l_1",
    "eq_l_4",
    "eq_l_5",
    "grad_l_law",
    "rvol_le_1",
    "rvol_monotone",
    "prop51_l_bound",
    "prop51_grad_bound",
    "weighted_grad_bound",
    "soliton_residual_trend",
    "conjheat_trend",
    "v_nonpositive",
    "density_limit",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub pass: bool,
    pub status: Status,
    /// Measured quantity compared against `tolerance`.
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl Certificate {
    fn check(pass: bool, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        let status = if pass { Status::Pass } else { Status::Fail };
        Self { pass, status, value: finite(value), tolerance: finite(tolerance), detail: detail.into() }
    }

    fn upper(value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self::check(value <= tolerance, value, tolerance, detail)
    }

    fn skipped(detail: impl Into<String>) -> Self {
        Self { pass: true, status: Status::Skipped, value: None, tolerance: None, detail: detail.into() }
    }

    fn failed(e: &LabError) -> Self {
        Self { pass: false, status: Status::Fail, value: None, tolerance: None, detail: format!("numerical failure: {e}") }
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub scenario: String,
    pub certificates: BTreeMap<String, Certificate>,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.certificates.values().all(|c| c.pass)
    }
}

type Group = Vec<(&'static str, Certificate)>;

/// Runs a group, failing every one of its keys on a numerical error.
fn guard(keys: &[&'static str], f: impl FnOnce() -> Result<Group, LabError>) -> Group {
    f().unwrap_or_else(|e| keys.iter().map(|&k| (k, Certificate::failed(&e))).collect())
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

fn flow_group(cfg: &ScenarioConfig, sp: &SplicedFlow<f64>) -> Result<Group, LabError> {
    let t = &cfg.tolerances;
    let spec = scenario::field_spec(cfg);
    let mut worst = 0.0_f64;
    for &tau in &spec.taus {
        for &r in &spec.radii {
            worst = worst.max(flow_residual(sp, tau, r)?.value);
        }
    }
    let b = &sp.breather;
    let rows = junction_certificate(sp, 2, 0.05)?;
    let gap = max_of(rows.iter().flat_map(|r| r.gaps.iter().copied())).max(0.0);
    let a = b.alpha;
    let mut sandwich = 0.0_f64;
    for (i, &tau) in sp.junctions.iter().enumerate() {
        let lo = a.powi(-(i as i32));
        let hi = lo / (1.0 - a);
        sandwich = sandwich.max((lo - tau) / lo).max((tau - hi) / hi);
    }
    Ok(vec![
        ("flow_eq", Certificate::upper(worst, t.flow, "max |dg/dtau - 2 Ric| on the lgeo window")),
        ("breather_identity", Certificate::upper(b.residual, b.tolerance, format!("relative residual at alpha = {a}"))),
        (
            "junction_smoothness",
            Certificate::upper(gap, t.junction, format!("largest normalized gap of orders 0-2 over {} junctions", rows.len())),
        ),
        (
            "tau_sandwich",
            Certificate::upper(sandwich, 1e-12, "relative violation of alpha^-i <= tau_i <= alpha^-i / (1 - alpha)"),
        ),
    ])
}

fn l_bound_group(cfg: &ScenarioConfig, sp: &SplicedFlow<f64>) -> Result<Group, LabError> {
    let p0 = cfg.breather.p0;
    let bvp = scenario::bvp(cfg);
    let top = sp.i_max();
    let ls = (1..=top).map(|i| base_point_l(sp, p0, i, &bvp)).collect::<Result<Vec<_>, _>>()?;
    let c2 = max_of((1..=top).map(|i| sp.test_curve_bound(p0, i - 1)).collect::<Result<Vec<_>, _>>()?);
    let all = max_of(ls.iter().copied());
    let half = max_of(ls[..(top / 2).max(1)].iter().copied());
    let ratio = all / half;
    let pass = all <= c2 * (1.0 + 1e-9) && ratio <= 1.05;
    Ok(vec![(
        "l_base_bound",
        Certificate::check(pass, all, c2, format!("max l(x_i, tau_i) over i <= {top}; growth over the second half {ratio:.4}")),
    )])
}

fn field_group(cfg: &ScenarioConfig, sp: &SplicedFlow<f64>) -> Result<Group, LabError> {
    let t = &cfg.tolerances;
    let field = commands::lgeo_field(cfg, sp).map_err(|e| match e {
        CliError::Numerical(e) => e,
        other => LabError::Parameter(other.to_string()),
    })?;
    let ids = identity_residuals(&field);
    let smooth = ids.len();
    let r1 = max_of(ids.iter().map(|r| r.res1.abs())).max(0.0);
    let r2 = max_of(ids.iter().map(|r| -r.res2)).max(0.0);
    let r3 = max_of(ids.iter().map(|r| r.res3)).max(0.0);
    let grad = max_of(field.nodes.iter().filter(|n| n.smooth).map(|n| (n.grad_fd - n.grad_l).abs())).max(0.0);
    let nodes = format!("{smooth} smooth nodes of {}", field.nodes.len());
    Ok(vec![
        ("eq_l_1", Certificate::upper(r1, t.identity, format!("max |2 l_tau + |grad l|^2 - R + l/tau|, {nodes}"))),
        ("eq_l_4", Certificate::upper(r2, t.identity, "largest negative part of l_tau - lap l + |grad l|^2 - R + n/(2 tau)")),
        ("eq_l_5", Certificate::upper(r3, t.identity, "largest positive part of 2 lap l - |grad l|^2 + R + (l - n)/tau")),
        ("grad_l_law", Certificate::upper(grad, t.gradient, "max |finite-difference grad l - endpoint velocity law|")),
    ])
}

fn rvol_group(cfg: &ScenarioConfig, sp: &SplicedFlow<f64>) -> Result<Group, LabError> {
    let t = &cfg.tolerances;
    let series = volume_series(sp, &cfg.rvol.taus, cfg.rvol.nodes, &scenario::bvp(cfg))?;
    let rep = monotonicity_certificate(&series, t.monotone)?;
    Ok(vec![
        ("rvol_le_1", Certificate::upper(rep.max_excess.max(0.0), t.rvol_excess, "max (V(tau) - 1)")),
        (
            "rvol_monotone",
            Certificate::check(rep.pass, rep.max_violation, t.monotone, "largest increase of V between consecutive times"),
        ),
    ])
}

/// `C(all stages) ≤ (1 + stability) C(all but the last)`.
fn stable(key: &'static str, xs: &[f64], stability: f64, what: &str) -> (&'static str, Certificate) {
    if xs.len() < 2 {
        return (key, Certificate::skipped("needs at least two stages"));
    }
    let all = max_of(xs.iter().copied());
    let prev = max_of(xs[..xs.len() - 1].iter().copied());
    let growth = if prev > 0.0 { all / prev - 1.0 } else if all > 0.0 { f64::INFINITY } else { 0.0 };
    let pass = all.is_finite() && growth <= stability;
    (key, Certificate::check(pass, growth, stability, format!("{what}: C = {all:.6e}, relative growth from the last stage")))
}

/// Non-increasing up to `floor`, with the last stage under `cap`.
fn trend(key: &'static str, xs: &[f64], floor: f64, cap: f64) -> (&'static str, Certificate) {
    let rise = max_of(xs.windows(2).map(|w| w[1] - w[0])).max(0.0);
    let last = *xs.last().unwrap_or(&f64::NAN);
    let pass = rise <= floor && last <= cap;
    let list = xs.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ");
    (key, Certificate::check(pass, last, cap, format!("stage maxima [{list}], largest rise {rise:.2e}")))
}

fn blowdown_group(cfg: &ScenarioConfig, sp: &Arc<SplicedFlow<f64>>, stages: &[usize]) -> Result<Group, LabError> {
    let t = &cfg.tolerances;
    let result = commands::run_blowdown(cfg, sp, stages)?;
    let bounds: Vec<_> = result.iter().map(|s| local_bounds(&s.field)).collect();
    let maxima: Vec<ResidualMaxima<f64>> = result.iter().map(|s| stage_residuals(&s.field).maxima()).collect();
    let weighted: Vec<f64> = commands::stage_volumes(cfg, sp, stages)?.iter().map(|s| s.weighted.v + s.weighted.tail).collect();
    let sol: Vec<f64> = maxima.iter().map(|m| m.soliton).collect();
    let heat: Vec<f64> = maxima.iter().map(|m| m.conjheat).collect();
    let vmax = max_of(maxima.iter().map(|m| m.v_max));
    Ok(vec![
        stable("prop51_l_bound", &bounds.iter().map(|b| b.l_max).collect::<Vec<_>>(), t.stability, "sup l"),
        stable(
            "prop51_grad_bound",
            &bounds.iter().map(|b| b.derivative_max).collect::<Vec<_>>(),
            t.stability,
            "sup |dl/dtau| + |grad l|",
        ),
        stable("weighted_grad_bound", &weighted, t.stability, "integral of |grad l|^2 u at tau = 1"),
        trend("soliton_residual_trend", &sol, t.trend_floor, t.residual_cap),
        trend("conjheat_trend", &heat, t.trend_floor, t.residual_cap),
        ("v_nonpositive", Certificate::upper(vmax, t.identity, "max v over all stage windows")),
    ])
}

fn density_group(cfg: &ScenarioConfig, sp: &Arc<SplicedFlow<f64>>) -> Result<Group, LabError> {
    let tol = cfg.tolerances.density;
    let vols = commands::stage_volumes(cfg, sp, &cfg.blowdown.density_stages)?;
    let pairs: Vec<(f64, f64)> = vols.iter().map(|s| (s.tau_i, s.volume.v)).collect();
    let (limit, expect_static) = match cfg.model.kind {
        ModelKind::Sphere => (round_shrinker_density(cfg.model.n), false),
        _ => (1.0, true),
    };
    let d = gaussian_density_limit(&pairs, Some(limit), tol);
    let gap = (d.v_inf - limit).abs();
    let pass = d.verdict == DensityVerdict::Converged && gap <= tol && d.static_euclidean == expect_static;
    Ok(vec![(
        "density_limit",
        Certificate::check(
            pass,
            gap,
            tol,
            format!("V_inf {:.6} against limit density {limit:.6}, verdict {:?}, static flag {}", d.v_inf, d.verdict, d.static_euclidean),
        ),
    )])
}

/// Evaluates every certificate; numerical failures inside a group fail that group.
pub fn certify(cfg: &ScenarioConfig, opts: &RunOpts) -> Result<Verdict, CliError> {
    if cfg.model.kind == ModelKind::Profile {
        return Err(CliError::Config("model.kind: profile models support the model and evolve subcommands only".into()));
    }
    let stages = commands::stages(cfg, opts)?;
    let sp = scenario::spliced(cfg)?;
    let jobs: Vec<Box<dyn Fn() -> Group + Send + Sync>> = vec![
        Box::new(|| guard(&KEYS[..4], || flow_group(cfg, &sp))),
        Box::new(|| guard(&KEYS[4..5], || l_bound_group(cfg, &sp))),
        Box::new(|| guard(&KEYS[5..9], || field_group(cfg, &sp))),
        Box::new(|| guard(&KEYS[9..11], || rvol_group(cfg, &sp))),
        Box::new(|| guard(&KEYS[11..17], || blowdown_group(cfg, &sp, &stages))),
        Box::new(|| guard(&KEYS[17..], || density_group(cfg, &sp))),
    ];
    use rayon::prelude::*;
    let groups: Vec<Group> = jobs.par_iter().map(|j| j()).collect();
    let certificates = groups.into_iter().flatten().map(|(k, c)| (k.to_string(), c)).collect();
    Ok(Verdict { scenario: cfg.name.clone(), certificates })
}

/// Writes `verdict.json` and returns whether every certificate passed.
pub fn verify(cfg: &ScenarioConfig, opts: &RunOpts) -> Result<bool, CliError> {
    let v = certify(cfg, opts)?;
    let json = serde_json::to_string_pretty(&v).map_err(|e| CliError::Io(e.to_string()))?;
    commands::write(&opts.out, "verdict.json", &json)?;
    Ok(v.passed())
}
