//! SVG figures rendered from the CSV outputs of a run directory.

use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::CliError;

/// Columns of a CSV file keyed by header name.
struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn read(path: &Path) -> Result<Self, CliError> {
        let err = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
        let mut rdr = csv::Reader::from_path(path).map_err(err)?;
        let headers = rdr.headers().map_err(err)?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(err)?;
            rows.push(rec.iter().map(|s| s.trim().parse().unwrap_or(f64::NAN)).collect());
        }
        Ok(Self { headers, rows })
    }

    fn col(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let k = self
            .headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Io(format!("missing column {name}")))?;
        Ok(self.rows.iter().map(|r| r[k]).collect())
    }
}

fn draw_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Io(format!("plot: {e}"))
}

fn range(xs: &[f64]) -> (f64, f64) {
    let lo = xs.iter().copied().filter(|x| x.is_finite()).fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().filter(|x| x.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = ((hi - lo) * 0.05).max(1e-12 * hi.abs().max(1.0));
    (lo - pad, hi + pad)
}

/// Line chart of several named series over a shared x axis.
fn lines(path: &Path, title: &str, xlabel: &str, x: &[f64], series: &[(&str, Vec<f64>)], log_y: bool) -> Result<(), CliError> {
    let root = SVGBackend::new(path, (720, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(draw_err)?;
    let (x0, x1) = range(x);
    let all: Vec<f64> = series.iter().flat_map(|(_, y)| y.iter().copied()).collect();
    let mut chart_builder = ChartBuilder::on(&root);
    chart_builder.caption(title, ("sans-serif", 20)).margin(12).x_label_area_size(36).y_label_area_size(72);
    let colors = [BLUE, RED, GREEN, MAGENTA];
    if log_y {
        let pos: Vec<f64> = all.iter().copied().filter(|v| *v > 0.0).collect();
        let (lo, hi) = range(&pos);
        let (lo, hi) = (lo.max(1e-300).min(hi / 10.0), hi * 2.0);
        let mut chart = chart_builder.build_cartesian_2d(x0..x1, (lo..hi).log_scale()).map_err(draw_err)?;
        chart.configure_mesh().x_desc(xlabel).draw().map_err(draw_err)?;
        for (k, (name, y)) in series.iter().enumerate() {
            let c = colors[k % colors.len()];
            let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(_, v)| **v > 0.0).map(|(a, b)| (*a, *b)).collect();
            chart
                .draw_series(LineSeries::new(pts, c.stroke_width(2)))
                .map_err(draw_err)?
                .label(*name)
                .legend(move |(a, b)| PathElement::new(vec![(a, b), (a + 16, b)], c));
        }
        chart.configure_series_labels().background_style(WHITE).border_style(BLACK).draw().map_err(draw_err)?;
    } else {
        let (lo, hi) = range(&all);
        let mut chart = chart_builder.build_cartesian_2d(x0..x1, lo..hi).map_err(draw_err)?;
        chart.configure_mesh().x_desc(xlabel).draw().map_err(draw_err)?;
        for (k, (name, y)) in series.iter().enumerate() {
            let c = colors[k % colors.len()];
            let pts: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
            chart
                .draw_series(LineSeries::new(pts.clone(), c.stroke_width(2)))
                .map_err(draw_err)?
                .label(*name)
                .legend(move |(a, b)| PathElement::new(vec![(a, b), (a + 16, b)], c));
            chart.draw_series(pts.into_iter().map(|p| Circle::new(p, 3, c.filled()))).map_err(draw_err)?;
        }
        chart.configure_series_labels().background_style(WHITE).border_style(BLACK).draw().map_err(draw_err)?;
    }
    root.present().map_err(draw_err)
}

/// `V(τ)` of the base flow, or `V` at `τ = 1` against the stage index.
fn rvol(dir: &Path) -> Result<PathBuf, CliError> {
    let t = Table::read(&dir.join("rvol.csv"))?;
    let (i, tau, v) = (t.col("i")?, t.col("tau")?, t.col("V")?);
    let out = dir.join("rvol.svg");
    let base: Vec<usize> = (0..i.len()).filter(|&k| i[k] == 0.0).collect();
    if base.len() >= 2 {
        let x: Vec<f64> = base.iter().map(|&k| tau[k]).collect();
        let y: Vec<f64> = base.iter().map(|&k| v[k]).collect();
        lines(&out, "reduced volume", "tau", &x, &[("V", y)], false)?;
    } else {
        let stage: Vec<usize> = (0..i.len()).filter(|&k| i[k] > 0.0).collect();
        let x: Vec<f64> = stage.iter().map(|&k| i[k]).collect();
        let y: Vec<f64> = stage.iter().map(|&k| v[k]).collect();
        lines(&out, "stage reduced volume at tau = 1", "stage i", &x, &[("V_i", y)], false)?;
    }
    Ok(out)
}

/// Maxima of the soliton, conjugate-heat and `|v|` residuals against `i`.
fn residual_maxima(dir: &Path) -> Result<PathBuf, CliError> {
    let stages = Table::read(&dir.join("stages.csv"))?.col("i")?;
    let (mut sol, mut heat, mut v) = (Vec::new(), Vec::new(), Vec::new());
    for &i in &stages {
        let name = format!("residuals_{}.csv", i as usize);
        let t = Table::read(&dir.join(&name))?;
        let m = |c: &str| -> Result<f64, CliError> { Ok(t.col(c)?.iter().fold(0.0_f64, |a, x| a.max(x.abs()))) };
        sol.push(m("soliton")?);
        heat.push(m("conjheat")?);
        v.push(m("v")?);
    }
    let out = dir.join("residual_maxima.svg");
    lines(&out, "blow-down residual maxima", "stage i", &stages, &[("soliton", sol), ("conjheat", heat), ("|v|", v)], true)?;
    Ok(out)
}

/// Heat map of `l` over the `(r, τ)` lattice.
fn lfield(dir: &Path) -> Result<PathBuf, CliError> {
    let t = Table::read(&dir.join("lfield.csv"))?;
    let (tau, r, l) = (t.col("tau")?, t.col("r")?, t.col("l")?);
    let uniq = |xs: &[f64]| {
        let mut u: Vec<f64> = xs.to_vec();
        u.sort_by(f64::total_cmp);
        u.dedup();
        u
    };
    let (rs, ts) = (uniq(&r), uniq(&tau));
    let half = |xs: &[f64], k: usize| -> (f64, f64) {
        let w = if xs.len() > 1 { (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64 } else { 1.0 };
        (xs[k] - w / 2.0, xs[k] + w / 2.0)
    };
    let (lo, hi) = range(&l);
    let out = dir.join("lfield.svg");
    let root = SVGBackend::new(&out, (720, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(draw_err)?;
    let (r0, r1) = (half(&rs, 0).0, half(&rs, rs.len() - 1).1);
    let (t0, t1) = (half(&ts, 0).0, half(&ts, ts.len() - 1).1);
    let mut chart = ChartBuilder::on(&root)
        .caption("reduced distance l(r, tau)", ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(56)
        .build_cartesian_2d(r0..r1, t0..t1)
        .map_err(draw_err)?;
    chart.configure_mesh().x_desc("r").y_desc("tau").draw().map_err(draw_err)?;
    let cells = (0..l.len()).filter(|&k| l[k].is_finite()).map(|k| {
        let j = rs.iter().position(|&x| x == r[k]).unwrap_or(0);
        let m = ts.iter().position(|&x| x == tau[k]).unwrap_or(0);
        let s = if hi > lo { (l[k] - lo) / (hi - lo) } else { 0.5 };
        let (a, b) = (half(&rs, j), half(&ts, m));
        Rectangle::new([(a.0, b.0), (a.1, b.1)], ViridisRGB::get_color(s).filled())
    });
    chart.draw_series(cells).map_err(draw_err)?;
    drop(chart);
    root.present().map_err(draw_err)?;
    drop(root);
    Ok(out)
}

/// Renders every figure whose inputs exist in `dir`.
pub fn render(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    if dir.join("rvol.csv").is_file() {
        out.push(rvol(dir)?);
    }
    if dir.join("stages.csv").is_file() {
        out.push(residual_maxima(dir)?);
    }
    if dir.join("lfield.csv").is_file() {
        out.push(lfield(dir)?);
    }
    if out.is_empty() {
        return Err(CliError::Config(format!(
            "nothing to plot in {}: expected rvol.csv, stages.csv with residuals_<i>.csv, or lfield.csv",
            dir.display()
        )));
    }
    Ok(out)
}
