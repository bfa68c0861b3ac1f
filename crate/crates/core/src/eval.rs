//! Risk estimates, convergence curves and their CSV / SVG renderings.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::data::{AnchorTask, LabeledDataset, Targets};
use crate::error::{Error, Result};
use crate::kernel::KernelModel;
use crate::surrogate::decode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    /// `|f(x) - y|` (Euclidean norm); classes are embedded as basis vectors.
    AbsoluteDeviation,
    /// `1{argmax f(x) != y}`; needs class targets.
    ZeroOne,
}

/// Mean loss of `model` over `test`.
pub fn empirical_risk(model: &KernelModel, test: &LabeledDataset, loss: Loss) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::Data("empty test set".into()));
    }
    let mut total = 0.0;
    match (loss, test.targets()) {
        (Loss::ZeroOne, Targets::Classes { labels, .. }) => {
            for (x, &y) in test.features().iter().zip(labels) {
                if decode(&model.predict(x)?)? != y {
                    total += 1.0;
                }
            }
        }
        (Loss::ZeroOne, Targets::Real(_)) => {
            return Err(Error::InvalidParameter("zero-one loss needs class targets".into()));
        }
        (Loss::AbsoluteDeviation, _) => {
            for (x, y) in test.features().iter().zip(test.embedded_targets()) {
                let f = model.predict(x)?;
                if f.len() != y.len() {
                    return Err(Error::DimensionMismatch {
                        expected: y.len(),
                        got: f.len(),
                    });
                }
                total += f.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            }
        }
    }
    Ok(total / test.len() as f64)
}

/// `x_k = k / n`, `k = 0..n`.
pub fn uniform_grid(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| k as f64 / n as f64)
}

/// Default grid size for noiseless excess risk.
pub const RISK_GRID: usize = 512;

/// Mean of `|f(x) - f*(x)|` over the uniform grid `k / n` on `[0, 1)`.
/// With `R(f*) = 0` this is the excess risk of a one-dimensional-input model.
pub fn excess_risk_noiseless<F>(model: &KernelModel, target: F, grid_size: usize) -> Result<f64>
where
    F: Fn(f64) -> Vec<f64>,
{
    if grid_size == 0 {
        return Err(Error::InvalidParameter("grid needs at least one point".into()));
    }
    let mut total = 0.0;
    for x in uniform_grid(grid_size) {
        let f = model.predict(&[x])?;
        let y = target(x);
        total += f.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    }
    Ok(total / grid_size as f64)
}

/// Zero-one excess risk `E[η*(X) - η_{f(X)}(X)]` on the anchor task, with `X`
/// averaged over the midpoints `(k + 1/2) / n` that fall in the support.
pub fn excess_risk_anchor(model: &KernelModel, task: &AnchorTask, grid_size: usize) -> Result<f64> {
    let mut total = 0.0;
    let mut count = 0usize;
    for k in 0..grid_size {
        let x = (k as f64 + 0.5) / grid_size as f64;
        if !task.in_support(x) {
            continue;
        }
        let p = task.conditional(x);
        let best = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let chosen = decode(&model.predict(&[x])?)?;
        total += best - p[chosen - 1];
        count += 1;
    }
    if count == 0 {
        return Err(Error::InvalidParameter("grid misses the support".into()));
    }
    Ok(total / count as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskPoint {
    pub budget: usize,
    pub mean_risk: f64,
    pub std_risk: f64,
    pub n_trials: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RiskCurve {
    pub points: Vec<RiskPoint>,
}

impl RiskCurve {
    pub fn at(&self, budget: usize) -> Option<&RiskPoint> {
        self.points.iter().find(|p| p.budget == budget)
    }
}

/// Pointwise mean and population standard deviation over trials. Every
/// trial must report the same budgets.
pub fn aggregate_trials(runs: &[Vec<(usize, f64)>]) -> Result<RiskCurve> {
    let first = runs
        .first()
        .ok_or_else(|| Error::InvalidParameter("no trials to aggregate".into()))?;
    if first.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::InvalidParameter("checkpoint budgets must be strictly increasing".into()));
    }
    for run in runs {
        if run.len() != first.len() || run.iter().zip(first).any(|(a, b)| a.0 != b.0) {
            return Err(Error::InvalidParameter("trials disagree on the checkpoint grid".into()));
        }
    }
    let n = runs.len() as f64;
    let points = (0..first.len())
        .map(|k| {
            let mean = runs.iter().map(|r| r[k].1).sum::<f64>() / n;
            let var = runs.iter().map(|r| (r[k].1 - mean).powi(2)).sum::<f64>() / n;
            RiskPoint {
                budget: first[k].0,
                mean_risk: mean,
                std_risk: var.sqrt(),
                n_trials: runs.len(),
            }
        })
        .collect();
    Ok(RiskCurve { points })
}

/// Least-squares slope of `log(mean_risk)` against `log(T)` for
/// `T_min <= T <= T_max`.
pub fn loglog_slope(curve: &RiskCurve, t_min: usize, t_max: usize) -> Result<f64> {
    let pts: Vec<&RiskPoint> = curve
        .points
        .iter()
        .filter(|p| p.budget >= t_min && p.budget <= t_max)
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "need two checkpoints in [{t_min}, {t_max}], found {}",
            pts.len()
        )));
    }
    if let Some(p) = pts.iter().find(|p| !(p.mean_risk > 0.0) || p.budget == 0) {
        return Err(Error::InvalidParameter(format!(
            "cannot take logarithms at T = {} (risk {})",
            p.budget, p.mean_risk
        )));
    }
    let xs: Vec<f64> = pts.iter().map(|p| (p.budget as f64).ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.mean_risk.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

pub const CURVE_CSV_HEADER: &str = "T,mean_risk,std_risk,n_trials";

pub fn write_curve_csv<W: Write>(curve: &RiskCurve, mut out: W) -> std::io::Result<()> {
    let mut s = String::new();
    s.push_str(CURVE_CSV_HEADER);
    s.push('\n');
    for p in &curve.points {
        let _ = writeln!(s, "{},{:.16e},{:.16e},{}", p.budget, p.mean_risk, p.std_risk, p.n_trials);
    }
    out.write_all(s.as_bytes())
}

pub fn emit_csv(curve: &RiskCurve, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_curve_csv(curve, std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

pub fn read_curve_csv<R: BufRead>(input: R) -> Result<RiskCurve> {
    let mut lines = input.lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == CURVE_CSV_HEADER => {}
        _ => return Err(Error::parse(1, format!("expected header `{CURVE_CSV_HEADER}`"))),
    }
    let mut points = Vec::new();
    for (k, line) in lines.enumerate() {
        let n = k + 2;
        let line = line.map_err(|e| Error::parse(n, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != 4 {
            return Err(Error::parse(n, "expected 4 columns"));
        }
        let bad = |c: &str| Error::parse(n, format!("invalid value `{c}`"));
        points.push(RiskPoint {
            budget: cells[0].parse().map_err(|_| bad(cells[0]))?,
            mean_risk: cells[1].parse().map_err(|_| bad(cells[1]))?,
            std_risk: cells[2].parse().map_err(|_| bad(cells[2]))?,
            n_trials: cells[3].parse().map_err(|_| bad(cells[3]))?,
        });
    }
    Ok(RiskCurve { points })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axes {
    LogLog,
    Linear,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

/// SVG line chart with one polyline per curve, axis ticks and a legend.
/// Points with nonpositive coordinates are skipped on log axes.
pub fn render_svg(curves: &[(String, RiskCurve)], axes: Axes) -> Result<String> {
    if curves.is_empty() {
        return Err(Error::InvalidParameter("no curves to plot".into()));
    }
    let tx = |v: f64| match axes {
        Axes::LogLog => v.log10(),
        Axes::Linear => v,
    };
    let keep = |p: &RiskPoint| match axes {
        Axes::LogLog => p.budget > 0 && p.mean_risk > 0.0,
        Axes::Linear => p.mean_risk.is_finite(),
    };
    let all: Vec<(f64, f64)> = curves
        .iter()
        .flat_map(|(_, c)| c.points.iter().filter(|p| keep(p)))
        .map(|p| (tx(p.budget as f64), tx(p.mean_risk)))
        .collect();
    if all.is_empty() {
        return Err(Error::InvalidParameter("no plottable points".into()));
    }
    let (mut x0, mut x1, mut y0, mut y1) = all.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
    );
    if axes == Axes::LogLog {
        (x0, x1, y0, y1) = (x0.floor(), x1.ceil(), y0.floor(), y1.ceil());
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }

    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (70.0, 20.0, 20.0, 50.0);
    let px = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
    let py = |y: f64| h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(
        s,
        r#"<line x1="{l}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/>"#,
        l = left,
        r = w - right,
        b = h - bottom
    );
    let _ = writeln!(
        s,
        r#"<line x1="{l}" y1="{t}" x2="{l}" y2="{b}" stroke="black"/>"#,
        l = left,
        t = top,
        b = h - bottom
    );

    for (v, label) in ticks(x0, x1, axes) {
        let x = px(v);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{b}" x2="{x:.2}" y2="{b2}" stroke="black"/>"#,
            b = h - bottom,
            b2 = h - bottom + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{y}" font-size="12" text-anchor="middle">{label}</text>"#,
            y = h - bottom + 20.0
        );
    }
    for (v, label) in ticks(y0, y1, axes) {
        let y = py(v);
        let _ = writeln!(
            s,
            r#"<line x1="{l2}" y1="{y:.2}" x2="{l}" y2="{y:.2}" stroke="black"/>"#,
            l = left,
            l2 = left - 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{yy:.2}" font-size="12" text-anchor="end">{label}</text>"#,
            x = left - 8.0,
            yy = y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{x}" y="{y}" font-size="13" text-anchor="middle">budget T</text>"#,
        x = (left + w - right) / 2.0,
        y = h - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{y}" font-size="13" text-anchor="middle" transform="rotate(-90 14 {y})">excess risk</text>"#,
        y = (top + h - bottom) / 2.0
    );

    for (k, (label, curve)) in curves.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut pts = String::new();
        for p in curve.points.iter().filter(|p| keep(p)) {
            let _ = write!(pts, "{:.2},{:.2} ", px(tx(p.budget as f64)), py(tx(p.mean_risk)));
        }
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            pts.trim_end()
        );
        let ly = top + 10.0 + 18.0 * k as f64;
        let lx = w - right - 150.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{lx2}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx2 = lx + 24.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{y}" font-size="12">{}</text>"#,
            escape(label),
            x = lx + 30.0,
            y = ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn ticks(lo: f64, hi: f64, axes: Axes) -> Vec<(f64, String)> {
    match axes {
        Axes::LogLog => {
            let (a, b) = (lo.floor() as i64, hi.ceil() as i64);
            (a..=b).map(|k| (k as f64, format!("1e{k}"))).collect()
        }
        Axes::Linear => (0..=4)
            .map(|k| {
                let v = lo + (hi - lo) * k as f64 / 4.0;
                (v, format!("{v:.3}"))
            })
            .collect(),
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn emit_svg(curves: &[(String, RiskCurve)], path: &Path, axes: Axes) -> Result<()> {
    let svg = render_svg(curves, axes)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}
