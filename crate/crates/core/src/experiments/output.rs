//! results.csv, results.json and SVG plots.

use super::config::{ExperimentConfig, ExperimentKind};
use super::linear::LinearPartReport;
use super::suite::{LambdaReport, SuiteReport};
use super::sweep::SweepResult;
use crate::error::Result;
use crate::report::Record;
use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// Build identifier: `CLTLAB_GIT_DESCRIBE` at compile time, else the crate version.
pub fn git_describe() -> String {
    option_env!("CLTLAB_GIT_DESCRIBE").map(str::to_string).unwrap_or_else(|| format!("v{}", env!("CARGO_PKG_VERSION")))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum ExperimentResult {
    Rate(SweepResult),
    Tail(SweepResult),
    LinearPart(LinearPartReport),
    Verify(SuiteReport),
    Lambda(LambdaReport),
}

impl ExperimentResult {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            ExperimentResult::Rate(_) => ExperimentKind::Rate,
            ExperimentResult::Tail(_) => ExperimentKind::Tail,
            ExperimentResult::LinearPart(_) => ExperimentKind::LinearPart,
            ExperimentResult::Verify(_) => ExperimentKind::Verify,
            ExperimentResult::Lambda(_) => ExperimentKind::Lambda,
        }
    }

    /// The gated records of the result.
    pub fn records(&self) -> Vec<Record> {
        match self {
            ExperimentResult::Rate(s) | ExperimentResult::Tail(s) => sweep_records(s),
            ExperimentResult::LinearPart(r) => r.records.clone(),
            ExperimentResult::Verify(r) => r.records.clone(),
            ExperimentResult::Lambda(r) => r.records.clone(),
        }
    }
}

fn sweep_records(s: &SweepResult) -> Vec<Record> {
    let mut out = Vec::new();
    for r in &s.records {
        let n = r.n;
        out.push(Record::le(format!("quantiles_ordered_n{n}_median_q90"), r.median_rho, r.q90, 0.0));
        out.push(Record::le(format!("quantiles_ordered_n{n}_q90_q99"), r.q90, r.q99, 0.0));
        out.push(Record::le(format!("quantiles_ordered_n{n}_q99_max"), r.q99, r.max_rho, 0.0));
    }
    for t in &s.tail {
        let n = t.n;
        out.push(Record::eq(format!("tail_monotone_n{n}"), f64::from(u8::from(t.monotone)), 1.0, 0.0, 0.0));
        if !t.degenerate {
            out.push(Record::eq(format!("tail_bound_n{n}"), f64::from(u8::from(t.bound_holds)), 1.0, 0.0, 0.0));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub pass: bool,
    /// Names of records failing beyond one standard error past their slack.
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultsFile {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub git_describe: String,
    pub records: Vec<Record>,
    pub summary: Summary,
    pub results: Vec<ExperimentResult>,
}

impl ResultsFile {
    pub fn new(config: &ExperimentConfig, results: Vec<ExperimentResult>) -> Self {
        let records: Vec<Record> = results.iter().flat_map(|r| r.records()).collect();
        let failures = records.iter().filter(|r| r.hard_failure()).map(|r| r.name.clone()).collect::<Vec<_>>();
        Self {
            config: config.clone(),
            config_hash: config.hash(),
            git_describe: git_describe(),
            summary: Summary { pass: failures.is_empty(), failures },
            records,
            results,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("results serialize")
    }
}

fn stamp(file: &ResultsFile) -> String {
    format!("config_hash={} seed={}", file.config_hash, file.config.seed)
}

/// Rate CSV: a comment line, then `n,mean_rho,median_rho,q90,q99,max_rho,se`.
pub fn rate_csv(file: &ResultsFile) -> String {
    let mut s = format!("# {}\nn,mean_rho,median_rho,q90,q99,max_rho,se\n", stamp(file));
    for res in &file.results {
        if let ExperimentResult::Rate(sw) | ExperimentResult::Tail(sw) = res {
            for r in &sw.records {
                let _ = writeln!(s, "{},{:e},{:e},{:e},{:e},{:e},{:e}", r.n, r.mean_rho, r.median_rho, r.q90, r.q99, r.max_rho, r.se);
            }
        }
    }
    s
}

fn records_csv(file: &ResultsFile) -> String {
    let mut s = format!("# {}\nname,relation,lhs,rhs,se,pass\n", stamp(file));
    for r in &file.records {
        let rel = serde_json::to_value(r.relation).expect("relation serializes");
        let _ = writeln!(s, "{},{},{:e},{:e},{:e},{}", r.name, rel.as_str().unwrap_or(""), r.lhs, r.rhs, r.se, r.pass);
    }
    s
}

/// Writes results.csv, results.json and plots/*.svg; returns the paths written.
pub fn emit_outputs(file: &ResultsFile, output_dir: &Path) -> Result<Vec<PathBuf>> {
    let plots = output_dir.join("plots");
    fs::create_dir_all(&plots)?;
    let mut written = Vec::new();
    let sweeps = file.results.iter().any(|r| matches!(r, ExperimentResult::Rate(_) | ExperimentResult::Tail(_)));
    let csv = if sweeps { rate_csv(file) } else { records_csv(file) };
    let mut put = |path: PathBuf, body: String| -> Result<()> {
        fs::write(&path, body)?;
        written.push(path);
        Ok(())
    };
    put(output_dir.join("results.csv"), csv)?;
    put(output_dir.join("results.json"), file.to_json())?;
    let tag = stamp(file);
    for res in &file.results {
        match res {
            ExperimentResult::Rate(s) => put(plots.join("rate.svg"), rate_svg(s, &tag))?,
            ExperimentResult::Tail(s) => put(plots.join("tail.svg"), tail_svg(s, &tag))?,
            ExperimentResult::LinearPart(r) => put(plots.join("linear_part.svg"), linear_svg(r, &tag))?,
            _ => {}
        }
    }
    Ok(written)
}

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Canvas {
    x: (f64, f64),
    y: (f64, f64),
    body: String,
}

impl Canvas {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let pad = |r: (f64, f64)| {
            let (lo, hi) = if r.0.is_finite() && r.1.is_finite() && r.1 > r.0 { r } else { (r.0 - 1.0, r.0 + 1.0) };
            let d = 0.05 * (hi - lo);
            (lo - d, hi + d)
        };
        Self { x: pad(x), y: pad(y), body: String::new() }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * MARGIN)
    }

    fn polyline(&mut self, pts: &[(f64, f64)], color: &str, dashed: bool, class: &str) {
        let path: Vec<String> = pts
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        let dash = if dashed { " stroke-dasharray=\"6,4\"" } else { "" };
        let _ = writeln!(
            self.body,
            "<polyline class=\"{class}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash} points=\"{}\"/>",
            path.join(" ")
        );
    }

    fn points(&mut self, pts: &[(f64, f64)], color: &str) {
        for &(x, y) in pts.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
            let _ = writeln!(self.body, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>", self.px(x), self.py(y));
        }
    }

    fn text(&mut self, x: f64, y: f64, s: &str) {
        let _ = writeln!(self.body, "<text x=\"{x:.1}\" y=\"{y:.1}\" font-size=\"12\">{}</text>", escape(s));
    }

    fn finish(mut self, title: &str, xlabel: &str, ylabel: &str, tag: &str) -> String {
        let (l, r, t, b) = (MARGIN, W - MARGIN, MARGIN, H - MARGIN);
        let _ = writeln!(self.body, "<rect x=\"{l}\" y=\"{t}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#000\"/>", r - l, b - t);
        for k in 0..=4 {
            let fx = self.x.0 + (self.x.1 - self.x.0) * k as f64 / 4.0;
            let fy = self.y.0 + (self.y.1 - self.y.0) * k as f64 / 4.0;
            let (xp, yp) = (self.px(fx), self.py(fy));
            self.text(xp - 14.0, b + 16.0, &format!("{fx:.2}"));
            self.text(4.0, yp + 4.0, &format!("{fy:.2}"));
        }
        self.text(W / 2.0 - 40.0, H - 12.0, xlabel);
        self.text(4.0, MARGIN - 10.0, ylabel);
        self.text(MARGIN, 20.0, title);
        self.text(MARGIN, 36.0, tag);
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n<!-- {} -->\n<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n{}</svg>\n",
            escape(tag),
            self.body
        )
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds(pts: &[(f64, f64)]) -> ((f64, f64), (f64, f64)) {
    let fin = pts.iter().filter(|p| p.0.is_finite() && p.1.is_finite());
    fin.fold(((f64::INFINITY, f64::NEG_INFINITY), (f64::INFINITY, f64::NEG_INFINITY)), |(x, y), p| {
        ((x.0.min(p.0), x.1.max(p.0)), (y.0.min(p.1), y.1.max(p.1)))
    })
}

/// log mean_rho against log n with the fit and reference slopes −1 and −0.5
/// through the first point.
pub fn rate_svg(s: &SweepResult, tag: &str) -> String {
    let pts: Vec<(f64, f64)> =
        s.records.iter().filter(|r| r.mean_rho > 0.0).map(|r| ((r.n as f64).ln(), r.mean_rho.ln())).collect();
    let (xr, mut yr) = bounds(&pts);
    let anchor = pts.first().copied().unwrap_or((0.0, 0.0));
    let span = xr.1 - xr.0;
    if span.is_finite() {
        yr.0 = yr.0.min(anchor.1 - span);
    }
    let mut c = Canvas::new(xr, yr);
    let reference = |slope: f64| vec![(xr.0, anchor.1 + slope * (xr.0 - anchor.0)), (xr.1, anchor.1 + slope * (xr.1 - anchor.0))];
    c.polyline(&reference(-1.0), "#888", true, "reference-slope--1");
    c.polyline(&reference(-0.5), "#bbb", true, "reference-slope--0.5");
    if let Some(f) = &s.fit {
        let fit = vec![(xr.0, f.intercept + f.slope * xr.0), (xr.1, f.intercept + f.slope * xr.1)];
        c.polyline(&fit, COLORS[1], false, "fit");
        c.text(MARGIN + 10.0, MARGIN + 16.0, &format!("slope {:.3} [{:.3}, {:.3}]", f.slope, f.ci_low, f.ci_high));
    }
    c.points(&pts, COLORS[0]);
    c.text(MARGIN + 10.0, MARGIN + 32.0, "dashed: slopes -1 and -0.5");
    c.finish(&format!("{} {} rate", s.model, s.method), "log n", "log mean rho", tag)
}

/// log survival against √r with the fitted line.
pub fn tail_svg(s: &SweepResult, tag: &str) -> String {
    let all: Vec<(f64, f64)> = s
        .tail
        .iter()
        .flat_map(|t| t.table.iter().filter(|r| r.survival > 0.0).map(|r| (r.r.sqrt(), r.survival.ln())))
        .collect();
    let (xr, yr) = bounds(&all);
    let mut c = Canvas::new(xr, yr);
    for (k, t) in s.tail.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<(f64, f64)> =
            t.table.iter().filter(|r| r.survival > 0.0).map(|r| (r.r.sqrt(), r.survival.ln())).collect();
        c.points(&pts, color);
        if t.slope.is_finite() {
            c.polyline(&[(xr.0, t.intercept + t.slope * xr.0), (xr.1, t.intercept + t.slope * xr.1)], color, false, "fit");
        }
        c.text(MARGIN + 10.0, MARGIN + 16.0 * (k as f64 + 1.0), &format!("n={} c_hat={:.3} R2={:.3}", t.n, t.c_hat, t.r_squared));
    }
    c.finish(&format!("{} tail", s.model), "sqrt(r)", "log survival", tag)
}

/// Exact and asymptotic I(t) curves for each n.
pub fn linear_svg(r: &LinearPartReport, tag: &str) -> String {
    let all: Vec<(f64, f64)> = r
        .rows
        .iter()
        .flat_map(|row| row.curve.iter().flat_map(|e| [(e.t, e.exact_value), (e.t, e.asymptotic_value)]))
        .chain(std::iter::once((0.0, 0.0)))
        .collect();
    let (xr, yr) = bounds(&all);
    let mut c = Canvas::new(xr, yr);
    for (k, row) in r.rows.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let exact: Vec<(f64, f64)> = std::iter::once((0.0, 0.0)).chain(row.curve.iter().map(|e| (e.t, e.exact_value))).collect();
        let asym: Vec<(f64, f64)> =
            std::iter::once((0.0, 0.0)).chain(row.curve.iter().map(|e| (e.t, e.asymptotic_value))).collect();
        c.polyline(&exact, color, false, "exact");
        c.polyline(&asym, color, true, "asymptotic");
        c.text(MARGIN + 10.0, MARGIN + 16.0 * (k as f64 + 1.0), &format!("n={}", row.n));
    }
    c.finish(&format!("{} linear part I(t)", r.model), "t", "I(t)", tag)
}
