//! Result files: CSV tables, the JSON case report, text summaries and plots.

use crate::plot::{Chart, Series};
use crate::CliError;
use frame_pbo::abc::HistoryRow;
use frame_pbo::analysis::{read_curve_csv, CurveRow, PushoverTrace};
use frame_pbo::constraints::{PenaltyReport, PerformanceLevel, TargetSummary, CONSTRAINT_NAMES};
use frame_pbo::frame::DesignVector;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Story drift profile of one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftRow {
    pub story: usize,
    pub elevation_m: f64,
    pub elastic_drift: f64,
    pub drift: f64,
    pub limit: f64,
}

/// Best result of one independent run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub run: usize,
    pub seed: u64,
    pub best_phi: f64,
    pub best_weight_kg: f64,
    #[serde(rename = "best_C")]
    pub best_c: f64,
    pub diverged: bool,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationSummary {
    pub runs: Vec<RunRow>,
    pub best_run: usize,
    pub phi_mean: f64,
    pub phi_std: f64,
    pub evaluations: usize,
    pub distinct_designs: usize,
    pub diverged: bool,
    pub warm_started: bool,
    pub convergence_csv: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub level: PerformanceLevel,
    pub design: DesignVector,
    pub weight_kg: f64,
    pub feasible: bool,
    pub report: PenaltyReport,
    pub target: Option<TargetSummary>,
    pub failure: Option<String>,
    pub drift_limit: f64,
    pub max_drift: Option<f64>,
    pub pushover_csv: Option<String>,
    pub drift_csv: String,
    pub optimization: Option<OptimizationSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub command: String,
    pub case: String,
    pub dimension: usize,
    pub levels: Vec<LevelSummary>,
}

impl CaseReport {
    pub fn all_feasible(&self) -> bool {
        self.levels.iter().all(|l| l.feasible)
    }

    pub fn level(&self, level: PerformanceLevel) -> Option<&LevelSummary> {
        self.levels.iter().find(|l| l.level == level)
    }
}

pub fn convergence_name(level: PerformanceLevel) -> String {
    format!("convergence_{}.csv", level.tag())
}

pub fn pushover_name(level: PerformanceLevel) -> String {
    format!("pushover_{}.csv", level.tag())
}

pub fn drift_name(level: PerformanceLevel) -> String {
    format!("drift_{}.csv", level.tag())
}

pub fn runs_name(level: PerformanceLevel) -> String {
    format!("runs_{}.csv", level.tag())
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

pub fn from_csv<T: DeserializeOwned>(data: &[u8]) -> Result<Vec<T>, CliError> {
    csv::Reader::from_reader(data)
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Config(format!("malformed CSV: {e}")))
}

pub fn trace_csv(trace: &PushoverTrace) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    trace.write_csv(&mut buf).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(buf)
}

/// Files collected during a command and written together at the end.
#[derive(Default)]
pub struct Bundle {
    files: Vec<(String, Vec<u8>)>,
}

impl Bundle {
    pub fn add(&mut self, name: impl Into<String>, data: impl Into<Vec<u8>>) {
        self.files.push((name.into(), data.into()));
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, d)| d.as_slice())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let io = |p: &Path, e: std::io::Error| CliError::Io(format!("{}: {e}", p.display()));
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        for (name, data) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, data).map_err(|e| io(&path, e))?;
        }
        Ok(())
    }
}

pub fn capacity_chart(level: &str, curve: &[CurveRow]) -> String {
    let base = curve.first().map_or(0.0, |r| r.roof_disp);
    let pts = curve.iter().map(|r| ((r.roof_disp - base) * 100.0, r.base_shear)).collect();
    Chart {
        title: &format!("Capacity curve ({level})"),
        x_label: "Roof displacement (cm)",
        y_label: "Base shear (kN)",
        series: vec![Series::line(level, pts)],
    }
    .render()
}

pub fn drift_chart(level: &str, rows: &[DriftRow]) -> String {
    let profile = |f: fn(&DriftRow) -> f64| {
        let mut pts = vec![(0.0, 0.0)];
        let mut below = 0.0;
        for r in rows {
            pts.push((f(r) * 100.0, below));
            pts.push((f(r) * 100.0, r.elevation_m));
            below = r.elevation_m;
        }
        pts
    };
    Chart {
        title: &format!("Story drift at the target displacement ({level})"),
        x_label: "Drift ratio (%)",
        y_label: "Elevation (m)",
        series: vec![
            Series::line("pushover", profile(|r| r.drift)),
            Series::line("elastic", profile(|r| r.elastic_drift)),
            Series::dashed("limit", profile(|r| r.limit)),
        ],
    }
    .render()
}

pub fn convergence_chart(level: &str, history: &[HistoryRow]) -> String {
    Chart {
        title: &format!("Convergence history ({level})"),
        x_label: "Iteration",
        y_label: "Best penalized weight (kg)",
        series: vec![Series::line("best", history.iter().map(|h| (h.iteration as f64, h.best_phi)).collect())],
    }
    .render()
}

/// Renders every plot whose source CSV is present in `dir` into `out`.
pub fn render_plots_from(read: &dyn Fn(&str) -> Option<Vec<u8>>, out: &mut Bundle) -> Result<usize, CliError> {
    let mut n = 0;
    for level in PerformanceLevel::ALL {
        let tag = level.tag();
        if let Some(data) = read(&pushover_name(level)) {
            let curve = read_curve_csv(data.as_slice()).map_err(|e| CliError::Config(format!("{}: {e}", pushover_name(level))))?;
            out.add(format!("capacity_{tag}.svg"), capacity_chart(tag, &curve));
            n += 1;
        }
        if let Some(data) = read(&drift_name(level)) {
            out.add(format!("drift_{tag}.svg"), drift_chart(tag, &from_csv::<DriftRow>(&data)?));
            n += 1;
        }
        if let Some(data) = read(&convergence_name(level)) {
            out.add(format!("convergence_{tag}.svg"), convergence_chart(tag, &from_csv::<HistoryRow>(&data)?));
            n += 1;
        }
    }
    Ok(n)
}

pub fn render_plots_in(dir: &Path) -> Result<usize, CliError> {
    let read = |name: &str| -> Option<Vec<u8>> {
        let p: PathBuf = dir.join(name);
        std::fs::read(p).ok()
    };
    let mut bundle = Bundle::default();
    let n = render_plots_from(&read, &mut bundle)?;
    bundle.write(dir)?;
    Ok(n)
}

pub fn summary_text(report: &CaseReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} of {} ({} design variables)", report.command, report.case, report.dimension);
    for l in &report.levels {
        let _ = writeln!(s);
        let _ = writeln!(s, "[{}]", l.level);
        let _ = writeln!(s, "design      {}", l.design);
        let _ = writeln!(s, "weight      {:.1} kg", l.weight_kg);
        let _ = writeln!(s, "C           {:.6}", l.report.total);
        let _ = writeln!(s, "phi         {:.1}", l.report.phi);
        let _ = writeln!(s, "feasible    {}", if l.feasible { "yes" } else { "no" });
        if let Some(t) = &l.target {
            let _ = writeln!(
                s,
                "target      delta_t {:.4} m, T_i {:.3} s, T_e {:.3} s, C0 {:.3}, S_a {:.3} g, V_peak {:.0} kN",
                t.delta_t, t.t_i, t.t_e, t.c0, t.s_a, t.v_y
            );
        }
        if let Some(d) = l.max_drift {
            let _ = writeln!(s, "max drift   {:.5} (limit {:.5})", d, l.drift_limit);
        }
        if let Some(f) = &l.failure {
            let _ = writeln!(s, "pushover    {f}");
        }
        for (name, v) in CONSTRAINT_NAMES.iter().zip(l.report.c) {
            if v > 0.0 {
                let _ = writeln!(s, "  violated  {name}: {v:.6}");
            }
        }
        if let Some(o) = &l.optimization {
            let _ = writeln!(
                s,
                "search      {} run(s), best phi mean {:.1} std {:.1}, {} evaluations, {} distinct designs{}{}",
                o.runs.len(),
                o.phi_mean,
                o.phi_std,
                o.evaluations,
                o.distinct_designs,
                if o.warm_started { ", warm-started" } else { "" },
                if o.diverged { ", DIVERGED" } else { "" }
            );
        }
    }
    s
}
