//! Command implementations behind the `frame-pbo` binary.

pub mod config;
pub mod output;
pub mod plot;

use config::RunConfig;
use frame_pbo::abc::{DesignSearch, LevelRun};
use frame_pbo::constraints::{AllowableTables, Evaluation, Evaluator, LevelOutcome, PerformanceLevel};
use frame_pbo::frame::{DesignVector, FrameModel};
use frame_pbo::sections::{load_catalogs, Materials, SectionCatalogs, SectionLibrary};
use output::{Bundle, CaseReport, DriftRow, LevelSummary, OptimizationSummary, RunRow};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Analysis(String),
    #[error("optimization diverged: {0}")]
    Diverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Analysis(_) => 1,
            CliError::Config(_) => 2,
            CliError::Diverged(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

/// Catalogs and tables from `dir`, or the compiled-in fixtures.
pub fn load_fixtures(dir: Option<&Path>, materials: &Materials) -> Result<(SectionCatalogs, AllowableTables), CliError> {
    let Some(dir) = dir else {
        return Ok((SectionCatalogs::builtin(materials), AllowableTables::builtin()));
    };
    let catalogs = load_catalogs(dir, materials).map_err(|e| match e {
        frame_pbo::sections::CatalogError::Io { .. } => CliError::Io(e.to_string()),
        other => CliError::Config(other.to_string()),
    })?;
    let table_path = dir.join("allowables.csv");
    let tables = if table_path.exists() {
        AllowableTables::from_path(&table_path).map_err(|e| match e {
            frame_pbo::constraints::TableError::Io(_) => CliError::Io(format!("{}: {e}", table_path.display())),
            other => CliError::Config(format!("{}: {other}", table_path.display())),
        })?
    } else {
        AllowableTables::builtin()
    };
    Ok((catalogs, tables))
}

/// Everything a run needs, derived from a validated config.
pub struct Setup {
    pub config: RunConfig,
    pub model: FrameModel,
    pub evaluator: Evaluator,
    pub warnings: Vec<String>,
}

impl Setup {
    pub fn new(config: RunConfig) -> Result<Self, CliError> {
        let model = config.model()?;
        let materials = config.materials();
        let (catalogs, tables) = load_fixtures(config.data_dir().as_deref(), &materials)?;
        let mut warnings = catalogs.warnings();
        warnings.extend(tables.warnings());
        let library = SectionLibrary::new(&catalogs, &materials, &config.detailing, config.geometry.bay_width_m * 1e3)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let evaluator = Evaluator::new(model.clone(), library, tables, config.evaluator_config(), config.levels.clone())
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(Self { config, model, evaluator, warnings })
    }

    pub fn output_dir(&self) -> PathBuf {
        self.config.output_dir.clone().unwrap_or_else(|| PathBuf::from("frame-pbo-out"))
    }

    /// Parses `max`, `min` or comma-separated catalog ids in flat order.
    pub fn parse_design(&self, text: &str) -> Result<DesignVector, CliError> {
        let bounds = self.evaluator.bounds();
        let flat: Vec<u32> = match text.trim() {
            "max" => bounds.iter().map(|b| b.1).collect(),
            "min" => bounds.iter().map(|b| b.0).collect(),
            list => list
                .split(',')
                .map(|t| t.trim().parse::<u32>().map_err(|e| CliError::Config(format!("design id `{t}`: {e}"))))
                .collect::<Result<_, _>>()?,
        };
        if flat.len() != bounds.len() {
            return Err(CliError::Config(format!("design needs {} ids, got {}", bounds.len(), flat.len())));
        }
        if let Some((i, (id, b))) = flat.iter().zip(&bounds).enumerate().find(|(_, (id, b))| **id < b.0 || **id > b.1) {
            return Err(CliError::Config(format!("design id {id} at position {} outside {}..={}", i + 1, b.0, b.1)));
        }
        DesignVector::from_flat(&self.model, &flat).map_err(|e| CliError::Config(e.to_string()))
    }
}

fn level_files(
    setup: &Setup,
    evaluation: &Evaluation,
    level: PerformanceLevel,
    design: &DesignVector,
    bundle: &mut Bundle,
) -> Result<LevelSummary, CliError> {
    let response = evaluation
        .levels
        .iter()
        .find(|r| r.level == level)
        .ok_or_else(|| CliError::Analysis(format!("level {level} was not analyzed")))?;
    let limit = setup.evaluator.tables().drift_limit(level);
    let drifts = match &response.outcome {
        LevelOutcome::Reached { state, .. } => Some(state.drifts.clone()),
        LevelOutcome::Unreached { .. } => None,
    };
    let rows: Vec<DriftRow> = setup
        .model
        .stories
        .iter()
        .enumerate()
        .map(|(k, s)| DriftRow {
            story: k + 1,
            elevation_m: s.elevation_m,
            elastic_drift: evaluation.elastic_drifts[k],
            drift: drifts.as_ref().map_or(f64::NAN, |d| d[k]),
            limit,
        })
        .collect();
    let drift_csv = output::drift_name(level);
    bundle.add(&drift_csv, output::to_csv(&rows)?);
    let pushover_csv = match &response.trace {
        Some(trace) => {
            let name = output::pushover_name(level);
            bundle.add(&name, output::trace_csv(trace)?);
            Some(name)
        }
        None => None,
    };
    let report = evaluation.report;
    Ok(LevelSummary {
        level,
        design: design.clone(),
        weight_kg: report.weight,
        feasible: report.feasible(),
        report,
        target: response.target,
        failure: response.failure.clone(),
        drift_limit: limit,
        max_drift: drifts.map(|d| d.iter().copied().fold(0.0, f64::max)),
        pushover_csv,
        drift_csv,
        optimization: None,
    })
}

fn finish(bundle: &mut Bundle, report: &CaseReport, config: &RunConfig) -> Result<(), CliError> {
    let mut plots = Bundle::default();
    output::render_plots_from(&|name: &str| bundle.get(name).map(<[u8]>::to_vec), &mut plots)?;
    for name in plots.names().map(str::to_owned).collect::<Vec<_>>() {
        bundle.add(name.clone(), plots.get(&name).expect("listed").to_vec());
    }
    let json = serde_json::to_string_pretty(report).map_err(|e| CliError::Io(e.to_string()))?;
    bundle.add("report.json", json + "\n");
    bundle.add("report.txt", output::summary_text(report));
    let mut echoed = config.clone();
    echoed.output_dir = None;
    bundle.add("config.resolved.toml", echoed.to_toml_string());
    Ok(())
}

/// Analyzes one design at every configured level.
pub fn analyze(setup: &Setup, design: &DesignVector) -> Result<(CaseReport, Bundle), CliError> {
    let evaluation = setup.evaluator.evaluate_detailed(design).map_err(|e| CliError::Analysis(e.to_string()))?;
    let mut bundle = Bundle::default();
    let mut levels = Vec::new();
    for &level in &setup.config.levels {
        levels.push(level_files(setup, &evaluation, level, design, &mut bundle)?);
    }
    let report = CaseReport {
        command: "analyze".into(),
        case: setup.config.case.clone(),
        dimension: setup.model.dimension(),
        levels,
    };
    finish(&mut bundle, &report, &setup.config)?;
    Ok((report, bundle))
}

/// Optimizes each configured level in IO, LS, CP order.
pub fn optimize(setup: &Setup) -> Result<(CaseReport, Bundle, Vec<LevelRun>), CliError> {
    let mut bundle = Bundle::default();
    let mut levels = Vec::new();
    let mut runs = Vec::new();
    let mut previous: Option<DesignVector> = None;
    for &level in &setup.config.levels {
        let evaluator = setup.evaluator.with_levels(vec![level]).map_err(|e| CliError::Config(e.to_string()))?;
        let search = DesignSearch::new(&evaluator);
        let seeds: Vec<DesignVector> = if setup.config.warm_start { previous.iter().cloned().collect() } else { Vec::new() };
        log::info!("optimizing {} at {level}", setup.config.case);
        let result = search.optimize(&setup.config.abc, &seeds).map_err(|e| CliError::Analysis(e.to_string()))?;
        let evaluation = evaluator.evaluate_detailed(&result.best_design).map_err(|e| CliError::Analysis(e.to_string()))?;
        let mut summary = level_files(setup, &evaluation, level, &result.best_design, &mut bundle)?;

        let best = result.runs.best();
        let conv = output::convergence_name(level);
        bundle.add(&conv, output::to_csv(&best.history)?);
        let rows: Vec<RunRow> = result
            .runs
            .runs
            .iter()
            .enumerate()
            .map(|(k, r)| RunRow {
                run: k + 1,
                seed: r.seed,
                best_phi: r.best.phi,
                best_weight_kg: r.best.weight,
                best_c: r.best.violation,
                diverged: r.diverged,
                evaluations: r.evaluations,
            })
            .collect();
        bundle.add(output::runs_name(level), output::to_csv(&rows)?);
        let (phi_mean, phi_std) = result.runs.phi_stats();
        summary.optimization = Some(OptimizationSummary {
            runs: rows,
            best_run: result.runs.best_run + 1,
            phi_mean,
            phi_std,
            evaluations: result.runs.runs.iter().map(|r| r.evaluations).sum(),
            distinct_designs: result.distinct_designs,
            diverged: result.runs.runs.iter().any(|r| r.diverged),
            warm_started: !seeds.is_empty(),
            convergence_csv: conv,
        });
        previous = Some(result.best_design.clone());
        levels.push(summary);
        runs.push(result);
    }
    let report = CaseReport {
        command: "optimize".into(),
        case: setup.config.case.clone(),
        dimension: setup.model.dimension(),
        levels,
    };
    finish(&mut bundle, &report, &setup.config)?;
    Ok((report, bundle, runs))
}

/// Sidecar with the only run-dependent values: timestamps and thread count.
pub fn metadata(command: &str, started: std::time::SystemTime, threads: usize) -> String {
    let secs = |t: std::time::SystemTime| t.duration_since(std::time::UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64());
    let now = std::time::SystemTime::now();
    let meta = serde_json::json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "started_unix_s": secs(started),
        "finished_unix_s": secs(now),
        "wall_clock_s": now.duration_since(started).map_or(0.0, |d| d.as_secs_f64()),
        "threads": threads,
    });
    serde_json::to_string_pretty(&meta).expect("metadata serializes") + "\n"
}

/// Checks catalogs, capacities and allowables; returns warnings and a summary.
pub fn validate(dir: Option<&Path>, config: Option<&RunConfig>) -> Result<(Vec<String>, String), CliError> {
    let materials = config.map_or_else(Materials::default, RunConfig::materials);
    let (catalogs, tables) = load_fixtures(dir, &materials)?;
    let mut warnings = catalogs.warnings();
    warnings.extend(tables.warnings());
    let detailing = config.map(|c| c.detailing).unwrap_or_default();
    let wall_mm = config.map_or(frame_pbo::frame::GeometryConfig::default().bay_width_m, |c| c.geometry.bay_width_m) * 1e3;
    SectionLibrary::new(&catalogs, &materials, &detailing, wall_mm).map_err(|e| CliError::Config(e.to_string()))?;
    let mut summary = format!(
        "{} beams, {} columns, {} walls, {} allowable-rotation cells",
        catalogs.beams.len(),
        catalogs.columns.len(),
        catalogs.walls.len(),
        tables.cell_count()
    );
    if let Some(c) = config {
        let model = c.model()?;
        summary.push_str(&format!("; {} frame with {} design variables", c.case, model.dimension()));
    }
    Ok((warnings, summary))
}
