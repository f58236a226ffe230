//! Run configuration: TOML file, optional named preset, command-line overrides.

use crate::CliError;
use frame_pbo::abc::AbcConfig;
use frame_pbo::constraints::{DesignLimits, EvaluatorConfig, PenaltyParams, PerformanceLevel, Spectrum};
use frame_pbo::frame::{build_case, build_frame, CaseId, FrameLayout, FrameModel, GeometryConfig};
use frame_pbo::sections::{Detailing, Materials};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use toml::{Table, Value};

/// Environment variable naming the fixture directory when the config has none.
pub const DATA_ENV: &str = "FRAME_PBO_DATA";

pub const PRESETS: [&str; 4] = ["desk", "paper-io", "paper-ls", "paper-cp"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// `story4`, `story8`, `story12` or `custom` (requires `[frame]`).
    pub case: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<FrameLayout>,
    #[serde(default = "all_levels")]
    pub levels: Vec<PerformanceLevel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_dir: Option<PathBuf>,
    /// Seed each level's colony with the best design of the previous level.
    #[serde(default = "yes")]
    pub warm_start: bool,
    #[serde(default)]
    pub abc: AbcConfig,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub materials: MaterialOverrides,
    #[serde(default)]
    pub detailing: Detailing,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub analysis: AnalysisSettings,
    #[serde(default)]
    pub limits: DesignLimits,
    #[serde(default)]
    pub penalty: PenaltyParams,
}

fn all_levels() -> Vec<PerformanceLevel> {
    PerformanceLevel::ALL.to_vec()
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialOverrides {
    pub fc_mpa: Option<f64>,
    pub fy_mpa: Option<f64>,
    pub rho_concrete: Option<f64>,
    pub rho_steel: Option<f64>,
}

impl MaterialOverrides {
    pub fn materials(&self) -> Materials {
        let base = Materials::default();
        let mut m = Materials::with_strengths(self.fc_mpa.unwrap_or(base.fc_mpa), self.fy_mpa.unwrap_or(base.fy_mpa));
        if let Some(v) = self.rho_concrete {
            m.rho_concrete = v;
        }
        if let Some(v) = self.rho_steel {
            m.rho_steel = v;
        }
        m
    }
}

/// `C0` given as a number or `"auto"` (interpolated from the story count).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum C0Setting {
    Value(f64),
    Auto(AutoTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    /// Spectral acceleration (g) for IO, LS and CP.
    pub s_a: [f64; 3],
    pub c0: C0Setting,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        let s = Spectrum::default();
        Self { s_a: s.s_a, c0: C0Setting::Auto(AutoTag::Auto), c1: s.c1, c2: s.c2, c3: s.c3 }
    }
}

impl SpectrumConfig {
    pub fn spectrum(&self) -> Spectrum {
        let c0 = match self.c0 {
            C0Setting::Value(v) => Some(v),
            C0Setting::Auto(_) => None,
        };
        Spectrum { s_a: self.s_a, c0, c1: self.c1, c2: self.c2, c3: self.c3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSettings {
    pub base_shear_coefficient: f64,
    pub push_limit_factor: f64,
    pub pushover_steps: usize,
    pub max_events_per_step: usize,
    pub p_delta: bool,
    pub post_yield_ratio: f64,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        let e = EvaluatorConfig::default();
        Self {
            base_shear_coefficient: e.base_shear_coefficient,
            push_limit_factor: e.push_limit_factor,
            pushover_steps: e.pushover_steps,
            max_events_per_step: e.max_events_per_step,
            p_delta: e.p_delta,
            post_yield_ratio: e.post_yield_ratio,
        }
    }
}

/// Values a command line may impose on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub preset: Option<String>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    /// Reads `path`, applies the preset named in the file or `overrides`,
    /// then the remaining overrides, and validates the result.
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text, overrides)
    }

    pub fn from_toml_str(text: &str, overrides: &Overrides) -> Result<Self, CliError> {
        let file: Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        let preset = overrides.preset.clone().or_else(|| file.get("preset").and_then(Value::as_str).map(str::to_owned));
        let mut merged = match &preset {
            Some(name) => {
                let case = file.get("case").and_then(Value::as_str).unwrap_or_default();
                preset_table(name, case)?
            }
            None => Table::new(),
        };
        merge(&mut merged, file);
        if let Some(name) = preset {
            merged.insert("preset".into(), Value::String(name));
        }
        let mut cfg: RunConfig = merged.try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        if let Some(seed) = overrides.seed {
            cfg.abc.seed = seed;
        }
        if let Some(dir) = &overrides.output_dir {
            cfg.output_dir = Some(dir.clone());
        }
        cfg.normalize();
        cfg.validate()?;
        Ok(cfg)
    }

    fn normalize(&mut self) {
        let mut levels = std::mem::take(&mut self.levels);
        levels.sort_by_key(|l| l.index());
        levels.dedup();
        self.levels = levels;
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.levels.is_empty() {
            return bad("at least one performance level is required".into());
        }
        self.layout()?;
        self.abc.validate().map_err(CliError::Config)?;
        self.geometry.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.materials().validate().map_err(CliError::Config)?;
        self.detailing.validate().map_err(CliError::Config)?;
        self.evaluator_config().validate().map_err(CliError::Config)?;
        Ok(())
    }

    pub fn case_id(&self) -> Result<Option<CaseId>, CliError> {
        if self.case.eq_ignore_ascii_case("custom") {
            return Ok(None);
        }
        self.case.parse().map(Some).map_err(|e| CliError::Config(format!("{e}")))
    }

    pub fn layout(&self) -> Result<FrameLayout, CliError> {
        match (self.case_id()?, &self.frame) {
            (Some(_), Some(_)) => Err(CliError::Config("[frame] is only allowed with case = \"custom\"".into())),
            (Some(id), None) => Ok(id.layout()),
            (None, Some(layout)) => Ok(layout.clone()),
            (None, None) => Err(CliError::Config("case = \"custom\" requires a [frame] section".into())),
        }
    }

    pub fn model(&self) -> Result<FrameModel, CliError> {
        let built = match self.case_id()? {
            Some(id) => build_case(id, &self.geometry),
            None => build_frame(&self.layout()?, &self.geometry),
        };
        built.map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn materials(&self) -> Materials {
        self.materials.materials()
    }

    pub fn evaluator_config(&self) -> EvaluatorConfig {
        let a = &self.analysis;
        EvaluatorConfig {
            spectrum: self.spectrum.spectrum(),
            base_shear_coefficient: a.base_shear_coefficient,
            push_limit_factor: a.push_limit_factor,
            pushover_steps: a.pushover_steps,
            max_events_per_step: a.max_events_per_step,
            p_delta: a.p_delta,
            post_yield_ratio: a.post_yield_ratio,
            limits: self.limits,
            penalty: self.penalty,
        }
    }

    /// Fixture directory: the config's `data_dir`, else `FRAME_PBO_DATA`,
    /// else `None` for the compiled-in fixtures.
    pub fn data_dir(&self) -> Option<PathBuf> {
        self.data_dir.clone().or_else(|| std::env::var_os(DATA_ENV).map(PathBuf::from))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Colony size and iteration budget of the published settings for a case
/// and level. The 55-bee entry is rounded up to an even colony.
fn paper_budget(case: CaseId, level: PerformanceLevel) -> (i64, i64) {
    use CaseId::*;
    use PerformanceLevel::*;
    match (level, case) {
        (IO, Story4 | Story8) => (30, 105),
        (IO, Story12) => (30, 150),
        (LS, Story8) => (56, 80),
        (LS, Story4 | Story12) => (30, 140),
        (CP, Story4 | Story8) => (30, 140),
        (CP, Story12) => (30, 150),
    }
}

/// Settings a preset contributes below the file's own values.
pub fn preset_table(name: &str, case: &str) -> Result<Table, CliError> {
    let mut t = Table::new();
    let mut abc = Table::new();
    let level = match name {
        "desk" => {
            abc.insert("colony_size".into(), Value::Integer(20));
            abc.insert("max_iterations".into(), Value::Integer(40));
            abc.insert("limit".into(), Value::Integer(10));
            abc.insert("runs".into(), Value::Integer(1));
            t.insert("levels".into(), Value::Array(vec!["IO".into(), "LS".into(), "CP".into()]));
            None
        }
        "paper-io" => Some(PerformanceLevel::IO),
        "paper-ls" => Some(PerformanceLevel::LS),
        "paper-cp" => Some(PerformanceLevel::CP),
        other => {
            return Err(CliError::Config(format!("unknown preset `{other}` (expected one of {})", PRESETS.join(", "))));
        }
    };
    if let Some(level) = level {
        let id: CaseId = case
            .parse()
            .map_err(|_| CliError::Config(format!("preset `{name}` needs case story4, story8 or story12")))?;
        let (bees, iterations) = paper_budget(id, level);
        abc.insert("colony_size".into(), Value::Integer(bees));
        abc.insert("max_iterations".into(), Value::Integer(iterations));
        t.insert("levels".into(), Value::Array(vec![level.tag().into()]));
    }
    t.insert("abc".into(), Value::Table(abc));
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, CliError> {
        RunConfig::from_toml_str(text, &Overrides::default())
    }

    #[test]
    fn minimal_config_takes_defaults() {
        let c = parse("case = \"story4\"").unwrap();
        assert_eq!(c.levels, PerformanceLevel::ALL.to_vec());
        assert_eq!(c.abc, AbcConfig::default());
        assert_eq!(c.evaluator_config(), EvaluatorConfig::default());
        assert!(c.warm_start);
    }

    #[test]
    fn round_trips_through_toml() {
        let c = parse("case = \"story8\"\nlevels = [\"cp\", \"IO\"]\n[spectrum]\nc0 = 1.3\n").unwrap();
        assert_eq!(c.levels, vec![PerformanceLevel::IO, PerformanceLevel::CP]);
        assert_eq!(c.spectrum.spectrum().c0, Some(1.3));
        assert_eq!(parse(&c.to_toml_string()).unwrap(), c);
        let d = parse("case = \"story8\"").unwrap();
        assert_eq!(parse(&d.to_toml_string()).unwrap(), d);
    }

    #[test]
    fn rejects_bad_settings() {
        for text in [
            "case = \"story4\"\nlevels = []",
            "case = \"story5\"",
            "case = \"custom\"",
            "case = \"story4\"\n[frame]\nstories = 2\nbays = 1",
            "case = \"story4\"\n[abc]\ncolony_size = 7",
            "case = \"story4\"\n[geometry]\nbay_width_m = -1.0",
            "case = \"story4\"\n[spectrum]\nc0 = \"sometimes\"",
            "case = \"story4\"\n[abc]\nbogus = 1",
            "case = \"story4\"\nlevels = [\"XX\"]",
        ] {
            assert!(matches!(parse(text), Err(CliError::Config(_))), "{text}");
        }
    }

    #[test]
    fn presets_fill_below_file_values() {
        let c = parse("case = \"story8\"\npreset = \"paper-ls\"").unwrap();
        assert_eq!((c.abc.colony_size, c.abc.max_iterations), (56, 80));
        assert_eq!(c.levels, vec![PerformanceLevel::LS]);
        let c = parse("case = \"story4\"\npreset = \"paper-io\"\n[abc]\nmax_iterations = 7").unwrap();
        assert_eq!((c.abc.colony_size, c.abc.max_iterations), (30, 7));
        let o = Overrides { preset: Some("desk".into()), seed: Some(99), output_dir: None };
        let c = RunConfig::from_toml_str("case = \"story4\"", &o).unwrap();
        assert_eq!((c.abc.colony_size, c.abc.seed, c.preset.as_deref()), (20, 99, Some("desk")));
        assert!(parse("case = \"custom\"\npreset = \"paper-cp\"\n[frame]\nstories = 2\nbays = 1").is_err());
        assert!(parse("case = \"story4\"\npreset = \"fast\"").is_err());
    }

    #[test]
    fn custom_frames() {
        let c = parse("case = \"custom\"\n[frame]\nstories = 2\nbays = 1\ngrouping = \"per-kind\"").unwrap();
        let m = c.model().unwrap();
        assert_eq!(m.dimension(), 2);
    }
}
