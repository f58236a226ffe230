//! Design evaluation: weight, strength checks and pushover performance.

use super::checks::{performance_violations, strength_violations, DesignLimits, LevelOutcome, StrengthDemands};
use super::tables::{AllowableTables, PerformanceLevel};
use super::{PenaltyParams, PenaltyReport, CONSTRAINT_COUNT};
use crate::analysis::{
    effective_period, idealized_stiffness, linear_static, pushover, rayleigh_period, state_at, story_drifts,
    target_displacement, AnalysisError, C0Table, FrameAnalysis, PushoverControl, PushoverTrace, TargetDisplacementInputs,
};
use crate::frame::{
    apply_design, structure_weight, DesignError, DesignVector, FrameModel, LoadCombination, MemberKind, GRAVITY,
};
use crate::sections::SectionLibrary;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error("analysis of design {design}: {source}")]
    Analysis { design: String, source: AnalysisError },
    #[error("invalid evaluator settings: {0}")]
    Config(String),
}

/// Spectral accelerations per level and the coefficient-method factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Spectrum {
    /// Spectral acceleration (g) for IO, LS and CP.
    pub s_a: [f64; 3],
    /// Fixed `C0`; `None` interpolates it from the story count.
    pub c0: Option<f64>,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl Default for Spectrum {
    fn default() -> Self {
        Self { s_a: [0.5, 1.0, 1.5], c0: None, c1: 1.0, c2: 1.0, c3: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluatorConfig {
    pub spectrum: Spectrum,
    /// Design lateral load of the strength combinations as a fraction of the
    /// seismic weight.
    pub base_shear_coefficient: f64,
    /// The pushover runs to this multiple of the target displacement
    /// estimated from the initial period.
    pub push_limit_factor: f64,
    pub pushover_steps: usize,
    pub max_events_per_step: usize,
    pub p_delta: bool,
    pub post_yield_ratio: f64,
    pub limits: DesignLimits,
    pub penalty: PenaltyParams,
}

impl Default for EvaluatorConfig {
    fn default() -> Self {
        Self {
            spectrum: Spectrum::default(),
            base_shear_coefficient: 0.12,
            push_limit_factor: 2.0,
            pushover_steps: 100,
            max_events_per_step: 100,
            p_delta: true,
            post_yield_ratio: 1e-3,
            limits: DesignLimits::default(),
            penalty: PenaltyParams::default(),
        }
    }
}

impl EvaluatorConfig {
    pub fn validate(&self) -> Result<(), String> {
        let s = &self.spectrum;
        if s.s_a.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(format!("spectral accelerations must be positive, got {:?}", s.s_a));
        }
        for (name, v) in [("c1", s.c1), ("c2", s.c2), ("c3", s.c3), ("c0", s.c0.unwrap_or(1.0))] {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("spectrum {name} must be positive, got {v}"));
            }
        }
        if !(self.base_shear_coefficient.is_finite() && self.base_shear_coefficient >= 0.0) {
            return Err("base_shear_coefficient must be nonnegative".into());
        }
        if !(self.push_limit_factor >= 1.0 && self.push_limit_factor.is_finite()) {
            return Err("push_limit_factor must be at least 1".into());
        }
        if self.pushover_steps == 0 || self.max_events_per_step == 0 {
            return Err("pushover_steps and max_events_per_step must be positive".into());
        }
        if !(self.post_yield_ratio > 0.0 && self.post_yield_ratio < 1.0) {
            return Err("post_yield_ratio must lie in (0, 1)".into());
        }
        self.limits.validate()?;
        self.penalty.validate()
    }
}

/// Coefficient-method quantities of one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetSummary {
    pub c0: f64,
    pub s_a: f64,
    pub t_i: f64,
    pub t_e: f64,
    /// kN/m.
    pub k_i: f64,
    pub k_e: f64,
    /// Peak base shear of the capacity curve, kN.
    pub v_y: f64,
    /// Target displacement measured from the gravity state, m.
    pub delta_t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelResponse {
    pub level: PerformanceLevel,
    pub target: Option<TargetSummary>,
    pub outcome: LevelOutcome,
    /// `None` when the analysis stopped before producing a capacity curve.
    pub trace: Option<PushoverTrace>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: PenaltyReport,
    pub strength: [f64; CONSTRAINT_COUNT],
    pub performance: [f64; CONSTRAINT_COUNT],
    pub elastic_drifts: Vec<f64>,
    /// Design lateral load, kN.
    pub design_base_shear: f64,
    pub levels: Vec<LevelResponse>,
}

/// Maps designs of one frame to penalty reports at a fixed set of levels.
#[derive(Debug, Clone)]
pub struct Evaluator {
    model: FrameModel,
    library: SectionLibrary,
    tables: AllowableTables,
    config: EvaluatorConfig,
    levels: Vec<PerformanceLevel>,
}

impl Evaluator {
    pub fn new(
        model: FrameModel,
        library: SectionLibrary,
        tables: AllowableTables,
        config: EvaluatorConfig,
        levels: Vec<PerformanceLevel>,
    ) -> Result<Self, EvalError> {
        config.validate().map_err(EvalError::Config)?;
        if levels.is_empty() {
            return Err(EvalError::Config("at least one performance level is required".into()));
        }
        Ok(Self { model, library, tables, config, levels })
    }

    pub fn model(&self) -> &FrameModel {
        &self.model
    }

    pub fn library(&self) -> &SectionLibrary {
        &self.library
    }

    pub fn tables(&self) -> &AllowableTables {
        &self.tables
    }

    pub fn config(&self) -> &EvaluatorConfig {
        &self.config
    }

    pub fn levels(&self) -> &[PerformanceLevel] {
        &self.levels
    }

    /// Same frame and settings checked at other levels.
    pub fn with_levels(&self, levels: Vec<PerformanceLevel>) -> Result<Self, EvalError> {
        Self::new(self.model.clone(), self.library.clone(), self.tables.clone(), self.config.clone(), levels)
    }

    /// Inclusive catalog id range of every design variable, in flat order.
    pub fn bounds(&self) -> Vec<(u32, u32)> {
        MemberKind::ALL
            .iter()
            .flat_map(|&k| {
                let n = self.library.count(k.section_kind()) as u32;
                std::iter::repeat_n((1, n), self.model.group_count(k))
            })
            .collect()
    }

    pub fn evaluate(&self, design: &DesignVector) -> Result<PenaltyReport, EvalError> {
        Ok(self.evaluate_detailed(design)?.report)
    }

    pub fn evaluate_detailed(&self, design: &DesignVector) -> Result<Evaluation, EvalError> {
        let sized = apply_design(&self.model, &self.library, design)?;
        let weight = structure_weight(&sized);
        let fail = |source| EvalError::Analysis { design: design.to_string(), source };
        let fa = FrameAnalysis::new(&sized).map_err(fail)?;
        let v_design = self.config.base_shear_coefficient * self.model.seismic_weight();
        let sols = linear_static(&fa.structure, &[fa.dead.clone(), fa.live.clone(), fa.quake(1.0)]).map_err(fail)?;
        let unit_shape = fa.floor_displacements(&sols[2].displacements);
        let heights: Vec<f64> = self.model.stories.iter().map(|s| s.height_m).collect();
        let scaled: Vec<f64> = unit_shape.iter().map(|u| u * v_design).collect();
        let elastic_drifts = story_drifts(&scaled, &heights);
        let quake = crate::analysis::LinearSolution::combine(&[(v_design, &sols[2])]);
        let demands = StrengthDemands::combine(
            &sols[0],
            &sols[1],
            &quake,
            &fa.dead.member_w,
            &fa.live.member_w,
            &[LoadCombination::Aci1, LoadCombination::Aci2, LoadCombination::Aci3],
            elastic_drifts.clone(),
        );
        let strength = strength_violations(&sized, &demands, &self.config.limits);

        let t_i0 = rayleigh_period(&fa.masses, &fa.pattern, &unit_shape).map_err(fail)?;
        let levels: Vec<LevelResponse> = self.levels.iter().map(|&l| self.level_response(&fa, l, t_i0)).collect();
        let outcomes: Vec<LevelOutcome> = levels.iter().map(|r| r.outcome.clone()).collect();
        let performance = performance_violations(&sized, &outcomes, &self.tables, &self.config.limits);

        let mut c = [0.0; CONSTRAINT_COUNT];
        for (k, v) in c.iter_mut().enumerate() {
            *v = strength[k] + performance[k];
        }
        Ok(Evaluation {
            report: PenaltyReport::new(c, weight, &self.config.penalty),
            strength,
            performance,
            elastic_drifts,
            design_base_shear: v_design,
            levels,
        })
    }

    fn target(&self, level: PerformanceLevel, t_e: f64) -> Result<(f64, f64, f64), AnalysisError> {
        let s = &self.config.spectrum;
        let c0 = s.c0.unwrap_or_else(|| C0Table::default().value(self.model.story_count()));
        let s_a = s.s_a[level.index()];
        let inputs = TargetDisplacementInputs { c0, c1: s.c1, c2: s.c2, c3: s.c3, s_a, t_e, g: GRAVITY };
        Ok((target_displacement(&inputs)?, c0, s_a))
    }

    fn level_response(&self, fa: &FrameAnalysis, level: PerformanceLevel, t_i0: f64) -> LevelResponse {
        let unreached = |trace, target, failure: String| LevelResponse {
            level,
            target,
            outcome: LevelOutcome::Unreached { level },
            trace,
            failure: Some(failure),
        };
        let delta0 = match self.target(level, t_i0) {
            Ok((d, _, _)) => d,
            Err(e) => return unreached(None, None, e.to_string()),
        };
        let limit = self.config.push_limit_factor * delta0;
        let control = PushoverControl {
            target_roof_disp: limit,
            step: Some(limit / self.config.pushover_steps as f64),
            max_steps: self.config.pushover_steps + 10,
            max_events_per_step: self.config.max_events_per_step,
            p_delta: self.config.p_delta,
            post_yield_ratio: self.config.post_yield_ratio,
        };
        let gravity = fa.gravity(LoadCombination::GPbd);
        let trace = match pushover(&fa.structure, &gravity, &fa.lateral_unit, &fa.monitor, &control) {
            Ok(t) => t,
            Err(e) => return unreached(None, None, e.to_string()),
        };
        let summary = (|| -> Result<TargetSummary, AnalysisError> {
            let (k_i, k_e, v_y) = idealized_stiffness(&trace)?;
            let t_i = rayleigh_period(&fa.masses, &fa.pattern, &trace.initial_shape).unwrap_or(t_i0);
            let t_e = effective_period(t_i, k_i, k_e)?;
            let (delta_t, c0, s_a) = self.target(level, t_e)?;
            Ok(TargetSummary { c0, s_a, t_i, t_e, k_i, k_e, v_y, delta_t })
        })();
        let summary = match summary {
            Ok(s) => s,
            Err(e) => return unreached(Some(trace), None, e.to_string()),
        };
        match state_at(&trace, trace.gravity_roof_disp() + summary.delta_t) {
            Ok(state) => LevelResponse {
                level,
                target: Some(summary),
                outcome: LevelOutcome::Reached { level, state },
                trace: Some(trace),
                failure: None,
            },
            Err(e) => unreached(Some(trace), Some(summary), e.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{build_case, CaseId, GeometryConfig};
    use crate::sections::{Detailing, Materials, SectionCatalogs};

    fn evaluator(levels: Vec<PerformanceLevel>) -> Evaluator {
        let m = Materials::default();
        let lib = SectionLibrary::new(&SectionCatalogs::builtin(&m), &m, &Detailing::default(), 5000.0).unwrap();
        let model = build_case(CaseId::Story4, &GeometryConfig::default()).unwrap();
        Evaluator::new(model, lib, AllowableTables::builtin(), EvaluatorConfig::default(), levels).unwrap()
    }

    fn extreme(ev: &Evaluator, max: bool) -> DesignVector {
        let flat: Vec<u32> = ev.bounds().iter().map(|&(lo, hi)| if max { hi } else { lo }).collect();
        DesignVector::from_flat(ev.model(), &flat).unwrap()
    }

    #[test]
    fn evaluation_is_pure() {
        let ev = evaluator(vec![PerformanceLevel::LS]);
        let d = extreme(&ev, true);
        let a = ev.evaluate(&d).unwrap();
        let b = ev.evaluate(&d).unwrap();
        assert_eq!(a.c.map(f64::to_bits), b.c.map(f64::to_bits));
        assert_eq!(a.phi.to_bits(), b.phi.to_bits());
    }

    #[test]
    fn heaviest_design_is_feasible_and_lightest_is_not() {
        let ev = evaluator(PerformanceLevel::ALL.to_vec());
        let heavy = ev.evaluate_detailed(&extreme(&ev, true)).unwrap();
        assert!(heavy.report.feasible(), "{:?}", heavy.report.active());
        assert_eq!(heavy.report.phi, heavy.report.weight);
        let light = ev.evaluate(&extreme(&ev, false)).unwrap();
        assert!(light.total > 0.0);
        assert!(light.weight < heavy.report.weight);
    }

    #[test]
    fn bounds_follow_catalogs() {
        let ev = evaluator(vec![PerformanceLevel::IO]);
        let b = ev.bounds();
        assert_eq!(b.len(), ev.model().dimension());
        assert_eq!(b[0], (1, 31));
        assert_eq!(b[4], (1, 65));
        assert_eq!(b[8], (1, 26));
    }

    #[test]
    fn config_rejections() {
        let mut c = EvaluatorConfig::default();
        c.spectrum.s_a[1] = 0.0;
        assert!(c.validate().is_err());
        let c = EvaluatorConfig { push_limit_factor: 0.5, ..EvaluatorConfig::default() };
        assert!(c.validate().is_err());
        assert!(EvaluatorConfig::default().validate().is_ok());
    }
}
