//! Strength, detailing and performance violation terms.

use super::tables::{AllowableTables, HingeKind, PerformanceLevel};
use super::{over, under, CONSTRAINT_COUNT};
use crate::analysis::{LinearSolution, PerformanceState};
use crate::frame::{LoadCombination, MemberKind, SizedFrame};
use serde::{Deserialize, Serialize};

/// Converts `V/(b·d·√f'c)` from MPa to psi units (`√(145.04)`), the units of
/// the rotation-table shear bands.
pub const PSI_SHEAR_FACTOR: f64 = 12.043;

/// Code limits used by the strength and detailing terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignLimits {
    /// Elastic inter-story drift ratio limit under the design lateral load.
    pub elastic_drift: f64,
    pub column_rho_min: f64,
    pub column_rho_max: f64,
    pub slenderness_max: f64,
    pub effective_length_factor: f64,
    /// Radius of gyration as a fraction of the section depth.
    pub gyration_factor: f64,
    pub min_tension_strain: f64,
    /// Minimum beam depth is `span / beam_depth_divisor`.
    pub beam_depth_divisor: f64,
    /// Violation charged per level whose target displacement is not reached.
    pub unreached_violation: f64,
}

impl Default for DesignLimits {
    fn default() -> Self {
        Self {
            elastic_drift: 0.0045,
            column_rho_min: 0.01,
            column_rho_max: 0.08,
            slenderness_max: 100.0,
            effective_length_factor: 1.0,
            gyration_factor: 0.3,
            min_tension_strain: 0.004,
            beam_depth_divisor: 18.5,
            unreached_violation: 10.0,
        }
    }
}

impl DesignLimits {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("elastic_drift", self.elastic_drift),
            ("column_rho_min", self.column_rho_min),
            ("column_rho_max", self.column_rho_max),
            ("slenderness_max", self.slenderness_max),
            ("effective_length_factor", self.effective_length_factor),
            ("gyration_factor", self.gyration_factor),
            ("min_tension_strain", self.min_tension_strain),
            ("beam_depth_divisor", self.beam_depth_divisor),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        if self.column_rho_min >= self.column_rho_max {
            return Err("column_rho_min must be below column_rho_max".into());
        }
        if !(self.unreached_violation.is_finite() && self.unreached_violation >= 0.0) {
            return Err("unreached_violation must be nonnegative".into());
        }
        Ok(())
    }
}

/// Member forces under one factored load state.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandState {
    pub label: String,
    pub end_forces: Vec<[f64; 6]>,
    /// Local transverse member load, kN/m.
    pub member_w: Vec<f64>,
}

/// Factored member forces for the strength checks plus the elastic drifts
/// under the design lateral load.
#[derive(Debug, Clone, PartialEq)]
pub struct StrengthDemands {
    pub states: Vec<DemandState>,
    pub elastic_drifts: Vec<f64>,
}

impl StrengthDemands {
    /// Superposes unit dead, live and lateral solutions for each combination;
    /// reversible combinations contribute both lateral signs.
    pub fn combine(
        dead: &LinearSolution,
        live: &LinearSolution,
        quake: &LinearSolution,
        dead_w: &[f64],
        live_w: &[f64],
        combinations: &[LoadCombination],
        elastic_drifts: Vec<f64>,
    ) -> Self {
        let mut states = Vec::new();
        for &c in combinations {
            let (fd, fl, fe) = c.factors();
            let signs: &[f64] = if c.reversible() && fe != 0.0 { &[1.0, -1.0] } else { &[1.0] };
            for &s in signs {
                let sol = LinearSolution::combine(&[(fd, dead), (fl, live), (s * fe, quake)]);
                let label = match (signs.len(), s > 0.0) {
                    (1, _) => c.tag().to_string(),
                    (_, true) => format!("{}+E", c.tag()),
                    _ => format!("{}-E", c.tag()),
                };
                let member_w = dead_w.iter().zip(live_w).map(|(d, l)| fd * d + fl * l).collect();
                states.push(DemandState { label, end_forces: sol.end_forces, member_w });
            }
        }
        Self { states, elastic_drifts }
    }
}

/// Pushover response of one performance level at its target displacement.
#[derive(Debug, Clone, PartialEq)]
pub enum LevelOutcome {
    Reached { level: PerformanceLevel, state: PerformanceState },
    /// The pushover could not attain the target displacement.
    Unreached { level: PerformanceLevel },
}

fn shear_ratio_psi(v_kn: f64, width_mm: f64, depth_mm: f64, fc: f64) -> f64 {
    v_kn.abs() * 1e3 / (width_mm * depth_mm * fc.sqrt()) * PSI_SHEAR_FACTOR
}

/// Clear height of the column on `line` in `story`: story height less the
/// deepest beam framing into its top.
fn clear_height(sized: &SizedFrame<'_>, story: usize, line: usize) -> f64 {
    let model = sized.model;
    let deepest = model
        .members
        .iter()
        .zip(&sized.members)
        .filter(|(m, _)| m.kind == MemberKind::Beam && m.story == story && (m.line == line || m.line + 1 == line))
        .map(|(_, s)| s.depth_m)
        .fold(0.0, f64::max);
    model.stories[story].height_m - deepest
}

/// Terms `c_1` to `c_18`: elastic drift, member strength and detailing.
pub fn strength_violations(
    sized: &SizedFrame<'_>,
    demands: &StrengthDemands,
    limits: &DesignLimits,
) -> [f64; CONSTRAINT_COUNT] {
    let model = sized.model;
    let lib = sized.library;
    let mat = &lib.materials;
    let mut c = [0.0; CONSTRAINT_COUNT];
    let mut raise = |k: usize, v: f64| c[k - 1] = f64::max(c[k - 1], v);

    for d in &demands.elastic_drifts {
        raise(1, over(d.abs(), limits.elastic_drift));
    }

    for (e, (m, s)) in model.members.iter().zip(&sized.members).enumerate() {
        let caps = &s.capacities;
        match m.kind {
            MemberKind::Column | MemberKind::Wall => {
                let curve = match m.kind {
                    MemberKind::Column => &lib.column(s.catalog_id).expect("sized").interaction,
                    _ => &lib.wall(s.catalog_id).expect("sized").interaction,
                };
                let phi_p = mat.phi_compression * caps.pn_max_kn;
                let floor = 0.05 * mat.phi_compression * caps.mn_pos_knm;
                for st in &demands.states {
                    let f = &st.end_forces[e];
                    let p_u = -f[3];
                    raise(2, over(p_u, phi_p));
                    let m_u = f[2].abs().max(f[5].abs());
                    let phi_m = (mat.phi_compression * curve.moment_at(p_u)).max(floor);
                    if phi_m > 0.0 {
                        raise(3, over(m_u, phi_m));
                    }
                    let v_u = f[1].abs().max(f[4].abs());
                    raise(4, over(v_u, mat.phi_shear * caps.vn_kn));
                }
                if m.kind == MemberKind::Column {
                    raise(5, under(caps.rho, limits.column_rho_min));
                    raise(6, over(caps.rho, limits.column_rho_max));
                    if m.story > 0 {
                        if let Some(below) = model.column_at(m.story - 1, m.line) {
                            let b = &sized.members[below];
                            raise(7, over(s.width_m, b.width_m));
                            raise(8, over(s.depth_m, b.depth_m));
                        }
                    }
                    raise(10, over(s.width_m, s.depth_m));
                    let lu = clear_height(sized, m.story, m.line);
                    let ratio = limits.effective_length_factor * lu / (limits.gyration_factor * s.depth_m);
                    raise(11, over(ratio, limits.slenderness_max));
                    raise(12, under(caps.clear_spacing_mm, caps.min_clear_spacing_mm));
                }
            }
            MemberKind::Beam => {
                let rec = &lib.beam(s.catalog_id).expect("sized").record;
                let span = model.member_length(e);
                for line in [m.line, m.line + 1] {
                    if let Some(col) = model.column_at(m.story, line) {
                        raise(9, over(s.width_m, sized.members[col].width_m));
                    }
                }
                let (mp, mn) = (mat.phi_flexure * caps.mn_pos_knm, mat.phi_flexure * caps.mn_neg_knm);
                let moment_term = |demand: f64, hogging: bool| {
                    let cap = if hogging { mn } else { mp };
                    if demand <= 0.0 {
                        0.0
                    } else if cap > 0.0 {
                        over(demand, cap)
                    } else {
                        1.0
                    }
                };
                for st in &demands.states {
                    let f = &st.end_forces[e];
                    let (mi, mj) = (f[2], f[5]);
                    let w = st.member_w[e];
                    let mid = -w * span * span / 8.0 - (mi - mj) / 2.0;
                    for v in [
                        moment_term(mi.max(0.0), true),
                        moment_term((-mi).max(0.0), false),
                        moment_term((-mj).max(0.0), true),
                        moment_term(mj.max(0.0), false),
                        moment_term(mid.abs(), mid < 0.0),
                    ] {
                        raise(13, v);
                    }
                    let v_u = f[1].abs().max(f[4].abs());
                    let vs_req = (v_u / mat.phi_shear - caps.vc_kn).max(0.0);
                    raise(14, over(vs_req, caps.vs_max_kn));
                }
                let face = rec.top_bars.area().min(rec.bot_bars.area());
                raise(15, under(face, caps.ast_min_mm2));
                raise(16, under(caps.eps_t, limits.min_tension_strain));
                raise(17, under(caps.clear_spacing_mm, caps.min_clear_spacing_mm));
                raise(18, under(s.depth_m, span / limits.beam_depth_divisor));
            }
        }
    }
    c
}

/// Terms `c_19` to `c_21`: story drifts and hinge rotations at the target
/// displacement of every level in `outcomes`.
pub fn performance_violations(
    sized: &SizedFrame<'_>,
    outcomes: &[LevelOutcome],
    tables: &AllowableTables,
    limits: &DesignLimits,
) -> [f64; CONSTRAINT_COUNT] {
    let model = sized.model;
    let lib = sized.library;
    let fc = lib.materials.fc_mpa;
    let mut c = [0.0; CONSTRAINT_COUNT];
    let mut missed = 0.0;
    let mut raise = |k: usize, v: f64| c[k - 1] = f64::max(c[k - 1], v);
    for outcome in outcomes {
        let (level, state) = match outcome {
            LevelOutcome::Reached { level, state } => (*level, state),
            LevelOutcome::Unreached { .. } => {
                missed += limits.unreached_violation;
                continue;
            }
        };
        let allowed = tables.drift_limit(level);
        for d in &state.drifts {
            raise(19, over(d.abs(), allowed));
        }
        for (e, (m, s)) in model.members.iter().zip(&sized.members).enumerate() {
            let f = &state.end_forces[e];
            let caps = &s.capacities;
            for (k, theta) in state.rotations[e].iter().enumerate() {
                let theta = theta.abs();
                if theta == 0.0 {
                    continue;
                }
                let moment = f[2 + 3 * k];
                let shear = f[1 + 3 * k];
                let (term, limit) = match m.kind {
                    MemberKind::Column => {
                        let demand = -f[3] * 1e3 / (caps.gross_area_mm2 * fc);
                        let width = s.width_m * 1e3;
                        let v = shear_ratio_psi(shear, width, caps.effective_depth_mm, fc);
                        (20, tables.rotation_limit(HingeKind::Column, demand, true, v, level))
                    }
                    MemberKind::Wall => {
                        let wall = lib.wall(s.catalog_id).expect("sized");
                        let t = wall.terms(&lib.materials, -f[3], shear.abs());
                        let v = t.shear * PSI_SHEAR_FACTOR;
                        (20, tables.rotation_limit(HingeKind::Wall, t.axial_flexural, t.has_boundary, v, level))
                    }
                    MemberKind::Beam => {
                        let hogging = if k == 0 { moment > 0.0 } else { moment < 0.0 };
                        let net = if hogging { caps.rho_prime - caps.rho } else { caps.rho - caps.rho_prime };
                        let demand = net / caps.rho_bal;
                        let width = s.width_m * 1e3;
                        let v = shear_ratio_psi(shear, width, caps.effective_depth_mm, fc);
                        (21, tables.rotation_limit(HingeKind::Beam, demand, true, v, level))
                    }
                };
                raise(term, over(theta, limit));
            }
        }
    }
    c[18] += missed;
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{apply_design, build_case, CaseId, DesignVector, FrameModel, GeometryConfig};
    use crate::sections::{Detailing, Materials, SectionCatalogs, SectionLibrary};

    fn setup() -> (FrameModel, SectionLibrary) {
        let m = Materials::default();
        let lib = SectionLibrary::new(&SectionCatalogs::builtin(&m), &m, &Detailing::default(), 5000.0).unwrap();
        (build_case(CaseId::Story4, &GeometryConfig::default()).unwrap(), lib)
    }

    fn quiet(model: &FrameModel) -> StrengthDemands {
        let n = model.members.len();
        StrengthDemands {
            states: vec![DemandState { label: "test".into(), end_forces: vec![[0.0; 6]; n], member_w: vec![0.0; n] }],
            elastic_drifts: vec![0.0; model.story_count()],
        }
    }

    #[test]
    fn axial_violation_by_hand() {
        let (model, lib) = setup();
        let sized = apply_design(&model, &lib, &DesignVector::uniform(&model, |_| 20)).unwrap();
        let col = model.column_at(0, 0).unwrap();
        let phi_pn = lib.materials.phi_compression * sized.members[col].capacities.pn_max_kn;
        let mut d = quiet(&model);
        d.states[0].end_forces[col][3] = -0.8 * phi_pn;
        assert_eq!(strength_violations(&sized, &d, &DesignLimits::default())[1], 0.0);
        d.states[0].end_forces[col][3] = -1.2 * phi_pn;
        let c = strength_violations(&sized, &d, &DesignLimits::default());
        assert!((c[1] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn drift_terms_by_hand() {
        let (model, lib) = setup();
        let sized = apply_design(&model, &lib, &DesignVector::uniform(&model, |_| 20)).unwrap();
        let mut d = quiet(&model);
        d.elastic_drifts[2] = 0.009;
        let c = strength_violations(&sized, &d, &DesignLimits::default());
        assert!((c[0] - 1.0).abs() < 1e-12);

        let n = model.members.len();
        let state = |drift: f64| PerformanceState {
            roof_disp: 0.0,
            base_shear: 0.0,
            story_disp: vec![0.0; 4],
            drifts: vec![0.001, drift, 0.0, 0.0],
            rotations: vec![[0.0; 2]; n],
            end_forces: vec![[0.0; 6]; n],
        };
        let t = AllowableTables::builtin();
        let lim = DesignLimits::default();
        let at_limit = [LevelOutcome::Reached { level: PerformanceLevel::LS, state: state(0.01) }];
        assert_eq!(performance_violations(&sized, &at_limit, &t, &lim), [0.0; CONSTRAINT_COUNT]);
        let beyond = [LevelOutcome::Reached { level: PerformanceLevel::LS, state: state(0.012) }];
        assert!(performance_violations(&sized, &beyond, &t, &lim)[18] >= 0.2 - 1e-12);
        let missed = [LevelOutcome::Unreached { level: PerformanceLevel::CP }];
        assert_eq!(performance_violations(&sized, &missed, &t, &lim)[18], 10.0);
    }

    #[test]
    fn column_steel_ratio_terms() {
        let (model, lib) = setup();
        let sized = apply_design(&model, &lib, &DesignVector::uniform(&model, |_| 1)).unwrap();
        let c = strength_violations(&sized, &quiet(&model), &DesignLimits::default());
        let rho = sized.members[model.column_at(0, 0).unwrap()].capacities.rho;
        assert_eq!(c[4], under(rho, 0.01));
        assert_eq!(c[5], 0.0);
    }

    #[test]
    fn stacked_column_sizes() {
        let (model, lib) = setup();
        let mut design = DesignVector::uniform(&model, |_| 10);
        design.columns[1] = 40;
        let sized = apply_design(&model, &lib, &design).unwrap();
        let c = strength_violations(&sized, &quiet(&model), &DesignLimits::default());
        let (top, bottom) = (sized.members[model.column_at(1, 0).unwrap()].width_m, sized.members[model.column_at(0, 0).unwrap()].width_m);
        assert!(top > bottom);
        assert!((c[6] - (top - bottom) / bottom).abs() < 1e-12);
        assert_eq!(c[6], c[7]);
    }

    #[test]
    fn beam_rotation_zero_gives_zero() {
        let (model, lib) = setup();
        let sized = apply_design(&model, &lib, &DesignVector::uniform(&model, |_| 10)).unwrap();
        let n = model.members.len();
        let mut rotations = vec![[0.0; 2]; n];
        let col = model.column_at(0, 0).unwrap();
        rotations[col] = [0.1, 0.0];
        let state = PerformanceState {
            roof_disp: 0.0,
            base_shear: 0.0,
            story_disp: vec![0.0; 4],
            drifts: vec![0.0; 4],
            rotations,
            end_forces: vec![[0.0; 6]; n],
        };
        let c = performance_violations(
            &sized,
            &[LevelOutcome::Reached { level: PerformanceLevel::IO, state }],
            &AllowableTables::builtin(),
            &DesignLimits::default(),
        );
        assert_eq!(c[20], 0.0);
        // Zero axial and shear: the first column row applies (IO 0.005).
        assert!((c[19] - (0.1 / 0.005 - 1.0)).abs() < 1e-9);
    }
}
