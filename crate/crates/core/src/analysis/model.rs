//! Translation of a sized frame into an analysis model.

use super::pushover::{axial_forces, Monitor};
use super::structure::{Element, HingeSpec, LoadCase, Structure};
use super::AnalysisError;
use crate::frame::{LoadCombination, MemberKind, SizedFrame};

/// Inverted-triangular floor force profile `F_k ∝ m_k·h_k`, summing to one.
pub fn lateral_pattern_from(masses: &[f64], elevations: &[f64]) -> Vec<f64> {
    let raw: Vec<f64> = masses.iter().zip(elevations).map(|(m, h)| m * h).collect();
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return vec![0.0; raw.len()];
    }
    raw.iter().map(|v| v / total).collect()
}

/// Floor force profile of a frame from its dead-load masses.
pub fn lateral_pattern(sized: &SizedFrame<'_>) -> Vec<f64> {
    let model = sized.model;
    let masses: Vec<f64> = (0..model.story_count()).map(|s| model.floor_mass(s)).collect();
    let elevations: Vec<f64> = model.stories.iter().map(|s| s.elevation_m).collect();
    lateral_pattern_from(&masses, &elevations)
}

/// Structure, load cases and monitoring data of one sized frame.
#[derive(Debug, Clone)]
pub struct FrameAnalysis {
    pub structure: Structure,
    pub dead: LoadCase,
    pub live: LoadCase,
    /// Nodal forces of the lateral pattern scaled to a unit base shear.
    pub lateral_unit: Vec<[f64; 3]>,
    pub pattern: Vec<f64>,
    pub masses: Vec<f64>,
    pub monitor: Monitor,
    /// Member axial force (tension positive) under the pushover gravity
    /// combination, from which column and wall hinge capacities follow.
    pub gravity_axial: Vec<f64>,
}

impl FrameAnalysis {
    pub fn new(sized: &SizedFrame<'_>) -> Result<Self, AnalysisError> {
        let model = sized.model;
        let lib = sized.library;
        let ec = lib.materials.ec_kpa();
        let elements: Vec<Element> = model
            .members
            .iter()
            .zip(&sized.members)
            .map(|(m, s)| {
                let mut el = Element::new(m.i, m.j, ec, s.gross_area_m2, s.i_eff_m4);
                match m.kind {
                    MemberKind::Beam => {}
                    MemberKind::Column => el.p_delta = true,
                    MemberKind::Wall => {
                        let half = model.wall_length_m(m.line) / 2.0;
                        el.offset_i = [half, 0.0];
                        el.offset_j = [half, 0.0];
                        el.p_delta = true;
                    }
                }
                el
            })
            .collect();
        let n_nodes = model.nodes.len();
        let restraints = (0..n_nodes).map(|n| [model.base_nodes().contains(&n); 3]).collect();
        let mut structure = Structure::new(model.nodes.clone(), restraints, &model.slaves, elements)?;

        let n_el = model.members.len();
        let mut dead = LoadCase::zeros(n_nodes, n_el);
        let mut live = LoadCase::zeros(n_nodes, n_el);
        for (e, m) in model.members.iter().enumerate() {
            let (wd, wl) = model.floor_line_loads(m.story);
            match m.kind {
                MemberKind::Beam => {
                    dead.member_w[e] = -wd;
                    live.member_w[e] = -wl;
                }
                MemberKind::Wall => {
                    let span = model.bays[m.line];
                    let level = m.story + 1;
                    for node in [model.node_id(level, m.line), model.node_id(level, m.line + 1)] {
                        dead.nodal[node][1] -= wd * span / 2.0;
                        live.nodal[node][1] -= wl * span / 2.0;
                    }
                }
                MemberKind::Column => {}
            }
        }

        let pattern = lateral_pattern(sized);
        let mut lateral_unit = vec![[0.0; 3]; n_nodes];
        for (k, share) in pattern.iter().enumerate() {
            let nodes = model.level_nodes(k + 1);
            let per = share / nodes.len() as f64;
            for n in nodes {
                lateral_unit[n][0] += per;
            }
        }

        let (fd, fl, _) = LoadCombination::GPbd.factors();
        let mut gravity = dead.scaled(fd);
        gravity.add_scaled(&live, fl);
        let gravity_axial = axial_forces(&structure, &gravity)?;
        for ((el, m), (s, &n)) in structure
            .elements
            .iter_mut()
            .zip(&model.members)
            .zip(sized.members.iter().zip(&gravity_axial))
        {
            let p_kn = -n;
            el.hinge = Some(match m.kind {
                MemberKind::Beam => HingeSpec { sagging: s.capacities.mn_pos_knm, hogging: s.capacities.mn_neg_knm },
                MemberKind::Column => {
                    HingeSpec::symmetric(lib.column(s.catalog_id).expect("sized").interaction.moment_at(p_kn))
                }
                MemberKind::Wall => HingeSpec::symmetric(lib.wall(s.catalog_id).expect("sized").interaction.moment_at(p_kn)),
            });
        }
        let structure = Structure::new(
            structure.nodes.clone(),
            structure.restraints.clone(),
            &model.slaves,
            structure.elements.clone(),
        )?;
        let monitor = Monitor {
            levels: (0..=model.story_count()).map(|l| model.level_nodes(l).collect()).collect(),
            story_heights: model.stories.iter().map(|s| s.height_m).collect(),
        };
        let masses = (0..model.story_count()).map(|s| model.floor_mass(s)).collect();
        Ok(Self { structure, dead, live, lateral_unit, pattern, masses, monitor, gravity_axial })
    }

    /// Gravity load case of a combination (earthquake term ignored).
    pub fn gravity(&self, combination: LoadCombination) -> LoadCase {
        let (fd, fl, _) = combination.factors();
        let mut g = self.dead.scaled(fd);
        g.add_scaled(&self.live, fl);
        g
    }

    /// Lateral load case with base shear `v` kN.
    pub fn quake(&self, v: f64) -> LoadCase {
        let mut q = LoadCase::zeros(self.structure.nodes.len(), self.structure.elements.len());
        q.nodal = self.lateral_unit.iter().map(|f| [f[0] * v, 0.0, 0.0]).collect();
        q
    }

    /// Mean horizontal displacement of each floor above the base.
    pub fn floor_displacements(&self, nodal: &[[f64; 3]]) -> Vec<f64> {
        self.monitor.levels[1..]
            .iter()
            .map(|nodes| nodes.iter().map(|&n| nodal[n][0]).sum::<f64>() / nodes.len() as f64)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::structure::linear_static;
    use crate::frame::{apply_design, build_case, CaseId, DesignVector, GeometryConfig};
    use crate::sections::{Detailing, Materials, SectionCatalogs, SectionLibrary};
    use approx::assert_relative_eq;

    #[test]
    fn pattern_by_hand() {
        let p = lateral_pattern_from(&[1.0, 1.0, 1.0], &[3.0, 6.0, 9.0]);
        for (a, b) in p.iter().zip([1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0]) {
            assert_relative_eq!(*a, b, max_relative = 1e-12);
        }
        assert_eq!(lateral_pattern_from(&[7.0], &[3.0]), vec![1.0]);
        let q = lateral_pattern_from(&[2.0, 2.0, 2.0], &[3.0, 6.0, 9.0]);
        assert_eq!(p, q);
    }

    fn library() -> SectionLibrary {
        let m = Materials::default();
        SectionLibrary::new(&SectionCatalogs::builtin(&m), &m, &Detailing::default(), 5000.0).unwrap()
    }

    #[test]
    fn gravity_reactions_balance_floor_loads() {
        let lib = library();
        let model = build_case(CaseId::Story4, &GeometryConfig::default()).unwrap();
        let sized = apply_design(&model, &lib, &DesignVector::uniform(&model, |_| 10)).unwrap();
        let fa = FrameAnalysis::new(&sized).unwrap();
        let sol = &linear_static(&fa.structure, &[fa.dead.clone()]).unwrap()[0];
        let base_axial: f64 = model
            .members
            .iter()
            .enumerate()
            .filter(|(_, m)| m.story == 0 && m.kind != MemberKind::Beam)
            .map(|(e, _)| -sol.end_forces[e][3])
            .sum();
        let total = model.stories[0].dead_kn_m2 * 5.0 * 20.0 * 4.0;
        assert_relative_eq!(base_axial, total, max_relative = 1e-9);
        assert_relative_eq!(fa.seismic_weight_check(), total, max_relative = 1e-12);
    }

    impl FrameAnalysis {
        fn seismic_weight_check(&self) -> f64 {
            self.masses.iter().sum::<f64>() * crate::frame::GRAVITY
        }
    }

    #[test]
    fn lateral_unit_sums_to_one() {
        let lib = library();
        let model = build_case(CaseId::Story8, &GeometryConfig::default()).unwrap();
        let sized = apply_design(&model, &lib, &DesignVector::uniform(&model, |_| 5)).unwrap();
        let fa = FrameAnalysis::new(&sized).unwrap();
        let total: f64 = fa.lateral_unit.iter().map(|f| f[0]).sum();
        assert_relative_eq!(total, 1.0, max_relative = 1e-12);
        let q = fa.quake(250.0);
        let sum: f64 = q.nodal.iter().map(|f| f[0]).sum();
        assert_relative_eq!(sum, 250.0, max_relative = 1e-12);
    }
}
