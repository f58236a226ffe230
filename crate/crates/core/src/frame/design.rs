use super::{FrameModel, MemberKind};
use crate::sections::{Materials, SectionCapacities, SectionLibrary};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DesignError {
    #[error("{kind} groups: expected {expected} ids, got {found}")]
    WrongLength { kind: MemberKind, expected: usize, found: usize },
    #[error("{kind} group {group}: id {id} outside catalog range 1..={max}")]
    OutOfRange { kind: MemberKind, group: usize, id: u32, max: usize },
    #[error("wall in bay {bay} is {frame_mm} mm long but capacities were derived for {library_mm} mm")]
    WallLength { bay: usize, frame_mm: f64, library_mm: f64 },
}

/// One catalog id per member group, ordered beams, columns, walls.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub struct DesignVector {
    pub beams: Vec<u32>,
    pub columns: Vec<u32>,
    pub walls: Vec<u32>,
}

impl DesignVector {
    pub fn ids(&self, kind: MemberKind) -> &[u32] {
        match kind {
            MemberKind::Beam => &self.beams,
            MemberKind::Column => &self.columns,
            MemberKind::Wall => &self.walls,
        }
    }

    /// Splits a flat genotype according to the frame's group counts.
    pub fn from_flat(model: &FrameModel, flat: &[u32]) -> Result<Self, DesignError> {
        let nb = model.group_count(MemberKind::Beam);
        let nc = model.group_count(MemberKind::Column);
        let nw = model.group_count(MemberKind::Wall);
        if flat.len() != nb + nc + nw {
            let kind = if flat.len() < nb { MemberKind::Beam } else { MemberKind::Wall };
            return Err(DesignError::WrongLength { kind, expected: nb + nc + nw, found: flat.len() });
        }
        Ok(Self {
            beams: flat[..nb].to_vec(),
            columns: flat[nb..nb + nc].to_vec(),
            walls: flat[nb + nc..].to_vec(),
        })
    }

    pub fn to_flat(&self) -> Vec<u32> {
        self.beams.iter().chain(&self.columns).chain(&self.walls).copied().collect()
    }

    /// Every group set to `pick(kind)`.
    pub fn uniform(model: &FrameModel, mut pick: impl FnMut(MemberKind) -> u32) -> Self {
        let fill = |kind: MemberKind, pick: &mut dyn FnMut(MemberKind) -> u32| {
            vec![pick(kind); model.group_count(kind)]
        };
        Self {
            beams: fill(MemberKind::Beam, &mut pick),
            columns: fill(MemberKind::Column, &mut pick),
            walls: fill(MemberKind::Wall, &mut pick),
        }
    }
}

impl std::fmt::Display for DesignVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let join = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
        write!(f, "beams [{}] columns [{}] walls [{}]", join(&self.beams), join(&self.columns), join(&self.walls))
    }
}

/// Section data resolved for one member, in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemberSizing {
    pub catalog_id: u32,
    /// Dimension in the plane of the frame.
    pub depth_m: f64,
    /// Dimension out of plane.
    pub width_m: f64,
    pub gross_area_m2: f64,
    pub steel_area_m2: f64,
    pub i_eff_m4: f64,
    /// Capacities at zero axial load.
    pub capacities: SectionCapacities,
}

/// A frame with a section assigned to every member.
#[derive(Debug, Clone)]
pub struct SizedFrame<'a> {
    pub model: &'a FrameModel,
    pub library: &'a SectionLibrary,
    pub design: DesignVector,
    pub members: Vec<MemberSizing>,
}

pub fn apply_design<'a>(
    model: &'a FrameModel,
    library: &'a SectionLibrary,
    design: &DesignVector,
) -> Result<SizedFrame<'a>, DesignError> {
    for kind in MemberKind::ALL {
        let ids = design.ids(kind);
        if ids.len() != model.group_count(kind) {
            return Err(DesignError::WrongLength { kind, expected: model.group_count(kind), found: ids.len() });
        }
        let max = library.count(kind.section_kind());
        if let Some((group, &id)) = ids.iter().enumerate().find(|(_, &id)| id == 0 || id as usize > max) {
            return Err(DesignError::OutOfRange { kind, group, id, max });
        }
    }
    for &bay in &model.wall_bays {
        let frame_mm = model.wall_length_m(bay) * 1000.0;
        if (frame_mm - library.wall_length_mm).abs() > 1e-6 {
            return Err(DesignError::WallLength { bay, frame_mm, library_mm: library.wall_length_mm });
        }
    }
    let members = model
        .members
        .iter()
        .map(|m| {
            let id = design.ids(m.kind)[m.group];
            match m.kind {
                MemberKind::Beam => {
                    let s = library.beam(id).expect("range checked");
                    let caps = s.capacities;
                    MemberSizing {
                        catalog_id: id,
                        depth_m: s.record.depth_mm * 1e-3,
                        width_m: s.record.width_mm * 1e-3,
                        gross_area_m2: caps.gross_area_mm2 * 1e-6,
                        steel_area_m2: caps.steel_area_mm2 * 1e-6,
                        i_eff_m4: caps.i_eff_mm4 * 1e-12,
                        capacities: caps,
                    }
                }
                MemberKind::Column => {
                    let s = library.column(id).expect("range checked");
                    let caps = s.capacities;
                    MemberSizing {
                        catalog_id: id,
                        depth_m: s.record.side_mm * 1e-3,
                        width_m: s.record.side_mm * 1e-3,
                        gross_area_m2: caps.gross_area_mm2 * 1e-6,
                        steel_area_m2: caps.steel_area_mm2 * 1e-6,
                        i_eff_m4: caps.i_eff_mm4 * 1e-12,
                        capacities: caps,
                    }
                }
                MemberKind::Wall => {
                    let s = library.wall(id).expect("range checked");
                    let caps = s.capacities;
                    MemberSizing {
                        catalog_id: id,
                        depth_m: s.length_mm * 1e-3,
                        width_m: s.record.t_w_mm * 1e-3,
                        gross_area_m2: caps.gross_area_mm2 * 1e-6,
                        steel_area_m2: caps.steel_area_mm2 * 1e-6,
                        i_eff_m4: caps.i_eff_mm4 * 1e-12,
                        capacities: caps,
                    }
                }
            }
        })
        .collect();
    Ok(SizedFrame { model, library, design: design.clone(), members })
}

/// Mass of a prismatic member, kg: concrete over the gross area plus steel.
pub fn member_weight(length_m: f64, gross_area_m2: f64, steel_area_m2: f64, materials: &Materials) -> f64 {
    length_m * (materials.rho_concrete * gross_area_m2 + materials.rho_steel * steel_area_m2)
}

/// Total steel and concrete mass of the frame, kg.
pub fn structure_weight(sized: &SizedFrame<'_>) -> f64 {
    let materials = &sized.library.materials;
    sized
        .members
        .iter()
        .enumerate()
        .map(|(i, s)| member_weight(sized.model.member_length(i), s.gross_area_m2, s.steel_area_m2, materials))
        .sum()
}
