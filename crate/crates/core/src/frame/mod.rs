//! Frame topology, member grouping, gravity loads and the weight objective.
//!
//! Nodes sit on a regular grid of column lines and floor levels; node
//! `level·(bays+1) + line` is the intersection of floor `level` (0 = base)
//! and column line `line`. Shear walls occupy a whole bay: each wall story is
//! a wide-column line element hung from the left edge of the bay by rigid
//! arms, and the right-edge nodes of the bay are slaved to the left-edge
//! nodes so the floor section stays plane.

mod design;
mod loads;

pub use design::{apply_design, member_weight, structure_weight, DesignError, DesignVector, MemberSizing, SizedFrame};
pub use loads::{factored_load, LoadCombination};

use crate::sections::SectionKind;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Standard gravity, m/s².
pub const GRAVITY: f64 = 9.81;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("unknown case `{0}` (expected story4, story8 or story12)")]
    UnknownCase(String),
    #[error("invalid geometry: {0}")]
    Geometry(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseId {
    Story4,
    Story8,
    Story12,
}

impl CaseId {
    pub const ALL: [CaseId; 3] = [CaseId::Story4, CaseId::Story8, CaseId::Story12];

    /// Stories, bays and (zero-based) wall bays.
    pub fn layout(self) -> FrameLayout {
        let (stories, bays, wall_bays) = match self {
            CaseId::Story4 => (4, 4, vec![1, 3]),
            CaseId::Story8 => (8, 3, vec![1]),
            CaseId::Story12 => (12, 3, vec![1]),
        };
        FrameLayout { stories, bays, wall_bays, grouping: Grouping::PerStory }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseId::Story4 => "story4",
            CaseId::Story8 => "story8",
            CaseId::Story12 => "story12",
        })
    }
}

impl FromStr for CaseId {
    type Err = FrameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "story4" => Ok(CaseId::Story4),
            "story8" => Ok(CaseId::Story8),
            "story12" => Ok(CaseId::Story12),
            other => Err(FrameError::UnknownCase(other.to_string())),
        }
    }
}

/// Dimensions and floor loads shared by every story.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub bay_width_m: f64,
    pub story_height_m: f64,
    pub dead_kg_m2: f64,
    pub live_kg_m2: f64,
    pub tributary_width_m: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            bay_width_m: 5.0,
            story_height_m: 3.0,
            dead_kg_m2: 600.0,
            live_kg_m2: 200.0,
            tributary_width_m: 5.0,
        }
    }
}

impl GeometryConfig {
    pub fn validate(&self) -> Result<(), FrameError> {
        for (name, value) in [
            ("bay_width_m", self.bay_width_m),
            ("story_height_m", self.story_height_m),
            ("tributary_width_m", self.tributary_width_m),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(FrameError::Geometry(format!("{name} must be positive, got {value}")));
            }
        }
        for (name, value) in [("dead_kg_m2", self.dead_kg_m2), ("live_kg_m2", self.live_kg_m2)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(FrameError::Geometry(format!("{name} must be nonnegative, got {value}")));
            }
        }
        Ok(())
    }
}

/// How members are collected into design variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Grouping {
    /// One group per story for each member kind.
    #[default]
    PerStory,
    /// A single group for each member kind.
    PerKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameLayout {
    pub stories: usize,
    pub bays: usize,
    /// Zero-based indices of bays holding a shear wall.
    #[serde(default)]
    pub wall_bays: Vec<usize>,
    #[serde(default)]
    pub grouping: Grouping,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MemberKind {
    Beam,
    Column,
    Wall,
}

impl MemberKind {
    pub const ALL: [MemberKind; 3] = [MemberKind::Beam, MemberKind::Column, MemberKind::Wall];

    pub fn section_kind(self) -> SectionKind {
        match self {
            MemberKind::Beam => SectionKind::Beam,
            MemberKind::Column => SectionKind::Column,
            MemberKind::Wall => SectionKind::Wall,
        }
    }

    pub(crate) fn index(self) -> usize {
        match self {
            MemberKind::Beam => 0,
            MemberKind::Column => 1,
            MemberKind::Wall => 2,
        }
    }
}

impl fmt::Display for MemberKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.section_kind().fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub kind: MemberKind,
    pub i: usize,
    pub j: usize,
    /// Zero-based story; a beam belongs to the story below its floor.
    pub story: usize,
    /// Column line for columns, bay index for beams and walls.
    pub line: usize,
    /// Group index within the member kind.
    pub group: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Story {
    pub height_m: f64,
    /// Height of the floor above the base, m.
    pub elevation_m: f64,
    pub dead_kn_m2: f64,
    pub live_kn_m2: f64,
    pub tributary_width_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameModel {
    /// Node coordinates `(x, y)`, m.
    pub nodes: Vec<[f64; 2]>,
    pub members: Vec<Member>,
    pub stories: Vec<Story>,
    pub bays: Vec<f64>,
    pub wall_bays: Vec<usize>,
    /// `(slave, master)` node pairs for the right edge of wall bays.
    pub slaves: Vec<(usize, usize)>,
    group_counts: [usize; 3],
}

/// Builds one of the three case-study frames.
pub fn build_case(case: CaseId, geometry: &GeometryConfig) -> Result<FrameModel, FrameError> {
    build_frame(&case.layout(), geometry)
}

/// Builds a regular frame from an arbitrary layout.
pub fn build_frame(layout: &FrameLayout, geometry: &GeometryConfig) -> Result<FrameModel, FrameError> {
    geometry.validate()?;
    if layout.stories == 0 || layout.bays == 0 {
        return Err(FrameError::Geometry("a frame needs at least one story and one bay".into()));
    }
    let mut wall_bays = layout.wall_bays.clone();
    wall_bays.sort_unstable();
    wall_bays.dedup();
    if let Some(&b) = wall_bays.iter().find(|&&b| b >= layout.bays) {
        return Err(FrameError::Geometry(format!("wall bay {} outside a {}-bay frame", b + 1, layout.bays)));
    }
    let ns = layout.stories;
    let nl = layout.bays + 1;
    let node = |level: usize, line: usize| level * nl + line;
    let nodes = (0..=ns)
        .flat_map(|level| {
            (0..nl).map(move |line| [line as f64 * geometry.bay_width_m, level as f64 * geometry.story_height_m])
        })
        .collect();
    let group = |story: usize| match layout.grouping {
        Grouping::PerStory => story,
        Grouping::PerKind => 0,
    };
    let mut members = Vec::new();
    for story in 0..ns {
        for line in 0..nl {
            members.push(Member {
                kind: MemberKind::Column,
                i: node(story, line),
                j: node(story + 1, line),
                story,
                line,
                group: group(story),
            });
        }
        for bay in 0..layout.bays {
            let kind = if wall_bays.contains(&bay) { MemberKind::Wall } else { MemberKind::Beam };
            let (i, j) = match kind {
                MemberKind::Wall => (node(story, bay), node(story + 1, bay)),
                _ => (node(story + 1, bay), node(story + 1, bay + 1)),
            };
            members.push(Member { kind, i, j, story, line: bay, group: group(story) });
        }
    }
    let per_kind = match layout.grouping {
        Grouping::PerStory => ns,
        Grouping::PerKind => 1,
    };
    let has_beams = wall_bays.len() < layout.bays;
    let group_counts = [
        if has_beams { per_kind } else { 0 },
        per_kind,
        if wall_bays.is_empty() { 0 } else { per_kind },
    ];
    let slaves = (1..=ns)
        .flat_map(|level| wall_bays.iter().map(move |&b| (node(level, b + 1), node(level, b))))
        .collect();
    let stories = (0..ns)
        .map(|s| Story {
            height_m: geometry.story_height_m,
            elevation_m: (s + 1) as f64 * geometry.story_height_m,
            dead_kn_m2: geometry.dead_kg_m2 * GRAVITY / 1000.0,
            live_kn_m2: geometry.live_kg_m2 * GRAVITY / 1000.0,
            tributary_width_m: geometry.tributary_width_m,
        })
        .collect();
    Ok(FrameModel {
        nodes,
        members,
        stories,
        bays: vec![geometry.bay_width_m; layout.bays],
        wall_bays,
        slaves,
        group_counts,
    })
}

impl FrameModel {
    pub fn story_count(&self) -> usize {
        self.stories.len()
    }

    pub fn line_count(&self) -> usize {
        self.bays.len() + 1
    }

    pub fn node_id(&self, level: usize, line: usize) -> usize {
        level * self.line_count() + line
    }

    /// Nodes of floor `level`, left to right.
    pub fn level_nodes(&self, level: usize) -> std::ops::Range<usize> {
        let nl = self.line_count();
        level * nl..(level + 1) * nl
    }

    pub fn base_nodes(&self) -> std::ops::Range<usize> {
        self.level_nodes(0)
    }

    pub fn group_count(&self, kind: MemberKind) -> usize {
        self.group_counts[kind.index()]
    }

    /// Total number of design variables.
    pub fn dimension(&self) -> usize {
        self.group_counts.iter().sum()
    }

    pub fn member_length(&self, index: usize) -> f64 {
        let m = &self.members[index];
        let [xi, yi] = self.nodes[m.i];
        let [xj, yj] = self.nodes[m.j];
        (xj - xi).hypot(yj - yi)
    }

    /// Plan length of the wall in bay `bay`, m.
    pub fn wall_length_m(&self, bay: usize) -> f64 {
        self.bays[bay]
    }

    pub fn is_wall_bay(&self, bay: usize) -> bool {
        self.wall_bays.binary_search(&bay).is_ok()
    }

    /// Floor mass at the top of `story`, tonnes, from the dead load.
    pub fn floor_mass(&self, story: usize) -> f64 {
        let s = &self.stories[story];
        let span: f64 = self.bays.iter().sum();
        s.dead_kn_m2 * s.tributary_width_m * span / GRAVITY
    }

    /// Total dead load carried by the floors, kN.
    pub fn seismic_weight(&self) -> f64 {
        (0..self.story_count()).map(|s| self.floor_mass(s) * GRAVITY).sum()
    }

    /// Beam line load `(dead, live)` of the floor above `story`, kN/m.
    pub fn floor_line_loads(&self, story: usize) -> (f64, f64) {
        let s = &self.stories[story];
        (s.dead_kn_m2 * s.tributary_width_m, s.live_kn_m2 * s.tributary_width_m)
    }

    /// Members of `kind` in group `group`.
    pub fn group_members(&self, kind: MemberKind, group: usize) -> impl Iterator<Item = usize> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter(move |(_, m)| m.kind == kind && m.group == group)
            .map(|(i, _)| i)
    }

    /// Column below floor `level` on `line`, if any.
    pub fn column_at(&self, story: usize, line: usize) -> Option<usize> {
        self.members
            .iter()
            .position(|m| m.kind == MemberKind::Column && m.story == story && m.line == line)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_layouts() {
        let g = GeometryConfig::default();
        let f = build_case(CaseId::Story4, &g).unwrap();
        assert_eq!((f.story_count(), f.bays.len()), (4, 4));
        assert_eq!(f.wall_bays, vec![1, 3]);
        for (case, ns, nb) in [(CaseId::Story8, 8, 3), (CaseId::Story12, 12, 3)] {
            let f = build_case(case, &g).unwrap();
            assert_eq!((f.story_count(), f.bays.len()), (ns, nb));
            assert_eq!(f.wall_bays, vec![1]);
        }
    }

    #[test]
    fn node_count_matches_grid() {
        let g = GeometryConfig::default();
        for case in CaseId::ALL {
            let l = case.layout();
            let f = build_case(case, &g).unwrap();
            assert_eq!(f.nodes.len(), (l.stories + 1) * (l.bays + 1));
        }
    }

    #[test]
    fn members_and_groups() {
        let f = build_case(CaseId::Story4, &GeometryConfig::default()).unwrap();
        let count = |k| f.members.iter().filter(|m| m.kind == k).count();
        assert_eq!(count(MemberKind::Column), 20);
        assert_eq!(count(MemberKind::Beam), 8);
        assert_eq!(count(MemberKind::Wall), 8);
        assert_eq!(f.dimension(), 12);
        assert_eq!(f.slaves.len(), 8);
        for m in &f.members {
            assert!(m.i < f.nodes.len() && m.j < f.nodes.len());
            assert!(m.group < f.group_count(m.kind));
        }
        assert_eq!(f.group_members(MemberKind::Column, 0).count(), 5);
    }

    #[test]
    fn floor_loads_convert_with_gravity() {
        let f = build_case(CaseId::Story8, &GeometryConfig::default()).unwrap();
        let s = f.stories[0];
        assert!((s.dead_kn_m2 - 5.886).abs() < 1e-12);
        assert!((s.live_kn_m2 - 1.962).abs() < 1e-12);
        assert!((f.floor_mass(0) - 600.0 * 5.0 * 15.0 / 1000.0).abs() < 1e-9);
    }

    #[test]
    fn unknown_case_and_bad_geometry() {
        assert!("story5".parse::<CaseId>().is_err());
        assert_eq!("Story12".parse::<CaseId>().unwrap(), CaseId::Story12);
        let bad = GeometryConfig { story_height_m: 0.0, ..Default::default() };
        assert!(build_case(CaseId::Story4, &bad).is_err());
        let layout = FrameLayout { stories: 2, bays: 1, wall_bays: vec![1], grouping: Grouping::PerKind };
        assert!(build_frame(&layout, &GeometryConfig::default()).is_err());
    }

    #[test]
    fn build_is_deterministic() {
        let g = GeometryConfig::default();
        assert_eq!(build_case(CaseId::Story12, &g).unwrap(), build_case(CaseId::Story12, &g).unwrap());
    }
}
