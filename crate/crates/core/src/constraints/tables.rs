//! Allowable drift ratios and plastic hinge rotations per performance level.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

const BUILTIN: &str = include_str!("../../data/allowables.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PerformanceLevel {
    #[serde(rename = "IO", alias = "io")]
    IO,
    #[serde(rename = "LS", alias = "ls")]
    LS,
    #[serde(rename = "CP", alias = "cp")]
    CP,
}

impl PerformanceLevel {
    pub const ALL: [PerformanceLevel; 3] = [Self::IO, Self::LS, Self::CP];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn tag(self) -> &'static str {
        match self {
            Self::IO => "IO",
            Self::LS => "LS",
            Self::CP => "CP",
        }
    }
}

impl fmt::Display for PerformanceLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for PerformanceLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().replace(['-', '_'], "").as_str() {
            "IO" => Ok(Self::IO),
            "LS" => Ok(Self::LS),
            "CP" => Ok(Self::CP),
            _ => Err(format!("unknown performance level `{s}` (expected IO, LS or CP)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HingeKind {
    Column,
    Beam,
    Wall,
}

impl HingeKind {
    pub const ALL: [HingeKind; 3] = [Self::Column, Self::Beam, Self::Wall];

    fn tag(self) -> &'static str {
        match self {
            Self::Column => "column",
            Self::Beam => "beam",
            Self::Wall => "wall",
        }
    }
}

impl fmt::Display for HingeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Error)]
pub enum TableError {
    #[error("allowables line {line}: {message}")]
    Row { line: usize, message: String },
    #[error("allowables: {0}")]
    Incomplete(String),
    #[error("allowables: {0}")]
    Io(#[from] std::io::Error),
    #[error("allowables: {0}")]
    Csv(#[from] csv::Error),
}

/// One printed row: band edges plus IO/LS/CP limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub demand_ratio: f64,
    /// Conforming transverse reinforcement (`C`) or boundary confinement (`YES`).
    pub confined: bool,
    pub shear_ratio: f64,
    pub limits: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllowableTables {
    pub drift_limits: [f64; 3],
    pub column_rows: Vec<TableRow>,
    pub beam_rows: Vec<TableRow>,
    pub wall_rows: Vec<TableRow>,
}

#[derive(Debug, Deserialize)]
struct RawRow {
    kind: String,
    demand_ratio: Option<f64>,
    confinement: Option<String>,
    shear_ratio: Option<f64>,
    #[serde(rename = "IO")]
    io: f64,
    #[serde(rename = "LS")]
    ls: f64,
    #[serde(rename = "CP")]
    cp: f64,
}

enum Parsed {
    Drift([f64; 3]),
    Hinge(HingeKind, TableRow),
}

fn parse_confinement(s: &str) -> Option<bool> {
    match s.trim().to_ascii_uppercase().as_str() {
        "C" | "YES" | "Y" | "TRUE" => Some(true),
        "NC" | "NO" | "N" | "FALSE" => Some(false),
        _ => None,
    }
}

fn parse_rows(text: &str) -> Result<Vec<(usize, Parsed)>, TableError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (k, rec) in reader.deserialize::<RawRow>().enumerate() {
        let line = k + 2;
        let raw = rec.map_err(|e| TableError::Row { line, message: e.to_string() })?;
        let limits = [raw.io, raw.ls, raw.cp];
        if limits.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(TableError::Row { line, message: format!("limits must be positive, got {limits:?}") });
        }
        let parsed = match raw.kind.to_ascii_lowercase().as_str() {
            "drift" => Parsed::Drift(limits),
            kind => {
                let hinge = match kind {
                    "column" => HingeKind::Column,
                    "beam" => HingeKind::Beam,
                    "wall" => HingeKind::Wall,
                    other => return Err(TableError::Row { line, message: format!("unknown kind `{other}`") }),
                };
                let missing = |what: &str| TableError::Row { line, message: format!("{hinge} row without {what}") };
                let confined = raw
                    .confinement
                    .as_deref()
                    .and_then(parse_confinement)
                    .ok_or_else(|| missing("a confinement flag"))?;
                Parsed::Hinge(
                    hinge,
                    TableRow {
                        demand_ratio: raw.demand_ratio.ok_or_else(|| missing("a demand ratio"))?,
                        confined,
                        shear_ratio: raw.shear_ratio.ok_or_else(|| missing("a shear ratio"))?,
                        limits,
                    },
                )
            }
        };
        out.push((line, parsed));
    }
    Ok(out)
}

/// Sorted distinct values.
fn axis(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Index `i` and weight `t` with `x` between `grid[i]` and `grid[i+1]`,
/// clamped to the grid.
fn bracket(grid: &[f64], x: f64) -> (usize, f64) {
    if grid.len() < 2 || x <= grid[0] {
        return (0, 0.0);
    }
    let last = grid.len() - 1;
    if x >= grid[last] {
        return (last - 1, 1.0);
    }
    let i = grid.partition_point(|g| *g <= x) - 1;
    (i, (x - grid[i]) / (grid[i + 1] - grid[i]))
}

impl AllowableTables {
    /// The tables shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_csv_str(BUILTIN).expect("shipped allowables are valid")
    }

    pub fn from_csv_str(text: &str) -> Result<Self, TableError> {
        let mut drift = None;
        let mut tables = Self { drift_limits: [0.0; 3], column_rows: vec![], beam_rows: vec![], wall_rows: vec![] };
        for (line, row) in parse_rows(text)? {
            match row {
                Parsed::Drift(l) => {
                    if drift.replace(l).is_some() {
                        return Err(TableError::Row { line, message: "duplicate drift row".into() });
                    }
                }
                Parsed::Hinge(kind, r) => tables.rows_mut(kind).push(r),
            }
        }
        tables.drift_limits = drift.ok_or_else(|| TableError::Incomplete("no drift row".into()))?;
        tables.check_grids()?;
        Ok(tables)
    }

    pub fn from_path(path: &Path) -> Result<Self, TableError> {
        Self::from_csv_str(&std::fs::read_to_string(path)?)
    }

    /// Replaces the cells named in `text` (same layout as the table file) and
    /// returns one description per substituted value.
    pub fn apply_overrides(&mut self, text: &str) -> Result<Vec<String>, TableError> {
        let mut log = Vec::new();
        for (line, row) in parse_rows(text)? {
            match row {
                Parsed::Drift(l) => {
                    for lvl in PerformanceLevel::ALL {
                        let old = self.drift_limits[lvl.index()];
                        if old != l[lvl.index()] {
                            log.push(format!("drift {lvl}: {old} -> {}", l[lvl.index()]));
                        }
                    }
                    self.drift_limits = l;
                }
                Parsed::Hinge(kind, r) => {
                    let target = self
                        .rows_mut(kind)
                        .iter_mut()
                        .find(|t| t.demand_ratio == r.demand_ratio && t.confined == r.confined && t.shear_ratio == r.shear_ratio)
                        .ok_or_else(|| TableError::Row { line, message: format!("no {kind} row matches the override") })?;
                    for lvl in PerformanceLevel::ALL {
                        let (old, new) = (target.limits[lvl.index()], r.limits[lvl.index()]);
                        if old != new {
                            log.push(format!(
                                "{kind} ({}, {}, {}) {lvl}: {old} -> {new}",
                                r.demand_ratio, r.confined, r.shear_ratio
                            ));
                        }
                    }
                    target.limits = r.limits;
                }
            }
        }
        Ok(log)
    }

    pub fn rows(&self, kind: HingeKind) -> &[TableRow] {
        match kind {
            HingeKind::Column => &self.column_rows,
            HingeKind::Beam => &self.beam_rows,
            HingeKind::Wall => &self.wall_rows,
        }
    }

    fn rows_mut(&mut self, kind: HingeKind) -> &mut Vec<TableRow> {
        match kind {
            HingeKind::Column => &mut self.column_rows,
            HingeKind::Beam => &mut self.beam_rows,
            HingeKind::Wall => &mut self.wall_rows,
        }
    }

    /// Every (kind, confinement) subset must form a full demand × shear grid.
    fn check_grids(&self) -> Result<(), TableError> {
        for kind in HingeKind::ALL {
            let rows = self.rows(kind);
            if rows.is_empty() {
                return Err(TableError::Incomplete(format!("no {kind} rows")));
            }
            for confined in [true, false] {
                let subset: Vec<&TableRow> = rows.iter().filter(|r| r.confined == confined).collect();
                if subset.is_empty() {
                    continue;
                }
                let d = axis(subset.iter().map(|r| r.demand_ratio));
                let s = axis(subset.iter().map(|r| r.shear_ratio));
                if subset.len() != d.len() * s.len() {
                    return Err(TableError::Incomplete(format!(
                        "{kind} rows do not form a complete demand-ratio by shear-ratio grid"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Rows whose limits decrease from IO to LS or from LS to CP.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let l = self.drift_limits;
        if !(l[0] <= l[1] && l[1] <= l[2]) {
            out.push(format!("drift limits are not nondecreasing from IO to CP: {l:?}"));
        }
        for kind in HingeKind::ALL {
            for (k, r) in self.rows(kind).iter().enumerate() {
                let l = r.limits;
                if !(l[0] <= l[1] && l[1] <= l[2]) {
                    out.push(format!(
                        "{kind} row {} (demand {}, shear {}) is not nondecreasing from IO to CP: {:?}",
                        k + 1,
                        r.demand_ratio,
                        r.shear_ratio,
                        l
                    ));
                }
            }
        }
        out
    }

    /// Number of hinge-rotation and drift cells.
    pub fn cell_count(&self) -> usize {
        3 + 3 * HingeKind::ALL.iter().map(|k| self.rows(*k).len()).sum::<usize>()
    }

    pub fn drift_limit(&self, level: PerformanceLevel) -> f64 {
        self.drift_limits[level.index()]
    }

    /// Allowable plastic rotation, rad, interpolated bilinearly between the
    /// bounding band edges and clamped outside them. A confinement flag with
    /// no rows of its own falls back to the rows that exist.
    pub fn rotation_limit(
        &self,
        kind: HingeKind,
        demand_ratio: f64,
        confined: bool,
        shear_ratio: f64,
        level: PerformanceLevel,
    ) -> f64 {
        let all = self.rows(kind);
        let mut subset: Vec<&TableRow> = all.iter().filter(|r| r.confined == confined).collect();
        if subset.is_empty() {
            subset = all.iter().collect();
        }
        let d = axis(subset.iter().map(|r| r.demand_ratio));
        let s = axis(subset.iter().map(|r| r.shear_ratio));
        let cell = |di: usize, si: usize| {
            subset
                .iter()
                .find(|r| r.demand_ratio == d[di] && r.shear_ratio == s[si])
                .map(|r| r.limits[level.index()])
                .expect("complete grid")
        };
        let (di, dt) = bracket(&d, demand_ratio);
        let (si, st) = bracket(&s, shear_ratio);
        let d1 = (di + 1).min(d.len() - 1);
        let s1 = (si + 1).min(s.len() - 1);
        let lo = cell(di, si) + st * (cell(di, s1) - cell(di, si));
        let hi = cell(d1, si) + st * (cell(d1, s1) - cell(d1, si));
        lo + dt * (hi - lo)
    }
}
