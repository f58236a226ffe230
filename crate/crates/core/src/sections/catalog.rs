use super::{BarSet, Materials};
use csv::StringRecord;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use thiserror::Error;

const BUILTIN_BEAMS: &str = include_str!("../../data/beams.csv");
const BUILTIN_COLUMNS: &str = include_str!("../../data/columns.csv");
const BUILTIN_WALLS: &str = include_str!("../../data/walls.csv");

/// Wall length used only to rank wall rows by weight inside their catalog.
const WALL_ORDERING_LENGTH_MM: f64 = 5000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SectionKind {
    Beam,
    Column,
    Wall,
}

impl fmt::Display for SectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SectionKind::Beam => "beam",
            SectionKind::Column => "column",
            SectionKind::Wall => "wall",
        })
    }
}

impl SectionKind {
    /// Identifies the catalog kind from a header line.
    pub fn detect(header_line: &str) -> Option<SectionKind> {
        let names: Vec<&str> = header_line.split(',').map(str::trim).collect();
        let matches = |expected: &[&str]| {
            names.len() == expected.len() && expected.iter().all(|e| names.contains(e))
        };
        if matches(BeamSection::HEADER) {
            Some(SectionKind::Beam)
        } else if matches(ColumnSection::HEADER) {
            Some(SectionKind::Column)
        } else if matches(WallSection::HEADER) {
            Some(SectionKind::Wall)
        } else {
            None
        }
    }
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{kind} catalog: malformed CSV: {source}")]
    Csv {
        kind: SectionKind,
        #[source]
        source: csv::Error,
    },
    #[error("{kind} catalog: header must name columns {expected}, found {found}")]
    Header {
        kind: SectionKind,
        expected: String,
        found: String,
    },
    #[error("{kind} catalog is empty")]
    Empty { kind: SectionKind },
    #[error("{kind} catalog line {line}: duplicate id {id}")]
    DuplicateId {
        kind: SectionKind,
        id: u32,
        line: u64,
    },
    #[error("{kind} catalog: ids must be contiguous from 1, id {missing} is missing")]
    NonContiguous { kind: SectionKind, missing: u32 },
    #[error("{kind} catalog line {line}: {reason}")]
    InvalidRow {
        kind: SectionKind,
        line: u64,
        reason: String,
    },
}

/// Behaviour shared by the three catalog row types.
pub trait CatalogRecord: Clone + Send + Sync {
    const KIND: SectionKind;
    /// Column names, in serialization order.
    const HEADER: &'static [&'static str];

    fn id(&self) -> u32;
    fn reconstructed(&self) -> bool;
    /// Parses one row. `field` returns the trimmed cell for a column name.
    fn parse(field: &dyn Fn(&str) -> String) -> Result<Self, String>;
    fn to_fields(&self) -> Vec<String>;
    /// Hard invariants; a violation rejects the row.
    fn check(&self) -> Result<(), String>;
    /// Soft findings reported alongside a valid row.
    fn warnings(&self) -> Vec<String> {
        Vec::new()
    }
    /// Steel plus concrete mass per metre of member, kg/m.
    fn unit_weight(&self, materials: &Materials) -> f64;
}

fn parse_num(field: &dyn Fn(&str) -> String, name: &str) -> Result<f64, String> {
    let raw = field(name);
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("column `{name}`: `{raw}` is not a number"))
}

fn parse_id(field: &dyn Fn(&str) -> String) -> Result<u32, String> {
    let raw = field("id");
    raw.parse::<u32>()
        .map_err(|_| format!("column `id`: `{raw}` is not a positive integer"))
}

fn parse_flag(field: &dyn Fn(&str) -> String) -> Result<bool, String> {
    match field("reconstructed").to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" | "" => Ok(false),
        other => Err(format!("column `reconstructed`: `{other}` is not a boolean")),
    }
}

fn parse_bars(field: &dyn Fn(&str) -> String, name: &str) -> Result<BarSet, String> {
    field(name)
        .parse::<BarSet>()
        .map_err(|e| format!("column `{name}`: {e}"))
}

/// Table 5 row: rectangular beam with top and bottom reinforcement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamSection {
    pub id: u32,
    pub depth_mm: f64,
    pub width_mm: f64,
    pub bot_bars: BarSet,
    pub top_bars: BarSet,
    pub reconstructed: bool,
}

impl BeamSection {
    pub fn steel_area(&self) -> f64 {
        self.bot_bars.area() + self.top_bars.area()
    }

    pub fn concrete_area(&self) -> f64 {
        self.depth_mm * self.width_mm
    }
}

impl CatalogRecord for BeamSection {
    const KIND: SectionKind = SectionKind::Beam;
    const HEADER: &'static [&'static str] = &[
        "id",
        "depth_mm",
        "width_mm",
        "bot_bars",
        "top_bars",
        "reconstructed",
    ];

    fn id(&self) -> u32 {
        self.id
    }

    fn reconstructed(&self) -> bool {
        self.reconstructed
    }

    fn parse(field: &dyn Fn(&str) -> String) -> Result<Self, String> {
        Ok(Self {
            id: parse_id(field)?,
            depth_mm: parse_num(field, "depth_mm")?,
            width_mm: parse_num(field, "width_mm")?,
            bot_bars: parse_bars(field, "bot_bars")?,
            top_bars: parse_bars(field, "top_bars")?,
            reconstructed: parse_flag(field)?,
        })
    }

    fn to_fields(&self) -> Vec<String> {
        vec![
            self.id.to_string(),
            self.depth_mm.to_string(),
            self.width_mm.to_string(),
            self.bot_bars.to_string(),
            self.top_bars.to_string(),
            self.reconstructed.to_string(),
        ]
    }

    fn check(&self) -> Result<(), String> {
        if self.depth_mm <= 0.0 || self.width_mm <= 0.0 {
            return Err(format!(
                "beam {}: dimensions must be positive ({} x {})",
                self.id, self.depth_mm, self.width_mm
            ));
        }
        if self.depth_mm < self.width_mm {
            return Err(format!(
                "beam {}: depth {} is less than width {}",
                self.id, self.depth_mm, self.width_mm
            ));
        }
        for (face, bars) in [("bottom", self.bot_bars), ("top", self.top_bars)] {
            if bars.count < 2 {
                return Err(format!("beam {}: {face} face needs at least 2 bars", self.id));
            }
            if bars.diameter_mm <= 0.0 {
                return Err(format!("beam {}: {face} bar diameter must be positive", self.id));
            }
        }
        Ok(())
    }

    fn unit_weight(&self, materials: &Materials) -> f64 {
        (self.concrete_area() * materials.rho_concrete + self.steel_area() * materials.rho_steel)
            * 1e-6
    }
}

/// Table 6 row: square tied column with bars distributed on all four faces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSection {
    pub id: u32,
    pub side_mm: f64,
    pub bars: BarSet,
    pub reconstructed: bool,
}

impl ColumnSection {
    pub fn gross_area(&self) -> f64 {
        self.side_mm * self.side_mm
    }

    pub fn reinforcement_ratio(&self) -> f64 {
        self.bars.area() / self.gross_area()
    }

    /// Bars along one face, corners included.
    pub fn bars_per_face(&self) -> u32 {
        self.bars.count / 4 + 1
    }
}

impl CatalogRecord for ColumnSection {
    const KIND: SectionKind = SectionKind::Column;
    const HEADER: &'static [&'static str] = &["id", "side_mm", "bars", "reconstructed"];

    fn id(&self) -> u32 {
        self.id
    }

    fn reconstructed(&self) -> bool {
        self.reconstructed
    }

    fn parse(field: &dyn Fn(&str) -> String) -> Result<Self, String> {
        Ok(Self {
            id: parse_id(field)?,
            side_mm: parse_num(field, "side_mm")?,
            bars: parse_bars(field, "bars")?,
            reconstructed: parse_flag(field)?,
        })
    }

    fn to_fields(&self) -> Vec<String> {
        vec![
            self.id.to_string(),
            self.side_mm.to_string(),
            self.bars.to_string(),
            self.reconstructed.to_string(),
        ]
    }

    fn check(&self) -> Result<(), String> {
        if self.side_mm < 300.0 {
            return Err(format!("column {}: side {} is below 300 mm", self.id, self.side_mm));
        }
        if self.bars.count < 8 || self.bars.count % 4 != 0 {
            return Err(format!(
                "column {}: bar count {} must be a multiple of 4 and at least 8",
                self.id, self.bars.count
            ));
        }
        if self.bars.diameter_mm <= 0.0 {
            return Err(format!("column {}: bar diameter must be positive", self.id));
        }
        if self.bars.area() >= self.gross_area() {
            return Err(format!("column {}: steel area exceeds gross area", self.id));
        }
        Ok(())
    }

    fn warnings(&self) -> Vec<String> {
        let rho = self.reinforcement_ratio();
        if (0.01..=0.08).contains(&rho) {
            Vec::new()
        } else {
            vec![format!(
                "column {}: reinforcement ratio {rho:.4} outside [0.01, 0.08]",
                self.id
            )]
        }
    }

    fn unit_weight(&self, materials: &Materials) -> f64 {
        (self.gross_area() * materials.rho_concrete + self.bars.area() * materials.rho_steel) * 1e-6
    }
}

/// Table 7 row: shear wall web with optional boundary elements at both ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallSection {
    pub id: u32,
    /// Web thickness.
    pub t_w_mm: f64,
    /// Boundary-element thickness; zero when there is no boundary element.
    pub t_f_mm: f64,
    /// Spacing of vertical and horizontal web bars.
    pub s_sh_mm: f64,
    /// Boundary-element length along the wall; zero when absent.
    pub b_f_mm: f64,
    pub bar_diameter_mm: f64,
    pub reconstructed: bool,
}

impl WallSection {
    pub fn has_boundary(&self) -> bool {
        self.t_f_mm > 0.0
    }
}

impl CatalogRecord for WallSection {
    const KIND: SectionKind = SectionKind::Wall;
    const HEADER: &'static [&'static str] = &[
        "id",
        "t_w_mm",
        "t_f_mm",
        "s_sh_mm",
        "b_f_mm",
        "bar_diameter_mm",
        "reconstructed",
    ];

    fn id(&self) -> u32 {
        self.id
    }

    fn reconstructed(&self) -> bool {
        self.reconstructed
    }

    fn parse(field: &dyn Fn(&str) -> String) -> Result<Self, String> {
        Ok(Self {
            id: parse_id(field)?,
            t_w_mm: parse_num(field, "t_w_mm")?,
            t_f_mm: parse_num(field, "t_f_mm")?,
            s_sh_mm: parse_num(field, "s_sh_mm")?,
            b_f_mm: parse_num(field, "b_f_mm")?,
            bar_diameter_mm: parse_num(field, "bar_diameter_mm")?,
            reconstructed: parse_flag(field)?,
        })
    }

    fn to_fields(&self) -> Vec<String> {
        vec![
            self.id.to_string(),
            self.t_w_mm.to_string(),
            self.t_f_mm.to_string(),
            self.s_sh_mm.to_string(),
            self.b_f_mm.to_string(),
            self.bar_diameter_mm.to_string(),
            self.reconstructed.to_string(),
        ]
    }

    fn check(&self) -> Result<(), String> {
        if self.t_w_mm < 200.0 {
            return Err(format!("wall {}: web thickness {} below 200 mm", self.id, self.t_w_mm));
        }
        if (self.t_f_mm == 0.0) != (self.b_f_mm == 0.0) || self.t_f_mm < 0.0 || self.b_f_mm < 0.0
        {
            return Err(format!(
                "wall {}: t_f ({}) and b_f ({}) must be both zero or both positive",
                self.id, self.t_f_mm, self.b_f_mm
            ));
        }
        if self.s_sh_mm <= 0.0 {
            return Err(format!("wall {}: bar spacing must be positive", self.id));
        }
        if self.bar_diameter_mm <= 0.0 {
            return Err(format!("wall {}: bar diameter must be positive", self.id));
        }
        Ok(())
    }

    fn unit_weight(&self, materials: &Materials) -> f64 {
        let section = super::capacity::wall_geometry(
            self,
            &super::Detailing::default(),
            WALL_ORDERING_LENGTH_MM,
        );
        (section.gross_area() * materials.rho_concrete + section.steel_area() * materials.rho_steel)
            * 1e-6
    }
}

/// Validated catalog of one section kind.
///
/// Rows are addressed by id; iteration follows nondecreasing unit weight.
#[derive(Debug, Clone)]
pub struct Catalog<T> {
    by_weight: Vec<T>,
    position_by_id: Vec<usize>,
    warnings: Vec<String>,
}

impl<T: CatalogRecord> Catalog<T> {
    /// Validates rows (with their source line numbers) and builds the catalog.
    fn from_rows(rows: Vec<(u64, T)>, materials: &Materials) -> Result<Self, CatalogError> {
        let kind = T::KIND;
        if rows.is_empty() {
            return Err(CatalogError::Empty { kind });
        }
        let mut seen: HashMap<u32, u64> = HashMap::new();
        let mut warnings = Vec::new();
        for (line, row) in &rows {
            row.check()
                .map_err(|reason| CatalogError::InvalidRow { kind, line: *line, reason })?;
            if row.id() == 0 {
                return Err(CatalogError::InvalidRow {
                    kind,
                    line: *line,
                    reason: "ids start at 1".into(),
                });
            }
            if seen.insert(row.id(), *line).is_some() {
                return Err(CatalogError::DuplicateId { kind, id: row.id(), line: *line });
            }
            warnings.extend(row.warnings());
        }
        let n = rows.len() as u32;
        if let Some(missing) = (1..=n).find(|id| !seen.contains_key(id)) {
            return Err(CatalogError::NonContiguous { kind, missing });
        }
        let mut by_weight: Vec<T> = rows.into_iter().map(|(_, r)| r).collect();
        by_weight.sort_by(|a, b| {
            a.unit_weight(materials)
                .total_cmp(&b.unit_weight(materials))
                .then(a.id().cmp(&b.id()))
        });
        let mut position_by_id = vec![0; by_weight.len()];
        for (pos, row) in by_weight.iter().enumerate() {
            position_by_id[(row.id() - 1) as usize] = pos;
        }
        Ok(Self { by_weight, position_by_id, warnings })
    }

    pub fn from_records(records: Vec<T>, materials: &Materials) -> Result<Self, CatalogError> {
        Self::from_rows(
            records.into_iter().enumerate().map(|(i, r)| (i as u64 + 2, r)).collect(),
            materials,
        )
    }

    pub fn from_csv_str(text: &str, materials: &Materials) -> Result<Self, CatalogError> {
        let kind = T::KIND;
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = reader
            .headers()
            .map_err(|source| CatalogError::Csv { kind, source })?
            .clone();
        let expected = T::HEADER;
        let header_ok = header.len() == expected.len()
            && expected.iter().all(|name| header.iter().any(|h| h == *name));
        if !header_ok {
            return Err(CatalogError::Header {
                kind,
                expected: expected.join(","),
                found: header.iter().collect::<Vec<_>>().join(","),
            });
        }
        let positions: HashMap<&str, usize> = expected
            .iter()
            .map(|name| (*name, header.iter().position(|h| h == *name).unwrap()))
            .collect();
        let mut rows = Vec::new();
        let mut record = StringRecord::new();
        loop {
            match reader.read_record(&mut record) {
                Ok(false) => break,
                Ok(true) => {}
                Err(source) => return Err(CatalogError::Csv { kind, source }),
            }
            let line = record.position().map_or(0, |p| p.line());
            let lookup = |name: &str| -> String {
                positions.get(name).and_then(|&i| record.get(i)).unwrap_or("").to_owned()
            };
            let row = T::parse(&lookup)
                .map_err(|reason| CatalogError::InvalidRow { kind, line, reason })?;
            rows.push((line, row));
        }
        Self::from_rows(rows, materials)
    }

    pub fn from_path(path: &Path, materials: &Materials) -> Result<Self, CatalogError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CatalogError::Io { path: path.to_path_buf(), source })?;
        Self::from_csv_str(&text, materials)
    }

    /// Serializes the catalog in id order using the canonical header.
    pub fn to_csv_string(&self) -> String {
        let mut out = T::HEADER.join(",");
        out.push('\n');
        for row in self.iter_by_id() {
            out.push_str(&row.to_fields().join(","));
            out.push('\n');
        }
        out
    }

    pub fn get(&self, id: u32) -> Option<&T> {
        let idx = usize::try_from(id).ok()?.checked_sub(1)?;
        self.position_by_id.get(idx).map(|&p| &self.by_weight[p])
    }

    pub fn len(&self) -> usize {
        self.by_weight.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_weight.is_empty()
    }

    /// Inclusive id range `(1, n)`.
    pub fn id_range(&self) -> (u32, u32) {
        (1, self.by_weight.len() as u32)
    }

    /// Rows in nondecreasing unit-weight order.
    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.by_weight.iter()
    }

    pub fn iter_by_id(&self) -> impl Iterator<Item = &T> {
        self.position_by_id.iter().map(move |&p| &self.by_weight[p])
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}

/// The beam, column and wall catalogs used by one run.
#[derive(Debug, Clone)]
pub struct SectionCatalogs {
    pub beams: Catalog<BeamSection>,
    pub columns: Catalog<ColumnSection>,
    pub walls: Catalog<WallSection>,
}

impl SectionCatalogs {
    /// The shipped fixtures compiled into the library.
    pub fn builtin(materials: &Materials) -> Self {
        Self {
            beams: Catalog::from_csv_str(BUILTIN_BEAMS, materials).expect("shipped beam catalog"),
            columns: Catalog::from_csv_str(BUILTIN_COLUMNS, materials)
                .expect("shipped column catalog"),
            walls: Catalog::from_csv_str(BUILTIN_WALLS, materials).expect("shipped wall catalog"),
        }
    }

    pub fn warnings(&self) -> Vec<String> {
        self.beams
            .warnings()
            .iter()
            .chain(self.columns.warnings())
            .chain(self.walls.warnings())
            .cloned()
            .collect()
    }
}

/// Loads `beams.csv`, `columns.csv` and `walls.csv` from a fixture directory.
pub fn load_catalogs(dir: &Path, materials: &Materials) -> Result<SectionCatalogs, CatalogError> {
    Ok(SectionCatalogs {
        beams: Catalog::from_path(&dir.join("beams.csv"), materials)?,
        columns: Catalog::from_path(&dir.join("columns.csv"), materials)?,
        walls: Catalog::from_path(&dir.join("walls.csv"), materials)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn builtin() -> SectionCatalogs {
        SectionCatalogs::builtin(&Materials::default())
    }

    #[test]
    fn printed_rows_are_verbatim() {
        let cats = builtin();
        assert_eq!(
            cats.beams.get(1).unwrap(),
            &BeamSection {
                id: 1,
                depth_mm: 300.0,
                width_mm: 300.0,
                bot_bars: BarSet::new(3, 16.0),
                top_bars: BarSet::new(3, 16.0),
                reconstructed: false,
            }
        );
        let b31 = cats.beams.get(31).unwrap();
        assert_eq!((b31.depth_mm, b31.width_mm, b31.bot_bars), (550.0, 400.0, BarSet::new(5, 22.0)));
        let c65 = cats.columns.get(65).unwrap();
        assert_eq!((c65.side_mm, c65.bars, c65.reconstructed), (750.0, BarSet::new(16, 32.0), false));
        let c64 = cats.columns.get(64).unwrap();
        assert_eq!(c64.bars, BarSet::new(12, 32.0));
        let w1 = cats.walls.get(1).unwrap();
        assert_eq!((w1.t_w_mm, w1.t_f_mm, w1.s_sh_mm, w1.b_f_mm, w1.bar_diameter_mm), (200.0, 400.0, 150.0, 300.0, 16.0));
        let w2 = cats.walls.get(2).unwrap();
        assert!(!w2.has_boundary());
        assert_eq!(cats.walls.get(26).unwrap().bar_diameter_mm, 24.0);
        assert_eq!(cats.walls.get(25).unwrap().bar_diameter_mm, 22.0);
        assert_eq!(cats.beams.len(), 31);
        assert_eq!(cats.columns.len(), 65);
        assert_eq!(cats.walls.len(), 26);
    }

    #[test]
    fn interior_rows_are_flagged() {
        let cats = builtin();
        let printed: Vec<u32> = cats.columns.iter_by_id().filter(|c| !c.reconstructed).map(|c| c.id).collect();
        assert_eq!(printed, vec![1, 2, 64, 65]);
        assert!(cats.beams.get(15).unwrap().reconstructed);
    }

    #[test]
    fn iteration_is_weight_ordered() {
        let m = Materials::default();
        let cats = SectionCatalogs::builtin(&m);
        let w: Vec<f64> = cats.beams.iter().map(|b| b.unit_weight(&m)).collect();
        assert!(w.windows(2).all(|p| p[0] <= p[1]));
        let w: Vec<f64> = cats.walls.iter().map(|b| b.unit_weight(&m)).collect();
        assert!(w.windows(2).all(|p| p[0] <= p[1]));
        // Printed beam rows 30 (6Φ22) and 31 (5Φ22) are out of weight order by id.
        let order: Vec<u32> = cats.beams.iter().map(|b| b.id).collect();
        let p30 = order.iter().position(|&i| i == 30).unwrap();
        let p31 = order.iter().position(|&i| i == 31).unwrap();
        assert!(p31 < p30);
    }

    #[test]
    fn every_column_ratio_within_bounds() {
        let cats = builtin();
        assert!(cats.columns.warnings().is_empty());
        for c in cats.columns.iter() {
            let rho = c.reinforcement_ratio();
            assert!((0.01..=0.08).contains(&rho), "column {} rho {rho}", c.id);
        }
    }

    #[test]
    fn duplicate_id_is_rejected() {
        let text = "id,side_mm,bars,reconstructed\n1,300,8x16,false\n1,300,8x18,false\n";
        let err = Catalog::<ColumnSection>::from_csv_str(text, &Materials::default()).unwrap_err();
        assert!(matches!(err, CatalogError::DuplicateId { id: 1, line: 3, .. }), "{err}");
    }

    #[test]
    fn gaps_and_bad_rows_are_rejected() {
        let m = Materials::default();
        let text = "id,side_mm,bars,reconstructed\n1,300,8x16,false\n3,300,8x18,false\n";
        assert!(matches!(
            Catalog::<ColumnSection>::from_csv_str(text, &m).unwrap_err(),
            CatalogError::NonContiguous { missing: 2, .. }
        ));
        let text = "id,depth_mm,width_mm,bot_bars,top_bars,reconstructed\n1,-300,300,3x16,3x16,false\n";
        let err = Catalog::<BeamSection>::from_csv_str(text, &m).unwrap_err();
        assert!(matches!(err, CatalogError::InvalidRow { line: 2, .. }));
        assert!(err.to_string().contains("beam 1"));
        let text = "id,side_mm,bars,reconstructed\n1,300,10x16,false\n";
        assert!(Catalog::<ColumnSection>::from_csv_str(text, &m).is_err());
        let text = "id,t_w_mm,t_f_mm,s_sh_mm,b_f_mm,bar_diameter_mm,reconstructed\n1,200,400,150,0,16,false\n";
        assert!(Catalog::<WallSection>::from_csv_str(text, &m).is_err());
    }

    #[test]
    fn empty_and_headerless_files_are_rejected() {
        let m = Materials::default();
        assert!(matches!(
            Catalog::<BeamSection>::from_csv_str("id,depth_mm,width_mm,bot_bars,top_bars,reconstructed\n", &m),
            Err(CatalogError::Empty { .. })
        ));
        assert!(matches!(
            Catalog::<BeamSection>::from_csv_str("", &m),
            Err(CatalogError::Header { .. })
        ));
    }

    #[test]
    fn header_detection() {
        assert_eq!(SectionKind::detect("id,side_mm,bars,reconstructed"), Some(SectionKind::Column));
        assert_eq!(
            SectionKind::detect("id, depth_mm, width_mm, bot_bars, top_bars, reconstructed"),
            Some(SectionKind::Beam)
        );
        assert_eq!(SectionKind::detect("kind,IO,LS,CP"), None);
    }

    #[test]
    fn shipped_catalogs_round_trip_exactly() {
        let m = Materials::default();
        let cats = builtin();
        let text = cats.beams.to_csv_string();
        assert_eq!(text, BUILTIN_BEAMS);
        let again = Catalog::<BeamSection>::from_csv_str(&text, &m).unwrap();
        assert!(again.iter_by_id().eq(cats.beams.iter_by_id()));
        assert_eq!(cats.columns.to_csv_string(), BUILTIN_COLUMNS);
        assert_eq!(cats.walls.to_csv_string(), BUILTIN_WALLS);
    }

    proptest::proptest! {
        #[test]
        fn arbitrary_beam_rows_round_trip(
            depth in 300u32..900, extra in 0u32..200, n_bot in 2u32..8, n_top in 2u32..8,
            d_bot in 10u32..36, d_top in 10u32..36, flag: bool,
        ) {
            let m = Materials::default();
            let row = BeamSection {
                id: 1,
                depth_mm: f64::from(depth + extra),
                width_mm: f64::from(depth),
                bot_bars: BarSet::new(n_bot, f64::from(d_bot) + 0.5),
                top_bars: BarSet::new(n_top, f64::from(d_top)),
                reconstructed: flag,
            };
            let cat = Catalog::from_records(vec![row.clone()], &m).unwrap();
            let back = Catalog::<BeamSection>::from_csv_str(&cat.to_csv_string(), &m).unwrap();
            proptest::prop_assert_eq!(back.get(1).unwrap(), &row);
        }
    }
}
