//! Cross-section catalogs and the strength/stiffness properties derived from
//! them.
//!
//! Three catalogs are shipped: rectangular beams, square tied columns and
//! shear walls with optional boundary elements. Every record is validated on
//! load, and [`SectionLibrary`] precomputes capacities for each row so that
//! candidate evaluation only performs lookups.

mod capacity;
mod catalog;
mod rc;

pub use capacity::{
    derive_beam_capacities, derive_column_capacities, derive_wall_capacities, derive_wall_terms,
    BeamStrength, ColumnStrength, SectionCapacities, SectionLibrary, WallStrength, WallTerms,
};
pub use catalog::{
    load_catalogs, BeamSection, Catalog, CatalogError, CatalogRecord, ColumnSection,
    SectionCatalogs, SectionKind, WallSection,
};
pub use rc::{InteractionCurve, InteractionPoint, RcSection, SteelLayer};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Cross-sectional area of a round bar, mm².
pub fn bar_area(diameter_mm: f64) -> f64 {
    std::f64::consts::PI * diameter_mm * diameter_mm / 4.0
}

/// Coefficient of the `E_c = k·√f'c` modulus rule (MPa).
pub const MODULUS_COEFFICIENT: f64 = 4700.0;

/// Ultimate concrete compressive strain of the stress-block model.
pub const CONCRETE_CRUSHING_STRAIN: f64 = 0.003;

/// Concrete and reinforcing steel properties plus strength-reduction factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Materials {
    /// Concrete compressive strength f'c, MPa.
    pub fc_mpa: f64,
    /// Steel yield stress, MPa.
    pub fy_mpa: f64,
    /// Concrete elastic modulus, MPa.
    pub ec_mpa: f64,
    /// Steel elastic modulus, MPa.
    pub es_mpa: f64,
    /// Steel density, kg/m³.
    pub rho_steel: f64,
    /// Concrete density, kg/m³.
    pub rho_concrete: f64,
    pub phi_flexure: f64,
    pub phi_compression: f64,
    pub phi_shear: f64,
}

impl Default for Materials {
    fn default() -> Self {
        Self::with_strengths(30.0, 400.0)
    }
}

impl Materials {
    /// Builds the material set for the given strengths with the remaining
    /// properties at their conventional values.
    pub fn with_strengths(fc_mpa: f64, fy_mpa: f64) -> Self {
        Self {
            fc_mpa,
            fy_mpa,
            ec_mpa: MODULUS_COEFFICIENT * fc_mpa.max(0.0).sqrt(),
            es_mpa: 200_000.0,
            rho_steel: 7850.0,
            rho_concrete: 2400.0,
            phi_flexure: 0.90,
            phi_compression: 0.65,
            phi_shear: 0.75,
        }
    }

    /// Concrete modulus in kN/m², the unit system of the frame analysis.
    pub fn ec_kpa(&self) -> f64 {
        self.ec_mpa * 1000.0
    }

    /// Steel yield strain.
    pub fn yield_strain(&self) -> f64 {
        self.fy_mpa / self.es_mpa
    }

    /// Depth ratio of the equivalent rectangular stress block.
    pub fn beta1(&self) -> f64 {
        (0.85 - 0.05 * (self.fc_mpa - 28.0) / 7.0).clamp(0.65, 0.85)
    }

    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("fc_mpa", self.fc_mpa),
            ("fy_mpa", self.fy_mpa),
            ("ec_mpa", self.ec_mpa),
            ("es_mpa", self.es_mpa),
            ("rho_steel", self.rho_steel),
            ("rho_concrete", self.rho_concrete),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(format!("{name} must be positive, got {value}"));
            }
        }
        for (name, value) in [
            ("phi_flexure", self.phi_flexure),
            ("phi_compression", self.phi_compression),
            ("phi_shear", self.phi_shear),
        ] {
            if !(value > 0.0 && value <= 1.0) {
                return Err(format!("{name} must lie in (0, 1], got {value}"));
            }
        }
        let expected = MODULUS_COEFFICIENT * self.fc_mpa.sqrt();
        if ((self.ec_mpa - expected) / expected).abs() > 1e-9 {
            return Err(format!(
                "ec_mpa {} inconsistent with 4700·√f'c = {expected}",
                self.ec_mpa
            ));
        }
        Ok(())
    }
}

/// Detailing assumptions shared by all members.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Detailing {
    /// Clear cover to the stirrups, mm.
    pub cover_mm: f64,
    pub stirrup_diameter_mm: f64,
    /// Stirrup spacing along beams and columns, mm.
    pub stirrup_spacing_mm: f64,
    pub stirrup_legs: u32,
    /// Smallest admissible clear spacing between longitudinal bars, mm.
    pub min_clear_spacing_mm: f64,
    /// Cracked-section stiffness factors applied to the gross inertia.
    pub beam_ieff_factor: f64,
    pub column_ieff_factor: f64,
    pub wall_ieff_factor: f64,
}

impl Default for Detailing {
    fn default() -> Self {
        Self {
            cover_mm: 40.0,
            stirrup_diameter_mm: 10.0,
            stirrup_spacing_mm: 150.0,
            stirrup_legs: 2,
            min_clear_spacing_mm: 10.0,
            beam_ieff_factor: 0.35,
            column_ieff_factor: 0.70,
            wall_ieff_factor: 0.70,
        }
    }
}

impl Detailing {
    /// Distance from a face to the centre of a longitudinal bar of `bar_mm`.
    pub fn bar_centre_offset(&self, bar_mm: f64) -> f64 {
        self.cover_mm + self.stirrup_diameter_mm + bar_mm / 2.0
    }

    /// Area of one stirrup set (all legs), mm².
    pub fn stirrup_area(&self) -> f64 {
        f64::from(self.stirrup_legs) * bar_area(self.stirrup_diameter_mm)
    }

    pub fn validate(&self) -> Result<(), String> {
        for (name, value) in [
            ("cover_mm", self.cover_mm),
            ("stirrup_diameter_mm", self.stirrup_diameter_mm),
            ("stirrup_spacing_mm", self.stirrup_spacing_mm),
            ("min_clear_spacing_mm", self.min_clear_spacing_mm),
            ("beam_ieff_factor", self.beam_ieff_factor),
            ("column_ieff_factor", self.column_ieff_factor),
            ("wall_ieff_factor", self.wall_ieff_factor),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(format!("{name} must be positive, got {value}"));
            }
        }
        if self.stirrup_legs == 0 {
            return Err("stirrup_legs must be at least 1".into());
        }
        Ok(())
    }
}

/// A group of identical longitudinal bars, e.g. `3Φ16`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarSet {
    pub count: u32,
    pub diameter_mm: f64,
}

impl BarSet {
    pub fn new(count: u32, diameter_mm: f64) -> Self {
        Self { count, diameter_mm }
    }

    pub fn area(&self) -> f64 {
        f64::from(self.count) * bar_area(self.diameter_mm)
    }
}

impl fmt::Display for BarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.count, self.diameter_mm)
    }
}

impl FromStr for BarSet {
    type Err = String;

    /// Accepts `3x16`, `3Φ16` and `3Φ16 mm`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let cleaned = s.trim().trim_end_matches("mm").trim();
        let (count, dia) = cleaned
            .split_once(['x', 'X', 'Φ', 'φ'])
            .ok_or_else(|| format!("bar spec `{s}` is not of the form <count>x<diameter>"))?;
        let count: u32 = count
            .trim()
            .parse()
            .map_err(|_| format!("bad bar count in `{s}`"))?;
        let diameter_mm: f64 = dia
            .trim()
            .parse()
            .map_err(|_| format!("bad bar diameter in `{s}`"))?;
        Ok(Self { count, diameter_mm })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bar_area_values() {
        assert_eq!(bar_area(0.0), 0.0);
        assert_relative_eq!(bar_area(16.0), 201.0619, epsilon = 1e-4);
        assert_relative_eq!(bar_area(10.0), 78.5398, epsilon = 1e-4);
    }

    #[test]
    fn bar_set_parsing() {
        assert_eq!("3x16".parse::<BarSet>().unwrap(), BarSet::new(3, 16.0));
        assert_eq!("3Φ16 mm".parse::<BarSet>().unwrap(), BarSet::new(3, 16.0));
        assert!("316".parse::<BarSet>().is_err());
        assert!("ax16".parse::<BarSet>().is_err());
    }

    #[test]
    fn default_materials_are_valid() {
        let m = Materials::default();
        m.validate().unwrap();
        assert_relative_eq!(m.ec_mpa, 4700.0 * 30f64.sqrt());
        assert_relative_eq!(m.beta1(), 0.85 - 0.05 * 2.0 / 7.0);
        let mut bad = m;
        bad.phi_shear = 1.2;
        assert!(bad.validate().is_err());
        bad = m;
        bad.ec_mpa = 30_000.0;
        assert!(bad.validate().is_err());
    }

    proptest::proptest! {
        #[test]
        fn bar_area_strictly_increasing(a in 0.0f64..100.0, delta in 1e-6f64..50.0) {
            proptest::prop_assert!(bar_area(a + delta) > bar_area(a));
        }
    }
}
