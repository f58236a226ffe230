use super::catalog::{BeamSection, ColumnSection, SectionCatalogs, SectionKind, WallSection};
use super::rc::{InteractionCurve, RcSection, SteelLayer};
use super::{bar_area, Detailing, Materials, CONCRETE_CRUSHING_STRAIN};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CapacityError {
    #[error("{kind} {id}: neutral axis at {depth_mm:.1} mm lies outside the {height_mm} mm section")]
    NeutralAxisOutside {
        kind: SectionKind,
        id: u32,
        depth_mm: f64,
        height_mm: f64,
    },
    #[error("{kind} {id}: no neutral axis equilibrates the requested axial load")]
    NoEquilibrium { kind: SectionKind, id: u32 },
    #[error("wall length must be positive, got {0} mm")]
    WallLength(f64),
}

/// Strength and stiffness quantities consumed by the constraint checks.
///
/// Forces are in kN, moments in kN·m, lengths in mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionCapacities {
    pub gross_area_mm2: f64,
    pub steel_area_mm2: f64,
    /// Tension-face ratio for beams, total ratio for columns and walls.
    pub rho: f64,
    /// Compression-face ratio (beams only; zero otherwise).
    pub rho_prime: f64,
    pub rho_bal: f64,
    pub i_eff_mm4: f64,
    /// Nominal moment with the bottom (or, for symmetric members, either) face in tension.
    pub mn_pos_knm: f64,
    pub mn_neg_knm: f64,
    pub pn_max_kn: f64,
    pub vc_kn: f64,
    pub vs_kn: f64,
    pub vs_max_kn: f64,
    pub vn_kn: f64,
    pub eps_t: f64,
    pub effective_depth_mm: f64,
    pub ast_min_mm2: f64,
    /// Smallest clear spacing between adjacent longitudinal bars.
    pub clear_spacing_mm: f64,
    pub min_clear_spacing_mm: f64,
}

fn nominal_axial_cap(gross: f64, steel: f64, m: &Materials) -> f64 {
    0.80 * (0.85 * m.fc_mpa * (gross - steel) + m.fy_mpa * steel) * 1e-3
}

fn balanced_ratio(m: &Materials) -> f64 {
    let cu = CONCRETE_CRUSHING_STRAIN * m.es_mpa;
    0.85 * m.beta1() * m.fc_mpa / m.fy_mpa * cu / (cu + m.fy_mpa)
}

fn clear_spacing(width: f64, bars: u32, dia: f64, detailing: &Detailing) -> f64 {
    if bars < 2 {
        return f64::INFINITY;
    }
    let inner = width - 2.0 * (detailing.cover_mm + detailing.stirrup_diameter_mm);
    (inner - f64::from(bars) * dia) / f64::from(bars - 1)
}

fn tension_strain(depth_t: f64, c: f64) -> f64 {
    if c <= 0.0 {
        return f64::INFINITY;
    }
    (CONCRETE_CRUSHING_STRAIN * (depth_t - c) / c).max(0.0)
}

/// Concrete and stirrup shear terms for a rectangular web, kN.
fn shear_terms(width: f64, d: f64, m: &Materials, detailing: &Detailing) -> (f64, f64, f64) {
    let root = m.fc_mpa.sqrt();
    let vc = 0.17 * root * width * d * 1e-3;
    let vs = detailing.stirrup_area() * m.fy_mpa * d / detailing.stirrup_spacing_mm * 1e-3;
    let vs_max = 0.66 * root * width * d * 1e-3;
    (vc, vs, vs_max)
}

fn beam_section(record: &BeamSection, detailing: &Detailing) -> RcSection {
    let top = SteelLayer {
        depth: detailing.bar_centre_offset(record.top_bars.diameter_mm),
        area: record.top_bars.area(),
    };
    let bottom = SteelLayer {
        depth: record.depth_mm - detailing.bar_centre_offset(record.bot_bars.diameter_mm),
        area: record.bot_bars.area(),
    };
    RcSection::rectangle(record.width_mm, record.depth_mm, vec![top, bottom])
}

/// Flexural strength by the stress-block model at zero axial load, returning
/// `(moment kN·m, neutral-axis depth mm)`.
fn pure_flexure(
    section: &RcSection,
    m: &Materials,
    kind: SectionKind,
    id: u32,
) -> Result<(f64, f64), CapacityError> {
    if section.steel_area() <= 0.0 {
        return Ok((0.0, 0.0));
    }
    let (c, moment) = section
        .moment_at_axial(0.0, m)
        .ok_or(CapacityError::NoEquilibrium { kind, id })?;
    if c > section.height() {
        return Err(CapacityError::NeutralAxisOutside {
            kind,
            id,
            depth_mm: c,
            height_mm: section.height(),
        });
    }
    Ok((moment * 1e-6, c))
}

/// Capacities of a rectangular beam with top and bottom steel.
pub fn derive_beam_capacities(
    record: &BeamSection,
    materials: &Materials,
    detailing: &Detailing,
) -> Result<SectionCapacities, CapacityError> {
    let section = beam_section(record, detailing);
    let d = record.depth_mm - detailing.bar_centre_offset(record.bot_bars.diameter_mm);
    let d_neg = record.depth_mm - detailing.bar_centre_offset(record.top_bars.diameter_mm);
    let (mn_pos, c_pos) = pure_flexure(&section, materials, SectionKind::Beam, record.id)?;
    let (mn_neg, c_neg) = pure_flexure(&section.flipped(), materials, SectionKind::Beam, record.id)?;
    let eps_t = tension_strain(d, c_pos).min(tension_strain(d_neg, c_neg));
    let b = record.width_mm;
    let (vc, vs, vs_max) = shear_terms(b, d, materials, detailing);
    let gross = record.concrete_area();
    let steel = record.steel_area();
    let ast_min_factor = (0.25 * materials.fc_mpa.sqrt()).max(1.4) / materials.fy_mpa;
    Ok(SectionCapacities {
        gross_area_mm2: gross,
        steel_area_mm2: steel,
        rho: record.bot_bars.area() / (b * d),
        rho_prime: record.top_bars.area() / (b * d),
        rho_bal: balanced_ratio(materials),
        i_eff_mm4: detailing.beam_ieff_factor * b * record.depth_mm.powi(3) / 12.0,
        mn_pos_knm: mn_pos,
        mn_neg_knm: mn_neg,
        pn_max_kn: nominal_axial_cap(gross, steel, materials),
        vc_kn: vc,
        vs_kn: vs,
        vs_max_kn: vs_max,
        vn_kn: vc + vs,
        eps_t: if steel > 0.0 { eps_t } else { 0.0 },
        effective_depth_mm: d,
        ast_min_mm2: ast_min_factor * b * d,
        clear_spacing_mm: clear_spacing(b, record.bot_bars.count, record.bot_bars.diameter_mm, detailing)
            .min(clear_spacing(b, record.top_bars.count, record.top_bars.diameter_mm, detailing)),
        min_clear_spacing_mm: detailing.min_clear_spacing_mm,
    })
}

/// Steel layers of a square column: full faces top and bottom, two side bars
/// on each intermediate layer.
fn column_section(record: &ColumnSection, detailing: &Detailing) -> RcSection {
    let per_face = record.bars_per_face() as usize;
    let dia = record.bars.diameter_mm;
    let edge = detailing.bar_centre_offset(dia);
    let span = record.side_mm - 2.0 * edge;
    let one = bar_area(dia);
    let layers = (0..per_face)
        .map(|k| {
            let count = if k == 0 || k + 1 == per_face { per_face } else { 2 };
            SteelLayer {
                depth: edge + span * k as f64 / (per_face - 1) as f64,
                area: count as f64 * one,
            }
        })
        .collect();
    RcSection::rectangle(record.side_mm, record.side_mm, layers)
}

/// Precomputed strength data for one column row.
#[derive(Debug, Clone)]
pub struct ColumnStrength {
    pub record: ColumnSection,
    /// Capacities at zero axial load.
    pub capacities: SectionCapacities,
    pub interaction: InteractionCurve,
    section: RcSection,
}

impl ColumnStrength {
    pub fn new(
        record: &ColumnSection,
        materials: &Materials,
        detailing: &Detailing,
    ) -> Result<Self, CapacityError> {
        let section = column_section(record, detailing);
        let side = record.side_mm;
        let gross = record.gross_area();
        let steel = record.bars.area();
        let pn_max = nominal_axial_cap(gross, steel, materials);
        let interaction = InteractionCurve::sample(&section, materials, pn_max);
        let (mn0, c0) = pure_flexure(&section, materials, SectionKind::Column, record.id)?;
        let d = side - detailing.bar_centre_offset(record.bars.diameter_mm);
        let (vc, vs, vs_max) = shear_terms(side, d, materials, detailing);
        let capacities = SectionCapacities {
            gross_area_mm2: gross,
            steel_area_mm2: steel,
            rho: steel / gross,
            rho_prime: 0.0,
            rho_bal: balanced_ratio(materials),
            i_eff_mm4: detailing.column_ieff_factor * side.powi(4) / 12.0,
            mn_pos_knm: mn0,
            mn_neg_knm: mn0,
            pn_max_kn: pn_max,
            vc_kn: vc,
            vs_kn: vs,
            vs_max_kn: vs_max,
            vn_kn: vc + vs,
            eps_t: tension_strain(section.extreme_steel_depth(), c0),
            effective_depth_mm: d,
            ast_min_mm2: 0.01 * gross,
            clear_spacing_mm: clear_spacing(side, record.bars_per_face(), record.bars.diameter_mm, detailing),
            min_clear_spacing_mm: detailing.min_clear_spacing_mm,
        };
        Ok(Self { record: record.clone(), capacities, interaction, section })
    }

    /// Capacities with the flexural strength taken at axial load `p_u_kn`.
    ///
    /// Loads beyond the axial cap are not an error: the moment is clamped to
    /// the cap vertex and the axial check reports the excess.
    pub fn at_axial(&self, p_u_kn: f64, materials: &Materials) -> SectionCapacities {
        let mn = self.interaction.moment_at(p_u_kn);
        let mut caps = self.capacities;
        caps.mn_pos_knm = mn;
        caps.mn_neg_knm = mn;
        let p = p_u_kn.clamp(self.interaction.min_axial(), self.interaction.max_axial()) * 1e3;
        if let Some(c) = self.section.neutral_axis_for(p, materials) {
            caps.eps_t = tension_strain(self.section.extreme_steel_depth(), c);
        }
        caps
    }
}

/// Capacities of a square tied column at factored axial load `p_u_kn`.
pub fn derive_column_capacities(
    record: &ColumnSection,
    materials: &Materials,
    detailing: &Detailing,
    p_u_kn: f64,
) -> Result<SectionCapacities, CapacityError> {
    Ok(ColumnStrength::new(record, materials, detailing)?.at_axial(p_u_kn, materials))
}

/// Wall cross-section along its length: boundary elements of length `b_f`
/// and thickness `t_f` at both ends of a `t_w` web; vertical bars in two
/// curtains at spacing `s_sh`, doubled inside boundary elements.
pub(crate) fn wall_geometry(record: &WallSection, detailing: &Detailing, length_mm: f64) -> RcSection {
    let bands: Vec<(f64, f64)> = if record.has_boundary() {
        let web = (length_mm - 2.0 * record.b_f_mm).max(0.0);
        vec![
            (record.b_f_mm.min(length_mm / 2.0), record.t_f_mm),
            (web, record.t_w_mm),
            (record.b_f_mm.min(length_mm / 2.0), record.t_f_mm),
        ]
    } else {
        vec![(length_mm, record.t_w_mm)]
    };
    let dia = record.bar_diameter_mm;
    let edge = detailing.bar_centre_offset(dia).min(length_mm / 2.0);
    let span = length_mm - 2.0 * edge;
    let gaps = (span / record.s_sh_mm).ceil().max(1.0) as usize;
    let one = bar_area(dia);
    let steel = (0..=gaps)
        .map(|k| {
            let depth = edge + span * k as f64 / gaps as f64;
            let in_boundary = record.has_boundary()
                && (depth <= record.b_f_mm || depth >= length_mm - record.b_f_mm);
            SteelLayer { depth, area: if in_boundary { 4.0 } else { 2.0 } * one }
        })
        .collect();
    RcSection::stacked(&bands, steel)
}

/// Precomputed strength data for one wall row at a given wall length.
#[derive(Debug, Clone)]
pub struct WallStrength {
    pub record: WallSection,
    pub length_mm: f64,
    pub capacities: SectionCapacities,
    pub interaction: InteractionCurve,
    /// Vertical steel in the half of the section placed in tension.
    pub tension_steel_mm2: f64,
    pub compression_steel_mm2: f64,
    /// Horizontal web reinforcement ratio.
    pub rho_t: f64,
}

/// Wall capacities for a wall of length `length_mm`.
pub fn derive_wall_capacities(
    record: &WallSection,
    materials: &Materials,
    detailing: &Detailing,
    length_mm: f64,
) -> Result<WallStrength, CapacityError> {
    if !(length_mm > 0.0) {
        return Err(CapacityError::WallLength(length_mm));
    }
    let section = wall_geometry(record, detailing, length_mm);
    let gross = section.gross_area();
    let steel = section.steel_area();
    let pn_max = nominal_axial_cap(gross, steel, materials);
    let interaction = InteractionCurve::sample(&section, materials, pn_max);
    let (mn0, c0) = pure_flexure(&section, materials, SectionKind::Wall, record.id)?;
    let (tension, compression) = steel_halves(&section);
    let rho_t = 2.0 * bar_area(record.bar_diameter_mm) / (record.t_w_mm * record.s_sh_mm);
    let acv = record.t_w_mm * length_mm;
    let root = materials.fc_mpa.sqrt();
    let vc = 0.17 * root * acv * 1e-3;
    let vs = rho_t * materials.fy_mpa * acv * 1e-3;
    let capacities = SectionCapacities {
        gross_area_mm2: gross,
        steel_area_mm2: steel,
        rho: steel / gross,
        rho_prime: 0.0,
        rho_bal: balanced_ratio(materials),
        i_eff_mm4: detailing.wall_ieff_factor * section.gross_inertia(),
        mn_pos_knm: mn0,
        mn_neg_knm: mn0,
        pn_max_kn: pn_max,
        vc_kn: vc,
        vs_kn: vs,
        vs_max_kn: 0.66 * root * acv * 1e-3,
        vn_kn: vc + vs,
        eps_t: tension_strain(section.extreme_steel_depth(), c0),
        effective_depth_mm: 0.8 * length_mm,
        ast_min_mm2: 0.0025 * gross,
        clear_spacing_mm: record.s_sh_mm - record.bar_diameter_mm,
        min_clear_spacing_mm: detailing.min_clear_spacing_mm,
    };
    Ok(WallStrength {
        record: record.clone(),
        length_mm,
        capacities,
        interaction,
        tension_steel_mm2: tension,
        compression_steel_mm2: compression,
        rho_t,
    })
}

impl WallStrength {
    /// Rotation-table demand ratios at axial load `p_kn` and shear `v_kn`.
    pub fn terms(&self, materials: &Materials, p_kn: f64, v_kn: f64) -> WallTerms {
        wall_terms(
            &self.record,
            materials,
            self.length_mm,
            self.tension_steel_mm2,
            self.compression_steel_mm2,
            p_kn,
            v_kn,
        )
    }
}

fn steel_halves(section: &RcSection) -> (f64, f64) {
    let mid = section.height() / 2.0;
    section.steel().iter().fold((0.0, 0.0), |(t, c), layer| {
        if (layer.depth - mid).abs() < 1e-9 {
            (t + layer.area / 2.0, c + layer.area / 2.0)
        } else if layer.depth > mid {
            (t + layer.area, c)
        } else {
            (t, c + layer.area)
        }
    })
}

/// The two demand ratios that select a row of the wall rotation table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallTerms {
    /// `((A_s − A'_s)·f_y + P) / (t_w·l_w·f'c)`.
    pub axial_flexural: f64,
    /// `V / (t_w·l_w·√f'c)` in MPa units.
    pub shear: f64,
    pub has_boundary: bool,
}

/// Demand ratios of a wall carrying axial load `p_kn` and shear `v_kn`.
pub fn derive_wall_terms(
    record: &WallSection,
    materials: &Materials,
    detailing: &Detailing,
    wall_length_mm: f64,
    p_kn: f64,
    v_kn: f64,
) -> Result<WallTerms, CapacityError> {
    if !(wall_length_mm > 0.0) {
        return Err(CapacityError::WallLength(wall_length_mm));
    }
    let (a_s, a_s_prime) = steel_halves(&wall_geometry(record, detailing, wall_length_mm));
    Ok(wall_terms(record, materials, wall_length_mm, a_s, a_s_prime, p_kn, v_kn))
}

pub(crate) fn wall_terms(
    record: &WallSection,
    materials: &Materials,
    wall_length_mm: f64,
    a_s: f64,
    a_s_prime: f64,
    p_kn: f64,
    v_kn: f64,
) -> WallTerms {
    let area = record.t_w_mm * wall_length_mm;
    WallTerms {
        axial_flexural: ((a_s - a_s_prime) * materials.fy_mpa + p_kn * 1e3)
            / (area * materials.fc_mpa),
        shear: v_kn * 1e3 / (area * materials.fc_mpa.sqrt()),
        has_boundary: record.has_boundary(),
    }
}

/// Precomputed strength data for one beam row.
#[derive(Debug, Clone)]
pub struct BeamStrength {
    pub record: BeamSection,
    pub capacities: SectionCapacities,
}

/// Capacities for every catalog row, computed once per run.
#[derive(Debug, Clone)]
pub struct SectionLibrary {
    pub materials: Materials,
    pub detailing: Detailing,
    pub wall_length_mm: f64,
    beams: Vec<BeamStrength>,
    columns: Vec<ColumnStrength>,
    walls: Vec<WallStrength>,
}

impl SectionLibrary {
    pub fn new(
        catalogs: &SectionCatalogs,
        materials: &Materials,
        detailing: &Detailing,
        wall_length_mm: f64,
    ) -> Result<Self, CapacityError> {
        let beams = catalogs
            .beams
            .iter_by_id()
            .map(|r| {
                Ok(BeamStrength {
                    record: r.clone(),
                    capacities: derive_beam_capacities(r, materials, detailing)?,
                })
            })
            .collect::<Result<_, CapacityError>>()?;
        let columns = catalogs
            .columns
            .iter_by_id()
            .map(|r| ColumnStrength::new(r, materials, detailing))
            .collect::<Result<_, _>>()?;
        let walls = catalogs
            .walls
            .iter_by_id()
            .map(|r| derive_wall_capacities(r, materials, detailing, wall_length_mm))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            materials: *materials,
            detailing: *detailing,
            wall_length_mm,
            beams,
            columns,
            walls,
        })
    }

    pub fn beam(&self, id: u32) -> Option<&BeamStrength> {
        self.beams.get((id as usize).checked_sub(1)?)
    }

    pub fn column(&self, id: u32) -> Option<&ColumnStrength> {
        self.columns.get((id as usize).checked_sub(1)?)
    }

    pub fn wall(&self, id: u32) -> Option<&WallStrength> {
        self.walls.get((id as usize).checked_sub(1)?)
    }

    pub fn count(&self, kind: SectionKind) -> usize {
        match kind {
            SectionKind::Beam => self.beams.len(),
            SectionKind::Column => self.columns.len(),
            SectionKind::Wall => self.walls.len(),
        }
    }
}
