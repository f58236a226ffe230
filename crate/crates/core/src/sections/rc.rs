//! Strain-compatibility analysis of reinforced concrete sections with the
//! equivalent rectangular stress block.
//!
//! Depths are measured in millimetres from the compression face, forces are
//! in newtons and moments in N·mm. Axial force is positive in compression and
//! moments are taken about the gross-section centroid, positive when the top
//! face is in compression.

use super::{Materials, CONCRETE_CRUSHING_STRAIN};
use serde::{Deserialize, Serialize};

/// A horizontal band of concrete between two depths.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Strip {
    top: f64,
    bottom: f64,
    width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteelLayer {
    /// Depth of the layer centroid from the top face, mm.
    pub depth: f64,
    /// Total bar area in the layer, mm².
    pub area: f64,
}

/// Section built from stacked rectangles plus discrete steel layers.
#[derive(Debug, Clone, PartialEq)]
pub struct RcSection {
    strips: Vec<Strip>,
    steel: Vec<SteelLayer>,
    height: f64,
}

impl RcSection {
    pub fn rectangle(width: f64, height: f64, steel: Vec<SteelLayer>) -> Self {
        Self {
            strips: vec![Strip { top: 0.0, bottom: height, width }],
            steel,
            height,
        }
    }

    /// Stacks `(thickness along the depth, width)` bands from the top face.
    pub fn stacked(bands: &[(f64, f64)], steel: Vec<SteelLayer>) -> Self {
        let mut top = 0.0;
        let mut strips = Vec::with_capacity(bands.len());
        for &(thickness, width) in bands {
            if thickness > 0.0 {
                strips.push(Strip { top, bottom: top + thickness, width });
                top += thickness;
            }
        }
        Self { strips, steel, height: top }
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn steel(&self) -> &[SteelLayer] {
        &self.steel
    }

    pub fn gross_area(&self) -> f64 {
        self.strips.iter().map(|s| (s.bottom - s.top) * s.width).sum()
    }

    pub fn steel_area(&self) -> f64 {
        self.steel.iter().map(|l| l.area).sum()
    }

    /// Depth of the gross-section centroid.
    pub fn centroid(&self) -> f64 {
        let first: f64 = self
            .strips
            .iter()
            .map(|s| (s.bottom - s.top) * s.width * 0.5 * (s.top + s.bottom))
            .sum();
        first / self.gross_area()
    }

    /// Gross second moment of area about the centroid, mm⁴.
    pub fn gross_inertia(&self) -> f64 {
        let yc = self.centroid();
        self.strips
            .iter()
            .map(|s| {
                let h = s.bottom - s.top;
                let y = 0.5 * (s.top + s.bottom) - yc;
                s.width * h.powi(3) / 12.0 + s.width * h * y * y
            })
            .sum()
    }

    /// Depth of the deepest steel layer.
    pub fn extreme_steel_depth(&self) -> f64 {
        self.steel.iter().map(|l| l.depth).fold(0.0, f64::max)
    }

    /// The same section seen with the bottom face in compression.
    pub fn flipped(&self) -> Self {
        let h = self.height;
        let mut strips: Vec<Strip> = self
            .strips
            .iter()
            .map(|s| Strip { top: h - s.bottom, bottom: h - s.top, width: s.width })
            .collect();
        strips.reverse();
        let steel = self
            .steel
            .iter()
            .map(|l| SteelLayer { depth: h - l.depth, area: l.area })
            .collect();
        Self { strips, steel, height: h }
    }

    /// Compressed concrete area and its first moment about the top face for a
    /// block of depth `a`.
    fn block(&self, a: f64) -> (f64, f64) {
        let mut area = 0.0;
        let mut moment = 0.0;
        for s in &self.strips {
            let bottom = s.bottom.min(a);
            if bottom > s.top {
                let part = (bottom - s.top) * s.width;
                area += part;
                moment += part * 0.5 * (s.top + bottom);
            }
        }
        (area, moment)
    }

    /// Axial force and moment resisted when the neutral axis sits at depth `c`.
    ///
    /// `c = +∞` gives uniform crushing strain (pure compression) and `c = 0`
    /// the pure-tension limit.
    pub fn forces_at(&self, c: f64, materials: &Materials) -> (f64, f64) {
        let yc = self.centroid();
        let fc = 0.85 * materials.fc_mpa;
        let a = (materials.beta1() * c).min(self.height);
        let (block_area, block_moment) = if c > 0.0 { self.block(a) } else { (0.0, 0.0) };
        let concrete = fc * block_area;
        let mut axial = concrete;
        let mut moment = if block_area > 0.0 {
            concrete * (yc - block_moment / block_area)
        } else {
            0.0
        };
        for layer in &self.steel {
            let strain = if c.is_infinite() {
                CONCRETE_CRUSHING_STRAIN
            } else if c <= 0.0 {
                -f64::INFINITY
            } else {
                CONCRETE_CRUSHING_STRAIN * (c - layer.depth) / c
            };
            let stress = (materials.es_mpa * strain).clamp(-materials.fy_mpa, materials.fy_mpa);
            let force = stress * layer.area;
            axial += force;
            moment += force * (yc - layer.depth);
        }
        (axial, moment)
    }

    /// Neutral-axis depth beyond which every layer yields in compression and
    /// the block covers the whole section.
    fn saturation_depth(&self, materials: &Materials) -> f64 {
        let full_block = self.height / materials.beta1();
        let eps_y = materials.yield_strain();
        let steel = if eps_y < CONCRETE_CRUSHING_STRAIN {
            self.extreme_steel_depth() / (1.0 - eps_y / CONCRETE_CRUSHING_STRAIN)
        } else {
            1e3 * self.height
        };
        full_block.max(steel) * (1.0 + 1e-9) + 1e-9
    }

    /// Neutral-axis depth at which the section resists axial force `p` (N),
    /// or `None` outside the pure-tension/pure-compression range.
    pub fn neutral_axis_for(&self, p: f64, materials: &Materials) -> Option<f64> {
        let p_min = -materials.fy_mpa * self.steel_area();
        let c_hi = self.saturation_depth(materials);
        let p_max = self.forces_at(c_hi, materials).0;
        if p < p_min || p > p_max {
            return None;
        }
        let (mut lo, mut hi) = (0.0, c_hi);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.forces_at(mid, materials).0 < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-12 * c_hi {
                break;
            }
        }
        Some(0.5 * (lo + hi))
    }

    /// Nominal moment (N·mm) at axial force `p` (N), top face in compression.
    pub fn moment_at_axial(&self, p: f64, materials: &Materials) -> Option<(f64, f64)> {
        let c = self.neutral_axis_for(p, materials)?;
        Some((c, self.forces_at(c, materials).1))
    }

    /// Neutral-axis depth of the balanced strain state.
    pub fn balanced_depth(&self, materials: &Materials) -> f64 {
        let eps_y = materials.yield_strain();
        self.extreme_steel_depth() * CONCRETE_CRUSHING_STRAIN / (CONCRETE_CRUSHING_STRAIN + eps_y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionPoint {
    /// Axial force, kN, compression positive.
    pub p_kn: f64,
    /// Nominal moment, kN·m.
    pub m_knm: f64,
}

/// Axial–moment interaction polyline, sorted by axial force.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionCurve {
    points: Vec<InteractionPoint>,
    balanced: InteractionPoint,
}

/// Neutral-axis positions sampled evenly over the section depth.
pub const INTERACTION_SAMPLES: usize = 21;

impl InteractionCurve {
    /// Samples the section from pure tension to the axial cap `p_cap_kn`.
    ///
    /// Vertices: the pure-tension point, [`INTERACTION_SAMPLES`] evenly
    /// spaced neutral-axis depths over the section height (the first of
    /// which is the tension limit), the balanced point, the zero-axial point
    /// and the pure-compression point, truncated at the cap.
    pub fn sample(section: &RcSection, materials: &Materials, p_cap_kn: f64) -> Self {
        let to_point = |(p, m): (f64, f64)| InteractionPoint { p_kn: p * 1e-3, m_knm: m * 1e-6 };
        let h = section.height();
        let mut points: Vec<InteractionPoint> = (0..INTERACTION_SAMPLES)
            .map(|k| {
                let c = h * k as f64 / (INTERACTION_SAMPLES - 1) as f64;
                to_point(section.forces_at(c, materials))
            })
            .collect();
        let balanced = to_point(section.forces_at(section.balanced_depth(materials), materials));
        points.push(balanced);
        if let Some((_, m)) = section.moment_at_axial(0.0, materials) {
            points.push(InteractionPoint { p_kn: 0.0, m_knm: m * 1e-6 });
        }
        points.push(to_point(section.forces_at(f64::INFINITY, materials)));
        points.sort_by(|a, b| a.p_kn.total_cmp(&b.p_kn));
        points.dedup_by(|a, b| (a.p_kn - b.p_kn).abs() <= 1e-12 * (1.0 + b.p_kn.abs()));

        if let Some(idx) = points.iter().position(|pt| pt.p_kn > p_cap_kn) {
            if idx > 0 {
                let m = interpolate(&points[idx - 1], &points[idx], p_cap_kn);
                points.truncate(idx);
                if (points[idx - 1].p_kn - p_cap_kn).abs() > 1e-12 {
                    points.push(InteractionPoint { p_kn: p_cap_kn, m_knm: m });
                }
            }
        }
        Self { points, balanced }
    }

    pub fn points(&self) -> &[InteractionPoint] {
        &self.points
    }

    pub fn balanced(&self) -> InteractionPoint {
        self.balanced
    }

    pub fn max_axial(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.p_kn)
    }

    pub fn min_axial(&self) -> f64 {
        self.points.first().map_or(0.0, |p| p.p_kn)
    }

    /// Nominal moment at axial load `p_kn`, by linear interpolation and
    /// clamped to the end vertices outside the sampled range.
    pub fn moment_at(&self, p_kn: f64) -> f64 {
        let pts = &self.points;
        match pts.iter().position(|pt| pt.p_kn >= p_kn) {
            None => pts.last().map_or(0.0, |p| p.m_knm),
            Some(0) => pts[0].m_knm,
            Some(i) => interpolate(&pts[i - 1], &pts[i], p_kn),
        }
    }
}

fn interpolate(a: &InteractionPoint, b: &InteractionPoint, p: f64) -> f64 {
    let span = b.p_kn - a.p_kn;
    if span.abs() < f64::EPSILON {
        return a.m_knm.max(b.m_knm);
    }
    a.m_knm + (b.m_knm - a.m_knm) * (p - a.p_kn) / span
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doubly(area_top: f64, area_bot: f64) -> RcSection {
        RcSection::rectangle(
            300.0,
            500.0,
            vec![
                SteelLayer { depth: 58.0, area: area_top },
                SteelLayer { depth: 442.0, area: area_bot },
            ],
        )
    }

    #[test]
    fn geometric_properties() {
        let s = RcSection::rectangle(300.0, 600.0, vec![]);
        assert_eq!(s.gross_area(), 180_000.0);
        assert_eq!(s.centroid(), 300.0);
        assert!((s.gross_inertia() - 300.0 * 600f64.powi(3) / 12.0).abs() < 1e-3);
        let t = RcSection::stacked(&[(100.0, 400.0), (300.0, 200.0), (100.0, 400.0)], vec![]);
        assert_eq!(t.height(), 500.0);
        assert!((t.centroid() - 250.0).abs() < 1e-12);
    }

    #[test]
    fn axial_force_is_monotone_in_neutral_axis() {
        let m = Materials::default();
        let s = doubly(600.0, 1200.0);
        let mut last = f64::NEG_INFINITY;
        for k in 0..400 {
            let p = s.forces_at(k as f64 * 3.0, &m).0;
            assert!(p >= last - 1e-9);
            last = p;
        }
    }

    #[test]
    fn endpoints() {
        let m = Materials::default();
        let s = doubly(600.0, 600.0);
        let (p_t, m_t) = s.forces_at(0.0, &m);
        assert!((p_t + 400.0 * 1200.0).abs() < 1e-6);
        assert!(m_t.abs() < 1e-6);
        let (p_c, m_c) = s.forces_at(f64::INFINITY, &m);
        assert!((p_c - (0.85 * 30.0 * 150_000.0 + 400.0 * 1200.0)).abs() < 1e-6);
        assert!(m_c.abs() < 1e-3);
    }

    #[test]
    fn flipping_swaps_faces() {
        let m = Materials::default();
        let s = doubly(600.0, 1200.0);
        let pos = s.moment_at_axial(0.0, &m).unwrap().1;
        let neg = s.flipped().moment_at_axial(0.0, &m).unwrap().1;
        assert!(pos > neg && neg > 0.0);
        let sym = doubly(900.0, 900.0);
        let a = sym.moment_at_axial(0.0, &m).unwrap().1;
        let b = sym.flipped().moment_at_axial(0.0, &m).unwrap().1;
        assert!((a - b).abs() < 1e-6 * a);
    }

    #[test]
    fn curve_is_truncated_at_cap_and_clamps() {
        let m = Materials::default();
        let s = doubly(900.0, 900.0);
        let full = InteractionCurve::sample(&s, &m, f64::INFINITY);
        assert!(full.points().len() >= 20);
        let curve = InteractionCurve::sample(&s, &m, 2000.0);
        assert!((curve.max_axial() - 2000.0).abs() < 1e-9);
        assert_eq!(curve.moment_at(1e9), curve.points().last().unwrap().m_knm);
        assert_eq!(curve.moment_at(-1e9), curve.points()[0].m_knm);
    }
}
