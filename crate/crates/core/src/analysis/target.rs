//! Coefficient-method target displacement.

use super::pushover::PushoverTrace;
use super::AnalysisError;
use crate::frame::GRAVITY;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetDisplacementInputs {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Spectral acceleration, g.
    pub s_a: f64,
    /// Effective period, s.
    pub t_e: f64,
    /// Gravitational acceleration, m/s².
    pub g: f64,
}

impl TargetDisplacementInputs {
    pub fn new(c0: f64, s_a: f64, t_e: f64) -> Self {
        Self { c0, c1: 1.0, c2: 1.0, c3: 1.0, s_a, t_e, g: GRAVITY }
    }
}

/// `T_e = T_i·√(K_i/K_e)`.
pub fn effective_period(t_i: f64, k_i: f64, k_e: f64) -> Result<f64, AnalysisError> {
    if !(t_i > 0.0 && k_i > 0.0 && k_e > 0.0) {
        return Err(AnalysisError::Input(format!("periods and stiffnesses must be positive: T_i={t_i}, K_i={k_i}, K_e={k_e}")));
    }
    if k_e > k_i {
        log::debug!("effective stiffness {k_e} exceeds initial stiffness {k_i}");
    }
    Ok(t_i * (k_i / k_e).sqrt())
}

/// `δ_t = C0·C1·C2·C3·S_a·T_e²/(4π²)·g`, m.
pub fn target_displacement(inputs: &TargetDisplacementInputs) -> Result<f64, AnalysisError> {
    let i = inputs;
    for (name, v) in [("C0", i.c0), ("C1", i.c1), ("C2", i.c2), ("C3", i.c3), ("S_a", i.s_a), ("T_e", i.t_e), ("g", i.g)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(AnalysisError::Input(format!("{name} must be nonnegative, got {v}")));
        }
    }
    Ok(i.c0 * i.c1 * i.c2 * i.c3 * i.s_a * i.t_e * i.t_e / (4.0 * PI * PI) * i.g)
}

/// Roof-to-spectral displacement factor as a function of story count,
/// interpolated linearly between entries and held constant beyond them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C0Table(pub Vec<(f64, f64)>);

impl Default for C0Table {
    fn default() -> Self {
        Self(vec![(1.0, 1.0), (2.0, 1.2), (3.0, 1.3), (5.0, 1.4), (10.0, 1.5)])
    }
}

impl C0Table {
    pub fn value(&self, stories: usize) -> f64 {
        let n = stories as f64;
        let t = &self.0;
        if t.is_empty() {
            return 1.0;
        }
        if n <= t[0].0 {
            return t[0].1;
        }
        for w in t.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if n <= x1 {
                return y0 + (y1 - y0) * (n - x0) / (x1 - x0);
            }
        }
        t[t.len() - 1].1
    }
}

/// Fundamental period estimate `2π·√(Σm·u² / Σf·u)` from the displaced
/// shape `u` under floor forces `f` (kN) with floor masses `m` (t).
pub fn rayleigh_period(masses: &[f64], forces: &[f64], shape: &[f64]) -> Result<f64, AnalysisError> {
    let num: f64 = masses.iter().zip(shape).map(|(m, u)| m * u * u).sum();
    let den: f64 = forces.iter().zip(shape).map(|(f, u)| f * u).sum();
    if !(num > 0.0 && den > 0.0) {
        return Err(AnalysisError::Input("degenerate displaced shape for period estimate".into()));
    }
    Ok(2.0 * PI * (num / den).sqrt())
}

/// Initial stiffness, effective secant stiffness at 0.6 of the peak base
/// shear, and the peak base shear, read from a capacity curve.
pub fn idealized_stiffness(trace: &PushoverTrace) -> Result<(f64, f64, f64), AnalysisError> {
    if !(trace.initial_flexibility > 0.0) {
        return Err(AnalysisError::Input("capacity curve has no elastic branch".into()));
    }
    let k_i = 1.0 / trace.initial_flexibility;
    let v_y = trace.peak_base_shear();
    let u0 = trace.gravity_roof_disp();
    let v_e = 0.6 * v_y;
    let steps = &trace.steps;
    for w in steps.windows(2) {
        if w[1].base_shear >= v_e && w[1].base_shear > w[0].base_shear {
            let t = (v_e - w[0].base_shear) / (w[1].base_shear - w[0].base_shear);
            let u = w[0].roof_disp + t * (w[1].roof_disp - w[0].roof_disp) - u0;
            if u > 0.0 {
                return Ok((k_i, v_e / u, v_y));
            }
        }
    }
    Err(AnalysisError::Input("capacity curve never develops base shear".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn effective_period_values() {
        assert_relative_eq!(effective_period(0.5, 3.0, 3.0).unwrap(), 0.5);
        assert!((effective_period(0.5, 2.0, 1.0).unwrap() - 0.70711).abs() < 1e-5);
        assert!(effective_period(0.5, 1.0, 2.0).unwrap() < 0.5);
        assert!(effective_period(0.0, 1.0, 1.0).is_err());
        assert!(effective_period(0.5, 1.0, -1.0).is_err());
    }

    #[test]
    fn target_displacement_values() {
        let base = TargetDisplacementInputs::new(1.0, 1.0, 1.0);
        let d = target_displacement(&base).unwrap();
        assert!((d - 0.24849).abs() < 1e-5);
        assert_eq!(target_displacement(&TargetDisplacementInputs { c2: 0.0, ..base }).unwrap(), 0.0);
        let doubled = target_displacement(&TargetDisplacementInputs { t_e: 2.0, ..base }).unwrap();
        assert_relative_eq!(doubled, 4.0 * d, max_relative = 1e-12);
        assert!(target_displacement(&TargetDisplacementInputs { s_a: -1.0, ..base }).is_err());
    }

    #[test]
    fn c0_interpolation() {
        let t = C0Table::default();
        assert_eq!(t.value(1), 1.0);
        assert_eq!(t.value(2), 1.2);
        assert_relative_eq!(t.value(4), 1.35);
        assert_relative_eq!(t.value(8), 1.46);
        assert_eq!(t.value(12), 1.5);
    }

    #[test]
    fn rayleigh_single_mass() {
        // One mass on a spring of stiffness k: exact period 2π√(m/k).
        let (m, k) = (10.0, 4000.0);
        let t = rayleigh_period(&[m], &[1.0], &[1.0 / k]).unwrap();
        assert_relative_eq!(t, 2.0 * PI * (m / k).sqrt(), max_relative = 1e-12);
    }
}
