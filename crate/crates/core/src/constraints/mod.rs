//! Violation terms, their aggregate and the penalized objective.
//!
//! Every constraint is reported as a nonnegative violation magnitude:
//! zero when satisfied, otherwise the relative shortfall against its limit,
//! taken as the largest over the members it governs.

mod checks;
mod evaluator;
mod tables;

pub use checks::{
    performance_violations, strength_violations, DemandState, DesignLimits, LevelOutcome, StrengthDemands, PSI_SHEAR_FACTOR,
};
pub use evaluator::{EvalError, Evaluation, Evaluator, EvaluatorConfig, LevelResponse, Spectrum, TargetSummary};
pub use tables::{AllowableTables, HingeKind, PerformanceLevel, TableError, TableRow};

use serde::{Deserialize, Serialize};

/// Number of violation terms.
pub const CONSTRAINT_COUNT: usize = 21;

/// Short label of each violation term, in order.
pub const CONSTRAINT_NAMES: [&str; CONSTRAINT_COUNT] = [
    "elastic drift",
    "column axial",
    "column moment",
    "column shear",
    "column min steel",
    "column max steel",
    "column width taper",
    "column depth taper",
    "beam vs column width",
    "column aspect",
    "column slenderness",
    "column bar spacing",
    "beam moment",
    "beam shear",
    "beam min steel",
    "beam tension strain",
    "beam bar spacing",
    "beam depth",
    "story drift",
    "column/wall rotation",
    "beam rotation",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PenaltyParams {
    pub k: f64,
    pub eps: f64,
}

impl Default for PenaltyParams {
    fn default() -> Self {
        Self { k: 1.0, eps: 2.0 }
    }
}

impl PenaltyParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(format!("penalty constant must be positive, got {}", self.k));
        }
        if !(self.eps >= 1.0 && self.eps.is_finite()) {
            return Err(format!("penalty exponent must be at least 1, got {}", self.eps));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyReport {
    pub c: [f64; CONSTRAINT_COUNT],
    /// Aggregate violation `C`.
    #[serde(rename = "C")]
    pub total: f64,
    /// Structure weight, kg.
    #[serde(rename = "F")]
    pub weight: f64,
    pub phi: f64,
}

impl PenaltyReport {
    pub fn new(c: [f64; CONSTRAINT_COUNT], weight: f64, params: &PenaltyParams) -> Self {
        let total = aggregate(&c).expect("violation terms are nonnegative");
        Self { c, total, weight, phi: penalize(weight, total, params) }
    }

    pub fn feasible(&self) -> bool {
        self.total == 0.0
    }

    /// `(name, value)` of every nonzero term.
    pub fn active(&self) -> Vec<(&'static str, f64)> {
        CONSTRAINT_NAMES.iter().zip(self.c).filter(|(_, v)| *v > 0.0).map(|(n, v)| (*n, v)).collect()
    }
}

/// `C = Σ c_i`; rejects negative or non-finite terms.
pub fn aggregate(c: &[f64]) -> Result<f64, String> {
    if let Some((i, v)) = c.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(format!("violation term c{} is {v}; terms must be nonnegative", i + 1));
    }
    Ok(c.iter().sum())
}

/// `φ = F·(1 + K·C)^ε`.
pub fn penalize(weight: f64, total: f64, params: &PenaltyParams) -> f64 {
    weight * (1.0 + params.k * total).powf(params.eps)
}

/// Violation of an upper bound: `max(0, (demand − limit)/limit)`.
pub(crate) fn over(demand: f64, limit: f64) -> f64 {
    if demand <= limit {
        0.0
    } else {
        (demand - limit) / limit
    }
}

/// Violation of a lower bound: `max(0, (limit − value)/limit)`.
pub(crate) fn under(value: f64, limit: f64) -> f64 {
    if value >= limit {
        0.0
    } else {
        (limit - value) / limit
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn penalty_examples() {
        let p = PenaltyParams::default();
        assert_eq!(penalize(100.0, 0.0, &p), 100.0);
        assert_eq!(penalize(100.0, 1.0, &p), 400.0);
        assert_eq!(penalize(50.0, 0.5, &p), 112.5);
    }

    #[test]
    fn aggregate_examples() {
        let mut c = [0.0; CONSTRAINT_COUNT];
        assert_eq!(aggregate(&c).unwrap(), 0.0);
        c[0] = 0.1;
        c[1] = 0.2;
        assert!((aggregate(&c).unwrap() - 0.3).abs() < 1e-15);
        c[5] = -0.1;
        assert!(aggregate(&c).is_err());
    }

    #[test]
    fn violation_helpers() {
        assert_eq!(over(0.8, 1.0), 0.0);
        assert!((over(1.2, 1.0) - 0.2).abs() < 1e-12);
        assert_eq!(under(0.005, 0.01), 0.5);
        assert_eq!(under(0.02, 0.01), 0.0);
        assert_eq!(over(1.0, 1.0), 0.0);
    }

    #[test]
    fn report_consistency() {
        let mut c = [0.0; CONSTRAINT_COUNT];
        let r = PenaltyReport::new(c, 250.0, &PenaltyParams::default());
        assert!(r.feasible());
        assert_eq!(r.phi, 250.0);
        c[18] = 0.5;
        let r = PenaltyReport::new(c, 250.0, &PenaltyParams::default());
        assert_eq!(r.active(), vec![("story drift", 0.5)]);
        assert_eq!(r.phi, 562.5);
    }

    #[test]
    fn params_validation() {
        assert!(PenaltyParams::default().validate().is_ok());
        assert!(PenaltyParams { k: 0.0, eps: 2.0 }.validate().is_err());
        assert!(PenaltyParams { k: 1.0, eps: 0.5 }.validate().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn penalty_is_monotone(f in 1e-3f64..1e6, c in 0.0f64..100.0, dc in 1e-6f64..10.0, df in 1e-3f64..1e3) {
            let p = PenaltyParams::default();
            prop_assert!(penalize(f, c + dc, &p) > penalize(f, c, &p));
            prop_assert!(penalize(f + df, c, &p) > penalize(f, c, &p));
        }

        #[test]
        fn aggregate_ignores_order(mut v in proptest::collection::vec(0.0f64..10.0, 21)) {
            let a = aggregate(&v).unwrap();
            v.reverse();
            prop_assert!((aggregate(&v).unwrap() - a).abs() <= 1e-12 * a.max(1.0));
        }
    }
}
