use super::{run, AbcConfig, AbcError, Fitness, RunSet};
use crate::constraints::{EvalError, Evaluator, PenaltyReport, PerformanceLevel};
use crate::frame::DesignVector;
use std::collections::HashMap;
use std::sync::Mutex;

/// Catalog ids of a continuous position: rounded, then clamped to bounds.
pub fn decode(x: &[f64], bounds: &[(u32, u32)]) -> Vec<u32> {
    x.iter()
        .zip(bounds)
        .map(|(v, &(lo, hi))| {
            let r = v.round();
            if r.is_nan() || r <= lo as f64 {
                lo
            } else if r >= hi as f64 {
                hi
            } else {
                r as u32
            }
        })
        .collect()
}

/// Outcome of optimizing one frame at one set of levels.
#[derive(Debug, Clone)]
pub struct LevelRun {
    pub levels: Vec<PerformanceLevel>,
    pub runs: RunSet,
    pub best_design: DesignVector,
    pub best_report: PenaltyReport,
    /// Distinct designs analyzed.
    pub distinct_designs: usize,
}

/// Searches catalog ids of one frame with a memo of analyzed designs.
pub struct DesignSearch<'a> {
    evaluator: &'a Evaluator,
    bounds: Vec<(u32, u32)>,
    cache: Mutex<HashMap<Vec<u32>, PenaltyReport>>,
}

impl<'a> DesignSearch<'a> {
    pub fn new(evaluator: &'a Evaluator) -> Self {
        Self { evaluator, bounds: evaluator.bounds(), cache: Mutex::new(HashMap::new()) }
    }

    pub fn bounds(&self) -> &[(u32, u32)] {
        &self.bounds
    }

    /// Search box: each id owns a unit interval, so `[lo − ½, hi + ½]`.
    pub fn continuous_bounds(&self) -> Vec<(f64, f64)> {
        self.bounds.iter().map(|&(lo, hi)| (lo as f64 - 0.5, hi as f64 + 0.5)).collect()
    }

    pub fn design(&self, x: &[f64]) -> DesignVector {
        DesignVector::from_flat(self.evaluator.model(), &decode(x, &self.bounds)).expect("dimension matches model")
    }

    pub fn report(&self, design: &DesignVector) -> Result<PenaltyReport, EvalError> {
        let key = design.to_flat();
        if let Some(r) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(*r);
        }
        let r = self.evaluator.evaluate(design)?;
        self.cache.lock().expect("cache lock").insert(key, r);
        Ok(r)
    }

    pub fn fitness(&self, x: &[f64]) -> Result<Fitness, EvalError> {
        let r = self.report(&self.design(x))?;
        Ok(Fitness { phi: r.phi, weight: r.weight, violation: r.total })
    }

    pub fn distinct_designs(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }

    /// Runs the colony; `seeds` are placed as the first food sources.
    pub fn optimize(&self, config: &AbcConfig, seeds: &[DesignVector]) -> Result<LevelRun, AbcError<EvalError>> {
        let bounds = self.continuous_bounds();
        let warm: Vec<Vec<f64>> = seeds.iter().map(|d| d.to_flat().into_iter().map(f64::from).collect()).collect();
        let runs = run(config, &bounds, &warm, &|x: &[f64]| self.fitness(x))?;
        let best_design = self.design(&runs.best().best_x);
        let best_report = self
            .report(&best_design)
            .map_err(|source| AbcError::Evaluation { x: runs.best().best_x.clone(), source })?;
        Ok(LevelRun {
            levels: self.evaluator.levels().to_vec(),
            runs,
            best_design,
            best_report,
            distinct_designs: self.distinct_designs(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_rounds_then_clamps() {
        let b = [(1, 31), (1, 65), (1, 26)];
        assert_eq!(decode(&[1.4, 1.6, 26.49], &b), vec![1, 2, 26]);
        assert_eq!(decode(&[0.2, 70.0, 26.6], &b), vec![1, 65, 26]);
        assert_eq!(decode(&[-3.0, f64::NAN, 2.5], &b), vec![1, 1, 3]);
        assert_eq!(decode(&[3.7, 0.4, 31.5], &[(1, 31); 3]), vec![4, 1, 31]);
    }
}
