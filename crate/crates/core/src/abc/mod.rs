//! Artificial bee colony search over box-bounded real vectors.
//!
//! Random draws for a phase are all made up front by one generator; the
//! candidates are then evaluated in parallel and merged in source order, so a
//! run depends only on its seed.

mod design;

pub use design::{decode, DesignSearch, LevelRun};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AbcConfig {
    /// Colony size `N_p`: half employed bees, half onlookers.
    pub colony_size: usize,
    /// Trials without improvement before a source is abandoned.
    pub limit: usize,
    pub max_iterations: usize,
    /// Fraction of the dimensions perturbed by one move.
    pub vcp: f64,
    pub runs: usize,
    pub seed: u64,
    /// Fraction of `max_iterations` after which a population without a
    /// feasible source is declared divergent.
    pub divergence_window: f64,
    /// Stop a run as soon as it is declared divergent.
    pub abort_on_divergence: bool,
}

impl Default for AbcConfig {
    fn default() -> Self {
        Self {
            colony_size: 30,
            limit: 20,
            max_iterations: 100,
            vcp: 0.2,
            runs: 1,
            seed: 1,
            divergence_window: 0.1,
            abort_on_divergence: false,
        }
    }
}

impl AbcConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.colony_size < 2 || self.colony_size % 2 != 0 {
            return Err(format!("colony_size must be an even number of at least 2, got {}", self.colony_size));
        }
        if self.limit == 0 {
            return Err("limit must be at least 1".into());
        }
        if !(self.vcp > 0.0 && self.vcp <= 1.0) {
            return Err(format!("vcp must lie in (0, 1], got {}", self.vcp));
        }
        if self.runs == 0 {
            return Err("runs must be at least 1".into());
        }
        if !(self.divergence_window > 0.0 && self.divergence_window <= 1.0) {
            return Err(format!("divergence_window must lie in (0, 1], got {}", self.divergence_window));
        }
        Ok(())
    }

    pub fn sources(&self) -> usize {
        self.colony_size / 2
    }

    /// Iteration at which divergence is checked.
    pub fn divergence_iteration(&self) -> usize {
        (self.divergence_window * self.max_iterations as f64).ceil() as usize
    }

    /// Seeds of the independent runs, derived from `seed`.
    pub fn run_seeds(&self) -> Vec<u64> {
        let mut master = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.runs).map(|_| master.gen()).collect()
    }
}

#[derive(Debug, Error)]
pub enum AbcError<E> {
    #[error("invalid optimizer settings: {0}")]
    Config(String),
    #[error("evaluation failed at {x:?}: {source}")]
    Evaluation { x: Vec<f64>, source: E },
}

/// Objective value of one candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fitness {
    /// Penalized objective; the quantity minimized.
    pub phi: f64,
    /// Unpenalized objective.
    pub weight: f64,
    /// Aggregate constraint violation.
    pub violation: f64,
}

impl Fitness {
    pub fn unconstrained(value: f64) -> Self {
        Self { phi: value, weight: value, violation: 0.0 }
    }

    pub fn feasible(&self) -> bool {
        self.violation == 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoodSource {
    pub x: Vec<f64>,
    pub fitness: Fitness,
    pub trial: usize,
}

/// One convergence-history row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub iteration: usize,
    pub best_phi: f64,
    pub best_weight_kg: f64,
    #[serde(rename = "best_C")]
    pub best_c: f64,
    pub feasible_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub seed: u64,
    pub best_x: Vec<f64>,
    pub best: Fitness,
    /// Best-so-far after initialization (iteration 0) and every iteration.
    pub history: Vec<HistoryRow>,
    pub diverged: bool,
    /// Stopped early because of divergence.
    pub aborted: bool,
    pub evaluations: usize,
}

/// Independent runs and their spread.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSet {
    pub runs: Vec<RunResult>,
    /// Index of the run with the lowest best objective.
    pub best_run: usize,
}

impl RunSet {
    pub fn best(&self) -> &RunResult {
        &self.runs[self.best_run]
    }

    /// Mean and population standard deviation of the per-run best objective.
    pub fn phi_stats(&self) -> (f64, f64) {
        let n = self.runs.len() as f64;
        let mean = self.runs.iter().map(|r| r.best.phi).sum::<f64>() / n;
        let var = self.runs.iter().map(|r| (r.best.phi - mean).powi(2)).sum::<f64>() / n;
        (mean, var.sqrt())
    }
}

/// `x_j = lo_j + u_j·(hi_j − lo_j)` for uniform draws `u_j ∈ [0, 1)`.
pub fn random_point(bounds: &[(f64, f64)], rng: &mut impl Rng) -> Vec<f64> {
    bounds.iter().map(|&(lo, hi)| point_from_unit(lo, hi, rng.gen())).collect()
}

fn point_from_unit(lo: f64, hi: f64, u: f64) -> f64 {
    lo + u * (hi - lo)
}

/// Positions of `sources` random food sources.
pub fn init_population(bounds: &[(f64, f64)], sources: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    (0..sources).map(|_| random_point(bounds, rng)).collect()
}

/// Perturbation of one move: the dimensions changed and their step factors.
#[derive(Debug, Clone, PartialEq)]
pub struct Move {
    pub source: usize,
    pub partner: usize,
    pub dims: Vec<usize>,
    pub phis: Vec<f64>,
}

impl Move {
    pub fn draw(source: usize, sources: usize, dimension: usize, vcp: f64, rng: &mut impl Rng) -> Self {
        let mut partner = rng.gen_range(0..sources - 1);
        if partner >= source {
            partner += 1;
        }
        let count = ((vcp * dimension as f64).round() as usize).clamp(1, dimension);
        let mut dims = sample(rng, dimension, count).into_vec();
        dims.sort_unstable();
        let phis = dims.iter().map(|_| rng.gen_range(-1.0..=1.0)).collect();
        Self { source, partner, dims, phis }
    }
}

/// `v_j = x_j + φ_j·(x_j − k_j)` on the chosen dimensions, clamped to bounds.
pub fn neighbor_move(x: &[f64], partner: &[f64], dims: &[usize], phis: &[f64], bounds: &[(f64, f64)]) -> Vec<f64> {
    let mut v = x.to_vec();
    for (&j, &phi) in dims.iter().zip(phis) {
        let (lo, hi) = bounds[j];
        v[j] = (x[j] + phi * (x[j] - partner[j])).clamp(lo, hi);
    }
    v
}

/// Keeps the candidate when it is no worse; returns whether it was kept.
pub fn greedy_select(source: &mut FoodSource, x: Vec<f64>, fitness: Fitness) -> bool {
    if fitness.phi <= source.fitness.phi {
        source.x = x;
        source.fitness = fitness;
        source.trial = 0;
        true
    } else {
        source.trial += 1;
        false
    }
}

/// `p = 0.9·f_min/f + 0.1`.
pub fn onlooker_probability(f: f64, f_min: f64) -> Result<f64, String> {
    if !(f > 0.0 && f_min > 0.0) {
        return Err(format!("fitness values must be positive, got f={f}, f_min={f_min}"));
    }
    Ok(0.9 * f_min / f + 0.1)
}

/// The source to abandon, if any: the one with the most trials at or above
/// the limit (lowest index on ties).
pub fn scout_candidate(sources: &[FoodSource], limit: usize) -> Option<usize> {
    let mut pick: Option<usize> = None;
    for (i, s) in sources.iter().enumerate() {
        if s.trial >= limit && pick.is_none_or(|p| s.trial > sources[p].trial) {
            pick = Some(i);
        }
    }
    pick
}

/// Selection probabilities; nonpositive objectives (possible for generic
/// test functions) fall back to rank-free uniform selection.
fn probabilities(sources: &[FoodSource]) -> Vec<f64> {
    let f_min = sources.iter().map(|s| s.fitness.phi).fold(f64::INFINITY, f64::min);
    sources
        .iter()
        .map(|s| onlooker_probability(s.fitness.phi, f_min).unwrap_or(if s.fitness.phi == f_min { 1.0 } else { 0.1 }))
        .collect()
}

/// Onlooker picks: sources are visited cyclically and each accepted with its
/// probability until `count` picks are made.
fn onlooker_picks(p: &[f64], count: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut picks = Vec::with_capacity(count);
    let mut i = 0;
    while picks.len() < count {
        if rng.gen::<f64>() < p[i] {
            picks.push(i);
        }
        i = (i + 1) % p.len();
    }
    picks
}

struct Search<'a, F> {
    config: &'a AbcConfig,
    bounds: &'a [(f64, f64)],
    eval: &'a F,
    evaluations: usize,
}

impl<F, E> Search<'_, F>
where
    F: Fn(&[f64]) -> Result<Fitness, E> + Sync,
    E: Send,
{
    fn evaluate_all(&mut self, xs: &[Vec<f64>]) -> Result<Vec<Fitness>, AbcError<E>> {
        self.evaluations += xs.len();
        let eval = self.eval;
        xs.par_iter()
            .map(|x| eval(x).map_err(|source| AbcError::Evaluation { x: x.clone(), source }))
            .collect()
    }

    fn moves(&mut self, sources: &mut [FoodSource], plan: Vec<Move>) -> Result<(), AbcError<E>> {
        let xs: Vec<Vec<f64>> = plan
            .iter()
            .map(|m| neighbor_move(&sources[m.source].x, &sources[m.partner].x, &m.dims, &m.phis, self.bounds))
            .collect();
        let fits = self.evaluate_all(&xs)?;
        for ((m, x), f) in plan.iter().zip(xs).zip(fits) {
            greedy_select(&mut sources[m.source], x, f);
        }
        Ok(())
    }

    fn run(&mut self, seed: u64, warm_start: &[Vec<f64>]) -> Result<RunResult, AbcError<E>> {
        let cfg = self.config;
        let n = cfg.sources();
        let d = self.bounds.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut xs = init_population(self.bounds, n, &mut rng);
        for (slot, x) in xs.iter_mut().zip(warm_start) {
            *slot = x.iter().zip(self.bounds).map(|(v, &(lo, hi))| v.clamp(lo, hi)).collect();
        }
        let fits = self.evaluate_all(&xs)?;
        let mut sources: Vec<FoodSource> =
            xs.into_iter().zip(fits).map(|(x, fitness)| FoodSource { x, fitness, trial: 0 }).collect();
        let mut best = sources[0].clone();
        let mut history = Vec::with_capacity(cfg.max_iterations + 1);
        let record = |iteration: usize, sources: &[FoodSource], best: &mut FoodSource, history: &mut Vec<HistoryRow>| {
            for s in sources {
                if s.fitness.phi < best.fitness.phi {
                    *best = s.clone();
                }
            }
            history.push(HistoryRow {
                iteration,
                best_phi: best.fitness.phi,
                best_weight_kg: best.fitness.weight,
                best_c: best.fitness.violation,
                feasible_count: sources.iter().filter(|s| s.fitness.feasible()).count(),
            });
        };
        record(0, &sources, &mut best, &mut history);
        let check_at = cfg.divergence_iteration();
        let (mut diverged, mut aborted) = (false, false);

        for it in 1..=cfg.max_iterations {
            if n > 1 {
                let plan: Vec<Move> = (0..n).map(|i| Move::draw(i, n, d, cfg.vcp, &mut rng)).collect();
                self.moves(&mut sources, plan)?;
                let p = probabilities(&sources);
                let picks = onlooker_picks(&p, n, &mut rng);
                let plan: Vec<Move> = picks.into_iter().map(|i| Move::draw(i, n, d, cfg.vcp, &mut rng)).collect();
                self.moves(&mut sources, plan)?;
            }
            record(it, &sources, &mut best, &mut history);
            if let Some(i) = scout_candidate(&sources, cfg.limit) {
                let x = random_point(self.bounds, &mut rng);
                let f = self.evaluate_all(std::slice::from_ref(&x))?[0];
                sources[i] = FoodSource { x, fitness: f, trial: 0 };
                let last = history.pop().expect("recorded");
                record(last.iteration, &sources, &mut best, &mut history);
            }
            if it == check_at && !best.fitness.feasible() && !sources.iter().any(|s| s.fitness.feasible()) {
                diverged = true;
                log::warn!("run with seed {seed}: no feasible source after {it} iterations");
                if cfg.abort_on_divergence {
                    aborted = true;
                    break;
                }
            }
        }
        Ok(RunResult {
            seed,
            best_x: best.x,
            best: best.fitness,
            history,
            diverged,
            aborted,
            evaluations: self.evaluations,
        })
    }
}

/// Runs the colony `config.runs` times with derived seeds. The first sources
/// of every run are placed at `warm_start` (clamped) instead of random points.
pub fn run<F, E>(
    config: &AbcConfig,
    bounds: &[(f64, f64)],
    warm_start: &[Vec<f64>],
    eval: &F,
) -> Result<RunSet, AbcError<E>>
where
    F: Fn(&[f64]) -> Result<Fitness, E> + Sync,
    E: Send,
{
    config.validate().map_err(AbcError::Config)?;
    if bounds.is_empty() || bounds.iter().any(|(lo, hi)| !(lo <= hi)) {
        return Err(AbcError::Config("bounds must be nonempty with lo <= hi".into()));
    }
    if warm_start.iter().any(|x| x.len() != bounds.len()) {
        return Err(AbcError::Config("warm-start point has the wrong dimension".into()));
    }
    let mut runs = Vec::with_capacity(config.runs);
    for seed in config.run_seeds() {
        let mut search = Search { config, bounds, eval, evaluations: 0 };
        runs.push(search.run(seed, warm_start)?);
    }
    let best_run = (0..runs.len())
        .min_by(|&a, &b| runs[a].best.phi.total_cmp(&runs[b].best.phi))
        .expect("at least one run");
    Ok(RunSet { runs, best_run })
}
