//! Event-to-event nonlinear static analysis with lumped end hinges.
//!
//! Each member is split into an elastic component carrying a fraction
//! `alpha` of its stiffness and an elastic-perfectly-plastic component
//! carrying the rest. A hinge forms when the plastic component's end moment
//! reaches `(1 - alpha)` times the capacity; the component end is then
//! released by static condensation.

use super::structure::{factorize, fixed_end_forces, geometric_stiffness, linear_static, LoadCase, Structure};
use super::AnalysisError;
use nalgebra::{DVector, Matrix6, Vector6};
use serde::{Deserialize, Serialize};
use std::io;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PushoverControl {
    /// Lateral roof displacement to reach beyond the gravity state, m.
    pub target_roof_disp: f64,
    /// Roof displacement increment; `None` uses `target / 200`.
    pub step: Option<f64>,
    pub max_steps: usize,
    pub max_events_per_step: usize,
    pub p_delta: bool,
    /// Post-yield to elastic stiffness ratio of a hinge.
    pub post_yield_ratio: f64,
}

impl Default for PushoverControl {
    fn default() -> Self {
        Self {
            target_roof_disp: 0.1,
            step: None,
            max_steps: 2000,
            max_events_per_step: 100,
            p_delta: true,
            post_yield_ratio: 1e-3,
        }
    }
}

impl PushoverControl {
    pub fn step_size(&self) -> f64 {
        self.step.unwrap_or(self.target_roof_disp / 200.0)
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        if !(self.target_roof_disp > 0.0 && self.step_size() > 0.0) {
            return Err(AnalysisError::Model("pushover target and step must be positive".into()));
        }
        if !(self.post_yield_ratio > 0.0 && self.post_yield_ratio < 1.0) {
            return Err(AnalysisError::Model("post-yield ratio must lie in (0, 1)".into()));
        }
        if self.max_steps == 0 || self.max_events_per_step == 0 {
            return Err(AnalysisError::Model("step and event limits must be positive".into()));
        }
        Ok(())
    }
}

/// Floors whose mean horizontal displacement is recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct Monitor {
    /// Nodes of each floor from the base (index 0) to the roof.
    pub levels: Vec<Vec<usize>>,
    /// Height of each story, m.
    pub story_heights: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HingeEnd {
    I,
    J,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HingeState {
    pub member: usize,
    pub end: HingeEnd,
    /// Capacity in the direction of the current moment, kN·m.
    pub yield_moment: f64,
    /// Accumulated plastic rotation, rad.
    pub rotation: f64,
    pub yielded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PushoverStep {
    pub load_factor: f64,
    pub base_shear: f64,
    /// Mean roof displacement including the gravity state, m.
    pub roof_disp: f64,
    /// Mean displacement of floors 1..=ns, m.
    pub story_disp: Vec<f64>,
    pub drifts: Vec<f64>,
    pub rotations: Vec<[f64; 2]>,
    pub yielded: Vec<[bool; 2]>,
    pub end_forces: Vec<[f64; 6]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    TargetReached,
    /// The tangent stiffness lost positive definiteness or the control
    /// displacement stopped growing.
    Instability,
    MaxSteps,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PushoverTrace {
    pub steps: Vec<PushoverStep>,
    pub termination: Termination,
    /// Roof displacement per unit base shear on the first lateral step, m/kN.
    pub initial_flexibility: f64,
    /// Floor displacements per unit base shear on the first lateral step.
    pub initial_shape: Vec<f64>,
    pub story_heights: Vec<f64>,
    hinges: Vec<Option<[(f64, f64); 2]>>,
}

/// Drifts, rotations and forces at one roof displacement.
#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceState {
    pub roof_disp: f64,
    pub base_shear: f64,
    pub story_disp: Vec<f64>,
    pub drifts: Vec<f64>,
    pub rotations: Vec<[f64; 2]>,
    pub end_forces: Vec<[f64; 6]>,
}

fn drifts(story_disp: &[f64], heights: &[f64]) -> Vec<f64> {
    let mut below = 0.0;
    story_disp
        .iter()
        .zip(heights)
        .map(|(&u, &h)| {
            let d = (u - below) / h;
            below = u;
            d
        })
        .collect()
}

/// Inter-story drift ratios from floor displacements.
pub fn story_drifts(story_disp: &[f64], story_heights: &[f64]) -> Vec<f64> {
    drifts(story_disp, story_heights)
}

impl PushoverTrace {
    pub fn gravity_roof_disp(&self) -> f64 {
        self.steps[0].roof_disp
    }

    pub fn max_roof_disp(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.roof_disp)
    }

    pub fn peak_base_shear(&self) -> f64 {
        self.steps.iter().map(|s| s.base_shear).fold(0.0, f64::max)
    }

    /// Hinge states at step `index`.
    pub fn hinge_states(&self, index: usize) -> Vec<HingeState> {
        let step = &self.steps[index];
        let mut out = Vec::new();
        for (member, caps) in self.hinges.iter().enumerate() {
            let Some(caps) = caps else { continue };
            for (k, end) in [HingeEnd::I, HingeEnd::J].into_iter().enumerate() {
                let m = step.end_forces[member][2 + 3 * k];
                let (lo, hi) = caps[k];
                out.push(HingeState {
                    member,
                    end,
                    yield_moment: if m < 0.0 { -lo } else { hi },
                    rotation: step.rotations[member][k],
                    yielded: step.yielded[member][k],
                });
            }
        }
        out
    }

    /// Writes `step, load_factor, base_shear_kN, roof_disp_m, drift_1..`.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let ns = self.story_heights.len();
        let mut header = vec!["step".to_string(), "load_factor".into(), "base_shear_kN".into(), "roof_disp_m".into()];
        header.extend((1..=ns).map(|k| format!("drift_{k}")));
        w.write_record(&header)?;
        for (i, s) in self.steps.iter().enumerate() {
            let mut row = vec![i.to_string(), s.load_factor.to_string(), s.base_shear.to_string(), s.roof_disp.to_string()];
            row.extend(s.drifts.iter().map(f64::to_string));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One row of a capacity-curve CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub step: usize,
    pub load_factor: f64,
    pub base_shear: f64,
    pub roof_disp: f64,
    pub drifts: Vec<f64>,
}

/// Parses a capacity-curve CSV written by [`PushoverTrace::write_csv`].
pub fn read_curve_csv<R: io::Read>(input: R) -> Result<Vec<CurveRow>, String> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(|e| e.to_string())?.clone();
    if headers.len() < 4 || &headers[0] != "step" || &headers[3] != "roof_disp_m" {
        return Err("not a pushover curve: unexpected header".into());
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let num = |i: usize| rec[i].parse::<f64>().map_err(|e| format!("column {}: {e}", &headers[i]));
        rows.push(CurveRow {
            step: rec[0].parse().map_err(|e| format!("step: {e}"))?,
            load_factor: num(1)?,
            base_shear: num(2)?,
            roof_disp: num(3)?,
            drifts: (4..rec.len()).map(num).collect::<Result<_, _>>()?,
        });
    }
    Ok(rows)
}

/// Interpolated response at absolute roof displacement `roof`.
pub fn state_at(trace: &PushoverTrace, roof: f64) -> Result<PerformanceState, AnalysisError> {
    let steps = &trace.steps;
    let last = steps.last().ok_or(AnalysisError::NotReached { requested: roof, reached: 0.0 })?;
    if roof > last.roof_disp + 1e-12 || roof < steps[0].roof_disp - 1e-12 {
        return Err(AnalysisError::NotReached { requested: roof, reached: last.roof_disp });
    }
    let idx = steps.partition_point(|s| s.roof_disp < roof).min(steps.len() - 1);
    let hi = &steps[idx];
    if idx == 0 || hi.roof_disp == roof {
        return Ok(PerformanceState {
            roof_disp: hi.roof_disp,
            base_shear: hi.base_shear,
            story_disp: hi.story_disp.clone(),
            drifts: hi.drifts.clone(),
            rotations: hi.rotations.clone(),
            end_forces: hi.end_forces.clone(),
        });
    }
    let lo = &steps[idx - 1];
    let span = hi.roof_disp - lo.roof_disp;
    let t = if span > 0.0 { (roof - lo.roof_disp) / span } else { 1.0 };
    let lerp = |a: f64, b: f64| a + t * (b - a);
    let story_disp: Vec<f64> = lo.story_disp.iter().zip(&hi.story_disp).map(|(a, b)| lerp(*a, *b)).collect();
    Ok(PerformanceState {
        roof_disp: roof,
        base_shear: lerp(lo.base_shear, hi.base_shear),
        drifts: drifts(&story_disp, &trace.story_heights),
        story_disp,
        rotations: lo
            .rotations
            .iter()
            .zip(&hi.rotations)
            .map(|(a, b)| [lerp(a[0], b[0]), lerp(a[1], b[1])])
            .collect(),
        end_forces: lo
            .end_forces
            .iter()
            .zip(&hi.end_forces)
            .map(|(a, b)| std::array::from_fn(|k| lerp(a[k], b[k])))
            .collect(),
    })
}

/// Condenses the released rotational ends out of `k` and `fef`.
fn condense(k: &Matrix6<f64>, fef: &Vector6<f64>, released: [bool; 2]) -> (Matrix6<f64>, Vector6<f64>) {
    let r: Vec<usize> = [2usize, 5].into_iter().zip(released).filter(|(_, on)| *on).map(|(i, _)| i).collect();
    match r.as_slice() {
        [] => (*k, *fef),
        [a] => {
            let inv = 1.0 / k[(*a, *a)];
            let col = k.column(*a).into_owned();
            (k - col * k.row(*a) * inv, fef - col * (fef[*a] * inv))
        }
        _ => {
            let (a, b) = (2, 5);
            let det = k[(a, a)] * k[(b, b)] - k[(a, b)] * k[(b, a)];
            let inv = [[k[(b, b)] / det, -k[(a, b)] / det], [-k[(b, a)] / det, k[(a, a)] / det]];
            let mut kc = *k;
            let mut fc = *fef;
            for p in 0..6 {
                let kp = [k[(p, a)], k[(p, b)]];
                let w = [kp[0] * inv[0][0] + kp[1] * inv[1][0], kp[0] * inv[0][1] + kp[1] * inv[1][1]];
                for q in 0..6 {
                    kc[(p, q)] -= w[0] * k[(a, q)] + w[1] * k[(b, q)];
                }
                fc[p] -= w[0] * fef[a] + w[1] * fef[b];
            }
            (kc, fc)
        }
    }
}

/// Internal rotations of the released ends that keep the plastic
/// component's end moments constant.
fn released_rotations(k: &Matrix6<f64>, dd: &Vector6<f64>, fef: &Vector6<f64>, released: [bool; 2]) -> [f64; 2] {
    let mut masked = *dd;
    for (slot, on) in [2usize, 5].into_iter().zip(released) {
        if on {
            masked[slot] = 0.0;
        }
    }
    let rhs = k * masked + fef;
    match released {
        [false, false] => [0.0, 0.0],
        [true, false] => [-rhs[2] / k[(2, 2)], 0.0],
        [false, true] => [0.0, -rhs[5] / k[(5, 5)]],
        [true, true] => {
            let det = k[(2, 2)] * k[(5, 5)] - k[(2, 5)] * k[(5, 2)];
            [
                -(k[(5, 5)] * rhs[2] - k[(2, 5)] * rhs[5]) / det,
                -(-k[(5, 2)] * rhs[2] + k[(2, 2)] * rhs[5]) / det,
            ]
        }
    }
}

enum Increment<'a> {
    /// Apply the given load case from zero to full.
    Load { nodal: &'a DVector<f64>, member_w: &'a [f64] },
    /// Advance the control displacement by `du` under the reference pattern.
    Displacement { pattern: &'a DVector<f64>, control: &'a DVector<f64>, du: f64 },
}

struct ElementDelta {
    force: Vector6<f64>,
    m_ep: [f64; 2],
    theta_p: [f64; 2],
}

struct Engine<'a> {
    s: &'a Structure,
    alpha: f64,
    kg: Vec<Matrix6<f64>>,
    d: DVector<f64>,
    forces: Vec<Vector6<f64>>,
    m_ep: Vec<[f64; 2]>,
    yielded: Vec<[bool; 2]>,
    theta_p: Vec<[f64; 2]>,
    bounds: Vec<Option<[(f64, f64); 2]>>,
    lateral: f64,
    max_events: usize,
}

impl<'a> Engine<'a> {
    fn new(s: &'a Structure, control: &PushoverControl, axial: &[f64]) -> Self {
        let n_el = s.elements.len();
        let kg = (0..n_el)
            .map(|e| {
                if control.p_delta && s.elements[e].p_delta {
                    geometric_stiffness(axial[e], s.frames[e].length)
                } else {
                    Matrix6::zeros()
                }
            })
            .collect();
        let bounds = s
            .elements
            .iter()
            .map(|el| el.hinge.map(|h| [h.bounds(0), h.bounds(1)]))
            .collect();
        Self {
            s,
            alpha: control.post_yield_ratio,
            kg,
            d: DVector::zeros(s.equation_count()),
            forces: vec![Vector6::zeros(); n_el],
            m_ep: vec![[0.0; 2]; n_el],
            yielded: vec![[false; 2]; n_el],
            theta_p: vec![[0.0; 2]; n_el],
            bounds,
            lateral: 0.0,
            max_events: control.max_events_per_step,
        }
    }

    fn tangent_parts(&self, e: usize, w: f64) -> (Matrix6<f64>, Vector6<f64>, Matrix6<f64>, Vector6<f64>) {
        let fr = &self.s.frames[e];
        let fef = if w != 0.0 { fixed_end_forces(w, fr.length) } else { Vector6::zeros() };
        let (kc, fc) = condense(&fr.k, &fef, self.yielded[e]);
        (fr.k, fef, kc, fc)
    }

    fn element_delta(&self, e: usize, dd: &Vector6<f64>, w: f64) -> ElementDelta {
        let a = self.alpha;
        let (k, fef, kc, fc) = self.tangent_parts(e, w);
        let ep = kc * dd + fc;
        let force = (k * dd + fef) * a + ep * (1.0 - a) + self.kg[e] * dd;
        let theta_r = released_rotations(&k, dd, &fef, self.yielded[e]);
        let mut theta_p = [0.0; 2];
        for (end, slot) in [2usize, 5].into_iter().enumerate() {
            if self.yielded[e][end] {
                theta_p[end] = dd[slot] - theta_r[end];
            }
        }
        ElementDelta { force, m_ep: [(1.0 - a) * ep[2], (1.0 - a) * ep[5]], theta_p }
    }

    /// Advances one increment, resolving hinge events inside it.
    fn advance(&mut self, inc: &Increment<'_>) -> Result<(), AnalysisError> {
        let n_el = self.s.elements.len();
        let mut remaining = 1.0;
        let mut events = 0;
        let mut unloaded = vec![[false; 2]; n_el];
        while remaining > 1e-12 {
            let k = self.s.assemble(|e| {
                let fr = &self.s.frames[e];
                let (kc, _) = condense(&fr.k, &Vector6::zeros(), self.yielded[e]);
                fr.k * self.alpha + kc * (1.0 - self.alpha) + self.kg[e]
            });
            let chol = factorize(k)?;
            let (dd, load_frac, dlat) = match inc {
                Increment::Load { nodal, member_w } => {
                    let mut rhs = (*nodal).clone();
                    for (e, &w) in member_w.iter().enumerate() {
                        if w != 0.0 {
                            let (_, fef, _, fc) = self.tangent_parts(e, w);
                            let ft = fef * self.alpha + fc * (1.0 - self.alpha);
                            self.s.scatter_fixed(&mut rhs, e, &ft);
                        }
                    }
                    (chol.solve(&rhs) * remaining, remaining, 0.0)
                }
                Increment::Displacement { pattern, control, du } => {
                    let x = chol.solve(*pattern);
                    let cx = control.dot(&x);
                    if !(cx > 0.0) {
                        return Err(AnalysisError::Mechanism);
                    }
                    let dl = remaining * du / cx;
                    (x * dl, 0.0, dl)
                }
            };
            let member_w = match inc {
                Increment::Load { member_w, .. } => Some(*member_w),
                Increment::Displacement { .. } => None,
            };
            let deltas: Vec<ElementDelta> = (0..n_el)
                .map(|e| {
                    let dl = self.s.local_displacements(e, &dd);
                    let w = member_w.map_or(0.0, |w| w[e] * load_frac);
                    self.element_delta(e, &dl, w)
                })
                .collect();

            let mut released_any = false;
            for e in 0..n_el {
                for end in 0..2 {
                    if self.yielded[e][end] && !unloaded[e][end] && self.m_ep[e][end] * deltas[e].theta_p[end] < 0.0 {
                        self.yielded[e][end] = false;
                        unloaded[e][end] = true;
                        released_any = true;
                    }
                }
            }
            if released_any {
                events += 1;
                if events > self.max_events {
                    return Err(AnalysisError::NonConvergence { events });
                }
                continue;
            }

            let scale = 1.0 - self.alpha;
            let mut candidates: Vec<(f64, usize, usize, f64)> = Vec::new();
            for e in 0..n_el {
                let Some(b) = self.bounds[e] else { continue };
                for end in 0..2 {
                    if self.yielded[e][end] {
                        continue;
                    }
                    let (lo, hi) = (b[end].0 * scale, b[end].1 * scale);
                    let m = self.m_ep[e][end];
                    let dm = deltas[e].m_ep[end];
                    if dm > 0.0 && m + dm > hi {
                        candidates.push((((hi - m) / dm).max(0.0), e, end, hi));
                    } else if dm < 0.0 && m + dm < lo {
                        candidates.push((((lo - m) / dm).max(0.0), e, end, lo));
                    }
                }
            }
            let frac = candidates.iter().map(|c| c.0).fold(1.0, f64::min);
            self.commit(&dd, &deltas, frac);
            self.lateral += frac * dlat;
            if candidates.is_empty() {
                break;
            }
            for &(t, e, end, limit) in &candidates {
                if t <= frac + 1e-9 {
                    self.m_ep[e][end] = limit;
                    self.yielded[e][end] = true;
                }
            }
            remaining *= 1.0 - frac;
            events += 1;
            if events > self.max_events {
                return Err(AnalysisError::NonConvergence { events });
            }
        }
        Ok(())
    }

    fn commit(&mut self, dd: &DVector<f64>, deltas: &[ElementDelta], frac: f64) {
        self.d.axpy(frac, dd, 1.0);
        for (e, delta) in deltas.iter().enumerate() {
            self.forces[e] += delta.force * frac;
            for end in 0..2 {
                self.m_ep[e][end] += frac * delta.m_ep[end];
                self.theta_p[e][end] += frac * delta.theta_p[end];
            }
        }
    }

    fn record(&self, monitor: &Monitor, control: &DVector<f64>) -> PushoverStep {
        let nodal = self.s.nodal_displacements(&self.d);
        let story_disp: Vec<f64> = monitor.levels[1..]
            .iter()
            .map(|nodes| nodes.iter().map(|&n| nodal[n][0]).sum::<f64>() / nodes.len() as f64)
            .collect();
        PushoverStep {
            load_factor: self.lateral,
            base_shear: self.lateral,
            roof_disp: control.dot(&self.d),
            drifts: drifts(&story_disp, &monitor.story_heights),
            story_disp,
            rotations: self.theta_p.clone(),
            yielded: self.yielded.clone(),
            end_forces: self.forces.iter().map(|f| (*f).into()).collect(),
        }
    }
}

/// Axial force (tension positive) of every element under `loads`.
pub fn axial_forces(structure: &Structure, loads: &LoadCase) -> Result<Vec<f64>, AnalysisError> {
    let sol = linear_static(structure, std::slice::from_ref(loads)).map_err(|_| AnalysisError::GravityMechanism)?;
    Ok(sol[0].end_forces.iter().map(|f| f[3]).collect())
}

/// Applies `gravity` event-to-event under load control, then pushes the
/// frame under `lateral` (scaled so the load factor equals the base shear)
/// with constant increments of the mean roof displacement.
pub fn pushover(
    structure: &Structure,
    gravity: &LoadCase,
    lateral: &[[f64; 3]],
    monitor: &Monitor,
    control: &PushoverControl,
) -> Result<PushoverTrace, AnalysisError> {
    control.validate()?;
    if monitor.levels.len() != monitor.story_heights.len() + 1 || monitor.levels.iter().any(|l| l.is_empty()) {
        return Err(AnalysisError::Model("monitor needs nodes for every floor and a height per story".into()));
    }
    let axial = if control.p_delta {
        axial_forces(structure, gravity)?
    } else {
        vec![0.0; structure.elements.len()]
    };
    let mut engine = Engine::new(structure, control, &axial);
    let roof = monitor.levels.last().unwrap();
    let ctrl = structure.mean_u_vector(roof);
    let nodal_g = structure.nodal_vector(&gravity.nodal);
    engine
        .advance(&Increment::Load { nodal: &nodal_g, member_w: &gravity.member_w })
        .map_err(|e| match e {
            AnalysisError::Mechanism => AnalysisError::GravityMechanism,
            other => other,
        })?;
    let mut steps = vec![engine.record(monitor, &ctrl)];
    let hinges = engine.bounds.clone();
    let pattern = structure.nodal_vector(lateral);
    let ns = monitor.story_heights.len();
    let mut trace = PushoverTrace {
        steps: Vec::new(),
        termination: Termination::TargetReached,
        initial_flexibility: 0.0,
        initial_shape: vec![0.0; ns],
        story_heights: monitor.story_heights.clone(),
        hinges,
    };
    let du = control.step_size();
    let n_steps = ((control.target_roof_disp / du).ceil() as usize).max(1);
    if pattern.iter().all(|v| *v == 0.0) {
        let frozen = steps[0].clone();
        steps.extend(std::iter::repeat_n(frozen, n_steps.min(control.max_steps)));
        trace.steps = steps;
        return Ok(trace);
    }

    let probe = structure.assemble(|e| {
        let fr = &structure.frames[e];
        let (kc, _) = condense(&fr.k, &Vector6::zeros(), engine.yielded[e]);
        fr.k * engine.alpha + kc * (1.0 - engine.alpha) + engine.kg[e]
    });
    match factorize(probe) {
        Ok(chol) => {
            let x = chol.solve(&pattern);
            trace.initial_flexibility = ctrl.dot(&x);
            let shape = structure.nodal_displacements(&x);
            trace.initial_shape = monitor.levels[1..]
                .iter()
                .map(|nodes| nodes.iter().map(|&n| shape[n][0]).sum::<f64>() / nodes.len() as f64)
                .collect();
        }
        Err(_) => {
            trace.steps = steps;
            trace.termination = Termination::Instability;
            return Ok(trace);
        }
    }

    let start = steps[0].roof_disp;
    for k in 1..=n_steps {
        if k > control.max_steps {
            trace.termination = Termination::MaxSteps;
            break;
        }
        let goal = (start + control.target_roof_disp).min(start + k as f64 * du);
        let inc = goal - ctrl.dot(&engine.d);
        match engine.advance(&Increment::Displacement { pattern: &pattern, control: &ctrl, du: inc }) {
            Ok(()) => steps.push(engine.record(monitor, &ctrl)),
            Err(AnalysisError::Mechanism) => {
                trace.termination = Termination::Instability;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    trace.steps = steps;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::structure::{Element, HingeSpec};
    use approx::assert_relative_eq;

    const E: f64 = 2.5e7;

    fn cantilever(l: f64, inertia: f64, hinge: Option<f64>) -> (Structure, Monitor) {
        let el = Element { hinge: hinge.map(HingeSpec::symmetric), p_delta: true, ..Element::new(0, 1, E, 0.09, inertia) };
        let s = Structure::new(vec![[0.0, 0.0], [0.0, l]], vec![[true; 3], [false; 3]], &[], vec![el]).unwrap();
        (s, Monitor { levels: vec![vec![0], vec![1]], story_heights: vec![l] })
    }

    fn tip_load() -> Vec<[f64; 3]> {
        vec![[0.0; 3], [1.0, 0.0, 0.0]]
    }

    #[test]
    fn elastic_plastic_cantilever_matches_bilinear_curve() {
        let (l, i, mn) = (3.0, 4.725e-4, 60.0);
        let (s, mon) = cantilever(l, i, Some(mn));
        let control = PushoverControl { target_roof_disp: 0.05, p_delta: false, ..Default::default() };
        let trace = pushover(&s, &LoadCase::zeros(2, 1), &tip_load(), &mon, &control).unwrap();
        assert_eq!(trace.termination, Termination::TargetReached);
        let k = 3.0 * E * i / l.powi(3);
        let vy = mn / l;
        let uy = vy / k;
        let a = control.post_yield_ratio;
        for n in 1..=20 {
            let u = 0.05 * n as f64 / 20.0;
            let exact = if u <= uy { k * u } else { vy + a * k * (u - uy) };
            let got = state_at(&trace, u).unwrap().base_shear;
            assert!((got - exact).abs() <= 0.01 * exact, "u={u}: {got} vs {exact}");
        }
        let last = trace.steps.last().unwrap();
        assert!(last.yielded[0][0] && !last.yielded[0][1]);
        assert!(last.rotations[0][0] > 0.0);
    }

    #[test]
    fn elastic_slope_matches_linear_static() {
        let (l, i) = (3.0, 4.725e-4);
        let (s, mon) = cantilever(l, i, None);
        let control = PushoverControl { target_roof_disp: 0.01, p_delta: false, ..Default::default() };
        let trace = pushover(&s, &LoadCase::zeros(2, 1), &tip_load(), &mon, &control).unwrap();
        let mut unit = LoadCase::zeros(2, 1);
        unit.nodal = tip_load();
        let lin = &linear_static(&s, &[unit]).unwrap()[0];
        for step in &trace.steps[1..] {
            let scaled = lin.displacements[1][0] * step.load_factor;
            assert_relative_eq!(step.roof_disp, scaled, max_relative = 1e-9);
            for k in 0..6 {
                assert_relative_eq!(step.end_forces[0][k], lin.end_forces[0][k] * step.load_factor, max_relative = 1e-9, epsilon = 1e-9);
            }
        }
        assert_relative_eq!(trace.initial_flexibility, lin.displacements[1][0], max_relative = 1e-12);
    }

    #[test]
    fn compression_softens_lateral_stiffness() {
        let (l, i) = (3.0, 4.725e-4);
        let (s, mon) = cantilever(l, i, None);
        let mut gravity = LoadCase::zeros(2, 1);
        gravity.nodal[1] = [0.0, -500.0, 0.0];
        let control = PushoverControl { target_roof_disp: 0.01, ..Default::default() };
        let with_p = pushover(&s, &gravity, &tip_load(), &mon, &control).unwrap();
        let without = pushover(&s, &LoadCase::zeros(2, 1), &tip_load(), &mon, &control).unwrap();
        assert!(1.0 / with_p.initial_flexibility < 1.0 / without.initial_flexibility);
        let k0 = 3.0 * E * i / l.powi(3);
        assert_relative_eq!(1.0 / without.initial_flexibility, k0, max_relative = 1e-9);
    }

    #[test]
    fn zero_pattern_stays_at_gravity_state() {
        let (s, mon) = cantilever(3.0, 4.725e-4, Some(50.0));
        let mut gravity = LoadCase::zeros(2, 1);
        gravity.nodal[1] = [0.0, -100.0, 0.0];
        let control = PushoverControl { target_roof_disp: 0.01, ..Default::default() };
        let trace = pushover(&s, &gravity, &[[0.0; 3]; 2], &mon, &control).unwrap();
        assert!(trace.steps.len() > 1);
        for st in &trace.steps {
            assert_eq!(st.base_shear, 0.0);
            assert_eq!(st, &trace.steps[0]);
        }
    }

    #[test]
    fn rotations_zero_below_yield() {
        let (s, mon) = cantilever(3.0, 4.725e-4, Some(1e4));
        let control = PushoverControl { target_roof_disp: 0.02, p_delta: false, ..Default::default() };
        let trace = pushover(&s, &LoadCase::zeros(2, 1), &tip_load(), &mon, &control).unwrap();
        for st in &trace.steps {
            assert_eq!(st.rotations[0], [0.0, 0.0]);
        }
    }

    #[test]
    fn gravity_yielding_beam_then_unloading_check() {
        // Fixed-fixed beam under increasing uniform load: supports yield first.
        let l = 6.0;
        let beam = Element {
            hinge: Some(HingeSpec { sagging: 80.0, hogging: 100.0 }),
            ..Element::new(1, 2, E, 0.15, 2e-3)
        };
        let cols = [Element::new(0, 1, E, 10.0, 10.0), Element::new(3, 2, E, 10.0, 10.0)];
        let s = Structure::new(
            vec![[0.0, -1.0], [0.0, 0.0], [l, 0.0], [l, -1.0]],
            vec![[true; 3], [false; 3], [false; 3], [true; 3]],
            &[],
            vec![beam, cols[0].clone(), cols[1].clone()],
        )
        .unwrap();
        let mut gravity = LoadCase::zeros(4, 3);
        // Elastic support moment wL²/12 = 150 exceeds the hogging capacity.
        gravity.member_w[0] = -50.0;
        let mon = Monitor { levels: vec![vec![0, 3], vec![1, 2]], story_heights: vec![1.0] };
        let control = PushoverControl { target_roof_disp: 0.001, p_delta: false, ..Default::default() };
        let trace = pushover(&s, &gravity, &[[0.0; 3]; 4], &mon, &control).unwrap();
        let g = &trace.steps[0];
        assert!(g.yielded[0][0] && g.yielded[0][1]);
        // Statics: hogging ends near capacity, midspan sagging = wL²/8 − hogging.
        let m_i = g.end_forces[0][2];
        assert!((m_i - 100.0).abs() < 1.0, "{m_i}");
        assert!(g.rotations[0][0] > 0.0 && g.rotations[0][1] < 0.0);
    }

    #[test]
    fn state_interpolation_and_bounds() {
        let (s, mon) = cantilever(3.0, 4.725e-4, None);
        let control = PushoverControl { target_roof_disp: 0.01, p_delta: false, ..Default::default() };
        let trace = pushover(&s, &LoadCase::zeros(2, 1), &tip_load(), &mon, &control).unwrap();
        let exact = &trace.steps[7];
        let st = state_at(&trace, exact.roof_disp).unwrap();
        assert_eq!(st.base_shear, exact.base_shear);
        assert_eq!(st.drifts, exact.drifts);
        assert!(matches!(state_at(&trace, 0.02), Err(AnalysisError::NotReached { .. })));
    }

    #[test]
    fn drift_by_hand() {
        let d = story_drifts(&[0.01, 0.025], &[3.0, 3.0]);
        assert_relative_eq!(d[0], 0.01 / 3.0);
        assert_relative_eq!(d[1], 0.005);
    }

    #[test]
    fn csv_round_trip() {
        let (s, mon) = cantilever(3.0, 4.725e-4, Some(40.0));
        let control = PushoverControl { target_roof_disp: 0.02, ..Default::default() };
        let trace = pushover(&s, &LoadCase::zeros(2, 1), &tip_load(), &mon, &control).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let rows = read_curve_csv(buf.as_slice()).unwrap();
        assert_eq!(rows.len(), trace.steps.len());
        for (r, s) in rows.iter().zip(&trace.steps) {
            assert_eq!(r.base_shear, s.base_shear);
            assert_eq!(r.roof_disp, s.roof_disp);
            assert_eq!(r.drifts, s.drifts);
        }
    }

    #[test]
    fn roof_displacement_nondecreasing_and_work_nonnegative() {
        let (s, mon) = cantilever(3.0, 4.725e-4, Some(40.0));
        let mut gravity = LoadCase::zeros(2, 1);
        gravity.nodal[1] = [0.0, -300.0, 0.0];
        let control = PushoverControl { target_roof_disp: 0.08, ..Default::default() };
        let trace = pushover(&s, &gravity, &tip_load(), &mon, &control).unwrap();
        for w in trace.steps.windows(2) {
            assert!(w[1].roof_disp >= w[0].roof_disp);
            assert!(w[1].base_shear >= 0.0);
            if w[1].base_shear >= w[0].base_shear {
                let work = 0.5 * (w[0].base_shear + w[1].base_shear) * (w[1].roof_disp - w[0].roof_disp);
                assert!(work >= 0.0);
            }
        }
    }
}
