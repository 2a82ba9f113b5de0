//! Simulation sequence: timing rules, execution order, chronologies and the
//! simulation state.
//!
//! The state lives on one timeline at the finest resolution of the
//! sequence. Decision values are held constant over the slots their step
//! covers. Realized decision values are kept per model and in a shared view
//! where later executions overwrite earlier ones. The system state `x` is a
//! separate keyspace written only by the emulator (or by the innermost
//! decision model when there is none). Look-ahead values go to a provisional
//! per-model layer that is never part of a realized trajectory.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feedforward::{FeedforwardKind, FeedforwardSpec};
use crate::formulations::{
    series_of, DeviceFormulation, InitialConditions, ProblemTemplate, ThermalIc, POWER_LABEL,
};
use crate::opt::{ParamKind, VarKind};
use crate::solver::SolverOptions;
use crate::system::{ComponentType, SystemModel};
use crate::time::{Duration, Timestamp};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chronology {
    /// Initial conditions from the system state `x`.
    #[default]
    InterProblem,
    /// Initial conditions from the model's own previous decisions.
    IntraProblem,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionModelSpec {
    pub name: String,
    pub template: ProblemTemplate,
    pub horizon_steps: usize,
    pub resolution: Duration,
    pub interval: Duration,
    #[serde(default)]
    pub solver: SolverOptions,
    /// Overrides the sequence chronology for this model.
    #[serde(default)]
    pub chronology: Option<Chronology>,
}

impl DecisionModelSpec {
    pub fn interval_steps(&self) -> usize {
        self.interval.multiple_of(self.resolution).unwrap_or(0).max(0) as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmulatorSpec {
    pub name: String,
    pub template: ProblemTemplate,
    pub resolution: Duration,
    #[serde(default)]
    pub solver: SolverOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationSequence {
    /// Decision models, outermost first.
    pub models: Vec<DecisionModelSpec>,
    #[serde(default)]
    pub emulator: Option<EmulatorSpec>,
    #[serde(default)]
    pub feedforwards: Vec<FeedforwardSpec>,
    #[serde(default)]
    pub chronology: Chronology,
}

/// `steps` simulation steps of the outermost interval from `start`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: Timestamp,
    pub steps: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModelId {
    Decision(usize),
    Emulator,
}

impl SimulationSequence {
    /// Length of one simulation step: the outermost interval.
    pub fn step_length(&self) -> Option<Duration> {
        self.models.first().map(|m| m.interval).or(self.emulator.as_ref().map(|e| e.resolution))
    }

    pub fn end(&self, span: &Span) -> Option<Timestamp> {
        self.step_length().map(|s| span.start + s.times(span.steps as i64))
    }

    pub fn name_of(&self, id: ModelId) -> &str {
        match id {
            ModelId::Decision(i) => &self.models[i].name,
            ModelId::Emulator => &self.emulator.as_ref().expect("emulator present").name,
        }
    }

    pub fn id_of(&self, name: &str) -> Option<ModelId> {
        if let Some(i) = self.models.iter().position(|m| m.name == name) {
            return Some(ModelId::Decision(i));
        }
        match &self.emulator {
            Some(e) if e.name == name => Some(ModelId::Emulator),
            _ => None,
        }
    }

    pub fn template_of(&self, id: ModelId) -> &ProblemTemplate {
        match id {
            ModelId::Decision(i) => &self.models[i].template,
            ModelId::Emulator => &self.emulator.as_ref().expect("emulator present").template,
        }
    }

    pub fn resolution_of(&self, id: ModelId) -> Duration {
        match id {
            ModelId::Decision(i) => self.models[i].resolution,
            ModelId::Emulator => self.emulator.as_ref().expect("emulator present").resolution,
        }
    }

    pub fn chronology_of(&self, i: usize) -> Chronology {
        self.models[i].chronology.unwrap_or(self.chronology)
    }

    /// Finest step of the sequence; the state timeline uses it.
    pub fn finest_resolution(&self) -> Duration {
        let mut g = 0i64;
        for m in &self.models {
            g = gcd(g, m.resolution.0);
            g = gcd(g, m.interval.0);
        }
        if let Some(e) = &self.emulator {
            g = gcd(g, e.resolution.0);
        }
        Duration(g.max(1))
    }

    /// Longest time any decision model looks past its issue time.
    pub fn max_extent(&self) -> Duration {
        self.models
            .iter()
            .map(|m| m.resolution.times(m.horizon_steps as i64))
            .chain(self.emulator.iter().map(|e| e.resolution))
            .max_by_key(|d| d.0)
            .unwrap_or(Duration(0))
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Outcome of a successful validation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    /// Executions per model over the span, in sequence order.
    pub executions: Vec<(String, usize)>,
    pub warnings: Vec<String>,
}

/// Series `(component, label)` a template reads from forecasts or realizations.
pub fn required_series(template: &ProblemTemplate, sys: &SystemModel) -> Vec<(String, String)> {
    let mut out = Vec::new();
    if template.formulation(ComponentType::RenewableDispatch).is_some() {
        out.extend(sys.renewable_gens.iter().map(|r| (r.name.clone(), POWER_LABEL.to_string())));
    }
    if template.formulation(ComponentType::PowerLoad).is_some() {
        out.extend(sys.loads.iter().map(|l| (l.name.clone(), POWER_LABEL.to_string())));
    }
    for r in &sys.reserves {
        if template.services.contains_key(&r.name) {
            out.push((r.name.clone(), r.requirement_series_name.clone()));
        }
    }
    out
}

/// Checks timing, data coverage and feedforward wiring of `seq` over `span`.
pub fn validate_sequence(seq: &SimulationSequence, sys: &SystemModel, span: &Span) -> Result<ValidationReport> {
    if seq.models.is_empty() && seq.emulator.is_none() {
        return Err(Error::Sequence("sequence has no models".into()));
    }
    if span.steps == 0 {
        return Err(Error::Sequence("span has no steps".into()));
    }
    let mut names: Vec<&str> = seq.models.iter().map(|m| m.name.as_str()).collect();
    if let Some(e) = &seq.emulator {
        names.push(&e.name);
    }
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(Error::Sequence(format!("duplicate model name `{n}`")));
        }
    }
    for m in &seq.models {
        if !m.resolution.is_positive() || !m.interval.is_positive() || m.horizon_steps == 0 {
            return Err(Error::Timing(format!("{}: resolution, interval and horizon must be positive", m.name)));
        }
        match m.interval.multiple_of(m.resolution) {
            Some(k) if k > 0 => {}
            _ => {
                return Err(Error::Timing(format!(
                    "{}: interval not multiple of resolution ({} vs {})",
                    m.name, m.interval, m.resolution
                )))
            }
        }
        if m.resolution.times(m.horizon_steps as i64).0 < m.interval.0 {
            return Err(Error::Timing(format!("{}: horizon shorter than interval", m.name)));
        }
        m.template.check_coverage(sys).map_err(|e| Error::Build(format!("{}: {e}", m.name)))?;
    }
    for w in seq.models.windows(2) {
        if w[0].interval.multiple_of(w[1].interval).is_none() {
            return Err(Error::Timing(format!(
                "interval {} does not divide {} ({} -> {})",
                w[1].interval, w[0].interval, w[0].name, w[1].name
            )));
        }
    }
    if let Some(e) = &seq.emulator {
        if !e.resolution.is_positive() {
            return Err(Error::Timing(format!("{}: resolution must be positive", e.name)));
        }
        if let Some(m) = seq.models.last() {
            if m.interval.multiple_of(e.resolution).is_none() {
                return Err(Error::Timing(format!(
                    "emulator resolution {} does not divide interval {} of {}",
                    e.resolution, m.interval, m.name
                )));
            }
        }
        e.template.check_coverage(sys).map_err(|err| Error::Build(format!("{}: {err}", e.name)))?;
    }

    let end = seq.end(span).expect("non-empty sequence");
    let order = compute_execution_order(seq, span);
    let mut report = ValidationReport::default();
    for (i, m) in seq.models.iter().enumerate() {
        report.executions.push((m.name.clone(), order.count(ModelId::Decision(i))));
    }
    if let Some(e) = &seq.emulator {
        report.executions.push((e.name.clone(), order.count(ModelId::Emulator)));
    }

    // forecast coverage of every decision execution
    for (i, m) in seq.models.iter().enumerate() {
        let series = required_series(&m.template, sys);
        for ex in order.iter().filter(|x| x.model == ModelId::Decision(i)) {
            for (c, l) in &series {
                let f = sys.forecast(c, l, m.resolution).ok_or_else(|| {
                    Error::MissingForecast(format!("{}: no {c}/{l} forecast at resolution {}", m.name, m.resolution))
                })?;
                match f.windows.get(&ex.issue_time) {
                    Some(w) if w.len() >= m.horizon_steps => {}
                    _ => {
                        return Err(Error::MissingForecast(format!(
                            "insufficient forecast coverage: {}/{} for {} at {}",
                            c, l, m.name, ex.issue_time
                        )))
                    }
                }
            }
        }
    }
    // realized data for every emulator tick
    if let Some(e) = &seq.emulator {
        for (c, l) in required_series(&e.template, sys) {
            let r = sys
                .realization(&c, &l)
                .ok_or_else(|| Error::MissingForecast(format!("{}: no realization of {c}/{l}", e.name)))?;
            if r.start > span.start || r.end() < end {
                return Err(Error::MissingForecast(format!(
                    "insufficient realization coverage: {c}/{l} for {}",
                    e.name
                )));
            }
            if e.resolution.multiple_of(r.resolution).is_none() {
                return Err(Error::Timing(format!(
                    "realization {c}/{l} resolution {} does not divide emulator resolution {}",
                    r.resolution, e.resolution
                )));
            }
        }
    }

    for ff in &seq.feedforwards {
        validate_feedforward(seq, sys, ff)?;
    }
    Ok(report)
}

fn provides(template: &ProblemTemplate, sys: &SystemModel, kind: VarKind, comp: &str) -> bool {
    let thermal = sys.thermal(comp).is_some();
    let storage = sys.storage_unit(comp).is_some();
    let renewable = sys.renewable_gens.iter().any(|r| r.name == comp);
    let th = template.formulation(ComponentType::ThermalStandard);
    match kind {
        VarKind::OnStatus | VarKind::Start | VarKind::Stop => {
            thermal && th == Some(DeviceFormulation::ThermalStandardUnitCommitment)
        }
        VarKind::ActivePower => {
            (thermal && th.is_some())
                || (renewable && template.formulation(ComponentType::RenewableDispatch).is_some())
        }
        VarKind::SoC | VarKind::Charge | VarKind::Discharge => {
            storage && template.formulation(ComponentType::EnergyReservoirStorage).is_some()
        }
        _ => false,
    }
}

fn validate_feedforward(seq: &SimulationSequence, sys: &SystemModel, ff: &FeedforwardSpec) -> Result<()> {
    let src = seq
        .id_of(&ff.source)
        .ok_or_else(|| Error::Sequence(format!("feedforward source `{}` is not a model", ff.source)))?;
    let dst = seq
        .id_of(&ff.target)
        .ok_or_else(|| Error::Sequence(format!("feedforward target `{}` is not a model", ff.target)))?;
    let ordered = match (src, dst) {
        (ModelId::Decision(a), ModelId::Decision(b)) => a < b,
        (ModelId::Decision(_), ModelId::Emulator) => true,
        _ => false,
    };
    if !ordered {
        return Err(Error::Sequence(format!(
            "feedforward source {} must execute before target {}",
            ff.source, ff.target
        )));
    }
    let expected = match ff.kind {
        FeedforwardKind::SemiContinuous => Some((VarKind::OnStatus, VarKind::ActivePower)),
        FeedforwardKind::EnergyTarget => Some((VarKind::SoC, VarKind::SoC)),
        _ => None,
    };
    if let Some((s, t)) = expected {
        if ff.source_variable != s || ff.target_variable != t {
            return Err(Error::Sequence(format!(
                "{:?} feedforward couples {} to {}",
                ff.kind,
                s.as_str(),
                t.as_str()
            )));
        }
    }
    if ff.components.is_empty() {
        return Err(Error::Sequence(format!("feedforward {} -> {} has no components", ff.source, ff.target)));
    }
    for c in &ff.components {
        if !provides(seq.template_of(src), sys, ff.source_variable, c) {
            return Err(Error::Sequence(format!(
                "feedforward component `{c}` has no {} in {}",
                ff.source_variable.as_str(),
                ff.source
            )));
        }
        if !provides(seq.template_of(dst), sys, ff.target_variable, c) {
            return Err(Error::Sequence(format!(
                "feedforward component `{c}` has no {} in {}",
                ff.target_variable.as_str(),
                ff.target
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Execution {
    pub model: ModelId,
    pub issue_time: Timestamp,
}

/// Solve sequence per simulation step.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExecutionOrder {
    pub steps: Vec<Vec<Execution>>,
}

impl ExecutionOrder {
    pub fn iter(&self) -> impl Iterator<Item = &Execution> {
        self.steps.iter().flatten()
    }

    pub fn count(&self, m: ModelId) -> usize {
        self.iter().filter(|e| e.model == m).count()
    }

    pub fn len(&self) -> usize {
        self.steps.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// At every timestamp due models run outermost first; the emulator runs last.
pub fn compute_execution_order(seq: &SimulationSequence, span: &Span) -> ExecutionOrder {
    let Some(step) = seq.step_length() else {
        return ExecutionOrder::default();
    };
    let mut steps = Vec::with_capacity(span.steps);
    for s in 0..span.steps {
        let t0 = span.start + step.times(s as i64);
        let mut due: Vec<(Timestamp, usize, ModelId)> = Vec::new();
        for (k, m) in seq.models.iter().enumerate() {
            let n = step.multiple_of(m.interval).unwrap_or(1).max(1);
            for j in 0..n {
                due.push((t0 + m.interval.times(j), k, ModelId::Decision(k)));
            }
        }
        if let Some(e) = &seq.emulator {
            let n = step.multiple_of(e.resolution).unwrap_or(1).max(1);
            for j in 0..n {
                due.push((t0 + e.resolution.times(j), usize::MAX, ModelId::Emulator));
            }
        }
        due.sort_by_key(|(t, rank, _)| (*t, *rank));
        steps.push(due.into_iter().map(|(t, _, m)| Execution { model: m, issue_time: t }).collect());
    }
    ExecutionOrder { steps }
}

/// Slot grid of the state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timeline {
    pub start: Timestamp,
    pub step: Duration,
    pub len: usize,
}

impl Timeline {
    /// Slot whose period contains `t`.
    pub fn slot(&self, t: Timestamp) -> Option<usize> {
        let d = (t - self.start).0;
        if d < 0 {
            return None;
        }
        let i = (d / self.step.0) as usize;
        (i < self.len).then_some(i)
    }

    pub fn time(&self, slot: usize) -> Timestamp {
        self.start + self.step.times(slot as i64)
    }
}

/// Which execution wrote a slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub issue_time: Timestamp,
    /// 1-based step of the writing model's horizon.
    pub horizon_step: u32,
    /// Realized steps of the writing model's interval.
    pub interval_steps: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub values: Vec<f64>,
    pub provenance: Vec<Option<Provenance>>,
}

impl Trajectory {
    fn new(len: usize) -> Self {
        Trajectory { values: vec![f64::NAN; len], provenance: vec![None; len] }
    }

    pub fn get(&self, slot: usize) -> Option<f64> {
        self.values.get(slot).copied().filter(|v| !v.is_nan())
    }
}

pub type SeriesId = (VarKind, String);

/// One keyspace of the state.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Layer {
    pub series: BTreeMap<SeriesId, Trajectory>,
}

impl Layer {
    fn write(&mut self, len: usize, key: &SeriesId, slot: usize, v: f64, prov: Provenance) {
        let tr = self.series.entry(key.clone()).or_insert_with(|| Trajectory::new(len));
        tr.values[slot] = v;
        tr.provenance[slot] = Some(prov);
    }

    pub fn get(&self, kind: VarKind, comp: &str, slot: usize) -> Option<f64> {
        self.series.get(&(kind, comp.to_string())).and_then(|t| t.get(slot))
    }
}

/// Per-step values of one decision solution, keyed by variable and component.
pub type StepValues = BTreeMap<SeriesId, Vec<f64>>;

/// Decision state `u`, system state `x` and provisional look-ahead values (per-unit).
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationState {
    pub timeline: Timeline,
    /// System state before the first slot.
    pub initial: InitialConditions,
    x: Layer,
    decision: Layer,
    per_model: BTreeMap<String, Layer>,
    lookahead: BTreeMap<String, Layer>,
    last_issue: BTreeMap<String, Timestamp>,
    last_emulation: Option<Timestamp>,
}

impl SimulationState {
    pub fn new(timeline: Timeline, initial: InitialConditions) -> Self {
        SimulationState {
            timeline,
            initial,
            x: Layer::default(),
            decision: Layer::default(),
            per_model: BTreeMap::new(),
            lookahead: BTreeMap::new(),
            last_issue: BTreeMap::new(),
            last_emulation: None,
        }
    }

    /// Preallocates the timeline covering `span` plus the longest look-ahead.
    pub fn for_sequence(seq: &SimulationSequence, span: &Span, initial: InitialConditions) -> Self {
        let step = seq.finest_resolution();
        let total = seq.step_length().map_or(0, |s| s.0 * span.steps as i64) + seq.max_extent().0;
        let len = ((total + step.0 - 1) / step.0) as usize;
        SimulationState::new(Timeline { start: span.start, step, len }, initial)
    }

    pub fn x(&self) -> &Layer {
        &self.x
    }

    pub fn decisions(&self) -> &Layer {
        &self.decision
    }

    pub fn model_layer(&self, model: &str) -> Option<&Layer> {
        self.per_model.get(model)
    }

    pub fn lookahead_layer(&self, model: &str) -> Option<&Layer> {
        self.lookahead.get(model)
    }

    pub fn last_issue(&self, model: &str) -> Option<Timestamp> {
        self.last_issue.get(model).copied()
    }

    fn slots_of(&self, t0: Timestamp, res: Duration) -> Result<core::ops::Range<usize>> {
        let a = self
            .timeline
            .slot(t0)
            .ok_or_else(|| Error::StateGap(format!("{t0} outside the state timeline")))?;
        let n = res.multiple_of(self.timeline.step).unwrap_or(1).max(1) as usize;
        Ok(a..(a + n).min(self.timeline.len))
    }

    /// Records a decision solution issued at `issue_time`.
    ///
    /// Steps up to `interval_steps` update `u` (and `x` when `write_x`);
    /// the remainder replaces the model's provisional look-ahead layer.
    pub fn record_decision(
        &mut self,
        model: &str,
        issue_time: Timestamp,
        resolution: Duration,
        interval_steps: usize,
        values: &StepValues,
        write_x: bool,
    ) -> Result<()> {
        if let Some(prev) = self.last_issue.get(model) {
            if issue_time <= *prev {
                return Err(Error::StaleState(format!("{model} issued at {issue_time} after {prev}")));
            }
        }
        let len = self.timeline.len;
        let mut la = Layer::default();
        for (key, steps) in values {
            for (i, v) in steps.iter().enumerate() {
                let tau = i + 1;
                let prov = Provenance {
                    issue_time,
                    horizon_step: tau as u32,
                    interval_steps: interval_steps as u32,
                };
                let t0 = issue_time + resolution.times(i as i64);
                let Ok(slots) = self.slots_of(t0, resolution) else {
                    continue;
                };
                for s in slots {
                    if tau <= interval_steps {
                        self.decision.write(len, key, s, *v, prov);
                        self.per_model.entry(model.to_string()).or_default().write(len, key, s, *v, prov);
                        if write_x {
                            self.x.write(len, key, s, *v, prov);
                        }
                    } else {
                        la.write(len, key, s, *v, prov);
                    }
                }
            }
        }
        self.lookahead.insert(model.to_string(), la);
        self.last_issue.insert(model.to_string(), issue_time);
        Ok(())
    }

    /// Records one emulator step starting at `at` into `x`.
    pub fn record_emulation(
        &mut self,
        at: Timestamp,
        resolution: Duration,
        values: &BTreeMap<SeriesId, f64>,
    ) -> Result<()> {
        if let Some(prev) = self.last_emulation {
            if at <= prev {
                return Err(Error::StaleState(format!("emulation at {at} after {prev}")));
            }
        }
        let len = self.timeline.len;
        let slots = self.slots_of(at, resolution)?;
        let prov = Provenance { issue_time: at, horizon_step: 1, interval_steps: 1 };
        for (key, v) in values {
            for s in slots.clone() {
                self.x.write(len, key, s, *v, prov);
            }
        }
        self.last_emulation = Some(at);
        Ok(())
    }

    /// Value of `source`'s `kind` for `comp` over the slot containing `at`.
    ///
    /// Realized decisions take precedence over the source's look-ahead.
    pub fn feedforward_value(&self, source: &str, kind: VarKind, comp: &str, at: Timestamp) -> Result<f64> {
        let gap = || {
            Error::StateGap(format!("no {} of {comp} from {source} covering {at}", kind.as_str()))
        };
        let slot = self.timeline.slot(at).ok_or_else(gap)?;
        self.per_model
            .get(source)
            .and_then(|l| l.get(kind, comp, slot))
            .or_else(|| self.lookahead.get(source).and_then(|l| l.get(kind, comp, slot)))
            .ok_or_else(gap)
    }

    /// Initial conditions at `t` read from the system state.
    pub fn system_conditions(&self, sys: &SystemModel, t: Timestamp) -> InitialConditions {
        self.conditions_from(sys, t, None)
    }

    /// Initial conditions at `t` from `model`'s own realized decisions, falling back to `x`.
    pub fn model_conditions(&self, sys: &SystemModel, model: &str, t: Timestamp) -> InitialConditions {
        self.conditions_from(sys, t, self.per_model.get(model))
    }

    fn conditions_from(&self, sys: &SystemModel, t: Timestamp, own: Option<&Layer>) -> InitialConditions {
        let prev = self.timeline.slot(t).and_then(|s| s.checked_sub(1));
        let read = |kind: VarKind, comp: &str| -> Option<f64> {
            let s = prev?;
            own.and_then(|l| l.get(kind, comp, s)).or_else(|| self.x.get(kind, comp, s))
        };
        let mut ic = InitialConditions::default();
        for g in &sys.thermal_gens {
            let init = self.initial.thermal.get(&g.name).copied();
            let (Some(power), Some(on)) = (
                read(VarKind::ActivePower, &g.name).or(init.map(|i| i.power)),
                read(VarKind::OnStatus, &g.name).or(init.map(|i| i.on)),
            ) else {
                continue;
            };
            let status = on > 0.5;
            // walk back over slots in the same status
            let mut duration = 0.0;
            let mut reached_start = true;
            if let Some(p) = prev {
                for s in (0..=p).rev() {
                    let v = own
                        .and_then(|l| l.get(VarKind::OnStatus, &g.name, s))
                        .or_else(|| self.x.get(VarKind::OnStatus, &g.name, s));
                    match v {
                        Some(v) if (v > 0.5) == status => duration += self.timeline.step.as_hours(),
                        _ => {
                            reached_start = false;
                            break;
                        }
                    }
                }
            }
            if reached_start {
                match init {
                    Some(i) if (i.on > 0.5) == status => duration += i.duration,
                    _ if prev.is_none() => duration = f64::INFINITY,
                    _ => {}
                }
            }
            if !duration.is_finite() {
                duration = 1e6;
            }
            ic.thermal.insert(g.name.clone(), ThermalIc { on: if status { 1.0 } else { 0.0 }, power, duration });
        }
        for s in &sys.storage {
            let v = read(VarKind::SoC, &s.name).or(self.initial.storage.get(&s.name).copied());
            if let Some(v) = v {
                ic.storage.insert(s.name.clone(), v);
            }
        }
        ic
    }

    /// Every realized slot whose writer step lies beyond the writer's interval.
    pub fn lookahead_leaks(&self) -> Vec<(String, SeriesId, usize)> {
        let mut out = Vec::new();
        let mut scan = |name: &str, layer: &Layer| {
            for (key, tr) in &layer.series {
                for (slot, p) in tr.provenance.iter().enumerate() {
                    if let Some(p) = p {
                        if p.horizon_step > p.interval_steps {
                            out.push((name.to_string(), key.clone(), slot));
                        }
                    }
                }
            }
        };
        scan("x", &self.x);
        scan("u", &self.decision);
        for (m, l) in &self.per_model {
            scan(m, l);
        }
        out
    }
}

/// Initial conditions for decision model `i` at `issue_time` under its chronology.
pub fn get_initial_conditions(
    seq: &SimulationSequence,
    i: usize,
    sys: &SystemModel,
    issue_time: Timestamp,
    state: &SimulationState,
) -> InitialConditions {
    match seq.chronology_of(i) {
        Chronology::InterProblem => state.system_conditions(sys, issue_time),
        Chronology::IntraProblem => state.model_conditions(sys, &seq.models[i].name, issue_time),
    }
}

/// Forecast-driven parameter kinds.
pub fn is_forecast_param(kind: ParamKind) -> bool {
    matches!(kind, ParamKind::ForecastBound | ParamKind::RequirementRhs)
}

/// Empty `StepValues` helper used by tests and callers assembling results.
pub fn step_values(items: &[(VarKind, &str, &[f64])]) -> StepValues {
    items.iter().map(|(k, c, v)| ((*k, c.to_string()), v.to_vec())).collect()
}

#[doc(hidden)]
pub fn _series_label(sys: &SystemModel, key: &crate::opt::ParamKey) -> Option<(String, String)> {
    series_of(sys, key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulations::ProblemTemplate;
    use crate::system::{Bus, BusType, CostCurve, Forecast, Load, RealizationSeries, SystemData, ThermalGen, ThermalInitial};

    fn h(n: i64) -> Duration {
        Duration::hours(n)
    }

    fn spec(name: &str, horizon: usize, res: Duration, interval: Duration) -> DecisionModelSpec {
        DecisionModelSpec {
            name: name.into(),
            template: ProblemTemplate::economic_dispatch(),
            horizon_steps: horizon,
            resolution: res,
            interval,
            solver: SolverOptions::default(),
            chronology: None,
        }
    }

    fn emu() -> EmulatorSpec {
        EmulatorSpec {
            name: "EM".into(),
            template: ProblemTemplate::economic_dispatch(),
            resolution: h(1),
            solver: SolverOptions::default(),
        }
    }

    fn seq3() -> SimulationSequence {
        SimulationSequence {
            models: vec![spec("UC", 48, h(1), h(24)), spec("ED", 2, h(1), h(1))],
            emulator: Some(emu()),
            feedforwards: vec![],
            chronology: Chronology::InterProblem,
        }
    }

    fn system(days: i64) -> SystemModel {
        let d = SystemData {
            base_power: 100.0,
            buses: vec![Bus { name: "b".into(), base_voltage: 0.0, bus_type: BusType::Slack }],
            thermal_gens: vec![ThermalGen {
                name: "g".into(),
                bus: "b".into(),
                p_min: 0.0,
                p_max: 100.0,
                ramp_up: 100.0,
                ramp_dn: 100.0,
                min_up: 0,
                min_dn: 0,
                variable_cost: CostCurve::Linear(10.0),
                no_load_cost: 0.0,
                startup_cost: 0.0,
                initial: Some(ThermalInitial { on: true, power: 50.0, duration: 4.0 }),
            }],
            loads: vec![Load { name: "L".into(), bus: "b".into(), peak: 80.0 }],
            ..Default::default()
        };
        let mut windows = BTreeMap::new();
        for k in 0..(24 * days) {
            windows.insert(Timestamp(k * 3600), vec![0.5; 48]);
        }
        let f = Forecast {
            component: "L".into(),
            label: POWER_LABEL.into(),
            resolution: h(1),
            issue_interval: h(1),
            horizon_steps: 48,
            windows,
        };
        let r = RealizationSeries {
            component: "L".into(),
            label: POWER_LABEL.into(),
            resolution: h(1),
            start: Timestamp(0),
            values: vec![0.5; 24 * days as usize],
        };
        SystemModel::new(d, vec![f], vec![r]).unwrap()
    }

    fn span(days: usize) -> Span {
        Span { start: Timestamp(0), steps: days }
    }

    #[test]
    fn uc_ed_emulator_order() {
        let order = compute_execution_order(&seq3(), &span(1));
        assert_eq!(order.count(ModelId::Decision(0)), 1);
        assert_eq!(order.count(ModelId::Decision(1)), 24);
        assert_eq!(order.count(ModelId::Emulator), 24);
        let s = &order.steps[0];
        assert_eq!(s[0].model, ModelId::Decision(0));
        for hour in 0..24 {
            assert_eq!(s[1 + 2 * hour].model, ModelId::Decision(1));
            assert_eq!(s[2 + 2 * hour].model, ModelId::Emulator);
            assert_eq!(s[2 + 2 * hour].issue_time, Timestamp(hour as i64 * 3600));
        }
    }

    #[test]
    fn single_model_order() {
        let seq = SimulationSequence {
            models: vec![spec("ED", 2, h(1), h(1))],
            emulator: None,
            feedforwards: vec![],
            chronology: Chronology::InterProblem,
        };
        let order = compute_execution_order(&seq, &span(5));
        assert_eq!(order.len(), 5);
        assert!(order.steps.iter().all(|s| s.len() == 1));
    }

    #[test]
    fn two_day_span_doubles_counts() {
        let one = compute_execution_order(&seq3(), &span(1));
        let two = compute_execution_order(&seq3(), &span(2));
        assert_eq!(two.len(), 2 * one.len());
    }

    #[test]
    fn valid_sequence_reports_counts() {
        let r = validate_sequence(&seq3(), &system(3), &span(1)).unwrap();
        assert_eq!(r.executions[1], ("ED".to_string(), 24));
    }

    #[test]
    fn non_dividing_interval_rejected() {
        let mut s = seq3();
        s.models[1] = spec("ED", 7, h(1), h(7));
        let err = validate_sequence(&s, &system(3), &span(1)).unwrap_err();
        assert!(err.to_string().contains("interval 7h does not divide 24h"), "{err}");
    }

    #[test]
    fn timing_rules() {
        let mut s = seq3();
        s.models[0] = spec("UC", 12, h(1), h(24));
        let err = validate_sequence(&s, &system(3), &span(1)).unwrap_err();
        assert!(err.to_string().contains("horizon shorter than interval"));
        s.models[0] = spec("UC", 48, h(1), Duration::minutes(90));
        let err = validate_sequence(&s, &system(3), &span(1)).unwrap_err();
        assert!(err.to_string().contains("interval not multiple of resolution"));
    }

    #[test]
    fn forecast_coverage_checked() {
        let err = validate_sequence(&seq3(), &system(1), &span(2)).unwrap_err();
        assert!(err.to_string().contains("insufficient forecast coverage"), "{err}");
    }

    #[test]
    fn uc_writes_only_realized_window() {
        let seq = seq3();
        let mut st = SimulationState::for_sequence(&seq, &span(1), InitialConditions::default());
        let on: Vec<f64> = (0..48).map(|i| if i < 24 { 1.0 } else { 0.0 }).collect();
        let vals = step_values(&[(VarKind::OnStatus, "g", &on)]);
        st.record_decision("UC", Timestamp(0), h(1), 24, &vals, false).unwrap();
        let layer = st.decisions();
        assert_eq!(layer.get(VarKind::OnStatus, "g", 23), Some(1.0));
        assert_eq!(layer.get(VarKind::OnStatus, "g", 24), None);
        // look-ahead only reachable as a provisional feedforward value
        assert_eq!(st.feedforward_value("UC", VarKind::OnStatus, "g", Timestamp(30 * 3600)).unwrap(), 0.0);
        assert!(st.lookahead_leaks().is_empty());
        assert!(st.x().series.is_empty());
    }

    #[test]
    fn later_execution_overwrites() {
        let mut st = SimulationState::for_sequence(&seq3(), &span(1), InitialConditions::default());
        st.record_decision("UC", Timestamp(0), h(1), 24, &step_values(&[(VarKind::ActivePower, "g", &[0.4; 48])]), false)
            .unwrap();
        st.record_decision("ED", Timestamp(3600 * 5), h(1), 1, &step_values(&[(VarKind::ActivePower, "g", &[0.45, 0.5])]), false)
            .unwrap();
        assert_eq!(st.decisions().get(VarKind::ActivePower, "g", 5), Some(0.45));
        assert_eq!(st.decisions().get(VarKind::ActivePower, "g", 6), Some(0.4));
    }

    #[test]
    fn stale_issue_rejected() {
        let mut st = SimulationState::for_sequence(&seq3(), &span(1), InitialConditions::default());
        let v = step_values(&[(VarKind::ActivePower, "g", &[0.4, 0.4])]);
        st.record_decision("ED", Timestamp(3600), h(1), 1, &v, false).unwrap();
        assert!(matches!(st.record_decision("ED", Timestamp(3600), h(1), 1, &v, false), Err(Error::StaleState(_))));
    }

    #[test]
    fn zero_order_hold_onto_finer_slots() {
        let mut s = seq3();
        s.emulator.as_mut().unwrap().resolution = Duration::minutes(15);
        let mut st = SimulationState::for_sequence(&s, &span(1), InitialConditions::default());
        assert_eq!(st.timeline.step, Duration::minutes(15));
        let on: Vec<f64> = (0..48).map(|i| (i % 2) as f64).collect();
        st.record_decision("UC", Timestamp(0), h(1), 24, &step_values(&[(VarKind::OnStatus, "g", &on)]), false).unwrap();
        for q in 0..4 {
            let t = Timestamp(3600 + q * 900);
            assert_eq!(st.feedforward_value("UC", VarKind::OnStatus, "g", t).unwrap(), 1.0);
        }
        let err = st.feedforward_value("ED", VarKind::OnStatus, "g", Timestamp(0)).unwrap_err();
        assert!(matches!(err, Error::StateGap(_)));
    }

    #[test]
    fn chronologies_read_different_sources() {
        let sys = system(1);
        let init = InitialConditions::from_system(&sys).unwrap();
        let mut st = SimulationState::for_sequence(&seq3(), &span(1), init);
        st.record_decision("ED", Timestamp(0), h(1), 1, &step_values(&[(VarKind::ActivePower, "g", &[0.45, 0.4])]), false)
            .unwrap();
        let mut x = BTreeMap::new();
        x.insert((VarKind::ActivePower, "g".to_string()), 0.42);
        x.insert((VarKind::OnStatus, "g".to_string()), 1.0);
        st.record_emulation(Timestamp(0), h(1), &x).unwrap();
        let t = Timestamp(3600);
        assert_eq!(st.system_conditions(&sys, t).thermal["g"].power, 0.42);
        assert_eq!(st.model_conditions(&sys, "ED", t).thermal["g"].power, 0.45);
        // at the span start both fall back to the authored state
        assert_eq!(st.system_conditions(&sys, Timestamp(0)).thermal["g"].power, 0.5);
    }

    #[test]
    fn status_duration_accumulates() {
        let sys = system(1);
        let init = InitialConditions::from_system(&sys).unwrap();
        let mut st = SimulationState::for_sequence(&seq3(), &span(1), init);
        for k in 0..3 {
            let mut x = BTreeMap::new();
            x.insert((VarKind::ActivePower, "g".to_string()), 0.5);
            x.insert((VarKind::OnStatus, "g".to_string()), 1.0);
            st.record_emulation(Timestamp(k * 3600), h(1), &x).unwrap();
        }
        let ic = st.system_conditions(&sys, Timestamp(3 * 3600));
        assert_eq!(ic.thermal["g"].duration, 3.0 + 4.0);
    }
}
