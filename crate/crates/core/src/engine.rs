//! Simulation build and execution.
//!
//! `build` validates the sequence, proposes initial conditions when the
//! system lacks them, builds every container once and preallocates the
//! state. `execute` walks the execution order: update → solve → write
//! results → update state.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulations::InitialConditions;
use crate::opt::{OptContainer, ParamKind, VarKind};
use crate::problems::{
    initial_state_from_relaxation, DecisionModel, DecisionSolution, EmulationModel, EmulationResult,
};
use crate::sequence::{
    compute_execution_order, get_initial_conditions, validate_sequence, ExecutionOrder, ModelId, SimulationSequence,
    SimulationState, Span, StepValues, ValidationReport,
};
use crate::solver::SolveStats;
use crate::store::{Layout, ResultKey, ResultKind, ResultStore, Storage, StoreConfig};
use crate::system::SystemModel;
use crate::time::{Duration, Timestamp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimulationStatus {
    Created,
    Built,
    Running,
    Finished,
    Failed,
}

/// What to do when a solve fails.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailurePolicy {
    #[default]
    Halt,
    /// Reuse the model's previous solution, shifted to the new issue time.
    SkipAndCarry,
}

/// Per-solve statistics handed to observers.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveEvent<'a> {
    pub model: &'a str,
    pub issue_time: Timestamp,
    pub objective: f64,
    pub stats: &'a SolveStats,
    /// Emulator step solved through the penalized relaxation.
    pub relaxed: bool,
    /// Previous solution carried forward after a failure.
    pub carried: bool,
}

/// Hooks for logging, timing and diagnostics; every method defaults to a no-op.
pub trait SimulationObserver {
    fn on_relaxed_init(&mut self, _ic: &InitialConditions) {}
    fn on_built(&mut self, _model: &str, _container: &OptContainer) {}
    fn before_solve(&mut self, _model: &str, _issue_time: Timestamp) {}
    fn on_solve(&mut self, _event: &SolveEvent<'_>) {}
    fn on_failure(&mut self, _model: &str, _issue_time: Timestamp, _error: &Error, _container: &OptContainer, _state: &SimulationState) {}
}

/// Observer that ignores everything.
pub struct NoObserver;

impl SimulationObserver for NoObserver {}

/// Initial conditions a decision execution started from.
#[derive(Clone, Debug, PartialEq)]
pub struct IcRecord {
    pub model: String,
    pub issue_time: Timestamp,
    pub conditions: InitialConditions,
}

pub struct Simulation {
    pub sequence: SimulationSequence,
    pub span: Span,
    pub policy: FailurePolicy,
    system: SystemModel,
    status: SimulationStatus,
    report: ValidationReport,
    order: ExecutionOrder,
    decisions: Vec<DecisionModel>,
    emulator: Option<EmulationModel>,
    state: SimulationState,
    relaxed_init: bool,
    counts: BTreeMap<String, usize>,
    ic_log: Vec<IcRecord>,
    carried: Vec<(String, Timestamp)>,
    relaxed_steps: Vec<Timestamp>,
    last_decision: Vec<Option<DecisionSolution>>,
    last_emulation: Option<EmulationResult>,
}

fn scale_of(kind: VarKind, base: f64) -> f64 {
    if kind.is_per_unit() {
        base
    } else {
        1.0
    }
}

fn param_scale(kind: ParamKind, base: f64) -> f64 {
    match kind {
        ParamKind::FeedforwardUpperBound
        | ParamKind::FeedforwardLowerBound
        | ParamKind::EnergyTarget
        | ParamKind::InitialPower
        | ParamKind::InitialSoC => base,
        _ => 1.0,
    }
}

impl Simulation {
    /// Validates, initializes and builds every model once.
    pub fn build(
        sequence: SimulationSequence,
        system: SystemModel,
        span: Span,
        policy: FailurePolicy,
        observer: &mut dyn SimulationObserver,
    ) -> Result<Self> {
        let report = validate_sequence(&sequence, &system, &span)?;
        let (initial, relaxed_init) = match InitialConditions::from_system(&system) {
            Some(ic) => (ic, false),
            None => {
                let (template, horizon, res, solver) = match sequence.models.first() {
                    Some(m) => (&m.template, m.horizon_steps, m.resolution, &m.solver),
                    None => {
                        let e = sequence.emulator.as_ref().expect("validated");
                        (&e.template, 1, e.resolution, &e.solver)
                    }
                };
                let ic = initial_state_from_relaxation(template, &system, horizon, res.as_hours(), solver)?;
                observer.on_relaxed_init(&ic);
                (ic, true)
            }
        };
        let mut decisions = Vec::new();
        for m in &sequence.models {
            let d = DecisionModel::build(m, &system, &initial, &sequence.feedforwards)
                .map_err(|e| Error::Build(format!("{}: {e}", m.name)))?;
            observer.on_built(&m.name, d.container());
            decisions.push(d);
        }
        let emulator = match &sequence.emulator {
            Some(e) => {
                let em = EmulationModel::build(e, &system, &initial, &sequence.feedforwards)
                    .map_err(|err| Error::Build(format!("{}: {err}", e.name)))?;
                observer.on_built(&e.name, em.container());
                Some(em)
            }
            None => None,
        };
        let state = SimulationState::for_sequence(&sequence, &span, initial);
        let order = compute_execution_order(&sequence, &span);
        let n = sequence.models.len();
        Ok(Simulation {
            sequence,
            span,
            policy,
            system,
            status: SimulationStatus::Built,
            report,
            order,
            decisions,
            emulator,
            state,
            relaxed_init,
            counts: BTreeMap::new(),
            ic_log: Vec::new(),
            carried: Vec::new(),
            relaxed_steps: Vec::new(),
            last_decision: vec![None; n],
            last_emulation: None,
        })
    }

    pub fn status(&self) -> SimulationStatus {
        self.status
    }

    pub fn system(&self) -> &SystemModel {
        &self.system
    }

    pub fn report(&self) -> &ValidationReport {
        &self.report
    }

    pub fn order(&self) -> &ExecutionOrder {
        &self.order
    }

    pub fn state(&self) -> &SimulationState {
        &self.state
    }

    pub fn decision(&self, i: usize) -> &DecisionModel {
        &self.decisions[i]
    }

    pub fn decision_models(&self) -> &[DecisionModel] {
        &self.decisions
    }

    pub fn emulator(&self) -> Option<&EmulationModel> {
        self.emulator.as_ref()
    }

    /// Containers in sequence order, emulator last.
    pub fn containers(&self) -> Vec<(&str, &OptContainer)> {
        let mut out: Vec<(&str, &OptContainer)> = self.decisions.iter().map(|d| (d.name(), d.container())).collect();
        if let Some(e) = &self.emulator {
            out.push((e.name(), e.container()));
        }
        out
    }

    /// True when initial conditions came from the relaxed initialization solve.
    pub fn used_relaxed_init(&self) -> bool {
        self.relaxed_init
    }

    /// Solves per model so far.
    pub fn counts(&self) -> &BTreeMap<String, usize> {
        &self.counts
    }

    pub fn ic_log(&self) -> &[IcRecord] {
        &self.ic_log
    }

    /// Executions that reused a previous solution.
    pub fn carried(&self) -> &[(String, Timestamp)] {
        &self.carried
    }

    /// Emulator steps that needed the penalized relaxation.
    pub fn relaxed_steps(&self) -> &[Timestamp] {
        &self.relaxed_steps
    }

    fn register_layouts<S: Storage>(&self, store: &mut ResultStore<S>) -> Result<()> {
        let mut models: Vec<(&str, &OptContainer, usize, Duration)> = self
            .decisions
            .iter()
            .map(|d| (d.name(), d.container(), d.spec.horizon_steps, d.spec.resolution))
            .collect();
        if let Some(e) = &self.emulator {
            models.push((e.name(), e.container(), 1, e.spec.resolution));
        }
        for (name, c, horizon, resolution) in models {
            for kind in VarKind::ALL {
                let comps = c.components_of(kind);
                if !comps.is_empty() {
                    let key = ResultKey::new(name, ResultKind::Variable, kind.as_str());
                    store.register_layout(key, Layout { components: comps, horizon, resolution })?;
                }
            }
            for kind in ParamKind::ALL {
                let comps: Vec<String> = c
                    .params()
                    .iter()
                    .filter(|p| p.key.kind == kind && p.key.time >= 1)
                    .fold(Vec::new(), |mut acc, p| {
                        if !acc.contains(&p.key.component) {
                            acc.push(p.key.component.clone());
                        }
                        acc
                    });
                if !comps.is_empty() {
                    let key = ResultKey::new(name, ResultKind::Parameter, kind.as_str());
                    store.register_layout(key, Layout { components: comps, horizon, resolution })?;
                }
            }
            if !c.has_integers() {
                let key = ResultKey::new(name, ResultKind::Dual, "balance");
                store.register_layout(key, Layout { components: vec!["system".into()], horizon, resolution })?;
            }
            let key = ResultKey::new(name, ResultKind::Auxiliary, "objective");
            store.register_layout(key, Layout { components: vec!["total".into()], horizon: 1, resolution })?;
        }
        Ok(())
    }

    /// Runs every execution in order, writing results into `store`.
    ///
    /// On failure under [`FailurePolicy::Halt`] the store is closed with the
    /// results written so far and the error is returned.
    pub fn execute<S: Storage>(
        &mut self,
        store: &mut ResultStore<S>,
        observer: &mut dyn SimulationObserver,
    ) -> Result<()> {
        if self.status != SimulationStatus::Built {
            return Err(Error::Status(format!("execute requires a built simulation, status is {:?}", self.status)));
        }
        self.status = SimulationStatus::Running;
        if let Err(e) = self.register_layouts(store) {
            self.status = SimulationStatus::Failed;
            return Err(e);
        }
        let order: Vec<_> = self.order.iter().copied().collect();
        for ex in order {
            let r = match ex.model {
                ModelId::Decision(i) => self.run_decision(i, ex.issue_time, store, observer),
                ModelId::Emulator => self.run_emulation(ex.issue_time, store, observer),
            };
            if let Err(e) = r {
                self.status = SimulationStatus::Failed;
                let _ = store.close();
                return Err(e);
            }
        }
        store.close()?;
        self.status = SimulationStatus::Finished;
        Ok(())
    }

    fn innermost_writes_x(&self, i: usize) -> bool {
        self.emulator.is_none() && i + 1 == self.decisions.len()
    }

    fn run_decision<S: Storage>(
        &mut self,
        i: usize,
        t: Timestamp,
        store: &mut ResultStore<S>,
        observer: &mut dyn SimulationObserver,
    ) -> Result<()> {
        let ic = get_initial_conditions(&self.sequence, i, &self.system, t, &self.state);
        let name = self.decisions[i].name().to_string();
        self.ic_log.push(IcRecord { model: name.clone(), issue_time: t, conditions: ic.clone() });
        observer.before_solve(&name, t);
        let outcome = self.decisions[i]
            .update(&self.system, t, &ic, &self.state)
            .and_then(|_| self.decisions[i].solve(&self.system));
        let (sol, carried) = match outcome {
            Ok(s) => (s, false),
            Err(e) => {
                observer.on_failure(&name, t, &e, self.decisions[i].container(), &self.state);
                match (&self.policy, &self.last_decision[i]) {
                    (FailurePolicy::SkipAndCarry, Some(prev)) => {
                        self.carried.push((name.clone(), t));
                        (carry_decision(prev, t), true)
                    }
                    _ => return Err(e),
                }
            }
        };
        observer.on_solve(&SolveEvent {
            model: &name,
            issue_time: t,
            objective: sol.objective,
            stats: &sol.stats,
            relaxed: false,
            carried,
        });
        self.write_decision(&sol, store)?;
        let write_x = self.innermost_writes_x(i);
        self.state.record_decision(&name, t, sol.resolution, sol.realized_steps, &sol.values, write_x)?;
        *self.counts.entry(name).or_default() += 1;
        self.last_decision[i] = Some(sol);
        Ok(())
    }

    fn run_emulation<S: Storage>(
        &mut self,
        t: Timestamp,
        store: &mut ResultStore<S>,
        observer: &mut dyn SimulationObserver,
    ) -> Result<()> {
        let ic = self.state.system_conditions(&self.system, t);
        let em = self.emulator.as_mut().expect("emulator present");
        let name = em.name().to_string();
        let res = em.spec.resolution;
        observer.before_solve(&name, t);
        let outcome = em.update(&self.system, t, &ic, &self.state).and_then(|_| em.solve(&self.system));
        let (r, carried) = match outcome {
            Ok(r) => (r, false),
            Err(e) => {
                observer.on_failure(&name, t, &e, em.container(), &self.state);
                match (&self.policy, &self.last_emulation) {
                    (FailurePolicy::SkipAndCarry, Some(prev)) => {
                        self.carried.push((name.clone(), t));
                        (EmulationResult { at: t, ..prev.clone() }, true)
                    }
                    _ => return Err(e),
                }
            }
        };
        if r.relaxed {
            self.relaxed_steps.push(t);
        }
        observer.on_solve(&SolveEvent {
            model: &name,
            issue_time: t,
            objective: r.objective,
            stats: &r.stats,
            relaxed: r.relaxed,
            carried,
        });
        self.write_emulation(&name, &r, res, store)?;
        self.state.record_emulation(t, res, &r.values)?;
        *self.counts.entry(name).or_default() += 1;
        self.last_emulation = Some(r);
        Ok(())
    }

    fn write_decision<S: Storage>(&self, sol: &DecisionSolution, store: &mut ResultStore<S>) -> Result<()> {
        let base = self.system.base_power;
        let h = sol.values.values().next().map_or(0, Vec::len);
        let realized = sol.realized_steps.min(h);
        write_groups(store, &sol.model, sol.issue_time, realized, base, &sol.values, &sol.params)?;
        if let Some(d) = &sol.balance_duals {
            let key = ResultKey::new(sol.model.as_str(), ResultKind::Dual, "balance");
            if store.layout(&key).is_ok() {
                let dt = sol.resolution.as_hours();
                let m: Vec<f64> = d.iter().map(|y| y / (base * dt)).collect();
                store.write_result(&key, sol.issue_time, &m, realized)?;
            }
        }
        let key = ResultKey::new(sol.model.as_str(), ResultKind::Auxiliary, "objective");
        store.write_result(&key, sol.issue_time, &[sol.objective], 1)
    }

    fn write_emulation<S: Storage>(
        &self,
        name: &str,
        r: &EmulationResult,
        res: Duration,
        store: &mut ResultStore<S>,
    ) -> Result<()> {
        let base = self.system.base_power;
        let values: StepValues = r.values.iter().map(|(k, v)| (k.clone(), vec![*v])).collect();
        let params: BTreeMap<(ParamKind, String), Vec<f64>> =
            r.params.iter().map(|(k, v)| (k.clone(), vec![*v])).collect();
        write_groups(store, name, r.at, 1, base, &values, &params)?;
        if let Some(y) = r.balance_dual {
            let key = ResultKey::new(name, ResultKind::Dual, "balance");
            if store.layout(&key).is_ok() {
                store.write_result(&key, r.at, &[y / (base * res.as_hours())], 1)?;
            }
        }
        let key = ResultKey::new(name, ResultKind::Auxiliary, "objective");
        store.write_result(&key, r.at, &[r.objective], 1)
    }
}

/// Writes one matrix per registered variable and parameter kind of `model`.
fn write_groups<S: Storage>(
    store: &mut ResultStore<S>,
    model: &str,
    t: Timestamp,
    realized: usize,
    base: f64,
    values: &StepValues,
    params: &BTreeMap<(ParamKind, String), Vec<f64>>,
) -> Result<()> {
    for kind in VarKind::ALL {
        let key = ResultKey::new(model, ResultKind::Variable, kind.as_str());
        let Ok(layout) = store.layout(&key) else {
            continue;
        };
        let layout = layout.clone();
        let s = scale_of(kind, base);
        let m = matrix(&layout, |comp| values.get(&(kind, comp.to_string())), s);
        store.write_result(&key, t, &m, realized)?;
    }
    for kind in ParamKind::ALL {
        let key = ResultKey::new(model, ResultKind::Parameter, kind.as_str());
        let Ok(layout) = store.layout(&key) else {
            continue;
        };
        let layout = layout.clone();
        let s = param_scale(kind, base);
        let m = matrix(&layout, |comp| params.get(&(kind, comp.to_string())), s);
        store.write_result(&key, t, &m, realized)?;
    }
    Ok(())
}

fn matrix<'a>(layout: &Layout, get: impl Fn(&str) -> Option<&'a Vec<f64>>, scale: f64) -> Vec<f64> {
    let cols = layout.components.len();
    let mut m = vec![f64::NAN; layout.horizon * cols];
    for (j, c) in layout.components.iter().enumerate() {
        if let Some(v) = get(c) {
            for (r, x) in v.iter().enumerate().take(layout.horizon) {
                m[r * cols + j] = x * scale;
            }
        }
    }
    m
}

/// Previous solution re-issued at `t`: steps shift forward, the tail repeats the last step.
fn carry_decision(prev: &DecisionSolution, t: Timestamp) -> DecisionSolution {
    let shift = ((t - prev.issue_time).0 / prev.resolution.0.max(1)).max(0) as usize;
    let shifted = |v: &Vec<f64>| -> Vec<f64> {
        (0..v.len()).map(|i| v[(i + shift).min(v.len() - 1)]).collect()
    };
    DecisionSolution {
        issue_time: t,
        values: prev.values.iter().map(|(k, v)| (k.clone(), shifted(v))).collect(),
        params: prev.params.iter().map(|(k, v)| (k.clone(), shifted(v))).collect(),
        balance_duals: None,
        ..prev.clone()
    }
}

/// Builds and executes in one call.
pub fn run_simulation<S: Storage>(
    sequence: SimulationSequence,
    system: SystemModel,
    span: Span,
    policy: FailurePolicy,
    store_config: StoreConfig,
    storage: S,
    observer: &mut dyn SimulationObserver,
) -> Result<(Simulation, ResultStore<S>)> {
    let mut sim = Simulation::build(sequence, system, span, policy, observer)?;
    let mut store = ResultStore::create(store_config, storage)?;
    sim.execute(&mut store, observer)?;
    Ok((sim, store))
}
