//! Decision and emulation models: containers built once, then updated in
//! place and re-solved at every execution.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::feedforward::{attach, derived_value, BindingRole, FeedforwardBinding, FeedforwardSpec};
use crate::formulations::{
    apply_initial_conditions, balance_row, build_problem, series_of, InitialConditions, ProblemTemplate, ThermalIc,
};
use crate::opt::{OptContainer, ParamKey, ParamKind, Structure, VarKind};
use crate::sequence::{DecisionModelSpec, EmulatorSpec, SeriesId, SimulationState, StepValues};
use crate::solver::{BundledSolver, SolveStats, SolveStatus, Solver, SolverOptions};
use crate::system::SystemModel;
use crate::time::{Duration, Timestamp};

/// Parameters fed by one input series, with the step each one reads.
#[derive(Clone, Debug, PartialEq)]
struct SeriesParams {
    component: String,
    label: String,
    keys: Vec<(ParamKey, usize)>,
}

fn series_params(c: &OptContainer, sys: &SystemModel) -> Vec<SeriesParams> {
    let mut by: BTreeMap<(String, String), Vec<(ParamKey, usize)>> = BTreeMap::new();
    for p in c.params() {
        if let Some(s) = series_of(sys, &p.key) {
            by.entry(s).or_default().push((p.key.clone(), p.key.time));
        }
    }
    by.into_iter().map(|((component, label), keys)| SeriesParams { component, label, keys }).collect()
}

/// Values of every variable and time-indexed parameter of a solved container.
fn collect(c: &OptContainer, primal: &[f64], horizon: usize) -> (StepValues, BTreeMap<(ParamKind, String), Vec<f64>>) {
    let mut vars: StepValues = BTreeMap::new();
    for (v, x) in c.variables().iter().zip(primal) {
        let k = &v.key;
        if k.time >= 1 && k.time <= horizon {
            vars.entry((k.kind, k.component.clone())).or_insert_with(|| vec![f64::NAN; horizon])[k.time - 1] = *x;
        }
    }
    let mut params: BTreeMap<(ParamKind, String), Vec<f64>> = BTreeMap::new();
    for p in c.params() {
        let k = &p.key;
        if k.time >= 1 && k.time <= horizon {
            params.entry((k.kind, k.component.clone())).or_insert_with(|| vec![f64::NAN; horizon])[k.time - 1] =
                p.value;
        }
    }
    (vars, params)
}

/// Adds `OnStatus` for thermal units of a model without commitment variables:
/// the feedforward status when one is bound, otherwise 1.
fn add_derived_status(
    vars: &mut StepValues,
    params: &BTreeMap<(ParamKind, String), Vec<f64>>,
    sys: &SystemModel,
    horizon: usize,
) {
    for g in &sys.thermal_gens {
        let key = (VarKind::OnStatus, g.name.clone());
        if vars.contains_key(&key) || !vars.contains_key(&(VarKind::ActivePower, g.name.clone())) {
            continue;
        }
        let status = match params.get(&(ParamKind::FeedforwardOnStatus, g.name.clone())) {
            Some(v) => v.iter().map(|x| if *x > 0.5 { 1.0 } else { 0.0 }).collect(),
            None => vec![1.0; horizon],
        };
        vars.insert(key, status);
    }
}

fn balance_duals(c: &OptContainer, duals: Option<&Vec<f64>>, horizon: usize) -> Option<Vec<f64>> {
    let d = duals?;
    (1..=horizon).map(|t| c.constraint(&balance_row(t)).map(|r| d[r.0])).collect()
}

/// Result of one decision execution (per-unit values).
#[derive(Clone, Debug, PartialEq)]
pub struct DecisionSolution {
    pub model: String,
    pub issue_time: Timestamp,
    pub resolution: Duration,
    pub realized_steps: usize,
    pub status: SolveStatus,
    pub objective: f64,
    pub values: StepValues,
    pub params: BTreeMap<(ParamKind, String), Vec<f64>>,
    /// Balance-row duals in objective units per per-unit power; LP solves only.
    pub balance_duals: Option<Vec<f64>>,
    pub stats: SolveStats,
}

pub struct DecisionModel {
    pub spec: DecisionModelSpec,
    container: OptContainer,
    solver: BundledSolver,
    bindings: Vec<FeedforwardBinding>,
    inputs: Vec<SeriesParams>,
    structure: Structure,
    warnings: Vec<String>,
    pending: Option<Timestamp>,
    last_issue: Option<Timestamp>,
}

impl DecisionModel {
    /// Builds the container once, attaching every feedforward that targets it.
    pub fn build(
        spec: &DecisionModelSpec,
        sys: &SystemModel,
        ic: &InitialConditions,
        feedforwards: &[FeedforwardSpec],
    ) -> Result<Self> {
        let name = &spec.name;
        if !spec.resolution.is_positive() || spec.horizon_steps == 0 {
            return Err(Error::Timing(format!("{name}: resolution and horizon must be positive")));
        }
        if spec.interval.multiple_of(spec.resolution).is_none() {
            return Err(Error::Timing(format!("{name}: interval not multiple of resolution")));
        }
        if spec.resolution.times(spec.horizon_steps as i64).0 < spec.interval.0 {
            return Err(Error::Timing(format!("{name}: horizon shorter than interval")));
        }
        let built =
            build_problem(name, &spec.template, sys, spec.horizon_steps, spec.resolution.as_hours(), Some(ic))?;
        let mut container = built.container;
        let mut bindings = Vec::new();
        for ff in feedforwards.iter().filter(|f| &f.target == name) {
            bindings.extend(attach(ff, &mut container, sys, spec.horizon_steps)?);
        }
        let inputs = series_params(&container, sys);
        for s in &inputs {
            if sys.forecast(&s.component, &s.label, spec.resolution).is_none() {
                return Err(Error::MissingForecast(format!(
                    "{name}: no {}/{} forecast at resolution {}",
                    s.component, s.label, spec.resolution
                )));
            }
        }
        Ok(DecisionModel {
            spec: spec.clone(),
            structure: container.structure(),
            container,
            solver: BundledSolver::new(spec.solver.clone()),
            bindings,
            inputs,
            warnings: built.warnings,
            pending: None,
            last_issue: None,
        })
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn container(&self) -> &OptContainer {
        &self.container
    }

    pub fn bindings(&self) -> &[FeedforwardBinding] {
        &self.bindings
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    pub fn last_issue(&self) -> Option<Timestamp> {
        self.last_issue
    }

    /// Writes the forecast windows issued at `issue_time` into the parameters.
    pub fn update_forecasts(&mut self, sys: &SystemModel, issue_time: Timestamp) -> Result<()> {
        let h = self.spec.horizon_steps;
        for s in &self.inputs {
            let w = sys
                .get_forecast_window(&s.component, &s.label, self.spec.resolution, issue_time, h)
                .map_err(|e| Error::MissingForecast(format!("{}: {e}", self.spec.name)))?;
            for (k, step) in &s.keys {
                self.container.update_parameter(k, w[step - 1])?;
            }
        }
        Ok(())
    }

    pub fn update_initial_conditions(&mut self, sys: &SystemModel, ic: &InitialConditions) -> Result<()> {
        apply_initial_conditions(&mut self.container, sys, ic, self.spec.resolution.as_hours())
    }

    /// Pulls every feedforward value for an execution at `issue_time`.
    pub fn update_feedforwards(
        &mut self,
        issue_time: Timestamp,
        ic: &InitialConditions,
        state: &SimulationState,
    ) -> Result<()> {
        let res = self.spec.resolution;
        apply_bindings(&mut self.container, &self.bindings, issue_time, res, ic, state)
    }

    /// Forecasts, initial conditions and feedforwards for an execution at `issue_time`.
    pub fn update(
        &mut self,
        sys: &SystemModel,
        issue_time: Timestamp,
        ic: &InitialConditions,
        state: &SimulationState,
    ) -> Result<()> {
        if let Some(prev) = self.last_issue {
            if issue_time <= prev {
                return Err(Error::StaleState(format!("{} issued at {issue_time} after {prev}", self.spec.name)));
            }
        }
        self.update_forecasts(sys, issue_time)?;
        self.update_initial_conditions(sys, ic)?;
        self.update_feedforwards(issue_time, ic, state)?;
        if self.container.structure() != self.structure {
            return Err(Error::Invariant(format!("{}: structure changed by an update", self.spec.name)));
        }
        self.pending = Some(issue_time);
        Ok(())
    }

    pub fn solve(&mut self, sys: &SystemModel) -> Result<DecisionSolution> {
        let issue_time = self
            .pending
            .take()
            .ok_or_else(|| Error::Status(format!("{} solved without an update", self.spec.name)))?;
        let r = self.solver.solve(&self.container);
        self.last_issue = Some(issue_time);
        if !r.is_optimal() {
            let msg = format!(
                "{} at {issue_time}: {:?}{}",
                self.spec.name,
                r.status,
                r.diagnostic.map(|d| format!(" ({d})")).unwrap_or_default()
            );
            return Err(match r.status {
                SolveStatus::Unbounded => Error::Unbounded(msg),
                SolveStatus::IterationLimit | SolveStatus::NodeLimit => Error::SolverLimit(msg),
                _ => Error::Infeasible(msg),
            });
        }
        let h = self.spec.horizon_steps;
        let (mut values, params) = collect(&self.container, &r.primal, h);
        add_derived_status(&mut values, &params, sys, h);
        Ok(DecisionSolution {
            model: self.spec.name.clone(),
            issue_time,
            resolution: self.spec.resolution,
            realized_steps: self.spec.interval_steps(),
            status: r.status,
            objective: r.objective,
            balance_duals: balance_duals(&self.container, r.duals.as_ref(), h),
            values,
            params,
            stats: r.stats,
        })
    }
}

fn apply_bindings(
    c: &mut OptContainer,
    bindings: &[FeedforwardBinding],
    issue_time: Timestamp,
    res: Duration,
    ic: &InitialConditions,
    state: &SimulationState,
) -> Result<()> {
    for b in bindings {
        let at = issue_time + res.times(b.step as i64 - 1);
        let value = state.feedforward_value(&b.source, b.source_variable, &b.component, at)?;
        let v = match b.role {
            BindingRole::Value => value,
            role => {
                let previous = if b.step == 1 {
                    ic.thermal.get(&b.component).map_or(1.0, |i| i.on)
                } else {
                    state.feedforward_value(&b.source, b.source_variable, &b.component, at - res)?
                };
                derived_value(role, value, previous)
            }
        };
        c.update_parameter(&b.param, v)?;
    }
    Ok(())
}

/// Result of one emulator step (per-unit values).
#[derive(Clone, Debug, PartialEq)]
pub struct EmulationResult {
    pub at: Timestamp,
    pub status: SolveStatus,
    pub objective: f64,
    /// Realized system state `x` written into the simulation state.
    pub values: BTreeMap<SeriesId, f64>,
    pub params: BTreeMap<(ParamKind, String), f64>,
    pub balance_dual: Option<f64>,
    /// True when the step needed the penalized relaxation.
    pub relaxed: bool,
    pub slack_usage: f64,
    pub stats: SolveStats,
}

pub struct EmulationModel {
    pub spec: EmulatorSpec,
    container: OptContainer,
    solver: BundledSolver,
    bindings: Vec<FeedforwardBinding>,
    inputs: Vec<SeriesParams>,
    structure: Structure,
    pending: Option<Timestamp>,
    last: Option<Timestamp>,
}

impl EmulationModel {
    pub fn build(
        spec: &EmulatorSpec,
        sys: &SystemModel,
        ic: &InitialConditions,
        feedforwards: &[FeedforwardSpec],
    ) -> Result<Self> {
        if !spec.resolution.is_positive() {
            return Err(Error::Timing(format!("{}: resolution must be positive", spec.name)));
        }
        let built = build_problem(&spec.name, &spec.template, sys, 1, spec.resolution.as_hours(), Some(ic))?;
        let mut container = built.container;
        let mut bindings = Vec::new();
        for ff in feedforwards.iter().filter(|f| f.target == spec.name) {
            bindings.extend(attach(ff, &mut container, sys, 1)?);
        }
        let inputs = series_params(&container, sys);
        for s in &inputs {
            if sys.realization(&s.component, &s.label).is_none() {
                return Err(Error::MissingForecast(format!(
                    "{}: no realization of {}/{}",
                    spec.name, s.component, s.label
                )));
            }
        }
        Ok(EmulationModel {
            spec: spec.clone(),
            structure: container.structure(),
            container,
            solver: BundledSolver::new(spec.solver.clone()),
            bindings,
            inputs,
            pending: None,
            last: None,
        })
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn container(&self) -> &OptContainer {
        &self.container
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    pub fn options(&self) -> &SolverOptions {
        &self.solver.options
    }

    pub fn update(
        &mut self,
        sys: &SystemModel,
        at: Timestamp,
        ic: &InitialConditions,
        state: &SimulationState,
    ) -> Result<()> {
        if let Some(prev) = self.last {
            if at <= prev {
                return Err(Error::StaleState(format!("{} at {at} after {prev}", self.spec.name)));
            }
        }
        for s in &self.inputs {
            let v = sys
                .get_realization(&s.component, &s.label, at)
                .map_err(|e| Error::MissingForecast(format!("{}: {e}", self.spec.name)))?;
            for (k, _) in &s.keys {
                self.container.update_parameter(k, v)?;
            }
        }
        apply_initial_conditions(&mut self.container, sys, ic, self.spec.resolution.as_hours())?;
        apply_bindings(&mut self.container, &self.bindings, at, self.spec.resolution, ic, state)?;
        if self.container.structure() != self.structure {
            return Err(Error::Invariant(format!("{}: structure changed by an update", self.spec.name)));
        }
        self.pending = Some(at);
        Ok(())
    }

    /// Solves the step; an infeasible step is retried with penalized row slacks.
    pub fn solve(&mut self, sys: &SystemModel) -> Result<EmulationResult> {
        let at = self
            .pending
            .take()
            .ok_or_else(|| Error::Status(format!("{} solved without an update", self.spec.name)))?;
        self.last = Some(at);
        let mut r = self.solver.solve(&self.container);
        let mut relaxed = false;
        if r.status == SolveStatus::Infeasible {
            r = self.solver.relax_and_solve(&self.container);
            relaxed = true;
        }
        if !r.is_optimal() {
            return Err(Error::Infeasible(format!(
                "{} at {at}: {:?}{}",
                self.spec.name,
                r.status,
                r.diagnostic.map(|d| format!(" ({d})")).unwrap_or_default()
            )));
        }
        let (mut vars, params) = collect(&self.container, &r.primal, 1);
        add_derived_status(&mut vars, &params, sys, 1);
        Ok(EmulationResult {
            at,
            status: r.status,
            objective: r.objective,
            values: vars.into_iter().map(|(k, v)| (k, v[0])).collect(),
            params: params.into_iter().map(|(k, v)| (k, v[0])).collect(),
            balance_dual: balance_duals(&self.container, r.duals.as_ref(), 1).map(|d| d[0]),
            relaxed,
            slack_usage: r.slack_usage,
            stats: r.stats,
        })
    }
}

/// Starting state proposed by a relaxed solve of the initialization variant.
///
/// Used when the system carries no authored initial conditions.
pub fn initial_state_from_relaxation(
    template: &ProblemTemplate,
    sys: &SystemModel,
    horizon: usize,
    dt: f64,
    options: &SolverOptions,
) -> Result<InitialConditions> {
    let built = build_problem("initialization", template, sys, horizon, dt, None)?;
    let mut c = built.container;
    // forecast-driven parameters take the first stored window of their series
    for s in series_params(&c, sys) {
        let f = sys
            .forecasts()
            .filter(|f| f.component == s.component && f.label == s.label)
            .find_map(|f| f.windows.values().next().cloned());
        let r = sys.realization(&s.component, &s.label).map(|r| r.values.clone());
        let w = f.or(r).ok_or_else(|| Error::MissingForecast(format!("{}/{}", s.component, s.label)))?;
        for (k, step) in &s.keys {
            let v = w.get(step - 1).or(w.last()).copied().unwrap_or(0.0);
            c.update_parameter(k, v)?;
        }
    }
    let mut solver = BundledSolver::new(options.clone());
    let r = solver.relax_and_solve(&c);
    if !r.is_optimal() {
        return Err(Error::Infeasible(format!("initialization: {:?}", r.status)));
    }
    let mut ic = InitialConditions::default();
    for g in &sys.thermal_gens {
        let on = c
            .value_of(&r.primal, VarKind::OnStatus, &g.name, 1)
            .map(|v| if v > 0.5 { 1.0 } else { 0.0 })
            .unwrap_or(1.0);
        let p = c.value_of(&r.primal, VarKind::ActivePower, &g.name, 1).unwrap_or(0.0);
        let power = if on > 0.5 { p.clamp(g.p_min, g.p_max) } else { 0.0 };
        // a long history frees the first steps from minimum up/down limits
        let duration = (g.min_up.max(g.min_dn) as f64).max(1.0) + 1.0;
        ic.thermal.insert(g.name.clone(), ThermalIc { on, power, duration });
    }
    for s in &sys.storage {
        let v = c.value_of(&r.primal, VarKind::SoC, &s.name, 1).unwrap_or(s.energy_cap / 2.0);
        ic.storage.insert(s.name.clone(), v.clamp(0.0, s.energy_cap));
    }
    Ok(ic)
}

/// Names of thermal units committed at every step of a solution.
pub fn committed(values: &StepValues, step: usize) -> Vec<String> {
    values
        .iter()
        .filter(|((k, _), v)| *k == VarKind::OnStatus && v.get(step).is_some_and(|x| *x > 0.5))
        .map(|((_, c), _)| c.to_string())
        .collect()
}
