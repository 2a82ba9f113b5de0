//! Algebraic optimization container.
//!
//! Variables with bounds and integrality flags, sparse linear rows, a linear
//! objective and a registry of named parameters. A parameter owns a list of
//! slots (`rhs += coef * value` on a row, or on an objective coefficient),
//! so forecasts, feedforwards and initial conditions can be pushed into a
//! built model without touching its structure. Only right-hand sides and
//! linear objective coefficients can be parameterized; anything else needs
//! a rebuild.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::Timestamp;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VarKind {
    ActivePower,
    OnStatus,
    Start,
    Stop,
    Reserve,
    SoC,
    Charge,
    Discharge,
    Flow,
    Slack,
    ProductionCost,
    BalanceSlackUp,
    BalanceSlackDown,
    EnergyTargetSlack,
}

impl VarKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VarKind::ActivePower => "ActivePower",
            VarKind::OnStatus => "OnStatus",
            VarKind::Start => "Start",
            VarKind::Stop => "Stop",
            VarKind::Reserve => "Reserve",
            VarKind::SoC => "SoC",
            VarKind::Charge => "Charge",
            VarKind::Discharge => "Discharge",
            VarKind::Flow => "Flow",
            VarKind::Slack => "Slack",
            VarKind::ProductionCost => "ProductionCost",
            VarKind::BalanceSlackUp => "BalanceSlackUp",
            VarKind::BalanceSlackDown => "BalanceSlackDown",
            VarKind::EnergyTargetSlack => "EnergyTargetSlack",
        }
    }

    /// True for quantities held per-unit (power or energy) inside models.
    pub fn is_per_unit(self) -> bool {
        !matches!(
            self,
            VarKind::OnStatus | VarKind::Start | VarKind::Stop | VarKind::ProductionCost
        )
    }

    pub const ALL: [VarKind; 14] = [
        VarKind::ActivePower,
        VarKind::OnStatus,
        VarKind::Start,
        VarKind::Stop,
        VarKind::Reserve,
        VarKind::SoC,
        VarKind::Charge,
        VarKind::Discharge,
        VarKind::Flow,
        VarKind::Slack,
        VarKind::ProductionCost,
        VarKind::BalanceSlackUp,
        VarKind::BalanceSlackDown,
        VarKind::EnergyTargetSlack,
    ];

    pub fn parse(s: &str) -> Option<VarKind> {
        VarKind::ALL.iter().copied().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for VarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Identity of a decision variable: kind, component and 1-based step.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarKey {
    pub kind: VarKind,
    pub component: String,
    pub time: usize,
}

impl VarKey {
    pub fn new(kind: VarKind, component: impl Into<String>, time: usize) -> Self {
        VarKey { kind, component: component.into(), time }
    }
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({},{})", self.kind, self.component, self.time)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ParamKind {
    ForecastBound,
    FeedforwardOnStatus,
    FeedforwardUpperBound,
    FeedforwardLowerBound,
    /// 1 when the feedforward commitment turns the unit on at this step.
    FeedforwardStart,
    /// 1 when the feedforward commitment turns the unit off at this step.
    FeedforwardStop,
    EnergyTarget,
    RequirementRhs,
    InitialPower,
    InitialOnStatus,
    InitialSoC,
    /// 1 when the unit must stay on at this step because of its initial up time.
    InitialMustRun,
    /// 1 when the unit must stay off at this step because of its initial down time.
    InitialMustStayOff,
}

impl ParamKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ParamKind::ForecastBound => "ForecastBound",
            ParamKind::FeedforwardOnStatus => "FeedforwardOnStatus",
            ParamKind::FeedforwardUpperBound => "FeedforwardUpperBound",
            ParamKind::FeedforwardLowerBound => "FeedforwardLowerBound",
            ParamKind::FeedforwardStart => "FeedforwardStart",
            ParamKind::FeedforwardStop => "FeedforwardStop",
            ParamKind::EnergyTarget => "EnergyTarget",
            ParamKind::RequirementRhs => "RequirementRhs",
            ParamKind::InitialPower => "InitialPower",
            ParamKind::InitialOnStatus => "InitialOnStatus",
            ParamKind::InitialSoC => "InitialSoC",
            ParamKind::InitialMustRun => "InitialMustRun",
            ParamKind::InitialMustStayOff => "InitialMustStayOff",
        }
    }

    pub const ALL: [ParamKind; 13] = [
        ParamKind::ForecastBound,
        ParamKind::FeedforwardOnStatus,
        ParamKind::FeedforwardUpperBound,
        ParamKind::FeedforwardLowerBound,
        ParamKind::FeedforwardStart,
        ParamKind::FeedforwardStop,
        ParamKind::EnergyTarget,
        ParamKind::RequirementRhs,
        ParamKind::InitialPower,
        ParamKind::InitialOnStatus,
        ParamKind::InitialSoC,
        ParamKind::InitialMustRun,
        ParamKind::InitialMustStayOff,
    ];

    pub fn parse(s: &str) -> Option<ParamKind> {
        ParamKind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    pub fn is_initial_condition(self) -> bool {
        matches!(
            self,
            ParamKind::InitialPower
                | ParamKind::InitialOnStatus
                | ParamKind::InitialSoC
                | ParamKind::InitialMustRun
                | ParamKind::InitialMustStayOff
        )
    }

    pub fn is_feedforward(self) -> bool {
        matches!(
            self,
            ParamKind::FeedforwardOnStatus
                | ParamKind::FeedforwardUpperBound
                | ParamKind::FeedforwardLowerBound
                | ParamKind::FeedforwardStart
                | ParamKind::FeedforwardStop
                | ParamKind::EnergyTarget
        )
    }
}

impl fmt::Display for ParamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ParamKey {
    pub kind: ParamKind,
    pub component: String,
    pub time: usize,
}

impl ParamKey {
    pub fn new(kind: ParamKind, component: impl Into<String>, time: usize) -> Self {
        ParamKey { kind, component: component.into(), time }
    }
}

impl fmt::Display for ParamKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({},{})", self.kind, self.component, self.time)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarRef(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConstraintRef(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

/// A row to insert: `Σ coef·var  sense  rhs + Σ mult·param`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearConstraint {
    pub name: String,
    pub terms: Vec<(VarRef, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub rhs_params: Vec<(ParamKey, f64)>,
}

impl LinearConstraint {
    pub fn new(name: impl Into<String>, sense: Sense, rhs: f64) -> Self {
        LinearConstraint { name: name.into(), terms: Vec::new(), sense, rhs, rhs_params: Vec::new() }
    }

    pub fn term(mut self, v: VarRef, coef: f64) -> Self {
        self.terms.push((v, coef));
        self
    }

    pub fn param(mut self, key: ParamKey, mult: f64) -> Self {
        self.rhs_params.push((key, mult));
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub key: VarKey,
    #[serde(with = "extended_f64")]
    pub lb: f64,
    #[serde(with = "extended_f64")]
    pub ub: f64,
    pub integral: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    /// Constant part of the right-hand side.
    #[serde(with = "extended_f64")]
    pub rhs_const: f64,
    /// Effective right-hand side with all parameter contributions applied.
    #[serde(with = "extended_f64")]
    pub rhs: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlotTarget {
    Rhs(usize),
    ObjectiveCoef(usize),
    ObjectiveConstant,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSlot {
    pub target: SlotTarget,
    pub coef: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Parameter {
    pub key: ParamKey,
    pub value: f64,
    pub slots: Vec<ParamSlot>,
}

/// Structural fingerprint; constant across parameter updates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Structure {
    pub n_vars: usize,
    pub n_rows: usize,
    pub nnz: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ContainerRepr", into = "ContainerRepr")]
pub struct OptContainer {
    pub name: String,
    pub build_time: Option<Timestamp>,
    variables: Vec<Variable>,
    rows: Vec<Row>,
    objective_base: Vec<f64>,
    objective: Vec<f64>,
    objective_offset_base: f64,
    objective_offset: f64,
    params: Vec<Parameter>,
    var_index: BTreeMap<VarKey, usize>,
    row_index: BTreeMap<String, usize>,
    param_index: BTreeMap<ParamKey, usize>,
    // reverse slot index: (param, coef) per row rhs / objective coefficient / offset
    rhs_slots: Vec<Vec<(usize, f64)>>,
    obj_slots: Vec<Vec<(usize, f64)>>,
    offset_slots: Vec<(usize, f64)>,
}

#[derive(Clone, Serialize, Deserialize)]
struct ContainerRepr {
    name: String,
    build_time: Option<Timestamp>,
    variables: Vec<Variable>,
    constraints: Vec<Row>,
    objective_base: Vec<f64>,
    objective: Vec<f64>,
    objective_offset_base: f64,
    objective_offset: f64,
    parameters: Vec<Parameter>,
}

impl From<OptContainer> for ContainerRepr {
    fn from(c: OptContainer) -> Self {
        ContainerRepr {
            name: c.name,
            build_time: c.build_time,
            variables: c.variables,
            constraints: c.rows,
            objective_base: c.objective_base,
            objective: c.objective,
            objective_offset_base: c.objective_offset_base,
            objective_offset: c.objective_offset,
            parameters: c.params,
        }
    }
}

impl TryFrom<ContainerRepr> for OptContainer {
    type Error = Error;

    fn try_from(r: ContainerRepr) -> Result<Self> {
        let n = r.variables.len();
        if r.objective.len() != n || r.objective_base.len() != n {
            return Err(Error::Schema("objective length does not match variable count".into()));
        }
        let mut c = OptContainer {
            name: r.name,
            build_time: r.build_time,
            variables: r.variables,
            rows: r.constraints,
            objective_base: r.objective_base,
            objective: r.objective,
            objective_offset_base: r.objective_offset_base,
            objective_offset: r.objective_offset,
            params: r.parameters,
            var_index: BTreeMap::new(),
            row_index: BTreeMap::new(),
            param_index: BTreeMap::new(),
            rhs_slots: Vec::new(),
            obj_slots: Vec::new(),
            offset_slots: Vec::new(),
        };
        c.rhs_slots = alloc::vec![Vec::new(); c.rows.len()];
        c.obj_slots = alloc::vec![Vec::new(); n];
        for (i, v) in c.variables.iter().enumerate() {
            if c.var_index.insert(v.key.clone(), i).is_some() {
                return Err(Error::DuplicateVariable(format!("{}", v.key)));
            }
        }
        for (i, row) in c.rows.iter().enumerate() {
            if row.terms.iter().any(|(j, _)| *j >= n) {
                return Err(Error::UnknownVariable(format!("index in row {}", row.name)));
            }
            c.row_index.insert(row.name.clone(), i);
        }
        for (i, p) in c.params.iter().enumerate() {
            c.param_index.insert(p.key.clone(), i);
            for slot in &p.slots {
                match slot.target {
                    SlotTarget::Rhs(r) if r < c.rhs_slots.len() => c.rhs_slots[r].push((i, slot.coef)),
                    SlotTarget::ObjectiveCoef(v) if v < n => c.obj_slots[v].push((i, slot.coef)),
                    SlotTarget::ObjectiveConstant => c.offset_slots.push((i, slot.coef)),
                    _ => return Err(Error::Schema(format!("slot of {} out of range", p.key))),
                }
            }
        }
        Ok(c)
    }
}

impl OptContainer {
    pub fn new(name: impl Into<String>) -> Self {
        OptContainer {
            name: name.into(),
            build_time: None,
            variables: Vec::new(),
            rows: Vec::new(),
            objective_base: Vec::new(),
            objective: Vec::new(),
            objective_offset_base: 0.0,
            objective_offset: 0.0,
            params: Vec::new(),
            var_index: BTreeMap::new(),
            row_index: BTreeMap::new(),
            param_index: BTreeMap::new(),
            rhs_slots: Vec::new(),
            obj_slots: Vec::new(),
            offset_slots: Vec::new(),
        }
    }

    pub fn add_variable(&mut self, key: VarKey, lb: f64, ub: f64, integral: bool) -> Result<VarRef> {
        if self.var_index.contains_key(&key) {
            return Err(Error::DuplicateVariable(format!("{key}")));
        }
        if lb.is_nan() || ub.is_nan() {
            return Err(Error::NonFinite(format!("bounds of {key}")));
        }
        if lb > ub {
            return Err(Error::InvertedBounds(format!("{key}: {lb} > {ub}")));
        }
        let idx = self.variables.len();
        self.var_index.insert(key.clone(), idx);
        self.variables.push(Variable { key, lb, ub, integral });
        self.objective_base.push(0.0);
        self.objective.push(0.0);
        self.obj_slots.push(Vec::new());
        Ok(VarRef(idx))
    }

    pub fn add_constraint(&mut self, c: LinearConstraint) -> Result<ConstraintRef> {
        if !c.rhs.is_finite() && !c.rhs.is_infinite() {
            return Err(Error::NonFinite(format!("rhs of {}", c.name)));
        }
        let mut terms: Vec<(usize, f64)> = Vec::with_capacity(c.terms.len());
        for (v, coef) in &c.terms {
            if v.0 >= self.variables.len() {
                return Err(Error::UnknownVariable(format!("#{} in {}", v.0, c.name)));
            }
            if !coef.is_finite() {
                return Err(Error::NonFinite(format!("coefficient of {} in {}", self.variables[v.0].key, c.name)));
            }
            match terms.iter_mut().find(|(j, _)| *j == v.0) {
                Some(t) => t.1 += coef,
                None => terms.push((v.0, *coef)),
            }
        }
        if self.row_index.contains_key(&c.name) {
            return Err(Error::Build(format!("duplicate constraint name {}", c.name)));
        }
        let idx = self.rows.len();
        self.row_index.insert(c.name.clone(), idx);
        self.rows.push(Row { name: c.name, terms, sense: c.sense, rhs_const: c.rhs, rhs: c.rhs });
        self.rhs_slots.push(Vec::new());
        for (key, mult) in c.rhs_params {
            self.bind_param(key, SlotTarget::Rhs(idx), mult)?;
        }
        Ok(ConstraintRef(idx))
    }

    /// Registers `key` (value 0 when new) and attaches a slot to it.
    pub fn bind_param(&mut self, key: ParamKey, target: SlotTarget, coef: f64) -> Result<()> {
        if !coef.is_finite() {
            return Err(Error::NonFinite(format!("slot coefficient of {key}")));
        }
        match target {
            SlotTarget::Rhs(r) if r >= self.rows.len() => {
                return Err(Error::UnknownConstraint(format!("#{r}")))
            }
            SlotTarget::ObjectiveCoef(v) if v >= self.variables.len() => {
                return Err(Error::UnknownVariable(format!("#{v}")))
            }
            _ => {}
        }
        let pidx = match self.param_index.get(&key) {
            Some(&i) => i,
            None => {
                let i = self.params.len();
                self.param_index.insert(key.clone(), i);
                self.params.push(Parameter { key, value: 0.0, slots: Vec::new() });
                i
            }
        };
        self.params[pidx].slots.push(ParamSlot { target, coef });
        match target {
            SlotTarget::Rhs(r) => self.rhs_slots[r].push((pidx, coef)),
            SlotTarget::ObjectiveCoef(v) => self.obj_slots[v].push((pidx, coef)),
            SlotTarget::ObjectiveConstant => self.offset_slots.push((pidx, coef)),
        }
        self.recompute(target);
        Ok(())
    }

    /// Declares a parameter with an initial value, without any slot yet.
    pub fn declare_param(&mut self, key: ParamKey, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::NonFinite(format!("value of {key}")));
        }
        if self.param_index.contains_key(&key) {
            return self.update_parameter(&key, value);
        }
        let i = self.params.len();
        self.param_index.insert(key.clone(), i);
        self.params.push(Parameter { key, value, slots: Vec::new() });
        Ok(())
    }

    /// Sets a parameter and recomputes every slot it feeds, in place.
    pub fn update_parameter(&mut self, key: &ParamKey, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::NonFinite(format!("value of {key}")));
        }
        let &pidx = self
            .param_index
            .get(key)
            .ok_or_else(|| Error::UnknownParameter(format!("{key}")))?;
        self.params[pidx].value = value;
        let targets: Vec<SlotTarget> = self.params[pidx].slots.iter().map(|s| s.target).collect();
        for t in targets {
            self.recompute(t);
        }
        Ok(())
    }

    // Recomputing from the constant part keeps repeated updates free of drift.
    fn recompute(&mut self, target: SlotTarget) {
        let slots = match target {
            SlotTarget::Rhs(r) => &self.rhs_slots[r],
            SlotTarget::ObjectiveCoef(v) => &self.obj_slots[v],
            SlotTarget::ObjectiveConstant => &self.offset_slots,
        };
        let contrib: f64 = slots.iter().map(|&(p, coef)| coef * self.params[p].value).sum();
        match target {
            SlotTarget::Rhs(r) => self.rows[r].rhs = self.rows[r].rhs_const + contrib,
            SlotTarget::ObjectiveCoef(v) => self.objective[v] = self.objective_base[v] + contrib,
            SlotTarget::ObjectiveConstant => self.objective_offset = self.objective_offset_base + contrib,
        }
    }

    /// Replaces the constant part of a row's right-hand side.
    pub fn set_rhs_constant(&mut self, row: ConstraintRef, value: f64) -> Result<()> {
        let r = self.rows.get_mut(row.0).ok_or_else(|| Error::UnknownConstraint(format!("#{}", row.0)))?;
        r.rhs_const = value;
        self.recompute(SlotTarget::Rhs(row.0));
        Ok(())
    }

    pub fn add_objective_coef(&mut self, v: VarRef, coef: f64) -> Result<()> {
        if !coef.is_finite() {
            return Err(Error::NonFinite(format!("objective coefficient of {}", self.variables[v.0].key)));
        }
        self.objective_base[v.0] += coef;
        self.recompute(SlotTarget::ObjectiveCoef(v.0));
        Ok(())
    }

    pub fn add_objective_constant(&mut self, c: f64) {
        self.objective_offset_base += c;
        self.recompute(SlotTarget::ObjectiveConstant);
    }

    pub fn var(&self, key: &VarKey) -> Option<VarRef> {
        self.var_index.get(key).copied().map(VarRef)
    }

    pub fn var_ref(&self, kind: VarKind, component: &str, time: usize) -> Result<VarRef> {
        let key = VarKey::new(kind, component, time);
        self.var(&key).ok_or_else(|| Error::UnknownVariable(format!("{key}")))
    }

    pub fn constraint(&self, name: &str) -> Option<ConstraintRef> {
        self.row_index.get(name).copied().map(ConstraintRef)
    }

    pub fn has_param(&self, key: &ParamKey) -> bool {
        self.param_index.contains_key(key)
    }

    pub fn param_value(&self, key: &ParamKey) -> Option<f64> {
        self.param_index.get(key).map(|&i| self.params[i].value)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn row(&self, c: ConstraintRef) -> &Row {
        &self.rows[c.0]
    }

    pub fn params(&self) -> &[Parameter] {
        &self.params
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn objective_offset(&self) -> f64 {
        self.objective_offset
    }

    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn has_integers(&self) -> bool {
        self.variables.iter().any(|v| v.integral)
    }

    pub fn structure(&self) -> Structure {
        Structure {
            n_vars: self.variables.len(),
            n_rows: self.rows.len(),
            nnz: self.rows.iter().map(|r| r.terms.len()).sum(),
        }
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>() + self.objective_offset
    }

    pub fn row_activity(&self, row: &Row, x: &[f64]) -> f64 {
        row.terms.iter().map(|(j, a)| a * x[*j]).sum()
    }

    /// Largest bound or row violation of the point `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, val) in self.variables.iter().zip(x) {
            worst = worst.max(v.lb - val).max(val - v.ub);
        }
        for r in &self.rows {
            let a = self.row_activity(r, x);
            let viol = match r.sense {
                Sense::Le => a - r.rhs,
                Sense::Ge => r.rhs - a,
                Sense::Eq => (a - r.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    /// Values of the named variables from a primal vector.
    pub fn value_of(&self, x: &[f64], kind: VarKind, component: &str, time: usize) -> Option<f64> {
        self.var(&VarKey::new(kind, component, time)).map(|v| x[v.0])
    }

    /// Components having a variable of `kind`, in first-declaration order.
    pub fn components_of(&self, kind: VarKind) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for v in &self.variables {
            if v.key.kind == kind && !out.iter().any(|c| c == &v.key.component) {
                out.push(v.key.component.clone());
            }
        }
        out
    }

    /// Parameter components of `kind`, in declaration order.
    pub fn param_components_of(&self, kind: ParamKind) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for p in &self.params {
            if p.key.kind == kind && !out.iter().any(|c| c == &p.key.component) {
                out.push(p.key.component.clone());
            }
        }
        out
    }

    pub fn sanity_check(&self) -> SanityReport {
        let mut findings = Vec::new();
        for v in &self.variables {
            if v.lb.is_nan() || v.ub.is_nan() || v.lb == f64::INFINITY || v.ub == f64::NEG_INFINITY {
                findings.push(Finding::fatal(FindingKind::NonFinite, format!("bounds of {}", v.key)));
            }
        }
        for (j, c) in self.objective.iter().enumerate() {
            if !c.is_finite() {
                findings.push(Finding::fatal(
                    FindingKind::NonFinite,
                    format!("objective coefficient of {}", self.variables[j].key),
                ));
            }
        }
        for r in &self.rows {
            if r.terms.is_empty() {
                findings.push(Finding::fatal(FindingKind::EmptyConstraint, r.name.clone()));
            }
            if !r.rhs.is_finite() {
                findings.push(Finding::fatal(FindingKind::NonFinite, format!("rhs of {}", r.name)));
            }
            for (_, a) in &r.terms {
                if !a.is_finite() {
                    findings.push(Finding::fatal(FindingKind::NonFinite, format!("coefficient in {}", r.name)));
                } else if *a != 0.0 && !(COEF_RANGE.0..=COEF_RANGE.1).contains(&a.abs()) {
                    findings.push(Finding {
                        severity: Severity::Warning,
                        kind: FindingKind::CoefficientRange,
                        location: format!("{} ({a:e})", r.name),
                    });
                }
            }
        }
        SanityReport { findings }
    }

    /// CPLEX LP text of the current container.
    pub fn to_lp_string(&self) -> String {
        let name = |j: usize| lp_name(&self.variables[j].key);
        let mut s = String::new();
        let _ = writeln!(s, "\\ {}", self.name);
        s.push_str("Minimize\n obj:");
        let mut any = false;
        for (j, c) in self.objective.iter().enumerate() {
            if *c != 0.0 {
                let _ = write!(s, " {} {} {}", if *c < 0.0 { '-' } else { '+' }, c.abs(), name(j));
                any = true;
            }
        }
        if !any {
            s.push_str(" 0");
        }
        if self.objective_offset != 0.0 {
            let _ = write!(s, " + {}", self.objective_offset);
        }
        s.push_str("\nSubject To\n");
        for (i, r) in self.rows.iter().enumerate() {
            let _ = write!(s, " r{}:", i);
            for (j, a) in &r.terms {
                let _ = write!(s, " {} {} {}", if *a < 0.0 { '-' } else { '+' }, a.abs(), name(*j));
            }
            let _ = writeln!(s, " {} {}", r.sense.symbol(), r.rhs);
        }
        s.push_str("Bounds\n");
        for (j, v) in self.variables.iter().enumerate() {
            match (v.lb.is_finite(), v.ub.is_finite()) {
                (false, false) => {
                    let _ = writeln!(s, " {} free", name(j));
                }
                (true, true) => {
                    let _ = writeln!(s, " {} <= {} <= {}", v.lb, name(j), v.ub);
                }
                (true, false) => {
                    let _ = writeln!(s, " {} >= {}", name(j), v.lb);
                }
                (false, true) => {
                    let _ = writeln!(s, " -inf <= {} <= {}", name(j), v.ub);
                }
            }
        }
        let ints: Vec<usize> = (0..self.variables.len()).filter(|&j| self.variables[j].integral).collect();
        if !ints.is_empty() {
            s.push_str("Generals\n");
            for j in ints {
                let _ = writeln!(s, " {}", name(j));
            }
        }
        s.push_str("End\n");
        s
    }
}

fn lp_name(k: &VarKey) -> String {
    let comp: String = k
        .component
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    format!("{}_{}_{}", k.kind, comp, k.time)
}

/// JSON has no infinities; they travel as the strings `"inf"` / `"-inf"`.
mod extended_f64 {
    use serde::de::{self, Deserializer, Visitor};
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *v == f64::INFINITY {
            s.serialize_str("inf")
        } else if *v == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else {
            s.serialize_f64(*v)
        }
    }

    struct V;

    impl<'de> Visitor<'de> for V {
        type Value = f64;

        fn expecting(&self, f: &mut core::fmt::Formatter) -> core::fmt::Result {
            f.write_str("a number or \"inf\" / \"-inf\" / \"nan\"")
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            match v {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(E::custom("unexpected string for number")),
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(V)
    }
}

pub const COEF_RANGE: (f64, f64) = (1e-6, 1e6);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Severity {
    Warning,
    Fatal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FindingKind {
    CoefficientRange,
    NonFinite,
    EmptyConstraint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub severity: Severity,
    pub kind: FindingKind,
    pub location: String,
}

impl Finding {
    fn fatal(kind: FindingKind, location: String) -> Self {
        Finding { severity: Severity::Fatal, kind, location }
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            FindingKind::CoefficientRange => "coefficient range",
            FindingKind::NonFinite => "nonfinite value",
            FindingKind::EmptyConstraint => "empty constraint",
        };
        write!(f, "{:?}: {kind} at {}", self.severity, self.location)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SanityReport {
    pub findings: Vec<Finding>,
}

impl SanityReport {
    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn fatal(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Fatal)
    }

    pub fn has_fatal(&self) -> bool {
        self.fatal().next().is_some()
    }
}
