//! Feedforwards: parameters and rows that carry one model's decisions into
//! another model's container.
//!
//! Attaching a feedforward only adds parameters, rows and slack variables;
//! values are pushed at every execution through the usual parameter slots.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opt::{LinearConstraint, OptContainer, ParamKey, ParamKind, Sense, SlotTarget, VarKey, VarKind};
use crate::system::SystemModel;

/// Default penalty for missing an energy target, $/MWh.
pub const DEFAULT_ENERGY_TARGET_PENALTY: f64 = 1e4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeedforwardKind {
    /// Commitment status of thermal units: `P^lb·ON <= p <= P^ub·ON`.
    SemiContinuous,
    /// `target <= source`.
    UpperBound,
    /// `target >= source`.
    LowerBound,
    /// Soft end-of-horizon storage level.
    EnergyTarget,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeedforwardSpec {
    pub kind: FeedforwardKind,
    pub source: String,
    pub source_variable: VarKind,
    pub target: String,
    pub target_variable: VarKind,
    pub components: Vec<String>,
    /// Energy-target shortfall penalty in $/MWh.
    #[serde(default)]
    pub penalty: Option<f64>,
}

/// How a bound parameter's value is derived from the source trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BindingRole {
    /// The source value at the step.
    Value,
    /// 1 when the source status rises into the step.
    Start,
    /// 1 when the source status falls into the step.
    Stop,
}

/// One parameter of a target container fed from a source model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeedforwardBinding {
    pub param: ParamKey,
    pub source: String,
    pub source_variable: VarKind,
    pub component: String,
    /// Target step, 1-based.
    pub step: usize,
    pub role: BindingRole,
}

/// Adds the parameters and rows of `spec` to `c`, a container with `horizon` steps.
pub fn attach(
    spec: &FeedforwardSpec,
    c: &mut OptContainer,
    sys: &SystemModel,
    horizon: usize,
) -> Result<Vec<FeedforwardBinding>> {
    match spec.kind {
        FeedforwardKind::SemiContinuous => attach_semicontinuous(spec, c, sys, horizon),
        FeedforwardKind::UpperBound | FeedforwardKind::LowerBound => attach_bound(spec, c, horizon),
        FeedforwardKind::EnergyTarget => attach_energy_target(spec, c, sys, horizon),
    }
}

fn binding(spec: &FeedforwardSpec, param: ParamKey, step: usize, role: BindingRole) -> FeedforwardBinding {
    FeedforwardBinding {
        component: param.component.clone(),
        param,
        source: spec.source.clone(),
        source_variable: spec.source_variable,
        step,
        role,
    }
}

fn attach_semicontinuous(
    spec: &FeedforwardSpec,
    c: &mut OptContainer,
    sys: &SystemModel,
    horizon: usize,
) -> Result<Vec<FeedforwardBinding>> {
    let mut out = Vec::new();
    for g in &spec.components {
        let gen = sys.thermal(g).ok_or_else(|| Error::DanglingReference(format!("thermal unit `{g}`")))?;
        for t in 1..=horizon {
            let p = c.var_ref(spec.target_variable, g, t)?;
            let on = ParamKey::new(ParamKind::FeedforwardOnStatus, g, t);
            c.add_constraint(
                LinearConstraint::new(format!("ff_sc_ub_{g}_{t}"), Sense::Le, 0.0)
                    .term(p, 1.0)
                    .param(on.clone(), gen.p_max),
            )?;
            if gen.p_min > 0.0 {
                // the unconditional lower bound becomes P^lb·ON
                match c.constraint(&format!("lb_{g}_{t}")) {
                    Some(r) => {
                        c.set_rhs_constant(r, 0.0)?;
                        c.bind_param(on.clone(), SlotTarget::Rhs(r.0), gen.p_min)?;
                    }
                    None => {
                        c.add_constraint(
                            LinearConstraint::new(format!("ff_sc_lb_{g}_{t}"), Sense::Ge, 0.0)
                                .term(p, 1.0)
                                .param(on.clone(), gen.p_min),
                        )?;
                    }
                }
                // ramp rows allow a jump to or from P^lb at a commitment change
                for (row, kind, role) in [
                    ("ramp_up", ParamKind::FeedforwardStart, BindingRole::Start),
                    ("ramp_dn", ParamKind::FeedforwardStop, BindingRole::Stop),
                ] {
                    if let Some(r) = c.constraint(&format!("{row}_{g}_{t}")) {
                        let k = ParamKey::new(kind, g, t);
                        c.bind_param(k.clone(), SlotTarget::Rhs(r.0), gen.p_min)?;
                        out.push(binding(spec, k, t, role));
                    }
                }
            }
            c.update_parameter(&on, 1.0)?;
            out.push(binding(spec, on, t, BindingRole::Value));
        }
    }
    Ok(out)
}

fn attach_bound(spec: &FeedforwardSpec, c: &mut OptContainer, horizon: usize) -> Result<Vec<FeedforwardBinding>> {
    let (kind, sense, tag) = match spec.kind {
        FeedforwardKind::UpperBound => (ParamKind::FeedforwardUpperBound, Sense::Le, "ff_ub"),
        _ => (ParamKind::FeedforwardLowerBound, Sense::Ge, "ff_lb"),
    };
    let mut out = Vec::new();
    for comp in &spec.components {
        for t in 1..=horizon {
            let v = c.var_ref(spec.target_variable, comp, t)?;
            let var = &c.variables()[v.0];
            let init = match sense {
                Sense::Le => var.ub,
                _ => var.lb,
            };
            let k = ParamKey::new(kind, comp, t);
            c.add_constraint(
                LinearConstraint::new(format!("{tag}_{}_{comp}_{t}", spec.target_variable.as_str()), sense, 0.0)
                    .term(v, 1.0)
                    .param(k.clone(), 1.0),
            )?;
            c.update_parameter(&k, if init.is_finite() { init } else { 0.0 })?;
            out.push(binding(spec, k, t, BindingRole::Value));
        }
    }
    Ok(out)
}

fn attach_energy_target(
    spec: &FeedforwardSpec,
    c: &mut OptContainer,
    sys: &SystemModel,
    horizon: usize,
) -> Result<Vec<FeedforwardBinding>> {
    let penalty = spec.penalty.unwrap_or(DEFAULT_ENERGY_TARGET_PENALTY) * sys.base_power;
    let mut out = Vec::new();
    for s in &spec.components {
        let soc = c.var_ref(spec.target_variable, s, horizon)?;
        let slack = c.add_variable(VarKey::new(VarKind::EnergyTargetSlack, s, horizon), 0.0, f64::INFINITY, false)?;
        let k = ParamKey::new(ParamKind::EnergyTarget, s, horizon);
        c.add_constraint(
            LinearConstraint::new(format!("ff_energy_{s}"), Sense::Ge, 0.0)
                .term(soc, 1.0)
                .term(slack, 1.0)
                .param(k.clone(), 1.0),
        )?;
        c.add_objective_coef(slack, penalty)?;
        out.push(binding(spec, k, horizon, BindingRole::Value));
    }
    Ok(out)
}

/// Values of every binding of one component given the source's values at
/// steps `1..=H` of the target and the status before step 1.
///
/// `Start`/`Stop` follow the transitions of the source status sequence.
pub fn derived_value(role: BindingRole, value: f64, previous: f64) -> f64 {
    let on = |v: f64| -> f64 { if v > 0.5 { 1.0 } else { 0.0 } };
    match role {
        BindingRole::Value => value,
        BindingRole::Start => (on(value) - on(previous)).max(0.0),
        BindingRole::Stop => (on(previous) - on(value)).max(0.0),
    }
}
