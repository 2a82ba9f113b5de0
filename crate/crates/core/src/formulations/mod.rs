//! Device, network and service formulations and the template that picks them.
//!
//! A build runs in fixed phases: variables for every selected formulation,
//! then the network balance, then device and service constraints, then the
//! objective, and finally the container sanity check. Devices are visited in
//! a fixed class order (thermal, renewable, load, storage) so that the rows
//! of one class never depend on the formulation chosen for another.

mod network;
mod renewable;
mod reserve;
mod storage;
mod thermal;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;
use crate::opt::{OptContainer, ParamKey, ParamKind, SanityReport, VarRef};
use crate::system::{ComponentType, SystemModel};

pub use network::{branch_bus_matrix, compute_ptdf, ptdf_flows};

/// Series label read for renewable availability and load withdrawal.
pub const POWER_LABEL: &str = "max_active_power";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NetworkFormulation {
    CopperPlate,
    PTDFDCPower,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DeviceFormulation {
    ThermalStandardUnitCommitment,
    ThermalBasicDispatch,
    RenewableFullDispatch,
    StaticPowerLoad,
    StorageBasicDispatch,
}

impl DeviceFormulation {
    pub fn component_type(self) -> ComponentType {
        match self {
            DeviceFormulation::ThermalStandardUnitCommitment | DeviceFormulation::ThermalBasicDispatch => {
                ComponentType::ThermalStandard
            }
            DeviceFormulation::RenewableFullDispatch => ComponentType::RenewableDispatch,
            DeviceFormulation::StaticPowerLoad => ComponentType::PowerLoad,
            DeviceFormulation::StorageBasicDispatch => ComponentType::EnergyReservoirStorage,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ServiceFormulation {
    RangeReserve,
}

/// Maps component classes and reserve products to formulations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemTemplate {
    pub network: NetworkFormulation,
    pub devices: BTreeMap<ComponentType, DeviceFormulation>,
    #[serde(default)]
    pub services: BTreeMap<String, ServiceFormulation>,
    /// Penalty ($/MWh) of slack injections/withdrawals in the balance rows; none when absent.
    #[serde(default)]
    pub balance_slack_penalty: Option<f64>,
}

impl ProblemTemplate {
    pub fn new(network: NetworkFormulation) -> Self {
        ProblemTemplate { network, devices: BTreeMap::new(), services: BTreeMap::new(), balance_slack_penalty: None }
    }

    pub fn device(mut self, t: ComponentType, f: DeviceFormulation) -> Self {
        self.devices.insert(t, f);
        self
    }

    pub fn service(mut self, name: impl Into<String>, f: ServiceFormulation) -> Self {
        self.services.insert(name.into(), f);
        self
    }

    pub fn with_balance_slack(mut self, penalty: f64) -> Self {
        self.balance_slack_penalty = Some(penalty);
        self
    }

    /// Unit commitment with renewables, loads and storage on a copper plate.
    pub fn unit_commitment() -> Self {
        ProblemTemplate::new(NetworkFormulation::CopperPlate)
            .device(ComponentType::ThermalStandard, DeviceFormulation::ThermalStandardUnitCommitment)
            .device(ComponentType::RenewableDispatch, DeviceFormulation::RenewableFullDispatch)
            .device(ComponentType::PowerLoad, DeviceFormulation::StaticPowerLoad)
            .device(ComponentType::EnergyReservoirStorage, DeviceFormulation::StorageBasicDispatch)
    }

    /// Economic dispatch counterpart of [`ProblemTemplate::unit_commitment`].
    pub fn economic_dispatch() -> Self {
        ProblemTemplate::new(NetworkFormulation::CopperPlate)
            .device(ComponentType::ThermalStandard, DeviceFormulation::ThermalBasicDispatch)
            .device(ComponentType::RenewableDispatch, DeviceFormulation::RenewableFullDispatch)
            .device(ComponentType::PowerLoad, DeviceFormulation::StaticPowerLoad)
            .device(ComponentType::EnergyReservoirStorage, DeviceFormulation::StorageBasicDispatch)
    }

    /// Checks coverage of `sys` and formulation/class agreement.
    pub fn check_coverage(&self, sys: &SystemModel) -> Result<()> {
        for (t, f) in &self.devices {
            if f.component_type() != *t {
                return Err(Error::Build(format!("{f:?} cannot model {}", t.as_str())));
            }
        }
        for t in sys.component_types() {
            if !self.devices.contains_key(&t) {
                return Err(Error::UncoveredComponentType(t.as_str().to_string()));
            }
        }
        for name in self.services.keys() {
            if !sys.reserves.iter().any(|r| &r.name == name) {
                return Err(Error::DanglingReference(format!("template service `{name}` is not a reserve product")));
            }
        }
        if let Some(p) = self.balance_slack_penalty {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::Build("balance slack penalty must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn formulation(&self, t: ComponentType) -> Option<DeviceFormulation> {
        self.devices.get(&t).copied()
    }
}

/// Initial state of one thermal unit; power per-unit, duration in hours.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalIc {
    pub on: f64,
    pub power: f64,
    pub duration: f64,
}

/// Initial conditions for inter-temporal devices (per-unit).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InitialConditions {
    pub thermal: BTreeMap<String, ThermalIc>,
    pub storage: BTreeMap<String, f64>,
}

impl InitialConditions {
    /// Conditions authored on the system; `None` when any device lacks them.
    pub fn from_system(sys: &SystemModel) -> Option<Self> {
        let mut ic = InitialConditions::default();
        for g in &sys.thermal_gens {
            let i = g.initial?;
            ic.thermal.insert(
                g.name.clone(),
                ThermalIc { on: if i.on { 1.0 } else { 0.0 }, power: i.power, duration: i.duration },
            );
        }
        for s in &sys.storage {
            ic.storage.insert(s.name.clone(), s.initial_soc?);
        }
        Some(ic)
    }

    pub fn is_complete_for(&self, sys: &SystemModel) -> bool {
        sys.thermal_gens.iter().all(|g| self.thermal.contains_key(&g.name))
            && sys.storage.iter().all(|s| self.storage.contains_key(&s.name))
    }
}

/// Output of [`build_problem`].
#[derive(Clone, Debug, PartialEq)]
pub struct BuiltProblem {
    pub container: OptContainer,
    pub sanity: SanityReport,
    pub warnings: Vec<String>,
}

/// Injection contributed to a bus balance: `coef · var`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Injection {
    pub bus: usize,
    pub var: VarRef,
    pub coef: f64,
}

/// Withdrawal `coef · param` at a bus.
#[derive(Clone, Debug)]
pub(crate) struct Withdrawal {
    pub bus: usize,
    pub param: ParamKey,
    pub coef: f64,
}

pub(crate) struct Ctx<'a> {
    pub c: OptContainer,
    pub sys: &'a SystemModel,
    pub template: &'a ProblemTemplate,
    pub horizon: usize,
    /// Step length in hours.
    pub dt: f64,
    /// `None` builds the initialization model without initial-condition rows.
    pub ic: Option<&'a InitialConditions>,
    pub warnings: Vec<String>,
    pub injections: Vec<Vec<Injection>>,
    pub withdrawals: Vec<Vec<Withdrawal>>,
}

impl Ctx<'_> {
    pub fn bus(&self, name: &str) -> Result<usize> {
        self.sys
            .bus_index(name)
            .ok_or_else(|| Error::DanglingReference(format!("bus `{name}`")))
    }

    pub fn inject(&mut self, t: usize, bus: usize, var: VarRef, coef: f64) {
        self.injections[t - 1].push(Injection { bus, var, coef });
    }

    pub fn withdraw(&mut self, t: usize, bus: usize, param: ParamKey, coef: f64) {
        self.withdrawals[t - 1].push(Withdrawal { bus, param, coef });
    }

    pub fn is_init(&self) -> bool {
        self.ic.is_none()
    }

    pub fn has(&self, t: ComponentType) -> Option<DeviceFormulation> {
        self.template.formulation(t)
    }
}

/// Steps needed to cover `hours`, at least 0.
pub(crate) fn steps_for(hours: f64, dt: f64) -> usize {
    if hours <= 0.0 {
        0
    } else {
        math::ceil(hours / dt - 1e-9) as usize
    }
}

/// Builds the complete optimization problem of `template` over `horizon` steps of `dt` hours.
///
/// With `ic = None` the initialization variant is built: initial-condition
/// rows are left out so that a relaxed solve can propose a starting state.
pub fn build_problem(
    name: &str,
    template: &ProblemTemplate,
    sys: &SystemModel,
    horizon: usize,
    dt: f64,
    ic: Option<&InitialConditions>,
) -> Result<BuiltProblem> {
    if horizon == 0 || !(dt > 0.0) {
        return Err(Error::Build("horizon and resolution must be positive".into()));
    }
    template.check_coverage(sys)?;
    if let Some(ic) = ic {
        if template.formulation(ComponentType::ThermalStandard).is_some() {
            if let Some(g) = sys.thermal_gens.iter().find(|g| !ic.thermal.contains_key(&g.name)) {
                return Err(Error::MissingInitialCondition(g.name.clone()));
            }
        }
        if let Some(s) = sys.storage.iter().find(|s| !ic.storage.contains_key(&s.name)) {
            return Err(Error::MissingInitialCondition(s.name.clone()));
        }
    }
    let mut ctx = Ctx {
        c: OptContainer::new(name),
        sys,
        template,
        horizon,
        dt,
        ic,
        warnings: Vec::new(),
        injections: alloc::vec![Vec::new(); horizon],
        withdrawals: alloc::vec![Vec::new(); horizon],
    };

    // arguments
    if let Some(f) = ctx.has(ComponentType::ThermalStandard) {
        thermal::add_variables(&mut ctx, f)?;
    }
    if ctx.has(ComponentType::RenewableDispatch).is_some() {
        renewable::add_renewable_variables(&mut ctx)?;
    }
    if ctx.has(ComponentType::PowerLoad).is_some() {
        renewable::add_load_withdrawals(&mut ctx)?;
    }
    if ctx.has(ComponentType::EnergyReservoirStorage).is_some() {
        storage::add_variables(&mut ctx)?;
    }
    for r in &sys.reserves {
        if template.services.contains_key(&r.name) {
            reserve::add_variables(&mut ctx, r)?;
        }
    }

    // network
    match template.network {
        NetworkFormulation::CopperPlate => network::add_copperplate(&mut ctx)?,
        NetworkFormulation::PTDFDCPower => {
            let ptdf = compute_ptdf(sys, sys.slack_bus())?;
            network::add_copperplate(&mut ctx)?;
            network::add_ptdf_limits(&mut ctx, &ptdf)?;
        }
    }

    // device and service constraints
    if let Some(f) = ctx.has(ComponentType::ThermalStandard) {
        thermal::add_constraints(&mut ctx, f)?;
    }
    if ctx.has(ComponentType::RenewableDispatch).is_some() {
        renewable::add_renewable_constraints(&mut ctx)?;
    }
    if ctx.has(ComponentType::EnergyReservoirStorage).is_some() {
        storage::add_constraints(&mut ctx)?;
    }
    for r in &sys.reserves {
        if template.services.contains_key(&r.name) {
            reserve::add_constraints(&mut ctx, r)?;
        }
    }

    // objective
    if let Some(f) = ctx.has(ComponentType::ThermalStandard) {
        thermal::add_objective(&mut ctx, f)?;
    }
    if ctx.has(ComponentType::RenewableDispatch).is_some() {
        renewable::add_renewable_objective(&mut ctx)?;
    }
    network::add_slack_objective(&mut ctx)?;

    let Ctx { mut c, warnings, .. } = ctx;
    if let Some(ic) = ic {
        apply_initial_conditions(&mut c, sys, ic, dt)?;
    }
    let sanity = c.sanity_check();
    if let Some(f) = sanity.fatal().next() {
        return Err(Error::FatalSanity(format!("{f}")));
    }
    Ok(BuiltProblem { container: c, sanity, warnings })
}

/// Value every initial-condition parameter of `c` takes under `ic`.
pub fn initial_condition_values(
    c: &OptContainer,
    sys: &SystemModel,
    ic: &InitialConditions,
    dt: f64,
) -> Result<Vec<(ParamKey, f64)>> {
    let mut out = Vec::new();
    for p in c.params() {
        let k = &p.key;
        if !k.kind.is_initial_condition() {
            continue;
        }
        let v = match k.kind {
            ParamKind::InitialSoC => *ic
                .storage
                .get(&k.component)
                .ok_or_else(|| Error::MissingInitialCondition(k.component.clone()))?,
            _ => {
                let g = ic
                    .thermal
                    .get(&k.component)
                    .ok_or_else(|| Error::MissingInitialCondition(k.component.clone()))?;
                let gen = sys
                    .thermal(&k.component)
                    .ok_or_else(|| Error::DanglingReference(k.component.clone()))?;
                match k.kind {
                    ParamKind::InitialPower => g.power,
                    ParamKind::InitialOnStatus => g.on,
                    ParamKind::InitialMustRun => {
                        let rest = steps_for(gen.min_up as f64 - g.duration, dt);
                        if g.on > 0.5 && k.time <= rest { 1.0 } else { 0.0 }
                    }
                    ParamKind::InitialMustStayOff => {
                        let rest = steps_for(gen.min_dn as f64 - g.duration, dt);
                        if g.on < 0.5 && k.time <= rest { 1.0 } else { 0.0 }
                    }
                    _ => unreachable!("initial-condition kinds only"),
                }
            }
        };
        out.push((k.clone(), v));
    }
    Ok(out)
}

/// Pushes `ic` into the initial-condition parameters of `c`.
pub fn apply_initial_conditions(
    c: &mut OptContainer,
    sys: &SystemModel,
    ic: &InitialConditions,
    dt: f64,
) -> Result<()> {
    for (k, v) in initial_condition_values(c, sys, ic, dt)? {
        c.update_parameter(&k, v)?;
    }
    Ok(())
}

/// `(component, label)` of the series feeding a forecast-driven parameter.
pub fn series_of(sys: &SystemModel, key: &ParamKey) -> Option<(String, String)> {
    match key.kind {
        ParamKind::ForecastBound => Some((key.component.clone(), POWER_LABEL.to_string())),
        ParamKind::RequirementRhs => sys
            .reserves
            .iter()
            .find(|r| r.name == key.component)
            .map(|r| (r.name.clone(), r.requirement_series_name.clone())),
        _ => None,
    }
}

/// Name of the balance row at step `t`.
pub fn balance_row(t: usize) -> String {
    format!("balance_{t}")
}

#[cfg(test)]
mod tests;
