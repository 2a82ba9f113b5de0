//! Static grid data and attached time series.
//!
//! Component structs are authored in natural units (MW, MWh, MW/h). Once a
//! [`SystemModel`] is assembled every power and energy quantity is held
//! per-unit on `base_power`; costs stay in $ units. Load and renewable series
//! are normalized to the device peak/rating, reserve requirements are MW in
//! input and per-unit inside the model.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::{Duration, Timestamp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BusType {
    Slack,
    Pq,
    Pv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub name: String,
    #[serde(default)]
    pub base_voltage: f64,
    pub bus_type: BusType,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub name: String,
    pub from_bus: String,
    pub to_bus: String,
    /// Series reactance, per-unit.
    pub reactance: f64,
    pub rating: f64,
}

/// Variable energy cost of a thermal unit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostCurve {
    /// $/MWh.
    Linear(f64),
    /// Convex piecewise-linear `(MW, $/h)` breakpoints.
    Pwl(Vec<(f64, f64)>),
}

impl CostCurve {
    /// `(slope, intercept)` of each segment, slope in $/h per power unit.
    pub fn segments(&self) -> Vec<(f64, f64)> {
        match self {
            CostCurve::Linear(c) => alloc::vec![(*c, 0.0)],
            CostCurve::Pwl(pts) => pts
                .windows(2)
                .map(|w| {
                    let s = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
                    (s, w[0].1 - s * w[0].0)
                })
                .collect(),
        }
    }

    fn scale_power(&mut self, factor: f64) {
        match self {
            // $/MWh -> $/h per power unit
            CostCurve::Linear(c) => *c /= factor,
            CostCurve::Pwl(pts) => pts.iter_mut().for_each(|p| p.0 *= factor),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalInitial {
    pub on: bool,
    pub power: f64,
    /// Hours already spent in the current on/off status (>= 1).
    pub duration: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalGen {
    pub name: String,
    pub bus: String,
    pub p_min: f64,
    pub p_max: f64,
    /// Per hour.
    pub ramp_up: f64,
    pub ramp_dn: f64,
    #[serde(default)]
    pub min_up: u32,
    #[serde(default)]
    pub min_dn: u32,
    pub variable_cost: CostCurve,
    #[serde(default)]
    pub no_load_cost: f64,
    #[serde(default)]
    pub startup_cost: f64,
    #[serde(default)]
    pub initial: Option<ThermalInitial>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenewableGen {
    pub name: String,
    pub bus: String,
    pub rating: f64,
    #[serde(default)]
    pub curtailment_cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Load {
    pub name: String,
    pub bus: String,
    pub peak: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Storage {
    pub name: String,
    pub bus: String,
    pub energy_cap: f64,
    pub p_charge_max: f64,
    pub p_discharge_max: f64,
    pub eff_charge: f64,
    pub eff_discharge: f64,
    #[serde(default)]
    pub initial_soc: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReserveDirection {
    Up,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReserveProduct {
    pub name: String,
    pub direction: ReserveDirection,
    pub contributing_devices: Vec<String>,
    pub requirement_series_name: String,
}

/// Component classes a template must cover.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ComponentType {
    ThermalStandard,
    RenewableDispatch,
    PowerLoad,
    EnergyReservoirStorage,
}

impl ComponentType {
    pub fn as_str(self) -> &'static str {
        match self {
            ComponentType::ThermalStandard => "ThermalStandard",
            ComponentType::RenewableDispatch => "RenewableDispatch",
            ComponentType::PowerLoad => "PowerLoad",
            ComponentType::EnergyReservoirStorage => "EnergyReservoirStorage",
        }
    }
}

/// Look-ahead data keyed by issue time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub component: String,
    pub label: String,
    pub resolution: Duration,
    pub issue_interval: Duration,
    pub horizon_steps: usize,
    pub windows: BTreeMap<Timestamp, Vec<f64>>,
}

impl Forecast {
    pub fn first_issue(&self) -> Option<Timestamp> {
        self.windows.keys().next().copied()
    }

    pub fn last_issue(&self) -> Option<Timestamp> {
        self.windows.keys().next_back().copied()
    }

    fn validate(&self) -> Result<()> {
        let id = format!("{}/{}", self.component, self.label);
        if !self.resolution.is_positive() || !self.issue_interval.is_positive() {
            return Err(Error::Schema(format!("forecast {id}: non-positive resolution or interval")));
        }
        let mut prev: Option<Timestamp> = None;
        for (t, w) in &self.windows {
            if w.len() != self.horizon_steps {
                return Err(Error::Invariant(format!(
                    "forecast {id} window at {t} has {} values, expected {}",
                    w.len(),
                    self.horizon_steps
                )));
            }
            if w.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("forecast {id} window at {t}")));
            }
            if let Some(p) = prev {
                if *t - p != self.issue_interval {
                    return Err(Error::Invariant(format!(
                        "forecast {id} issue times not spaced by {}",
                        self.issue_interval
                    )));
                }
            }
            prev = Some(*t);
        }
        Ok(())
    }
}

/// Realized values along a single timeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizationSeries {
    pub component: String,
    pub label: String,
    pub resolution: Duration,
    pub start: Timestamp,
    pub values: Vec<f64>,
}

impl RealizationSeries {
    pub fn end(&self) -> Timestamp {
        self.start + self.resolution.times(self.values.len() as i64)
    }

    pub fn value_at(&self, at: Timestamp) -> Result<f64> {
        if at < self.start || at >= self.end() {
            return Err(Error::OutOfRange(at));
        }
        let idx = at
            .steps_from(self.start, self.resolution)
            .ok_or(Error::OffGridTimestamp(at))?;
        Ok(self.values[idx])
    }
}

/// Every component collection in natural units, as authored in a descriptor.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SystemData {
    pub base_power: f64,
    #[serde(default)]
    pub buses: Vec<Bus>,
    #[serde(default)]
    pub lines: Vec<Line>,
    #[serde(default)]
    pub thermal_gens: Vec<ThermalGen>,
    #[serde(default)]
    pub renewable_gens: Vec<RenewableGen>,
    #[serde(default)]
    pub loads: Vec<Load>,
    #[serde(default)]
    pub storage: Vec<Storage>,
    #[serde(default)]
    pub reserves: Vec<ReserveProduct>,
}

impl SystemData {
    /// Multiplies every power/energy quantity by `factor` (1/base to go per-unit).
    pub fn scale_power(&mut self, factor: f64) {
        for l in &mut self.lines {
            l.rating *= factor;
        }
        for g in &mut self.thermal_gens {
            g.p_min *= factor;
            g.p_max *= factor;
            g.ramp_up *= factor;
            g.ramp_dn *= factor;
            g.variable_cost.scale_power(factor);
            if let Some(init) = &mut g.initial {
                init.power *= factor;
            }
        }
        for r in &mut self.renewable_gens {
            r.rating *= factor;
        }
        for l in &mut self.loads {
            l.peak *= factor;
        }
        for s in &mut self.storage {
            s.energy_cap *= factor;
            s.p_charge_max *= factor;
            s.p_discharge_max *= factor;
            if let Some(soc) = &mut s.initial_soc {
                *soc *= factor;
            }
        }
    }
}

type SeriesKey = (String, String);

#[derive(Debug, Default)]
struct WindowCache {
    capacity: usize,
    order: VecDeque<(SeriesKey, Duration, Timestamp, usize)>,
    entries: BTreeMap<(SeriesKey, Duration, Timestamp, usize), Vec<f64>>,
    hits: u64,
    misses: u64,
}

/// Cache hit/miss counters of the forecast read path.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
}

impl CacheStats {
    pub fn reads(&self) -> u64 {
        self.hits + self.misses
    }
}

/// Validated system with per-unit component data and time series.
#[derive(Debug)]
pub struct SystemModel {
    pub base_power: f64,
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    pub thermal_gens: Vec<ThermalGen>,
    pub renewable_gens: Vec<RenewableGen>,
    pub loads: Vec<Load>,
    pub storage: Vec<Storage>,
    pub reserves: Vec<ReserveProduct>,
    forecasts: BTreeMap<(SeriesKey, Duration), Forecast>,
    realizations: BTreeMap<SeriesKey, RealizationSeries>,
    cache: RefCell<WindowCache>,
}

impl PartialEq for SystemModel {
    fn eq(&self, other: &Self) -> bool {
        self.base_power == other.base_power
            && self.buses == other.buses
            && self.lines == other.lines
            && self.thermal_gens == other.thermal_gens
            && self.renewable_gens == other.renewable_gens
            && self.loads == other.loads
            && self.storage == other.storage
            && self.reserves == other.reserves
            && self.forecasts == other.forecasts
            && self.realizations == other.realizations
    }
}

pub const DEFAULT_FORECAST_CACHE: usize = 256;

impl SystemModel {
    /// Validates natural-unit data and series, then converts to per-unit.
    pub fn new(
        data: SystemData,
        forecasts: Vec<Forecast>,
        realizations: Vec<RealizationSeries>,
    ) -> Result<Self> {
        validate_components(&data)?;
        let base = data.base_power;
        let mut pu = data;
        pu.scale_power(1.0 / base);

        let mut sys = SystemModel {
            base_power: base,
            buses: pu.buses,
            lines: pu.lines,
            thermal_gens: pu.thermal_gens,
            renewable_gens: pu.renewable_gens,
            loads: pu.loads,
            storage: pu.storage,
            reserves: pu.reserves,
            forecasts: BTreeMap::new(),
            realizations: BTreeMap::new(),
            cache: RefCell::new(WindowCache {
                capacity: DEFAULT_FORECAST_CACHE,
                ..Default::default()
            }),
        };
        for mut f in forecasts {
            f.validate()?;
            sys.check_series_component(&f.component)?;
            if sys.is_reserve(&f.component) {
                f.windows.values_mut().flatten().for_each(|v| *v /= base);
            }
            let key = ((f.component.clone(), f.label.clone()), f.resolution);
            if sys.forecasts.contains_key(&key) {
                return Err(Error::DuplicateName(format!(
                    "forecast {}/{} at {}",
                    f.component, f.label, f.resolution
                )));
            }
            sys.forecasts.insert(key, f);
        }
        for mut r in realizations {
            if r.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("realization {}/{}", r.component, r.label)));
            }
            if !r.resolution.is_positive() {
                return Err(Error::Schema(format!(
                    "realization {}/{}: non-positive resolution",
                    r.component, r.label
                )));
            }
            sys.check_series_component(&r.component)?;
            if sys.is_reserve(&r.component) {
                r.values.iter_mut().for_each(|v| *v /= base);
            }
            let key = (r.component.clone(), r.label.clone());
            if sys.realizations.contains_key(&key) {
                return Err(Error::DuplicateName(format!(
                    "realization {}/{}",
                    r.component, r.label
                )));
            }
            sys.realizations.insert(key, r);
        }
        for res in &sys.reserves {
            let attached = sys
                .forecasts
                .keys()
                .any(|((c, l), _)| c == &res.name && l == &res.requirement_series_name)
                || sys
                    .realizations
                    .contains_key(&(res.name.clone(), res.requirement_series_name.clone()));
            if !attached {
                return Err(Error::Invariant(format!(
                    "reserve {} has no requirement series `{}` attached",
                    res.name, res.requirement_series_name
                )));
            }
        }
        Ok(sys)
    }

    /// Component data converted back to natural units.
    pub fn to_natural(&self) -> SystemData {
        let mut d = SystemData {
            base_power: self.base_power,
            buses: self.buses.clone(),
            lines: self.lines.clone(),
            thermal_gens: self.thermal_gens.clone(),
            renewable_gens: self.renewable_gens.clone(),
            loads: self.loads.clone(),
            storage: self.storage.clone(),
            reserves: self.reserves.clone(),
        };
        d.scale_power(self.base_power);
        d
    }

    fn is_reserve(&self, name: &str) -> bool {
        self.reserves.iter().any(|r| r.name == name)
    }

    fn check_series_component(&self, name: &str) -> Result<()> {
        if self.has_component(name) {
            Ok(())
        } else {
            Err(Error::DanglingReference(format!(
                "time series references unknown component `{name}`"
            )))
        }
    }

    pub fn has_component(&self, name: &str) -> bool {
        self.thermal_gens.iter().any(|c| c.name == name)
            || self.renewable_gens.iter().any(|c| c.name == name)
            || self.loads.iter().any(|c| c.name == name)
            || self.storage.iter().any(|c| c.name == name)
            || self.reserves.iter().any(|c| c.name == name)
            || self.buses.iter().any(|c| c.name == name)
            || self.lines.iter().any(|c| c.name == name)
    }

    /// Component types with at least one member.
    pub fn component_types(&self) -> Vec<ComponentType> {
        let mut v = Vec::new();
        if !self.thermal_gens.is_empty() {
            v.push(ComponentType::ThermalStandard);
        }
        if !self.renewable_gens.is_empty() {
            v.push(ComponentType::RenewableDispatch);
        }
        if !self.loads.is_empty() {
            v.push(ComponentType::PowerLoad);
        }
        if !self.storage.is_empty() {
            v.push(ComponentType::EnergyReservoirStorage);
        }
        v
    }

    pub fn thermal(&self, name: &str) -> Option<&ThermalGen> {
        self.thermal_gens.iter().find(|g| g.name == name)
    }

    pub fn storage_unit(&self, name: &str) -> Option<&Storage> {
        self.storage.iter().find(|s| s.name == name)
    }

    pub fn bus_index(&self, name: &str) -> Option<usize> {
        self.buses.iter().position(|b| b.name == name)
    }

    pub fn slack_bus(&self) -> usize {
        self.buses
            .iter()
            .position(|b| b.bus_type == BusType::Slack)
            .unwrap_or(0)
    }

    pub fn forecast(&self, component: &str, label: &str, resolution: Duration) -> Option<&Forecast> {
        self.forecasts
            .get(&((component.to_string(), label.to_string()), resolution))
    }

    pub fn forecasts(&self) -> impl Iterator<Item = &Forecast> {
        self.forecasts.values()
    }

    pub fn realization(&self, component: &str, label: &str) -> Option<&RealizationSeries> {
        self.realizations
            .get(&(component.to_string(), label.to_string()))
    }

    pub fn realizations(&self) -> impl Iterator<Item = &RealizationSeries> {
        self.realizations.values()
    }

    /// First `horizon_steps` values of the window issued at `issue_time`.
    ///
    /// Served from a bounded LRU cache after the first read.
    pub fn get_forecast_window(
        &self,
        component: &str,
        label: &str,
        resolution: Duration,
        issue_time: Timestamp,
        horizon_steps: usize,
    ) -> Result<Vec<f64>> {
        let skey = (component.to_string(), label.to_string());
        let ckey = (skey.clone(), resolution, issue_time, horizon_steps);
        {
            let mut cache = self.cache.borrow_mut();
            if let Some(v) = cache.entries.get(&ckey).cloned() {
                cache.hits += 1;
                if let Some(pos) = cache.order.iter().position(|k| k == &ckey) {
                    let k = cache.order.remove(pos).unwrap();
                    cache.order.push_back(k);
                }
                return Ok(v);
            }
        }
        let id = format!("{component}/{label} at {resolution}");
        let f = self
            .forecasts
            .get(&(skey, resolution))
            .ok_or_else(|| Error::NoForecast(id.clone()))?;
        let w = f
            .windows
            .get(&issue_time)
            .ok_or(Error::IssueTimeNotFound { series: id, time: issue_time })?;
        if horizon_steps > w.len() {
            return Err(Error::HorizonOverrun { requested: horizon_steps, stored: w.len() });
        }
        let out = w[..horizon_steps].to_vec();
        let mut cache = self.cache.borrow_mut();
        cache.misses += 1;
        if cache.capacity > 0 {
            if cache.order.len() >= cache.capacity {
                if let Some(old) = cache.order.pop_front() {
                    cache.entries.remove(&old);
                }
            }
            cache.order.push_back(ckey.clone());
            cache.entries.insert(ckey, out.clone());
        }
        Ok(out)
    }

    /// Exact stored realization value at `at`; no interpolation.
    pub fn get_realization(&self, component: &str, label: &str, at: Timestamp) -> Result<f64> {
        self.realization(component, label)
            .ok_or_else(|| Error::NoSeries(format!("{component}/{label}")))?
            .value_at(at)
    }

    pub fn forecast_cache_stats(&self) -> CacheStats {
        let c = self.cache.borrow();
        CacheStats { hits: c.hits, misses: c.misses }
    }

    pub fn set_forecast_cache_capacity(&self, capacity: usize) {
        let mut c = self.cache.borrow_mut();
        c.capacity = capacity;
        while c.order.len() > capacity {
            if let Some(old) = c.order.pop_front() {
                c.entries.remove(&old);
            }
        }
    }
}

fn validate_components(d: &SystemData) -> Result<()> {
    if !(d.base_power > 0.0) || !d.base_power.is_finite() {
        return Err(Error::Schema("base_power must be > 0".into()));
    }
    let mut names = BTreeSet::new();
    let all_names = d
        .buses
        .iter()
        .map(|c| &c.name)
        .chain(d.lines.iter().map(|c| &c.name))
        .chain(d.thermal_gens.iter().map(|c| &c.name))
        .chain(d.renewable_gens.iter().map(|c| &c.name))
        .chain(d.loads.iter().map(|c| &c.name))
        .chain(d.storage.iter().map(|c| &c.name))
        .chain(d.reserves.iter().map(|c| &c.name));
    for n in all_names {
        if n.is_empty() {
            return Err(Error::Schema("empty component name".into()));
        }
        if !names.insert(n.as_str()) {
            return Err(Error::DuplicateName(n.clone()));
        }
    }
    let slacks = d.buses.iter().filter(|b| b.bus_type == BusType::Slack).count();
    if slacks != 1 {
        return Err(Error::Invariant(format!("expected exactly one slack bus, found {slacks}")));
    }
    let bus_names: BTreeSet<&str> = d.buses.iter().map(|b| b.name.as_str()).collect();
    let check_bus = |owner: &str, bus: &str| -> Result<()> {
        if bus_names.contains(bus) {
            Ok(())
        } else {
            Err(Error::DanglingReference(format!("{owner} references unknown bus `{bus}`")))
        }
    };
    let pos = |what: &str, v: f64| -> Result<()> {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::Invariant(format!("{what} must be > 0")))
        }
    };
    let nonneg = |what: &str, v: f64| -> Result<()> {
        if v >= 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::Invariant(format!("{what} must be >= 0")))
        }
    };

    for l in &d.lines {
        check_bus(&l.name, &l.from_bus)?;
        check_bus(&l.name, &l.to_bus)?;
        if l.from_bus == l.to_bus {
            return Err(Error::SelfLoopLine(l.name.clone()));
        }
        pos(&format!("line {} reactance", l.name), l.reactance)?;
        nonneg(&format!("line {} rating", l.name), l.rating)?;
    }
    for g in &d.thermal_gens {
        check_bus(&g.name, &g.bus)?;
        nonneg(&format!("{} p_min", g.name), g.p_min)?;
        if !(g.p_min <= g.p_max) || !g.p_max.is_finite() {
            return Err(Error::Invariant(format!("{}: p_min <= p_max violated", g.name)));
        }
        pos(&format!("{} ramp_up", g.name), g.ramp_up)?;
        pos(&format!("{} ramp_dn", g.name), g.ramp_dn)?;
        nonneg(&format!("{} no_load_cost", g.name), g.no_load_cost)?;
        nonneg(&format!("{} startup_cost", g.name), g.startup_cost)?;
        match &g.variable_cost {
            CostCurve::Linear(c) => nonneg(&format!("{} variable_cost", g.name), *c)?,
            CostCurve::Pwl(pts) => {
                if pts.len() < 2 {
                    return Err(Error::Invariant(format!("{}: PWL cost needs >= 2 points", g.name)));
                }
                if pts.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
                    return Err(Error::NonFinite(format!("{} PWL cost", g.name)));
                }
                if pts.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(Error::Invariant(format!(
                        "{}: PWL breakpoints must be strictly increasing in MW",
                        g.name
                    )));
                }
                let slopes: Vec<f64> = g.variable_cost.segments().iter().map(|s| s.0).collect();
                if slopes.windows(2).any(|w| w[1] < w[0] - 1e-12) {
                    return Err(Error::Invariant(format!("{}: PWL slopes must be nondecreasing", g.name)));
                }
                if slopes[0] < 0.0 {
                    return Err(Error::Invariant(format!("{}: negative PWL slope", g.name)));
                }
            }
        }
        if let Some(init) = &g.initial {
            if !(init.duration >= 1.0) {
                return Err(Error::Invariant(format!("{}: initial_duration must be >= 1", g.name)));
            }
            if init.on {
                if init.power < g.p_min - 1e-9 || init.power > g.p_max + 1e-9 {
                    return Err(Error::Invariant(format!(
                        "{}: initial_power outside [p_min, p_max] while on",
                        g.name
                    )));
                }
            } else if init.power != 0.0 {
                return Err(Error::Invariant(format!("{}: initial_power must be 0 while off", g.name)));
            }
        }
    }
    for r in &d.renewable_gens {
        check_bus(&r.name, &r.bus)?;
        pos(&format!("{} rating", r.name), r.rating)?;
        nonneg(&format!("{} curtailment_cost", r.name), r.curtailment_cost)?;
    }
    for l in &d.loads {
        check_bus(&l.name, &l.bus)?;
        pos(&format!("{} peak", l.name), l.peak)?;
    }
    for s in &d.storage {
        check_bus(&s.name, &s.bus)?;
        pos(&format!("{} energy_cap", s.name), s.energy_cap)?;
        pos(&format!("{} p_charge_max", s.name), s.p_charge_max)?;
        pos(&format!("{} p_discharge_max", s.name), s.p_discharge_max)?;
        for (what, e) in [("eff_charge", s.eff_charge), ("eff_discharge", s.eff_discharge)] {
            if !(e > 0.0 && e <= 1.0) {
                return Err(Error::Invariant(format!("{} {what} must be in (0, 1]", s.name)));
            }
        }
        if let Some(soc) = s.initial_soc {
            if !(soc >= 0.0 && soc <= s.energy_cap) {
                return Err(Error::Invariant(format!("{}: initial_soc outside [0, energy_cap]", s.name)));
            }
        }
    }
    for r in &d.reserves {
        if r.contributing_devices.is_empty() {
            return Err(Error::Invariant(format!("reserve {} has no contributing devices", r.name)));
        }
        for dev in &r.contributing_devices {
            let ok = d.thermal_gens.iter().any(|g| &g.name == dev)
                || d.storage.iter().any(|s| &s.name == dev);
            if !ok {
                return Err(Error::DanglingReference(format!(
                    "reserve {} references unknown thermal/storage device `{dev}`",
                    r.name
                )));
            }
        }
    }
    Ok(())
}
