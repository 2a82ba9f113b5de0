//! Fixture loading and store helpers shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use opsim::storage::FileStorage;
use opsim::SimulationConfig;
use opsim_core::opt::VarKind;
use opsim_core::store::{ResultKey, ResultKind, ResultStore, Storage};
use opsim_core::system::{Forecast, RealizationSeries, SystemModel};
use opsim_core::time::Timestamp;

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/5bus")
}

/// The 3-day 5-bus configuration with an absolute system path.
pub fn five_bus() -> SimulationConfig {
    SimulationConfig::load(&fixture_dir().join("config.json")).expect("fixture config")
}

/// Same system, `days` long, UC horizon cut to 25 hours.
pub fn five_bus_short(days: usize) -> SimulationConfig {
    let mut cfg = five_bus();
    cfg.models[0].horizon_steps = 25;
    cfg.span.steps = days;
    cfg
}

pub fn write_config(dir: &Path, cfg: &SimulationConfig) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, cfg.to_json()).unwrap();
    path
}

/// Forecasts and realizations of `sys` back in descriptor units, ready for
/// [`SystemModel::new`] again.
pub fn natural_series(sys: &SystemModel) -> (Vec<Forecast>, Vec<RealizationSeries>) {
    let base = sys.base_power;
    let reserve = |c: &str| sys.reserves.iter().any(|r| r.name == c);
    let forecasts = sys
        .forecasts()
        .cloned()
        .map(|mut f| {
            if reserve(&f.component) {
                f.windows.values_mut().flatten().for_each(|v| *v *= base);
            }
            f
        })
        .collect();
    let realizations = sys
        .realizations()
        .cloned()
        .map(|mut r| {
            if reserve(&r.component) {
                r.values.iter_mut().for_each(|v| *v *= base);
            }
            r
        })
        .collect();
    (forecasts, realizations)
}

/// Realized rows of one key by step time, with its component names.
pub struct Realized {
    pub components: Vec<String>,
    pub rows: BTreeMap<Timestamp, Vec<f64>>,
}

impl Realized {
    pub fn col(&self, comp: &str) -> usize {
        self.components.iter().position(|c| c == comp).unwrap_or_else(|| panic!("no component {comp}"))
    }

    pub fn at(&self, t: Timestamp, comp: &str) -> f64 {
        self.rows[&t][self.col(comp)]
    }
}

pub fn realized<S: Storage>(store: &mut ResultStore<S>, model: &str, kind: ResultKind, name: &str) -> Realized {
    let key = ResultKey::new(model, kind, name);
    let components = store.layout(&key).unwrap().components.clone();
    let rows = store.realized(&key).unwrap().into_iter().collect();
    Realized { components, rows }
}

pub fn variable<S: Storage>(store: &mut ResultStore<S>, model: &str, kind: VarKind) -> Realized {
    realized(store, model, ResultKind::Variable, kind.as_str())
}

pub fn every_file(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(every_file(&p));
        } else {
            out.push(p);
        }
    }
    out.sort();
    out
}

pub fn open_file_store(path: &Path) -> ResultStore<FileStorage> {
    opsim::storage::open_store(path).unwrap()
}
