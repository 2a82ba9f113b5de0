//! Writes the 5-bus, three-day test case: descriptor, forecast and actual
//! CSVs, and a UC → ED → emulator configuration.
//!
//! ```text
//! cargo run -p opsim --example gen_5bus -- data/5bus
//! ```

use std::path::{Path, PathBuf};

use opsim::config::{EmulatorConfig, ModelConfig, SimulationConfig, SpanConfig};
use opsim::input::{format_time, Descriptor, ForecastFile, RealizationFile, TimeSeriesManifest};
use opsim_core::engine::FailurePolicy;
use opsim_core::feedforward::{FeedforwardKind, FeedforwardSpec};
use opsim_core::formulations::{DeviceFormulation, NetworkFormulation, ProblemTemplate, ServiceFormulation};
use opsim_core::opt::VarKind;
use opsim_core::sequence::Chronology;
use opsim_core::solver::SolverOptions;
use opsim_core::store::{Backend, StoreConfig};
use opsim_core::system::*;
use opsim_core::time::{Duration, Timestamp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DAYS: usize = 3;
const HORIZON: usize = 48;
const SEED: u64 = 5;

fn bus(name: &str, slack: bool) -> Bus {
    Bus { name: name.into(), base_voltage: 230.0, bus_type: if slack { BusType::Slack } else { BusType::Pq } }
}

fn line(name: &str, a: &str, b: &str, x: f64) -> Line {
    Line { name: name.into(), from_bus: a.into(), to_bus: b.into(), reactance: x, rating: 1000.0 }
}

#[allow(clippy::too_many_arguments)]
fn thermal(name: &str, bus: &str, p_min: f64, p_max: f64, ramp: f64, up_dn: u32, cost: f64, no_load: f64, start: f64) -> ThermalGen {
    ThermalGen {
        name: name.into(),
        bus: bus.into(),
        p_min,
        p_max,
        ramp_up: ramp,
        ramp_dn: ramp,
        min_up: up_dn,
        min_dn: up_dn,
        variable_cost: CostCurve::Linear(cost),
        no_load_cost: no_load,
        startup_cost: start,
        initial: None,
    }
}

pub fn system() -> SystemData {
    SystemData {
        base_power: 100.0,
        buses: vec![bus("A", true), bus("B", false), bus("C", false), bus("D", false), bus("E", false)],
        lines: vec![
            line("A-B", "A", "B", 0.0281),
            line("A-D", "A", "D", 0.0304),
            line("A-E", "A", "E", 0.0064),
            line("B-C", "B", "C", 0.0108),
            line("C-D", "C", "D", 0.0297),
            line("D-E", "D", "E", 0.0297),
        ],
        thermal_gens: vec![
            thermal("Alta", "A", 8.0, 40.0, 40.0, 1, 14.0, 20.0, 50.0),
            thermal("ParkCity", "A", 34.0, 170.0, 170.0, 2, 15.0, 80.0, 300.0),
            thermal("Solitude", "C", 104.0, 520.0, 520.0, 4, 30.0, 300.0, 1500.0),
            thermal("Sundance", "D", 40.0, 200.0, 200.0, 2, 40.0, 100.0, 400.0),
            // the one unit whose ramp can bind within an hour
            thermal("Brighton", "E", 150.0, 600.0, 250.0, 6, 10.0, 400.0, 3000.0),
        ],
        renewable_gens: vec![RenewableGen { name: "Wind".into(), bus: "B".into(), rating: 200.0, curtailment_cost: 0.0 }],
        loads: vec![
            Load { name: "LoadB".into(), bus: "B".into(), peak: 300.0 },
            Load { name: "LoadC".into(), bus: "C".into(), peak: 300.0 },
            Load { name: "LoadD".into(), bus: "D".into(), peak: 400.0 },
        ],
        storage: vec![Storage {
            name: "Battery".into(),
            bus: "C".into(),
            energy_cap: 200.0,
            p_charge_max: 50.0,
            p_discharge_max: 50.0,
            eff_charge: 0.95,
            eff_discharge: 0.9,
            initial_soc: Some(100.0),
        }],
        reserves: vec![ReserveProduct {
            name: "Spin".into(),
            direction: ReserveDirection::Up,
            contributing_devices: vec!["ParkCity".into(), "Solitude".into(), "Sundance".into(), "Brighton".into()],
            requirement_series_name: "requirement".into(),
        }],
    }
}

fn daily_shape(hour: usize) -> f64 {
    let h = (hour % 24) as f64;
    let evening = (-((h - 18.0) / 3.5).powi(2)).exp();
    let morning = (-((h - 8.0) / 2.5).powi(2)).exp();
    0.55 + 0.3 * evening + 0.15 * morning
}

struct Series {
    names: Vec<String>,
    /// `[component][hour]`
    actual: Vec<Vec<f64>>,
}

fn actuals(rng: &mut ChaCha8Rng, hours: usize) -> (Series, Series) {
    let mut loads = Vec::new();
    for k in 0..3 {
        let scale = 1.0 - 0.03 * k as f64;
        loads.push((0..hours).map(|h| scale * daily_shape(h) * (1.0 + rng.gen_range(-0.02..0.02))).collect());
    }
    let mut w = 0.45;
    let wind = (0..hours)
        .map(|_| {
            w = (w + rng.gen_range(-0.08..0.08f64)).clamp(0.05, 0.95);
            w
        })
        .collect();
    (
        Series { names: vec!["LoadB".into(), "LoadC".into(), "LoadD".into()], actual: loads },
        Series { names: vec!["Wind".into()], actual: vec![wind] },
    )
}

/// Forecast error grows with lead time; each issue draws its own errors.
fn forecast(rng: &mut ChaCha8Rng, actual: f64, lead: usize, spread: f64, cap: f64) -> f64 {
    let sd = spread * (1.0 + lead as f64).sqrt() / (1.0 + HORIZON as f64).sqrt();
    (actual * (1.0 + rng.gen_range(-sd..sd))).clamp(0.0, cap)
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) {
    let mut w = csv::Writer::from_path(path).expect("create csv");
    w.write_record(header).unwrap();
    for r in rows {
        w.write_record(r).unwrap();
    }
    w.flush().unwrap();
}

fn num(v: f64) -> String {
    format!("{v:.6}")
}

fn uc_template() -> ProblemTemplate {
    let mut t = ProblemTemplate::new(NetworkFormulation::CopperPlate)
        .device(ComponentType::ThermalStandard, DeviceFormulation::ThermalStandardUnitCommitment)
        .device(ComponentType::RenewableDispatch, DeviceFormulation::RenewableFullDispatch)
        .device(ComponentType::PowerLoad, DeviceFormulation::StaticPowerLoad)
        .device(ComponentType::EnergyReservoirStorage, DeviceFormulation::StorageBasicDispatch)
        .service("Spin", ServiceFormulation::RangeReserve);
    t.balance_slack_penalty = Some(1e5);
    t
}

pub fn dispatch_template() -> ProblemTemplate {
    let mut t = ProblemTemplate::new(NetworkFormulation::CopperPlate)
        .device(ComponentType::ThermalStandard, DeviceFormulation::ThermalBasicDispatch)
        .device(ComponentType::RenewableDispatch, DeviceFormulation::RenewableFullDispatch)
        .device(ComponentType::PowerLoad, DeviceFormulation::StaticPowerLoad)
        .device(ComponentType::EnergyReservoirStorage, DeviceFormulation::StorageBasicDispatch);
    t.balance_slack_penalty = Some(1e5);
    t
}

fn feedforwards(thermals: &[String]) -> Vec<FeedforwardSpec> {
    let mut out = Vec::new();
    for target in ["ED", "Emulator"] {
        out.push(FeedforwardSpec {
            kind: FeedforwardKind::SemiContinuous,
            source: "UC".into(),
            source_variable: VarKind::OnStatus,
            target: target.into(),
            target_variable: VarKind::ActivePower,
            components: thermals.to_vec(),
            penalty: None,
        });
    }
    out.push(FeedforwardSpec {
        kind: FeedforwardKind::EnergyTarget,
        source: "UC".into(),
        source_variable: VarKind::SoC,
        target: "ED".into(),
        target_variable: VarKind::SoC,
        components: vec!["Battery".into()],
        penalty: Some(1000.0),
    });
    out
}

pub fn config(sys: &SystemData) -> SimulationConfig {
    let thermals: Vec<String> = sys.thermal_gens.iter().map(|g| g.name.clone()).collect();
    SimulationConfig {
        name: "5bus-uc-ed".into(),
        system: "system.json".into(),
        models: vec![
            ModelConfig {
                name: "UC".into(),
                template: uc_template(),
                horizon_steps: HORIZON,
                resolution_minutes: 60,
                interval_minutes: 24 * 60,
                solver: SolverOptions { mip_gap: 1e-4, ..SolverOptions::default() },
                chronology: None,
            },
            ModelConfig {
                name: "ED".into(),
                template: dispatch_template(),
                horizon_steps: 2,
                resolution_minutes: 60,
                interval_minutes: 60,
                solver: SolverOptions::default(),
                chronology: None,
            },
        ],
        emulator: Some(EmulatorConfig {
            name: "Emulator".into(),
            template: dispatch_template(),
            resolution_minutes: 60,
            solver: SolverOptions::default(),
        }),
        feedforwards: feedforwards(&thermals),
        chronology: Chronology::InterProblem,
        span: SpanConfig { start: "2024-01-01T00:00:00".into(), steps: DAYS },
        store: StoreConfig { backend: Backend::File, ..StoreConfig::default() },
        failure_policy: FailurePolicy::Halt,
        output: None,
    }
}

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data/5bus".into()));
    std::fs::create_dir_all(&dir).expect("output dir");
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let start = Timestamp::from_civil(2024, 1, 1, 0, 0, 0);
    let hours = DAYS * 24 + HORIZON;
    let issues = DAYS * 24;
    let (loads, wind) = actuals(&mut rng, hours);
    let sys = system();
    let peaks: Vec<f64> = sys.loads.iter().map(|l| l.peak).collect();

    let mut header = vec!["timestamp".to_string()];
    header.extend(loads.names.iter().cloned());
    header.extend(wind.names.iter().cloned());
    let rows: Vec<Vec<String>> = (0..hours)
        .map(|h| {
            let mut r = vec![format_time(start + Duration::hours(h as i64))];
            r.extend(loads.actual.iter().map(|s| num(s[h])));
            r.extend(wind.actual.iter().map(|s| num(s[h])));
            r
        })
        .collect();
    write_csv(&dir.join("actuals.csv"), &header, &rows);

    let mut fheader = vec!["issue_time".to_string()];
    fheader.extend(header.iter().cloned());
    let mut frows = Vec::new();
    let mut rrows = Vec::new();
    for i in 0..issues {
        let issue = start + Duration::hours(i as i64);
        for k in 0..HORIZON {
            let h = i + k;
            let mut r = vec![format_time(issue), format_time(issue + Duration::hours(k as i64))];
            let mut demand = 0.0;
            for (s, peak) in loads.actual.iter().zip(&peaks) {
                let v = forecast(&mut rng, s[h], k, 0.04, 1.5);
                demand += v * peak;
                r.push(num(v));
            }
            for s in &wind.actual {
                r.push(num(forecast(&mut rng, s[h], k, 0.25, 1.0)));
            }
            frows.push(r);
            rrows.push(vec![format_time(issue), format_time(issue + Duration::hours(k as i64)), num(0.06 * demand)]);
        }
    }
    write_csv(&dir.join("forecasts.csv"), &fheader, &frows);
    write_csv(&dir.join("reserve_forecasts.csv"), &["issue_time".into(), "timestamp".into(), "Spin".into()], &rrows);

    let descriptor = Descriptor {
        data: sys.clone(),
        time_series: TimeSeriesManifest {
            forecasts: vec![
                ForecastFile {
                    file: "forecasts.csv".into(),
                    label: "max_active_power".into(),
                    resolution_minutes: 60,
                    issue_interval_minutes: 60,
                    horizon_steps: HORIZON,
                },
                ForecastFile {
                    file: "reserve_forecasts.csv".into(),
                    label: "requirement".into(),
                    resolution_minutes: 60,
                    issue_interval_minutes: 60,
                    horizon_steps: HORIZON,
                },
            ],
            realizations: vec![RealizationFile {
                file: "actuals.csv".into(),
                label: "max_active_power".into(),
                resolution_minutes: 60,
            }],
        },
    };
    std::fs::write(dir.join("system.json"), serde_json::to_string_pretty(&descriptor).unwrap() + "\n").unwrap();
    std::fs::write(dir.join("config.json"), config(&sys).to_json()).unwrap();
    println!("wrote {}", dir.display());
}
