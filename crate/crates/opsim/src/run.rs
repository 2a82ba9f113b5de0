//! Running a configured simulation into an output directory.
//!
//! ```text
//! <output>/
//!   config_resolved.json
//!   containers/<model>.json      built optimization containers
//!   store/results.opsim          result store
//!   logs/simulation.log          progress and per-solve statistics
//!   status.json
//!   diagnostics/                 only after a failed solve
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use opsim_core::engine::{SimulationObserver, SimulationStatus, SolveEvent, Simulation};
use opsim_core::formulations::InitialConditions;
use opsim_core::opt::OptContainer;
use opsim_core::sequence::{validate_sequence, Layer, SimulationState, ValidationReport};
use opsim_core::store::{Backend, MemoryStorage, ResultStore, Storage};
use opsim_core::time::Timestamp;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::input::{format_time, load_system};
use crate::storage::FileStorage;

pub const STORE_FILE: &str = "store/results.opsim";
pub const LOG_FILE: &str = "logs/simulation.log";
pub const RESOLVED_CONFIG: &str = "config_resolved.json";

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(d) = path.parent() {
        fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn to_json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("serializable");
    s.push(b'\n');
    s
}

fn safe(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

fn layer_json(layer: &Layer) -> Value {
    let m: serde_json::Map<String, Value> = layer
        .series
        .iter()
        .map(|((kind, comp), tr)| (format!("{}/{comp}", kind.as_str()), json!(tr.values)))
        .collect();
    Value::Object(m)
}

/// Snapshot of the simulation state; unset slots appear as `null`.
pub fn state_json(state: &SimulationState, models: &[String]) -> Value {
    let per_model: serde_json::Map<String, Value> = models
        .iter()
        .filter_map(|m| state.model_layer(m).map(|l| (m.clone(), layer_json(l))))
        .collect();
    let lookahead: serde_json::Map<String, Value> = models
        .iter()
        .filter_map(|m| state.lookahead_layer(m).map(|l| (m.clone(), layer_json(l))))
        .collect();
    json!({
        "timeline": {
            "start": format_time(state.timeline.start),
            "step_seconds": state.timeline.step.as_seconds(),
            "len": state.timeline.len,
        },
        "initial": state.initial,
        "x": layer_json(state.x()),
        "decisions": layer_json(state.decisions()),
        "per_model": per_model,
        "lookahead": lookahead,
    })
}

fn params_json(c: &OptContainer) -> Value {
    Value::Array(c.params().iter().map(|p| json!({ "key": p.key.to_string(), "value": p.value })).collect())
}

/// Observer writing progress, timing and failure diagnostics.
pub struct LoggingObserver {
    output: PathBuf,
    log: Option<fs::File>,
    started: Instant,
    solve_started: Option<Instant>,
    total: usize,
    done: usize,
    models: Vec<String>,
    pub failures: Vec<(String, Timestamp, String)>,
}

impl LoggingObserver {
    pub fn new(output: &Path) -> Result<Self> {
        let p = output.join(LOG_FILE);
        fs::create_dir_all(p.parent().expect("log dir")).map_err(|e| Error::io(&p, e))?;
        let log = fs::File::create(&p).map_err(|e| Error::io(&p, e))?;
        Ok(LoggingObserver {
            output: output.to_path_buf(),
            log: Some(log),
            started: Instant::now(),
            solve_started: None,
            total: 0,
            done: 0,
            models: Vec::new(),
            failures: Vec::new(),
        })
    }

    pub fn line(&mut self, msg: &str) {
        let line = format!("[{:9.3}s] {msg}", self.started.elapsed().as_secs_f64());
        log::info!("{line}");
        if let Some(f) = &mut self.log {
            // a failing log write must not abort the run
            let _ = writeln!(f, "{line}");
        }
    }

    fn set_plan(&mut self, total: usize, models: Vec<String>) {
        self.total = total;
        self.models = models;
    }

    fn dump(&self, name: &str, v: &Value) {
        let p = self.output.join("diagnostics").join(name);
        if let Err(e) = write_file(&p, &to_json(v)) {
            log::error!("cannot write diagnostics: {e}");
        }
    }
}

impl SimulationObserver for LoggingObserver {
    fn on_relaxed_init(&mut self, ic: &InitialConditions) {
        self.line(&format!(
            "initial conditions from relaxed solve: {} thermal, {} storage",
            ic.thermal.len(),
            ic.storage.len()
        ));
    }

    fn on_built(&mut self, model: &str, c: &OptContainer) {
        let p = self.output.join("containers").join(format!("{}.json", safe(model)));
        if let Err(e) = write_file(&p, &to_json(c)) {
            log::error!("{e}");
        }
        let s = c.structure();
        self.line(&format!(
            "built {model}: {} variables, {} constraints, {} nonzeros, {} parameters",
            s.n_vars,
            s.n_rows,
            s.nnz,
            c.params().len()
        ));
    }

    fn before_solve(&mut self, _model: &str, _t: Timestamp) {
        self.solve_started = Some(Instant::now());
    }

    fn on_solve(&mut self, ev: &SolveEvent<'_>) {
        self.done += 1;
        let wall = self.solve_started.take().map_or(0.0, |s| s.elapsed().as_secs_f64());
        let mut flags = String::new();
        if ev.relaxed {
            flags.push_str(" relaxed");
        }
        if ev.carried {
            flags.push_str(" carried");
        }
        self.line(&format!(
            "{}/{} {} @ {}: objective={:.6e} iterations={} nodes={} warm={} solve={:.3}s{flags}",
            self.done,
            self.total,
            ev.model,
            format_time(ev.issue_time),
            ev.objective,
            ev.stats.iterations,
            ev.stats.nodes,
            ev.stats.warm_started,
            wall,
        ));
    }

    fn on_failure(
        &mut self,
        model: &str,
        t: Timestamp,
        err: &opsim_core::Error,
        c: &OptContainer,
        state: &SimulationState,
    ) {
        self.solve_started = None;
        self.line(&format!("FAILED {model} @ {}: {err}", format_time(t)));
        let stem = format!("{}_{}", safe(model), safe(&format_time(t)));
        self.dump(&format!("{stem}_container.json"), &serde_json::to_value(c).expect("container serializes"));
        self.dump(&format!("{stem}_state.json"), &state_json(state, &self.models));
        self.dump(&format!("{stem}_params.json"), &params_json(c));
        self.dump(
            &format!("{stem}_error.json"),
            &json!({ "model": model, "issue_time": format_time(t), "error": err.to_string() }),
        );
        self.failures.push((model.to_string(), t, err.to_string()));
    }
}

/// What a run produced.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub output: PathBuf,
    pub status: SimulationStatus,
    pub executions: BTreeMap<String, usize>,
    pub relaxed_init: bool,
    pub carried: usize,
    pub error: Option<String>,
}

/// Loads and validates without building any model.
pub fn validate_config(cfg: &SimulationConfig) -> Result<ValidationReport> {
    let sys = load_system(&cfg.system)?;
    let seq = cfg.sequence()?;
    let span = cfg.span()?;
    cfg.store.validate()?;
    Ok(validate_sequence(&seq, &sys, &span)?)
}

enum AnyStorage {
    File(FileStorage),
    Memory(MemoryStorage),
}

impl Storage for AnyStorage {
    fn append(&mut self, bytes: &[u8]) -> opsim_core::Result<()> {
        match self {
            AnyStorage::File(s) => s.append(bytes),
            AnyStorage::Memory(s) => s.append(bytes),
        }
    }

    fn read_at(&mut self, offset: u64, len: usize) -> opsim_core::Result<Vec<u8>> {
        match self {
            AnyStorage::File(s) => s.read_at(offset, len),
            AnyStorage::Memory(s) => s.read_at(offset, len),
        }
    }

    fn len(&self) -> u64 {
        match self {
            AnyStorage::File(s) => s.len(),
            AnyStorage::Memory(s) => s.len(),
        }
    }
}

/// Runs `cfg` into `output`. Validation errors return `Err` before anything
/// is solved; solve failures return a summary with status `Failed` and leave
/// the partial store readable.
pub fn run_config(cfg: &SimulationConfig, output: &Path) -> Result<RunSummary> {
    let resolved = cfg.resolved()?;
    let system = load_system(&cfg.system)?;
    let sequence = cfg.sequence()?;
    let span = cfg.span()?;
    cfg.store.validate()?;
    validate_sequence(&sequence, &system, &span)?;

    fs::create_dir_all(output).map_err(|e| Error::io(output, e))?;
    let output = fs::canonicalize(output).map_err(|e| Error::io(output, e))?;
    let _ = fs::remove_dir_all(output.join("diagnostics"));
    write_file(&output.join(RESOLVED_CONFIG), resolved.to_json().as_bytes())?;

    let mut obs = LoggingObserver::new(&output)?;
    obs.line(&format!("simulation `{}` from {}", cfg.name, cfg.system.display()));
    let mut models: Vec<String> = sequence.models.iter().map(|m| m.name.clone()).collect();
    models.extend(sequence.emulator.iter().map(|e| e.name.clone()));

    let store_path = output.join(STORE_FILE);
    fs::create_dir_all(store_path.parent().expect("store dir")).map_err(|e| Error::io(&store_path, e))?;
    let storage = match cfg.store.backend {
        Backend::File => AnyStorage::File(FileStorage::create(&store_path)?),
        Backend::Memory => AnyStorage::Memory(MemoryStorage::default()),
    };
    let mut store = ResultStore::create(cfg.store.clone(), storage)?;

    let mut sim = match Simulation::build(sequence, system, span, cfg.failure_policy, &mut obs) {
        Ok(s) => s,
        Err(e) => {
            obs.line(&format!("build failed: {e}"));
            obs.dump("build_error.json", &json!({ "error": e.to_string() }));
            return Err(e.into());
        }
    };
    obs.set_plan(sim.order().len(), models);
    obs.line(&format!("executing {} solves", sim.order().len()));
    let result = sim.execute(&mut store, &mut obs);

    if let AnyStorage::Memory(m) = store.storage() {
        // the memory backend still leaves a copy for export
        write_file(&store_path, &m.bytes)?;
    }
    let summary = RunSummary {
        output: output.clone(),
        status: sim.status(),
        executions: sim.counts().clone(),
        relaxed_init: sim.used_relaxed_init(),
        carried: sim.carried().len(),
        error: result.as_ref().err().map(|e| e.to_string()),
    };
    match &result {
        Ok(()) => obs.line(&format!("finished: {:?}", summary.executions)),
        Err(e) => obs.line(&format!("simulation failed: {e}")),
    }
    let st = store.stats();
    obs.line(&format!(
        "store: {} writes, {} bytes, {} flushes",
        st.write_sizes.len(),
        st.write_sizes.iter().sum::<usize>(),
        st.flushes
    ));
    write_file(&output.join("status.json"), &to_json(&summary))?;
    Ok(summary)
}
