//! Reading a finished (or failed) run back and exporting series to CSV.

use std::path::Path;

use opsim_core::store::{hierarchy, Matrix, ResultKey, ResultKind, ResultStore};
use opsim_core::time::Timestamp;

use crate::error::{Error, Result};
use crate::input::format_time;
use crate::run::STORE_FILE;
use crate::storage::{open_store, FileStorage};

/// Read-only view over an output directory's store.
pub struct Results {
    store: ResultStore<FileStorage>,
}

pub fn load_results(output: &Path) -> Result<Results> {
    Ok(Results { store: open_store(&output.join(STORE_FILE))? })
}

impl Results {
    pub fn store(&mut self) -> &mut ResultStore<FileStorage> {
        &mut self.store
    }

    pub fn keys(&self) -> Vec<ResultKey> {
        self.store.keys()
    }

    /// Resolves `name` as `kind/name` or a bare name (variables first).
    pub fn resolve(&self, model: &str, name: &str) -> Result<ResultKey> {
        let keys = self.keys();
        if let Some((k, n)) = name.split_once('/') {
            if let Some(kind) = ResultKind::parse(k) {
                let key = ResultKey::new(model, kind, n);
                return if keys.contains(&key) { Ok(key) } else { Err(unknown(model, name, &keys)) };
            }
        }
        for kind in [ResultKind::Variable, ResultKind::Parameter, ResultKind::Dual, ResultKind::Auxiliary] {
            let key = ResultKey::new(model, kind, name);
            if keys.contains(&key) {
                return Ok(key);
            }
        }
        Err(unknown(model, name, &keys))
    }

    pub fn components(&self, key: &ResultKey) -> Result<Vec<String>> {
        Ok(self.store.layout(key)?.components.clone())
    }

    pub fn execution_times(&self, key: &ResultKey) -> Result<Vec<Timestamp>> {
        Ok(self.store.execution_times(key)?)
    }

    pub fn read(&mut self, key: &ResultKey, t: Timestamp) -> Result<Matrix> {
        Ok(self.store.read_result(key, t)?)
    }

    /// Realized rows of every execution, stamped with their step times.
    pub fn realized(&mut self, key: &ResultKey) -> Result<Vec<(Timestamp, Vec<f64>)>> {
        Ok(self.store.realized(key)?)
    }

    /// Realized series of one component.
    pub fn realized_series(&mut self, key: &ResultKey, component: &str) -> Result<Vec<(Timestamp, f64)>> {
        let col = self
            .components(key)?
            .iter()
            .position(|c| c == component)
            .ok_or_else(|| Error::Config(format!("{key} has no component `{component}`")))?;
        Ok(self.realized(key)?.into_iter().map(|(t, row)| (t, row[col])).collect())
    }

    /// Writes `execution_time,horizon_step,component,value,realized_flag`
    /// rows; look-ahead rows are included only when asked for.
    pub fn export_csv<W: std::io::Write>(&mut self, key: &ResultKey, lookahead: bool, out: W) -> Result<usize> {
        let comps = self.components(key)?;
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Csv { path: "<export>".into(), message: e.to_string() };
        w.write_record(["execution_time", "horizon_step", "component", "value", "realized_flag"])
            .map_err(csv_err)?;
        let mut n = 0;
        for t in self.execution_times(key)? {
            let m = self.read(key, t)?;
            let rows = if lookahead { m.rows } else { m.realized_rows };
            let at = format_time(t);
            for r in 0..rows {
                let step = (r + 1).to_string();
                let flag = if r < m.realized_rows { "1" } else { "0" };
                for (c, name) in comps.iter().enumerate() {
                    // `{}` on f64 is the shortest string that parses back to the same bits
                    w.write_record([at.as_str(), &step, name, &format!("{}", m.get(r, c)), flag])
                        .map_err(csv_err)?;
                    n += 1;
                }
            }
        }
        w.flush().map_err(|e| Error::io("<export>", e))?;
        Ok(n)
    }

    pub fn listing(&self) -> String {
        let mut s = String::new();
        for (model, kinds) in hierarchy(&self.keys()) {
            s.push_str(&model);
            s.push('\n');
            for (kind, names) in kinds {
                s.push_str(&format!("  {kind}: {}\n", names.join(", ")));
            }
        }
        s
    }
}

fn unknown(model: &str, name: &str, keys: &[ResultKey]) -> Error {
    let available: Vec<String> = keys.iter().filter(|k| k.model == model).map(|k| k.to_string()).collect();
    if available.is_empty() {
        Error::Config(format!("no results for model `{model}`"))
    } else {
        Error::Config(format!("no result `{name}` for model `{model}`; available: {}", available.join(", ")))
    }
}

/// `opsim export` without the CLI.
pub fn export(output: &Path, model: &str, name: &str, lookahead: bool, to: &Path) -> Result<usize> {
    let mut r = load_results(output)?;
    let key = r.resolve(model, name)?;
    let file = std::fs::File::create(to).map_err(|e| Error::io(to, e))?;
    r.export_csv(&key, lookahead, std::io::BufWriter::new(file))
}
