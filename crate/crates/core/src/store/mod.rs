//! Hierarchical results store: `model / kind / name` keys holding one
//! `horizon × components` matrix per execution.
//!
//! Layout of the container:
//!
//! ```text
//! "OPSIMST1" | chunk* | directory (JSON) | dir offset u64 | dir len u64 | "OPSIMEND"
//! ```
//!
//! A chunk is the little-endian `f64` payload of a batch of writes,
//! optionally deflated. Writes are buffered until the batch reaches
//! `write_batch_min` bytes; `close` emits the residual batch, the directory
//! and the trailer as one final write, so the file needs no sidecar.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::{Duration, Timestamp};

const MAGIC: &[u8; 8] = b"OPSIMST1";
const END_MAGIC: &[u8; 8] = b"OPSIMEND";
const TRAILER: usize = 24;
pub const MIN_WRITE_BATCH: usize = 4 * 1024;
pub const DEFAULT_WRITE_BATCH: usize = 1024 * 1024;
pub const DEFAULT_READ_CACHE: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResultKind {
    Variable,
    Parameter,
    Dual,
    Auxiliary,
}

impl ResultKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ResultKind::Variable => "variable",
            ResultKind::Parameter => "parameter",
            ResultKind::Dual => "dual",
            ResultKind::Auxiliary => "auxiliary",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [ResultKind::Variable, ResultKind::Parameter, ResultKind::Dual, ResultKind::Auxiliary]
            .into_iter()
            .find(|k| k.as_str() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ResultKey {
    pub model: String,
    pub kind: ResultKind,
    pub name: String,
}

impl ResultKey {
    pub fn new(model: impl Into<String>, kind: ResultKind, name: impl Into<String>) -> Self {
        ResultKey { model: model.into(), kind, name: name.into() }
    }
}

impl fmt::Display for ResultKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.model, self.kind.as_str(), self.name)
    }
}

/// Axes of a key: one row per horizon step, one column per component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub components: Vec<String>,
    pub horizon: usize,
    /// Step length of the rows.
    pub resolution: Duration,
}

impl Layout {
    pub fn cells(&self) -> usize {
        self.components.len() * self.horizon
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Memory,
    File,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct StoreConfig {
    pub backend: Backend,
    pub write_batch_min: usize,
    pub read_cache_entries: usize,
    /// Deflate chunks; defaults to on for the file backend.
    pub compress: Option<bool>,
}

impl Default for StoreConfig {
    fn default() -> Self {
        StoreConfig {
            backend: Backend::Memory,
            write_batch_min: DEFAULT_WRITE_BATCH,
            read_cache_entries: DEFAULT_READ_CACHE,
            compress: None,
        }
    }
}

impl StoreConfig {
    pub fn validate(&self) -> Result<()> {
        if self.write_batch_min < MIN_WRITE_BATCH {
            return Err(Error::Schema(format!(
                "write_batch_min {} below the {MIN_WRITE_BATCH} byte minimum",
                self.write_batch_min
            )));
        }
        Ok(())
    }

    pub fn compresses(&self) -> bool {
        self.compress.unwrap_or(self.backend == Backend::File)
    }
}

/// Byte sink and source behind a store.
pub trait Storage {
    fn append(&mut self, bytes: &[u8]) -> Result<()>;
    fn read_at(&mut self, offset: u64, len: usize) -> Result<Vec<u8>>;
    fn len(&self) -> u64;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// In-process storage; contents are lost unless the caller keeps the bytes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MemoryStorage {
    pub bytes: Vec<u8>,
}

impl Storage for MemoryStorage {
    fn append(&mut self, bytes: &[u8]) -> Result<()> {
        self.bytes.extend_from_slice(bytes);
        Ok(())
    }

    fn read_at(&mut self, offset: u64, len: usize) -> Result<Vec<u8>> {
        let a = offset as usize;
        self.bytes
            .get(a..a + len)
            .map(<[u8]>::to_vec)
            .ok_or_else(|| Error::StoreFormat(format!("read of {len} bytes at {offset} past the end")))
    }

    fn len(&self) -> u64 {
        self.bytes.len() as u64
    }
}

/// One stored matrix with its realized prefix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    /// Row-major values.
    pub data: Vec<f64>,
    /// Rows `0..realized_rows` fall inside the writer's interval.
    pub realized_rows: usize,
}

impl Matrix {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ChunkEntry {
    offset: u64,
    stored_len: u64,
    raw_len: u64,
    compressed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Record {
    execution_time: Timestamp,
    chunk: usize,
    /// Byte offset in the decompressed chunk.
    offset: u64,
    realized_rows: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct KeyEntry {
    key: ResultKey,
    layout: Layout,
    records: Vec<Record>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Directory {
    keys: Vec<KeyEntry>,
    chunks: Vec<ChunkEntry>,
}

/// Write and cache counters.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StoreStats {
    pub flushes: usize,
    /// Size of every write handed to the storage, in order.
    pub write_sizes: Vec<usize>,
    pub cache_hits: u64,
    pub cache_misses: u64,
    pub buffered_bytes: usize,
}

struct Pending {
    key: usize,
    execution_time: Timestamp,
    data: Vec<f64>,
    realized_rows: usize,
}

pub struct ResultStore<S: Storage> {
    config: StoreConfig,
    storage: S,
    index: BTreeMap<ResultKey, usize>,
    keys: Vec<KeyEntry>,
    chunks: Vec<ChunkEntry>,
    records: Vec<BTreeMap<Timestamp, usize>>,
    pending: Vec<Pending>,
    pending_index: BTreeMap<(usize, Timestamp), usize>,
    buffered: usize,
    /// Encoded chunks not yet handed to the storage.
    outgoing: Vec<u8>,
    frozen: bool,
    closed: bool,
    read_only: bool,
    cache: BTreeMap<(usize, Timestamp), Vec<f64>>,
    lru: VecDeque<(usize, Timestamp)>,
    chunk_cache: Option<(usize, Vec<u8>)>,
    stats: StoreStats,
}

impl<S: Storage> ResultStore<S> {
    /// Fresh store writing into empty `storage`.
    pub fn create(config: StoreConfig, storage: S) -> Result<Self> {
        config.validate()?;
        if !storage.is_empty() {
            return Err(Error::StoreFormat("storage is not empty".into()));
        }
        let mut s = ResultStore::create_unchecked(config, storage);
        // the header rides along with the first batch
        s.buffered = MAGIC.len();
        s.stats.buffered_bytes = MAGIC.len();
        Ok(s)
    }

    /// Reopens a closed store read-only from its own bytes.
    pub fn open(config: StoreConfig, mut storage: S) -> Result<Self> {
        let n = storage.len();
        if n < (MAGIC.len() + TRAILER) as u64 {
            return Err(Error::StoreFormat("file too short".into()));
        }
        if storage.read_at(0, 8)? != MAGIC {
            return Err(Error::StoreFormat("bad header magic".into()));
        }
        let tr = storage.read_at(n - TRAILER as u64, TRAILER)?;
        if &tr[16..24] != END_MAGIC {
            return Err(Error::StoreFormat("missing trailer; store was not closed".into()));
        }
        let off = u64::from_le_bytes(tr[0..8].try_into().expect("8 bytes"));
        let len = u64::from_le_bytes(tr[8..16].try_into().expect("8 bytes")) as usize;
        let raw = storage.read_at(off, len)?;
        let dir: Directory =
            serde_json::from_slice(&raw).map_err(|e| Error::StoreFormat(format!("directory: {e}")))?;
        let mut store = ResultStore::create_unchecked(config, storage);
        store.read_only = true;
        store.frozen = true;
        store.closed = true;
        store.buffered = 0;
        store.stats.buffered_bytes = 0;
        for (i, k) in dir.keys.iter().enumerate() {
            store.index.insert(k.key.clone(), i);
            store.records.push(k.records.iter().enumerate().map(|(j, r)| (r.execution_time, j)).collect());
        }
        store.keys = dir.keys;
        store.chunks = dir.chunks;
        Ok(store)
    }

    fn create_unchecked(config: StoreConfig, storage: S) -> Self {
        ResultStore {
            config,
            storage,
            index: BTreeMap::new(),
            keys: Vec::new(),
            chunks: Vec::new(),
            records: Vec::new(),
            pending: Vec::new(),
            pending_index: BTreeMap::new(),
            buffered: 0,
            outgoing: Vec::new(),
            frozen: false,
            closed: false,
            read_only: false,
            cache: BTreeMap::new(),
            lru: VecDeque::new(),
            chunk_cache: None,
            stats: StoreStats::default(),
        }
    }

    pub fn config(&self) -> &StoreConfig {
        &self.config
    }

    pub fn stats(&self) -> &StoreStats {
        &self.stats
    }

    pub fn storage(&self) -> &S {
        &self.storage
    }

    pub fn into_storage(self) -> S {
        self.storage
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Declares a key and its axes; repeating an identical layout is a no-op.
    pub fn register_layout(&mut self, key: ResultKey, layout: Layout) -> Result<()> {
        if self.frozen {
            return Err(Error::LayoutFrozen);
        }
        if let Some(&i) = self.index.get(&key) {
            if self.keys[i].layout == layout {
                return Ok(());
            }
            return Err(Error::ShapeMismatch(format!("{key} already registered with different axes")));
        }
        self.index.insert(key.clone(), self.keys.len());
        self.keys.push(KeyEntry { key, layout, records: Vec::new() });
        self.records.push(BTreeMap::new());
        Ok(())
    }

    pub fn keys(&self) -> Vec<ResultKey> {
        self.index.keys().cloned().collect()
    }

    pub fn layout(&self, key: &ResultKey) -> Result<&Layout> {
        self.idx(key).map(|i| &self.keys[i].layout)
    }

    fn idx(&self, key: &ResultKey) -> Result<usize> {
        self.index.get(key).copied().ok_or_else(|| Error::UnknownKey(key.to_string()))
    }

    /// Execution times written for `key`, ascending.
    pub fn execution_times(&self, key: &ResultKey) -> Result<Vec<Timestamp>> {
        let i = self.idx(key)?;
        let mut t: Vec<Timestamp> = self.records[i].keys().copied().collect();
        t.extend(self.pending.iter().filter(|p| p.key == i).map(|p| p.execution_time));
        t.sort();
        Ok(t)
    }

    /// Buffers one `horizon × components` matrix (row-major).
    pub fn write_result(
        &mut self,
        key: &ResultKey,
        execution_time: Timestamp,
        data: &[f64],
        realized_rows: usize,
    ) -> Result<()> {
        if self.closed {
            return Err(Error::Status("store is closed".into()));
        }
        let i = self.idx(key)?;
        let layout = &self.keys[i].layout;
        if data.len() != layout.cells() || realized_rows > layout.horizon {
            return Err(Error::ShapeMismatch(format!(
                "{key}: got {} values ({realized_rows} realized rows), expected {}×{}",
                data.len(),
                layout.horizon,
                layout.components.len()
            )));
        }
        if self.records[i].contains_key(&execution_time) || self.pending_index.contains_key(&(i, execution_time)) {
            return Err(Error::Invariant(format!("{key} already written at {execution_time}")));
        }
        self.frozen = true;
        self.pending_index.insert((i, execution_time), self.pending.len());
        self.pending.push(Pending { key: i, execution_time, data: data.to_vec(), realized_rows });
        self.buffered += data.len() * 8;
        self.stats.buffered_bytes = self.buffered;
        if self.buffered >= self.config.write_batch_min {
            self.take_chunk();
            // compressed chunks can come out smaller than a batch; keep
            // collecting until the physical write is large enough
            if self.outgoing.len() >= self.config.write_batch_min {
                self.emit()?;
            }
        }
        Ok(())
    }

    /// Encodes the pending batch as a chunk at the end of the outgoing bytes.
    fn take_chunk(&mut self) {
        if self.storage.is_empty() && self.outgoing.is_empty() && self.chunks.is_empty() {
            self.outgoing.extend_from_slice(MAGIC);
        }
        if self.pending.is_empty() {
            return;
        }
        let mut raw = Vec::with_capacity(self.buffered);
        let chunk = self.chunks.len();
        for p in core::mem::take(&mut self.pending) {
            self.keys[p.key].records.push(Record {
                execution_time: p.execution_time,
                chunk,
                offset: raw.len() as u64,
                realized_rows: p.realized_rows,
            });
            let j = self.keys[p.key].records.len() - 1;
            self.records[p.key].insert(p.execution_time, j);
            for v in &p.data {
                raw.extend_from_slice(&v.to_le_bytes());
            }
        }
        self.pending_index.clear();
        let compressed = self.config.compresses();
        let stored = if compressed { miniz_oxide::deflate::compress_to_vec(&raw, 6) } else { raw.clone() };
        self.chunks.push(ChunkEntry {
            offset: self.storage.len() + self.outgoing.len() as u64,
            stored_len: stored.len() as u64,
            raw_len: raw.len() as u64,
            compressed,
        });
        self.outgoing.extend_from_slice(&stored);
        self.buffered = 0;
        self.stats.buffered_bytes = 0;
    }

    fn emit(&mut self) -> Result<()> {
        if self.outgoing.is_empty() {
            return Ok(());
        }
        let bytes = core::mem::take(&mut self.outgoing);
        self.storage.append(&bytes)?;
        self.stats.flushes += 1;
        self.stats.write_sizes.push(bytes.len());
        Ok(())
    }

    /// Flushes the residual batch and writes the directory; idempotent.
    pub fn close(&mut self) -> Result<()> {
        if self.closed {
            return Ok(());
        }
        self.take_chunk();
        let dir = Directory { keys: self.keys.clone(), chunks: self.chunks.clone() };
        let json = serde_json::to_vec(&dir).map_err(|e| Error::StoreFormat(format!("directory: {e}")))?;
        let off = self.storage.len() + self.outgoing.len() as u64;
        self.outgoing.extend_from_slice(&json);
        self.outgoing.extend_from_slice(&off.to_le_bytes());
        self.outgoing.extend_from_slice(&(json.len() as u64).to_le_bytes());
        self.outgoing.extend_from_slice(END_MAGIC);
        self.emit()?;
        self.closed = true;
        self.frozen = true;
        Ok(())
    }

    /// Bit-exact matrix written for `key` at `execution_time`.
    pub fn read_result(&mut self, key: &ResultKey, execution_time: Timestamp) -> Result<Matrix> {
        let i = self.idx(key)?;
        let (rows, cols) = (self.keys[i].layout.horizon, self.keys[i].layout.components.len());
        if let Some(&p) = self.pending_index.get(&(i, execution_time)) {
            let p = &self.pending[p];
            return Ok(Matrix { rows, cols, data: p.data.clone(), realized_rows: p.realized_rows });
        }
        let &j = self.records[i]
            .get(&execution_time)
            .ok_or_else(|| Error::UnknownKey(format!("{key} at {execution_time}")))?;
        let rec = self.keys[i].records[j].clone();
        let ck = (i, execution_time);
        if let Some(v) = self.cache.get(&ck) {
            self.stats.cache_hits += 1;
            let data = v.clone();
            if let Some(pos) = self.lru.iter().position(|k| *k == ck) {
                self.lru.remove(pos);
            }
            self.lru.push_back(ck);
            return Ok(Matrix { rows, cols, data, realized_rows: rec.realized_rows });
        }
        self.stats.cache_misses += 1;
        let raw = self.chunk_bytes(rec.chunk)?;
        let a = rec.offset as usize;
        let b = a + rows * cols * 8;
        let slice = raw.get(a..b).ok_or_else(|| Error::StoreFormat(format!("{key}: record out of chunk")))?;
        let data: Vec<f64> =
            slice.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        if self.config.read_cache_entries > 0 {
            if self.lru.len() >= self.config.read_cache_entries {
                if let Some(old) = self.lru.pop_front() {
                    self.cache.remove(&old);
                }
            }
            self.lru.push_back(ck);
            self.cache.insert(ck, data.clone());
        }
        Ok(Matrix { rows, cols, data, realized_rows: rec.realized_rows })
    }

    fn chunk_bytes(&mut self, chunk: usize) -> Result<Vec<u8>> {
        if let Some((c, bytes)) = &self.chunk_cache {
            if *c == chunk {
                return Ok(bytes.clone());
            }
        }
        let e = self.chunks.get(chunk).ok_or_else(|| Error::StoreFormat(format!("chunk {chunk} missing")))?.clone();
        let on_disk = self.storage.len();
        let stored = if e.offset >= on_disk {
            let a = (e.offset - on_disk) as usize;
            self.outgoing[a..a + e.stored_len as usize].to_vec()
        } else {
            self.storage.read_at(e.offset, e.stored_len as usize)?
        };
        let raw = if e.compressed {
            miniz_oxide::inflate::decompress_to_vec(&stored)
                .map_err(|err| Error::StoreFormat(format!("chunk {chunk}: {err:?}")))?
        } else {
            stored
        };
        if raw.len() as u64 != e.raw_len {
            return Err(Error::StoreFormat(format!("chunk {chunk}: length mismatch")));
        }
        self.chunk_cache = Some((chunk, raw.clone()));
        Ok(raw)
    }

    /// Concatenation of the realized rows of every execution, stamped with
    /// their step times.
    pub fn realized(&mut self, key: &ResultKey) -> Result<Vec<(Timestamp, Vec<f64>)>> {
        let res = self.layout(key)?.resolution;
        let mut out = Vec::new();
        for t in self.execution_times(key)? {
            let m = self.read_result(key, t)?;
            for r in 0..m.realized_rows {
                out.push((t + res.times(r as i64), m.row(r).to_vec()));
            }
        }
        Ok(out)
    }

    /// The file does not change after close, so read-only reopen is safe.
    pub fn is_read_only(&self) -> bool {
        self.read_only
    }
}

/// Keys grouped by model for listing.
pub fn hierarchy(keys: &[ResultKey]) -> BTreeMap<String, BTreeMap<String, Vec<String>>> {
    let mut out: BTreeMap<String, BTreeMap<String, Vec<String>>> = BTreeMap::new();
    for k in keys {
        out.entry(k.model.clone()).or_default().entry(k.kind.as_str().to_string()).or_default().push(k.name.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn cfg(batch: usize, compress: bool) -> StoreConfig {
        StoreConfig { backend: Backend::File, write_batch_min: batch, read_cache_entries: 4, compress: Some(compress) }
    }

    fn key(n: &str) -> ResultKey {
        ResultKey::new("ED", ResultKind::Variable, n)
    }

    fn layout(cols: usize, rows: usize) -> Layout {
        Layout { components: (0..cols).map(|i| format!("c{i}")).collect(), horizon: rows, resolution: Duration::hours(1) }
    }

    fn matrix(seed: u64, n: usize) -> Vec<f64> {
        (0..n).map(|i| ((seed * 7919 + i as u64) as f64).sin() * 1e3).collect()
    }

    #[test]
    fn small_write_is_buffered() {
        let mut s = ResultStore::create(StoreConfig::default(), MemoryStorage::default()).unwrap();
        s.register_layout(key("p"), layout(5, 24)).unwrap();
        s.write_result(&key("p"), Timestamp(0), &matrix(1, 120), 1).unwrap();
        assert_eq!(s.stats().flushes, 0);
        // read-through of the buffer
        assert_eq!(s.read_result(&key("p"), Timestamp(0)).unwrap().data, matrix(1, 120));
    }

    #[test]
    fn crossing_batch_flushes_once() {
        let mut s = ResultStore::create(StoreConfig::default(), MemoryStorage::default()).unwrap();
        s.register_layout(key("p"), layout(128, 128)).unwrap();
        // 128·128·8 = 128 KiB per write; the eighth crosses 1 MiB
        for t in 0..8 {
            s.write_result(&key("p"), Timestamp(t * 3600), &matrix(t as u64, 128 * 128), 1).unwrap();
        }
        assert_eq!(s.stats().flushes, 1);
        assert!(s.stats().write_sizes[0] >= DEFAULT_WRITE_BATCH);
    }

    #[test]
    fn compressed_chunks_coalesce_into_full_writes() {
        let mut s = ResultStore::create(cfg(MIN_WRITE_BATCH, true), MemoryStorage::default()).unwrap();
        s.register_layout(key("p"), layout(16, 16)).unwrap();
        // zeros deflate to almost nothing, so many chunks share one write
        for t in 0..4000 {
            s.write_result(&key("p"), Timestamp(t * 3600), &[0.0; 256], 1).unwrap();
            // chunks still waiting in memory read back too
            assert_eq!(s.read_result(&key("p"), Timestamp(t * 3600)).unwrap().data, vec![0.0; 256]);
        }
        s.close().unwrap();
        let sizes = &s.stats().write_sizes;
        assert!(sizes.len() > 1);
        assert!(sizes[..sizes.len() - 1].iter().all(|&n| n >= MIN_WRITE_BATCH), "{sizes:?}");
        let mut r = ResultStore::open(cfg(MIN_WRITE_BATCH, true), s.into_storage()).unwrap();
        assert_eq!(r.read_result(&key("p"), Timestamp(3999 * 3600)).unwrap().data, vec![0.0; 256]);
    }

    #[test]
    fn layout_rules() {
        let mut s = ResultStore::create(cfg(4096, false), MemoryStorage::default()).unwrap();
        s.register_layout(key("p"), layout(2, 2)).unwrap();
        s.register_layout(key("p"), layout(2, 2)).unwrap();
        assert_eq!(s.keys(), vec![key("p")]);
        assert!(matches!(s.write_result(&key("p"), Timestamp(0), &[1.0; 3], 1), Err(Error::ShapeMismatch(_))));
        s.write_result(&key("p"), Timestamp(0), &[1.0; 4], 1).unwrap();
        assert_eq!(s.register_layout(key("q"), layout(1, 1)), Err(Error::LayoutFrozen));
        assert!(matches!(s.read_result(&key("q"), Timestamp(0)), Err(Error::UnknownKey(_))));
    }

    #[test]
    fn batch_minimum_enforced() {
        assert!(ResultStore::create(cfg(1024, false), MemoryStorage::default()).is_err());
    }

    fn round_trip(compress: bool) {
        let mut s = ResultStore::create(cfg(8192, compress), MemoryStorage::default()).unwrap();
        s.register_layout(key("p"), layout(3, 48)).unwrap();
        s.register_layout(ResultKey::new("UC", ResultKind::Dual, "balance"), layout(1, 48)).unwrap();
        let mut written = Vec::new();
        for t in 0..40 {
            let m = matrix(t, 144);
            s.write_result(&key("p"), Timestamp(t as i64 * 3600), &m, 24).unwrap();
            written.push(m);
        }
        s.write_result(&ResultKey::new("UC", ResultKind::Dual, "balance"), Timestamp(0), &[f64::MIN_POSITIVE; 48], 24)
            .unwrap();
        s.close().unwrap();
        s.close().unwrap();
        let sizes = s.stats().write_sizes.clone();
        assert!(sizes[..sizes.len() - 1].iter().all(|w| *w >= 8192), "{sizes:?}");
        let bytes = s.into_storage();
        let mut r = ResultStore::open(cfg(8192, compress), bytes).unwrap();
        assert_eq!(r.keys().len(), 2);
        for (t, m) in written.iter().enumerate() {
            let got = r.read_result(&key("p"), Timestamp(t as i64 * 3600)).unwrap();
            assert_eq!(got.realized_rows, 24);
            assert!(got.data.iter().zip(m).all(|(a, b)| a.to_bits() == b.to_bits()));
        }
        assert_eq!(r.realized(&key("p")).unwrap().len(), 40 * 24);
    }

    #[test]
    fn round_trip_plain() {
        round_trip(false);
    }

    #[test]
    fn round_trip_deflate() {
        round_trip(true);
    }

    #[test]
    fn repeated_read_hits_cache() {
        let mut s = ResultStore::create(cfg(4096, true), MemoryStorage::default()).unwrap();
        s.register_layout(key("p"), layout(64, 16)).unwrap();
        s.write_result(&key("p"), Timestamp(0), &matrix(3, 1024), 1).unwrap();
        assert_eq!(s.stats().flushes, 1);
        s.read_result(&key("p"), Timestamp(0)).unwrap();
        s.read_result(&key("p"), Timestamp(0)).unwrap();
        assert_eq!((s.stats().cache_misses, s.stats().cache_hits), (1, 1));
    }

    #[test]
    fn unclosed_store_does_not_reopen() {
        let mut s = ResultStore::create(cfg(4096, false), MemoryStorage::default()).unwrap();
        s.register_layout(key("p"), layout(64, 16)).unwrap();
        s.write_result(&key("p"), Timestamp(0), &matrix(3, 1024), 1).unwrap();
        assert!(ResultStore::open(cfg(4096, false), s.into_storage()).is_err());
    }
}
