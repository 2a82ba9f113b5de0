use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use opsim_core::store::{ResultStore, Storage, StoreConfig};

use crate::error::{Error, Result};

/// Append-only file backing a result store.
///
/// Every `append` is exactly one `write_all` on an unbuffered handle, so the
/// store's batching decides the size of every physical write.
#[derive(Debug)]
pub struct FileStorage {
    path: PathBuf,
    file: File,
    len: u64,
    writes: Vec<usize>,
}

fn io_err(path: &Path, e: std::io::Error) -> opsim_core::Error {
    opsim_core::Error::Io(format!("{}: {e}", path.display()))
}

impl FileStorage {
    /// Creates (truncating) a file for a new store.
    pub fn create(path: &Path) -> Result<Self> {
        let file = OpenOptions::new()
            .read(true)
            .write(true)
            .create(true)
            .truncate(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        Ok(FileStorage { path: path.to_path_buf(), file, len: 0, writes: Vec::new() })
    }

    pub fn open(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let len = file.metadata().map_err(|e| Error::io(path, e))?.len();
        Ok(FileStorage { path: path.to_path_buf(), file, len, writes: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Sizes of the writes issued through this handle, in order.
    pub fn writes(&self) -> &[usize] {
        &self.writes
    }
}

impl Storage for FileStorage {
    fn append(&mut self, bytes: &[u8]) -> opsim_core::Result<()> {
        self.file.seek(SeekFrom::End(0)).map_err(|e| io_err(&self.path, e))?;
        self.file.write_all(bytes).map_err(|e| io_err(&self.path, e))?;
        self.len += bytes.len() as u64;
        self.writes.push(bytes.len());
        Ok(())
    }

    fn read_at(&mut self, offset: u64, len: usize) -> opsim_core::Result<Vec<u8>> {
        if offset + len as u64 > self.len {
            return Err(opsim_core::Error::StoreFormat(format!("read past end of {}", self.path.display())));
        }
        self.file.seek(SeekFrom::Start(offset)).map_err(|e| io_err(&self.path, e))?;
        let mut buf = vec![0; len];
        self.file.read_exact(&mut buf).map_err(|e| io_err(&self.path, e))?;
        Ok(buf)
    }

    fn len(&self) -> u64 {
        self.len
    }
}

/// Reopens a closed store file read-only; everything needed lives in the file.
pub fn open_store(path: &Path) -> Result<ResultStore<FileStorage>> {
    Ok(ResultStore::open(StoreConfig::default(), FileStorage::open(path)?)?)
}
