//! Append-only JSON Lines logs with size-based rotation. The writer hands
//! out sequence numbers under the same lock as the write itself, so
//! numbers are gap-free and strictly increasing no matter how many
//! requests run concurrently.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::ServiceError;

pub struct LogWriter {
    max_bytes: u64,
    inner: Mutex<Inner>,
}

struct Inner {
    path: PathBuf,
    file: File,
    written: u64,
    rotations: u32,
    sequence: u64,
}

impl LogWriter {
    /// Open (or create) the log. The sequence counter resumes from the
    /// highest previously used number, found by scanning existing segments.
    pub fn open(path: &Path, max_bytes: u64) -> Result<Self, ServiceError> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| ServiceError::Io {
                path: parent.display().to_string(),
                source: e,
            })?;
        }
        let sequence = scan_max_sequence(path)?;
        let rotations = existing_rotations(path);
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(|e| {
            ServiceError::Io { path: path.display().to_string(), source: e }
        })?;
        let written = file
            .metadata()
            .map_err(|e| ServiceError::Io { path: path.display().to_string(), source: e })?
            .len();
        Ok(Self {
            max_bytes,
            inner: Mutex::new(Inner {
                path: path.to_path_buf(),
                file,
                written,
                rotations,
                sequence,
            }),
        })
    }

    /// Append one line (newline added here).
    pub fn append_line(&self, line: &str) -> Result<(), ServiceError> {
        let mut inner = self.inner.lock().expect("log writer lock");
        inner.write_line(line, self.max_bytes)
    }

    /// Allocate the next sequence number and append the line built from it,
    /// atomically with respect to other appends.
    pub fn append_numbered(
        &self,
        build: impl FnOnce(u64) -> String,
    ) -> Result<u64, ServiceError> {
        let mut inner = self.inner.lock().expect("log writer lock");
        inner.sequence += 1;
        let seq = inner.sequence;
        let line = build(seq);
        inner.write_line(&line, self.max_bytes)?;
        Ok(seq)
    }

    pub fn path(&self) -> PathBuf {
        self.inner.lock().expect("log writer lock").path.clone()
    }
}

impl Inner {
    fn write_line(&mut self, line: &str, max_bytes: u64) -> Result<(), ServiceError> {
        let len = line.len() as u64 + 1;
        if self.written > 0 && self.written + len > max_bytes {
            self.rotate()?;
        }
        let io_err = |e: std::io::Error| ServiceError::Io {
            path: self.path.display().to_string(),
            source: e,
        };
        self.file.write_all(line.as_bytes()).map_err(io_err)?;
        self.file.write_all(b"\n").map_err(io_err)?;
        self.file.flush().map_err(io_err)?;
        self.written += len;
        Ok(())
    }

    fn rotate(&mut self) -> Result<(), ServiceError> {
        self.rotations += 1;
        let rotated = rotated_path(&self.path, self.rotations);
        std::fs::rename(&self.path, &rotated).map_err(|e| ServiceError::Io {
            path: self.path.display().to_string(),
            source: e,
        })?;
        self.file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|e| ServiceError::Io { path: self.path.display().to_string(), source: e })?;
        self.written = 0;
        Ok(())
    }
}

fn rotated_path(path: &Path, n: u32) -> PathBuf {
    let mut name = path.as_os_str().to_os_string();
    name.push(format!(".{n}"));
    PathBuf::from(name)
}

fn existing_rotations(path: &Path) -> u32 {
    let mut n = 0;
    while rotated_path(path, n + 1).exists() {
        n += 1;
    }
    n
}

/// Highest `"sequence"` field across the live segment and every rotated
/// sibling; 0 when nothing exists yet.
fn scan_max_sequence(path: &Path) -> Result<u64, ServiceError> {
    let mut files = vec![path.to_path_buf()];
    let mut n = 1;
    loop {
        let rotated = rotated_path(path, n);
        if rotated.exists() {
            files.push(rotated);
            n += 1;
        } else {
            break;
        }
    }
    let mut max = 0u64;
    for f in files {
        if !f.exists() {
            continue;
        }
        let text = std::fs::read_to_string(&f)
            .map_err(|e| ServiceError::Io { path: f.display().to_string(), source: e })?;
        for line in text.lines() {
            if line.trim().is_empty() {
                continue;
            }
            if let Ok(value) = serde_json::from_str::<serde_json::Value>(line) {
                if let Some(seq) = value.get("sequence").and_then(|v| v.as_u64()) {
                    max = max.max(seq);
                }
            }
        }
    }
    Ok(max)
}

/// Read every record of a JSON Lines log (live plus rotated segments, in
/// chronological order).
pub fn read_all_records<T: serde::de::DeserializeOwned>(
    path: &Path,
) -> Result<Vec<T>, ServiceError> {
    let mut files = Vec::new();
    let mut n = existing_rotations(path);
    while n > 0 {
        files.push(rotated_path(path, n));
        n -= 1;
    }
    files.reverse();
    if path.exists() {
        files.push(path.to_path_buf());
    }
    let mut out = Vec::new();
    for f in files {
        let text = std::fs::read_to_string(&f)
            .map_err(|e| ServiceError::Io { path: f.display().to_string(), source: e })?;
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: T = serde_json::from_str(line).map_err(|e| ServiceError::LogCorrupt {
                path: f.display().to_string(),
                line: idx + 1,
                message: e.to_string(),
            })?;
            out.push(record);
        }
    }
    Ok(out)
}
