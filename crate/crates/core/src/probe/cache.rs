//! Append-only JSONL answer cache.
//!
//! One line per answered probe. The key hashes the concept name, feature
//! name, and template content hash, so a template edit invalidates every
//! cached answer without any bookkeeping. Reruns answer from the cache
//! and never re-ask the oracle.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::probe::template::hex_digest;

#[derive(Debug, thiserror::Error)]
pub enum CacheError {
    #[error("cache file {path} is corrupt at line {line}: {message}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("io on cache file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// One cached answer, exactly as serialized to the JSONL file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub concept: String,
    pub feature: String,
    pub template_hash: String,
    pub raw_text: String,
    pub parsed: String,
    pub timestamp: u64,
}

/// Deterministic cache key for a probe under a given template.
pub fn cache_key(concept: &str, feature: &str, template_hash: &str) -> String {
    let mut buf = Vec::with_capacity(concept.len() + feature.len() + template_hash.len() + 2);
    buf.extend_from_slice(concept.as_bytes());
    buf.push(0x1f);
    buf.extend_from_slice(feature.as_bytes());
    buf.push(0x1f);
    buf.extend_from_slice(template_hash.as_bytes());
    hex_digest(&buf)
}

/// Persistent answer store backed by an append-only JSONL file.
#[derive(Debug)]
pub struct AnswerCache {
    path: PathBuf,
    entries: HashMap<String, CacheEntry>,
    writer: BufWriter<File>,
    appended_since_flush: usize,
}

/// Flush cadence for appended lines; the final flush happens on
/// [`AnswerCache::flush`] or drop.
const FLUSH_EVERY: usize = 1024;

impl AnswerCache {
    /// Opens (or creates) the cache at `path` and loads every entry. A
    /// malformed interior line means real corruption and is an error; a
    /// malformed final line is treated as a torn write from an
    /// interrupted run and dropped with a warning.
    pub fn open<P: AsRef<Path>>(path: P) -> Result<Self, CacheError> {
        let path = path.as_ref().to_path_buf();
        let io_err = |source| CacheError::Io {
            path: path.clone(),
            source,
        };
        let mut entries = HashMap::new();
        if path.exists() {
            let file = File::open(&path).map_err(io_err)?;
            let reader = BufReader::new(file);
            let lines: Vec<String> = reader
                .lines()
                .collect::<Result<_, _>>()
                .map_err(io_err)?;
            let last = lines.len();
            for (i, line) in lines.iter().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<CacheEntry>(line) {
                    Ok(entry) => {
                        entries.insert(entry.key.clone(), entry);
                    }
                    Err(e) if i + 1 == last => {
                        log::warn!(
                            "dropping torn final line of cache {}: {e}",
                            path.display()
                        );
                    }
                    Err(e) => {
                        return Err(CacheError::Corrupt {
                            path,
                            line: i + 1,
                            message: e.to_string(),
                        });
                    }
                }
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|source| CacheError::Io {
                path: path.clone(),
                source,
            })?;
        Ok(AnswerCache {
            path,
            entries,
            writer: BufWriter::new(file),
            appended_since_flush: 0,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&CacheEntry> {
        self.entries.get(key)
    }

    /// Typed view of a cached answer; the parse comes from the stored raw
    /// text, so the reading stays consistent with fresh answers.
    pub fn answer(&self, key: &str) -> Option<crate::probe::OracleAnswer> {
        self.entries.get(key).map(|entry| crate::probe::OracleAnswer {
            key: entry.key.clone(),
            raw_text: entry.raw_text.clone(),
            parsed: crate::probe::parse_answer(&entry.raw_text),
            from_cache: true,
            timestamp: entry.timestamp,
        })
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// Appends one entry to the file and the in-memory index.
    pub fn append(&mut self, entry: CacheEntry) -> Result<(), CacheError> {
        let io_err = |source| CacheError::Io {
            path: self.path.clone(),
            source,
        };
        let line = serde_json::to_string(&entry).expect("cache entry serializes");
        self.writer.write_all(line.as_bytes()).map_err(io_err)?;
        self.writer.write_all(b"\n").map_err(io_err)?;
        self.appended_since_flush += 1;
        if self.appended_since_flush >= FLUSH_EVERY {
            self.writer.flush().map_err(io_err)?;
            self.appended_since_flush = 0;
        }
        self.entries.insert(entry.key.clone(), entry);
        Ok(())
    }

    pub fn flush(&mut self) -> Result<(), CacheError> {
        self.appended_since_flush = 0;
        self.writer.flush().map_err(|source| CacheError::Io {
            path: self.path.clone(),
            source,
        })
    }
}

impl Drop for AnswerCache {
    fn drop(&mut self) {
        let _ = self.writer.flush();
    }
}
