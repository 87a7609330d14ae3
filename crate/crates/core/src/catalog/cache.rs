use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::features::FeatureVector;

use super::CatalogError;

#[derive(Debug, Serialize, Deserialize)]
struct CacheLine {
    hash: String,
    config_fingerprint: String,
    feature_vector: FeatureVector,
}

/// Feature vectors keyed by (image content hash, config fingerprint).
///
/// Safe to share across threads. Two writers racing on one key store the
/// same value, since extraction is deterministic.
#[derive(Debug, Default)]
pub struct FeatureCache {
    entries: RwLock<HashMap<(String, String), FeatureVector>>,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl FeatureCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reads a JSON-lines cache file; a missing file yields an empty cache.
    pub fn load(path: &Path) -> Result<Self, CatalogError> {
        let cache = Self::new();
        let file = match std::fs::File::open(path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(cache),
            Err(e) => return Err(CatalogError::io(path, e)),
        };
        {
            let mut map = cache.entries.write().expect("cache lock");
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| CatalogError::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let entry: CacheLine = serde_json::from_str(&line).map_err(|e| CatalogError::Parse {
                    row: i + 1,
                    column: None,
                    message: format!("bad cache line in {}: {e}", path.display()),
                })?;
                map.insert((entry.hash, entry.config_fingerprint), entry.feature_vector);
            }
        }
        Ok(cache)
    }

    /// Writes every entry as one JSON line, sorted by key.
    pub fn save(&self, path: &Path) -> Result<(), CatalogError> {
        let map = self.entries.read().expect("cache lock");
        let mut keys: Vec<&(String, String)> = map.keys().collect();
        keys.sort();
        let mut out = Vec::new();
        for key in keys {
            let line = CacheLine {
                hash: key.0.clone(),
                config_fingerprint: key.1.clone(),
                feature_vector: map[key].clone(),
            };
            serde_json::to_writer(&mut out, &line).expect("in-memory write");
            out.write_all(b"\n").expect("in-memory write");
        }
        std::fs::write(path, out).map_err(|e| CatalogError::io(path, e))
    }

    /// Looks up a vector and counts the hit or miss.
    pub fn get(&self, hash: &str, config_fingerprint: &str) -> Option<FeatureVector> {
        let found = self
            .entries
            .read()
            .expect("cache lock")
            .get(&(hash.to_string(), config_fingerprint.to_string()))
            .cloned();
        let counter = if found.is_some() { &self.hits } else { &self.misses };
        counter.fetch_add(1, Ordering::Relaxed);
        found
    }

    pub fn insert(&self, hash: &str, fv: FeatureVector) {
        self.entries
            .write()
            .expect("cache lock")
            .insert((hash.to_string(), fv.config_fingerprint.clone()), fv);
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }
}
