//! Content-addressed result cache.
//!
//! Entries are JSON envelopes holding the payload and its sha256. A missing,
//! unreadable or mismatching entry is a miss and gets recomputed; writes go
//! through a temporary file and a rename.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Bumped whenever the layout of cached payloads changes.
pub const CACHE_SCHEMA: u32 = 1;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Cache key of any serialisable description of a computation.
pub fn cache_key<T: Serialize>(kind: &str, inputs: &T) -> Result<String> {
    let body = serde_json::to_string(inputs)?;
    Ok(sha256_hex(format!("{CACHE_SCHEMA}|{}|{kind}|{body}", crate::harness::CODE_HASH).as_bytes()))
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    schema: u32,
    key: String,
    checksum: String,
    payload: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheStats {
    pub hits: usize,
    pub misses: usize,
    pub corrupted: usize,
}

#[derive(Debug, Default)]
pub struct Cache {
    dir: Option<PathBuf>,
    hits: AtomicUsize,
    misses: AtomicUsize,
    corrupted: AtomicUsize,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: Some(dir.into()), ..Default::default() }
    }

    /// A cache that stores nothing and computes every time.
    pub fn disabled() -> Self {
        Self::default()
    }

    pub fn is_enabled(&self) -> bool {
        self.dir.is_some()
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            corrupted: self.corrupted.load(Ordering::Relaxed),
        }
    }

    pub fn entry_path(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(&key[..2]).join(format!("{key}.json")))
    }

    fn load<T: DeserializeOwned>(&self, path: &Path, key: &str) -> Option<T> {
        let text = std::fs::read_to_string(path).ok()?;
        let ok = serde_json::from_str::<Envelope>(&text).ok().and_then(|env| {
            let valid = env.schema == CACHE_SCHEMA && env.key == key && sha256_hex(env.payload.as_bytes()) == env.checksum;
            valid.then(|| serde_json::from_str(&env.payload).ok()).flatten()
        });
        if ok.is_none() {
            self.corrupted.fetch_add(1, Ordering::Relaxed);
        }
        ok
    }

    fn store<T: Serialize>(&self, path: &Path, key: &str, value: &T) -> Result<()> {
        let payload = serde_json::to_string(value)?;
        let env = Envelope { schema: CACHE_SCHEMA, key: key.to_string(), checksum: sha256_hex(payload.as_bytes()), payload };
        let dir = path.parent().expect("entry paths have a parent");
        std::fs::create_dir_all(dir)?;
        let tmp = tempfile::NamedTempFile::new_in(dir)?;
        std::fs::write(tmp.path(), serde_json::to_string(&env)?)?;
        tmp.persist(path).map_err(|e| e.error)?;
        Ok(())
    }

    /// Cached value for `key`, computing and storing it on a miss. A failed
    /// store is not fatal.
    pub fn get_or_compute<T, F>(&self, key: &str, compute: F) -> T
    where
        T: Serialize + DeserializeOwned,
        F: FnOnce() -> T,
    {
        let Some(path) = self.entry_path(key) else {
            self.misses.fetch_add(1, Ordering::Relaxed);
            return compute();
        };
        if path.exists() {
            if let Some(v) = self.load(&path, key) {
                self.hits.fetch_add(1, Ordering::Relaxed);
                return v;
            }
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let v = compute();
        let _ = self.store(&path, key, &v);
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hit_after_store() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::new(dir.path());
        let k = cache_key("t", &(1, 2)).unwrap();
        assert_eq!(c.get_or_compute(&k, || vec![1.5f64, 2.5]), vec![1.5, 2.5]);
        assert_eq!(c.get_or_compute(&k, || vec![0.0f64]), vec![1.5, 2.5]);
        assert_eq!(c.stats(), CacheStats { hits: 1, misses: 1, corrupted: 0 });
    }

    #[test]
    fn flipped_bit_is_recomputed() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::new(dir.path());
        let k = cache_key("t", &"flip").unwrap();
        c.get_or_compute(&k, || 41u64);
        let path = c.entry_path(&k).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        let at = bytes.iter().rposition(|&b| b == b'1').unwrap();
        bytes[at] ^= 0x01;
        std::fs::write(&path, bytes).unwrap();
        assert_eq!(c.get_or_compute(&k, || 42u64), 42);
        assert_eq!(c.stats().corrupted, 1);
        assert_eq!(c.get_or_compute(&k, || 0u64), 42);
    }

    #[test]
    fn disabled_cache_always_computes() {
        let c = Cache::disabled();
        assert_eq!(c.get_or_compute("ab", || 1), 1);
        assert_eq!(c.get_or_compute("ab", || 2), 2);
        assert_eq!(c.stats().misses, 2);
    }
}
