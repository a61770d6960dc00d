//! Structure constants of basis products, kept in memory and optionally
//! persisted as content-addressed JSON files.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagram::BasisElem;
use crate::elem::AlgElem;
use crate::error::{Error, Result};
use crate::params::{Mode, Params};

/// Environment variable naming the default cache directory.
pub const CACHE_DIR_ENV: &str = "CBMW_CACHE_DIR";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheKey {
    pub n: usize,
    pub r: usize,
    pub mode: Mode,
    pub fingerprint: String,
}

impl CacheKey {
    fn new(p: &Params, n: usize) -> Self {
        CacheKey { n, r: p.r(), mode: p.mode(), fingerprint: p.fingerprint() }
    }

    /// Content address of the table.
    pub fn address(&self) -> String {
        let text = serde_json::to_string(self).expect("key serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

#[derive(Serialize, Deserialize)]
struct ProductJson {
    x: BasisElem,
    y: BasisElem,
    value: AlgElem,
}

#[derive(Serialize, Deserialize)]
struct TableJson {
    key: CacheKey,
    products: Vec<ProductJson>,
}

struct Table {
    key: CacheKey,
    products: BTreeMap<(BasisElem, BasisElem), AlgElem>,
    dirty: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheStats {
    pub dir: Option<String>,
    pub tables_in_memory: usize,
    pub entries_in_memory: usize,
    pub files_on_disk: usize,
    pub bytes_on_disk: u64,
}

/// Reads are concurrent; insertions and file writes are serialized.
pub struct StructureCache {
    dir: Option<PathBuf>,
    tables: RwLock<HashMap<String, Arc<RwLock<Table>>>>,
    io: Mutex<()>,
}

fn is_table_file(path: &Path) -> bool {
    let Some(name) = path.file_name().and_then(|s| s.to_str()) else { return false };
    name.len() == 69 && name.ends_with(".json") && name[..64].bytes().all(|b| b.is_ascii_hexdigit())
}

impl StructureCache {
    pub fn in_memory() -> Self {
        StructureCache { dir: None, tables: RwLock::new(HashMap::new()), io: Mutex::new(()) }
    }

    pub fn persistent(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(StructureCache { dir: Some(dir), tables: RwLock::new(HashMap::new()), io: Mutex::new(()) })
    }

    /// The process-wide in-memory cache.
    pub fn global() -> &'static StructureCache {
        static CACHE: OnceLock<StructureCache> = OnceLock::new();
        CACHE.get_or_init(StructureCache::in_memory)
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn table(&self, p: &Params, n: usize) -> Result<Arc<RwLock<Table>>> {
        let key = CacheKey::new(p, n);
        let address = key.address();
        if let Some(t) = self.tables.read().get(&address) {
            return Ok(t.clone());
        }
        let _io = self.io.lock();
        if let Some(t) = self.tables.read().get(&address) {
            return Ok(t.clone());
        }
        let mut products = BTreeMap::new();
        if let Some(dir) = &self.dir {
            let path = dir.join(format!("{address}.json"));
            if path.exists() {
                let text = fs::read_to_string(&path)?;
                let table: TableJson = serde_json::from_str(&text)?;
                if table.key != key {
                    return Err(Error::Io(format!("{} holds a table for a different key", path.display())));
                }
                for e in table.products {
                    products.insert((e.x, e.y), e.value);
                }
            }
        }
        let t = Arc::new(RwLock::new(Table { key, products, dirty: false }));
        self.tables.write().insert(address, t.clone());
        Ok(t)
    }

    pub fn get(&self, p: &Params, x: &BasisElem, y: &BasisElem) -> Result<Option<AlgElem>> {
        let t = self.table(p, x.n)?;
        let t = t.read();
        Ok(t.products.get(&(x.clone(), y.clone())).cloned())
    }

    pub fn insert(&self, p: &Params, x: &BasisElem, y: &BasisElem, value: AlgElem) -> Result<()> {
        let t = self.table(p, x.n)?;
        let mut t = t.write();
        t.products.insert((x.clone(), y.clone()), value);
        t.dirty = true;
        Ok(())
    }

    /// Write every modified table to disk (atomically per file).
    pub fn flush(&self) -> Result<()> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let _io = self.io.lock();
        let tables: Vec<(String, Arc<RwLock<Table>>)> =
            self.tables.read().iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        for (address, t) in tables {
            let mut t = t.write();
            if !t.dirty {
                continue;
            }
            let json = TableJson {
                key: t.key.clone(),
                products: t
                    .products
                    .iter()
                    .map(|((x, y), v)| ProductJson { x: x.clone(), y: y.clone(), value: v.clone() })
                    .collect(),
            };
            let path = dir.join(format!("{address}.json"));
            let tmp = dir.join(format!("{address}.json.tmp"));
            fs::write(&tmp, serde_json::to_vec(&json)?)?;
            fs::rename(&tmp, &path)?;
            t.dirty = false;
        }
        Ok(())
    }

    pub fn stats(&self) -> Result<CacheStats> {
        let tables = self.tables.read();
        let mut s = CacheStats {
            dir: self.dir.as_ref().map(|d| d.display().to_string()),
            tables_in_memory: tables.len(),
            entries_in_memory: tables.values().map(|t| t.read().products.len()).sum(),
            ..Default::default()
        };
        if let Some(dir) = &self.dir {
            for entry in fs::read_dir(dir)? {
                let path = entry?.path();
                if is_table_file(&path) {
                    s.files_on_disk += 1;
                    s.bytes_on_disk += fs::metadata(&path)?.len();
                }
            }
        }
        Ok(s)
    }

    /// Drop all tables, in memory and on disk. Returns the number of files removed.
    pub fn clear(&self) -> Result<usize> {
        let _io = self.io.lock();
        self.tables.write().clear();
        let mut removed = 0;
        if let Some(dir) = &self.dir {
            for entry in fs::read_dir(dir)? {
                let path = entry?.path();
                if is_table_file(&path) {
                    fs::remove_file(&path)?;
                    removed += 1;
                }
            }
        }
        Ok(removed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::basis_enumerate;
    use crate::engine::mul_basis_with;
    use crate::params::RhoBranch;

    #[test]
    fn persistent_round_trip() {
        let dir = std::env::temp_dir().join(format!("cbmw-cache-test-{}", std::process::id()));
        let p = Params::universal(2, RhoBranch::default_for(2)).unwrap();
        let basis = basis_enumerate(1, 2);
        let cold = StructureCache::persistent(&dir).unwrap();
        let v = mul_basis_with(&basis[1], &basis[1], &p, &cold).unwrap();
        cold.flush().unwrap();
        assert_eq!(cold.stats().unwrap().files_on_disk, 1);
        let warm = StructureCache::persistent(&dir).unwrap();
        assert_eq!(warm.get(&p, &basis[1], &basis[1]).unwrap(), Some(v));
        assert_eq!(warm.clear().unwrap(), 1);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn in_memory_has_no_files() {
        let c = StructureCache::in_memory();
        let p = Params::universal(1, RhoBranch::default_for(1)).unwrap();
        let b = BasisElem::identity(1, 1);
        assert_eq!(c.get(&p, &b, &b).unwrap(), None);
        c.insert(&p, &b, &b, AlgElem::basis(b.clone(), p.mode())).unwrap();
        c.flush().unwrap();
        assert!(c.get(&p, &b, &b).unwrap().is_some());
        assert_eq!(c.stats().unwrap().files_on_disk, 0);
    }
}
