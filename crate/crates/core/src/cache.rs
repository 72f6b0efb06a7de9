//! On-disk cache of `M_k` bases, reproducing kernels and calibrated
//! constants, stored as versioned JSON.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{KernelFamily, LambdaTable};

pub const CACHE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    version: u32,
    payload: T,
}

fn read<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Option<T>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(Error::Cache(format!("{}: {e}", path.display()))),
    };
    let env: Envelope<T> = serde_json::from_str(&text)
        .map_err(|e| Error::Cache(format!("{}: {e}", path.display())))?;
    if env.version != CACHE_VERSION {
        return Ok(None);
    }
    Ok(Some(env.payload))
}

fn write<T: Serialize>(path: &Path, payload: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::Cache(format!("{}: {e}", dir.display())))?;
    }
    let text = serde_json::to_string(&Envelope {
        version: CACHE_VERSION,
        payload,
    })
    .map_err(|e| Error::Cache(e.to_string()))?;
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text).map_err(|e| Error::Cache(format!("{}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| Error::Cache(format!("{}: {e}", path.display())))
}

/// Cache directory holding `family-m{m}-k{k}.json` and `lambda.json`.
#[derive(Clone, Debug)]
pub struct KernelCache {
    dir: PathBuf,
}

impl KernelCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn family_path(&self, m: usize, k: usize) -> PathBuf {
        self.dir.join(format!("family-m{m}-k{k}.json"))
    }

    fn lambda_path(&self) -> PathBuf {
        self.dir.join("lambda.json")
    }

    /// Loads the family for `(m, k)`, building and storing it on a miss.
    pub fn family(&self, m: usize, k: usize) -> Result<KernelFamily> {
        let path = self.family_path(m, k);
        if let Some(f) = read::<KernelFamily>(&path)? {
            if f.m == m && f.k == k {
                return Ok(f);
            }
        }
        let f = KernelFamily::build(m, k)?;
        write(&path, &f)?;
        Ok(f)
    }

    pub fn load_lambdas(&self) -> Result<LambdaTable> {
        Ok(read(&self.lambda_path())?.unwrap_or_default())
    }

    pub fn store_lambdas(&self, table: &LambdaTable) -> Result<()> {
        write(&self.lambda_path(), table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::calibrate_lambda;

    #[test]
    fn round_trip() {
        let dir = std::env::temp_dir().join(format!("fermionic-cache-{}", std::process::id()));
        let cache = KernelCache::new(&dir);
        let fam = cache.family(3, 1).unwrap();
        let again = cache.family(3, 1).unwrap();
        assert_eq!(fam.zonal.kernel, again.zonal.kernel);
        let mut table = cache.load_lambdas().unwrap();
        assert!(table.entries.is_empty());
        calibrate_lambda(&fam, 2, &mut table).unwrap();
        cache.store_lambdas(&table).unwrap();
        assert_eq!(cache.load_lambdas().unwrap(), table);
        fs::remove_dir_all(&dir).unwrap();
    }
}
