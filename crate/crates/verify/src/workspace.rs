use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use fermionic_core::cache::KernelCache;
use fermionic_core::kernel::{calibrate_lambda, KernelFamily, LambdaEntry, LambdaTable};
use fermionic_core::spaces::{build_monogenic_basis, build_rk_null_basis, PolySpaceBasis};

use crate::error::Result;

/// Bases, kernels and calibrated constants shared between scenarios,
/// optionally persisted in a cache directory.
#[derive(Default)]
pub struct Workspace {
    cache: Option<KernelCache>,
    families: Mutex<BTreeMap<(usize, usize), Arc<KernelFamily>>>,
    lower: Mutex<BTreeMap<(usize, usize), Arc<PolySpaceBasis>>>,
    lambdas: Mutex<Option<LambdaTable>>,
}

impl Workspace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_cache(dir: impl Into<PathBuf>) -> Self {
        Self {
            cache: Some(KernelCache::new(dir)),
            ..Self::default()
        }
    }

    pub fn family(&self, m: usize, k: usize) -> Result<Arc<KernelFamily>> {
        if let Some(f) = self.families.lock().unwrap().get(&(m, k)) {
            return Ok(f.clone());
        }
        let fam = Arc::new(match &self.cache {
            Some(c) => c.family(m, k)?,
            None => KernelFamily::build(m, k)?,
        });
        self.families.lock().unwrap().insert((m, k), fam.clone());
        Ok(fam)
    }

    /// Basis of `M_k` (shared with the kernel family).
    pub fn monogenic(&self, m: usize, k: usize) -> Result<PolySpaceBasis> {
        Ok(self.family(m, k)?.basis.clone())
    }

    /// Basis of `M_{k-1}`, used to draw `u M_{k-1}`-valued fields.
    pub fn lower(&self, m: usize, k: usize) -> Result<Arc<PolySpaceBasis>> {
        if let Some(b) = self.lower.lock().unwrap().get(&(m, k)) {
            return Ok(b.clone());
        }
        let b = Arc::new(build_monogenic_basis(m, k - 1)?);
        self.lower.lock().unwrap().insert((m, k), b.clone());
        Ok(b)
    }

    pub fn rk_null(&self, m: usize, k: usize, degree: usize) -> Result<PolySpaceBasis> {
        Ok(build_rk_null_basis(m, k, degree)?)
    }

    /// `λ_1, ..., λ_{2j-1}` for `(m, k)`, calibrating whatever is missing.
    pub fn lambdas(&self, m: usize, k: usize, j: usize) -> Result<Vec<LambdaEntry>> {
        let fam = self.family(m, k)?;
        let mut guard = self.lambdas.lock().unwrap();
        if guard.is_none() {
            *guard = Some(match &self.cache {
                Some(c) => c.load_lambdas()?,
                None => LambdaTable::default(),
            });
        }
        let table = guard.as_mut().unwrap();
        let before = table.entries.len();
        calibrate_lambda(&fam, j, table)?;
        if table.entries.len() != before {
            if let Some(c) = &self.cache {
                c.store_lambdas(table)?;
            }
        }
        Ok((1..=j)
            .map(|t| table.entry(m, k, t).cloned().expect("calibrated above"))
            .collect())
    }
}
