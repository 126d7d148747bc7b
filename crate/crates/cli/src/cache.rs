use std::fs;
use std::path::{Path, PathBuf};

use illposed_core::discretize::{GramFile, GramMatrix};
use illposed_core::figures::sha256_hex;
use illposed_core::spectra::{Spectrum, SpectrumFile};
use illposed_core::Result;
use serde::Serialize;

/// Content-addressed store for Gram matrices and spectra. Entries are JSON
/// files named by the SHA-256 of the canonical key; deleting them is safe.
pub struct Cache {
    dir: Option<PathBuf>,
}

#[derive(Serialize)]
struct Key<'a> {
    kind: &'a str,
    format: u32,
    operator: &'a str,
    scheme: &'a str,
    n: usize,
    precision: u32,
    tol: &'a str,
}

impl Cache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Self { dir }
    }

    fn path(&self, kind: &str, op: &str, scheme: &str, n: usize, precision: u32, tol: &str) -> Option<PathBuf> {
        let dir = self.dir.as_ref()?;
        let key = Key { kind, format: 1, operator: op, scheme, n, precision, tol };
        let text = serde_json::to_string(&key).expect("key serializes");
        Some(dir.join(format!("{kind}-{}.json", sha256_hex(text.as_bytes()))))
    }

    fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Option<T> {
        let text = fs::read_to_string(path).ok()?;
        serde_json::from_str(&text).ok()
    }

    fn store<T: Serialize>(path: &Path, value: &T) -> Result<()> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_string(value)?)?;
        fs::rename(tmp, path)?;
        Ok(())
    }

    pub fn gram(
        &self,
        op: &str,
        scheme: &str,
        n: usize,
        precision: u32,
        tol: &str,
        make: impl FnOnce() -> Result<GramMatrix>,
    ) -> Result<GramMatrix> {
        let path = self.path("gram", op, scheme, n, precision, tol);
        if let Some(file) = path.as_deref().and_then(Self::load::<GramFile>) {
            if let Ok(g) = GramMatrix::from_json(&file) {
                return Ok(g);
            }
        }
        let g = make()?;
        if let Some(p) = path {
            Self::store(&p, &g.to_json())?;
        }
        Ok(g)
    }

    pub fn spectrum(
        &self,
        op: &str,
        scheme: &str,
        n: usize,
        precision: u32,
        tol: &str,
        make: impl FnOnce() -> Result<Spectrum>,
    ) -> Result<Spectrum> {
        let path = self.path("spectrum", op, scheme, n, precision, tol);
        if let Some(file) = path.as_deref().and_then(Self::load::<SpectrumFile>) {
            if let Ok(s) = Spectrum::from_json(&file) {
                return Ok(s);
            }
        }
        let s = make()?;
        if let Some(p) = path {
            Self::store(&p, &s.to_json())?;
        }
        Ok(s)
    }
}
