use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use sha2::{Digest, Sha256};

/// Write-once spectral arrays on disk, one file per key.
#[derive(Clone, Debug)]
pub struct SpectrumCache {
    dir: PathBuf,
}

impl SpectrumCache {
    pub fn new(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(SpectrumCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{}.spec", hex::encode(Sha256::digest(key.as_bytes()))))
    }

    /// `None` when absent or of the wrong length.
    pub fn get(&self, key: &str, len: usize) -> Option<Vec<Complex64>> {
        let bytes = fs::read(self.path(key)).ok()?;
        if bytes.len() != 16 * len {
            return None;
        }
        Some(
            bytes
                .chunks_exact(16)
                .map(|c| {
                    let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                    let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                    Complex64::new(re, im)
                })
                .collect(),
        )
    }

    /// Written to a temporary file, then renamed into place.
    pub fn put(&self, key: &str, values: &[Complex64]) -> std::io::Result<()> {
        let target = self.path(key);
        let tmp = target.with_extension(format!("tmp{}", std::process::id()));
        let mut bytes = Vec::with_capacity(16 * values.len());
        for v in values {
            bytes.extend_from_slice(&v.re.to_le_bytes());
            bytes.extend_from_slice(&v.im.to_le_bytes());
        }
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, &target)
    }

    /// Removes every cached array; returns how many.
    pub fn clear(&self) -> std::io::Result<usize> {
        let mut n = 0;
        for entry in fs::read_dir(&self.dir)? {
            let p = entry?.path();
            let ext = p.extension().and_then(|e| e.to_str()).unwrap_or("");
            if ext == "spec" || ext.starts_with("tmp") {
                fs::remove_file(&p)?;
                n += 1;
            }
        }
        Ok(n)
    }
}
