//! Content-addressed spectrum cache: eigenangles keyed by the SHA-256 of
//! the spec's canonical string, stored bit-exactly in a small binary file.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

use qbaker::linalg::{eigendecompose, SpectrumData};
use qbaker::quantizer::{build_map, QuantizationSpec};

const MAGIC: &[u8; 8] = b"QBANGLE1";

pub struct SpectrumCache {
    dir: Option<PathBuf>,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

pub fn content_key(spec: &QuantizationSpec) -> String {
    let mut h = Sha256::new();
    h.update(spec.cache_key().as_bytes());
    hex::encode(h.finalize())
}

fn read_entry(path: &Path) -> Option<Vec<f64>> {
    let bytes = std::fs::read(path).ok()?;
    if bytes.len() < 16 || &bytes[..8] != MAGIC {
        return None;
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().ok()?) as usize;
    if bytes.len() != 16 + 8 * n {
        return None;
    }
    Some(
        bytes[16..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect(),
    )
}

impl SpectrumCache {
    pub fn new(dir: Option<PathBuf>) -> Result<Self> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d)
                .with_context(|| format!("creating cache dir {}", d.display()))?;
        }
        Ok(Self {
            dir,
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        })
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }

    fn entry_path(&self, spec: &QuantizationSpec) -> Option<PathBuf> {
        self.dir
            .as_ref()
            .map(|d| d.join(format!("{}.angles", content_key(spec))))
    }

    /// Cached eigenangles (no eigenvectors); corrupt entries are recomputed
    /// and overwritten.
    pub fn angles(&self, spec: &QuantizationSpec) -> Result<SpectrumData> {
        if let Some(path) = self.entry_path(spec) {
            if let Some(angles) = read_entry(&path) {
                if angles.len() == spec.n {
                    self.hits.fetch_add(1, Ordering::Relaxed);
                    return Ok(SpectrumData {
                        angles,
                        eigenvectors: None,
                    });
                }
            }
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let u = build_map(spec)?;
        let s = eigendecompose(&u, false)?;
        if let Some(path) = self.entry_path(spec) {
            let mut bytes = Vec::with_capacity(16 + 8 * s.angles.len());
            bytes.extend_from_slice(MAGIC);
            bytes.extend_from_slice(&(s.angles.len() as u64).to_le_bytes());
            for a in &s.angles {
                bytes.extend_from_slice(&a.to_le_bytes());
            }
            let tmp = path.with_extension("tmp");
            std::fs::write(&tmp, &bytes)
                .with_context(|| format!("writing cache entry {}", tmp.display()))?;
            std::fs::rename(&tmp, &path).context("publishing cache entry")?;
        }
        Ok(s)
    }
}
