//! Trained weights on disk.
//!
//! ```text
//! checkpoint.bin   "GLTW" | u32 version | u8 variant | u32 hops | u32 count
//!                  then per matrix: u32 rows | u32 cols | rows·cols f32
//! checkpoint.json  training config and final accuracies
//! ```
//! All integers and reals are little-endian; matrices are row-major.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{ClassifierParams, Variant};
use super::train::TrainConfig;
use crate::error::{Error, Result};
use crate::matrix::Dense;

pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
pub const CHECKPOINT_META_FILE: &str = "checkpoint.json";
pub const CHECKPOINT_MAGIC: &[u8; 4] = b"GLTW";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub variant: Variant,
    pub config: TrainConfig,
    pub train_accuracy: f64,
    pub val_accuracy: f64,
}

pub fn encode(params: &ClassifierParams<f32>) -> Vec<u8> {
    let mats = params.matrices();
    let mut out = Vec::new();
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.push(params.variant().tag());
    out.extend_from_slice(&(params.hops() as u32).to_le_bytes());
    out.extend_from_slice(&(mats.len() as u32).to_le_bytes());
    for m in mats {
        out.extend_from_slice(&(m.rows() as u32).to_le_bytes());
        out.extend_from_slice(&(m.cols() as u32).to_le_bytes());
        for v in m.as_slice() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(self.malformed(format!("truncated at byte {}", self.pos)));
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn malformed(&self, detail: String) -> Error {
        Error::Parse {
            what: "checkpoint",
            location: self.path.display().to_string(),
            detail,
        }
    }
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<ClassifierParams<f32>> {
    if bytes.len() < 4 || &bytes[..4] != CHECKPOINT_MAGIC {
        return Err(Error::BadMagic {
            path: path.to_path_buf(),
            expected: "GLTW",
        });
    }
    let mut cur = Cursor { bytes, pos: 4, path };
    let version = cur.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(cur.malformed(format!("unsupported version {version}")));
    }
    let tag = cur.take(1)?[0];
    let variant = Variant::from_tag(tag).ok_or_else(|| cur.malformed(format!("unknown variant tag {tag}")))?;
    let hops = cur.u32()? as usize;
    let count = cur.u32()? as usize;
    let mut mats = Vec::with_capacity(count);
    for _ in 0..count {
        let rows = cur.u32()? as usize;
        let cols = cur.u32()? as usize;
        let data = cur
            .take(rows * cols * 4)?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        mats.push(Dense::from_vec(rows, cols, data)?);
    }
    if cur.pos != bytes.len() {
        return Err(cur.malformed(format!("{} trailing bytes", bytes.len() - cur.pos)));
    }
    let params = match (variant, mats.len()) {
        (Variant::Gcn, 2) => {
            let w1 = mats.pop().unwrap();
            let w0 = mats.pop().unwrap();
            if w0.cols() != w1.rows() {
                return Err(cur.malformed(format!("hidden sizes differ: {} vs {}", w0.cols(), w1.rows())));
            }
            ClassifierParams::Gcn { w0, w1 }
        }
        (Variant::Sgc, 1) => ClassifierParams::Sgc {
            w: mats.pop().unwrap(),
            hops,
        },
        (v, n) => return Err(cur.malformed(format!("{v} expects a different matrix count than {n}"))),
    };
    if !params.is_finite() {
        return Err(Error::NonFinite("checkpoint weights"));
    }
    Ok(params)
}

/// Writes `checkpoint.bin` and `checkpoint.json` into `dir`.
pub fn save_checkpoint(dir: &Path, params: &ClassifierParams<f32>, meta: &CheckpointMeta) -> Result<()> {
    let path = dir.join(CHECKPOINT_FILE);
    fs::write(&path, encode(params)).map_err(|e| Error::io(&path, e))?;
    crate::graph::io::write_json(&dir.join(CHECKPOINT_META_FILE), meta)
}

/// Reads the weights from `dir`; a missing file is reported as a missing
/// checkpoint artifact.
pub fn load_checkpoint(dir: &Path) -> Result<ClassifierParams<f32>> {
    let path = dir.join(CHECKPOINT_FILE);
    if !path.exists() {
        return Err(Error::MissingArtifact { name: "checkpoint", path });
    }
    let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
    decode(&bytes, &path)
}

pub fn load_checkpoint_meta(dir: &Path) -> Result<CheckpointMeta> {
    let path = dir.join(CHECKPOINT_META_FILE);
    if !path.exists() {
        return Err(Error::MissingArtifact { name: "checkpoint", path });
    }
    crate::graph::io::read_json(&path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stage_rng, Stage};

    #[test]
    fn round_trip_both_variants() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = stage_rng(1, Stage::Init);
        for variant in [Variant::Gcn, Variant::Sgc] {
            let p = ClassifierParams::<f32>::init(variant, 5, 4, 3, 2, &mut rng);
            let meta = CheckpointMeta {
                variant,
                config: TrainConfig::default(),
                train_accuracy: 0.5,
                val_accuracy: 0.25,
            };
            save_checkpoint(dir.path(), &p, &meta).unwrap();
            assert_eq!(load_checkpoint(dir.path()).unwrap(), p);
            assert_eq!(load_checkpoint_meta(dir.path()).unwrap(), meta);
        }
    }

    #[test]
    fn header_layout() {
        let p = ClassifierParams::Sgc {
            w: Dense::from_vec(1, 2, vec![1.0f32, -2.0]).unwrap(),
            hops: 2,
        };
        let b = encode(&p);
        assert_eq!(&b[..4], b"GLTW");
        assert_eq!(u32::from_le_bytes(b[4..8].try_into().unwrap()), 1);
        assert_eq!(b[8], Variant::Sgc.tag());
        assert_eq!(u32::from_le_bytes(b[9..13].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(b[13..17].try_into().unwrap()), 1);
        assert_eq!(b.len(), 17 + 8 + 8);
        assert_eq!(f32::from_le_bytes(b[29..33].try_into().unwrap()), -2.0);
    }

    #[test]
    fn missing_checkpoint_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let err = load_checkpoint(dir.path()).unwrap_err();
        assert!(err.to_string().starts_with("missing artifact: checkpoint"), "{err}");
    }

    #[test]
    fn corrupt_files_rejected() {
        let path = Path::new("x");
        assert!(matches!(decode(b"NOPE", path), Err(Error::BadMagic { .. })));
        let p = ClassifierParams::Sgc {
            w: Dense::from_vec(1, 2, vec![1.0f32, 2.0]).unwrap(),
            hops: 1,
        };
        let b = encode(&p);
        assert!(decode(&b[..b.len() - 1], path).is_err());
        let mut longer = b.clone();
        longer.push(0);
        assert!(decode(&longer, path).is_err());
    }
}
