//! Bundle directory format.
//!
//! ```text
//! meta.json          {"num_nodes":N,"num_features":d,"num_classes":K}
//! edges.txt          "u v" per line, 0-based
//! features.bin       "GLTB" | u32 N | u32 d | N·d f32, all little-endian, row-major
//! labels.txt         one class id per line
//! noisy_labels.txt   optional, same format as labels.txt
//! ```

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{ClassId, GraphBundle, NodeSplit};
use crate::error::{Error, Result};
use crate::matrix::Dense;

pub const META_FILE: &str = "meta.json";
pub const EDGES_FILE: &str = "edges.txt";
pub const FEATURES_FILE: &str = "features.bin";
pub const LABELS_FILE: &str = "labels.txt";
pub const NOISY_LABELS_FILE: &str = "noisy_labels.txt";
pub const SPLIT_FILE: &str = "split.json";

pub const FEATURES_MAGIC: &[u8; 4] = b"GLTB";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleMeta {
    pub num_nodes: usize,
    pub num_features: usize,
    pub num_classes: usize,
}

pub fn load_bundle(dir: impl AsRef<Path>) -> Result<GraphBundle> {
    let dir = dir.as_ref();
    let meta: BundleMeta = read_json(&dir.join(META_FILE))?;
    let n = meta.num_nodes;

    let features = read_features(&dir.join(FEATURES_FILE))?;
    if features.rows() != n {
        return Err(Error::FeatureRowCount {
            expected: n,
            found: features.rows(),
        });
    }
    if features.cols() != meta.num_features {
        return Err(Error::FeatureColumnCount {
            expected: meta.num_features,
            found: features.cols(),
        });
    }
    let edges = read_edges(&dir.join(EDGES_FILE))?;
    let latent = read_labels(&dir.join(LABELS_FILE))?;
    let noisy_path = dir.join(NOISY_LABELS_FILE);
    let noisy = if noisy_path.exists() {
        Some(read_labels(&noisy_path)?)
    } else {
        None
    };
    GraphBundle::new(meta.num_classes, edges, features, latent, noisy)
}

pub fn save_bundle(bundle: &GraphBundle, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let meta = BundleMeta {
        num_nodes: bundle.num_nodes(),
        num_features: bundle.num_features(),
        num_classes: bundle.num_classes(),
    };
    write_json(&dir.join(META_FILE), &meta)?;
    write_edges(&dir.join(EDGES_FILE), bundle.edges())?;
    write_features(&dir.join(FEATURES_FILE), bundle.features())?;
    write_labels(&dir.join(LABELS_FILE), bundle.latent_labels())?;
    if let Some(noisy) = bundle.noisy_labels() {
        write_labels(&dir.join(NOISY_LABELS_FILE), noisy)?;
    }
    Ok(())
}

/// Reads `split.json` and checks it partitions `num_nodes` nodes.
pub fn read_split(path: &Path, num_nodes: usize) -> Result<NodeSplit> {
    let split: NodeSplit = read_json(path)?;
    split.validate(num_nodes)?;
    Ok(split)
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        context: path.display().to_string(),
        source,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        context: path.display().to_string(),
        source,
    })?;
    text.push('\n');
    write_text(path, &text)
}

fn parse_usize(tok: &str, what: &'static str, path: &Path, line: usize) -> Result<usize> {
    tok.parse().map_err(|_| Error::Parse {
        what,
        location: format!("{}:{}", path.display(), line + 1),
        detail: format!("expected a non-negative integer, found {tok:?}"),
    })
}

/// Raw edge pairs in file order; canonicalization happens in [`GraphBundle`].
pub fn read_edges(path: &Path) -> Result<Vec<(usize, usize)>> {
    let text = read_text(path)?;
    let mut edges = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        let (Some(a), Some(b), None) = (toks.next(), toks.next(), toks.next()) else {
            return Err(Error::Parse {
                what: "edge list",
                location: format!("{}:{}", path.display(), no + 1),
                detail: "expected two node ids".into(),
            });
        };
        edges.push((
            parse_usize(a, "edge list", path, no)?,
            parse_usize(b, "edge list", path, no)?,
        ));
    }
    Ok(edges)
}

pub fn write_edges(path: &Path, edges: &[(usize, usize)]) -> Result<()> {
    let mut out = String::with_capacity(edges.len() * 12);
    for (u, v) in edges {
        out.push_str(&format!("{u} {v}\n"));
    }
    write_text(path, &out)
}

pub fn read_labels(path: &Path) -> Result<Vec<ClassId>> {
    let text = read_text(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(no, l)| parse_usize(l.trim(), "label file", path, no))
        .collect()
}

pub fn write_labels(path: &Path, labels: &[ClassId]) -> Result<()> {
    let mut out = String::with_capacity(labels.len() * 3);
    for l in labels {
        out.push_str(&format!("{l}\n"));
    }
    write_text(path, &out)
}

fn write_matrix_bytes(path: &Path, magic: &[u8; 4], rows: usize, cols: usize, cells: impl Iterator<Item = [u8; 4]>) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let header = [
        magic.as_slice(),
        &(rows as u32).to_le_bytes(),
        &(cols as u32).to_le_bytes(),
    ]
    .concat();
    w.write_all(&header).map_err(|e| Error::io(path, e))?;
    for cell in cells {
        w.write_all(&cell).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Returns `(rows, cols, payload)` after checking magic and length.
fn read_matrix_bytes(path: &Path, magic: &'static [u8; 4], expected: &'static str) -> Result<(usize, usize, Vec<u8>)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < 12 || &bytes[..4] != magic {
        return Err(Error::BadMagic {
            path: path.to_path_buf(),
            expected,
        });
    }
    let rows = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let payload = bytes[12..].to_vec();
    if payload.len() != rows * cols * 4 {
        return Err(Error::Parse {
            what: "binary matrix",
            location: path.display().to_string(),
            detail: format!(
                "header says {rows}x{cols} ({} bytes), payload has {} bytes",
                rows * cols * 4,
                payload.len()
            ),
        });
    }
    Ok((rows, cols, payload))
}

pub fn write_features(path: &Path, features: &Dense<f32>) -> Result<()> {
    write_matrix_bytes(
        path,
        FEATURES_MAGIC,
        features.rows(),
        features.cols(),
        features.as_slice().iter().map(|v| v.to_le_bytes()),
    )
}

pub fn read_features(path: &Path) -> Result<Dense<f32>> {
    let (rows, cols, payload) = read_matrix_bytes(path, FEATURES_MAGIC, "GLTB")?;
    let data: Vec<f32> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteFeature {
            node: pos / cols.max(1),
            column: pos % cols.max(1),
        });
    }
    Dense::from_vec(rows, cols, data)
}

/// Integer matrix in the features layout with a caller-chosen magic.
pub fn write_u32_matrix(path: &Path, magic: &[u8; 4], rows: usize, cols: usize, data: &[u32]) -> Result<()> {
    debug_assert_eq!(data.len(), rows * cols);
    write_matrix_bytes(path, magic, rows, cols, data.iter().map(|v| v.to_le_bytes()))
}

pub fn read_u32_matrix(path: &Path, magic: &'static [u8; 4], expected: &'static str) -> Result<(usize, usize, Vec<u32>)> {
    let (rows, cols, payload) = read_matrix_bytes(path, magic, expected)?;
    let data = payload
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((rows, cols, data))
}

/// Reads a citation graph in the LINQS layout: a `.content` file with
/// `<id> <binary features...> <class>` rows and a `.cites` file with
/// `<cited> <citing>` pairs. Citations to unknown ids and self-citations are
/// dropped; classes are numbered in sorted name order.
pub fn import_linqs(content: &Path, cites: &Path) -> Result<GraphBundle> {
    let text = read_text(content)?;
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut rows: Vec<Vec<f32>> = Vec::new();
    let mut class_names: Vec<String> = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() < 3 {
            return Err(Error::Parse {
                what: "content file",
                location: format!("{}:{}", content.display(), no + 1),
                detail: "expected id, features and class".into(),
            });
        }
        let feats = toks[1..toks.len() - 1]
            .iter()
            .map(|t| {
                t.parse::<f32>().map_err(|_| Error::Parse {
                    what: "content file",
                    location: format!("{}:{}", content.display(), no + 1),
                    detail: format!("bad feature value {t:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if rows.first().is_some_and(|r| r.len() != feats.len()) {
            return Err(Error::FeatureColumnCount {
                expected: rows[0].len(),
                found: feats.len(),
            });
        }
        ids.insert(toks[0].to_string(), rows.len());
        rows.push(feats);
        class_names.push(toks[toks.len() - 1].to_string());
    }
    let classes: BTreeSet<&str> = class_names.iter().map(String::as_str).collect();
    let class_id: HashMap<&str, usize> = classes.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let labels: Vec<usize> = class_names.iter().map(|c| class_id[c.as_str()]).collect();

    let mut edges = Vec::new();
    for line in read_text(cites)?.lines() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if let [a, b] = toks[..] {
            if let (Some(&u), Some(&v)) = (ids.get(a), ids.get(b)) {
                if u != v {
                    edges.push((u, v));
                }
            }
        }
    }
    let d = rows.first().map_or(0, Vec::len);
    let features = Dense::from_vec(rows.len(), d, rows.concat())?;
    GraphBundle::new(classes.len(), edges, features, labels, None)
}
