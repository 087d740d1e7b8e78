//! Inference artifacts.
//!
//! ```text
//! inferred_labels.txt   one class id per test node, in test-node order
//! phi_final.csv         K rows of K comma-separated reals, 9 significant digits
//! sample_counts.bin     "GLTC" | u32 N_test | u32 K | N_test·K u32, little-endian
//! infer.json            run manifest
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::inference::{InferenceConfig, InferenceResult};
use crate::error::Result;
use crate::graph::io::{write_json, write_labels, write_text, write_u32_matrix};

pub const INFERRED_LABELS_FILE: &str = "inferred_labels.txt";
pub const PHI_FINAL_FILE: &str = "phi_final.csv";
pub const SAMPLE_COUNTS_FILE: &str = "sample_counts.bin";
pub const INFER_MANIFEST_FILE: &str = "infer.json";
pub const SAMPLE_COUNTS_MAGIC: &[u8; 4] = b"GLTC";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InferManifest {
    pub config: InferenceConfig,
    pub alpha: Vec<f64>,
    pub num_test: usize,
    pub seconds: f64,
    pub unit_seconds: f64,
    pub trace: Vec<f64>,
}

/// Nine significant digits in scientific notation.
pub fn format_phi(result: &InferenceResult) -> String {
    let phi = &result.final_phi;
    let mut out = String::new();
    for z in 0..phi.num_classes() {
        let row: Vec<String> = phi.row(z).iter().map(|v| format!("{v:.8e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_inference(dir: &Path, result: &InferenceResult, manifest: &InferManifest) -> Result<()> {
    write_labels(&dir.join(INFERRED_LABELS_FILE), &result.inferred_labels)?;
    write_text(&dir.join(PHI_FINAL_FILE), &format_phi(result))?;
    write_u32_matrix(
        &dir.join(SAMPLE_COUNTS_FILE),
        SAMPLE_COUNTS_MAGIC,
        result.num_nodes(),
        result.num_classes(),
        &result.sample_counts,
    )?;
    write_json(&dir.join(INFER_MANIFEST_FILE), manifest)
}
