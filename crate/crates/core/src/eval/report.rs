use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::metrics::{accuracy, confusion_matrix, ConfusionMatrix};
use crate::classifier::Variant;
use crate::error::{Error, Result};
use crate::graph::ClassId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    BeforePerturbation,
    AfterPerturbation,
    AfterLt,
    /// Ablation: label transition with `φ′` kept for every sweep.
    AfterLtFixedPhi,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::BeforePerturbation => "before-perturbation",
            Scenario::AfterPerturbation => "after-perturbation",
            Scenario::AfterLt => "after-lt",
            Scenario::AfterLtFixedPhi => "after-lt-fixed-phi",
        }
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
    pub seconds: Option<f64>,
    /// Seconds per 100 evaluated nodes.
    pub unit_seconds: Option<f64>,
}

/// Scores test-node predictions against the latent labels.
pub fn evaluate_scenario(
    scenario: Scenario,
    pred: &[ClassId],
    latent: &[ClassId],
    k: usize,
    seconds: Option<f64>,
) -> Result<ScenarioReport> {
    let confusion = confusion_matrix(pred, latent, k)?;
    let unit_seconds = seconds.map(|s| unit_runtime(s, pred.len()));
    Ok(ScenarioReport {
        scenario,
        accuracy: accuracy(pred, latent)?,
        confusion,
        seconds,
        unit_seconds,
    })
}

/// `seconds / (nodes / 100)`.
pub fn unit_runtime(seconds: f64, nodes: usize) -> f64 {
    seconds / (nodes.max(1) as f64 / 100.0)
}

/// One line of `report.jsonl`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dataset: String,
    pub classifier: Variant,
    pub nr: f64,
    pub scenario: Scenario,
    pub accuracy: f64,
    pub seconds: Option<f64>,
    pub unit_seconds: Option<f64>,
    pub seed: u64,
}

impl ReportRow {
    pub fn new(dataset: &str, classifier: Variant, nr: f64, seed: u64, report: &ScenarioReport) -> Self {
        Self {
            dataset: dataset.to_string(),
            classifier,
            nr,
            scenario: report.scenario,
            accuracy: report.accuracy,
            seconds: report.seconds,
            unit_seconds: report.unit_seconds,
            seed,
        }
    }
}

pub fn to_jsonl(rows: &[ReportRow]) -> String {
    let mut out = String::new();
    for row in rows {
        out.push_str(&serde_json::to_string(row).expect("report rows serialize"));
        out.push('\n');
    }
    out
}

pub fn parse_jsonl(text: &str) -> Result<Vec<ReportRow>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|source| Error::Json {
                context: format!("report line {}", i + 1),
                source,
            })
        })
        .collect()
}

/// `{dataset}_{scenario}_{nr}.csv`, with `nr` to two decimals.
pub fn confusion_file_name(dataset: &str, scenario: Scenario, nr: f64) -> String {
    format!("{dataset}_{scenario}_{nr:.2}.csv")
}

/// Mean and sample standard deviation of accuracy over seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub dataset: String,
    pub classifier: Variant,
    pub nr: f64,
    pub scenario: Scenario,
    pub mean: f64,
    pub std: f64,
    pub runs: usize,
}

/// Groups rows by dataset, classifier, noise ratio and scenario, in order
/// of first appearance.
pub fn summarize(rows: &[ReportRow]) -> Vec<Summary> {
    let mut order = Vec::new();
    let mut groups: BTreeMap<(String, Variant, u64, Scenario), Vec<f64>> = BTreeMap::new();
    for r in rows {
        let key = (r.dataset.clone(), r.classifier, r.nr.to_bits(), r.scenario);
        let bucket = groups.entry(key.clone()).or_default();
        if bucket.is_empty() {
            order.push(key);
        }
        bucket.push(r.accuracy);
    }
    order
        .into_iter()
        .map(|key| {
            let v = &groups[&key];
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let std = if v.len() > 1 {
                (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            Summary {
                dataset: key.0,
                classifier: key.1,
                nr: f64::from_bits(key.2),
                scenario: key.3,
                mean,
                std,
                runs: v.len(),
            }
        })
        .collect()
}
