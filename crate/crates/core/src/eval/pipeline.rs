use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{log_heatmap_export, ConfusionMatrix};
use super::report::{confusion_file_name, evaluate_scenario, to_jsonl, unit_runtime, ReportRow, Scenario, ScenarioReport};
use crate::classifier::{predict, train, CategoricalDistribution, TrainConfig, Variant};
use crate::error::{Error, Result};
use crate::graph::io::write_text;
use crate::graph::{split_nodes, ClassId, GraphBundle};
use crate::lt::io::{write_inference, InferManifest};
use crate::lt::{run_inference, warmup_transition, DirichletPrior, InferenceConfig, InferenceResult, PhiMode};
use crate::perturb::{inject_label_noise, simulate_perturbators, NoiseSpec, PerturbSpec};

pub const REPORT_FILE: &str = "report.jsonl";
pub const CELLS_DIR: &str = "cells";

/// Settings shared by every `(seed, nr)` cell. The per-cell seed replaces
/// the `seed` fields of `train`, `inference` and `perturb`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub dataset: String,
    pub variant: Variant,
    pub seeds: Vec<u64>,
    pub noise_ratios: Vec<f64>,
    pub perturb: Option<PerturbSpec>,
    /// Also run inference with `φ′` fixed for every sweep.
    pub ablation: bool,
    pub train: TrainConfig,
    pub inference: InferenceConfig,
    pub alpha: f64,
    /// Put measured runtimes into the report (which makes it
    /// non-reproducible byte for byte).
    pub timings: bool,
    pub threads: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            dataset: "graph".into(),
            variant: Variant::Gcn,
            seeds: vec![0, 1, 2],
            noise_ratios: vec![0.1],
            perturb: None,
            ablation: false,
            train: TrainConfig::default(),
            inference: InferenceConfig::default(),
            alpha: 1.0,
            timings: false,
            threads: None,
        }
    }
}

/// Everything produced for one `(seed, nr)` cell.
#[derive(Clone, Debug)]
pub struct CellOutcome {
    pub seed: u64,
    pub nr: f64,
    pub test_nodes: Vec<usize>,
    pub perturbators: Vec<usize>,
    pub train_accuracy: f64,
    pub val_accuracy: f64,
    pub scenarios: Vec<ScenarioReport>,
    pub inference: InferenceResult,
    pub inference_seconds: f64,
    pub fixed_inference: Option<InferenceResult>,
}

impl CellOutcome {
    pub fn scenario(&self, which: Scenario) -> Option<&ScenarioReport> {
        self.scenarios.iter().find(|s| s.scenario == which)
    }
}

fn test_argmax(dist: &CategoricalDistribution, test: &[usize]) -> Vec<ClassId> {
    dist.select_rows(test).argmax_labels()
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_secs_f64()))
}

/// split → noise → train → (perturb) → predict → infer → score, all seeded
/// by `seed`.
pub fn run_cell(bundle: &GraphBundle, cfg: &PipelineConfig, seed: u64, nr: f64) -> Result<CellOutcome> {
    let k = bundle.num_classes();
    let latent = bundle.latent_labels();
    let split = split_nodes(bundle.num_nodes(), seed)?;
    let noisy = inject_label_noise(latent, k, &NoiseSpec { nr, seed })?;
    let train_cfg = TrainConfig {
        seed,
        ..cfg.train.clone()
    };
    let trained = train(bundle, &split, &noisy, cfg.variant, &train_cfg)?;

    let prior = DirichletPrior::symmetric(k, cfg.alpha)?;
    let train_noisy: Vec<ClassId> = split.train.iter().map(|&n| noisy[n]).collect();
    let phi_warm = warmup_transition(&trained.distribution.select_rows(&split.train), &train_noisy, &prior)?;

    let test = &split.test;
    let test_latent: Vec<ClassId> = test.iter().map(|&n| latent[n]).collect();
    let test_noisy: Vec<ClassId> = test.iter().map(|&n| noisy[n]).collect();

    let mut scenarios = vec![evaluate_scenario(
        Scenario::BeforePerturbation,
        &test_argmax(&trained.distribution, test),
        &test_latent,
        k,
        None,
    )?];
    let mut perturbators = Vec::new();
    let observed = match &cfg.perturb {
        Some(spec) => {
            let perturbation = simulate_perturbators(bundle, &split, &PerturbSpec { seed, ..*spec })?;
            perturbators = perturbation.perturbators;
            let dist = predict(&trained.params, &perturbation.bundle)?;
            scenarios.push(evaluate_scenario(
                Scenario::AfterPerturbation,
                &test_argmax(&dist, test),
                &test_latent,
                k,
                None,
            )?);
            dist
        }
        None => trained.distribution.clone(),
    };
    let test_dist = observed.select_rows(test);

    let infer_cfg = InferenceConfig {
        seed,
        ..cfg.inference.clone()
    };
    let (inference, seconds) =
        timed(|| run_inference(&test_dist, &test_noisy, &phi_warm, &prior, &infer_cfg, Some(&test_latent)))?;
    let shown = cfg.timings.then_some(seconds);
    scenarios.push(evaluate_scenario(Scenario::AfterLt, &inference.inferred_labels, &test_latent, k, shown)?);

    let fixed_inference = if cfg.ablation {
        let fixed_cfg = InferenceConfig {
            phi_mode: PhiMode::Fixed,
            ..infer_cfg
        };
        let (fixed, seconds) =
            timed(|| run_inference(&test_dist, &test_noisy, &phi_warm, &prior, &fixed_cfg, Some(&test_latent)))?;
        let shown = cfg.timings.then_some(seconds);
        scenarios.push(evaluate_scenario(Scenario::AfterLtFixedPhi, &fixed.inferred_labels, &test_latent, k, shown)?);
        Some(fixed)
    } else {
        None
    };

    Ok(CellOutcome {
        seed,
        nr,
        test_nodes: test.clone(),
        perturbators,
        train_accuracy: trained.train_accuracy,
        val_accuracy: trained.val_accuracy,
        scenarios,
        inference,
        inference_seconds: seconds,
        fixed_inference,
    })
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub config: PipelineConfig,
    pub num_classes: usize,
    /// Seed-major, then noise ratio in the configured order.
    pub cells: Vec<CellOutcome>,
}

impl ExperimentReport {
    pub fn rows(&self) -> Vec<ReportRow> {
        self.cells
            .iter()
            .flat_map(|c| {
                c.scenarios
                    .iter()
                    .map(|s| ReportRow::new(&self.config.dataset, self.config.variant, c.nr, c.seed, s))
            })
            .collect()
    }

    pub fn jsonl(&self) -> String {
        to_jsonl(&self.rows())
    }

    /// Confusion matrices summed over seeds, keyed by scenario and noise
    /// ratio bits.
    pub fn confusion_totals(&self) -> BTreeMap<(Scenario, u64), ConfusionMatrix> {
        let mut out: BTreeMap<(Scenario, u64), ConfusionMatrix> = BTreeMap::new();
        for c in &self.cells {
            for s in &c.scenarios {
                out.entry((s.scenario, c.nr.to_bits()))
                    .or_insert_with(|| ConfusionMatrix::zeros(self.num_classes))
                    .accumulate(&s.confusion);
            }
        }
        out
    }

    /// Writes `report.jsonl`, confusion CSVs (counts and `log10(c+1)`) and
    /// per-cell inference artifacts under `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_text(&dir.join(REPORT_FILE), &self.jsonl())?;
        for ((scenario, nr), m) in self.confusion_totals() {
            write_confusion(dir, &self.config.dataset, scenario, f64::from_bits(nr), &m)?;
        }
        let alpha = vec![self.config.alpha; self.num_classes];
        for c in &self.cells {
            let cell_dir = dir.join(CELLS_DIR).join(cell_dir_name(c.seed, c.nr));
            fs::create_dir_all(&cell_dir).map_err(|e| Error::io(&cell_dir, e))?;
            let manifest = InferManifest {
                config: InferenceConfig {
                    seed: c.seed,
                    ..self.config.inference.clone()
                },
                alpha: alpha.clone(),
                num_test: c.test_nodes.len(),
                seconds: c.inference_seconds,
                unit_seconds: unit_runtime(c.inference_seconds, c.test_nodes.len()),
                trace: c.inference.trace.clone(),
            };
            write_inference(&cell_dir, &c.inference, &manifest)?;
        }
        Ok(())
    }
}

/// Writes one confusion matrix as counts and as `log10(c+1)`.
pub fn write_confusion(dir: &Path, dataset: &str, scenario: Scenario, nr: f64, m: &ConfusionMatrix) -> Result<()> {
    let name = confusion_file_name(dataset, scenario, nr);
    write_text(&dir.join(&name), &m.to_csv())?;
    let log: Vec<String> = log_heatmap_export(m)
        .iter()
        .map(|r| r.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(","))
        .collect();
    let log_name = name.replace(".csv", "_log10.csv");
    write_text(&dir.join(log_name), &(log.join("\n") + "\n"))
}

pub fn cell_dir_name(seed: u64, nr: f64) -> String {
    format!("seed-{seed}_nr-{nr:.2}")
}

/// Runs every `(seed, nr)` cell, in parallel when more than one thread is
/// available. Cell order in the result is fixed regardless of scheduling.
pub fn run_pipeline(bundle: &GraphBundle, cfg: &PipelineConfig) -> Result<ExperimentReport> {
    if cfg.seeds.is_empty() || cfg.noise_ratios.is_empty() {
        return Err(Error::InvalidConfig("pipeline needs at least one seed and one noise ratio".into()));
    }
    cfg.inference.validate()?;
    cfg.train.validate()?;
    let grid: Vec<(u64, f64)> = cfg
        .seeds
        .iter()
        .flat_map(|&s| cfg.noise_ratios.iter().map(move |&nr| (s, nr)))
        .collect();
    let run = || grid.par_iter().map(|&(s, nr)| run_cell(bundle, cfg, s, nr)).collect::<Result<Vec<_>>>();
    let cells = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    Ok(ExperimentReport {
        config: cfg.clone(),
        num_classes: bundle.num_classes(),
        cells,
    })
}
